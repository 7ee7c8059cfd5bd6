#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "ybflow/config.hpp"
#include "ybflow/io.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/trajectory.hpp"

using namespace ybflow;

TEST_CASE("git-style blob hashes match git hash-object") {
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    // stability: same content, same hash; different content, different hash
    CHECK(git_blob_hash("n=4\n") == git_blob_hash("n=4\n"));
    CHECK(git_blob_hash("n=4\n") != git_blob_hash("n=5\n"));
}

TEST_CASE("run config parses, echoes and validates") {
    SECTION("round trip through echo") {
        RunConfig cfg;
        cfg.n = 5;
        cfg.t_start = -500.0;
        cfg.finalize();
        CHECK(cfg.sigma == 7.0);  // defaults to n + 2
        RunConfig back = RunConfig::parse(cfg.echo());
        CHECK(back.n == 5);
        CHECK(back.sigma == 7.0);
        CHECK(back.t_start == -500.0);
        CHECK(back.echo() == cfg.echo());
    }
    SECTION("comments and blank lines are ignored") {
        RunConfig cfg = RunConfig::parse("# a comment\n\nn=4\nnu=0.8\n");
        CHECK(cfg.n == 4);
        CHECK(cfg.nu == 0.8);
    }
    SECTION("constraint violations are rejected") {
        CHECK_THROWS_AS(RunConfig::parse("n=2\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("nu=0.4\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("nu=0.75\nmu=0.6\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("theta=0.5\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("sigma=1.0\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("N=100\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("bogus_key=1\n"), std::invalid_argument);
        CHECK_THROWS_AS(RunConfig::parse("n four\n"), std::invalid_argument);
    }
    SECTION("mu must respect the measured gamma") {
        RunConfig cfg = RunConfig::parse("mu=0.3\ngamma_measured=0.4\n");
        CHECK(cfg.mu == 0.3);
        CHECK_THROWS_AS(RunConfig::parse("mu=0.45\ngamma_measured=0.4\n"),
                        std::invalid_argument);
    }
}

TEST_CASE("trajectory bundle round trip") {
    namespace fs = std::filesystem;
    auto mp = make_model_params(4);
    auto g = make_grid(8.0, 161);
    Trajectory traj;
    traj.meta.n = 4;
    traj.meta.dt = 0.01;
    traj.meta.solver = "test";
    for (int k = 0; k < 4; ++k) {
        Field f = field_from(g, [&](double x) { return bubble(x, 0.0, mp) + 0.01 * k; }, true);
        Field fd = field_from(g, [&](double) { return 0.01; });
        traj.push(-10.0 + k, f, fd);
    }
    const fs::path dir = fs::temp_directory_path() / "ybflow_test_bundle";
    fs::remove_all(dir);
    RunConfig cfg;
    cfg.finalize();
    save_trajectory(traj, dir, cfg.echo());
    Trajectory back = load_trajectory(dir);
    REQUIRE(back.size() == traj.size());
    CHECK(back.has_time_derivs());
    for (size_t k = 0; k < traj.size(); ++k) {
        CHECK(back.times[k] == traj.times[k]);
        for (int i = 0; i < g->N; i += 13) {
            CHECK(back.fields[k][i] == traj.fields[k][i]);
            CHECK(back.time_derivs[k][i] == traj.time_derivs[k][i]);
        }
    }
    // manifest carries the config hash
    auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["config_hash"].get<std::string>() == git_blob_hash(cfg.echo()));
    CHECK(manifest["schema_version"].get<std::string>() == std::string(kBundleSchemaVersion));
    fs::remove_all(dir);

    CHECK_THROWS_AS(load_trajectory(fs::temp_directory_path() / "ybflow_no_such_bundle"),
                    std::runtime_error);
}

TEST_CASE("trajectory time indexing") {
    auto g = make_grid(4.0, 41);
    Trajectory traj;
    for (int k = 0; k < 5; ++k) traj.push(double(k), Field(g, double(k)));
    CHECK(traj.index_at(2.5) == 2);
    CHECK(traj.index_at(-1.0) == 0);
    CHECK(traj.index_at(9.0) == 4);
    Field mid = traj.at_time(2.5);
    CHECK(mid[3] == Catch::Approx(2.5));
    CHECK_THROWS_AS(traj.push(3.0, Field(g, 0.0)), std::invalid_argument);
}

TEST_CASE("csv writer emits header-first stable rows") {
    CsvWriter csv("a,b,c");
    csv.row(1.0, 2.5, -3.0);
    csv.row(4.0, 5.0, 6.0);
    CHECK(csv.buf == "a,b,c\n1,2.5,-3\n4,5,6\n");
}

TEST_CASE("global norm report serializes to csv") {
    GlobalNormReport rep;
    rep.nu = 0.75;
    WindowNorms w;
    w.tau = -100.0;
    w.l2 = 0.5;
    w.h1 = 0.75;
    w.h2 = 1.0;
    w.w2sigma = 0.25;
    w.linf_weighted = 0.125;
    rep.windows.push_back(w);
    const std::string csv = rep.to_csv();
    CHECK(csv.find("tau,l2,h1,h2,w2sigma,linf") == 0);
    CHECK(csv.find("-100") != std::string::npos);
}
