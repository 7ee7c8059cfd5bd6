#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ybflow/construct.hpp"
#include "ybflow/params.hpp"

using namespace ybflow;

namespace {
ModelParams mp4() {
    static ModelParams mp = make_model_params(4);
    return mp;
}

std::vector<double> sample_times(double a, double b, double h) {
    std::vector<double> t;
    for (double v = a; v <= b + 1e-12; v += h) t.push_back(v);
    return t;
}

// centered-difference residual order of an ODE identity on a sample grid
template <typename Residual>
double measured_order(const Residual& residual_at, double h1, double h2) {
    return std::log2(residual_at(h1) / residual_at(h2));
}
}  // namespace

TEST_CASE("xi0 closed form") {
    auto mp = mp4();
    SECTION("defining identity holds to round-off") {
        for (int k = 0; k < 1000; ++k) {
            const double t = -10.0 - k * 3.7;
            auto [v, d] = xi0(t, mp);
            CHECK(std::abs(d + mp.b_lead * std::exp(-2.0 * v)) < 1e-14);
        }
    }
    SECTION("value and derivative") {
        const double t = -100.0;
        auto [v, d] = xi0(t, mp);
        CHECK(v == Catch::Approx(0.5 * std::log(2.0 * mp.b_lead * 100.0)).epsilon(1e-14));
        CHECK(d == Catch::Approx(-1.0 / 200.0).epsilon(1e-14));
    }
    SECTION("zero crossing at t = -1/(2 b)") {
        auto [v, d] = xi0(-1.0 / (2.0 * mp.b_lead), mp);
        CHECK(v == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("rejects t >= 0") {
        CHECK_THROWS_AS(xi0(0.0, mp), std::invalid_argument);
        CHECK_THROWS_AS(xi0(1.0, mp), std::invalid_argument);
    }
}

TEST_CASE("ode_rhs building blocks") {
    auto mp = mp4();
    SECTION("G3 vanishes at the linearization point") {
        CHECK(g3_remainder(0.0, 2.5) == 0.0);
    }
    SECTION("G3 is quadratically small") {
        const double xi0v = 2.5;
        const double r = std::abs(g3_remainder(1e-3, xi0v)) / std::abs(g3_remainder(5e-4, xi0v));
        CHECK(r == Catch::Approx(4.0).epsilon(0.01));
    }
    SECTION("constructed eta solves the zero-forcing equation") {
        // eta with etadot = lambda eta + a_lead e^{-2 xi0}: rhs residual is 0
        const double t = -150.0;
        auto [x0, x0d] = xi0(t, mp);
        const double eta = 0.0123;
        auto [eta_rhs, h_rhs] = ode_rhs(t, 0.0, eta, 0.0, 0.0, 0.0, 0.0, mp);
        CHECK(eta_rhs ==
              Catch::Approx(mp.lambda_eta * eta + mp.a_lead * std::exp(-2.0 * x0)).epsilon(1e-13));
        CHECK(h_rhs == Catch::Approx(0.0).margin(1e-15));
    }
}

TEST_CASE("operator A") {
    auto mp = mp4();
    const double lambda = mp.lambda_eta;  // 2/3 for n = 4

    SECTION("zero forcing maps to zero") {
        auto times = sample_times(-100.0, -50.0, 0.05);
        std::vector<double> F(times.size(), 0.0);
        auto out = operator_a(times, F, lambda);
        for (double v : out) CHECK(v == 0.0);
    }
    SECTION("constant forcing saturates at -1/lambda = -3/2") {
        auto times = sample_times(-120.0, -50.0, 0.01);
        std::vector<double> F(times.size(), 1.0);
        auto out = operator_a(times, F, lambda);
        CHECK(out.front() == Catch::Approx(-1.5).margin(1e-10));
    }
    SECTION("exponential forcing has the exact closed form") {
        auto times = sample_times(-30.0, -10.0, 0.002);
        std::vector<double> F(times.size());
        for (size_t k = 0; k < times.size(); ++k) F[k] = std::exp(lambda * times[k]);
        auto out = operator_a(times, F, lambda);
        for (size_t k = 0; k < times.size(); k += 1000) {
            const double want = -std::exp(lambda * times[k]) * (times.back() - times[k]);
            CHECK(out[k] == Catch::Approx(want).epsilon(1e-6));
        }
    }
    SECTION("output solves etadot - lambda eta = F at second order") {
        auto residual_at = [&](double h) {
            auto times = sample_times(-60.0, -40.0, h);
            std::vector<double> F(times.size());
            for (size_t k = 0; k < times.size(); ++k) F[k] = std::sin(0.37 * times[k]);
            auto out = operator_a(times, F, lambda);
            double worst = 0.0;
            for (size_t k = 1; k + 1 < times.size(); ++k) {
                const double d = (out[k + 1] - out[k - 1]) / (2.0 * h);
                worst = std::max(worst, std::abs(d - lambda * out[k] - F[k]));
            }
            return worst;
        };
        const double order = measured_order(residual_at, 0.02, 0.01);
        INFO("order " << order);
        CHECK(order >= 1.8);
    }
}

TEST_CASE("operator B") {
    SECTION("zero forcing maps to zero") {
        auto times = sample_times(-10.0, -1.0, 0.01);
        std::vector<double> F(times.size(), 0.0);
        for (double v : operator_b(times, F)) CHECK(v == 0.0);
    }
    SECTION("closed-form spot value (t0^3 - t^3)/(3 t^2) = 7/12") {
        auto times = sample_times(-2.0, -1.0, 0.01);
        std::vector<double> F(times.size(), 1.0);
        auto out = operator_b(times, F);
        CHECK(out.front() == Catch::Approx(7.0 / 12.0).margin(1e-10));
    }
    SECTION("output solves d/dt(t^2 B) = -t^2 F at second order") {
        // the displayed weighted integral satisfies Bdot + (2/t) B = -F
        auto residual_at = [&](double h) {
            auto times = sample_times(-10.0, -2.0, h);
            std::vector<double> F(times.size());
            for (size_t k = 0; k < times.size(); ++k) F[k] = std::cos(0.4 * times[k]);
            auto out = operator_b(times, F);
            double worst = 0.0;
            for (size_t k = 1; k + 1 < times.size(); ++k) {
                const double d = (out[k + 1] - out[k - 1]) / (2.0 * h);
                worst = std::max(worst,
                                 std::abs(d + 2.0 * out[k] / times[k] + F[k]));
            }
            return worst;
        };
        const double order = measured_order(residual_at, 0.02, 0.01);
        INFO("order " << order);
        CHECK(order >= 1.8);
    }
}

TEST_CASE("variation-of-constants solver for hdot + h/t = F") {
    SECTION("closed-form spot value") {
        auto times = sample_times(-2.0, -1.0, 0.01);
        std::vector<double> F(times.size(), 1.0);
        auto out = solve_h_linear(times, F);
        // h(t) = (1/t) int_{t0}^{t} s ds = (t^2 - t0^2)/(2t): at t = -2: -3/4
        CHECK(out.front() == Catch::Approx(-0.75).margin(1e-12));
        CHECK(out.back() == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("defining ODE holds at second order") {
        auto residual_at = [&](double h) {
            auto times = sample_times(-10.0, -2.0, h);
            std::vector<double> F(times.size());
            for (size_t k = 0; k < times.size(); ++k) F[k] = std::cos(0.4 * times[k]);
            auto out = solve_h_linear(times, F);
            double worst = 0.0;
            for (size_t k = 1; k + 1 < times.size(); ++k) {
                const double d = (out[k + 1] - out[k - 1]) / (2.0 * h);
                worst = std::max(worst, std::abs(d + out[k] / times[k] - F[k]));
            }
            return worst;
        };
        const double order = measured_order(residual_at, 0.02, 0.01);
        INFO("order " << order);
        CHECK(order >= 1.8);
    }
}

TEST_CASE("damped Picard driver") {
    using Path = std::vector<double>;
    auto norm = [](const Path& a, const Path& b) {
        double m = 0.0;
        for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };
    SECTION("the identity map converges in one iteration") {
        Path x = {1.0, 2.0, 3.0};
        auto rep = fixed_point([](const Path& p) { return p; }, x, norm, 1e-12, 10, 1.0);
        CHECK(rep.converged);
        CHECK(rep.iterations == 1);
    }
    SECTION("affine contraction x -> x/2 + 1 reaches the fixed point 2") {
        Path x = {0.0};
        auto map = [](const Path& p) { return Path{0.5 * p[0] + 1.0}; };
        auto rep = fixed_point(map, x, norm, 1e-10, 60, 1.0);
        CHECK(rep.converged);
        CHECK(x[0] == Catch::Approx(2.0).margin(1e-9));
        // geometric convergence: needs about log2(1/tol) undamped iterations
        CHECK(rep.iterations <= 40);
        // damping still converges, just slower
        Path y = {0.0};
        auto rep2 = fixed_point(map, y, norm, 1e-8, 200, 0.5);
        CHECK(rep2.converged);
        CHECK(y[0] == Catch::Approx(2.0).margin(1e-7));
    }
    SECTION("invalid damping rejected") {
        Path x = {0.0};
        CHECK_THROWS_AS(fixed_point([](const Path& p) { return p; }, x, norm, 1e-8, 5, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("leading-order eta from the A operator") {
    // with psi = 0 and G = R = 0 the eta update is eta = A(a_lead e^{-2 xi0});
    // the result decays like 1/|t| with a bounded weighted sup
    auto mp = mp4();
    auto times = sample_times(-800.0, -100.0, 0.05);
    std::vector<double> F(times.size());
    for (size_t k = 0; k < times.size(); ++k)
        F[k] = mp.a_lead * std::exp(-2.0 * xi0(times[k], mp).first);
    auto eta = operator_a(times, F, mp.lambda_eta);
    double wsup = 0.0;
    for (size_t k = 0; k < times.size(); ++k)
        wsup = std::max(wsup, std::abs(times[k]) * std::abs(eta[k]));
    // quasi-static level: |t| eta -> a_lead/(2 b_lead lambda); allow the
    // horizon-end transient to double it
    const double level = mp.a_lead / (2.0 * mp.b_lead * mp.lambda_eta);
    INFO("weighted sup " << wsup << ", quasi-static level " << level);
    CHECK(wsup > 0.5 * level);
    CHECK(wsup < 2.5 * level);
    // order-of-magnitude envelope against the C0 constant (2a/b scale)
    const double c0 = 2.0 * mp.a_lead / mp.b_lead / mp.lambda_eta;
    CHECK(wsup < 3.0 * c0);
}

TEST_CASE("construct_ancient smoke runs") {
    auto mp = mp4();
    SECTION("degenerate horizon gives the trivial path") {
        auto g = make_grid(14.0, 701);
        SolverControls ctl;
        ConstructOptions opts;
        auto res = construct_ancient(-100.0, -100.0, 3, ctl, opts, g, mp);
        CHECK(res.converged);
        CHECK(res.path.size() == 1);
        CHECK(res.psi.fields.front().max_abs() == 0.0);
    }
    SECTION("short horizon run reduces the cancellation coefficients") {
        auto g = make_grid(14.0, 701);
        SolverControls ctl;
        ctl.dt = 0.02;
        ctl.snapshot_stride = 5;  // path stride 0.1
        ConstructOptions opts;
        opts.damping = 0.6;
        auto res = construct_ancient(-130.0, -100.0, 4, ctl, opts, g, mp);
        REQUIRE(res.rows.size() >= 2);
        const double first = std::max(res.rows.front().sup_c1, res.rows.front().sup_c2);
        const double last = std::max(res.rows.back().sup_c1, res.rows.back().sup_c2);
        INFO("sup c: first " << first << " last " << last);
        CHECK(last < first);
        // parameters stay in the admissible ball
        CHECK(res.rows.back().h_weighted_sup <= 1.0);
    }
    SECTION("precondition on the horizon") {
        auto g = make_grid(14.0, 701);
        SolverControls ctl;
        ConstructOptions opts;
        CHECK_THROWS_AS(construct_ancient(-100.0, -10.0, 2, ctl, opts, g, mp),
                        std::invalid_argument);
    }
}
