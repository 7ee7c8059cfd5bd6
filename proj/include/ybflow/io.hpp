#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ybflow/grid.hpp"
#include "ybflow/trajectory.hpp"

namespace ybflow {

inline constexpr const char* kBundleSchemaVersion = "1";

// ---------------------------------------------------------------------------
// SHA-1, used for git-style content hashes of config text:
//   sha1("blob <len>\0<content>")
// ---------------------------------------------------------------------------

namespace detail {

class Sha1 {
public:
    Sha1() { reset(); }

    void reset() {
        h_[0] = 0x67452301u;
        h_[1] = 0xEFCDAB89u;
        h_[2] = 0x98BADCFEu;
        h_[3] = 0x10325476u;
        h_[4] = 0xC3D2E1F0u;
        len_ = 0;
        buf_.clear();
    }

    void update(const void* data, size_t n) {
        const uint8_t* p = static_cast<const uint8_t*>(data);
        len_ += n;
        buf_.insert(buf_.end(), p, p + n);
        while (buf_.size() >= 64) {
            process(buf_.data());
            buf_.erase(buf_.begin(), buf_.begin() + 64);
        }
    }

    std::string hex_digest() {
        std::vector<uint8_t> tail = buf_;
        const uint64_t bits = len_ * 8;
        tail.push_back(0x80);
        while (tail.size() % 64 != 56) tail.push_back(0);
        for (int i = 7; i >= 0; --i) tail.push_back(uint8_t((bits >> (8 * i)) & 0xFF));
        for (size_t off = 0; off < tail.size(); off += 64) process(tail.data() + off);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h_[i]);
        return std::string(out, 40);
    }

private:
    static uint32_t rol(uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

    void process(const uint8_t* block) {
        uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (uint32_t(block[4 * i]) << 24) | (uint32_t(block[4 * i + 1]) << 16) |
                   (uint32_t(block[4 * i + 2]) << 8) | uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; ++i) {
            uint32_t f, k;
            if (i < 20) {
                f = (b & c) | ((~b) & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    uint32_t h_[5];
    uint64_t len_ = 0;
    std::vector<uint8_t> buf_;
};

}  // namespace detail

inline std::string git_blob_hash(const std::string& content) {
    detail::Sha1 sha;
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    sha.update(header.data(), header.size());
    sha.update(content.data(), content.size());
    return sha.hex_digest();
}

// ---------------------------------------------------------------------------
// CSV helpers (header-first, stable column order)
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CsvWriter {
    std::string buf;

    explicit CsvWriter(const std::string& header) { buf = header + "\n"; }

    template <typename... Ts>
    void row(Ts... vals) {
        char cell[64];
        bool first = true;
        auto emit = [&](double v) {
            std::snprintf(cell, sizeof cell, "%.12g", v);
            if (!first) buf += ',';
            buf += cell;
            first = false;
        };
        (emit(double(vals)), ...);
        buf += '\n';
    }
};

// ---------------------------------------------------------------------------
// Trajectory bundle: one values-only CSV per snapshot plus a JSON manifest
// carrying the grid, the times, and the run metadata.
// ---------------------------------------------------------------------------

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& dir,
                            const std::string& config_echo = "") {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    if (traj.size() == 0) throw std::invalid_argument("save_trajectory: empty trajectory");
    const Grid& g = *traj.grid();
    nlohmann::json manifest;
    manifest["schema_version"] = kBundleSchemaVersion;
    manifest["grid"] = {{"L", g.L}, {"N", g.N}, {"dx", g.dx}};
    manifest["n"] = traj.meta.n;
    manifest["dt"] = traj.meta.dt;
    manifest["snapshot_stride"] = traj.meta.snapshot_stride;
    manifest["solver"] = traj.meta.solver;
    manifest["outcome"] = to_string(traj.meta.outcome);
    manifest["halted_at"] = traj.meta.halted_at;
    manifest["times"] = traj.times;
    manifest["has_time_derivs"] = traj.has_time_derivs();
    if (!config_echo.empty()) {
        manifest["config"] = config_echo;
        manifest["config_hash"] = git_blob_hash(config_echo);
    }
    std::vector<std::string> files;
    char name[64];
    for (size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(name, sizeof name, "snapshot_%06zu.csv", k);
        files.push_back(name);
        std::string csv = "u\n";
        char cell[48];
        for (double v : traj.fields[k].values) {
            std::snprintf(cell, sizeof cell, "%.17g\n", v);
            csv += cell;
        }
        write_text_file(dir / name, csv);
        if (traj.has_time_derivs()) {
            std::snprintf(name, sizeof name, "snapshot_%06zu_dt.csv", k);
            std::string csvd = "du_dt\n";
            for (double v : traj.time_derivs[k].values) {
                std::snprintf(cell, sizeof cell, "%.17g\n", v);
                csvd += cell;
            }
            write_text_file(dir / name, csvd);
        }
    }
    manifest["files"] = files;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline Trajectory load_trajectory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw std::runtime_error("missing bundle manifest: " + mpath.string());
    nlohmann::json manifest = nlohmann::json::parse(read_text_file(mpath));
    if (manifest.at("schema_version").get<std::string>() != kBundleSchemaVersion)
        throw std::runtime_error("unsupported bundle schema version");
    GridPtr grid = make_grid(manifest["grid"]["L"].get<double>(), manifest["grid"]["N"].get<int>());
    Trajectory traj;
    traj.meta.n = manifest.value("n", 0);
    traj.meta.dt = manifest.value("dt", 0.0);
    traj.meta.snapshot_stride = manifest.value("snapshot_stride", 0.0);
    traj.meta.solver = manifest.value("solver", "");
    const bool has_derivs = manifest.value("has_time_derivs", false);
    std::vector<double> times = manifest.at("times").get<std::vector<double>>();
    std::vector<std::string> files = manifest.at("files").get<std::vector<std::string>>();
    if (times.size() != files.size()) throw std::runtime_error("bundle manifest inconsistent");
    auto read_column = [&](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw std::runtime_error("missing snapshot file: " + p.string());
        std::string line;
        std::getline(in, line);  // header
        Field f(grid, 0.0, false);
        for (int i = 0; i < grid->N; ++i) {
            if (!std::getline(in, line))
                throw std::runtime_error("snapshot file truncated: " + p.string());
            f[i] = std::stod(line);
        }
        return f;
    };
    for (size_t k = 0; k < times.size(); ++k) {
        Field f = read_column(dir / files[k]);
        if (has_derivs) {
            fs::path dpath = dir / files[k];
            dpath.replace_filename(dpath.stem().string() + "_dt.csv");
            traj.push(times[k], std::move(f), read_column(dpath));
        } else {
            traj.push(times[k], std::move(f));
        }
    }
    return traj;
}

}  // namespace ybflow
