#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ybflow {

// Flat key=value run configuration with typed parsing and an explicit schema
// version; the echoed text is what gets hashed into run manifests.
struct RunConfig {
    int schema = 1;
    int n = 4;
    double L = 20.0;
    int N = 2001;
    double dt = 0.01;
    double t_start = -2000.0;
    double t0 = -100.0;
    double nu = 0.75;
    double mu = 0.2;
    double sigma = 6.0;        // defaults to n + 2 at load time
    bool sigma_set = false;
    double theta = 0.01;
    double delta = 0.5;
    double gamma_measured = 0.2;  // conservative default until measured
    double newton_tol = 1e-10;
    double c_tol = 1e-6;
    double damping = 0.5;
    int snapshot_stride = 5;
    int outer_iters = 8;
    std::string output_dir = "out";
    unsigned long seed = 12345;

    void validate() const {
        if (n < 3) throw std::invalid_argument("config: n must be >= 3");
        if (!(L > 0.0) || N < 3 || N % 2 == 0)
            throw std::invalid_argument("config: need L > 0 and odd N >= 3");
        if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
        if (!(sigma >= 2.0)) throw std::invalid_argument("config: sigma must be >= 2");
        if (!(nu > 0.5 && nu < 1.0)) throw std::invalid_argument("config: nu must lie in (1/2, 1)");
        if (!(mu > 0.0 && mu < 2.0 * nu - 1.0 && mu <= gamma_measured))
            throw std::invalid_argument("config: mu must satisfy 0 < mu < 2 nu - 1 and mu <= gamma");
        if (!(theta > 0.0 && theta <= 0.1))
            throw std::invalid_argument("config: theta must lie in (0, 0.1]");
        if (!(delta > 0.0 && delta <= 1.0))
            throw std::invalid_argument("config: delta must lie in (0, 1]");
        if (!(damping > 0.0 && damping <= 1.0))
            throw std::invalid_argument("config: damping must lie in (0, 1]");
        if (snapshot_stride < 1) throw std::invalid_argument("config: snapshot_stride must be >= 1");
    }

    void finalize() {
        if (!sigma_set) sigma = double(n + 2);
        validate();
    }

    std::string echo() const {
        std::ostringstream os;
        os << "schema=" << schema << "\n"
           << "n=" << n << "\n"
           << "L=" << L << "\n"
           << "N=" << N << "\n"
           << "dt=" << dt << "\n"
           << "t_start=" << t_start << "\n"
           << "t0=" << t0 << "\n"
           << "nu=" << nu << "\n"
           << "mu=" << mu << "\n"
           << "sigma=" << sigma << "\n"
           << "theta=" << theta << "\n"
           << "delta=" << delta << "\n"
           << "gamma_measured=" << gamma_measured << "\n"
           << "newton_tol=" << newton_tol << "\n"
           << "c_tol=" << c_tol << "\n"
           << "damping=" << damping << "\n"
           << "snapshot_stride=" << snapshot_stride << "\n"
           << "outer_iters=" << outer_iters << "\n"
           << "seed=" << seed << "\n";
        return os.str();
    }

    static RunConfig parse(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key=value");
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            try {
                cfg.set(key, val);
            } catch (const std::exception& e) {
                throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key +
                                            "): " + e.what());
            }
        }
        cfg.finalize();
        return cfg;
    }

    void set(const std::string& key, const std::string& val) {
        auto as_int = [&] { return std::stoi(val); };
        auto as_double = [&] { return std::stod(val); };
        if (key == "schema") schema = as_int();
        else if (key == "n") n = as_int();
        else if (key == "L") L = as_double();
        else if (key == "N") N = as_int();
        else if (key == "dt") dt = as_double();
        else if (key == "t_start") t_start = as_double();
        else if (key == "t0") t0 = as_double();
        else if (key == "nu") nu = as_double();
        else if (key == "mu") mu = as_double();
        else if (key == "sigma") { sigma = as_double(); sigma_set = true; }
        else if (key == "theta") theta = as_double();
        else if (key == "delta") delta = as_double();
        else if (key == "gamma_measured") gamma_measured = as_double();
        else if (key == "newton_tol") newton_tol = as_double();
        else if (key == "c_tol") c_tol = as_double();
        else if (key == "damping") damping = as_double();
        else if (key == "snapshot_stride") snapshot_stride = as_int();
        else if (key == "outer_iters") outer_iters = as_int();
        else if (key == "output_dir") output_dir = val;
        else if (key == "seed") seed = std::stoul(val);
        else throw std::invalid_argument("unknown key");
    }
};

}  // namespace ybflow
