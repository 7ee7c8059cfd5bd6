#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ybflow/errorterms.hpp"
#include "ybflow/flow.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"

namespace ybflow {

// Sampled parameter trajectory t -> (xi, xidot, eta, etadot, h, hdot) with
// xi = xi0 + h pointwise.
struct ParamPath {
    std::vector<double> times;
    std::vector<double> xi, xidot, eta, etadot, h, hdot;

    size_t size() const { return times.size(); }

    void resize(size_t m) {
        times.resize(m);
        xi.assign(m, 0.0);
        xidot.assign(m, 0.0);
        eta.assign(m, 0.0);
        etadot.assign(m, 0.0);
        h.assign(m, 0.0);
        hdot.assign(m, 0.0);
    }

    // piecewise-linear evaluation helpers
    double interp(const std::vector<double>& v, double t) const {
        if (t <= times.front()) return v.front();
        if (t >= times.back()) return v.back();
        size_t i = size_t(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
        const double a = (t - times[i]) / (times[i + 1] - times[i]);
        return (1.0 - a) * v[i] + a * v[i + 1];
    }

    XiPath xi_path() const {
        auto self = *this;  // value capture keeps the path alive in callers
        XiPath p;
        p.xi = [self](double t) { return self.interp(self.xi, t); };
        p.xidot = [self](double t) { return self.interp(self.xidot, t); };
        return p;
    }
};

// xi0(t) = (1/2) log(2 b |t|), the homogeneous neck law, with its derivative
// xidot0 = 1/(2t) = -1/(2|t|).  Uses the measured leading coefficient b_lead,
// the constant under which the flow actually contracts the neck.
inline std::pair<double, double> xi0(double t, const ModelParams& mp) {
    if (!(t < 0.0)) throw std::invalid_argument("xi0: requires t < 0");
    if (!mp.constants_ready) throw std::logic_error("xi0: constants not computed");
    return {0.5 * std::log(2.0 * mp.b_lead * (-t)), 0.5 / t};
}

// quadratic remainder of e^{-2 xi} around xi0 (the paper's literal, b-less G3)
inline double g3_remainder(double h, double xi0_val) {
    const double e0 = std::exp(-2.0 * xi0_val);
    return -(e0 * std::exp(-2.0 * h) - e0 + 2.0 * e0 * h);
}

// Right sides of the reduced system in the displayed form:
//   eta_rhs: etadot = lambda eta + a e^{-2 xi} + R1 + G1
//   h_rhs:   hdot + h/t = G3(h) + R2 + G2
// Callers supply R_i, G_i in whatever normalization their derivation uses;
// construct_ancient() below uses the projection-consistent combination.
inline std::pair<double, double> ode_rhs(double t, double h, double eta, double G1, double G2,
                                         double R1, double R2, const ModelParams& mp) {
    const auto [x0, x0dot] = xi0(t, mp);
    const double xi = x0 + h;
    const double eta_rhs = mp.lambda_eta * eta + mp.a_lead * std::exp(-2.0 * xi) + R1 + G1;
    const double h_rhs = g3_remainder(h, x0) + R2 + G2;
    return {eta_rhs, h_rhs};
}

// ---------------------------------------------------------------------------
// Integral solution operators on a sample grid (product integration: exact
// for piecewise-linear forcing, so the closed-form spot values come out to
// round-off).
// ---------------------------------------------------------------------------

// A(F)(t) = -int_t^{t0} e^{lambda (t-s)} F(s) ds; solves etadot - lambda eta = F
// backward from eta(t0) = 0, selecting the decaying branch.
inline std::vector<double> operator_a(const std::vector<double>& times,
                                      const std::vector<double>& F, double lambda) {
    if (times.size() != F.size() || times.size() < 2)
        throw std::invalid_argument("operator_a: undersampled forcing");
    const size_t m = times.size();
    std::vector<double> out(m, 0.0);
    for (size_t k = m - 1; k-- > 0;) {
        const double hstep = times[k + 1] - times[k];
        const double slope = (F[k + 1] - F[k]) / hstep;
        // int_0^h e^{-lambda tau} (F_k + slope tau) dtau
        const double e1 = -std::expm1(-lambda * hstep);  // 1 - e^{-lambda h}
        const double i0 = e1 / lambda;
        const double i1 = (i0 - hstep * std::exp(-lambda * hstep)) / lambda;
        const double seg = F[k] * i0 + slope * i1;
        out[k] = std::exp(-lambda * hstep) * out[k + 1] - seg;
    }
    return out;
}

// B(F)(t) = |t|^{-2} int_t^{t0} s^2 F(s) ds   (the displayed weighted
// integral; by construction it satisfies d/dt(t^2 B) = -t^2 F, i.e.
// Bdot + (2/t) B = -F).
inline std::vector<double> operator_b(const std::vector<double>& times,
                                      const std::vector<double>& F) {
    if (times.size() != F.size() || times.size() < 2)
        throw std::invalid_argument("operator_b: undersampled forcing");
    const size_t m = times.size();
    std::vector<double> cum(m, 0.0);  // int_t^{t0} s^2 F ds
    for (size_t k = m - 1; k-- > 0;) {
        const double hstep = times[k + 1] - times[k];
        const double smid = 0.5 * (times[k] + times[k + 1]);
        const double fmid = 0.5 * (F[k] + F[k + 1]);
        // Simpson: exact for s^2 * linear F (cubic)
        const double seg = hstep / 6.0 *
                           (times[k] * times[k] * F[k] + 4.0 * smid * smid * fmid +
                            times[k + 1] * times[k + 1] * F[k + 1]);
        cum[k] = cum[k + 1] + seg;
    }
    std::vector<double> out(m);
    for (size_t k = 0; k < m; ++k) out[k] = cum[k] / (times[k] * times[k]);
    return out;
}

// Variation-of-constants solution of hdot + h/t = F with h(t0) = 0:
//   h(t) = (1/t) int_{t0}^{t} s F(s) ds.
inline std::vector<double> solve_h_linear(const std::vector<double>& times,
                                          const std::vector<double>& F) {
    if (times.size() != F.size() || times.size() < 2)
        throw std::invalid_argument("solve_h_linear: undersampled forcing");
    const size_t m = times.size();
    std::vector<double> cum(m, 0.0);  // int_t^{t0} s F ds
    for (size_t k = m - 1; k-- > 0;) {
        const double hstep = times[k + 1] - times[k];
        const double smid = 0.5 * (times[k] + times[k + 1]);
        const double fmid = 0.5 * (F[k] + F[k + 1]);
        const double seg =
            hstep / 6.0 * (times[k] * F[k] + 4.0 * smid * fmid + times[k + 1] * F[k + 1]);
        cum[k] = cum[k + 1] + seg;
    }
    std::vector<double> out(m);
    for (size_t k = 0; k < m; ++k) out[k] = -cum[k] / times[k];
    return out;
}

// ---------------------------------------------------------------------------
// Damped Picard driver
// ---------------------------------------------------------------------------

struct FixedPointReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> distances;
};

template <typename Path, typename Map, typename Norm>
FixedPointReport fixed_point(const Map& map, Path& x, const Norm& norm_of_diff, double tol,
                             int max_iter, double damping) {
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("fixed_point: damping must lie in (0,1]");
    FixedPointReport rep;
    for (int it = 0; it < max_iter; ++it) {
        Path next = map(x);
        const double d = norm_of_diff(next, x);
        rep.distances.push_back(d);
        // damped update x <- (1-alpha) x + alpha map(x)
        for (size_t i = 0; i < x.size(); ++i)
            x[i] = (1.0 - damping) * x[i] + damping * next[i];
        rep.iterations = it + 1;
        if (d < tol) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

}  // namespace ybflow
