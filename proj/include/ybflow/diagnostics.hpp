#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ybflow/grid.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/quadrature.hpp"
#include "ybflow/trajectory.hpp"

namespace ybflow {

// ---------------------------------------------------------------------------
// Curvature of the conformal metric g = u^{4/(n-2)} (dx^2 + dOmega^2) in the
// cylindrical gauge.  Writing f = beta log u - x (r = e^x), the metric is the
// warped product ds^2 = A^2 dr^2 + B^2 g_{S^{n-1}} with A = e^f, B = r e^f =
// u^beta, and the orthonormal Ricci eigenvalues are
//   Ric_rad = -(n-1) B''/B,
//   Ric_tan = -B''/B + (n-2)(1 - B'^2)/B^2      (' = arclength derivative).
// With B = u^beta this reduces to
//   Ric_rad = -(n-1) beta u^{-2 beta} (u u_xx - u_x^2) / u^2,
//   Ric_tan = u^{-2 beta} [ (n-2)(1 - beta^2 u_x^2/u^2)
//                           - beta (u u_xx - u_x^2)/u^2 ].
// Coordinate components follow by multiplying with the metric factors; the
// reported R11, Rjj carry the Cartesian-frame factor u^{2 beta} e^{-2x} so
// that R11 g^{11} = Ric_rad.  These reductions are locked in by the
// warped-product oracle below (exact on round spheres and cylinders); they
// fix the sign conventions empirically rather than trusting any displayed
// single-line formula.
// ---------------------------------------------------------------------------

struct CurvatureReport {
    double t = 0.0;
    Field R11;
    Field Rjj;
    double min_R11 = 0.0, max_R11 = 0.0;
    double min_R11_x = 0.0, max_R11_x = 0.0;
    double type2_sample = 0.0;  // max over the grid of |R11 g^{11}|
};

namespace detail {

struct RicciPoint {
    double rad;  // orthonormal radial eigenvalue  (= R11 g^{11})
    double tan;  // orthonormal tangential eigenvalue
};

inline RicciPoint ricci_point(double u, double ux, double uxx, const ModelParams& mp) {
    const double bet = mp.beta;
    const double curv = (u * uxx - ux * ux) / (u * u);  // f_xx / beta
    const double u2b = std::pow(u, -2.0 * bet);
    RicciPoint out;
    out.rad = -(mp.n - 1.0) * bet * u2b * curv;
    out.tan = u2b * ((mp.n - 2.0) * (1.0 - bet * bet * ux * ux / (u * u)) - bet * curv);
    return out;
}

}  // namespace detail

// Derivatives: 4th-order central differences by default; exact derivative
// fields can be passed for catalog profiles.  In the far exponential tails
// the combination u u_xx - u_x^2 cancels (those regions are exactly flat
// cones), so finite-difference noise there swamps a vanishing true value;
// the trim floor below marks where the FD evaluation stays meaningful.
inline double curvature_trim_floor(const Grid& g) { return 60.0 * g.dx * g.dx; }

inline Field ricci_radial(const Field& u, const ModelParams& mp, const Field* ux_in = nullptr,
                          const Field* uxx_in = nullptr) {
    for (double v : u.values)
        if (!(v > 0.0)) throw std::domain_error("ricci_radial: u must be positive");
    Field ux = ux_in ? *ux_in : derivative_x(u, 1);
    Field uxx = uxx_in ? *uxx_in : derivative_x(u, 2);
    Field out(u.grid);
    for (int i = 0; i < u.size(); ++i) {
        const double x = u.grid->nodes[size_t(i)];
        const auto rp = detail::ricci_point(u[i], ux[i], uxx[i], mp);
        out[i] = rp.rad * std::pow(u[i], 2.0 * mp.beta) * std::exp(-2.0 * x);
    }
    return out;
}

inline Field ricci_spherical(const Field& u, const ModelParams& mp, const Field* ux_in = nullptr,
                             const Field* uxx_in = nullptr) {
    for (double v : u.values)
        if (!(v > 0.0)) throw std::domain_error("ricci_spherical: u must be positive");
    Field ux = ux_in ? *ux_in : derivative_x(u, 1);
    Field uxx = uxx_in ? *uxx_in : derivative_x(u, 2);
    Field out(u.grid);
    for (int i = 0; i < u.size(); ++i) {
        const double x = u.grid->nodes[size_t(i)];
        const auto rp = detail::ricci_point(u[i], ux[i], uxx[i], mp);
        out[i] = rp.tan * std::pow(u[i], 2.0 * mp.beta) * std::exp(-2.0 * x);
    }
    return out;
}

// orthonormal radial eigenvalue R11 g^{11} per node (the type-II functional)
inline Field ricci_radial_mixed(const Field& u, const ModelParams& mp,
                                const Field* ux_in = nullptr, const Field* uxx_in = nullptr) {
    Field ux = ux_in ? *ux_in : derivative_x(u, 1);
    Field uxx = uxx_in ? *uxx_in : derivative_x(u, 2);
    Field out(u.grid);
    for (int i = 0; i < u.size(); ++i)
        out[i] = detail::ricci_point(u[i], ux[i], uxx[i], mp).rad;
    return out;
}

// scalar curvature R = Ric_rad + (n-1) Ric_tan (orthonormal trace)
inline Field scalar_curvature(const Field& u, const ModelParams& mp,
                              const Field* ux_in = nullptr, const Field* uxx_in = nullptr) {
    Field ux = ux_in ? *ux_in : derivative_x(u, 1);
    Field uxx = uxx_in ? *uxx_in : derivative_x(u, 2);
    Field out(u.grid);
    for (int i = 0; i < u.size(); ++i) {
        const auto rp = detail::ricci_point(u[i], ux[i], uxx[i], mp);
        out[i] = rp.rad + (mp.n - 1.0) * rp.tan;
    }
    return out;
}

// zero the curvature field where u sits below the FD trim floor (the exact
// value there is the flat-cone zero anyway)
inline void trim_tail_noise(Field& r, const Field& u) {
    const double floor = curvature_trim_floor(*u.grid);
    for (int i = 0; i < u.size(); ++i)
        if (u[i] < floor) r[i] = 0.0;
}

// Independent oracle: curvature of the warped product A(r)^2 dr^2 +
// B(r)^2 g_{S^{n-1}} computed from finite differences of A = e^f and
// B = r e^f in the radial coordinate (chain rule to arclength), with
// f = beta log u - x sampled from u.  Shares no algebra with ricci_point().
struct WarpedOracle {
    double rad;
    double tan;
};

inline WarpedOracle ricci_warped_oracle(const std::function<double(double)>& u_of_x, double x,
                                        const ModelParams& mp, double fd_h = 1e-3) {
    auto f_of_r = [&](double r) {
        const double xx = std::log(r);
        return mp.beta * std::log(u_of_x(xx)) - xx;
    };
    const double r = std::exp(x);
    const double h = fd_h * r;
    auto A = [&](double rr) { return std::exp(f_of_r(rr)); };
    auto B = [&](double rr) { return rr * std::exp(f_of_r(rr)); };
    const double Ar = A(r);
    const double Br = B(r);
    const double Bp = (B(r + h) - B(r - h)) / (2.0 * h);
    const double Bpp = (B(r + h) - 2.0 * Br + B(r - h)) / (h * h);
    const double Ap = (A(r + h) - A(r - h)) / (2.0 * h);
    // arclength derivatives: dB/ds = B'/A, d2B/ds2 = (B'' A - B' A')/A^3
    const double B1 = Bp / Ar;
    const double B2 = (Bpp * Ar - Bp * Ap) / (Ar * Ar * Ar);
    WarpedOracle out;
    out.rad = -(mp.n - 1.0) * B2 / Br;
    out.tan = -B2 / Br + (mp.n - 2.0) * (1.0 - B1 * B1) / (Br * Br);
    return out;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct SignChange {
    bool changes = false;
    double neg_lo = 0.0, neg_hi = 0.0;  // witness interval where R < -tol
    double pos_lo = 0.0, pos_hi = 0.0;
    double tol = 0.0;
};

inline SignChange sign_change(const Field& R) {
    SignChange out;
    double mx = R.max_abs();
    out.tol = 1e-10 * mx;
    const Grid& g = *R.grid;
    bool has_neg = false, has_pos = false;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        if (R[i] < -out.tol) {
            if (!has_neg) {
                out.neg_lo = out.neg_hi = x;
                has_neg = true;
            } else {
                out.neg_lo = std::min(out.neg_lo, x);
                out.neg_hi = std::max(out.neg_hi, x);
            }
        } else if (R[i] > out.tol) {
            if (!has_pos) {
                out.pos_lo = out.pos_hi = x;
                has_pos = true;
            } else {
                out.pos_lo = std::min(out.pos_lo, x);
                out.pos_hi = std::max(out.pos_hi, x);
            }
        }
    }
    out.changes = has_neg && has_pos;
    return out;
}

struct Type2Fit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> log_abs_t;
    std::vector<double> log_m;
};

// samples m(t) = max |R11 g^{11}| per snapshot and fits log m against log|t|
inline Type2Fit type2_functional(const Trajectory& traj, const ModelParams& mp) {
    if (traj.size() < 2) throw std::invalid_argument("type2_functional: need >= 2 snapshots");
    const double span = std::abs(traj.times.front()) / std::abs(traj.times.back());
    if (span < 10.0)
        throw std::invalid_argument("type2_functional: need >= 1 decade of |t| span");
    Type2Fit fit;
    for (size_t k = 0; k < traj.size(); ++k) {
        Field mrad = ricci_radial_mixed(traj.fields[k], mp);
        trim_tail_noise(mrad, traj.fields[k]);
        fit.log_abs_t.push_back(std::log(std::abs(traj.times[k])));
        fit.log_m.push_back(std::log(mrad.max_abs()));
    }
    // least squares line
    const size_t n = fit.log_abs_t.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += fit.log_abs_t[i];
        sy += fit.log_m[i];
        sxx += fit.log_abs_t[i] * fit.log_abs_t[i];
        sxy += fit.log_abs_t[i] * fit.log_m[i];
    }
    const double det = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

// metric length int_{x1}^{x2} u^{2/(n-2)} dx (trapezoid with fractional end
// cells, exactly additive over adjacent intervals)
inline double neck_distance(const Field& u, double x1, double x2, const ModelParams& mp) {
    const Grid& g = *u.grid;
    if (!(x1 < x2)) {
        if (x1 == x2) return 0.0;
        throw std::invalid_argument("neck_distance: need x1 <= x2");
    }
    if (x1 < g.nodes.front() || x2 > g.nodes.back())
        throw std::invalid_argument("neck_distance: interval out of grid range");
    auto integrand = [&](int i) { return std::pow(u[i], mp.beta); };
    auto value_at = [&](double x) {
        // linear interpolation of the integrand
        const double s = (x - g.nodes.front()) / g.dx;
        int i = int(std::floor(s));
        if (i < 0) i = 0;
        if (i > g.N - 2) i = g.N - 2;
        const double a = s - i;
        return (1.0 - a) * integrand(i) + a * integrand(i + 1);
    };
    const int ia = int(std::ceil((x1 - g.nodes.front()) / g.dx - 1e-12));
    const int ib = int(std::floor((x2 - g.nodes.front()) / g.dx + 1e-12));
    double s = 0.0;
    if (ia > ib) {  // both ends inside one cell
        return 0.5 * (value_at(x1) + value_at(x2)) * (x2 - x1);
    }
    const double xa = g.nodes[size_t(ia)], xb = g.nodes[size_t(ib)];
    if (x1 < xa) s += 0.5 * (value_at(x1) + integrand(ia)) * (xa - x1);
    for (int i = ia; i < ib; ++i) s += 0.5 * (integrand(i) + integrand(i + 1)) * g.dx;
    if (xb < x2) s += 0.5 * (integrand(ib) + value_at(x2)) * (x2 - xb);
    return s;
}

struct BubbleCloseness {
    double sup_left = 0.0;   // sup_{x < xi(1-delta)} |u - w(.+xi)|
    double sup_right = 0.0;  // sup_{x > -xi(1-delta)} |u - w(.-xi)|
    bool degenerate = false; // window empty below x-coverage
};

inline BubbleCloseness bubble_closeness(const Field& u, double xi, double delta,
                                        const ModelParams& mp) {
    BubbleCloseness out;
    const Grid& g = *u.grid;
    const double cut = xi * (1.0 - delta);
    if (!(cut > 0.0)) {  // delta >= 1 leaves no one-bubble window
        out.degenerate = true;
        return out;
    }
    bool any_left = false, any_right = false;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        if (x < cut) {
            out.sup_left = std::max(out.sup_left, std::abs(u[i] - bubble(x, -xi, mp)));
            any_left = true;
        }
        if (x > -cut) {
            out.sup_right = std::max(out.sup_right, std::abs(u[i] - bubble(x, xi, mp)));
            any_right = true;
        }
    }
    out.degenerate = !(any_left && any_right);
    return out;
}

inline CurvatureReport curvature_report(const Field& u, double t, const ModelParams& mp) {
    CurvatureReport rep;
    rep.t = t;
    rep.R11 = ricci_radial(u, mp);
    rep.Rjj = ricci_spherical(u, mp);
    trim_tail_noise(rep.R11, u);
    trim_tail_noise(rep.Rjj, u);
    const Grid& g = *u.grid;
    int imin = 0, imax = 0;
    for (int i = 1; i < g.N; ++i) {
        if (rep.R11[i] < rep.R11[imin]) imin = i;
        if (rep.R11[i] > rep.R11[imax]) imax = i;
    }
    rep.min_R11 = rep.R11[imin];
    rep.max_R11 = rep.R11[imax];
    rep.min_R11_x = g.nodes[size_t(imin)];
    rep.max_R11_x = g.nodes[size_t(imax)];
    Field mrad = ricci_radial_mixed(u, mp);
    trim_tail_noise(mrad, u);
    rep.type2_sample = mrad.max_abs();
    return rep;
}

}  // namespace ybflow
