#pragma once

#include <cmath>
#include <stdexcept>

#include "ybflow/grid.hpp"
#include "ybflow/model.hpp"
#include "ybflow/quadrature.hpp"

namespace ybflow {

// ---------------------------------------------------------------------------
// The bubble (cylindrical soliton)
//
//   w(y) = ( k_n lambda e^{gamma y} / (1 + lambda^2 e^{2 gamma y}) )^{(n-2)/2}
//
// solves w'' - w + w^p = 0 exactly; the rational form above is used because
// it satisfies the steady equation identically.  With
//   S(y) = (1/lambda) e^{-gamma y} + lambda e^{gamma y},   T(y) = S'(y)/(gamma S(y)),
// one has w = (k_n/S)^m, m = (n-2)/2, and
//   w'  = -m gamma w T,
//   w'' = gamma^2 w ( m(m+1) T^2 - m ).
// ---------------------------------------------------------------------------

namespace detail {
struct BubbleCore {
    double w, wp, wpp;  // value, first, second derivative
};

inline BubbleCore bubble_core(double y, const ModelParams& mp, double lambda) {
    const double g = mp.gamma;
    const double m = mp.half_exponent();
    const double ep = lambda * std::exp(g * y);
    const double em = std::exp(-g * y) / lambda;
    const double S = ep + em;
    const double T = (ep - em) / S;
    BubbleCore out;
    out.w = std::pow(mp.k_n / S, m);
    out.wp = -m * g * out.w * T;
    out.wpp = g * g * out.w * (m * (m + 1.0) * T * T - m);
    return out;
}
}  // namespace detail

inline double bubble(double x, double shift, const ModelParams& mp, double lambda = 1.0) {
    return detail::bubble_core(x - shift, mp, lambda).w;
}

inline double bubble_deriv(double x, double shift, int order, const ModelParams& mp,
                           double lambda = 1.0) {
    const auto c = detail::bubble_core(x - shift, mp, lambda);
    if (order == 1) return c.wp;
    if (order == 2) return c.wpp;
    throw std::invalid_argument("bubble_deriv: order must be 1 or 2");
}

// w^{p-1}(y) = (k_n/S)^2, handy as the spectral weight
inline double bubble_pm1(double x, double shift, const ModelParams& mp) {
    const double g = mp.gamma;
    const double y = x - shift;
    const double S = std::exp(-g * y) + std::exp(g * y);
    const double base = mp.k_n / S;
    return base * base;
}

// ---------------------------------------------------------------------------
// Two-bubble ansatz pieces
// ---------------------------------------------------------------------------

// z(x) = w(x - xi) + w(x + xi), even
inline Field ansatz_z(GridPtr grid, double xi, const ModelParams& mp) {
    if (xi < 0.0) throw std::invalid_argument("ansatz_z: xi must be >= 0");
    Field f(grid, 0.0, true);
    for (int i = 0; i < grid->N; ++i) {
        const double x = grid->nodes[size_t(i)];
        f[i] = bubble(x, xi, mp) + bubble(x, -xi, mp);
    }
    return f;
}

// zbar(x) = w'(x - xi) - w'(x + xi), even
inline Field ansatz_zbar(GridPtr grid, double xi, const ModelParams& mp) {
    if (xi < 0.0) throw std::invalid_argument("ansatz_zbar: xi must be >= 0");
    Field f(grid, 0.0, true);
    for (int i = 0; i < grid->N; ++i) {
        const double x = grid->nodes[size_t(i)];
        f[i] = bubble_deriv(x, xi, 1, mp) - bubble_deriv(x, -xi, 1, mp);
    }
    return f;
}

inline double z_at(double x, double xi, const ModelParams& mp) {
    return bubble(x, xi, mp) + bubble(x, -xi, mp);
}
inline double zbar_at(double x, double xi, const ModelParams& mp) {
    return bubble_deriv(x, xi, 1, mp) - bubble_deriv(x, -xi, 1, mp);
}
// d/dx z and d²/dx² z
inline double zx_at(double x, double xi, const ModelParams& mp) {
    return bubble_deriv(x, xi, 1, mp) + bubble_deriv(x, -xi, 1, mp);
}
inline double zxx_at(double x, double xi, const ModelParams& mp) {
    return bubble_deriv(x, xi, 2, mp) + bubble_deriv(x, -xi, 2, mp);
}

// u = (1 + eta) z + psi
inline Field assemble_u(GridPtr grid, double xi, double eta, const Field& psi,
                        const ModelParams& mp) {
    Field z = ansatz_z(grid, xi, mp);
    require_same_grid(z, psi, "assemble_u");
    Field u(grid, 0.0, psi.even_symmetric);
    for (int i = 0; i < grid->N; ++i) u[i] = (1.0 + eta) * z[i] + psi[i];
    return u;
}

// ---------------------------------------------------------------------------
// Catalog solutions
// ---------------------------------------------------------------------------

// shrinking round sphere, v_S = ((4/(n+2)) c_n (T-t))^{(n-2)/4}
inline double sphere_solution(double t, double T, const ModelParams& mp) {
    if (!(t < T)) throw std::invalid_argument("sphere_solution: need t < T");
    const double cn = 0.25 * mp.n * (mp.n - 2);
    return std::pow(4.0 / (mp.n + 2.0) * cn * (T - t), 0.25 * (mp.n - 2));
}

// King profile (A / (1 + 2 B r^2 + r^4))^{(n-2)/4}
inline double king_profile(double r, double A, double B, const ModelParams& mp) {
    if (!(A > 0.0)) throw std::invalid_argument("king_profile: A must be positive");
    const double base = 1.0 + 2.0 * B * r * r + r * r * r * r;
    if (!(base > 0.0)) throw std::invalid_argument("king_profile: nonpositive denominator");
    return std::pow(A / base, 0.25 * (mp.n - 2));
}

// ---------------------------------------------------------------------------
// Dimension constants and the bubble integrals behind them
// ---------------------------------------------------------------------------

// Fills a, b (neck-law constants) and the leading projection coefficients
//   c1 = -p int w^{p+1} dx,    c2 = -p int (w')^2 w^{p-1} dx,
// with
//   a = ((p-1) int_0^inf w^p e^x + p int_0^inf w^p e^{-x}) / (p int w^{p+1}),
//   b = (int_0^inf w^p e^{-x}) / (p int (w')^2 w^{p-1}).
inline ModelParams make_model_params(int n, double quad_tol = 1e-13) {
    ModelParams mp = ModelParams::structural(n);
    // w ~ e^{-|x|}; the slowest integrand is w^p e^x ~ e^{-(p-1)x}
    const double tail = std::max(60.0, 80.0 / (mp.p - 1.0));
    auto w = [&](double x) { return detail::bubble_core(x, mp, 1.0); };

    mp.int_w_p1 = quad_gk([&](double x) { return std::pow(w(x).w, mp.p + 1.0); }, -tail, tail,
                          quad_tol, quad_tol);
    mp.int_wp2_wpm1 = quad_gk(
        [&](double x) {
            const auto c = w(x);
            return c.wp * c.wp * std::pow(c.w, mp.p - 1.0);
        },
        -tail, tail, quad_tol, quad_tol);
    mp.int_wp_ex_pos = quad_gk([&](double x) { return std::pow(w(x).w, mp.p) * std::exp(x); }, 0.0,
                               tail, quad_tol, quad_tol);
    mp.int_wp_emx_pos = quad_gk([&](double x) { return std::pow(w(x).w, mp.p) * std::exp(-x); },
                                0.0, tail, quad_tol, quad_tol);

    mp.a = ((mp.p - 1.0) * mp.int_wp_ex_pos + mp.p * mp.int_wp_emx_pos) / (mp.p * mp.int_w_p1);
    mp.b = mp.int_wp_emx_pos / (mp.p * mp.int_wp2_wpm1);
    mp.c1 = -mp.p * mp.int_w_p1;
    mp.c2 = -mp.p * mp.int_wp2_wpm1;
    mp.kappa = std::pow(mp.k_n, 0.5 * (mp.n - 2));
    const double overlap = mp.kappa * (mp.int_wp_ex_pos + mp.int_wp_emx_pos);
    mp.a_lead = overlap / mp.int_w_p1;
    mp.b_lead = overlap / (mp.p * mp.int_wp2_wpm1);
    mp.constants_ready = true;
    return mp;
}

}  // namespace ybflow
