#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ybflow/grid.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/quadrature.hpp"
#include "ybflow/spectral.hpp"

namespace ybflow {

// Snapshot of the moving ansatz: parameters, ansatz pieces, perturbation.
// ztilde = (1 + eta) z pointwise; all fields share one grid.
struct FlowState {
    double t = 0.0;
    double xi = 0.0, xidot = 0.0;
    double eta = 0.0, etadot = 0.0;
    Field z, zbar, ztilde;
    Field psi, psi_t;

    GridPtr grid() const { return z.grid; }
};

inline FlowState make_flow_state(GridPtr grid, double t, double xi, double xidot, double eta,
                                 double etadot, const Field& psi, const Field& psi_t,
                                 const ModelParams& mp) {
    FlowState st;
    st.t = t;
    st.xi = xi;
    st.xidot = xidot;
    st.eta = eta;
    st.etadot = etadot;
    st.z = ansatz_z(grid, xi, mp);
    st.zbar = ansatz_zbar(grid, xi, mp);
    st.ztilde = Field(grid, 0.0, true);
    for (int i = 0; i < grid->N; ++i) st.ztilde[i] = (1.0 + eta) * st.z[i];
    st.psi = psi;
    st.psi_t = psi_t;
    require_same_grid(st.z, psi, "make_flow_state");
    require_same_grid(st.z, psi_t, "make_flow_state");
    return st;
}

// ---------------------------------------------------------------------------
// M = ztilde^p - (1+eta)(w1^p + w2^p) - d_t ztilde^p,
// with the time derivative expanded through (xidot, etadot):
//   d_t z = -xidot zbar,
//   d_t ztilde^p = p (1+eta)^{p-1} etadot z^p - p (1+eta)^p z^{p-1} xidot zbar.
// ---------------------------------------------------------------------------

inline double m_at(double x, double xi, double xidot, double eta, double etadot,
                   const ModelParams& mp) {
    const double w1 = bubble(x, xi, mp);   // w(x - xi)
    const double w2 = bubble(x, -xi, mp);  // w(x + xi)
    const double zv = w1 + w2;
    const double zb = bubble_deriv(x, xi, 1, mp) - bubble_deriv(x, -xi, 1, mp);
    const double op = 1.0 + eta;
    const double zp = std::pow(zv, mp.p);
    const double dt_ztp = mp.p * std::pow(op, mp.p - 1.0) * etadot * zp -
                          mp.p * std::pow(op, mp.p) * std::pow(zv, mp.p - 1.0) * xidot * zb;
    return std::pow(op, mp.p) * zp - op * (std::pow(w1, mp.p) + std::pow(w2, mp.p)) - dt_ztp;
}

inline Field term_m(const FlowState& st, const ModelParams& mp) {
    Field out(st.grid(), 0.0, true);
    const Grid& g = *st.grid();
    for (int i = 0; i < g.N; ++i)
        out[i] = m_at(g.nodes[size_t(i)], st.xi, st.xidot, st.eta, st.etadot, mp);
    return out;
}

// N(psi) = (ztilde+psi)^p - ztilde^p - p ztilde^{p-1} psi
//          + p psi (ztilde^{p-1} - z^{p-1})
inline Field term_n(const FlowState& st, const ModelParams& mp) {
    const Grid& g = *st.grid();
    Field out(st.grid(), 0.0, st.psi.even_symmetric);
    for (int i = 0; i < g.N; ++i) {
        const double base = st.ztilde[i] + st.psi[i];
        if (!(base > 0.0))
            throw std::domain_error("term_n: nonpositive base ztilde+psi at node " +
                                    std::to_string(i) + " (x=" + std::to_string(g.nodes[size_t(i)]) + ")");
        const double ztp1 = std::pow(st.ztilde[i], mp.p - 1.0);
        out[i] = std::pow(base, mp.p) - std::pow(st.ztilde[i], mp.p) - mp.p * ztp1 * st.psi[i] +
                 mp.p * st.psi[i] * (ztp1 - std::pow(st.z[i], mp.p - 1.0));
    }
    return out;
}

// E(psi) = z^{1-p} M + C(psi,t) + z^{1-p} [ (1 - d_t) N(psi) - p psi d_t z^{p-1} ]
// d_t N is expanded through the stored psi_t and the parameter derivatives;
// the correction C = d1 z - d2 zbar is applied when coefficients are given.
inline Field term_e(const FlowState& st, const std::optional<CorrectionCoeffs>& correction,
                    const ModelParams& mp) {
    const Grid& g = *st.grid();
    Field m = term_m(st, mp);
    Field n = term_n(st, mp);
    Field out(st.grid(), 0.0, true);
    const double op = 1.0 + st.eta;
    for (int i = 0; i < g.N; ++i) {
        const double zv = st.z[i];
        const double zb = st.zbar[i];
        const double z1mp = std::pow(zv, 1.0 - mp.p);
        const double zt = -st.xidot * zb;                      // d_t z
        const double ztilde_t = st.etadot * zv + op * zt;      // d_t ztilde
        const double base = st.ztilde[i] + st.psi[i];
        const double dN = mp.p * std::pow(base, mp.p - 1.0) * (ztilde_t + st.psi_t[i]) -
                          mp.p * std::pow(st.ztilde[i], mp.p - 1.0) * ztilde_t -
                          mp.p * std::pow(zv, mp.p - 1.0) * st.psi_t[i] -
                          mp.p * (mp.p - 1.0) * std::pow(zv, mp.p - 2.0) * zt * st.psi[i];
        const double dt_zpm1 = (mp.p - 1.0) * std::pow(zv, mp.p - 2.0) * zt;
        double c_val = 0.0;
        if (correction) c_val = correction->d1 * zv - correction->d2 * zb;
        out[i] = z1mp * m[i] + c_val + z1mp * (n[i] - dN - mp.p * st.psi[i] * dt_zpm1);
    }
    return out;
}

// Q(psi) = E(psi) - z^{1-p} M
inline Field q_field(const FlowState& st, const Field& e_field, const ModelParams& mp) {
    const Grid& g = *st.grid();
    Field out(st.grid(), 0.0, true);
    for (int i = 0; i < g.N; ++i)
        out[i] = e_field[i] - std::pow(st.z[i], 1.0 - mp.p) *
                                  m_at(g.nodes[size_t(i)], st.xi, st.xidot, st.eta, st.etadot, mp);
    return out;
}

// G1 = c1^{-1} int Q w^p(x+xi) dx,  G2 = c2^{-1} int Q w' w^{p-1}(x+xi) dx
inline std::pair<double, double> projections_g(const Field& q, double xi, const ModelParams& mp) {
    if (!mp.constants_ready) throw std::logic_error("projections_g: constants not computed");
    const Grid& g = *q.grid;
    const auto& sw = simpson_weights(g);
    double p1 = 0.0, p2 = 0.0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        const double wpm1 = bubble_pm1(x, -xi, mp);
        p1 += sw[size_t(i)] * q[i] * bubble(x, -xi, mp) * wpm1;
        p2 += sw[size_t(i)] * q[i] * bubble_deriv(x, -xi, 1, mp) * wpm1;
    }
    return {p1 / mp.c1, p2 / mp.c2};
}

// ---------------------------------------------------------------------------
// Exact-vs-leading expansion of the M projections.
//   exact1 = int M w^p(x+xi) z^{1-p} dx,
//   exact2 = int M w'(x+xi) w^{p-1}(x+xi) z^{1-p} dx,
//   lead1  = c1 (etadot - lambda eta - a e^{-2 xi}),
//   lead2  = c2 (xidot + b e^{-2 xi}),
// residuals R_i = exact_i - lead_i.
// ---------------------------------------------------------------------------

struct ProjectionExpansion {
    double exact1 = 0.0, exact2 = 0.0;
    double lead1 = 0.0, lead2 = 0.0;
    double c1 = 0.0, c2 = 0.0;
    double R1 = 0.0, R2 = 0.0;
};

inline ProjectionExpansion projection_expansion(double xi, double xidot, double eta, double etadot,
                                                const ModelParams& mp) {
    if (!mp.constants_ready)
        throw std::logic_error("projection_expansion: constants not computed");
    if (xi < 2.0)
        throw std::invalid_argument("projection_expansion: xi >= 2 (asymptotic regime) required");
    const double span = 40.0 + 2.0 * xi;
    auto m_part = [&](double x) { return m_at(x, xi, xidot, eta, etadot, mp); };
    ProjectionExpansion out;
    out.exact1 = quad_gk(
        [&](double x) {
            return m_part(x) * bubble(x, -xi, mp) * bubble_pm1(x, -xi, mp) *
                   std::pow(z_at(x, xi, mp), 1.0 - mp.p);
        },
        -span, span, 1e-14, 1e-12);
    out.exact2 = quad_gk(
        [&](double x) {
            return m_part(x) * bubble_deriv(x, -xi, 1, mp) * bubble_pm1(x, -xi, mp) *
                   std::pow(z_at(x, xi, mp), 1.0 - mp.p);
        },
        -span, span, 1e-14, 1e-12);
    out.c1 = mp.c1;
    out.c2 = mp.c2;
    out.lead1 = mp.c1 * (etadot - mp.lambda_eta * eta - mp.a_lead * std::exp(-2.0 * xi));
    out.lead2 = mp.c2 * (xidot + mp.b_lead * std::exp(-2.0 * xi));
    out.R1 = out.exact1 - out.lead1;
    out.R2 = out.exact2 - out.lead2;
    return out;
}

}  // namespace ybflow
