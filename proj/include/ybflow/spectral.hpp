#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ybflow/grid.hpp"
#include "ybflow/linalg.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/quadrature.hpp"

namespace ybflow {

// Discrete generalized eigenproblem for the linearization around one bubble:
//   A theta = -lambda B theta,
//   A = D2 - I + p w^{p-1},   B = p w^{p-1}  (diagonal, positive),
// second-order central differences, Dirichlet zero at +-L.  The matrices act
// on interior nodes; boundary values are fixed to zero.  This convention puts
// lambda_{-1} = -(p-1)/p < 0 and lambda_0 = 0 with theta_0 ~ w'.
struct OperatorPair {
    GridPtr grid;
    double p = 0.0;
    std::vector<double> a_lower, a_diag, a_upper;  // interior tridiagonal A
    std::vector<double> b_diag;                    // interior diagonal B = p w^{p-1}

    int interior() const { return grid->N - 2; }

    // apply A to a full-grid field (Dirichlet ghost zeros), full-grid result
    Field apply_a(const Field& f) const {
        const Grid& g = *grid;
        Field out(f.grid);
        const double idx2 = 1.0 / (g.dx * g.dx);
        for (int i = 1; i < g.N - 1; ++i) {
            const double lap = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * idx2;
            out[i] = lap - f[i] + b_diag[size_t(i - 1)] * f[i];
        }
        out[0] = out[g.N - 1] = 0.0;
        return out;
    }
};

inline OperatorPair build_l0(GridPtr grid, const ModelParams& mp) {
    if (grid->dx > 0.05 + 1e-15)
        throw std::invalid_argument("build_l0: grid too coarse to resolve w (need dx <= 0.05)");
    OperatorPair op;
    op.grid = grid;
    op.p = mp.p;
    const int m = grid->N - 2;
    const double idx2 = 1.0 / (grid->dx * grid->dx);
    op.a_diag.resize(size_t(m));
    op.a_lower.assign(size_t(m - 1), idx2);
    op.a_upper.assign(size_t(m - 1), idx2);
    op.b_diag.resize(size_t(m));
    for (int k = 0; k < m; ++k) {
        const double x = grid->nodes[size_t(k + 1)];
        const double wpm1 = bubble_pm1(x, 0.0, mp);
        op.b_diag[size_t(k)] = mp.p * wpm1;
        op.a_diag[size_t(k)] = -2.0 * idx2 - 1.0 + mp.p * wpm1;
    }
    return op;
}

struct EigenPair {
    double lambda = 0.0;
    Field theta;
};

namespace detail {

// number of pencil eigenvalues mu of A x = mu B x below sigma
// == negative inertia of A - sigma B (LDL^T sign count)
inline int sturm_count(const OperatorPair& op, double sigma) {
    const int m = op.interior();
    int count = 0;
    double d_prev = 0.0;
    const double tiny = 1e-300;
    for (int i = 0; i < m; ++i) {
        double d = op.a_diag[size_t(i)] - sigma * op.b_diag[size_t(i)];
        if (i > 0) {
            const double c = op.a_lower[size_t(i - 1)];
            d -= c * c / d_prev;
        }
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++count;
        d_prev = d;
    }
    return count;
}

// m_target-th smallest pencil eigenvalue (1-based) by Sturm bisection
inline double bisect_eigenvalue(const OperatorPair& op, int m_target, double lo, double hi) {
    for (int it = 0; it < 240 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(op, mid) >= m_target)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// shifted inverse iteration for the pencil; returns a full-grid vector
inline Field pencil_eigenvector(const OperatorPair& op, double mu, int max_iter = 60) {
    const int m = op.interior();
    BandedMatrix M(m, 1, 1);
    auto assemble = [&](double shift) {
        M.zero();
        for (int i = 0; i < m; ++i) {
            M.at(i, i) = op.a_diag[size_t(i)] - shift * op.b_diag[size_t(i)];
            if (i > 0) M.at(i, i - 1) = op.a_lower[size_t(i - 1)];
            if (i + 1 < m) M.at(i, i + 1) = op.a_upper[size_t(i)];
        }
        return M.factor();
    };
    // nudge the shift off the eigenvalue so the solve stays well-posed
    double shift = mu + 1e-11 * std::max(1.0, std::abs(mu));
    if (!assemble(shift)) {
        shift = mu - 1e-9 * std::max(1.0, std::abs(mu));
        if (!assemble(shift)) throw std::runtime_error("pencil_eigenvector: singular shift");
    }
    std::vector<double> y(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) y[size_t(i)] = 1.0 + 0.1 * std::cos(0.001 * i);
    double prev_norm = 0.0;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> rhs(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) rhs[size_t(i)] = op.b_diag[size_t(i)] * y[size_t(i)];
        M.solve(rhs);
        double nrm = 0.0;
        for (double v : rhs) nrm = std::max(nrm, std::abs(v));
        if (!(nrm > 0.0)) throw std::runtime_error("pencil_eigenvector: zero iterate");
        for (int i = 0; i < m; ++i) y[size_t(i)] = rhs[size_t(i)] / nrm;
        if (it > 0 && std::abs(nrm - prev_norm) <= 1e-13 * nrm) {
            converged = true;
            break;
        }
        prev_norm = nrm;
    }
    if (!converged) throw std::runtime_error("pencil_eigenvector: inverse iteration stalled");
    Field out(op.grid);
    for (int i = 0; i < m; ++i) out[i + 1] = y[size_t(i)];
    out[0] = out[op.grid->N - 1] = 0.0;
    return out;
}

}  // namespace detail

// k smallest eigenvalues of A theta = -lambda B theta (lambda = -mu for the
// pencil A x = mu B x; the k largest mu).  Eigenfunctions are normalized to
// unit L^2(w^{p-1} dx) norm with sign fixed by theta(0) > 0 for even modes
// and theta'(0) > 0 for odd ones.
inline std::vector<EigenPair> eigenpairs(const OperatorPair& op, int k) {
    if (k < 2) throw std::invalid_argument("eigenpairs: need k >= 2");
    const int m = op.interior();
    if (k > m) throw std::invalid_argument("eigenpairs: k exceeds grid modes");
    // the physical low modes sit in a moderate mu-window; the boundary-weight
    // artifacts live at hugely negative mu and stay out of the way
    const double hi = 2.0, lo = -80.0;
    if (detail::sturm_count(op, hi) - detail::sturm_count(op, lo) < k)
        throw std::runtime_error("eigenpairs: search window does not hold k modes");
    const int total_below_hi = detail::sturm_count(op, hi);
    const auto& sw = simpson_weights(*op.grid);
    std::vector<EigenPair> out;
    for (int j = 0; j < k; ++j) {
        const int target = total_below_hi - j;  // j-th largest mu
        const double mu = detail::bisect_eigenvalue(op, target, lo, hi);
        EigenPair ep;
        ep.lambda = -mu;
        ep.theta = detail::pencil_eigenvector(op, mu);
        double nrm2 = 0.0;
        for (int i = 1; i < op.grid->N - 1; ++i)
            nrm2 += sw[size_t(i)] * ep.theta[i] * ep.theta[i] * (op.b_diag[size_t(i - 1)] / op.p);
        const double nrm = std::sqrt(nrm2);
        const int c = op.grid->center_index();
        double sign_probe = ep.theta[c];
        if (std::abs(sign_probe) < 1e-6 * ep.theta.max_abs()) sign_probe = ep.theta[c + 1];
        const double scale = (sign_probe < 0.0 ? -1.0 : 1.0) / nrm;
        for (double& v : ep.theta.values) v *= scale;
        out.push_back(std::move(ep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projections and correction systems
// ---------------------------------------------------------------------------

struct ProjectionResult {
    double coeff_w = 0.0;       // projection onto w(.-xi) over its Gram entry
    double coeff_wprime = 0.0;  // projection onto w'(.-xi) over its Gram entry
    Field f_perp;
};

namespace detail {

// solve the 2x2 system  [P1(b1) P1(b2); P2(b1) P2(b2)] c = [P1(f); P2(f)]
struct TwoByTwo {
    double m11, m12, m21, m22;
    double det() const { return m11 * m22 - m12 * m21; }
    void solve(double r1, double r2, double& c1, double& c2) const {
        const double d = det();
        if (std::abs(d) < 1e-300) throw std::runtime_error("singular 2x2 Gram system");
        c1 = (r1 * m22 - r2 * m12) / d;
        c2 = (m11 * r2 - m21 * r1) / d;
    }
};

}  // namespace detail

// Removes the w(.-xi), w'(.-xi) components of f in the L^2(w^{p-1}(.-xi) dx)
// pairing, so that f_perp satisfies both discrete orthogonality conditions.
inline ProjectionResult project_out(const Field& f, double xi, const ModelParams& mp) {
    const Grid& g = *f.grid;
    const auto& sw = simpson_weights(g);
    Field bw(f.grid), bwp(f.grid);
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        bw[i] = bubble(x, xi, mp);
        bwp[i] = bubble_deriv(x, xi, 1, mp);
    }
    auto pair_with = [&](const Field& a, const Field& b) {
        double s = 0.0;
        for (int i = 0; i < g.N; ++i)
            s += sw[size_t(i)] * a[i] * b[i] * bubble_pm1(g.nodes[size_t(i)], xi, mp);
        return s;
    };
    detail::TwoByTwo G{pair_with(bw, bw), pair_with(bw, bwp), pair_with(bwp, bw),
                       pair_with(bwp, bwp)};
    const double pf1 = pair_with(f, bw), pf2 = pair_with(f, bwp);
    ProjectionResult out;
    out.coeff_w = pf1 / G.m11;
    out.coeff_wprime = pf2 / G.m22;
    double cw, cwp;
    G.solve(pf1, pf2, cw, cwp);
    out.f_perp = f;
    for (int i = 0; i < g.N; ++i) out.f_perp[i] -= cw * bw[i] + cwp * bwp[i];
    return out;
}

// Even-pair variant used on even fields: subtracts a z / zbar combination so
// that both orthogonality conditions vanish while evenness is preserved.
// Returns the subtracted coefficients (alpha for z, beta for zbar).
inline std::pair<double, double> remove_even_projections(Field& psi, double xi,
                                                         const ModelParams& mp) {
    const Grid& g = *psi.grid;
    const auto& sw = simpson_weights(g);
    Field z(psi.grid), zb(psi.grid), tw(psi.grid), twp(psi.grid);
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        z[i] = z_at(x, xi, mp);
        zb[i] = zbar_at(x, xi, mp);
        const double wpm1 = bubble_pm1(x, -xi, mp);
        tw[i] = bubble(x, -xi, mp) * wpm1;           // w w^{p-1} at the left bubble
        twp[i] = bubble_deriv(x, -xi, 1, mp) * wpm1; // w' w^{p-1} at the left bubble
    }
    auto pair_with = [&](const Field& a, const Field& weight) {
        double s = 0.0;
        for (int i = 0; i < g.N; ++i) s += sw[size_t(i)] * a[i] * weight[i];
        return s;
    };
    detail::TwoByTwo G{pair_with(z, tw), pair_with(zb, tw), pair_with(z, twp),
                       pair_with(zb, twp)};
    double al, be;
    G.solve(pair_with(psi, tw), pair_with(psi, twp), al, be);
    for (int i = 0; i < g.N; ++i) psi[i] -= al * z[i] + be * zb[i];
    return {al, be};
}

// Correction-coefficient system (d1, d2).  Fields are given in the original
// (unshifted) frame; the working frame of the derivation is phi(x) =
// psi(x - xi), in which the correction basis is
//   wbar(x)  = w(x) + w(x - 2 xi)        -> z            (unshifted)
//   wtilde(x) = w'(x) - w'(x - 2 xi)     -> w'(.+xi) - w'(.-xi) = -zbar,
// and the error term is
//   E(phi) = -xidot phi_x + (wbar^{1-p} - w^{1-p}) (phi_xx - phi).
// The system d1 a_1^i + d2 a_2^i = E^i (i = -1, 0) is solved with the raw
// (un-normalized) eigenmode shapes theta_{-1} = w, theta_0 = w'.
struct CorrectionCoeffs {
    double d1 = 0.0, d2 = 0.0;
    double D = 0.0;  // a11 * a22 - a21 * a12
    // raw convention: theta_{-1} = w, theta_0 = w'
    double a11 = 0.0, a12 = 0.0;  // a_1^{-1}, a_2^{-1}
    double a21 = 0.0, a22 = 0.0;  // a_1^{0},  a_2^{0}
    double E_minus1 = 0.0, E_0 = 0.0;
    // same entries against the unit-L2(w^{p-1}) normalized eigenmodes
    double a11n = 0.0, a12n = 0.0, a21n = 0.0, a22n = 0.0;
    double E_minus1n = 0.0, E_0n = 0.0;

    // correction field C = d1 * z - d2 * zbar (wtilde = -zbar unshifted)
    double c_at(double x, double xi, const ModelParams& mp) const {
        return d1 * z_at(x, xi, mp) - d2 * zbar_at(x, xi, mp);
    }
};

inline CorrectionCoeffs correction_coeffs(const Field& psi, const Field& psi_xx_minus_psi,
                                          double xi, double xidot, const ModelParams& mp) {
    require_same_grid(psi, psi_xx_minus_psi, "correction_coeffs");
    const Grid& g = *psi.grid;
    const auto& sw = simpson_weights(g);
    Field psix = derivative_x(psi, 1);
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0, e1 = 0, e0 = 0;
    double nrm_m1 = 0, nrm_0 = 0;  // squared L2(w^{p-1}) norms of w, w'
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        const double wpm1 = bubble_pm1(x, -xi, mp); // weight at the left bubble
        const double th_m1 = bubble(x, -xi, mp);
        const double th_0 = bubble_deriv(x, -xi, 1, mp);
        const double zv = z_at(x, xi, mp);
        const double wt = -zbar_at(x, xi, mp);
        const double coeff = std::pow(zv, 1.0 - mp.p) - std::pow(bubble(x, -xi, mp), 1.0 - mp.p);
        const double err = -xidot * psix[i] + coeff * psi_xx_minus_psi[i];
        const double q = sw[size_t(i)] * wpm1;
        a11 += q * zv * th_m1;
        a12 += q * wt * th_m1;
        a21 += q * zv * th_0;
        a22 += q * wt * th_0;
        e1 += q * err * th_m1;
        e0 += q * err * th_0;
        nrm_m1 += q * th_m1 * th_m1;
        nrm_0 += q * th_0 * th_0;
    }
    CorrectionCoeffs out;
    out.a11 = a11;
    out.a12 = a12;
    out.a21 = a21;
    out.a22 = a22;
    out.E_minus1 = e1;
    out.E_0 = e0;
    const double c_m1 = 1.0 / std::sqrt(nrm_m1);
    const double c_0 = 1.0 / std::sqrt(nrm_0);
    out.a11n = c_m1 * a11;
    out.a12n = c_m1 * a12;
    out.a21n = c_0 * a21;
    out.a22n = c_0 * a22;
    out.E_minus1n = c_m1 * e1;
    out.E_0n = c_0 * e0;
    out.D = a11 * a22 - a21 * a12;
    if (!(out.D > 0.0))
        throw std::runtime_error("correction_coeffs: D <= 0, separation too small for the construction");
    out.d1 = (e1 * a22 - e0 * a12) / out.D;
    out.d2 = (a11 * e0 - a21 * e1) / out.D;
    return out;
}

// Coefficients (c1, c2) with Ebar = E - c1 z - c2 zbar satisfying the two
// error-term orthogonality conditions (projections against w^p(.+xi) and
// w' w^{p-1}(.+xi)).
inline std::pair<double, double> cancel_coeffs(const Field& e_field, const Field& z,
                                               const Field& zbar, double xi,
                                               const ModelParams& mp) {
    require_same_grid(e_field, z, "cancel_coeffs");
    require_same_grid(e_field, zbar, "cancel_coeffs");
    const Grid& g = *e_field.grid;
    const auto& sw = simpson_weights(g);
    double g11 = 0, g12 = 0, g21 = 0, g22 = 0, r1 = 0, r2 = 0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        const double wpm1 = bubble_pm1(x, -xi, mp);
        const double t1 = bubble(x, -xi, mp) * wpm1;           // w^p(.+xi)
        const double t2 = bubble_deriv(x, -xi, 1, mp) * wpm1;  // w' w^{p-1}(.+xi)
        const double q = sw[size_t(i)];
        g11 += q * z[i] * t1;
        g12 += q * zbar[i] * t1;
        g21 += q * z[i] * t2;
        g22 += q * zbar[i] * t2;
        r1 += q * e_field[i] * t1;
        r2 += q * e_field[i] * t2;
    }
    detail::TwoByTwo G{g11, g12, g21, g22};
    if (std::abs(G.det()) < 1e-14 * (std::abs(g11 * g22) + std::abs(g12 * g21) + 1e-300))
        throw std::runtime_error("cancel_coeffs: singular Gram matrix");
    double c1, c2;
    G.solve(r1, r2, c1, c2);
    return {c1, c2};
}

}  // namespace ybflow
