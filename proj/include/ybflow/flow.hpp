#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ybflow/grid.hpp"
#include "ybflow/linalg.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/spectral.hpp"
#include "ybflow/trajectory.hpp"

namespace ybflow {

enum class BoundaryKind { dirichlet_zero, exponential_extrapolation };

struct SolverControls {
    double dt = 0.01;
    double newton_tol = 1e-10;
    int newton_max = 25;
    int snapshot_stride = 5;  // steps between stored snapshots
    BoundaryKind boundary = BoundaryKind::dirichlet_zero;
    int max_dt_halvings = 6;
    int spatial_order = 4;   // 2 or 4 (4 keeps sampled steady states steady)
    bool exploit_even = true;
    // two-bubble runs: remove the scaling-gauge drift at snapshot times by
    // rescaling u back to a unit-amplitude ansatz fit (see evolve()).
    bool renormalize_scale = false;
};

// ---------------------------------------------------------------------------
// Nonlinear stepper in v = u^p
//
// One backward-Euler step solves
//   (v_new - v_old)/dt = D(v_new^{1/p}) - v_new^{1/p} + v_new
// by damped Newton on the banded system.  D is the 2nd/4th-order Laplacian
// with Dirichlet zero at +-L; positivity of v is enforced by step damping.
// ---------------------------------------------------------------------------

struct StepResult {
    Field u;
    bool ok = false;
    int newton_iters = 0;
    std::string error;
};

namespace detail {

// signed fold for the even half-domain: reflects index j about the center c
inline int fold_index(int j, int c) { return j < c ? 2 * c - j : j; }

struct NonlinearWorkspace {
    std::vector<double> v, v_old, u, uprime, resid, delta;
};

// residual of the spatial operator: out = D(u) - u + v on the solved range
// [i_lo, i_hi]; u outside the range comes from Dirichlet zeros or reflection.
template <typename GetU>
inline double stencil_d(const GetU& uat, int i, int i_hi, int order, double idx2, int c_reflect) {
    // c_reflect >= 0 marks the even half-domain (reflection about c_reflect)
    auto at = [&](int j) {
        if (c_reflect >= 0) j = fold_index(j, c_reflect);
        return uat(j);  // zero outside the solved range (Dirichlet)
    };
    if (order == 4 && i >= 2 && i <= i_hi - 2) {
        return (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) *
               idx2 / 12.0;
    }
    return (at(i - 1) - 2.0 * at(i) + at(i + 1)) * idx2;
}

}  // namespace detail

class NonlinearStepper {
public:
    NonlinearStepper(GridPtr grid, const ModelParams& mp, SolverControls controls)
        : grid_(std::move(grid)), mp_(mp), ctl_(controls) {}

    // single backward-Euler step of size dt
    StepResult step(const Field& u_in, double dt) const {
        const Grid& g = *grid_;
        const int N = g.N;
        const bool half = ctl_.exploit_even && u_in.even_symmetric;
        const int c = g.center_index();
        const int i_lo = half ? c : 1;
        const int i_hi = N - 2;  // last solved node (Dirichlet at N-1)
        const int m = i_hi - i_lo + 1;
        const double idx2 = 1.0 / (g.dx * g.dx);
        const int reflect = half ? c : -1;

        std::vector<double> v_old(static_cast<size_t>(m)), v(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            const double uv = u_in[i_lo + i];
            if (!(uv > 0.0))
                return {Field(), false, 0, "positivity violated in the initial state"};
            v_old[size_t(i)] = std::pow(uv, mp_.p);
        }
        v = v_old;

        auto u_of = [&](const std::vector<double>& vv) {
            std::vector<double> uu(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) uu[size_t(i)] = std::pow(vv[size_t(i)], 1.0 / mp_.p);
            return uu;
        };

        auto residual = [&](const std::vector<double>& vv, const std::vector<double>& uu,
                            std::vector<double>& r) {
            auto uat = [&](int j) {
                if (j < i_lo || j > i_hi) return 0.0;
                return uu[size_t(j - i_lo)];
            };
            for (int i = 0; i < m; ++i) {
                const int gi = i_lo + i;
                const double Du = detail::stencil_d(uat, gi, i_hi, ctl_.spatial_order, idx2, reflect);
                r[size_t(i)] = vv[size_t(i)] - v_old[size_t(i)] -
                               dt * (Du - uu[size_t(i)] + vv[size_t(i)]);
            }
        };

        const int kb = ctl_.spatial_order == 4 ? 2 : 1;
        BandedMatrix J(m, kb, kb);
        std::vector<double> r(static_cast<size_t>(m));
        std::vector<double> uu = u_of(v);
        residual(v, uu, r);
        double rnorm = 0.0;
        for (double x : r) rnorm = std::max(rnorm, std::abs(x));
        const double tol = ctl_.newton_tol * (1.0 + *std::max_element(v_old.begin(), v_old.end()));

        int iter = 0;
        for (; iter < ctl_.newton_max && rnorm > tol; ++iter) {
            J.zero();
            for (int i = 0; i < m; ++i) {
                const int gi = i_lo + i;
                const double up_i =
                    std::pow(v[size_t(i)], 1.0 / mp_.p - 1.0) / mp_.p;  // du/dv at node i
                // diagonal: 1 - dt * (D_ii up_i - up_i + 1)
                // off-diagonal: -dt * D_ij up_j
                auto add = [&](int gj, double dcoef) {
                    if (gj < i_lo || gj > i_hi) return;
                    const int jj = gj - i_lo;
                    const double up_j = std::pow(v[size_t(jj)], 1.0 / mp_.p - 1.0) / mp_.p;
                    J.at(i, jj) += -dt * dcoef * up_j;
                };
                const bool interior4 = ctl_.spatial_order == 4 && gi >= 2 && gi <= i_hi - 2;
                J.at(i, i) = 1.0 - dt + dt * up_i;
                if (interior4) {
                    const double s = idx2 / 12.0;
                    int offs[5] = {-2, -1, 0, 1, 2};
                    double cf[5] = {-1.0 * s, 16.0 * s, -30.0 * s, 16.0 * s, -1.0 * s};
                    for (int q = 0; q < 5; ++q) {
                        int gj = gi + offs[q];
                        if (reflect >= 0) gj = detail::fold_index(gj, reflect);
                        add(gj, cf[q]);
                    }
                } else {
                    int offs[3] = {-1, 0, 1};
                    double cf[3] = {idx2, -2.0 * idx2, idx2};
                    for (int q = 0; q < 3; ++q) {
                        int gj = gi + offs[q];
                        if (reflect >= 0) gj = detail::fold_index(gj, reflect);
                        add(gj, cf[q]);
                    }
                }
            }
            if (!J.factor()) return {Field(), false, iter, "singular Jacobian"};
            std::vector<double> rhs = r;
            for (double& x : rhs) x = -x;
            J.solve(rhs);
            // damped update preserving positivity
            double s = 1.0;
            bool accepted = false;
            for (int halve = 0; halve < 28; ++halve) {
                std::vector<double> v_try(static_cast<size_t>(m));
                bool positive = true;
                for (int i = 0; i < m; ++i) {
                    v_try[size_t(i)] = v[size_t(i)] + s * rhs[size_t(i)];
                    if (!(v_try[size_t(i)] > 0.0)) {
                        positive = false;
                        break;
                    }
                }
                if (positive) {
                    std::vector<double> u_try = u_of(v_try);
                    std::vector<double> r_try(static_cast<size_t>(m));
                    residual(v_try, u_try, r_try);
                    double rn = 0.0;
                    for (double x : r_try) rn = std::max(rn, std::abs(x));
                    if (rn < rnorm || s < 1e-6) {
                        v = std::move(v_try);
                        uu = std::move(u_try);
                        r = std::move(r_try);
                        rnorm = rn;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (!accepted)
                return {Field(), false, iter, "positivity loss in Newton damping"};
        }
        if (rnorm > tol) return {Field(), false, iter, "Newton did not converge"};

        Field out(grid_, 0.0, u_in.even_symmetric);
        for (int i = 0; i < m; ++i) out[i_lo + i] = uu[size_t(i)];
        if (half) {
            for (int i = 0; i < c; ++i) out[i] = out[2 * c - i];
        } else if (u_in.even_symmetric) {
            // full-line validation mode: re-symmetrize so the odd scaling
            // mode cannot grow out of elimination round-off on long runs
            for (int i = 0; i < N / 2; ++i) {
                const double s = 0.5 * (out[i] + out[N - 1 - i]);
                out[i] = s;
                out[N - 1 - i] = s;
            }
        }
        if (ctl_.boundary == BoundaryKind::exponential_extrapolation) {
            // overwrite the Dirichlet ends by geometric continuation
            if (out[N - 3] > 0.0 && out[N - 2] > 0.0)
                out[N - 1] = out[N - 2] * (out[N - 2] / out[N - 3]);
            if (out[2] > 0.0 && out[1] > 0.0) out[0] = out[1] * (out[1] / out[2]);
        }
        return {std::move(out), true, iter, ""};
    }

private:
    GridPtr grid_;
    ModelParams mp_;
    SolverControls ctl_;
};

inline StepResult step_nonlinear(const Field& u, double dt, const SolverControls& ctl,
                                 const ModelParams& mp) {
    NonlinearStepper st(u.grid, mp, ctl);
    return st.step(u, dt);
}

// ---------------------------------------------------------------------------
// Ansatz fitting: invert u = (1 + eta) z(., xi) + psi under the two
// orthogonality conditions on psi.
// ---------------------------------------------------------------------------

struct FitResult {
    double xi = 0.0;
    double eta = 0.0;
    Field psi;
    double resid_w = 0.0;       // remaining projection onto w^p(.-xi)
    double resid_wprime = 0.0;  // remaining projection onto w' w^{p-1}(.-xi)
    bool converged = false;
    bool degenerate = false;    // single-bubble branch (xi ~ 0)
    bool used_fallback = false;
};

namespace detail {

inline void fit_projections(const Field& u, double xi, double eta, const ModelParams& mp,
                            double& F1, double& F2, double* J = nullptr) {
    const Grid& g = *u.grid;
    const auto& sw = simpson_weights(g);
    F1 = F2 = 0.0;
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;  // d(F1,F2)/d(xi,eta)
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        const auto right = bubble_core(x - xi, mp, 1.0);
        const auto left = bubble_core(x + xi, mp, 1.0);
        const double zv = right.w + left.w;
        const double zbar = right.wp - left.wp;
        const double psi = u[i] - (1.0 + eta) * zv;
        const double wpm1 = std::pow(right.w, mp.p - 1.0);
        const double K1 = right.w * wpm1;   // w^p(.-xi)
        const double K2 = right.wp * wpm1;  // w' w^{p-1}(.-xi)
        const double q = sw[size_t(i)];
        F1 += q * psi * K1;
        F2 += q * psi * K2;
        if (J) {
            // d psi/d xi = (1+eta) zbar, d psi/d eta = -z
            const double dK1 = -mp.p * wpm1 * right.wp;  // d/dxi w^p(.-xi)
            const double dK2 = -(right.wpp * wpm1 +
                                 (mp.p - 1.0) * std::pow(right.w, mp.p - 2.0) * right.wp * right.wp);
            j11 += q * ((1.0 + eta) * zbar * K1 + psi * dK1);
            j12 += q * (-zv) * K1;
            j21 += q * ((1.0 + eta) * zbar * K2 + psi * dK2);
            j22 += q * (-zv) * K2;
        }
    }
    if (J) {
        J[0] = j11;
        J[1] = j12;
        J[2] = j21;
        J[3] = j22;
    }
}

}  // namespace detail

inline FitResult fit_ansatz(const Field& u, const ModelParams& mp) {
    const Grid& g = *u.grid;
    FitResult out;
    // seed xi from the positive-side peak
    int ipk = g.center_index();
    for (int i = g.center_index(); i < g.N - 1; ++i)
        if (u[i] > u[ipk]) ipk = i;
    double xi = std::max(0.0, g.nodes[size_t(ipk)]);
    if (ipk > g.center_index() && ipk < g.N - 1) {
        // parabolic refinement of the peak location
        const double a = u[ipk - 1], b = u[ipk], c = u[ipk + 1];
        const double den = a - 2.0 * b + c;
        if (std::abs(den) > 1e-300) xi = g.nodes[size_t(ipk)] + 0.5 * g.dx * (a - c) / den;
    }
    double eta = 0.0;
    {
        const double zpk = z_at(xi, xi, mp);
        if (zpk > 0.0) eta = u[g.nearest(xi)] / zpk - 1.0;
    }
    const double gram1 = mp.constants_ready ? mp.int_w_p1 : 1.0;
    double F1, F2, J[4];
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
        detail::fit_projections(u, xi, eta, mp, F1, F2, J);
        if (std::abs(F1) + std::abs(F2) < 1e-13 * std::max(1.0, gram1)) {
            ok = true;
            break;
        }
        const double det = J[0] * J[3] - J[1] * J[2];
        if (std::abs(det) < 1e-300) break;
        double dxi = -(F1 * J[3] - F2 * J[1]) / det;
        double deta = -(J[0] * F2 - J[2] * F1) / det;
        // keep the iteration inside the sensible branch
        const double max_move = 0.5 + 0.1 * std::abs(xi);
        if (std::abs(dxi) > max_move) dxi *= max_move / std::abs(dxi);
        if (std::abs(deta) > 0.5) deta *= 0.5 / std::abs(deta);
        xi = std::max(0.0, xi + dxi);
        eta += deta;
    }
    if (!ok) {
        // least-squares fallback: scan xi, solve eta in closed form
        double best = std::numeric_limits<double>::infinity();
        double bxi = xi, beta_ = eta;
        for (double cand = 0.0; cand <= g.L - 2.0; cand += g.dx) {
            Field z = ansatz_z(u.grid, cand, mp);
            double zz = 0, zu = 0;
            for (int i = 0; i < g.N; ++i) {
                zz += z[i] * z[i];
                zu += z[i] * u[i];
            }
            const double amp = zu / zz;
            double miss = 0;
            for (int i = 0; i < g.N; ++i) {
                const double d = u[i] - amp * z[i];
                miss += d * d;
            }
            if (miss < best) {
                best = miss;
                bxi = cand;
                beta_ = amp - 1.0;
            }
        }
        xi = bxi;
        eta = beta_;
        detail::fit_projections(u, xi, eta, mp, F1, F2, nullptr);
        out.used_fallback = true;
    }
    out.xi = xi;
    out.eta = eta;
    out.converged = ok;
    out.degenerate = xi < 0.5;
    out.resid_w = F1;
    out.resid_wprime = F2;
    out.psi = Field(u.grid, 0.0, u.even_symmetric);
    for (int i = 0; i < g.N; ++i)
        out.psi[i] = u[i] - (1.0 + eta) * z_at(g.nodes[size_t(i)], xi, mp);
    return out;
}

// ---------------------------------------------------------------------------
// Evolution driver
// ---------------------------------------------------------------------------

inline Trajectory evolve(const Field& u0, double t_start, double t_end,
                         const SolverControls& ctl, const ModelParams& mp) {
    if (t_start > t_end) throw std::invalid_argument("evolve: t_start must be <= t_end");
    Trajectory traj;
    traj.meta.n = mp.n;
    traj.meta.dt = ctl.dt;
    traj.meta.snapshot_stride = ctl.dt * ctl.snapshot_stride;
    traj.meta.solver = "backward-euler-v";
    traj.push(t_start, u0);
    if (t_start == t_end) return traj;

    NonlinearStepper stepper(u0.grid, mp, ctl);
    Field u = u0;
    double t = t_start;
    double dt = ctl.dt;
    int halvings = 0;
    long step_count = 0;
    long success_streak = 0;
    while (t < t_end - 1e-12) {
        const double dt_eff = std::min(dt, t_end - t);
        StepResult res = stepper.step(u, dt_eff);
        if (!res.ok) {
            if (halvings >= ctl.max_dt_halvings) {
                traj.meta.outcome = (u.max_abs() < 1e-8) ? RunOutcome::extinction
                                                         : RunOutcome::step_failure;
                traj.meta.halted_at = t;
                return traj;
            }
            dt *= 0.5;
            ++halvings;
            success_streak = 0;
            continue;
        }
        u = std::move(res.u);
        t += dt_eff;
        ++step_count;
        ++success_streak;
        if (u.max_abs() < 1e-8) {
            traj.meta.outcome = RunOutcome::extinction;
            traj.meta.halted_at = t;
            traj.push(t, u);
            return traj;
        }
        if (halvings > 0 && success_streak > 100) {
            dt = std::min(ctl.dt, dt * 2.0);
            --halvings;
            success_streak = 0;
        }
        if (step_count % ctl.snapshot_stride == 0 || t >= t_end - 1e-12) {
            if (ctl.renormalize_scale) {
                // factor out the scaling-gauge drift: the amplitude mode of the
                // two-bubble family is a time-reparametrization of the same
                // solution and grows at rate (p-1)/p under forward evolution
                FitResult fit = fit_ansatz(u, mp);
                if (fit.converged && std::abs(fit.eta) < 0.5) {
                    const double scale = 1.0 / (1.0 + fit.eta);
                    for (double& v : u.values) v *= scale;
                }
            }
            if (traj.times.back() < t) traj.push(t, u);
        }
    }
    traj.meta.outcome = RunOutcome::completed;
    return traj;
}

// centered in time, 4th order in space: d_t(u^p) - (u_xx - u + u^p)
inline Field pde_residual(const Trajectory& traj, size_t index, const ModelParams& mp) {
    if (index == 0 || index + 1 >= traj.size())
        throw std::invalid_argument("pde_residual: index must have both neighbors");
    const Field& um = traj.fields[index - 1];
    const Field& u0 = traj.fields[index];
    const Field& up = traj.fields[index + 1];
    const double tm = traj.times[index - 1], t0 = traj.times[index], tp = traj.times[index + 1];
    Field uxx = derivative_x(u0, 2);
    Field r(u0.grid);
    for (int i = 0; i < u0.size(); ++i) {
        const double vm = std::pow(um[i], mp.p), v0 = std::pow(u0[i], mp.p),
                     vp = std::pow(up[i], mp.p);
        // 3-point derivative on a possibly nonuniform time stencil
        const double h1 = t0 - tm, h2 = tp - t0;
        const double dvdt =
            (h1 * h1 * vp - h2 * h2 * vm + (h2 * h2 - h1 * h1) * v0) / (h1 * h2 * (h1 + h2));
        r[i] = dvdt - (uxx[i] - u0[i] + v0);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Linear auxiliary equation
//   p z^{p-1} psi_t = psi_xx - psi + p z^{p-1} psi + z^{p-1} (f - C(psi,t))
// Crank-Nicolson with the correction C applied lagged within the step and a
// final literal re-projection clamping the orthogonality drift.
// ---------------------------------------------------------------------------

struct XiPath {
    std::function<double(double)> xi;
    std::function<double(double)> xidot;
};

struct LinearStepStats {
    double proj_w_before = 0.0, proj_wp_before = 0.0;
    double clamp_alpha = 0.0, clamp_beta = 0.0;
    bool forcing_orthogonal = true;
};

inline Field step_linear_aux(const Field& psi, double t, double dt, const Field& f,
                             const XiPath& path, const SolverControls& ctl, const ModelParams& mp,
                             LinearStepStats* stats = nullptr) {
    require_same_grid(psi, f, "step_linear_aux");
    const Grid& g = *psi.grid;
    const int N = g.N;
    const double th = t + 0.5 * dt;
    const double xi_h = path.xi(th);
    const double xi_n = path.xi(t);
    const double xidot_n = path.xidot(t);

    if (stats) {
        const double pw = proj_w(f, -xi_n, mp);
        const double pwp = proj_wprime(f, -xi_n, mp);
        stats->proj_w_before = pw;
        stats->proj_wp_before = pwp;
        const double scale = std::max(1.0, f.max_abs());
        stats->forcing_orthogonal = std::abs(pw) < 1e-8 * scale && std::abs(pwp) < 1e-8 * scale;
    }

    // lagged correction from the current state
    Field psixx = derivative_x(psi, 2);
    Field pxm(psi.grid);
    for (int i = 0; i < N; ++i) pxm[i] = psixx[i] - psi[i];
    CorrectionCoeffs cc = correction_coeffs(psi, pxm, xi_n, xidot_n, mp);

    // Crank-Nicolson in the half-time coefficients
    const double idx2 = 1.0 / (g.dx * g.dx);
    std::vector<double> lo(static_cast<size_t>(N - 3)), di(static_cast<size_t>(N - 2)), up(static_cast<size_t>(N - 3)), rhs(static_cast<size_t>(N - 2));
    for (int k = 0; k < N - 2; ++k) {
        const int i = k + 1;
        const double x = g.nodes[size_t(i)];
        const double zv = z_at(x, xi_h, mp);
        const double zpm1 = std::pow(zv, mp.p - 1.0);
        const double w = mp.p * zpm1 / dt;
        const double adiag = -2.0 * idx2 - 1.0 + mp.p * zpm1;
        di[size_t(k)] = w - 0.5 * adiag;
        if (k > 0) lo[size_t(k - 1)] = -0.5 * idx2;
        if (k < N - 3) up[size_t(k)] = -0.5 * idx2;
        const double psi_m = (i > 0) ? psi[i - 1] : 0.0;
        const double psi_p = (i < N - 1) ? psi[i + 1] : 0.0;
        const double a_psi = (psi_m - 2.0 * psi[i] + psi_p) * idx2 - psi[i] + mp.p * zpm1 * psi[i];
        const double cfield = cc.c_at(x, xi_n, mp);
        rhs[size_t(k)] = w * psi[i] + 0.5 * a_psi + zpm1 * (f[i] - cfield);
    }
    std::vector<double> sol;
    if (!solve_tridiag(lo, di, up, rhs, sol))
        throw std::runtime_error("step_linear_aux: tridiagonal solve failed");
    Field out(psi.grid, 0.0, psi.even_symmetric);
    for (int k = 0; k < N - 2; ++k) out[k + 1] = sol[size_t(k)];

    // the construction lives in the even class; kill the round-off odd
    // component each step or the odd bubble-scaling mode (same (p-1)/p rate,
    // invisible to the even-pair constraints) grows out of the noise floor
    if (psi.even_symmetric) {
        for (int i = 0; i < N / 2; ++i) {
            const double s = 0.5 * (out[i] + out[N - 1 - i]);
            out[i] = s;
            out[N - 1 - i] = s;
        }
    }

    // literal re-projection: clamp orthogonality drift below round-off level
    auto [al, be] = remove_even_projections(out, path.xi(t + dt), mp);
    if (stats) {
        stats->clamp_alpha = al;
        stats->clamp_beta = be;
    }
    return out;
}

// Integrates the auxiliary equation from psi(s) = 0 up to t0, storing
// snapshots (and psi_t evaluated from the equation itself).
inline Trajectory solve_linear_ancient(const std::function<Field(double)>& forcing, double s,
                                       double t0, const XiPath& path, GridPtr grid,
                                       const SolverControls& ctl, const ModelParams& mp) {
    if (!(s < t0)) throw std::invalid_argument("solve_linear_ancient: need s < t0");
    Trajectory traj;
    traj.meta.n = mp.n;
    traj.meta.dt = ctl.dt;
    traj.meta.snapshot_stride = ctl.dt * ctl.snapshot_stride;
    traj.meta.solver = "crank-nicolson-linear-aux";

    Field psi(grid, 0.0, true);
    auto push_with_rate = [&](double t, const Field& ps) {
        // psi_t from the equation, not from differencing
        Field pxx = derivative_x(ps, 2);
        Field pt(grid, 0.0, true);
        const double xi = path.xi(t);
        Field f = forcing(t);
        Field pm(grid);
        for (int i = 0; i < grid->N; ++i) pm[i] = pxx[i] - ps[i];
        CorrectionCoeffs cc = correction_coeffs(ps, pm, xi, path.xidot(t), mp);
        for (int i = 0; i < grid->N; ++i) {
            const double x = grid->nodes[size_t(i)];
            const double zpm1 = std::pow(z_at(x, xi, mp), mp.p - 1.0);
            pt[i] = (pxx[i] - ps[i] + mp.p * zpm1 * ps[i] +
                     zpm1 * (f[i] - cc.c_at(x, xi, mp))) /
                    (mp.p * zpm1);
        }
        traj.push(t, ps, pt);
    };
    push_with_rate(s, psi);
    double t = s;
    long k = 0;
    while (t < t0 - 1e-9) {
        const double dt = std::min(ctl.dt, t0 - t);
        Field f = forcing(t + 0.5 * dt);
        psi = step_linear_aux(psi, t, dt, f, path, ctl, mp);
        t += dt;
        ++k;
        if (k % ctl.snapshot_stride == 0 || t >= t0 - 1e-9) push_with_rate(t, psi);
    }
    traj.meta.outcome = RunOutcome::completed;
    return traj;
}

}  // namespace ybflow
