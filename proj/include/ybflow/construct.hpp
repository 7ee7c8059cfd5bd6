#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ybflow/errorterms.hpp"
#include "ybflow/flow.hpp"
#include "ybflow/params.hpp"

namespace ybflow {

struct ConstructOptions {
    double damping = 0.5;
    double c_tol = 1e-6;  // sup-norm tolerance for c1, c2 == 0
    double nu = 0.75;
    double mu = 0.2;
    double sigma = 6.0;
    double theta = 0.01;
};

struct ConstructIterRow {
    int iter = 0;
    double sup_c1 = 0.0, sup_c2 = 0.0;
    double psi_star_sigma = 0.0, psi_star_2_sigma = 0.0;
    double eta_weighted_sup = 0.0;  // sup |t| |eta|
    double h_weighted_sup = 0.0;    // sup |t|^mu |h|
    double eta_norm_combined = 0.0; // ||eta||^1_{1,sigma}
    double h_norm_combined = 0.0;   // ||h||^{mu,1+mu}_{1,sigma}
};

struct ConstructResult {
    ParamPath path;
    Trajectory psi;
    std::vector<ConstructIterRow> rows;
    bool converged = false;
    int outer_iters_run = 0;
};

// Outer loop of the gluing construction: alternate (i) solving the linear
// auxiliary equation for psi with forcing Ebar(psi) and (ii) refreshing the
// parameter paths (eta, h) through the backward integral operators, until the
// cancellation coefficients c1(t), c2(t) are numerically zero.
//
// The parameter updates use the projection-consistent combination
//   etadot - lambda eta = a e^{-2 xi} - R1/c1 - G1
//   hdot + h/t          = b G3(h)     - R2/c2 - G2
// (R_i raw expansion residuals, G_i the c_i-scaled Q projections), which is
// the form in which vanishing right-hand sides is equivalent to c1 = c2 = 0.
inline ConstructResult construct_ancient(double t_start, double t0, int outer_iters,
                                         const SolverControls& ctl, const ConstructOptions& opts,
                                         GridPtr grid, const ModelParams& mp) {
    if (!(t0 <= -50.0))
        throw std::invalid_argument("construct_ancient: t0 must be <= -50 (asymptotic regime)");
    if (t_start > t0) throw std::invalid_argument("construct_ancient: t_start must be <= t0");

    ConstructResult res;
    const double stride = ctl.dt * ctl.snapshot_stride;

    // degenerate horizon: trivial path, psi = 0
    if (t_start == t0) {
        res.path.resize(1);
        res.path.times[0] = t0;
        const auto [x0, x0d] = xi0(t0, mp);
        res.path.xi[0] = x0;
        res.path.xidot[0] = x0d;
        Field zf(grid, 0.0, true);
        res.psi.push(t0, zf, zf);
        res.converged = true;
        return res;
    }

    // path grid shares the PDE snapshot stride
    std::vector<double> times;
    for (double t = t_start; t < t0 - 1e-9; t += stride) times.push_back(t);
    times.push_back(t0);
    const size_t m = times.size();

    ParamPath path;
    path.resize(m);
    path.times = times;
    for (size_t j = 0; j < m; ++j) {
        const auto [x0, x0d] = xi0(times[j], mp);
        path.xi[j] = x0;
        path.xidot[j] = x0d;
    }

    Trajectory psi;
    {
        Field zf(grid, 0.0, true);
        for (size_t j = 0; j < m; ++j) psi.push(times[j], zf, zf);
    }

    auto state_at = [&](size_t j, const Trajectory& ps) {
        return make_flow_state(grid, times[j], path.xi[j], path.xidot[j], path.eta[j],
                               path.etadot[j], ps.fields[j], ps.time_derivs[j], mp);
    };

    auto e_with_correction = [&](const FlowState& st) {
        Field pxx = derivative_x(st.psi, 2);
        Field pm(grid);
        for (int i = 0; i < grid->N; ++i) pm[i] = pxx[i] - st.psi[i];
        CorrectionCoeffs cc = correction_coeffs(st.psi, pm, st.xi, st.xidot, mp);
        return term_e(st, cc, mp);
    };

    const double lambda = mp.lambda_eta;
    for (int outer = 0; outer < outer_iters; ++outer) {
        // (i) cancellation coefficients and the corrected forcing Ebar(psi)
        Trajectory ebar;
        double sup_c1 = 0.0, sup_c2 = 0.0;
        for (size_t j = 0; j < m; ++j) {
            FlowState st = state_at(j, psi);
            Field e = e_with_correction(st);
            auto [c1, c2] = cancel_coeffs(e, st.z, st.zbar, st.xi, mp);
            sup_c1 = std::max(sup_c1, std::abs(c1));
            sup_c2 = std::max(sup_c2, std::abs(c2));
            Field eb(grid, 0.0, true);
            for (int i = 0; i < grid->N; ++i) eb[i] = e[i] - c1 * st.z[i] - c2 * st.zbar[i];
            ebar.push(times[j], eb);
        }

        ConstructIterRow row;
        row.iter = outer;
        row.sup_c1 = sup_c1;
        row.sup_c2 = sup_c2;

        // solve the auxiliary linear equation from psi(t_start) = 0
        XiPath xip = path.xi_path();
        auto forcing = [&](double t) { return ebar.at_time(t); };
        Trajectory psi_new =
            solve_linear_ancient(forcing, t_start, t0, xip, grid, ctl, mp);
        if (psi_new.size() != m)
            throw std::runtime_error("construct_ancient: snapshot misalignment in linear solve");
        const double al = opts.damping;
        for (size_t j = 0; j < m; ++j) {
            for (int i = 0; i < grid->N; ++i) {
                psi.fields[j][i] = (1.0 - al) * psi.fields[j][i] + al * psi_new.fields[j][i];
                psi.time_derivs[j][i] =
                    (1.0 - al) * psi.time_derivs[j][i] + al * psi_new.time_derivs[j][i];
            }
        }

        // (ii) refresh the parameter paths from the new psi
        std::vector<double> F_eta(m), F_h(m);
        for (size_t j = 0; j < m; ++j) {
            FlowState st = state_at(j, psi);
            Field e = e_with_correction(st);
            Field q = q_field(st, e, mp);
            auto [G1, G2] = projections_g(q, st.xi, mp);
            ProjectionExpansion pe =
                projection_expansion(st.xi, st.xidot, st.eta, st.etadot, mp);
            const auto [x0, x0d] = xi0(times[j], mp);
            F_eta[j] = mp.a_lead * std::exp(-2.0 * st.xi) - pe.R1 / mp.c1 - G1;
            F_h[j] = mp.b_lead * g3_remainder(path.h[j], x0) - pe.R2 / mp.c2 - G2;
        }
        std::vector<double> eta_new = operator_a(times, F_eta, lambda);
        std::vector<double> h_new = solve_h_linear(times, F_h);
        for (size_t j = 0; j < m; ++j) {
            const double etadot_new = lambda * eta_new[j] + F_eta[j];
            const double hdot_new = -h_new[j] / times[j] + F_h[j];
            path.eta[j] = (1.0 - al) * path.eta[j] + al * eta_new[j];
            path.etadot[j] = (1.0 - al) * path.etadot[j] + al * etadot_new;
            path.h[j] = (1.0 - al) * path.h[j] + al * h_new[j];
            path.hdot[j] = (1.0 - al) * path.hdot[j] + al * hdot_new;
            const auto [x0, x0d] = xi0(times[j], mp);
            path.xi[j] = x0 + path.h[j];
            path.xidot[j] = x0d + path.hdot[j];
        }

        // diagnostics for the report
        for (size_t j = 0; j < m; ++j) {
            row.eta_weighted_sup =
                std::max(row.eta_weighted_sup, std::abs(times[j]) * std::abs(path.eta[j]));
            row.h_weighted_sup = std::max(
                row.h_weighted_sup, std::pow(std::abs(times[j]), opts.mu) * std::abs(path.h[j]));
        }
        if (t0 - t_start >= 2.0) {
            XiPath xip2 = path.xi_path();
            GlobalNormReport rep = global_norms(psi, xip2.xi, opts.nu, opts.sigma, opts.theta,
                                                t0, mp);
            row.psi_star_sigma = rep.star_sigma;
            row.psi_star_2_sigma = rep.star_2_sigma;
            ParamNorms en = param_norms(times, path.eta, path.etadot, 1.0, 1.0, opts.sigma, t0);
            ParamNorms hn =
                param_norms(times, path.h, path.hdot, opts.mu, 1.0 + opts.mu, opts.sigma, t0);
            row.eta_norm_combined = en.combined;
            row.h_norm_combined = hn.combined;
        }
        res.rows.push_back(row);
        res.outer_iters_run = outer + 1;
        if (sup_c1 < opts.c_tol && sup_c2 < opts.c_tol) {
            res.converged = true;
            break;
        }
    }
    res.path = std::move(path);
    res.psi = std::move(psi);
    return res;
}

}  // namespace ybflow
