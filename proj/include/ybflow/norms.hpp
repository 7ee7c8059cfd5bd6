#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ybflow/grid.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/quadrature.hpp"
#include "ybflow/trajectory.hpp"

namespace ybflow {

// int f(x - xi) g(x) w^{p-1}(x) dx; f resampled by cubic interpolation.
// Sets *boundary_warn when the shifted f still carries mass at the grid ends.
inline double weighted_inner(const Field& f, const Field& g, double xi_shift,
                             const ModelParams& mp, bool* boundary_warn = nullptr) {
    require_same_grid(f, g, "weighted_inner");
    const Grid& grid = *f.grid;
    const auto& sw = simpson_weights(grid);
    double s = 0.0;
    for (int i = 0; i < grid.N; ++i) {
        const double x = grid.nodes[size_t(i)];
        const double fv = (xi_shift == 0.0) ? f[i] : sample_cubic(f, x - xi_shift);
        s += sw[size_t(i)] * fv * g[i] * bubble_pm1(x, 0.0, mp);
    }
    if (boundary_warn) {
        const double edge = std::max(std::abs(sample_cubic(f, grid.nodes.front() + xi_shift)),
                                     std::abs(sample_cubic(f, grid.nodes.back() + xi_shift)));
        *boundary_warn = edge > 1e-10;
    }
    return s;
}

// The two orthogonality functionals: projections of an even field against the
// bubble-centered eigenmode shapes,
//   P_w(f)  = int f(x) w(x - xi) w^{p-1}(x - xi) dx,
//   P_w'(f) = int f(x) w'(x - xi) w^{p-1}(x - xi) dx.
// For even f these agree (up to the sign of the second) with the projections
// against the mirrored shapes at -xi.
inline double proj_w(const Field& f, double xi, const ModelParams& mp) {
    const Grid& g = *f.grid;
    const auto& sw = simpson_weights(g);
    double s = 0.0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        s += sw[size_t(i)] * f[i] * bubble(x, xi, mp) * bubble_pm1(x, xi, mp);
    }
    return s;
}

inline double proj_wprime(const Field& f, double xi, const ModelParams& mp) {
    const Grid& g = *f.grid;
    const auto& sw = simpson_weights(g);
    double s = 0.0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        s += sw[size_t(i)] * f[i] * bubble_deriv(x, xi, 1, mp) * bubble_pm1(x, xi, mp);
    }
    return s;
}

// ( int psi^2 z^{p-1} dx )^{1/2}
inline double norm_l2_weighted(const Field& psi, const Field& z, const ModelParams& mp) {
    require_same_grid(psi, z, "norm_l2_weighted");
    const auto& sw = simpson_weights(*psi.grid);
    double s = 0.0;
    for (size_t i = 0; i < sw.size(); ++i)
        s += sw[i] * psi.values[i] * psi.values[i] * std::pow(z.values[i], mp.p - 1.0);
    return std::sqrt(std::max(0.0, s));
}

// weight alpha_sigma: z^{n beta - sigma} outside the neck, z^{(2 beta +
// theta) sigma} inside
inline double weight_alpha_sigma(double x, double xi, double z_val, double sigma, double theta,
                                 const ModelParams& mp) {
    if (std::abs(x) > xi) return std::pow(z_val, mp.n * mp.beta - sigma);
    return std::pow(z_val, (2.0 * mp.beta + theta) * sigma);
}

struct WindowNorms {
    double tau = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double w2sigma = 0.0;
    double linf_weighted = 0.0;
};

// A window [tau, tau+1] of snapshots: psi, optional psi_t, and xi(t).
struct WindowView {
    std::vector<double> times;
    std::vector<const Field*> psi;
    std::vector<const Field*> psi_t;  // empty -> differenced from psi
    std::function<double(double)> xi_of_t;
};

namespace detail {

// trapezoid in time over the window
inline double time_trapezoid(const std::vector<double>& times, const std::vector<double>& vals) {
    double s = 0.0;
    for (size_t k = 0; k + 1 < times.size(); ++k)
        s += 0.5 * (vals[k] + vals[k + 1]) * (times[k + 1] - times[k]);
    return s;
}

inline Field psi_t_level(const WindowView& w, size_t k) {
    if (!w.psi_t.empty()) return *w.psi_t[k];
    // centered (one-sided at the ends) difference of the stored snapshots
    const size_t m = w.times.size();
    Field out(w.psi[k]->grid);
    size_t a = (k == 0) ? 0 : k - 1;
    size_t b = (k + 1 == m) ? k : k + 1;
    const double dt = w.times[b] - w.times[a];
    for (int i = 0; i < out.size(); ++i) out[i] = (w.psi[b]->values[size_t(i)] - w.psi[a]->values[size_t(i)]) / dt;
    return out;
}

}  // namespace detail

// L2, H1, H2 window norms of Definition-style weighted spaces:
//   ||psi||_L2(Lambda)  = ( iint psi^2 z^{p-1} )^{1/2}
//   ||psi||_H1 = ||psi||_L2 + || z^{-(p-1)/2} psi_x ||_L2
//   ||psi||_H2 = ||psi_t||_L2 + ||z^{-(p-1)}(psi_xx - psi)||_L2
//                + ||z^{-(p-1)/2} psi_xx||_L2 + ||psi||_H1
// (each inner norm carries the z^{p-1} weight, so e.g. the psi_x term is
// unweighted after cancellation).
inline WindowNorms window_norms(const WindowView& w, double sigma, double theta,
                                const ModelParams& mp) {
    if (w.times.size() < 3) throw std::invalid_argument("window_norms: need >= 3 time levels");
    WindowNorms out;
    out.tau = w.times.front();
    const size_t m = w.times.size();
    std::vector<double> l2(m), dx2(m), psit2(m), hxx2(m), wxx2(m);
    std::vector<double> sig_t(m), sig_0(m), sig_x(m), sig_xx(m);
    double linf = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const Field& psi = *w.psi[k];
        const Grid& g = *psi.grid;
        const auto& sw = simpson_weights(g);
        const double xi = w.xi_of_t(w.times[k]);
        Field px = derivative_x(psi, 1);
        Field pxx = derivative_x(psi, 2);
        Field pt = detail::psi_t_level(w, k);
        double a_l2 = 0, a_dx = 0, a_pt = 0, a_hxx = 0, a_wxx = 0;
        double s_t = 0, s_0 = 0, s_x = 0, s_xx = 0;
        double lin_out = 0, lin_in = 0;
        for (int i = 0; i < g.N; ++i) {
            const double x = g.nodes[size_t(i)];
            const double zv = z_at(x, xi, mp);
            const double zpm1 = std::pow(zv, mp.p - 1.0);
            const double wq = sw[size_t(i)];
            a_l2 += wq * psi[i] * psi[i] * zpm1;
            a_dx += wq * px[i] * px[i];  // z-weights cancel
            a_pt += wq * pt[i] * pt[i] * zpm1;
            const double r = pxx[i] - psi[i];
            a_hxx += wq * r * r / zpm1;
            a_wxx += wq * pxx[i] * pxx[i];
            const double alpha = weight_alpha_sigma(x, xi, zv, sigma, theta, mp);
            s_t += wq * alpha * std::pow(std::abs(pt[i]), sigma);
            s_0 += wq * alpha * std::pow(std::abs(psi[i]), sigma);
            s_x += wq * alpha * std::pow(std::abs(px[i]), sigma);
            s_xx += wq * alpha * std::pow(std::abs(pxx[i]), sigma);
            if (std::abs(x) > xi)
                lin_out = std::max(lin_out, std::abs(psi[i]) / zv);
            else
                lin_in = std::max(lin_in, std::abs(psi[i]));
        }
        l2[k] = a_l2;
        dx2[k] = a_dx;
        psit2[k] = a_pt;
        hxx2[k] = a_hxx;
        wxx2[k] = a_wxx;
        sig_t[k] = s_t;
        sig_0[k] = s_0;
        sig_x[k] = s_x;
        sig_xx[k] = s_xx;
        linf = std::max(linf, lin_out + lin_in);
    }
    const double L2 = std::sqrt(std::max(0.0, detail::time_trapezoid(w.times, l2)));
    const double DX = std::sqrt(std::max(0.0, detail::time_trapezoid(w.times, dx2)));
    const double PT = std::sqrt(std::max(0.0, detail::time_trapezoid(w.times, psit2)));
    const double HXX = std::sqrt(std::max(0.0, detail::time_trapezoid(w.times, hxx2)));
    const double WXX = std::sqrt(std::max(0.0, detail::time_trapezoid(w.times, wxx2)));
    out.l2 = L2;
    out.h1 = L2 + DX;
    out.h2 = PT + HXX + WXX + out.h1;
    auto sig_norm = [&](const std::vector<double>& v) {
        return std::pow(std::max(0.0, detail::time_trapezoid(w.times, v)), 1.0 / sigma);
    };
    out.w2sigma = sig_norm(sig_t) + sig_norm(sig_0) + sig_norm(sig_x) + sig_norm(sig_xx);
    out.linf_weighted = linf;
    return out;
}

// sup_x |psi/z| outside the neck + sup_x |psi| inside, single time level
inline double norm_linf_weighted(const Field& psi, double xi, const ModelParams& mp) {
    const Grid& g = *psi.grid;
    double lin_out = 0, lin_in = 0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.nodes[size_t(i)];
        const double zv = z_at(x, xi, mp);
        if (std::abs(x) > xi)
            lin_out = std::max(lin_out, std::abs(psi[i]) / zv);
        else
            lin_in = std::max(lin_in, std::abs(psi[i]));
    }
    return lin_out + lin_in;
}

struct GlobalNormReport {
    double nu = 0.0;
    double sigma = 0.0;
    double theta = 0.0;
    std::vector<WindowNorms> windows;
    // |tau|^nu-weighted suprema over the windows
    double sup_l2 = 0.0, sup_h1 = 0.0, sup_h2 = 0.0, sup_w2sigma = 0.0, sup_linf = 0.0;
    double star_sigma = 0.0;    // ||.||_{*,sigma}  = L2 + sigma part
    double star_2_sigma = 0.0;  // ||.||_{*,2,sigma} = H2 + W^{2,sigma} + Linf

    std::string to_csv() const {
        std::string s = "tau,l2,h1,h2,w2sigma,linf,l2_weighted,h1_weighted,h2_weighted,w2sigma_weighted,linf_weighted\n";
        char buf[512];
        for (const auto& w : windows) {
            const double wt = std::pow(std::abs(w.tau), nu);
            std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                          w.tau, w.l2, w.h1, w.h2, w.w2sigma, w.linf_weighted, wt * w.l2, wt * w.h1,
                          wt * w.h2, wt * w.w2sigma, wt * w.linf_weighted);
            s += buf;
        }
        return s;
    }
};

// Tiles [t_start, t0-1] with unit windows of stride 1 (partial trailing
// window dropped) and evaluates all window norms plus the weighted suprema.
inline GlobalNormReport global_norms(const Trajectory& traj,
                                     const std::function<double(double)>& xi_of_t, double nu,
                                     double sigma, double theta, double t0,
                                     const ModelParams& mp) {
    if (traj.times.empty() || traj.times.front() > t0)
        throw std::invalid_argument("global_norms: trajectory does not cover [t_start, t0]");
    GlobalNormReport rep;
    rep.nu = nu;
    rep.sigma = sigma;
    rep.theta = theta;
    for (double tau = traj.times.front(); tau <= t0 - 1.0 + 1e-12; tau += 1.0) {
        WindowView w;
        w.xi_of_t = xi_of_t;
        for (size_t k = 0; k < traj.size(); ++k) {
            if (traj.times[k] >= tau - 1e-12 && traj.times[k] <= tau + 1.0 + 1e-12) {
                w.times.push_back(traj.times[k]);
                w.psi.push_back(&traj.fields[k]);
                if (traj.has_time_derivs()) w.psi_t.push_back(&traj.time_derivs[k]);
            }
        }
        if (w.times.size() < 3) continue;  // window shorter than 1 time unit
        WindowNorms wn = window_norms(w, sigma, theta, mp);
        wn.tau = tau;
        rep.windows.push_back(wn);
    }
    if (rep.windows.empty()) throw std::invalid_argument("global_norms: no complete window");
    for (const auto& w : rep.windows) {
        const double wt = std::pow(std::abs(w.tau), nu);
        rep.sup_l2 = std::max(rep.sup_l2, wt * w.l2);
        rep.sup_h1 = std::max(rep.sup_h1, wt * w.h1);
        rep.sup_h2 = std::max(rep.sup_h2, wt * w.h2);
        rep.sup_w2sigma = std::max(rep.sup_w2sigma, wt * w.w2sigma);
        rep.sup_linf = std::max(rep.sup_linf, wt * w.linf_weighted);
    }
    rep.star_sigma = rep.sup_l2 + rep.sup_w2sigma;
    rep.star_2_sigma = rep.sup_h2 + rep.sup_w2sigma + rep.sup_linf;
    return rep;
}

// Norms for the parameter paths eta(t), h(t):
//   sup_norm   = sup |tau|^mu |f(tau)|
//   deriv_norm = sup_tau |tau|^{mu_dot} ( int_tau^{tau+1} |f'|^sigma dt )^{1/sigma}
//   combined   = sup_norm + deriv_norm
// For eta both exponents are mu; for h the derivative carries mu+1.
struct ParamNorms {
    double sup_norm = 0.0;
    double deriv_norm = 0.0;
    double combined = 0.0;
};

inline ParamNorms param_norms(const std::vector<double>& times, const std::vector<double>& values,
                              const std::vector<double>& derivs, double mu, double mu_dot,
                              double sigma, double t0) {
    if (times.size() != values.size() || times.size() != derivs.size() || times.size() < 2)
        throw std::invalid_argument("param_norms: inconsistent path");
    // samples per unit window must resolve the sigma-integral
    const double stride = times[1] - times[0];
    if (stride * sigma > 1.0 + 1e-12)
        throw std::invalid_argument("param_norms: undersampled path (need >= sigma samples per window)");
    ParamNorms out;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] > t0 + 1e-12) break;
        out.sup_norm = std::max(out.sup_norm, std::pow(std::abs(times[i]), mu) * std::abs(values[i]));
    }
    for (double tau = times.front(); tau <= t0 - 1.0 + 1e-12; tau += 1.0) {
        std::vector<double> ts, vs;
        for (size_t i = 0; i < times.size(); ++i)
            if (times[i] >= tau - 1e-12 && times[i] <= tau + 1.0 + 1e-12) {
                ts.push_back(times[i]);
                vs.push_back(std::pow(std::abs(derivs[i]), sigma));
            }
        if (ts.size() < 3) continue;
        const double integral = detail::time_trapezoid(ts, vs);
        out.deriv_norm = std::max(out.deriv_norm, std::pow(std::abs(tau), mu_dot) *
                                                      std::pow(std::max(0.0, integral), 1.0 / sigma));
    }
    out.combined = out.sup_norm + out.deriv_norm;
    return out;
}

}  // namespace ybflow
