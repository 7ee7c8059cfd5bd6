#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ybflow/grid.hpp"

namespace ybflow {

// Composite Simpson weights for the uniform grid (N odd, so N-1 panels pair up).
inline const std::vector<double>& simpson_weights(const Grid& g) {
    static thread_local std::vector<double> w;
    static thread_local const Grid* cached = nullptr;
    static thread_local int cached_n = 0;
    static thread_local double cached_dx = 0.0;
    if (cached != &g || cached_n != g.N || cached_dx != g.dx) {
        w.assign(size_t(g.N), 0.0);
        const double h3 = g.dx / 3.0;
        w[0] = h3;
        w[size_t(g.N - 1)] = h3;
        for (int i = 1; i < g.N - 1; ++i) w[size_t(i)] = (i % 2 == 1) ? 4.0 * h3 : 2.0 * h3;
        cached = &g;
        cached_n = g.N;
        cached_dx = g.dx;
    }
    return w;
}

// int f dx over the grid, 4th order for smooth integrands
inline double quad(const Field& f) {
    const auto& w = simpson_weights(*f.grid);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i];
    return s;
}

template <typename Fn>
double quad_nodes(const Grid& g, Fn&& fn) {
    const auto& w = simpson_weights(g);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * fn(g.nodes[i]);
    return s;
}

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
struct GK15 {
    static constexpr double xk[8] = {
        0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
        0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
    static constexpr double wk[8] = {
        0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
        0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
    // Gauss weights sit on xk[0], xk[2], xk[4], xk[6]
    static constexpr double wg[4] = {
        0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};
};

template <typename Fn>
void gk15(Fn& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double k = GK15::wk[0] * f0;
    double g = GK15::wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * GK15::xk[i];
        const double fi = f(c + dx) + f(c - dx);
        k += GK15::wk[i] * fi;
        if (i % 2 == 0) g += GK15::wg[i / 2] * fi;
    }
    value = k * h;
    // quadpack-style error heuristic
    double e = 200.0 * std::abs(k - g) * std::abs(h);
    err = e * std::sqrt(e);
    if (!(err >= 0)) err = std::abs(value);
}

}  // namespace detail

// Adaptive Gauss-Kronrod on [a,b] for smooth integrands.  Starts from a
// moderate uniform subdivision so that localized bumps cannot slip between
// the nodes of a single wide panel.
template <typename Fn>
double quad_gk(Fn&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-12,
               double* err_out = nullptr) {
    struct Seg {
        double a, b, value, err;
    };
    std::vector<Seg> stack;
    const int n0 = std::max(8, std::min(64, int((b - a) / 5.0) + 1));
    double total = 0.0, total_err = 0.0;
    for (int k = 0; k < n0; ++k) {
        Seg s;
        s.a = a + (b - a) * k / n0;
        s.b = a + (b - a) * (k + 1) / n0;
        detail::gk15(f, s.a, s.b, s.value, s.err);
        total += s.value;
        total_err += s.err;
        stack.push_back(s);
    }
    int iter = 0;
    const int max_iter = 4000;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && ++iter < max_iter) {
        // split worst segment
        size_t worst = 0;
        for (size_t i = 1; i < stack.size(); ++i)
            if (stack[i].err > stack[worst].err) worst = i;
        Seg seg = stack[worst];
        stack.erase(stack.begin() + long(worst));
        const double m = 0.5 * (seg.a + seg.b);
        Seg l, r;
        detail::gk15(f, seg.a, m, l.value, l.err);
        detail::gk15(f, m, seg.b, r.value, r.err);
        l.a = seg.a; l.b = m;
        r.a = m; r.b = seg.b;
        stack.push_back(l);
        stack.push_back(r);
        total = 0.0;
        total_err = 0.0;
        for (const Seg& s : stack) {
            total += s.value;
            total_err += s.err;
        }
    }
    if (err_out) *err_out = total_err;
    return total;
}

// Integral over the whole line for integrands decaying like e^{-c|x|}:
// fixed window plus exponential-tail cutoff check.
template <typename Fn>
double quad_gk_line(Fn&& f, double half_width, double abs_tol = 1e-12, double rel_tol = 1e-12,
                    double* err_out = nullptr) {
    return quad_gk(f, -half_width, half_width, abs_tol, rel_tol, err_out);
}

}  // namespace ybflow
