#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace ybflow {

// Uniform symmetric mesh on [-L, L].  N is odd so that x = 0 is a node.
struct Grid {
    double L = 0.0;
    int N = 0;
    double dx = 0.0;
    std::vector<double> nodes;

    int center_index() const { return (N - 1) / 2; }

    // index of the node nearest to x (clamped)
    int nearest(double x) const {
        int i = int(std::lround((x + L) / dx));
        if (i < 0) i = 0;
        if (i >= N) i = N - 1;
        return i;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(double L, int N) {
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
    if (N < 3 || N % 2 == 0) throw std::invalid_argument("make_grid: N must be odd and >= 3");
    auto g = std::make_shared<Grid>();
    g->L = L;
    g->N = N;
    g->dx = 2.0 * L / double(N - 1);
    g->nodes.resize(N);
    for (int i = 0; i < N; ++i) g->nodes[i] = -L + i * g->dx;
    g->nodes[(N - 1) / 2] = 0.0;  // exact center
    return g;
}

// Real values sampled on a Grid at one time.
struct Field {
    GridPtr grid;
    std::vector<double> values;
    bool even_symmetric = false;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0, bool even = false)
        : grid(std::move(g)), values(grid->N, fill), even_symmetric(even) {}

    int size() const { return grid ? grid->N : 0; }
    double& operator[](int i) { return values[size_t(i)]; }
    double operator[](int i) const { return values[size_t(i)]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    // largest relative mismatch |f(x) - f(-x)| / max|f|
    double even_defect() const {
        const int n = size();
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(values[size_t(i)] - values[size_t(n - 1 - i)]));
        const double scale = max_abs();
        return scale > 0.0 ? m / scale : 0.0;
    }
};

inline void require_same_grid(const Field& f, const Field& g, const char* what) {
    if (f.grid.get() != g.grid.get()) {
        if (!f.grid || !g.grid || f.grid->N != g.grid->N || f.grid->L != g.grid->L)
            throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
}

template <typename F>
Field field_from(GridPtr g, F&& fn, bool even = false) {
    Field out(g, 0.0, even);
    for (int i = 0; i < g->N; ++i) out[i] = fn(g->nodes[size_t(i)]);
    return out;
}

// Local 4-point Lagrange cubic interpolation; zero outside the grid.
inline double sample_cubic(const Field& f, double x) {
    const Grid& g = *f.grid;
    if (x < g.nodes.front() || x > g.nodes.back()) return 0.0;
    double s = (x - g.nodes.front()) / g.dx;
    int i1 = int(std::floor(s));
    if (i1 < 1) i1 = 1;
    if (i1 > g.N - 3) i1 = g.N - 3;
    const double t = s - i1;  // in [0,1] away from the edges
    const double fm = f[i1 - 1], f0 = f[i1], f1 = f[i1 + 1], f2 = f[i1 + 2];
    const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double c1 = (t * t - 1.0) * (t - 2.0) / 2.0;
    const double c2 = -t * (t + 1.0) * (t - 2.0) / 2.0;
    const double c3 = t * (t * t - 1.0) / 6.0;
    return c0 * fm + c1 * f0 + c2 * f1 + c3 * f2;
}

// centered stencils; 2nd order at the two nodes next to the boundary,
// 4th order in the interior, one-sided 2nd order at the ends
inline Field derivative_x(const Field& f, int order) {
    const Grid& g = *f.grid;
    const int n = g.N;
    const double dx = g.dx;
    Field out(f.grid);
    if (order == 1) {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
        out[1] = (f[2] - f[0]) / (2.0 * dx);
        for (int i = 2; i < n - 2; ++i)
            out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
        out[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * dx);
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    } else if (order == 2) {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dx * dx);
        out[1] = (f[0] - 2.0 * f[1] + f[2]) / (dx * dx);
        for (int i = 2; i < n - 2; ++i)
            out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) /
                     (12.0 * dx * dx);
        out[n - 2] = (f[n - 3] - 2.0 * f[n - 2] + f[n - 1]) / (dx * dx);
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (dx * dx);
    } else {
        throw std::invalid_argument("derivative_x: order must be 1 or 2");
    }
    return out;
}

}  // namespace ybflow
