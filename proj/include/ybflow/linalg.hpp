#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ybflow {

// Thomas algorithm, no pivoting.  lower has n-1 entries (sub-diagonal),
// diag n, upper n-1.  Returns false on a (near-)zero pivot.
inline bool solve_tridiag(const std::vector<double>& lower, const std::vector<double>& diag,
                          const std::vector<double>& upper, const std::vector<double>& rhs,
                          std::vector<double>& x) {
    const size_t n = diag.size();
    static thread_local std::vector<double> c, d;
    c.assign(n, 0.0);
    d.assign(n, 0.0);
    if (diag[0] == 0.0) return false;
    c[0] = upper.empty() ? 0.0 : upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (size_t i = 1; i < n; ++i) {
        const double m = diag[i] - lower[i - 1] * c[i - 1];
        if (m == 0.0) return false;
        c[i] = (i < n - 1) ? upper[i] / m : 0.0;
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    x.assign(n, 0.0);
    x[n - 1] = d[n - 1];
    for (size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return true;
}

// Banded matrix with kl sub- and ku super-diagonals, LAPACK-like storage
// with room for pivot fill.  Row-major band: entry (i,j) lives at
// band[i][j - i + kl] for j in [i-kl, i+ku+fill].
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), width_(kl + kl + ku + 1) {
        data_.assign(size_t(n_) * size_t(width_), 0.0);
    }

    int size() const { return n_; }

    double& at(int i, int j) { return data_[size_t(i) * size_t(width_) + size_t(j - i + kl_)]; }
    double at(int i, int j) const { return data_[size_t(i) * size_t(width_) + size_t(j - i + kl_)]; }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    // in-place LU with partial pivoting; returns false if singular
    bool factor() {
        piv_.assign(size_t(n_), 0);
        const int kf = kl_ + ku_;  // max superdiagonal extent after fill
        for (int k = 0; k < n_; ++k) {
            int pivot_row = k;
            double pmax = std::abs(at_raw(k, k));
            const int last = std::min(n_ - 1, k + kl_);
            for (int i = k + 1; i <= last; ++i) {
                const double v = std::abs(at_raw(i, k));
                if (v > pmax) {
                    pmax = v;
                    pivot_row = i;
                }
            }
            if (pmax == 0.0) return false;
            piv_[size_t(k)] = pivot_row;
            if (pivot_row != k) swap_rows(k, pivot_row, k, std::min(n_ - 1, k + kf));
            const double pivot = at_raw(k, k);
            for (int i = k + 1; i <= last; ++i) {
                const double m = at_raw(i, k) / pivot;
                at_raw(i, k) = m;
                const int jend = std::min(n_ - 1, k + kf);
                for (int j = k + 1; j <= jend; ++j) at_raw(i, j) -= m * at_raw(k, j);
            }
        }
        factored_ = true;
        return true;
    }

    void solve(std::vector<double>& rhs) const {
        if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
        const int kf = kl_ + ku_;
        for (int k = 0; k < n_; ++k) {
            const int pr = piv_[size_t(k)];
            if (pr != k) std::swap(rhs[size_t(k)], rhs[size_t(pr)]);
            const int last = std::min(n_ - 1, k + kl_);
            for (int i = k + 1; i <= last; ++i) rhs[size_t(i)] -= at_raw(i, k) * rhs[size_t(k)];
        }
        for (int i = n_ - 1; i >= 0; --i) {
            const int jend = std::min(n_ - 1, i + kf);
            double s = rhs[size_t(i)];
            for (int j = i + 1; j <= jend; ++j) s -= at_raw(i, j) * rhs[size_t(j)];
            rhs[size_t(i)] = s / at_raw(i, i);
        }
    }

private:
    // like at(), but valid for the widened (fill) band used during factorization
    double& at_raw(int i, int j) { return data_[size_t(i) * size_t(width_) + size_t(j - i + kl_)]; }
    double at_raw(int i, int j) const { return data_[size_t(i) * size_t(width_) + size_t(j - i + kl_)]; }

    void swap_rows(int r1, int r2, int jlo, int jhi) {
        for (int j = jlo; j <= jhi; ++j) std::swap(at_raw(r1, j), at_raw(r2, j));
    }

    int n_, kl_, ku_, width_;
    std::vector<double> data_;
    std::vector<int> piv_;
    bool factored_ = false;
};

}  // namespace ybflow
