#pragma once

// Symmetric positive-definite banded matrices with an in-band Cholesky
// factorization.  Storage is lower-band by diagonals: entry (i+k, i) of the
// matrix lives at band[k][i] for offsets k = 0..bw.  This is all the linear
// algebra the Rayleigh/eigenvalue solvers need (bw = 2 for the bilaplacian
// stiffness matrix), so no external sparse library is pulled in.

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace henonlab {

class SymBanded {
  public:
    SymBanded() = default;
    SymBanded(int n, int bandwidth)
        : n_(n), bw_(bandwidth), band_(static_cast<std::size_t>(bandwidth + 1),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0)) {
        if (n < 1 || bandwidth < 0 || bandwidth >= n)
            throw validation_error("SymBanded: need 1 <= bandwidth+1 <= n");
    }

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

    // entry (i+k, i), k = 0..bw, i = 0..n-1-k
    double& at(int k, int i) { return band_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }
    double at(int k, int i) const { return band_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }

    // dense (i, j) lookup with symmetry, zero outside the band
    double entry(int i, int j) const {
        if (i < j) std::swap(i, j);
        const int k = i - j;
        return (k > bw_) ? 0.0 : at(k, j);
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < n_; ++i) {
            double acc = at(0, i) * x[static_cast<std::size_t>(i)];
            for (int k = 1; k <= bw_; ++k) {
                if (i - k >= 0) acc += at(k, i - k) * x[static_cast<std::size_t>(i - k)];
                if (i + k < n_) acc += at(k, i) * x[static_cast<std::size_t>(i + k)];
            }
            y[static_cast<std::size_t>(i)] = acc;
        }
        return y;
    }

    // Frobenius norm over the full (symmetric) matrix.
    double frobenius_norm() const {
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += at(0, i) * at(0, i);
        for (int k = 1; k <= bw_; ++k)
            for (int i = 0; i + k < n_; ++i) acc += 2.0 * at(k, i) * at(k, i);
        return std::sqrt(acc);
    }

  private:
    int n_ = 0, bw_ = 0;
    std::vector<std::vector<double>> band_;
};

// Cholesky factor L (A = L L^T) with the same band profile.
class BandedCholesky {
  public:
    explicit BandedCholesky(const SymBanded& a) : l_(a) {
        const int n = a.size(), bw = a.bandwidth();
        for (int j = 0; j < n; ++j) {
            double s = l_.at(0, j);
            for (int k = 1; k <= bw && j - k >= 0; ++k) {
                const double ljk = l_.at(k, j - k); // L(j, j-k)
                s -= ljk * ljk;
            }
            if (!(s > 0.0)) throw solver_error("banded cholesky: matrix is not positive definite");
            const double diag = std::sqrt(s);
            l_.at(0, j) = diag;
            for (int i = j + 1; i <= j + bw && i < n; ++i) {
                double t = l_.at(i - j, j);
                for (int m = (i - bw > 0 ? i - bw : 0); m < j; ++m)
                    t -= l_.at(i - m, m) * l_.at(j - m, m);
                l_.at(i - j, j) = t / diag;
            }
        }
    }

    // solve A x = b
    std::vector<double> solve(std::vector<double> b) const {
        const int n = l_.size(), bw = l_.bandwidth();
        // L y = b
        for (int i = 0; i < n; ++i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = 1; k <= bw && i - k >= 0; ++k)
                s -= l_.at(k, i - k) * b[static_cast<std::size_t>(i - k)];
            b[static_cast<std::size_t>(i)] = s / l_.at(0, i);
        }
        // L^T x = y
        for (int i = n - 1; i >= 0; --i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = 1; k <= bw && i + k < n; ++k)
                s -= l_.at(k, i) * b[static_cast<std::size_t>(i + k)];
            b[static_cast<std::size_t>(i)] = s / l_.at(0, i);
        }
        return b;
    }

  private:
    SymBanded l_;
};

} // namespace henonlab
