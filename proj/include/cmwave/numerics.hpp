// numerics.hpp - dense complex matrices, unitary DFT matrices, Hermitian
// eigendecomposition, and toleranced rank. Everything here is sized for the
// small blocks this library works with (N <= 64, L <= 8); no attempt is made
// at general-purpose linear algebra.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmwave {

using cplx = std::complex<double>;

/// Dense rectangular complex matrix, row-major storage.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {
        if (rows == 0 || cols == 0) {
            throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    ComplexMatrix operator*(const ComplexMatrix& rhs) const {
        if (cols_ != rhs.rows_) {
            throw std::invalid_argument("ComplexMatrix: incompatible product dimensions");
        }
        ComplexMatrix out(rows_, rhs.cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const cplx a = (*this)(r, k);
                if (a == cplx{0.0, 0.0}) continue;
                for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
            }
        }
        return out;
    }

    /// Matrix-vector product.
    std::vector<cplx> apply(const std::vector<cplx>& x) const {
        if (x.size() != cols_) {
            throw std::invalid_argument("ComplexMatrix: vector length does not match columns");
        }
        std::vector<cplx> y(rows_, cplx{0.0, 0.0});
        for (std::size_t r = 0; r < rows_; ++r) {
            cplx acc{0.0, 0.0};
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
            y[r] = acc;
        }
        return y;
    }

    cplx trace() const {
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_hermitian(double tol) const {
        if (rows_ != cols_) return false;
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = r; c < cols_; ++c)
                if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
        return true;
    }

    /// Max |A_ij - B_ij|; used by equivalence checks.
    double max_abs_diff(const ComplexMatrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            throw std::invalid_argument("ComplexMatrix: shape mismatch in comparison");
        }
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            m = std::max(m, std::abs(data_[i] - other.data_[i]));
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Eigenvalues (descending) of a Hermitian PSD matrix plus its numerical rank.
struct EigenResult {
    std::vector<double> eigenvalues;
    std::size_t rank = 0;
    double tolerance = 0.0;
};

/**
 * Unitary DFT matrix: entry (k, n) = exp(-j 2 pi k n / size) / sqrt(size),
 * conjugated when inverse is requested. Forward times inverse is identity.
 */
inline ComplexMatrix dft_matrix(std::size_t size, bool inverse = false) {
    if (size == 0) throw std::invalid_argument("dft_matrix: size must be at least 1");
    ComplexMatrix m(size, size);
    const double sign = inverse ? 1.0 : -1.0;
    const double scale = 1.0 / std::sqrt(static_cast<double>(size));
    for (std::size_t k = 0; k < size; ++k) {
        for (std::size_t n = 0; n < size; ++n) {
            // Reduce k*n mod size before the trig call to keep angles small.
            const double phase =
                sign * 2.0 * std::numbers::pi * static_cast<double>((k * n) % size) /
                static_cast<double>(size);
            m(k, n) = std::polar(scale, phase);
        }
    }
    return m;
}

/**
 * Forward cyclic-shift permutation: (Pi^delay x)[n] = x[(n - delay) mod size].
 * delay = 0 gives the identity.
 */
inline ComplexMatrix circular_shift_matrix(std::size_t size, std::size_t delay) {
    if (size == 0) throw std::invalid_argument("circular_shift_matrix: size must be positive");
    if (delay >= size) {
        throw std::invalid_argument("circular_shift_matrix: delay must be less than size");
    }
    ComplexMatrix m(size, size);
    for (std::size_t n = 0; n < size; ++n) {
        m(n, (n + size - delay) % size) = 1.0;
    }
    return m;
}

/**
 * Eigendecomposition of a Hermitian positive semidefinite matrix by cyclic
 * Jacobi rotations. Eigenvalues come back sorted descending; rank counts the
 * eigenvalues above tolerance * max(lambda_max, 1).
 *
 * Throws if the input is not square, not Hermitian within 1e-9 entrywise, or
 * has an eigenvalue below -tolerance * max(lambda_max, 1) (not PSD).
 */
inline EigenResult hermitian_eigen(const ComplexMatrix& m, double tolerance = 1e-10) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("hermitian_eigen: matrix must be square");
    }
    if (!m.is_hermitian(1e-9)) {
        throw std::invalid_argument("hermitian_eigen: matrix must be Hermitian within 1e-9");
    }
    const std::size_t n = m.rows();

    // Work on an exactly Hermitian copy.
    ComplexMatrix a(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            a(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
        }
    }

    const double fro = a.frobenius_norm();
    const double off_target = 1e-14 * std::max(fro, 1e-300);

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(2.0 * off) <= off_target) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;

                // Unitary 2x2 rotation G = [[c, s], [-conj(s), c]] chosen so
                // that (G^H A G)_{pq} = 0; the phase of a_pq is absorbed into s.
                // tan(theta) is the smaller-magnitude root of t^2 - 2 tau t - 1.
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (app - aqq) / (2.0 * mag);
                const double t = (tau >= 0.0 ? -1.0 : 1.0) /
                                 (std::abs(tau) + std::sqrt(tau * tau + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const cplx s = (apq / mag) * (t * c);

                // Column update: A <- A G.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = akp * c - akq * std::conj(s);
                    a(k, q) = akp * s + akq * c;
                }
                // Row update: A <- G^H A.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = apk * c - aqk * s;
                    a(q, k) = std::conj(s) * apk + aqk * c;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }

    EigenResult result;
    result.tolerance = tolerance;
    result.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.eigenvalues[i] = a(i, i).real();
    std::sort(result.eigenvalues.begin(), result.eigenvalues.end(), std::greater<double>());

    const double lambda_max = result.eigenvalues.empty() ? 0.0 : result.eigenvalues.front();
    const double thresh = tolerance * std::max(lambda_max, 1.0);
    if (!result.eigenvalues.empty() && result.eigenvalues.back() < -thresh) {
        throw std::invalid_argument("hermitian_eigen: matrix is not positive semidefinite");
    }
    result.rank = static_cast<std::size_t>(
        std::count_if(result.eigenvalues.begin(), result.eigenvalues.end(),
                      [thresh](double v) { return v > thresh; }));
    return result;
}

}  // namespace cmwave
