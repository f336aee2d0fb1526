// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file linalg.hpp
 * @brief Dense kernels for small real matrices.
 *
 * Matrix exponential, QR with positive diagonal, symmetric eigenvalues, and
 * the sp_N(R) machinery: Hamiltonian blocks, brackets, and a fixed
 * coordinate system of dimension 2N^2 + N.
 *
 * Canonical sp_N coordinates of X = [[A, B], [C, -A^T]] (B, C symmetric):
 *   A(i, j)            for all i, j, row-major        (N^2 entries)
 *   B(i, j)            for i <= j, row-major          (N(N+1)/2 entries)
 *   C(i, j)            for i <= j, row-major          (N(N+1)/2 entries)
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "andloc/errors.hpp"

namespace andloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// J = [[0, -I], [I, 0]] of order 2n.
inline Matrix symplectic_form(Index n) {
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.block(0, n, n, n) = -Matrix::Identity(n, n);
    j.block(n, 0, n, n) = Matrix::Identity(n, n);
    return j;
}

namespace detail {

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void require_even_square(const Matrix& m, const char* what) {
    require_square(m, what);
    if (m.rows() % 2 != 0) {
        throw DimensionError(std::string(what) + ": expected even order, got " +
                             std::to_string(m.rows()));
    }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// SymmetricMatrix
// ---------------------------------------------------------------------------

/// Real symmetric matrix. Construction replaces M by (M + M^T)/2 and rejects
/// inputs whose relative asymmetry ||M - M^T||_F / ||M||_F exceeds 1e-10.
class SymmetricMatrix {
public:
    static constexpr double kAsymmetryTol = 1e-10;

    SymmetricMatrix() = default;

    explicit SymmetricMatrix(const Matrix& m) {
        detail::require_square(m, "SymmetricMatrix");
        if (!detail::all_finite(m)) throw InvalidArgument("SymmetricMatrix: non-finite entry");
        const Matrix diff = m - m.transpose();
        const double scale = m.norm();
        if (diff.norm() > kAsymmetryTol * scale) {
            Index wi = 0, wj = 0;
            diff.cwiseAbs().maxCoeff(&wi, &wj);
            if (wi > wj) std::swap(wi, wj);
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "matrix is not symmetric: entry (%ld,%ld) = %.17g but (%ld,%ld) = %.17g "
                          "(relative asymmetry %.3g > %.0e)",
                          static_cast<long>(wi), static_cast<long>(wj), m(wi, wj),
                          static_cast<long>(wj), static_cast<long>(wi), m(wj, wi),
                          diff.norm() / scale, kAsymmetryTol);
            throw InvalidArgument(buf);
        }
        m_ = 0.5 * (m + m.transpose());
    }

    static SymmetricMatrix zero(Index n) { return SymmetricMatrix(Matrix::Zero(n, n)); }
    static SymmetricMatrix identity(Index n) { return SymmetricMatrix(Matrix::Identity(n, n)); }

    Index order() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

// ---------------------------------------------------------------------------
// SpElement
// ---------------------------------------------------------------------------

/// Element of sp_N(R) held as blocks [[A, B], [C, -A^T]] with B, C symmetric.
class SpElement {
public:
    static constexpr Index dimension(Index n) noexcept { return 2 * n * n + n; }

    SpElement() = default;

    /// B and C are symmetrized by averaging; off-by-rounding inputs are accepted
    /// and the result is exactly Hamiltonian.
    SpElement(Matrix a, Matrix b, Matrix c) {
        detail::require_square(a, "SpElement");
        const Index n = a.rows();
        if (b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != n) {
            throw DimensionError("SpElement: blocks must share one order");
        }
        a_ = std::move(a);
        b_ = 0.5 * (b + b.transpose());
        c_ = 0.5 * (c + c.transpose());
    }

    static SpElement zero(Index n) {
        return SpElement(Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n));
    }

    /// Reads the blocks of a 2N x 2N matrix. The -A^T block is taken from the
    /// top-left block; callers wanting a membership check use is_hamiltonian.
    static SpElement from_matrix(const Matrix& x) {
        detail::require_even_square(x, "SpElement::from_matrix");
        const Index n = x.rows() / 2;
        return SpElement(0.5 * (x.topLeftCorner(n, n) - x.bottomRightCorner(n, n).transpose()),
                         x.topRightCorner(n, n), x.bottomLeftCorner(n, n));
    }

    static SpElement from_coords(Index n, const Vector& coords) {
        if (coords.size() != dimension(n)) {
            throw DimensionError("SpElement::from_coords: expected " +
                                 std::to_string(dimension(n)) + " coordinates, got " +
                                 std::to_string(coords.size()));
        }
        Matrix a(n, n), b(n, n), c(n, n);
        Index k = 0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) a(i, j) = coords[k++];
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j) b(i, j) = b(j, i) = coords[k++];
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j) c(i, j) = c(j, i) = coords[k++];
        return SpElement(std::move(a), std::move(b), std::move(c));
    }

    Index order() const noexcept { return a_.rows(); }
    const Matrix& a() const noexcept { return a_; }
    const Matrix& b() const noexcept { return b_; }
    const Matrix& c() const noexcept { return c_; }

    Matrix matrix() const {
        const Index n = order();
        Matrix x(2 * n, 2 * n);
        x << a_, b_, c_, -a_.transpose();
        return x;
    }

    Vector coords() const {
        const Index n = order();
        Vector v(dimension(n));
        Index k = 0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) v[k++] = a_(i, j);
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j) v[k++] = b_(i, j);
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j) v[k++] = c_(i, j);
        return v;
    }

    friend SpElement operator+(const SpElement& x, const SpElement& y) {
        check_same_order(x, y);
        return SpElement(x.a_ + y.a_, x.b_ + y.b_, x.c_ + y.c_);
    }
    friend SpElement operator-(const SpElement& x, const SpElement& y) {
        check_same_order(x, y);
        return SpElement(x.a_ - y.a_, x.b_ - y.b_, x.c_ - y.c_);
    }
    friend SpElement operator*(double s, const SpElement& x) {
        return SpElement(s * x.a_, s * x.b_, s * x.c_);
    }

    static void check_same_order(const SpElement& x, const SpElement& y) {
        if (x.order() != y.order()) {
            throw DimensionError("sp_N order mismatch: " + std::to_string(x.order()) + " vs " +
                                 std::to_string(y.order()));
        }
    }

private:
    Matrix a_, b_, c_;
};

/// Coordinate vector of X in the canonical basis; linear and injective.
inline Vector vectorize_sp(const SpElement& x) { return x.coords(); }

/// [X, Y] = XY - YX, re-expressed in block form.
inline SpElement bracket(const SpElement& x, const SpElement& y) {
    SpElement::check_same_order(x, y);
    const Matrix mx = x.matrix();
    const Matrix my = y.matrix();
    return SpElement::from_matrix(mx * my - my * mx);
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

/// ||M^T J M - J||_F <= tol.
inline bool is_symplectic(const Matrix& m, double tol) {
    detail::require_even_square(m, "is_symplectic");
    const Matrix j = symplectic_form(m.rows() / 2);
    return (m.transpose() * j * m - j).norm() <= tol;
}

/// ||J X + X^T J||_F <= tol, i.e. JX symmetric.
inline bool is_hamiltonian(const Matrix& x, double tol) {
    detail::require_even_square(x, "is_hamiltonian");
    const Matrix j = symplectic_form(x.rows() / 2);
    return (j * x + x.transpose() * j).norm() <= tol;
}

/// Symplectic matrix checked at construction:
/// ||M^T J M - J||_F <= 1e-12 ||M||_F^2.
class SymplecticMatrix {
public:
    static constexpr double kTol = 1e-12;

    SymplecticMatrix() = default;

    explicit SymplecticMatrix(Matrix m) {
        detail::require_even_square(m, "SymplecticMatrix");
        const double scale = m.squaredNorm();
        if (!m.allFinite() || !is_symplectic(m, kTol * scale)) {
            throw InvalidArgument("SymplecticMatrix: M^T J M != J within tolerance");
        }
        m_ = std::move(m);
    }

    Index order() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

// ---------------------------------------------------------------------------
// Matrix exponential: Padé(13) with scaling and squaring.
// ---------------------------------------------------------------------------

/// exp(scale * X).
inline Matrix exp_matrix(const Matrix& x, double scale = 1.0) {
    detail::require_square(x, "exp_matrix");
    if (!std::isfinite(scale)) throw InvalidArgument("exp_matrix: scale must be finite");

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    const Index n = x.rows();
    Matrix a = scale * x;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return Matrix::Identity(n, n);

    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        a /= std::ldexp(1.0, squarings);
    }

    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                          b[3] * a2 + b[1] * id);
    const Matrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    if (!r.allFinite()) throw OverflowError("exp_matrix: result overflows double precision");
    return r;
}

// ---------------------------------------------------------------------------
// Symmetric eigenvalues
// ---------------------------------------------------------------------------

/// All eigenvalues, ascending.
inline std::vector<double> sym_eigenvalues(const SymmetricMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("sym_eigenvalues: solver did not converge");
    const Vector& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// ---------------------------------------------------------------------------
// QR with positive diagonal
// ---------------------------------------------------------------------------

struct QrResult {
    Matrix q;
    Matrix r;
};

namespace detail {

/// Householder QR in place: on return `a` holds R (positive diagonal, zeros
/// below) and `q` the orthogonal factor. `v` is scratch of length >= n.
/// Returns false if some |r_kk| <= singular_tol.
inline bool householder_qr_pos(Matrix& a, Matrix& q, Vector& v, double singular_tol) {
    const Index n = a.rows();
    q.setIdentity(n, n);
    if (v.size() < n) v.resize(n);
    bool ok = true;
    for (Index k = 0; k < n; ++k) {
        double sigma = 0.0;
        for (Index i = k; i < n; ++i) sigma += a(i, k) * a(i, k);
        const double norm = std::sqrt(sigma);
        if (norm <= singular_tol) {
            ok = false;
            continue;
        }
        const double alpha = a(k, k) > 0 ? -norm : norm;
        // v = x - alpha e1, H = I - 2 v v^T / (v^T v)
        for (Index i = k; i < n; ++i) v[i] = a(i, k);
        v[k] -= alpha;
        const double vtv = sigma - a(k, k) * a(k, k) + v[k] * v[k];
        if (vtv > 0.0) {
            const double beta = 2.0 / vtv;
            for (Index j = k; j < n; ++j) {
                double s = 0.0;
                for (Index i = k; i < n; ++i) s += v[i] * a(i, j);
                s *= beta;
                for (Index i = k; i < n; ++i) a(i, j) -= s * v[i];
            }
            // Q <- Q H
            for (Index r = 0; r < n; ++r) {
                double s = 0.0;
                for (Index i = k; i < n; ++i) s += q(r, i) * v[i];
                s *= beta;
                for (Index i = k; i < n; ++i) q(r, i) -= s * v[i];
            }
        }
        for (Index i = k + 1; i < n; ++i) a(i, k) = 0.0;
        if (a(k, k) < 0.0) {
            a.row(k) = -a.row(k);
            q.col(k) = -q.col(k);
        }
        if (std::abs(a(k, k)) <= singular_tol) ok = false;
    }
    return ok;
}

}  // namespace detail

/// M = Q R with Q orthogonal and R upper triangular with strictly positive
/// diagonal. Throws SingularityError when some r_kk <= n eps ||M||_F.
inline QrResult qr_pos(const Matrix& m) {
    detail::require_square(m, "qr_pos");
    if (!m.allFinite()) throw InvalidArgument("qr_pos: non-finite entry");
    const Index n = m.rows();
    QrResult out{Matrix(), m};
    Vector work(n);
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * m.norm();
    if (!detail::householder_qr_pos(out.r, out.q, work, tol)) {
        throw SingularityError("qr_pos: matrix is numerically singular");
    }
    return out;
}

}  // namespace andloc
