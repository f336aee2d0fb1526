// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spectrum.hpp
 * @brief Finite-volume restrictions: discretization, eigenvalue counting,
 *        integrated density of states, shooting, eigenfunction decay.
 *
 * The restriction lives on [-ell L, ell L] with 2L disorder cells, cell n
 * covering [-ell L + ell n, -ell L + ell (n + 1)). It is discretized by
 * second-order central differences on a grid of step h dividing ell, unknowns
 * ordered point-major (the N channels of one grid point are contiguous), so
 * the matrix is symmetric with half-bandwidth N.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "andloc/errors.hpp"
#include "andloc/linalg.hpp"
#include "andloc/model.hpp"
#include "andloc/parallel.hpp"
#include "andloc/rng.hpp"

namespace andloc {

// ---------------------------------------------------------------------------
// Banded symmetric storage
// ---------------------------------------------------------------------------

/// Symmetric matrix of order n with half-bandwidth b; stores the lower band,
/// band(d, i) = A(i + d, i) for 0 <= d <= b.
class BandedSymmetric {
public:
    BandedSymmetric() = default;
    BandedSymmetric(Index n, Index b) : n_(n), b_(b), band_(static_cast<std::size_t>((b + 1) * n), 0.0) {
        if (n < 1 || b < 0) throw DimensionError("BandedSymmetric: need n >= 1 and b >= 0");
    }

    static BandedSymmetric from_dense(const Matrix& m, Index b) {
        detail::require_square(m, "BandedSymmetric::from_dense");
        BandedSymmetric out(m.rows(), b);
        for (Index d = 0; d <= b; ++d)
            for (Index i = 0; i + d < m.rows(); ++i) out.at(i + d, i) = 0.5 * (m(i + d, i) + m(i, i + d));
        return out;
    }

    Index order() const noexcept { return n_; }
    Index half_bandwidth() const noexcept { return b_; }

    double operator()(Index i, Index j) const {
        if (i < j) std::swap(i, j);
        const Index d = i - j;
        if (d > b_) return 0.0;
        return band_[static_cast<std::size_t>(d * n_ + j)];
    }

    /// Lower-band element, requires 0 <= i - j <= b.
    double& at(Index i, Index j) { return band_[static_cast<std::size_t>((i - j) * n_ + j)]; }

    Matrix to_dense() const {
        Matrix m = Matrix::Zero(n_, n_);
        for (Index d = 0; d <= b_; ++d)
            for (Index j = 0; j + d < n_; ++j) m(j + d, j) = m(j, j + d) = (*this)(j + d, j);
        return m;
    }

    /// Max absolute row sum (Gershgorin radius about 0).
    double inf_norm() const {
        double worst = 0.0;
        for (Index i = 0; i < n_; ++i) {
            double s = 0.0;
            for (Index j = std::max<Index>(0, i - b_); j <= std::min(n_ - 1, i + b_); ++j)
                s += std::abs((*this)(i, j));
            worst = std::max(worst, s);
        }
        return worst;
    }

    Eigen::SparseMatrix<double> to_sparse(double shift = 0.0) const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(n_ * (2 * b_ + 1)));
        for (Index d = 0; d <= b_; ++d) {
            for (Index j = 0; j + d < n_; ++j) {
                const double v = (*this)(j + d, j) - (d == 0 ? shift : 0.0);
                if (v == 0.0 && d != 0) continue;
                trips.emplace_back(j + d, j, v);
                if (d != 0) trips.emplace_back(j, j + d, v);
            }
        }
        Eigen::SparseMatrix<double> s(n_, n_);
        s.setFromTriplets(trips.begin(), trips.end());
        return s;
    }

private:
    Index n_ = 0;
    Index b_ = 0;
    std::vector<double> band_;
};

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

enum class Boundary { dirichlet, neumann };

inline const char* to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "neumann"; }

struct FiniteRestriction {
    int L = 1;  ///< cells on each side of the origin
    Boundary boundary = Boundary::dirichlet;
    double h = 0.0;
    std::vector<CellConfig> omega_path;  ///< 2L cells, left to right
};

namespace detail {

/// ell / h as an integer, or GridError.
inline Index points_per_cell(double ell, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw GridError("grid step h must be finite and > 0");
    const double ratio = ell / h;
    const double m = std::round(ratio);
    if (m < 1.0 || std::abs(ratio - m) > 1e-9 * ratio) {
        throw GridError("grid step h = " + std::to_string(h) + " does not divide the cell length " +
                        std::to_string(ell));
    }
    return static_cast<Index>(m);
}

/// Grid index j (0 = left end) of each matrix row block, and the cell it
/// falls in. Grid point x_j belongs to the cell containing [x_j, x_j + h).
struct GridLayout {
    Index per_cell;
    Index first_j;  ///< 1 for Dirichlet, 0 for Neumann
    Index points;

    Index cell_of(Index j, Index cells) const { return std::min(j / per_cell, cells - 1); }
};

inline GridLayout grid_layout(const ModelParams& p, const FiniteRestriction& r) {
    if (r.L < 1) throw InvalidArgument("FiniteRestriction: L must be >= 1");
    const Index m = points_per_cell(p.ell, r.h);
    const Index total = 2 * static_cast<Index>(r.L) * m;  // intervals across the domain
    if (r.boundary == Boundary::dirichlet) return {m, 1, total - 1};
    return {m, 0, total + 1};
}

}  // namespace detail

/// Finite-difference matrix of the restriction. Dirichlet drops the two
/// boundary points; Neumann keeps them with mirrored ghost points, symmetrized
/// by the similarity that scales boundary unknowns by 1/sqrt(2) (eigenvalues
/// unchanged; with weight h per point the scaled vector carries the
/// trapezoidal L2 norm).
inline BandedSymmetric discretize(const ModelParams& p, const FiniteRestriction& r) {
    const Index n = p.N();
    const auto g = detail::grid_layout(p, r);
    const Index cells = 2 * static_cast<Index>(r.L);
    if (static_cast<Index>(r.omega_path.size()) != cells) {
        throw InvalidArgument("FiniteRestriction: omega_path must hold 2L = " + std::to_string(cells) +
                              " cells");
    }
    if (g.points < 1) throw GridError("restriction has no interior grid points");
    const double inv_h2 = 1.0 / (r.h * r.h);

    BandedSymmetric a(g.points * n, n);
    for (Index pt = 0; pt < g.points; ++pt) {
        const Index j = g.first_j + pt;
        const auto& omega = r.omega_path[static_cast<std::size_t>(g.cell_of(j, cells))].omega;
        for (Index ch = 0; ch < n; ++ch) {
            const Index row = pt * n + ch;
            a.at(row, row) = 2.0 * inv_h2 + p.V(ch, ch) + p.c[static_cast<std::size_t>(ch)] * omega[static_cast<std::size_t>(ch)];
            for (Index ch2 = 0; ch2 < ch; ++ch2) a.at(row, pt * n + ch2) = p.V(ch, ch2);
            if (pt + 1 < g.points) {
                double off = -inv_h2;
                if (r.boundary == Boundary::neumann && (pt == 0 || pt + 2 == g.points)) {
                    off *= std::sqrt(2.0);
                }
                a.at((pt + 1) * n + ch, row) = off;
            }
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// Inertia counting
// ---------------------------------------------------------------------------

namespace detail {

/// Number of negative pivots of A - e I via block LDL^T with blocks of size
/// max(1, b) (a banded matrix is block tridiagonal at that block size).
/// Returns -1 on an exactly singular or non-finite pivot.
inline long negative_pivots(const BandedSymmetric& a, double e) {
    const Index n = a.order();
    const Index bs = std::max<Index>(1, a.half_bandwidth());
    long neg = 0;
    if (bs == 1) {
        double d = a(0, 0) - e;
        for (Index i = 0;; ++i) {
            if (d == 0.0 || !std::isfinite(d)) return -1;
            if (d < 0.0) ++neg;
            if (i + 1 == n) break;
            const double off = a(i + 1, i);
            d = a(i + 1, i + 1) - e - off * off / d;
        }
        return neg;
    }

    Matrix s, sinv, c;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    for (Index start = 0; start < n; start += bs) {
        const Index sz = std::min(bs, n - start);
        s.resize(sz, sz);
        for (Index i = 0; i < sz; ++i)
            for (Index j = 0; j < sz; ++j) s(i, j) = a(start + i, start + j);
        s.diagonal().array() -= e;
        if (start > 0) {
            const Index psz = sinv.rows();
            c.resize(sz, psz);
            for (Index i = 0; i < sz; ++i)
                for (Index j = 0; j < psz; ++j) c(i, j) = a(start + i, start - psz + j);
            s.noalias() -= c * sinv * c.transpose();
        }
        es.compute(s);
        if (es.info() != Eigen::Success) return -1;
        const Vector& mu = es.eigenvalues();
        for (Index k = 0; k < sz; ++k) {
            if (mu[k] == 0.0 || !std::isfinite(mu[k])) return -1;
            if (mu[k] < 0.0) ++neg;
        }
        sinv = es.eigenvectors() * mu.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    }
    return neg;
}

}  // namespace detail

/// Number of eigenvalues <= E, by Sylvester's law of inertia. On a zero pivot
/// E is nudged by 1e-12 times the matrix scale and the count retried.
inline std::size_t count_below(const BandedSymmetric& a, double e) {
    const double scale = std::max(1.0, a.inf_norm());
    for (int attempt = 0; attempt < 4; ++attempt) {
        const long neg = detail::negative_pivots(a, e + attempt * 1e-12 * scale);
        if (neg >= 0) {
            // Pivots of A - E I: negative ones count eigenvalues < E; an exact
            // eigenvalue at E shows up as a zero pivot and is retried at E+.
            return static_cast<std::size_t>(neg);
        }
    }
    throw FactorizationError("count_below: persistent pivot breakdown at E = " + std::to_string(e));
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

namespace detail {

/// Transfer matrices along a path, exponentiating each distinct cell once.
inline Matrix path_product(const ModelParams& p, std::span<const CellConfig> path, double e) {
    std::map<std::vector<double>, Matrix> cache;
    const Index dim = 2 * p.N();
    Matrix prod = Matrix::Identity(dim, dim);
    for (const auto& cell : path) {
        auto it = cache.find(cell.omega);
        if (it == cache.end()) it = cache.emplace(cell.omega, transfer(p, cell, e).matrix()).first;
        prod = it->second * prod;
        if (prod.cwiseAbs().maxCoeff() > 1e300 || !prod.allFinite()) {
            throw OverflowError("transfer-matrix product overflows; use a smaller L or shift the energy");
        }
    }
    return prod;
}

}  // namespace detail

/// Smallest singular value of the top-right N x N block B(E) of the path
/// product T_{2L-1} ... T_0. E is a Dirichlet eigenvalue of the continuum
/// restriction iff B(E) is singular.
inline double shooting_singularity(const ModelParams& p, std::span<const CellConfig> path, double e) {
    const Index n = p.N();
    const Matrix b = detail::path_product(p, path, e).topRightCorner(n, n);
    Eigen::JacobiSVD<Matrix> svd(b);
    return svd.singularValues()[n - 1];
}

/// det B(E).
inline double shooting_determinant(const ModelParams& p, std::span<const CellConfig> path, double e) {
    const Index n = p.N();
    return detail::path_product(p, path, e).topRightCorner(n, n).determinant();
}

/// Sign changes of det B over a uniform grid of n_grid intervals on [a, b];
/// counts the Dirichlet eigenvalues in (a, b] when the grid resolves them.
inline std::size_t shooting_zero_count(const ModelParams& p, std::span<const CellConfig> path,
                                       double a, double b, std::size_t n_grid) {
    if (!(b > a) || n_grid < 1) throw InvalidArgument("shooting_zero_count: need a < b and n_grid >= 1");
    std::vector<double> dets(n_grid + 1);
    parallel_for(dets.size(), [&](std::size_t k) {
        dets[k] = shooting_determinant(p, path, a + (b - a) * static_cast<double>(k) / static_cast<double>(n_grid));
    });
    std::size_t changes = 0;
    int last = 0;
    for (double d : dets) {
        const int s = (d > 0.0) - (d < 0.0);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// ---------------------------------------------------------------------------
// Integrated density of states
// ---------------------------------------------------------------------------

struct IDSCurve {
    std::vector<double> energies;
    std::vector<double> values;   ///< mean of count / (2 ell L)
    std::vector<double> stderrs;  ///< standard error across samples
    int L = 0;
    double h = 0.0;
    int n_samples = 0;
    Boundary boundary = Boundary::dirichlet;
};

/// Averages count_below(H_L(omega), E) / (2 ell L) over n_samples disorder
/// paths drawn from derive_seed(master_seed, ids, sample).
inline IDSCurve estimate_ids(const ModelParams& p, std::span<const double> energies, int L, double h,
                             int n_samples, std::uint64_t master_seed,
                             Boundary boundary = Boundary::dirichlet) {
    if (n_samples < 1) throw InvalidArgument("estimate_ids: n_samples must be >= 1");
    if (!std::is_sorted(energies.begin(), energies.end())) {
        throw InvalidArgument("estimate_ids: energy grid must be sorted");
    }
    const double volume = 2.0 * p.ell * L;
    std::vector<std::vector<double>> per_sample(static_cast<std::size_t>(n_samples));
    parallel_for(per_sample.size(), [&](std::size_t s) {
        RandomStream rng(master_seed, StreamId::ids, s);
        FiniteRestriction r{L, boundary, h, sample_path(p, 2 * static_cast<std::size_t>(L), rng)};
        const auto a = discretize(p, r);
        auto& row = per_sample[s];
        row.reserve(energies.size());
        for (double e : energies) row.push_back(static_cast<double>(count_below(a, e)) / volume);
    });

    IDSCurve out;
    out.energies.assign(energies.begin(), energies.end());
    out.L = L;
    out.h = h;
    out.n_samples = n_samples;
    out.boundary = boundary;
    const double ns = n_samples;
    for (std::size_t k = 0; k < energies.size(); ++k) {
        double mean = 0.0;
        for (const auto& row : per_sample) mean += row[k];
        mean /= ns;
        double ss = 0.0;
        for (const auto& row : per_sample) ss += (row[k] - mean) * (row[k] - mean);
        out.values.push_back(mean);
        out.stderrs.push_back(n_samples > 1 ? std::sqrt(ss / (ns - 1.0) / ns) : 0.0);
    }
    return out;
}

struct ModulusRow {
    double spacing;
    double max_increment;
};

/// For dyadic spacings s = |I| / 2^k down to the grid resolution, the largest
/// increment N(E') - N(E) over grid pairs inside I with E' - E <= s.
inline std::vector<ModulusRow> ids_modulus(const IDSCurve& curve, const EnergyInterval& interval) {
    if (interval.is_empty() || curve.energies.empty()) throw RangeError("ids_modulus: empty input");
    const double slack = 1e-12 * std::max(1.0, std::abs(interval.hi) + std::abs(interval.lo));
    if (interval.lo < curve.energies.front() - slack || interval.hi > curve.energies.back() + slack) {
        throw RangeError("ids_modulus: curve does not cover the interval");
    }
    std::vector<std::size_t> inside;
    for (std::size_t k = 0; k < curve.energies.size(); ++k) {
        if (curve.energies[k] >= interval.lo - slack && curve.energies[k] <= interval.hi + slack) inside.push_back(k);
    }
    if (inside.size() < 2) throw RangeError("ids_modulus: fewer than two curve points in the interval");
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < inside.size(); ++k) {
        min_gap = std::min(min_gap, curve.energies[inside[k]] - curve.energies[inside[k - 1]]);
    }

    std::vector<ModulusRow> rows;
    for (double s = interval.length(); s >= min_gap * (1.0 - 1e-9); s *= 0.5) {
        double worst = 0.0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < inside.size(); ++i) {
            j = std::max(j, i);
            while (j + 1 < inside.size() &&
                   curve.energies[inside[j + 1]] - curve.energies[inside[i]] <= s * (1.0 + 1e-12)) {
                ++j;
            }
            worst = std::max(worst, curve.values[inside[j]] - curve.values[inside[i]]);
        }
        rows.push_back({s, worst});
        if (s == 0.0) break;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Eigenfunction decay
// ---------------------------------------------------------------------------

struct DecayReport {
    double eigenvalue;
    double fitted_rate;          ///< amplitude decay rate per unit length
    double fit_residual;         ///< RMS residual of the log-mass fit
    double localization_center;  ///< midpoint of the heaviest cell
};

namespace detail {

/// k-th eigenvalue (0-based, ascending) by bisection on count_below, given
/// count(lo) <= k < count(hi).
inline double kth_eigenvalue(const BandedSymmetric& a, std::size_t k, double lo, double hi) {
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * eps * std::max({1.0, std::abs(lo), std::abs(hi)}) || mid == lo || mid == hi) break;
        if (count_below(a, mid) > k) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Eigenpairs of the discretized restriction with eigenvalues in
/// (window.lo, window.hi]: eigenvalues by bisection, eigenvectors by inverse
/// iteration (vectors of clustered eigenvalues are reorthogonalized). For each
/// vector the cell masses p_n are normalized to sum 1, the heaviest cell is
/// the localization center, and log p_n is fitted linearly against the
/// distance to the center over cells with p_n > 1e-24. The mass decays at
/// twice the amplitude rate, so fitted_rate = -slope / 2.
inline std::vector<DecayReport> eigen_decay(const ModelParams& p, const FiniteRestriction& r,
                                            const EnergyInterval& window) {
    std::vector<DecayReport> out;
    if (window.is_empty()) return out;
    const auto a = discretize(p, r);
    const auto g = detail::grid_layout(p, r);
    const Index n = p.N();
    const Index cells = 2 * static_cast<Index>(r.L);
    const std::size_t k_lo = count_below(a, window.lo);
    const std::size_t k_hi = count_below(a, window.hi);
    if (k_hi <= k_lo) return out;

    const double scale = std::max(1.0, a.inf_norm());
    std::vector<double> lambdas;
    std::vector<Vector> vectors;
    for (std::size_t k = k_lo; k < k_hi; ++k) {
        const double lambda = detail::kth_eigenvalue(a, k, window.lo, window.hi);
        const double shift = lambda + 1e-10 * scale;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(a.to_sparse(shift));
        if (lu.info() != Eigen::Success) {
            lu.compute(a.to_sparse(lambda - 1e-9 * scale));
            if (lu.info() != Eigen::Success) throw FactorizationError("eigen_decay: shifted solve failed");
        }
        Vector v(a.order());
        RandomStream rng(derive_seed(k, StreamId::localize, 0xDECA));
        for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
        v.normalize();
        for (int it = 0; it < 4; ++it) {
            v = lu.solve(v);
            for (std::size_t q = 0; q < vectors.size(); ++q) {
                if (std::abs(lambdas[q] - lambda) <= 1e-7 * scale) v -= vectors[q].dot(v) * vectors[q];
            }
            const double nv = v.norm();
            if (!(nv > 0.0) || !std::isfinite(nv)) throw FactorizationError("eigen_decay: inverse iteration broke down");
            v /= nv;
        }
        lambdas.push_back(lambda);
        vectors.push_back(v);

        std::vector<double> mass(static_cast<std::size_t>(cells), 0.0);
        for (Index pt = 0; pt < g.points; ++pt) {
            const Index cell = g.cell_of(g.first_j + pt, cells);
            mass[static_cast<std::size_t>(cell)] += v.segment(pt * n, n).squaredNorm();
        }
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        for (auto& m : mass) m /= total;
        const auto center = static_cast<Index>(std::max_element(mass.begin(), mass.end()) - mass.begin());

        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t used = 0;
        std::vector<std::pair<double, double>> pts;
        for (Index c = 0; c < cells; ++c) {
            const double m = mass[static_cast<std::size_t>(c)];
            if (!(m > 1e-24)) continue;
            const double x = static_cast<double>(std::abs(c - center)) * p.ell;
            const double y = std::log(m);
            pts.emplace_back(x, y);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
        double slope = 0.0, intercept = used ? sy / static_cast<double>(used) : 0.0;
        const double nu = static_cast<double>(used);
        const double var = sxx - sx * sx / std::max(nu, 1.0);
        if (used >= 2 && var > 0.0) {
            slope = (sxy - sx * sy / nu) / var;
            intercept = (sy - slope * sx) / nu;
        }
        double rss = 0.0;
        for (const auto& [x, y] : pts) rss += (y - intercept - slope * x) * (y - intercept - slope * x);
        out.push_back({lambda, -0.5 * slope, used ? std::sqrt(rss / nu) : 0.0,
                       -p.ell * r.L + p.ell * (static_cast<double>(center) + 0.5)});
    }
    return out;
}

struct DecaySummary {
    std::size_t count = 0;
    double median_rate = 0.0;
    double positive_fraction = 0.0;
};

inline DecaySummary summarize_decay(std::span<const DecayReport> reports) {
    DecaySummary s;
    s.count = reports.size();
    if (reports.empty()) return s;
    std::vector<double> rates;
    std::size_t positive = 0;
    for (const auto& r : reports) {
        rates.push_back(r.fitted_rate);
        if (r.fitted_rate > 0.0) ++positive;
    }
    std::sort(rates.begin(), rates.end());
    const std::size_t m = rates.size();
    s.median_rate = m % 2 ? rates[m / 2] : 0.5 * (rates[m / 2 - 1] + rates[m / 2]);
    s.positive_fraction = static_cast<double>(positive) / static_cast<double>(m);
    return s;
}

}  // namespace andloc
