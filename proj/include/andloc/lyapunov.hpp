// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lyapunov.hpp
 * @brief Lyapunov spectrum of i.i.d. transfer-matrix products.
 *
 * The partial sums gamma_1 + ... + gamma_p are the growth rates, per cell,
 * of log ||wedge^p (T_{n-1} ... T_0)||. Production estimates use the discrete
 * QR method: the frame Q is pushed through each T and re-orthonormalized, and
 * log r_ii accumulates the growth of the i-th direction. The exterior-power
 * route is kept as a small-n oracle (exterior_log_norm).
 *
 * Exponents are reported per cell, i.e. per transfer matrix. Divide by ell
 * for rates per unit length.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "andloc/errors.hpp"
#include "andloc/linalg.hpp"
#include "andloc/model.hpp"
#include "andloc/parallel.hpp"
#include "andloc/rng.hpp"

namespace andloc {

struct EstimatorConfig {
    std::int64_t n_steps = 100000;
    int n_replicas = 8;
    std::int64_t burn_in = 100;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (n_steps < 1) throw InvalidArgument("EstimatorConfig: n_steps must be >= 1");
        if (n_replicas < 1) throw InvalidArgument("EstimatorConfig: n_replicas must be >= 1");
        if (burn_in < 0) throw InvalidArgument("EstimatorConfig: burn_in must be >= 0");
    }
};

struct LyapunovSpectrum {
    std::vector<double> gammas;   ///< 2N values, nonincreasing
    std::vector<double> stderrs;  ///< standard error of the replica mean
    double energy = 0.0;
    EstimatorConfig config;

    Index size() const noexcept { return static_cast<Index>(gammas.size()); }
};

/// Running QR reorthonormalization of a frame pushed through a product.
class QrAccumulator {
public:
    explicit QrAccumulator(Index dim) : QrAccumulator(Matrix::Identity(dim, dim)) {}

    /// Starts from `frame`, whose columns must be orthonormal.
    explicit QrAccumulator(Matrix frame)
        : q_(std::move(frame)), work_(q_.rows()), log_sums_(static_cast<std::size_t>(q_.rows()), 0.0) {
        detail::require_square(q_, "QrAccumulator");
    }

    /// Q <- qr(T Q).Q; when `count`, adds log r_ii to the running sums.
    void push(const Matrix& t, bool count = true) {
        prod_.noalias() = t * q_;
        detail::householder_qr_pos(prod_, q_, work_, 0.0);
        for (Index i = 0; i < prod_.rows(); ++i) {
            const double r = prod_(i, i);
            if (!(r > std::numeric_limits<double>::min()) || !std::isfinite(r)) {
                throw InstabilityError(
                    "QR renormalization lost a direction (r_ii underflow); use fewer steps per "
                    "renormalization or a smaller cell length");
            }
            if (count) log_sums_[static_cast<std::size_t>(i)] += std::log(r);
        }
    }

    const std::vector<double>& log_sums() const noexcept { return log_sums_; }
    const Matrix& frame() const noexcept { return q_; }

private:
    Matrix q_;
    Matrix prod_;
    Vector work_;
    std::vector<double> log_sums_;
};

/// Cumulative sums over i <= p of log r_ii for the product of `steps`
/// (applied first to last) starting from `frame`.
inline std::vector<double> qr_partial_log_sums(std::span<const Matrix> steps, const Matrix& frame) {
    QrAccumulator acc(frame);
    for (const auto& t : steps) acc.push(t);
    std::vector<double> partial(acc.log_sums().size());
    std::partial_sum(acc.log_sums().begin(), acc.log_sums().end(), partial.begin());
    return partial;
}

/// Monte Carlo estimate at one energy: n_replicas independent sequences with
/// seeds derive_seed(master_seed, lyapunov, replica); burn_in steps are
/// discarded, the next n_steps are averaged.
inline LyapunovSpectrum lyapunov_spectrum(const ModelParams& p, double energy,
                                          const EstimatorConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(energy)) throw InvalidArgument("lyapunov_spectrum: energy must be finite");
    const Index dim = 2 * p.N();
    const TransferTable table(p, energy);

    std::vector<std::vector<double>> per_replica(static_cast<std::size_t>(cfg.n_replicas));
    parallel_for(per_replica.size(), [&](std::size_t r) {
        RandomStream rng(cfg.master_seed, StreamId::lyapunov, r);
        QrAccumulator acc(dim);
        Matrix scratch;
        for (std::int64_t s = 0; s < cfg.burn_in + cfg.n_steps; ++s) {
            acc.push(table.draw(rng, scratch), s >= cfg.burn_in);
        }
        auto& g = per_replica[r];
        g = acc.log_sums();
        for (auto& v : g) v /= static_cast<double>(cfg.n_steps);
    });

    const auto reps = static_cast<double>(cfg.n_replicas);
    std::vector<double> mean(static_cast<std::size_t>(dim), 0.0), se(mean.size(), 0.0);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        for (const auto& g : per_replica) mean[i] += g[i];
        mean[i] /= reps;
        if (cfg.n_replicas > 1) {
            double ss = 0.0;
            for (const auto& g : per_replica) ss += (g[i] - mean[i]) * (g[i] - mean[i]);
            se[i] = std::sqrt(ss / (reps - 1.0) / reps);
        }
    }

    std::vector<std::size_t> order(mean.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
    LyapunovSpectrum out;
    out.energy = energy;
    out.config = cfg;
    for (auto i : order) {
        out.gammas.push_back(mean[i]);
        out.stderrs.push_back(se[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exterior-power oracle
// ---------------------------------------------------------------------------

/// p-th compound matrix: all p x p minors, rows and columns indexed by
/// p-subsets in lexicographic order.
inline Matrix compound_matrix(const Matrix& m, Index p) {
    detail::require_square(m, "compound_matrix");
    const Index n = m.rows();
    if (p < 1 || p > n) throw InvalidArgument("compound_matrix: p must lie in [1, n]");

    std::vector<std::vector<Index>> subsets;
    std::vector<Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        subsets.push_back(idx);
        Index k = p - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - p + k) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (Index j = k + 1; j < p; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    const auto count = static_cast<Index>(subsets.size());
    Matrix out(count, count);
    Matrix sub(p, p);
    for (Index r = 0; r < count; ++r) {
        for (Index c = 0; c < count; ++c) {
            for (Index i = 0; i < p; ++i)
                for (Index j = 0; j < p; ++j)
                    sub(i, j) = m(subsets[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)],
                                  subsets[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
            out(r, c) = sub.partialPivLu().determinant();
        }
    }
    return out;
}

/// log ||wedge^p (M_{n-1} ... M_0)||_2 via compound matrices. Refuses
/// products whose total log-norm exceeds 300.
inline double exterior_log_norm(std::span<const Matrix> matrices, Index p) {
    if (matrices.empty()) throw InvalidArgument("exterior_log_norm: empty product");
    const Index n = matrices.front().rows();
    if (p < 1 || p > n) throw InvalidArgument("exterior_log_norm: p must lie in [1, 2N]");
    double budget = 0.0;
    for (const auto& m : matrices) {
        if (m.rows() != n || m.cols() != n) throw DimensionError("exterior_log_norm: order mismatch");
        budget += std::log(std::max(m.norm(), 1.0));
    }
    if (budget * static_cast<double>(p) > 300.0) {
        throw OracleRangeError("exterior_log_norm: product too long for the direct oracle");
    }
    // Cauchy-Binet: the compound of the product is the product of compounds.
    // Multiplying compounds avoids the cancellation that minors of a long
    // explicit product suffer for p > N.
    Matrix cp = compound_matrix(matrices.front(), p);
    for (std::size_t k = 1; k < matrices.size(); ++k) cp = compound_matrix(matrices[k], p) * cp;
    Eigen::JacobiSVD<Matrix> svd(cp);
    return std::log(svd.singularValues()[0]);
}

inline double exterior_log_norm(std::span<const SymplecticMatrix> matrices, Index p) {
    std::vector<Matrix> raw;
    raw.reserve(matrices.size());
    for (const auto& m : matrices) raw.push_back(m.matrix());
    return exterior_log_norm(std::span<const Matrix>(raw), p);
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// gamma_i - gamma_{i+1} > 3 (se_i + se_{i+1}) for i < N, and gamma_N > 3 se_N.
inline bool is_separated(const LyapunovSpectrum& s, double k_sigma = 3.0) {
    const auto n = static_cast<std::size_t>(s.size() / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(s.gammas[i] - s.gammas[i + 1] > k_sigma * (s.stderrs[i] + s.stderrs[i + 1]))) {
            return false;
        }
    }
    return s.gammas[n - 1] > k_sigma * s.stderrs[n - 1];
}

/// max_i ( |gamma_i + gamma_{2N-i+1}| - k (se_i + se_{2N-i+1}) ); <= floor
/// means the pairing holds. Deterministic runs have zero standard errors, so
/// the floor absorbs accumulated rounding.
inline double symmetry_excess(const LyapunovSpectrum& s, double k_sigma = 3.0) {
    const auto m = static_cast<std::size_t>(s.size());
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m / 2; ++i) {
        const std::size_t j = m - 1 - i;
        worst = std::max(worst, std::abs(s.gammas[i] + s.gammas[j]) -
                                    k_sigma * (s.stderrs[i] + s.stderrs[j]));
    }
    return worst;
}

inline bool is_symmetric(const LyapunovSpectrum& s, double k_sigma = 3.0, double floor = 1e-10) {
    return symmetry_excess(s, k_sigma) <= floor;
}

struct SeparabilityResult {
    LyapunovSpectrum spectrum;
    bool separated = false;
};

inline std::vector<SeparabilityResult> separability_scan(const ModelParams& p,
                                                         std::span<const double> energies,
                                                         const EstimatorConfig& cfg) {
    std::vector<SeparabilityResult> out;
    out.reserve(energies.size());
    for (double e : energies) {
        auto s = lyapunov_spectrum(p, e, cfg);
        const bool sep = is_separated(s);
        out.push_back({std::move(s), sep});
    }
    return out;
}

/// Empirical modulus of continuity: max over grid pairs of
/// |gamma_i(E) - gamma_i(E')| / |E - E'|^alpha, for i = 1..N.
struct HolderRow {
    double alpha;
    Index exponent_index;  ///< 1-based
    double max_ratio;
};

inline std::vector<HolderRow> lyapunov_modulus(std::span<const LyapunovSpectrum> scan,
                                               std::span<const double> alphas) {
    std::vector<HolderRow> rows;
    if (scan.empty()) return rows;
    const Index n = scan.front().size() / 2;
    for (double alpha : alphas) {
        for (Index i = 0; i < n; ++i) {
            double worst = 0.0;
            for (std::size_t a = 0; a < scan.size(); ++a) {
                for (std::size_t b = a + 1; b < scan.size(); ++b) {
                    const double de = std::abs(scan[a].energy - scan[b].energy);
                    if (de <= 0.0) continue;
                    const double dg = std::abs(scan[a].gammas[static_cast<std::size_t>(i)] -
                                               scan[b].gammas[static_cast<std::size_t>(i)]);
                    worst = std::max(worst, dg / std::pow(de, alpha));
                }
            }
            rows.push_back({alpha, i + 1, worst});
        }
    }
    return rows;
}

}  // namespace andloc
