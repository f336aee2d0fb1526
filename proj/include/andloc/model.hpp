// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file model.hpp
 * @brief The random operator family and its per-cell objects.
 *
 *   H(omega) = -d^2/dx^2 (x) I_N + V + sum_n diag(c_i omega_i^(n)) 1_[0,ell)(x - ell n)
 *
 * On cell n the eigenvalue equation H u = E u is the constant-coefficient
 * system u'' = M u with M = V + diag(c_i omega_i) - E I. Its first-order form
 * has generator X = [[0, I], [M, 0]] in sp_N(R), and the cell transfer matrix
 * is T = exp(ell X), mapping (u, u') at ell n to (u, u') at ell (n + 1).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "andloc/errors.hpp"
#include "andloc/linalg.hpp"
#include "andloc/rng.hpp"

namespace andloc {

/// Default density radius: log 2, below which the principal logarithm of
/// exp(ell X) is ell X.
inline constexpr double kDefaultRho = std::numbers::ln2;

// ---------------------------------------------------------------------------
// Disorder law
// ---------------------------------------------------------------------------

struct Atom {
    double value;
    double probability;
};

/// Finite discrete law. The constructor checks positivity, normalization
/// (|sum - 1| <= 1e-12) and finiteness. Whether the support contains {0, 1}
/// is a separate query: degenerate single-atom laws are legitimate inputs for
/// closed-form checks, while configuration files are required to satisfy
/// has_binary_support().
class DisorderSpec {
public:
    DisorderSpec() : DisorderSpec(std::vector<Atom>{{0.0, 0.5}, {1.0, 0.5}}) {}

    explicit DisorderSpec(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw InvalidArgument("disorder law needs at least one atom");
        double total = 0.0;
        for (const auto& a : atoms_) {
            if (!std::isfinite(a.value)) throw InvalidArgument("disorder atom value must be finite");
            if (!(a.probability > 0.0) || !std::isfinite(a.probability)) {
                throw InvalidArgument("disorder atom probabilities must be positive");
            }
            total += a.probability;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw InvalidArgument("disorder atom probabilities must sum to 1 (got " +
                                  std::to_string(total) + ")");
        }
        cumulative_.reserve(atoms_.size());
        double acc = 0.0;
        for (const auto& a : atoms_) cumulative_.push_back(acc += a.probability);
        cumulative_.back() = 1.0;
    }

    /// {(0, 1 - p), (1, p)}; p = 0 or 1 degenerates to a single atom.
    static DisorderSpec bernoulli(double p = 0.5) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("bernoulli: p must lie in [0, 1]");
        if (p == 0.0) return degenerate(0.0);
        if (p == 1.0) return degenerate(1.0);
        return DisorderSpec({{0.0, 1.0 - p}, {1.0, p}});
    }

    static DisorderSpec degenerate(double value) { return DisorderSpec({{value, 1.0}}); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    bool has_binary_support() const {
        auto has = [&](double v) {
            return std::any_of(atoms_.begin(), atoms_.end(),
                               [v](const Atom& a) { return a.value == v; });
        };
        return has(0.0) && has(1.0);
    }

    bool is_degenerate() const noexcept { return atoms_.size() == 1; }

    std::size_t draw_index(RandomStream& rng) const {
        if (atoms_.size() == 1) return 0;
        const double u = rng.uniform();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                     atoms_.size() - 1);
    }

    double draw(RandomStream& rng) const { return atoms_[draw_index(rng)].value; }

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

struct ModelParams {
    SymmetricMatrix V;
    std::vector<double> c;
    double ell = 0.1;
    double rho = kDefaultRho;
    DisorderSpec disorder;

    Index N() const noexcept { return V.order(); }

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (V.order() < 1) out.emplace_back("V must be a non-empty square matrix");
        if (static_cast<Index>(c.size()) != V.order()) {
            out.push_back("c must have length N = " + std::to_string(V.order()) + " (got " +
                          std::to_string(c.size()) + ")");
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] == 0.0 || !std::isfinite(c[i])) {
                out.push_back("c[" + std::to_string(i) +
                              "] must be a non-zero real number: the coupling constants "
                              "c_1..c_N of the random potential are required to be non-zero");
            }
        }
        if (!(ell > 0.0) || !std::isfinite(ell)) out.emplace_back("ell must be finite and > 0");
        if (!(rho > 0.0 && rho <= 1.0)) out.emplace_back("rho must lie in (0, 1]");
        return out;
    }

    void validate() const {
        const auto v = violations();
        if (!v.empty()) {
            std::string msg = "invalid model parameters:";
            for (const auto& s : v) msg += " " + s + ";";
            throw InvalidArgument(msg);
        }
    }

    static ModelParams make(SymmetricMatrix v, std::vector<double> c, double ell,
                            DisorderSpec disorder = DisorderSpec(), double rho = kDefaultRho) {
        ModelParams p{std::move(v), std::move(c), ell, rho, std::move(disorder)};
        p.validate();
        return p;
    }
};

/// One disorder value per channel.
struct CellConfig {
    std::vector<double> omega;

    friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

struct SpectralBounds {
    double lambda_min;
    double lambda_max;
    double delta;
    double ell_C;
};

/// Closed interval [lo, hi]; empty when lo > hi.
struct EnergyInterval {
    double lo = 1.0;
    double hi = 0.0;

    static EnergyInterval empty() { return {}; }
    bool is_empty() const noexcept { return !(lo <= hi); }
    bool contains(double e) const noexcept { return lo <= e && e <= hi; }
    double length() const noexcept { return is_empty() ? 0.0 : hi - lo; }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// M = V + diag(c_i omega_i) - E I.
inline SymmetricMatrix cell_matrix(const ModelParams& p, const CellConfig& omega, double energy) {
    const Index n = p.N();
    if (static_cast<Index>(omega.omega.size()) != n) {
        throw DimensionError("cell_matrix: omega must have N entries");
    }
    Matrix m = p.V.matrix();
    for (Index i = 0; i < n; ++i) m(i, i) += p.c[i] * omega.omega[i] - energy;
    return SymmetricMatrix(m);
}

/// X = [[0, I], [M, 0]].
inline SpElement generator(const ModelParams& p, const CellConfig& omega, double energy) {
    const Index n = p.N();
    return SpElement(Matrix::Zero(n, n), Matrix::Identity(n, n),
                     cell_matrix(p, omega, energy).matrix());
}

/// T = exp(ell X).
inline SymplecticMatrix transfer(const ModelParams& p, const CellConfig& omega, double energy) {
    return SymplecticMatrix(exp_matrix(generator(p, omega, energy).matrix(), p.ell));
}

/// Operator 2-norm of X in closed form: max(1, max_i |lambda_i - E|) where
/// lambda_i are the eigenvalues of V + diag(c_i omega_i).
inline double generator_norm(const ModelParams& p, const CellConfig& omega, double energy) {
    const auto lambdas = sym_eigenvalues(cell_matrix(p, omega, 0.0));
    double worst = 1.0;
    for (double l : lambdas) worst = std::max(worst, std::abs(l - energy));
    return worst;
}

/// All 2^N configurations over {0, 1}, lexicographic (channel 0 most significant).
inline std::vector<CellConfig> binary_cells(Index n) {
    if (n < 1) throw InvalidArgument("binary_cells: N must be >= 1");
    if (n > 20) throw SizeGuardError("binary_cells: N = " + std::to_string(n) + " exceeds 20");
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<CellConfig> out;
    out.reserve(count);
    for (std::uint64_t code = 0; code < count; ++code) {
        CellConfig cfg{std::vector<double>(static_cast<std::size_t>(n))};
        for (Index i = 0; i < n; ++i) cfg.omega[i] = static_cast<double>((code >> (n - 1 - i)) & 1U);
        out.push_back(std::move(cfg));
    }
    return out;
}

/// Extreme eigenvalues of V + diag(c_i omega_i) over omega in {0,1}^N,
/// delta = (lambda_max - lambda_min)/2, ell_C = min(1, rho/delta) (1 if delta = 0).
inline SpectralBounds spectral_bounds(const ModelParams& p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& omega : binary_cells(p.N())) {
        const auto ev = sym_eigenvalues(cell_matrix(p, omega, 0.0));
        lo = std::min(lo, ev.front());
        hi = std::max(hi, ev.back());
    }
    const double delta = 0.5 * (hi - lo);
    const double ell_c = delta > 0.0 ? std::min(1.0, p.rho / delta) : 1.0;
    return {lo, hi, delta, ell_c};
}

/// [lambda_max - rho/ell, lambda_min + rho/ell] when ell < ell_C, else empty.
inline EnergyInterval energy_interval(const ModelParams& p) {
    const auto b = spectral_bounds(p);
    if (!(p.ell < b.ell_C)) return EnergyInterval::empty();
    const double r = p.rho / p.ell;
    return {b.lambda_max - r, b.lambda_min + r};
}

inline CellConfig sample_cell(const ModelParams& p, RandomStream& rng) {
    CellConfig cfg{std::vector<double>(static_cast<std::size_t>(p.N()))};
    for (auto& w : cfg.omega) w = p.disorder.draw(rng);
    return cfg;
}

inline std::vector<CellConfig> sample_path(const ModelParams& p, std::size_t cells,
                                           RandomStream& rng) {
    std::vector<CellConfig> path;
    path.reserve(cells);
    for (std::size_t k = 0; k < cells; ++k) path.push_back(sample_cell(p, rng));
    return path;
}

// ---------------------------------------------------------------------------
// TransferTable
// ---------------------------------------------------------------------------

/// Transfer matrices at one energy for every combination of disorder atoms.
/// The product law has size^N points; up to kMaxCached of them are
/// precomputed, beyond that each draw exponentiates on the fly.
class TransferTable {
public:
    static constexpr std::uint64_t kMaxCached = 1U << 12;

    TransferTable(const ModelParams& p, double energy) : params_(&p), energy_(energy) {
        const std::uint64_t k = p.disorder.size();
        std::uint64_t total = 1;
        bool small = true;
        for (Index i = 0; i < p.N(); ++i) {
            total *= k;
            if (total > kMaxCached) {
                small = false;
                break;
            }
        }
        if (small) {
            table_.reserve(total);
            for (std::uint64_t code = 0; code < total; ++code) {
                table_.push_back(transfer(p, decode(code), energy).matrix());
            }
        }
    }

    bool cached() const noexcept { return !table_.empty(); }

    /// Draws one cell and returns its transfer matrix. `scratch` backs the
    /// result when the table is not cached.
    const Matrix& draw(RandomStream& rng, Matrix& scratch) const {
        const auto& law = params_->disorder;
        if (cached()) {
            std::uint64_t code = 0, base = 1;
            for (Index i = 0; i < params_->N(); ++i) {
                code += base * law.draw_index(rng);
                base *= law.size();
            }
            return table_[code];
        }
        scratch = transfer(*params_, sample_cell(*params_, rng), energy_).matrix();
        return scratch;
    }

private:
    CellConfig decode(std::uint64_t code) const {
        const auto& law = params_->disorder;
        CellConfig cfg{std::vector<double>(static_cast<std::size_t>(params_->N()))};
        for (auto& w : cfg.omega) {
            w = law.atoms()[code % law.size()].value;
            code /= law.size();
        }
        return cfg;
    }

    const ModelParams* params_;
    double energy_;
    std::vector<Matrix> table_;
};

}  // namespace andloc
