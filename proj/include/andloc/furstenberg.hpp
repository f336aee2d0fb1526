// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file furstenberg.hpp
 * @brief Lie-algebra generation tests for the binary transfer-matrix family.
 *
 * At energy E the generators X_w(E, V), w in {0,1}^N, either generate all of
 * sp_N(R) or not. The closure is computed numerically: iterated brackets are
 * vectorized in the canonical sp_N coordinates and kept when they leave the
 * current span by more than a relative tolerance.
 *
 * A density certificate pairs that closure with the norm condition
 * ell ||X_w|| <= rho for every binary w. Together they place every log T_w in
 * a ball of radius rho around 0 where exp is invertible, and the logs generate
 * sp_N, so the group generated by the T_w is dense in Sp_N(R). The certificate
 * is only as good as rho: the neighbourhood on which the density criterion
 * holds is not known explicitly, and the configured rho is an assumption that
 * the certificate records rather than proves.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "andloc/errors.hpp"
#include "andloc/linalg.hpp"
#include "andloc/model.hpp"
#include "andloc/parallel.hpp"

namespace andloc {

inline constexpr double kDefaultClosureTol = 1e-8;

struct ClosureReport {
    Index dim_reached = 0;
    Index target_dim = 0;
    std::vector<Vector> basis;  ///< orthonormal, in canonical sp_N coordinates
    int depth_used = 0;
    double smallest_retained_norm = 0.0;  ///< smallest relative residual among retained vectors
    bool depth_exceeded = false;

    bool full() const noexcept { return dim_reached == target_dim; }
};

namespace detail {

/// Orthogonalizes v against an orthonormal basis (two Gram-Schmidt passes).
inline void orthogonalize(Vector& v, const std::vector<Vector>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) v -= q.dot(v) * q;
    }
}

}  // namespace detail

/// Breadth-first bracket closure of `generators`.
///
/// The span is seeded with the generators; each sweep brackets every retained
/// element against the previous sweep's additions. A candidate is kept iff
/// its residual after orthogonalization exceeds tol times its own norm. Stops
/// at full dimension, after a sweep that adds nothing, or after max_depth
/// sweeps (flagged as depth_exceeded when the frontier was still growing).
/// max_depth < 0 selects 2 (2N^2 + N).
inline ClosureReport lie_closure(std::span<const SpElement> generators,
                                 double tol = kDefaultClosureTol, int max_depth = -1) {
    if (generators.empty()) throw InvalidArgument("lie_closure: empty generator list");
    if (!(tol > 0.0)) throw InvalidArgument("lie_closure: tol must be > 0");
    const Index n = generators.front().order();
    for (const auto& g : generators) {
        if (g.order() != n) throw DimensionError("lie_closure: generators of mixed order");
    }
    const Index target = SpElement::dimension(n);
    if (max_depth < 0) max_depth = static_cast<int>(2 * target);

    ClosureReport rep;
    rep.target_dim = target;
    rep.smallest_retained_norm = 1.0;

    // Retained elements are stored as their orthogonalized residuals so that
    // brackets are taken between well-conditioned spanning vectors.
    std::vector<SpElement> elements;

    auto try_add = [&](const SpElement& cand) -> bool {
        Vector v = cand.coords();
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) return false;
        detail::orthogonalize(v, rep.basis);
        const double residual = v.norm();
        if (residual <= tol * norm) return false;
        v /= residual;
        rep.smallest_retained_norm = std::min(rep.smallest_retained_norm, residual / norm);
        elements.push_back(SpElement::from_coords(n, v));
        rep.basis.push_back(std::move(v));
        return true;
    };

    for (const auto& g : generators) {
        if (static_cast<Index>(rep.basis.size()) == target) break;
        try_add(g);
    }

    std::size_t frontier_begin = 0;
    while (static_cast<Index>(rep.basis.size()) < target) {
        const std::size_t frontier_end = elements.size();
        if (frontier_begin == frontier_end) break;
        if (rep.depth_used >= max_depth) {
            rep.depth_exceeded = true;
            break;
        }
        ++rep.depth_used;
        for (std::size_t f = frontier_begin; f < frontier_end; ++f) {
            // Pairs inside the frontier are visited once (b < f).
            const std::size_t b_end = f;
            for (std::size_t b = 0; b < b_end; ++b) {
                if (static_cast<Index>(rep.basis.size()) == target) break;
                try_add(bracket(elements[b], elements[f]));
            }
        }
        frontier_begin = frontier_end;
    }
    rep.dim_reached = static_cast<Index>(rep.basis.size());
    if (rep.dim_reached == 0) rep.smallest_retained_norm = 0.0;
    return rep;
}

/// The 2^N generators X_w(E, V), w in {0,1}^N.
inline std::vector<SpElement> binary_generators(const ModelParams& p, double energy) {
    std::vector<SpElement> gens;
    for (const auto& w : binary_cells(p.N())) gens.push_back(generator(p, w, energy));
    return gens;
}

struct DensityCertificate {
    double energy = 0.0;
    bool norm_condition = false;
    bool closure_full = false;
    bool certified = false;
    std::vector<double> per_config_norms;  ///< ||X_w||, binary_cells order
    Index closure_dim = 0;
    Index target_dim = 0;
    double rho = 0.0;  ///< radius the certificate is conditional on
};

/// Norm condition (ell ||X_w|| <= rho for all binary w) and full Lie closure.
/// certified == norm_condition && closure_full. A false certificate is
/// indeterminate, not a proof of non-density.
inline DensityCertificate density_certificate(const ModelParams& p, double energy,
                                              double tol = kDefaultClosureTol) {
    DensityCertificate cert;
    cert.energy = energy;
    cert.rho = p.rho;
    cert.norm_condition = true;
    for (const auto& w : binary_cells(p.N())) {
        const double nrm = generator_norm(p, w, energy);
        cert.per_config_norms.push_back(nrm);
        if (p.ell * nrm > p.rho) cert.norm_condition = false;
    }
    const auto gens = binary_generators(p, energy);
    const auto rep = lie_closure(gens, tol);
    cert.closure_dim = rep.dim_reached;
    cert.target_dim = rep.target_dim;
    cert.closure_full = rep.full();
    cert.certified = cert.norm_condition && cert.closure_full;
    return cert;
}

/// Tridiagonal matrix with zero diagonal and unit off-diagonals.
inline SymmetricMatrix witness_V0(Index n) {
    if (n < 1) throw InvalidArgument("witness_V0: N must be >= 1");
    Matrix v = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) v(i, i + 1) = v(i + 1, i) = 1.0;
    return SymmetricMatrix(v);
}

// ---------------------------------------------------------------------------
// Critical-energy scan
// ---------------------------------------------------------------------------

struct CriticalBracket {
    double lo;
    double hi;
    double mid;
    Index dim_reached;  ///< closure dimension at mid
};

struct CriticalEnergySet {
    std::vector<double> energies;  ///< bracket midpoints, sorted
    std::vector<CriticalBracket> brackets;
    EnergyInterval scan_range;
    double grid_step = 0.0;
    double tolerance = 0.0;
    Index target_dim = 0;
    bool non_generic_flag = false;
};

struct DeficientRun {
    double lo;  ///< last non-deficient point found to the left (or range start)
    double hi;  ///< first non-deficient point found to the right (or range end)
};

/// Grid points lo, lo + step, ..., with hi appended when it is not on the grid.
inline std::vector<double> scan_grid(const EnergyInterval& range, double step) {
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((range.hi - range.lo) / step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) grid.push_back(range.lo + static_cast<double>(k) * step);
    if (range.hi - grid.back() > 1e-9 * step) grid.push_back(range.hi);
    return grid;
}

/// Locates runs of grid points where `deficient` holds and brackets each run
/// by bisecting its outer edges against the neighbouring good grid points for
/// refine_iters steps. Returns no runs and sets all_deficient when every grid
/// point is deficient.
inline std::vector<DeficientRun> locate_deficient_runs(const std::vector<double>& grid,
                                                       const std::vector<char>& deficient_at_grid,
                                                       int refine_iters,
                                                       const std::function<bool(double)>& deficient,
                                                       bool& all_deficient) {
    std::vector<DeficientRun> runs;
    all_deficient = !grid.empty() &&
                    std::all_of(deficient_at_grid.begin(), deficient_at_grid.end(),
                                [](char d) { return d != 0; });
    if (all_deficient) return runs;

    auto bisect = [&](double good, double bad) {
        for (int it = 0; it < refine_iters; ++it) {
            const double mid = 0.5 * (good + bad);
            if (deficient(mid)) bad = mid;
            else good = mid;
        }
        return good;
    };

    std::size_t k = 0;
    while (k < grid.size()) {
        if (!deficient_at_grid[k]) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end + 1 < grid.size() && deficient_at_grid[end + 1]) ++end;
        const double lo = k == 0 ? grid.front() : bisect(grid[k - 1], grid[k]);
        const double hi = end + 1 == grid.size() ? grid.back() : bisect(grid[end + 1], grid[end]);
        runs.push_back({lo, hi});
        k = end + 1;
    }
    return runs;
}

/// Scans the closure deficiency over the energy interval. Each run of
/// deficient grid points is refined into a bracket [lo, hi] containing the
/// deficient set; midpoints are reported as critical energies. When every
/// grid point is deficient, V is flagged non-generic and no energies are
/// returned. Critical energies falling strictly between grid points are not
/// seen; the resolution is grid_step.
inline CriticalEnergySet scan_critical_energies(const ModelParams& p, double grid_step,
                                                double tol = kDefaultClosureTol,
                                                int refine_iters = 40) {
    if (!(grid_step > 0.0)) throw InvalidArgument("scan_critical_energies: grid_step must be > 0");
    const auto range = energy_interval(p);
    if (range.is_empty()) {
        throw ScanRangeError("scan_critical_energies: the energy interval is empty (ell >= ell_C)");
    }
    CriticalEnergySet out;
    out.scan_range = range;
    out.grid_step = grid_step;
    out.tolerance = tol;
    out.target_dim = SpElement::dimension(p.N());

    auto dim_at = [&](double e) { return lie_closure(binary_generators(p, e), tol).dim_reached; };
    auto deficient = [&](double e) { return dim_at(e) < out.target_dim; };

    const auto grid = scan_grid(range, grid_step);
    std::vector<char> def(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { def[i] = deficient(grid[i]) ? 1 : 0; });

    bool all_def = false;
    const auto runs = locate_deficient_runs(grid, def, refine_iters, deficient, all_def);
    out.non_generic_flag = all_def;
    for (const auto& r : runs) {
        const double mid = 0.5 * (r.lo + r.hi);
        out.brackets.push_back({r.lo, r.hi, mid, dim_at(mid)});
        out.energies.push_back(mid);
    }
    std::sort(out.energies.begin(), out.energies.end());
    return out;
}

}  // namespace andloc
