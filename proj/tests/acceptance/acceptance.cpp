// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. A criterion that exceeds its runtime budget fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "andloc/cli.hpp"
#include "andloc/furstenberg.hpp"
#include "andloc/lyapunov.hpp"
#include "andloc/model.hpp"
#include "andloc/spectrum.hpp"

using namespace andloc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SymmetricMatrix random_symmetric(RandomStream& rng, Index n, double amp) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-amp, amp);
    return SymmetricMatrix(m);
}

std::vector<double> random_couplings(RandomStream& rng, Index n) {
    std::vector<double> c(static_cast<std::size_t>(n));
    for (auto& x : c) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 2.0);
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------

Outcome symplecticity() {
    RandomStream rng(1, StreamId::test, 1);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Index n = 1 + k % 4;
        const auto p = ModelParams::make(random_symmetric(rng, n, 2.0), random_couplings(rng, n),
                                         rng.uniform(0.01, 1.0));
        const Matrix t = transfer(p, sample_cell(p, rng), rng.uniform(-10.0, 10.0)).matrix();
        const Matrix j = symplectic_form(n);
        worst = std::max(worst, (t.transpose() * j * t - j).norm() / t.squaredNorm());
    }
    return {worst <= 1e-10, fmt("max ||T^T J T - J||_F / ||T||_F^2 = %.2e over 1000 matrices", worst)};
}

Outcome norm_formula() {
    RandomStream rng(1, StreamId::test, 2);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Index n = 1 + k % 4;
        const auto p = ModelParams::make(random_symmetric(rng, n, 2.0), random_couplings(rng, n), 0.1);
        const auto w = sample_cell(p, rng);
        const double e = rng.uniform(-10.0, 10.0);
        const double svd = Eigen::JacobiSVD<Matrix>(generator(p, w, e).matrix()).singularValues()[0];
        worst = std::max(worst, std::abs(generator_norm(p, w, e) - svd));
    }
    return {worst <= 1e-10, fmt("max |closed form - SVD| = %.2e over 1000 instances", worst)};
}

Outcome interval_arithmetic() {
    const auto cfg = cli::parse_config(R"({"N": 1, "V": [[0]], "c": [1], "ell": 0.1,
                                           "rho": 0.6931471805599453})");
    const auto dir = fs::temp_directory_path() / "andloc_acceptance_interval";
    fs::remove_all(dir);
    std::ostringstream log, err;
    if (cli::run(cfg, "interval", dir, log, err) != 0) return {false, "interval failed: " + err.str()};
    std::istringstream csv(slurp(dir / "interval.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    std::vector<double> got;
    std::stringstream cells(row);
    for (std::string cell; std::getline(cells, cell, ',');) got.push_back(std::stod(cell));
    const double rho = std::numbers::ln2;
    // lambda_min, lambda_max, delta, ell_C, rho, ell, I_lo, I_hi
    const std::vector<double> want{0.0, 1.0, 0.5, 1.0, rho, 0.1, 1.0 - rho / 0.1, 0.0 + rho / 0.1};
    if (got.size() != want.size()) return {false, "unexpected interval.csv row: " + row};
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
    }
    return {worst <= 1e-12, fmt("I = [%.12f, %.12f], max relative deviation %.1e", got[6], got[7], worst)};
}

Outcome lie_closure_dims() {
    std::vector<std::string> problems;
    // (a) one generator spans a line.
    {
        const auto p = ModelParams::make(witness_V0(2), {1.0, 1.0}, 0.1);
        const std::vector<SpElement> one{generator(p, {{1.0, 0.0}}, 0.3)};
        if (lie_closure(one).dim_reached != 1) problems.emplace_back("(a) single generator");
    }
    // (b) N = 1, 100 random (v, c, E).
    int b_ok = 0;
    RandomStream rng(1, StreamId::test, 4);
    for (int k = 0; k < 100; ++k) {
        const auto p = ModelParams::make(random_symmetric(rng, 1, 3.0), random_couplings(rng, 1), 0.1);
        b_ok += lie_closure(binary_generators(p, rng.uniform(-5.0, 5.0))).dim_reached == 3;
    }
    if (b_ok != 100) problems.push_back(fmt("(b) %d/100 reached 3", b_ok));
    // (c) V0 at N = 2, 3 over 50 grid energies of I.
    int c_ok = 0;
    for (Index n : {2, 3}) {
        const auto p = ModelParams::make(witness_V0(n), std::vector<double>(static_cast<std::size_t>(n), 1.0), 0.1);
        const auto iv = energy_interval(p);
        for (int k = 0; k < 50; ++k) {
            const double e = iv.lo + iv.length() * k / 49.0;
            c_ok += lie_closure(binary_generators(p, e)).dim_reached == SpElement::dimension(n);
        }
    }
    if (c_ok != 100) problems.push_back(fmt("(c) %d/100 full", c_ok));
    // (d) V = 0 at N = 2 stays at 6, and `critical` exits 3.
    int d_ok = 0;
    const auto p0 = ModelParams::make(SymmetricMatrix::zero(2), {1.0, 1.0}, 0.1);
    const auto iv0 = energy_interval(p0);
    for (int k = 0; k < 50; ++k) {
        d_ok += lie_closure(binary_generators(p0, iv0.lo + iv0.length() * k / 49.0)).dim_reached == 6;
    }
    if (d_ok != 50) problems.push_back(fmt("(d) %d/50 at dim 6", d_ok));
    const auto cfg = cli::parse_config(R"({"N": 2, "V": [[0, 0], [0, 0]], "c": [1, 1], "ell": 0.1})");
    std::ostringstream log, err;
    const auto dir = fs::temp_directory_path() / "andloc_acceptance_critical";
    fs::remove_all(dir);
    const int code = cli::run(cfg, "critical", dir, log, err);
    if (code != 3) problems.push_back(fmt("(d) critical exit %d", code));
    std::string detail = fmt("(a) dim 1, (b) %d/100 dim 3, (c) %d/100 full, (d) %d/50 dim 6, critical exit %d",
                             b_ok, c_ok, d_ok, code);
    for (const auto& s : problems) detail += "; FAILED " + s;
    return {problems.empty(), detail};
}

Outcome lyapunov_closed_forms() {
    EstimatorConfig cfg;
    cfg.n_replicas = 4;
    cfg.burn_in = 100;
    std::vector<LyapunovSpectrum> runs;

    cfg.n_steps = 10000;
    const auto hyp = ModelParams::make(SymmetricMatrix(Matrix::Constant(1, 1, 1.0)), {1.0}, 1.0,
                                       DisorderSpec::degenerate(0.0));
    runs.push_back(lyapunov_spectrum(hyp, 0.0, cfg));
    const double hyp_err = std::abs(runs.back().gammas[0] - 1.0);

    cfg.n_steps = 100000;
    const auto free = ModelParams::make(SymmetricMatrix::zero(1), {1.0}, 0.1, DisorderSpec::degenerate(0.0));
    runs.push_back(lyapunov_spectrum(free, 1.0, cfg));
    const double ell_abs = std::abs(runs.back().gammas[0]);

    cfg.n_steps = 20000;
    RandomStream rng(1, StreamId::test, 5);
    for (int k = 0; k < 6; ++k) {
        const Index n = 1 + k % 3;
        const auto p = ModelParams::make(random_symmetric(rng, n, 1.0), random_couplings(rng, n), 0.2);
        cfg.master_seed = static_cast<std::uint64_t>(k);
        runs.push_back(lyapunov_spectrum(p, rng.uniform(-2.0, 2.0), cfg));
    }
    double worst_sym = -1e300;
    for (const auto& s : runs) worst_sym = std::max(worst_sym, symmetry_excess(s));
    bool sym_ok = true;
    for (const auto& s : runs) sym_ok = sym_ok && is_symmetric(s);
    const bool ok = hyp_err <= 1e-6 && ell_abs <= 5e-3 && sym_ok;
    return {ok, fmt("hyperbolic |gamma_1 - 1| = %.1e, elliptic |gamma_1| = %.1e, worst symmetry excess over 3 sigma "
                    "%.1e (%zu runs)",
                    hyp_err, ell_abs, worst_sym, runs.size())};
}

Outcome qr_vs_exterior() {
    RandomStream rng(1, StreamId::test, 6);
    const auto p = ModelParams::make(random_symmetric(rng, 2, 1.0), {1.0, 1.0}, 0.5);
    std::vector<Matrix> ts;
    for (int k = 0; k < 10; ++k) ts.push_back(transfer(p, sample_cell(p, rng), 0.4).matrix());
    Matrix prod = Matrix::Identity(4, 4);
    for (const auto& t : ts) prod = t * prod;
    Eigen::JacobiSVD<Matrix> svd(prod, Eigen::ComputeFullV);
    const auto sums = qr_partial_log_sums(ts, svd.matrixV());
    double worst = 0.0;
    std::string vals;
    for (Index q = 1; q <= 4; ++q) {
        const double ext = exterior_log_norm(std::span<const Matrix>(ts), q);
        const double qr = sums[static_cast<std::size_t>(q - 1)];
        worst = std::max(worst, std::abs(qr - ext) / std::max(1.0, std::abs(ext)));
        vals += fmt(" p=%td: %.6f", static_cast<std::ptrdiff_t>(q), ext);
    }
    return {worst <= 1e-6, fmt("max relative gap %.1e;", worst) + vals};
}

Outcome separability() {
    const auto p = ModelParams::make(witness_V0(2), {1.0, 1.0}, 0.1);
    const auto iv = energy_interval(p);
    const auto crit = scan_critical_energies(p, iv.length() / 200.0);
    std::vector<double> energies;
    for (int k = 0; k < 20; ++k) {
        const double e = iv.lo + iv.length() * (k + 0.5) / 20.0;
        bool near_critical = false;
        for (const auto& b : crit.brackets) near_critical = near_critical || (e >= b.lo - 0.05 && e <= b.hi + 0.05);
        if (!near_critical) energies.push_back(e);
    }
    EstimatorConfig cfg;
    cfg.n_steps = 2000000;
    cfg.n_replicas = 8;
    cfg.burn_in = 1000;
    const auto res = separability_scan(p, energies, cfg);
    int sep = 0;
    double tightest = 1e300;
    for (const auto& r : res) {
        sep += r.separated;
        const auto& s = r.spectrum;
        const double margin_gap = (s.gammas[0] - s.gammas[1]) / (3.0 * (s.stderrs[0] + s.stderrs[1]));
        const double margin_pos = s.gammas[1] / (3.0 * s.stderrs[1]);
        tightest = std::min({tightest, margin_gap, margin_pos});
    }
    const bool ok = sep == 20 && static_cast<int>(energies.size()) == 20;
    return {ok, fmt("%d/%zu energies separated, %zu critical energies in I, smallest margin %.2f x 3 sigma", sep,
                    energies.size(), crit.energies.size(), tightest)};
}

Outcome ids_free() {
    const double ell = 0.25;  // h = 1/32 must divide the cell
    const auto p = ModelParams::make(SymmetricMatrix::zero(1), {1.0}, ell, DisorderSpec::degenerate(0.0));
    std::vector<double> es;
    for (int k = 0; k <= 9500; ++k) es.push_back(0.5 + 0.001 * k);
    const auto curve = estimate_ids(p, es, 200, 1.0 / 32.0, 1, 0);
    double worst = 0.0, at = 0.0;
    for (std::size_t k = 0; k < es.size(); ++k) {
        const double d = std::abs(curve.values[k] - std::sqrt(es[k]) / std::numbers::pi);
        if (d > worst) {
            worst = d;
            at = es[k];
        }
    }
    return {worst <= 0.02, fmt("sup |N_hat - sqrt(E)/pi| = %.4f at E = %.3f (ell = 0.25, L = 200, h = 1/32)", worst, at)};
}

Outcome counting_consistency() {
    // Inertia against dense eigensolves.
    RandomStream rng(1, StreamId::test, 9);
    int mismatches = 0, checks = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Index n = 20 + static_cast<Index>(rng.uniform(0.0, 180.0));
        const Index b = trial % 4;
        Matrix m = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = std::max<Index>(0, i - b); j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
        const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
        const auto a = BandedSymmetric::from_dense(m, b);
        for (int q = 0; q < 20; ++q) {
            const double e = rng.uniform(ev[0] - 0.5, ev[n - 1] + 0.5);
            std::size_t below = 0;
            double gap = 1e300;
            for (Index i = 0; i < n; ++i) {
                below += ev[i] < e;
                gap = std::min(gap, std::abs(ev[i] - e));
            }
            if (gap < 1e-9) continue;
            ++checks;
            mismatches += count_below(a, e) != below;
        }
    }
    // Shooting against inertia on a fixed disordered N = 2, L = 20 instance.
    const auto p = ModelParams::make(witness_V0(2), {1.0, 1.0}, 0.1);
    RandomStream path_rng(7, StreamId::shooting, 0);
    const auto path = sample_path(p, 40, path_rng);
    const double lo = -0.517, hi = 30.493;
    const auto shoot = shooting_zero_count(p, path, lo, hi, 20000);
    std::string seq;
    std::size_t last = 0;
    for (int m : {5, 10, 20, 40, 80}) {
        const FiniteRestriction r{20, Boundary::dirichlet, 0.1 / m, path};
        const auto a = discretize(p, r);
        last = count_below(a, hi) - count_below(a, lo);
        seq += fmt(" %zu", last);
    }
    const bool ok = mismatches == 0 && last == shoot;
    return {ok, fmt("dense: %d mismatches in %d counts; shooting %zu vs inertia under h-refinement:", mismatches,
                    checks, shoot) + seq};
}

Outcome localization_diagnostic() {
    // ell = 0.5 keeps the localization length well below the 400-unit domain.
    const double ell = 0.5;
    const auto p = ModelParams::make(SymmetricMatrix::zero(1), {1.0}, ell);
    const EnergyInterval window{0.5, 1.0};
    RandomStream rng(0, StreamId::localize, 0);
    const FiniteRestriction r{400, Boundary::dirichlet, ell / 10.0, sample_path(p, 800, rng)};
    const auto reps = eigen_decay(p, r, window);
    const auto s = summarize_decay(reps);
    EstimatorConfig cfg;
    cfg.n_steps = 200000;
    cfg.n_replicas = 8;
    const auto g = lyapunov_spectrum(p, 0.5 * (window.lo + window.hi), cfg);
    const double gamma_len = g.gammas[0] / ell;
    const double ratio = s.median_rate / gamma_len;
    const bool ok = s.count > 0 && ratio >= 0.5 && ratio <= 2.0 && s.positive_fraction >= 0.9;
    return {ok, fmt("%zu states in (0.5, 1], median rate %.4f, gamma_1/ell %.4f, ratio %.3f, %.1f%% positive",
                    s.count, s.median_rate, gamma_len, ratio, 100.0 * s.positive_fraction)};
}

Outcome determinism() {
    const auto cfg = cli::parse_config(R"({
      "N": 2, "V": [[0, 1], [1, 0]], "c": [1, 1], "ell": 0.1, "seed": 11,
      "certify": {"energies": {"min": -2, "max": 2, "count": 5}},
      "critical": {"grid_step": 0.5},
      "lyapunov": {"energies": [-1, 0, 1], "n_steps": 2000, "n_replicas": 3},
      "ids": {"energies": {"min": -1, "max": 20, "count": 12}, "L": 20, "h": 0.02, "n_samples": 3},
      "localize": {"window": [1, 6], "L": 20, "h": 0.02}
    })");
    int files = 0, diffs = 0;
    for (const char* cmd : {"interval", "certify", "critical", "lyapunov", "ids", "localize", "report"}) {
        const auto a = fs::temp_directory_path() / (std::string("andloc_acceptance_det_a_") + cmd);
        const auto b = fs::temp_directory_path() / (std::string("andloc_acceptance_det_b_") + cmd);
        fs::remove_all(a);
        fs::remove_all(b);
        std::ostringstream log, err;
        if (cli::run(cfg, cmd, a, log, err) != 0 || cli::run(cfg, cmd, b, log, err) != 0) {
            return {false, std::string(cmd) + " failed: " + err.str()};
        }
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            diffs += slurp(e.path()) != slurp(b / e.path().filename());
        }
    }
    return {diffs == 0 && files > 0, fmt("%d CSV files from 7 subcommands, %d differ", files, diffs)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "symplecticity of transfer matrices", 5, symplecticity},
        {2, "generator norm against SVD", 5, norm_formula},
        {3, "interval arithmetic", 2, interval_arithmetic},
        {4, "Lie closure dimensions", 30, lie_closure_dims},
        {5, "Lyapunov closed forms and symmetry", 60, lyapunov_closed_forms},
        {6, "QR against exterior powers", 2, qr_vs_exterior},
        {7, "separability at desk scale", 600, separability},
        {8, "free IDS against the Weyl law", 300, ids_free},
        {9, "counting consistency", 120, counting_consistency},
        {10, "localization diagnostic", 600, localization_diagnostic},
        {11, "byte-identical reruns", 5, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt > c.limit_s) {
            out.pass = false;
            out.detail += fmt("; over the %.0f s budget", c.limit_s);
        }
        failed += !out.pass;
        std::printf("%s %2d %-38s %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), dt);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
