// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file cli.hpp
 * @brief Configuration parsing, subcommand dispatch and CSV output.
 *
 * A run is described by one JSON document:
 *
 *   {
 *     "N": 2, "V": [[0, 1], [1, 0]], "c": [1, 1], "ell": 0.1,
 *     "rho": 0.6931471805599453,                       (optional)
 *     "disorder": {"atoms": [[0, 0.5], [1, 0.5]]},     (optional, Bernoulli(1/2))
 *     "seed": 0,                                       (optional)
 *     "out": "andloc_out",                             (optional)
 *     "certify":  {"energies": GRID, "tol": 1e-8},
 *     "critical": {"grid_step": 0.05, "tol": 1e-8, "refine_iters": 40},
 *     "lyapunov": {"energies": GRID, "n_steps": 100000, "n_replicas": 8,
 *                  "burn_in": 100, "alphas": [0.5, 1]},
 *     "ids":      {"energies": GRID, "L": 50, "h": 0.01, "n_samples": 8,
 *                  "boundary": "dirichlet"},
 *     "localize": {"window": [lo, hi], "L": 100, "h": 0.01, "boundary": "dirichlet"}
 *   }
 *
 * where GRID is either an explicit array of energies or {"min", "max", "count"}.
 * Every command block and every field in it is optional.
 *
 * Outputs (fixed headers, one file per table, numbers printed with %.17g):
 *
 *   interval.csv          lambda_min,lambda_max,delta,ell_C,rho,ell,I_lo,I_hi
 *   certificates.csv      E,norm_ok,closure_dim,target_dim,certified
 *   critical.csv          E_lo,E_hi,E_mid,dim_reached,target_dim,tol
 *   lyapunov.csv          E,gamma_1..gamma_2N,stderr_1..stderr_2N,n_steps,n_replicas,seed
 *   lyapunov_holder.csv   alpha,exponent_index,max_ratio
 *   ids.csv               E,N_hat,stderr,L,h,n_samples,boundary
 *   ids_modulus.csv       spacing,max_increment
 *   decay.csv             eigenvalue,center,fitted_rate,residual,L,h
 *   report.csv            E,certified,closure_dim,separated,gamma_N,stderr_N,gamma_N_per_length
 *
 * Exit status: 0 success, 2 configuration or input error, 3 non-generic V
 * found by `critical` (or `report`), 4 numeric failure.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "andloc/errors.hpp"
#include "andloc/furstenberg.hpp"
#include "andloc/lyapunov.hpp"
#include "andloc/model.hpp"
#include "andloc/spectrum.hpp"

namespace andloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNonGeneric = 3;
inline constexpr int kExitNumeric = 4;

struct CertifyBlock {
    std::optional<std::vector<double>> energies;
    double tol = kDefaultClosureTol;
};

struct CriticalBlock {
    std::optional<double> grid_step;  ///< default |I| / 200
    double tol = kDefaultClosureTol;
    int refine_iters = 40;
};

struct LyapunovBlock {
    std::optional<std::vector<double>> energies;
    EstimatorConfig estimator;
    std::vector<double> alphas{0.5, 1.0};
};

struct IdsBlock {
    std::optional<std::vector<double>> energies;
    int L = 50;
    std::optional<double> h;  ///< default ell / 10
    int n_samples = 8;
    Boundary boundary = Boundary::dirichlet;
};

struct LocalizeBlock {
    std::optional<EnergyInterval> window;  ///< default: unit window at the center of I
    int L = 100;
    std::optional<double> h;
    Boundary boundary = Boundary::dirichlet;
};

struct RunConfig {
    ModelParams model;
    std::uint64_t seed = 0;
    std::string out_dir = "andloc_out";
    CertifyBlock certify;
    CriticalBlock critical;
    LyapunovBlock lyapunov;
    IdsBlock ids;
    LocalizeBlock localize;
};

namespace detail {

using json = nlohmann::json;

class Reader {
public:
    std::vector<std::string> violations;

    std::optional<double> number(const json& obj, const std::string& key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            violations.push_back(where + key + " must be a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            violations.push_back(where + key + " must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::int64_t> integer(const json& obj, const std::string& key, const std::string& where,
                                        std::int64_t min_value) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            violations.push_back(where + key + " must be an integer");
            return std::nullopt;
        }
        const auto i = v.get<std::int64_t>();
        if (i < min_value) {
            violations.push_back(where + key + " must be >= " + std::to_string(min_value));
            return std::nullopt;
        }
        return i;
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& what) {
        if (!v.is_array()) {
            violations.push_back(what + " must be an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                violations.push_back(what + " must contain only finite numbers");
                return std::nullopt;
            }
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::optional<std::vector<double>> grid(const json& obj, const std::string& where) {
        if (!obj.contains("energies")) return std::nullopt;
        const auto& g = obj.at("energies");
        const std::string what = where + "energies";
        if (g.is_array()) {
            auto v = numbers(g, what);
            if (v && v->empty()) violations.push_back(what + " must not be empty");
            if (v && !std::is_sorted(v->begin(), v->end())) violations.push_back(what + " must be sorted");
            return v;
        }
        if (!g.is_object()) {
            violations.push_back(what + " must be an array or {min, max, count}");
            return std::nullopt;
        }
        const auto lo = number(g, "min", what + ".");
        const auto hi = number(g, "max", what + ".");
        const auto count = integer(g, "count", what + ".", 1);
        if (!lo || !hi || !count) {
            violations.push_back(what + " needs min, max and count");
            return std::nullopt;
        }
        if (*hi < *lo) {
            violations.push_back(what + ": max must be >= min");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::int64_t k = 0; k < *count; ++k) {
            out.push_back(*count == 1 ? *lo
                                      : *lo + (*hi - *lo) * static_cast<double>(k) / static_cast<double>(*count - 1));
        }
        return out;
    }

    std::optional<Boundary> boundary(const json& obj, const std::string& where) {
        if (!obj.contains("boundary")) return std::nullopt;
        const auto& b = obj.at("boundary");
        if (b.is_string() && b.get<std::string>() == "dirichlet") return Boundary::dirichlet;
        if (b.is_string() && b.get<std::string>() == "neumann") return Boundary::neumann;
        violations.push_back(where + "boundary must be \"dirichlet\" or \"neumann\"");
        return std::nullopt;
    }

    void allowed_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : obj.items()) {
            if (!ok.count(k)) violations.push_back("unknown key " + where + k);
        }
    }

    const json* block(const json& doc, const char* name) {
        if (!doc.contains(name)) return nullptr;
        if (!doc.at(name).is_object()) {
            violations.push_back(std::string(name) + " must be an object");
            return nullptr;
        }
        return &doc.at(name);
    }
};

}  // namespace detail

/// Parses and validates a configuration document. Every violation found is
/// reported together in one ConfigError.
inline RunConfig parse_config(std::string_view text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"the configuration must be a JSON object"});

    detail::Reader rd;
    auto& bad = rd.violations;
    rd.allowed_keys(doc,
                    {"N", "V", "c", "ell", "rho", "disorder", "seed", "out", "certify", "critical", "lyapunov",
                     "ids", "localize"},
                    "");

    std::optional<Index> n;
    if (const auto v = rd.integer(doc, "N", "", 1)) n = static_cast<Index>(*v);
    else if (!doc.contains("N")) bad.emplace_back("N is required");

    // V: full N x N array; the symmetry check names the worst entry.
    std::optional<Matrix> vmat;
    if (!doc.contains("V")) {
        bad.emplace_back("V is required (an N x N array)");
    } else if (n) {
        const auto& jv = doc.at("V");
        bool shape_ok = jv.is_array() && static_cast<Index>(jv.size()) == *n;
        Matrix m(*n, *n);
        for (Index i = 0; shape_ok && i < *n; ++i) {
            const auto row = rd.numbers(jv.at(static_cast<std::size_t>(i)), "V[" + std::to_string(i) + "]");
            if (!row || static_cast<Index>(row->size()) != *n) {
                shape_ok = false;
                break;
            }
            for (Index j = 0; j < *n; ++j) m(i, j) = (*row)[static_cast<std::size_t>(j)];
        }
        if (!shape_ok) {
            bad.push_back("V must be an N x N array of numbers with N = " + std::to_string(*n));
        } else {
            try {
                (void)SymmetricMatrix(m);
                vmat = m;
            } catch (const InputError& e) {
                bad.push_back(std::string("V: ") + e.what());
            }
        }
    }

    std::vector<double> c;
    if (!doc.contains("c")) {
        bad.emplace_back("c is required (an array of N non-zero reals)");
    } else if (auto cv = rd.numbers(doc.at("c"), "c")) {
        c = *cv;
        if (n && static_cast<Index>(c.size()) != *n) {
            bad.push_back("c must have length N = " + std::to_string(*n));
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] == 0.0) {
                bad.push_back("c[" + std::to_string(i) +
                              "] = 0: the coupling constants c_1..c_N must be non-zero real numbers");
            }
        }
    }

    const auto ell = rd.number(doc, "ell", "");
    if (!doc.contains("ell")) bad.emplace_back("ell is required");
    else if (ell && !(*ell > 0.0)) bad.emplace_back("ell must be > 0");
    const double rho = rd.number(doc, "rho", "").value_or(kDefaultRho);
    if (!(rho > 0.0 && rho <= 1.0)) bad.emplace_back("rho must lie in (0, 1]");

    std::optional<DisorderSpec> disorder = DisorderSpec();
    if (const auto* jd = rd.block(doc, "disorder")) {
        rd.allowed_keys(*jd, {"atoms"}, "disorder.");
        disorder.reset();
        if (!jd->contains("atoms") || !jd->at("atoms").is_array() || jd->at("atoms").empty()) {
            bad.emplace_back("disorder.atoms must be a non-empty array of [value, probability] pairs");
        } else {
            std::vector<Atom> atoms;
            bool ok = true;
            for (const auto& a : jd->at("atoms")) {
                const auto pair = rd.numbers(a, "disorder.atoms entry");
                if (!pair || pair->size() != 2) {
                    bad.emplace_back("disorder.atoms entries must be [value, probability] pairs");
                    ok = false;
                    break;
                }
                atoms.push_back({(*pair)[0], (*pair)[1]});
            }
            if (ok) {
                try {
                    disorder = DisorderSpec(atoms);
                } catch (const InputError& e) {
                    bad.emplace_back(e.what());
                }
            }
        }
    }
    if (disorder && !disorder->has_binary_support()) {
        bad.emplace_back("disorder.atoms must include both 0 and 1: the single-site law needs {0,1} ⊂ supp ν");
        disorder.reset();
    }

    RunConfig cfg{ModelParams{SymmetricMatrix::zero(1), {1.0}, 0.1, kDefaultRho, DisorderSpec()}};
    if (doc.contains("seed")) {
        if (doc.at("seed").is_number_unsigned()) cfg.seed = doc.at("seed").get<std::uint64_t>();
        else bad.emplace_back("seed must be a non-negative integer");
    }
    if (doc.contains("out")) {
        if (doc.at("out").is_string()) cfg.out_dir = doc.at("out").get<std::string>();
        else bad.emplace_back("out must be a string");
    }

    if (const auto* b = rd.block(doc, "certify")) {
        rd.allowed_keys(*b, {"energies", "tol"}, "certify.");
        cfg.certify.energies = rd.grid(*b, "certify.");
        cfg.certify.tol = rd.number(*b, "tol", "certify.").value_or(cfg.certify.tol);
        if (!(cfg.certify.tol > 0.0)) bad.emplace_back("certify.tol must be > 0");
    }
    if (const auto* b = rd.block(doc, "critical")) {
        rd.allowed_keys(*b, {"grid_step", "tol", "refine_iters"}, "critical.");
        cfg.critical.grid_step = rd.number(*b, "grid_step", "critical.");
        if (cfg.critical.grid_step && !(*cfg.critical.grid_step > 0.0)) bad.emplace_back("critical.grid_step must be > 0");
        cfg.critical.tol = rd.number(*b, "tol", "critical.").value_or(cfg.critical.tol);
        if (!(cfg.critical.tol > 0.0)) bad.emplace_back("critical.tol must be > 0");
        cfg.critical.refine_iters = static_cast<int>(rd.integer(*b, "refine_iters", "critical.", 0).value_or(40));
    }
    if (const auto* b = rd.block(doc, "lyapunov")) {
        rd.allowed_keys(*b, {"energies", "n_steps", "n_replicas", "burn_in", "alphas"}, "lyapunov.");
        auto& est = cfg.lyapunov.estimator;
        cfg.lyapunov.energies = rd.grid(*b, "lyapunov.");
        est.n_steps = rd.integer(*b, "n_steps", "lyapunov.", 1).value_or(est.n_steps);
        est.n_replicas = static_cast<int>(rd.integer(*b, "n_replicas", "lyapunov.", 1).value_or(est.n_replicas));
        est.burn_in = rd.integer(*b, "burn_in", "lyapunov.", 0).value_or(est.burn_in);
        if (b->contains("alphas")) {
            if (auto a = rd.numbers(b->at("alphas"), "lyapunov.alphas")) cfg.lyapunov.alphas = *a;
        }
    }
    if (const auto* b = rd.block(doc, "ids")) {
        rd.allowed_keys(*b, {"energies", "L", "h", "n_samples", "boundary"}, "ids.");
        cfg.ids.energies = rd.grid(*b, "ids.");
        cfg.ids.L = static_cast<int>(rd.integer(*b, "L", "ids.", 1).value_or(cfg.ids.L));
        cfg.ids.h = rd.number(*b, "h", "ids.");
        cfg.ids.n_samples = static_cast<int>(rd.integer(*b, "n_samples", "ids.", 1).value_or(cfg.ids.n_samples));
        cfg.ids.boundary = rd.boundary(*b, "ids.").value_or(cfg.ids.boundary);
    }
    if (const auto* b = rd.block(doc, "localize")) {
        rd.allowed_keys(*b, {"window", "L", "h", "boundary"}, "localize.");
        if (b->contains("window")) {
            const auto w = rd.numbers(b->at("window"), "localize.window");
            if (!w || w->size() != 2 || !((*w)[0] < (*w)[1])) bad.emplace_back("localize.window must be [lo, hi] with lo < hi");
            else cfg.localize.window = EnergyInterval{(*w)[0], (*w)[1]};
        }
        cfg.localize.L = static_cast<int>(rd.integer(*b, "L", "localize.", 1).value_or(cfg.localize.L));
        cfg.localize.h = rd.number(*b, "h", "localize.");
        cfg.localize.boundary = rd.boundary(*b, "localize.").value_or(cfg.localize.boundary);
    }

    if (!bad.empty() || !vmat || !ell || !disorder) {
        if (bad.empty()) bad.emplace_back("incomplete model specification");
        throw ConfigError(bad);
    }
    cfg.model = ModelParams{SymmetricMatrix(*vmat), c, *ell, rho, *disorder};
    if (auto v = cfg.model.violations(); !v.empty()) throw ConfigError(v);

    for (const auto* h : {&cfg.ids.h, &cfg.localize.h}) {
        if (*h) {
            try {
                (void)andloc::detail::points_per_cell(*ell, **h);
            } catch (const GridError& e) {
                bad.emplace_back(e.what());
            }
        }
    }
    if (!bad.empty()) throw ConfigError(bad);
    return cfg;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(std::int64_t x) { return std::to_string(x); }
inline std::string fmt(std::uint64_t x) { return std::to_string(x); }
inline std::string fmt(int x) { return std::to_string(x); }
inline std::string fmt(bool x) { return x ? "1" : "0"; }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

class Csv {
public:
    explicit Csv(std::string header) : text_(std::move(header) + "\n") {}

    template <class... Ts>
    void row(const Ts&... cols) {
        std::string line;
        ((line += (line.empty() ? "" : ","), line += fmt(cols)), ...);
        text_ += line + "\n";
    }

    void raw_row(const std::vector<std::string>& cols) {
        std::string line;
        for (const auto& c : cols) line += (line.empty() ? "" : ",") + c;
        text_ += line + "\n";
    }

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

/// Writes `content` to dir/name via a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto target = dir / name;
    const auto tmp = dir / (name + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InvalidArgument("cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw InvalidArgument("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

inline std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
    return out;
}

inline std::vector<double> interval_grid(const ModelParams& p, const std::optional<std::vector<double>>& given,
                                         const char* command) {
    if (given) return *given;
    const auto iv = energy_interval(p);
    if (iv.is_empty()) {
        throw InvalidArgument(std::string(command) +
                              ": the energy interval is empty (ell >= ell_C); give explicit energies");
    }
    return linspace(iv.lo, iv.hi, 21);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct Runner {
    const RunConfig& cfg;
    std::filesystem::path out;
    std::ostream& log;

    void interval() {
        const auto& p = cfg.model;
        const auto b = spectral_bounds(p);
        const auto iv = energy_interval(p);
        log << "lambda_min = " << detail::fmt(b.lambda_min) << "\n"
            << "lambda_max = " << detail::fmt(b.lambda_max) << "\n"
            << "delta      = " << detail::fmt(b.delta) << "\n"
            << "ell_C      = " << detail::fmt(b.ell_C) << "\n";
        if (iv.is_empty()) log << "I          = empty (ell >= ell_C)\n";
        else log << "I          = [" << detail::fmt(iv.lo) << ", " << detail::fmt(iv.hi) << "]\n";
        detail::Csv csv("lambda_min,lambda_max,delta,ell_C,rho,ell,I_lo,I_hi");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        csv.row(b.lambda_min, b.lambda_max, b.delta, b.ell_C, p.rho, p.ell, iv.is_empty() ? nan : iv.lo,
                iv.is_empty() ? nan : iv.hi);
        detail::write_atomic(out, "interval.csv", csv.text());
    }

    std::vector<DensityCertificate> certify() { return certify_at(detail::interval_grid(cfg.model, cfg.certify.energies, "certify")); }

    std::vector<DensityCertificate> certify_at(const std::vector<double>& energies) {
        std::vector<DensityCertificate> certs(energies.size());
        parallel_for(energies.size(), [&](std::size_t k) {
            certs[k] = density_certificate(cfg.model, energies[k], cfg.certify.tol);
        });
        detail::Csv csv("E,norm_ok,closure_dim,target_dim,certified");
        std::size_t ok = 0;
        for (const auto& c : certs) {
            csv.row(c.energy, c.norm_condition, static_cast<std::int64_t>(c.closure_dim), static_cast<std::int64_t>(c.target_dim),
                    c.certified);
            ok += c.certified;
        }
        detail::write_atomic(out, "certificates.csv", csv.text());
        log << "certify: " << ok << " of " << certs.size() << " energies certified (rho = "
            << detail::fmt(cfg.model.rho) << ")\n";
        return certs;
    }

    CriticalEnergySet critical() {
        const auto iv = energy_interval(cfg.model);
        if (iv.is_empty()) throw ScanRangeError("critical: the energy interval is empty (ell >= ell_C)");
        const double step = cfg.critical.grid_step.value_or(iv.length() / 200.0);
        const auto set = scan_critical_energies(cfg.model, step, cfg.critical.tol, cfg.critical.refine_iters);
        detail::Csv csv("E_lo,E_hi,E_mid,dim_reached,target_dim,tol");
        for (const auto& b : set.brackets) {
            csv.row(b.lo, b.hi, b.mid, static_cast<std::int64_t>(b.dim_reached), static_cast<std::int64_t>(set.target_dim),
                    set.tolerance);
        }
        detail::write_atomic(out, "critical.csv", csv.text());
        if (set.non_generic_flag) {
            log << "critical: closure deficient at every grid energy; V is non-generic\n";
        } else {
            log << "critical: " << set.energies.size() << " critical energies (grid step "
                << detail::fmt(step) << ")\n";
        }
        return set;
    }

    std::vector<LyapunovSpectrum> lyapunov() {
        const auto energies = detail::interval_grid(cfg.model, cfg.lyapunov.energies, "lyapunov");
        auto est = cfg.lyapunov.estimator;
        est.master_seed = cfg.seed;
        std::vector<LyapunovSpectrum> scan;
        for (double e : energies) scan.push_back(lyapunov_spectrum(cfg.model, e, est));

        const Index dim = 2 * cfg.model.N();
        std::string header = "E";
        for (Index i = 1; i <= dim; ++i) header += ",gamma_" + std::to_string(i);
        for (Index i = 1; i <= dim; ++i) header += ",stderr_" + std::to_string(i);
        header += ",n_steps,n_replicas,seed";
        detail::Csv csv(header);
        for (const auto& s : scan) {
            std::vector<std::string> cols{detail::fmt(s.energy)};
            for (double g : s.gammas) cols.push_back(detail::fmt(g));
            for (double g : s.stderrs) cols.push_back(detail::fmt(g));
            cols.push_back(detail::fmt(est.n_steps));
            cols.push_back(detail::fmt(est.n_replicas));
            cols.push_back(detail::fmt(est.master_seed));
            csv.raw_row(cols);
        }
        detail::write_atomic(out, "lyapunov.csv", csv.text());

        detail::Csv holder("alpha,exponent_index,max_ratio");
        for (const auto& r : lyapunov_modulus(scan, cfg.lyapunov.alphas)) {
            holder.row(r.alpha, static_cast<std::int64_t>(r.exponent_index), r.max_ratio);
        }
        detail::write_atomic(out, "lyapunov_holder.csv", holder.text());
        std::size_t sep = 0;
        for (const auto& s : scan) sep += is_separated(s);
        log << "lyapunov: " << sep << " of " << scan.size() << " energies separated at 3 sigma\n";
        return scan;
    }

    IDSCurve ids() {
        const auto& p = cfg.model;
        std::vector<double> energies;
        if (cfg.ids.energies) {
            energies = *cfg.ids.energies;
        } else {
            const auto b = spectral_bounds(p);
            energies = detail::linspace(b.lambda_min - 1.0, b.lambda_max + 10.0, 45);
        }
        const double h = cfg.ids.h.value_or(p.ell / 10.0);
        const auto curve = estimate_ids(p, energies, cfg.ids.L, h, cfg.ids.n_samples, cfg.seed, cfg.ids.boundary);
        detail::Csv csv("E,N_hat,stderr,L,h,n_samples,boundary");
        for (std::size_t k = 0; k < curve.energies.size(); ++k) {
            csv.row(curve.energies[k], curve.values[k], curve.stderrs[k], curve.L, curve.h, curve.n_samples,
                    to_string(curve.boundary));
        }
        detail::write_atomic(out, "ids.csv", csv.text());

        detail::Csv mod("spacing,max_increment");
        const auto iv = energy_interval(p);
        if (!iv.is_empty() && curve.energies.front() <= iv.lo && curve.energies.back() >= iv.hi) {
            try {
                for (const auto& r : ids_modulus(curve, iv)) mod.row(r.spacing, r.max_increment);
            } catch (const RangeError&) {
                // Fewer than two grid points inside I: the table stays empty.
            }
        }
        detail::write_atomic(out, "ids_modulus.csv", mod.text());
        log << "ids: " << curve.energies.size() << " energies, L = " << curve.L << ", " << curve.n_samples
            << " samples\n";
        return curve;
    }

    EnergyInterval localize_window() const {
        if (cfg.localize.window) return *cfg.localize.window;
        const auto iv = energy_interval(cfg.model);
        if (iv.is_empty()) throw InvalidArgument("localize: the energy interval is empty; give localize.window");
        const double mid = 0.5 * (iv.lo + iv.hi);
        return {mid - 0.5, mid + 0.5};
    }

    std::vector<DecayReport> localize() {
        const auto& p = cfg.model;
        const double h = cfg.localize.h.value_or(p.ell / 10.0);
        RandomStream rng(cfg.seed, StreamId::localize, 0);
        const FiniteRestriction r{cfg.localize.L, cfg.localize.boundary, h,
                                  sample_path(p, 2 * static_cast<std::size_t>(cfg.localize.L), rng)};
        const auto window = localize_window();
        const auto reps = eigen_decay(p, r, window);
        detail::Csv csv("eigenvalue,center,fitted_rate,residual,L,h");
        for (const auto& d : reps) csv.row(d.eigenvalue, d.localization_center, d.fitted_rate, d.fit_residual, r.L, h);
        detail::write_atomic(out, "decay.csv", csv.text());
        const auto s = summarize_decay(reps);
        log << "localize: " << s.count << " eigenpairs in (" << detail::fmt(window.lo) << ", "
            << detail::fmt(window.hi) << "], median rate " << detail::fmt(s.median_rate) << ", "
            << detail::fmt(100.0 * s.positive_fraction) << "% positive\n";
        return reps;
    }

    int report() {
        interval();
        const auto scan = lyapunov();
        std::vector<double> energies;
        for (const auto& s : scan) energies.push_back(s.energy);
        const auto certs = certify_at(energies);
        const auto iv = energy_interval(cfg.model);
        std::optional<CriticalEnergySet> crit;
        if (!iv.is_empty()) crit = critical();
        ids();
        const auto reps = localize();

        const auto n = static_cast<std::size_t>(cfg.model.N());
        detail::Csv csv("E,certified,closure_dim,separated,gamma_N,stderr_N,gamma_N_per_length");
        for (std::size_t k = 0; k < scan.size(); ++k) {
            const auto& s = scan[k];
            csv.row(s.energy, certs[k].certified, static_cast<std::int64_t>(certs[k].closure_dim), is_separated(s),
                    s.gammas[n - 1], s.stderrs[n - 1], s.gammas[n - 1] / cfg.model.ell);
        }
        detail::write_atomic(out, "report.csv", csv.text());

        // Decay against the exponent at the Lyapunov energy nearest the window center.
        const auto window = localize_window();
        const double center = 0.5 * (window.lo + window.hi);
        std::size_t near = 0;
        for (std::size_t k = 1; k < scan.size(); ++k) {
            if (std::abs(scan[k].energy - center) < std::abs(scan[near].energy - center)) near = k;
        }
        const auto s = summarize_decay(reps);
        const double gamma_len = scan[near].gammas[n - 1] / cfg.model.ell;
        log << "report: decay median " << detail::fmt(s.median_rate) << " vs gamma_N / ell = "
            << detail::fmt(gamma_len) << " at E = " << detail::fmt(scan[near].energy) << "\n";
        return crit && crit->non_generic_flag ? kExitNonGeneric : kExitOk;
    }

    void plot_script() {
        static const char* script = R"PY(#!/usr/bin/env python3
# Plots whichever andloc CSV tables exist in this directory.
import csv, os, sys
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def read(name):
    path = os.path.join(here, name)
    if not os.path.exists(path):
        return None
    with open(path) as f:
        return list(csv.DictReader(f))

rows = read("lyapunov.csv")
if rows:
    keys = [k for k in rows[0] if k.startswith("gamma_")]
    for k in keys:
        plt.plot([float(r["E"]) for r in rows], [float(r[k]) for r in rows], label=k)
    plt.xlabel("E"); plt.ylabel("exponent per cell"); plt.legend()
    plt.savefig(os.path.join(here, "lyapunov.png")); plt.clf()
rows = read("ids.csv")
if rows:
    plt.plot([float(r["E"]) for r in rows], [float(r["N_hat"]) for r in rows])
    plt.xlabel("E"); plt.ylabel("N(E)")
    plt.savefig(os.path.join(here, "ids.png")); plt.clf()
rows = read("decay.csv")
if rows:
    plt.scatter([float(r["eigenvalue"]) for r in rows], [float(r["fitted_rate"]) for r in rows], s=4)
    plt.xlabel("eigenvalue"); plt.ylabel("fitted decay rate")
    plt.savefig(os.path.join(here, "decay.png")); plt.clf()
)PY";
        detail::write_atomic(out, "plot.py", script);
    }
};

/// Runs one subcommand and maps failures to the exit-status taxonomy.
inline int run(const RunConfig& cfg, std::string_view command, const std::filesystem::path& out_dir,
               std::ostream& log, std::ostream& err, bool plot = false) {
    Runner r{cfg, out_dir, log};
    try {
        int status = kExitOk;
        if (command == "interval") r.interval();
        else if (command == "certify") r.certify();
        else if (command == "critical") status = r.critical().non_generic_flag ? kExitNonGeneric : kExitOk;
        else if (command == "lyapunov") r.lyapunov();
        else if (command == "ids") r.ids();
        else if (command == "localize") r.localize();
        else if (command == "report") status = r.report();
        else throw InvalidArgument("unknown subcommand '" + std::string(command) + "'");
        if (plot) r.plot_script();
        return status;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace andloc::cli
