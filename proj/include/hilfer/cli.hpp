#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hilfer/error.hpp"
#include "hilfer/expression.hpp"
#include "hilfer/problem.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/stability.hpp"

namespace hilfer::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_io = 1,
    exit_invalid = 2,
    exit_no_convergence = 3,
    exit_certificate_fail = 4,
    exit_inapplicable = 5,
};

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string command = "solve";
    /// Catalog id, or "inline" to build the problem from `problem`.
    std::string scenario;
    std::size_t grid_n = 1024;
    double tol = 1e-10;
    int max_iter = 500;
    /// Overrides the scenario's delta when set.
    std::optional<double> delta;
    double perturb_amplitude = 0.01;
    std::string perturb_mode = "random-smooth";
    int trials = 100;
    std::uint64_t seed = 1;
    /// Refinement levels of the convergence study.
    int levels = 4;
    std::string output_path;
    /// Raw [problem] section for inline specs.
    std::map<std::string, std::string> problem;

    [[nodiscard]] std::vector<std::string> issues() const {
        std::vector<std::string> out;
        static const char* commands[] = {"solve", "stability", "convergence", "catalog-list"};
        if (std::find(std::begin(commands), std::end(commands), command) == std::end(commands)) {
            out.push_back("unknown command '" + command + "'");
        }
        if (command != "catalog-list" && scenario.empty()) {
            out.emplace_back("scenario is required");
        }
        if (grid_n < 8) {
            out.emplace_back("grid_n must be at least 8");
        }
        if (!(tol > 0.0)) {
            out.emplace_back("tol must be positive");
        }
        if (max_iter < 1) {
            out.emplace_back("max_iter must be at least 1");
        }
        if (trials < 1) {
            out.emplace_back("trials must be at least 1");
        }
        if (delta && !(*delta > 0.0 && *delta <= 1.0)) {
            out.emplace_back("delta must lie in (0, 1]");
        }
        if (!(perturb_amplitude >= 0.0) || !std::isfinite(perturb_amplitude)) {
            out.emplace_back("amplitude must be finite and nonnegative");
        }
        if (levels < 2) {
            out.emplace_back("levels must be at least 2");
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest round-trip-safe text with 17 significant digits, "C" locale.
inline std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

namespace detail {

inline std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline double parse_real(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": not a number: '" + text + "'");
    }
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": not an integer: '" + text + "'");
    }
    return v;
}

/// Comma- or space-separated reals; empty text gives an empty list.
inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    while (in >> item) {
        out.push_back(parse_real(key, item));
    }
    return out;
}

} // namespace detail

inline PsiFunction parse_psi(const std::string& text) {
    const std::string s = detail::trim(text);
    if (s == "identity") {
        return PsiFunction::identity();
    }
    if (s == "expm1") {
        return PsiFunction::expm1();
    }
    if (s == "log1p") {
        return PsiFunction::log1p();
    }
    if (s.rfind("power:", 0) == 0) {
        const double p = detail::parse_real("psi", s.substr(6));
        if (!(p > 0.0)) {
            throw ConfigError("psi: power exponent must be positive");
        }
        return PsiFunction::power(p);
    }
    throw ConfigError("psi: expected identity, power:p, expm1 or log1p, got '" + text + "'");
}

/// Reads the INI-style config: sections [run], [stability] and [problem].
inline RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    static const std::map<std::string, std::vector<std::string>> known = {
        {"run", {"command", "scenario", "grid_n", "tol", "max_iter", "delta", "output", "levels"}},
        {"stability", {"trials", "amplitude", "mode", "seed"}},
    };
    for (const auto& [section, body] : tree) {
        if (section == "problem") {
            for (const auto& [key, v] : body) {
                cfg.problem[key] = v.data();
            }
            continue;
        }
        const auto it = known.find(section);
        if (it == known.end()) {
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, v] : body) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
                throw ConfigError("config: unknown key " + section + "." + key);
            }
        }
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) {
            return detail::trim(*v);
        }
        return std::nullopt;
    };
    if (auto v = get("run.command")) {
        cfg.command = *v;
    }
    if (auto v = get("run.scenario")) {
        cfg.scenario = *v;
    }
    if (auto v = get("run.grid_n")) {
        const auto n = detail::parse_integer("grid_n", *v);
        cfg.grid_n = n < 0 ? 0 : static_cast<std::size_t>(n);
    }
    if (auto v = get("run.tol")) {
        cfg.tol = detail::parse_real("tol", *v);
    }
    if (auto v = get("run.max_iter")) {
        cfg.max_iter = static_cast<int>(detail::parse_integer("max_iter", *v));
    }
    if (auto v = get("run.delta")) {
        cfg.delta = detail::parse_real("delta", *v);
    }
    if (auto v = get("run.levels")) {
        cfg.levels = static_cast<int>(detail::parse_integer("levels", *v));
    }
    if (auto v = get("run.output")) {
        cfg.output_path = *v;
    }
    if (auto v = get("stability.trials")) {
        cfg.trials = static_cast<int>(detail::parse_integer("trials", *v));
    }
    if (auto v = get("stability.amplitude")) {
        cfg.perturb_amplitude = detail::parse_real("amplitude", *v);
    }
    if (auto v = get("stability.mode")) {
        cfg.perturb_mode = *v;
    }
    if (auto v = get("stability.seed")) {
        const auto s = detail::parse_integer("seed", *v);
        if (s < 0) {
            throw ConfigError("seed must be nonnegative");
        }
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open config '" + path + "'");
    }
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Problem construction

namespace detail {

inline void attach_stability(ImpulsiveProblem& p, double L_f, std::vector<double> L_g, TimeMap phi, double xi,
                             std::size_t grid_n) {
    p.lip.emplace(L_f, std::move(L_g), std::move(phi), xi, p.psi, p.orders, p.partition, grid_n);
}

} // namespace detail

/// Builds an inline problem from the [problem] section.
///
/// Missing Lipschitz constants are estimated by sampling (a lower estimate,
/// so the certificate may then be optimistic); phi is exp(kappa (psi-psi(0)))
/// with kappa = phi_kappa (default 4) and xi defaults to phi(T) when there
/// are impulses.
inline ImpulsiveProblem inline_problem(const std::map<std::string, std::string>& kv, std::size_t grid_n,
                                       std::optional<double> delta_override) {
    static const std::vector<std::string> allowed = {"alpha", "beta", "delta", "psi", "T", "t_points",
                                                     "s_points", "x0", "f", "lipschitz_f", "lipschitz_g",
                                                     "phi_kappa", "xi"};
    for (const auto& [key, v] : kv) {
        const bool g_key = key.size() > 1 && key[0] == 'g' &&
                           std::all_of(key.begin() + 1, key.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (!g_key && std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("config: unknown key problem." + key);
        }
    }
    auto req = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ConfigError("config: problem." + key + " is required");
        }
        return it->second;
    };
    auto opt = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
    };

    ImpulsiveProblem p;
    p.name = "inline";
    p.orders.alpha = detail::parse_real("alpha", req("alpha"));
    p.orders.beta = detail::parse_real("beta", opt("beta").value_or("0"));
    p.orders.delta = delta_override ? *delta_override : detail::parse_real("delta", opt("delta").value_or("1"));
    if (auto v = opt("psi")) {
        p.psi = parse_psi(*v);
    }
    p.partition.T = detail::parse_real("T", opt("T").value_or("1"));
    p.partition.t_points = detail::parse_list("t_points", opt("t_points").value_or(""));
    p.partition.s_points = detail::parse_list("s_points", opt("s_points").value_or(""));
    p.x0 = detail::parse_real("x0", opt("x0").value_or("0"));
    try {
        p.f = Expression::parse(req("f")).as_map();
        for (std::size_t i = 1; i <= p.partition.t_points.size(); ++i) {
            p.g.push_back(Expression::parse(req("g" + std::to_string(i))).as_map());
        }
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    if (kv.count("g" + std::to_string(p.partition.t_points.size() + 1)) != 0) {
        throw ConfigError("config: more impulse maps than impulse times");
    }

    const auto report = validate(p);
    if (!report.ok) {
        std::string msg = "invalid problem:";
        for (const auto& m : report.messages) {
            msg += " " + m + ";";
        }
        throw ConfigError(msg);
    }

    double L_f = 0.0;
    if (auto v = opt("lipschitz_f")) {
        L_f = detail::parse_real("lipschitz_f", *v);
    } else {
        // f independent of x still needs a positive constant.
        L_f = std::max(estimate_lipschitz(p.f, {0.0, p.partition.T}, {-10.0, 10.0}, 4096), 1e-12);
    }
    std::vector<double> L_g;
    if (auto v = opt("lipschitz_g")) {
        L_g = detail::parse_list("lipschitz_g", *v);
    } else {
        for (std::size_t i = 0; i < p.g.size(); ++i) {
            L_g.push_back(estimate_lipschitz(p.g[i], {p.partition.t_points[i], p.partition.s_points[i]},
                                             {-10.0, 10.0}, 4096));
        }
    }
    const double kappa = detail::parse_real("phi_kappa", opt("phi_kappa").value_or("4"));
    if (!(kappa > 0.0)) {
        throw ConfigError("phi_kappa must be positive");
    }
    auto phi = exponential_phi(p.psi, kappa);
    const double xi = opt("xi") ? detail::parse_real("xi", *opt("xi"))
                                : (p.partition.impulses() > 0 ? phi(p.partition.T) : 0.0);
    if (!(L_f > 0.0) || L_g.size() != p.g.size() ||
        std::any_of(L_g.begin(), L_g.end(), [](double v) { return !(v >= 0.0); }) || !(xi >= 0.0)) {
        throw ConfigError("invalid stability data: need L_f > 0, one L_g >= 0 per impulse, xi >= 0");
    }
    detail::attach_stability(p, L_f, std::move(L_g), std::move(phi), xi, grid_n);
    return p;
}

inline ImpulsiveProblem build_problem(const RunConfig& cfg) {
    if (cfg.scenario == "inline") {
        return inline_problem(cfg.problem, cfg.grid_n, cfg.delta);
    }
    if (!cfg.problem.empty()) {
        throw ConfigError("config: [problem] given but scenario is not 'inline'");
    }
    const auto names = catalog_names();
    if (std::find(names.begin(), names.end(), cfg.scenario) == names.end()) {
        throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    }
    ImpulsiveProblem p = catalog(cfg.scenario, cfg.grid_n);
    if (cfg.delta) {
        p.orders.delta = *cfg.delta;
        const auto& old = *p.lip;
        detail::attach_stability(p, old.L_f(), old.L_g(), old.phi(), old.xi(), cfg.grid_n);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Commands

struct Streams {
    std::ostream& csv;
    std::ostream& summary;
    std::ostream& log;
    bool verbose = false;
};

inline int cmd_catalog_list(const RunConfig& cfg, Streams& io) {
    io.csv << "name,alpha,beta,gamma,delta,psi,impulses,T,c_phi,Phi,has_exact\n";
    const auto names = catalog_names();
    for (const auto& name : names) {
        const auto p = catalog(name, cfg.grid_n);
        io.csv << name << ',' << format_number(p.orders.alpha) << ',' << format_number(p.orders.beta) << ','
               << format_number(p.orders.gamma_w()) << ',' << format_number(p.orders.delta) << ','
               << p.psi.name() << ',' << p.partition.impulses() << ',' << format_number(p.partition.T) << ','
               << format_number(p.lip->c_phi()) << ',' << format_number(p.lip->Phi()) << ','
               << (p.exact ? 1 : 0) << '\n';
    }
    io.summary << "catalog-list: " << names.size() << " scenarios\n";
    return exit_ok;
}

inline int cmd_solve(const RunConfig& cfg, const ImpulsiveProblem& p, Streams& io) {
    const auto res = picard_solve(p, {cfg.grid_n, cfg.tol, cfg.max_iter});
    io.csv << "branch_index,kind,t,x,weighted_x\n";
    const auto& sol = res.solution;
    for (std::size_t bi = 0; bi < sol.branches.size(); ++bi) {
        const auto& b = sol.branches[bi];
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            io.csv << bi << ',' << to_string(b.kind) << ',' << format_number(b.grid.t[j]) << ','
                   << format_number(b.x[j]) << ',' << format_number(b.weighted[j]) << '\n';
        }
    }
    io.summary << "solve " << p.name << ": converged in " << res.report.iterations
               << " iterations, final_delta=" << format_number(res.report.final_delta)
               << ", Phi=" << format_number(res.report.phi_bound) << '\n';
    return exit_ok;
}

/// Nested grids n_k = (grid_n - 1) 2^k + 1. The error of level k is the
/// weighted sup distance to the exact solution when the scenario has one and
/// to the finest level otherwise (the finest row is then omitted from the
/// reference comparison and reports 0 by construction, so it is not written).
inline int cmd_convergence(const RunConfig& cfg, const ImpulsiveProblem& p, Streams& io) {
    const int levels = cfg.levels;
    std::vector<GridSolution> sols;
    std::vector<std::size_t> ns;
    const bool exact = static_cast<bool>(p.exact);
    const int solved_levels = exact ? levels : levels + 1;
    for (int k = 0; k < solved_levels; ++k) {
        const std::size_t n = (cfg.grid_n - 1) * (std::size_t{1} << k) + 1;
        ns.push_back(n);
        sols.push_back(picard_solve(p, {n, cfg.tol, cfg.max_iter}).solution);
        if (io.verbose) {
            io.log << "convergence: solved n=" << n << '\n';
        }
    }
    const double g = p.orders.gamma_w();
    const double psi0 = p.psi(0.0);
    io.csv << "n,sup_error,observed_order\n";
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < levels; ++k) {
        const auto& s = sols[k];
        double err = 0.0;
        for (std::size_t bi = 0; bi < s.branches.size(); ++bi) {
            const auto& b = s.branches[bi];
            for (std::size_t j = 0; j < b.x.size(); ++j) {
                if (bi == 0 && j == 0 && g < 1.0) {
                    continue;
                }
                double ref = 0.0;
                if (exact) {
                    const double w = g < 1.0 ? std::pow(b.grid.u[j] - psi0, 1.0 - g) : 1.0;
                    ref = w * p.exact(b.grid.t[j]);
                } else {
                    const std::size_t stride = std::size_t{1} << (levels - k);
                    ref = sols.back().branches[bi].weighted[j * stride];
                }
                err = std::max(err, std::fabs(b.weighted[j] - ref));
            }
        }
        io.csv << ns[k] << ',' << format_number(err) << ',';
        if (k > 0) {
            io.csv << format_number(std::log2(prev / err));
        }
        io.csv << '\n';
        prev = err;
    }
    io.summary << "convergence " << p.name << ": " << levels << " levels, finest error "
               << format_number(prev) << '\n';
    return exit_ok;
}

inline int cmd_stability(const RunConfig& cfg, const ImpulsiveProblem& p, Streams& io) {
    const auto& sd = *p.lip;
    const PerturbSpec spec{cfg.perturb_amplitude, parse_perturb_mode(cfg.perturb_mode)};
    const SolveOptions sopt{cfg.grid_n, cfg.tol, cfg.max_iter};
    const auto base = picard_solve(p, sopt).solution;

    const auto trials = static_cast<std::size_t>(cfg.trials);
    std::vector<std::string> rows(trials);
    std::vector<Verdict> verdicts(trials, Verdict::inapplicable);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < trials; k = next++) {
            try {
                const std::uint64_t seed = cfg.seed + k;
                const auto y = perturb(p, base, spec, seed);
                const auto cert = check_certificate(p, y, sd, sopt);
                verdicts[k] = cert.verdict;
                std::string r = std::to_string(k) + ',' + std::to_string(seed) + ',' +
                                format_number(spec.amplitude) + ',' + format_number(cert.phi_max) + ',' +
                                format_number(cert.xi) + ',' + format_number(cert.c_phi) + ',' +
                                format_number(cert.Phi) + ',' + format_number(cert.lhs_max()) + ',' +
                                format_number(cert.bound_min()) + ',' + format_number(cert.margin) + ',' +
                                to_string(cert.verdict) + '\n';
                rows[k] = std::move(r);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(hw, trials));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    io.csv << "trial,seed,amplitude,phi_max,xi,c_phi,Phi,lhs_max,bound_min,margin,verdict\n";
    for (const auto& r : rows) {
        io.csv << r;
    }
    const auto count = [&](Verdict v) { return std::count(verdicts.begin(), verdicts.end(), v); };
    const auto n_pass = count(Verdict::pass);
    const auto n_fail = count(Verdict::fail);
    const auto n_na = count(Verdict::inapplicable);
    io.summary << "stability " << p.name << ": " << n_pass << " pass, " << n_fail << " fail, " << n_na
               << " inapplicable (Phi=" << format_number(sd.Phi()) << ")\n";
    if (n_na > 0) {
        return exit_inapplicable;
    }
    return n_fail > 0 ? exit_certificate_fail : exit_ok;
}

/// Executes one configured command. CSV goes to cfg.output_path, or to
/// `out` when no path is configured.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               bool verbose = false) {
    try {
        const auto issues = cfg.issues();
        if (!issues.empty()) {
            for (const auto& m : issues) {
                err << "error: " << m << '\n';
            }
            return exit_invalid;
        }
        std::ostringstream csv;
        Streams io{csv, cfg.output_path.empty() ? err : out, err, verbose};
        int code = exit_ok;
        if (cfg.command == "catalog-list") {
            code = cmd_catalog_list(cfg, io);
        } else {
            const auto p = build_problem(cfg);
            if (cfg.command == "solve") {
                code = cmd_solve(cfg, p, io);
            } else if (cfg.command == "convergence") {
                code = cmd_convergence(cfg, p, io);
            } else {
                parse_perturb_mode(cfg.perturb_mode);
                code = cmd_stability(cfg, p, io);
            }
        }
        if (cfg.output_path.empty()) {
            out << csv.str();
        } else {
            std::ofstream file(cfg.output_path, std::ios::binary);
            file << csv.str();
            file.close();
            if (!file) {
                err << "error: cannot write '" << cfg.output_path << "'\n";
                return exit_io;
            }
        }
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const SolverDivergence& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    } catch (const EvaluationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
}

} // namespace hilfer::cli
