// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "hilfer/cli.hpp"
#include "hilfer/hilfer.hpp"
#include "oracles.hpp"

using namespace hilfer;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= time_limit_s;
    const bool ok = out.ok && in_time;
    if (!ok) {
        ++failures;
    }
    std::printf("[%s] %2d %-34s %s (%.2fs of %.0fs)%s\n", ok ? "PASS" : "FAIL", id, title, out.detail.c_str(), dt,
                time_limit_s, in_time ? "" : " too slow");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::vector<double> values_on(const SubGrid& g, const std::function<double(double)>& F) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        v[j] = F(g.u[j]);
    }
    return v;
}

// --------------------------------------------------------------------------

Outcome special_functions() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0.05, 20.0);
    std::uniform_real_distribution<double> unit(0.01, 0.99);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double x = pos(rng);
        worst = std::max(worst, std::fabs(hilfer::gamma(x + 1.0) / (x * hilfer::gamma(x)) - 1.0));
        const double y = unit(rng);
        const double refl = hilfer::gamma(y) * hilfer::gamma(1.0 - y) * std::sin(std::numbers::pi * y) / std::numbers::pi;
        worst = std::max(worst, std::fabs(refl - 1.0));
    }
    double ml_exp = 0.0;
    for (int k = 0; k <= 600; ++k) {
        const double z = -3.0 + 6.0 * k / 600.0;
        ml_exp = std::max(ml_exp, std::fabs(mittag_leffler({1.0, 1.0}, z) - std::exp(z)));
    }
    double ml_zero = 0.0;
    for (double a : {0.1, 0.5, 0.9, 1.0, 2.5}) {
        for (double b : {0.3, 1.0, 1.7, 4.0}) {
            ml_zero = std::max(ml_zero, std::fabs(mittag_leffler({a, b}, 0.0) * hilfer::gamma(b) - 1.0));
        }
    }
    const bool ok = worst <= 1e-10 && ml_exp <= 1e-10 && ml_zero <= 1e-12;
    return {ok, fmt("gamma id %.1e, ", worst) + fmt("E11-exp %.1e, E(0)G(b)-1 %.1e", ml_exp, ml_zero)};
}

Outcome power_law() {
    // Relative error = sup-norm error over the grid / sup-norm of the exact power law.
    double worst = 0.0;
    std::string worst_case;
    int over = 0;
    int cases = 0;
    const std::vector<PsiFunction> psis = {PsiFunction::identity(), PsiFunction::power(2.0), PsiFunction::expm1()};
    for (const auto& psi : psis) {
        const auto grid = make_subgrid(psi, 0.0, 1.0, 2048);
        const double u0 = grid.u.front();
        for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
            for (double eta : {1.0, 1.5, 2.0}) {
                const auto F = values_on(grid, [&](double u) { return std::pow(u - u0, eta - 1.0); });
                const auto I = frac_integral(psi, alpha, grid, F);
                const double c = std::tgamma(eta) / std::tgamma(eta + alpha);
                double err = 0.0;
                double size = 0.0;
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const double exact = c * std::pow(grid.u[j] - u0, eta + alpha - 1.0);
                    err = std::max(err, std::fabs(I[j] - exact));
                    size = std::max(size, std::fabs(exact));
                }
                ++cases;
                over += err / size > 1e-4;
                if (err / size > worst) {
                    worst = err / size;
                    worst_case = psi.name() + fmt(" alpha=%g eta=%g", alpha, eta);
                }
            }
        }
    }
    return {over == 0, fmt("max relative error %.2e (limit 1e-4) at ", worst) + worst_case + ", " +
                           std::to_string(over) + "/" + std::to_string(cases) + " cases over"};
}

Outcome quadrature_order() {
    // Integrands smooth in u; reference by Richardson extrapolation of the two finest grids.
    struct Case {
        PsiFunction psi;
        double alpha;
        std::function<double(double)> F;
    };
    const std::vector<Case> cases = {
        {PsiFunction::identity(), 0.5, [](double u) { return std::cos(u); }},
        {PsiFunction::identity(), 0.3, [](double u) { return std::exp(u); }},
        {PsiFunction::expm1(), 0.75, [](double u) { return std::cos(2.0 * u) + u * u; }},
        {PsiFunction::power(2.0), 0.9, [](double u) { return 1.0 / (1.0 + u); }},
    };
    double worst_order = 1e9;
    for (const auto& c : cases) {
        const auto solve = [&](std::size_t cells) {
            const auto g = make_subgrid(c.psi, 0.0, 1.0, cells + 1);
            return frac_integral(c.psi, c.alpha, g, values_on(g, c.F));
        };
        const auto fine = solve(8192);
        const auto finer = solve(16384);
        auto reference = [&](std::size_t cells, std::size_t j) {
            const std::size_t a = j * (8192 / cells);
            return (4.0 * finer[2 * a] - fine[a]) / 3.0;
        };
        std::vector<double> errs;
        for (std::size_t cells : {64, 128, 256, 512}) {
            const auto I = solve(cells);
            double e = 0.0;
            for (std::size_t j = 0; j <= cells; ++j) {
                e = std::max(e, std::fabs(I[j] - reference(cells, j)));
            }
            errs.push_back(e);
        }
        for (std::size_t k = 1; k < errs.size(); ++k) {
            worst_order = std::min(worst_order, std::log2(errs[k - 1] / errs[k]));
        }
    }
    return {worst_order >= 1.9, fmt("min observed order %.3f over 64->512 (limit 1.9)", worst_order)};
}

Outcome annihilation() {
    double worst_ratio = 0.0;
    double worst_sup = 0.0;
    for (const auto& psi : {PsiFunction::identity(), PsiFunction::expm1()}) {
        for (auto [a, b] : {std::pair{0.5, 0.0}, {0.5, 0.5}, {0.5, 1.0}, {0.8, 0.3}}) {
            const Orders o{a, b, 1.0};
            const double g = o.gamma_w();
            const auto grid = make_subgrid(psi, 0.0, 1.0, 513);
            const double u0 = grid.u.front();
            std::vector<double> x(grid.size());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                x[j] = g < 1.0 && j == 0 ? std::numeric_limits<double>::infinity()
                                         : std::pow(grid.u[j] - u0, g - 1.0);
            }
            const auto d = hilfer_derivative(psi, o, grid, x);
            double sup = 0.0;
            for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
                sup = std::max(sup, std::fabs(d[j]));
            }
            const double limit = 5.0 * std::pow(grid.step(), 0.9);
            worst_ratio = std::max(worst_ratio, sup / limit);
            worst_sup = std::max(worst_sup, sup);
        }
    }
    return {worst_ratio <= 1.0, fmt("max interior sup %.2e, worst sup/(5 h^0.9) = %.3f", worst_sup, worst_ratio)};
}

Outcome solver_oracles() {
    const std::size_t n = 2048;
    const auto lr = catalog("linear_relaxation", n);
    const auto x = picard_solve(lr, {n, 1e-12, 500}).solution;
    double err_ml = 0.0;
    for (const auto& b : x.branches) {
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            const double t = b.grid.t[j];
            if (t >= 0.05) {
                err_ml = std::max(err_ml, std::fabs(b.x[j] - oracle::ml_half_negative(std::sqrt(t))));
            }
        }
    }
    const auto cf = catalog("constant_forcing", n);
    const auto y = picard_solve(cf, {n, 1e-12, 500}).solution;
    double err_cf = 0.0;
    for (const auto& b : y.branches) {
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            const double t = b.grid.t[j];
            err_cf = std::max(err_cf, std::fabs(b.x[j] - std::sqrt(t) / std::tgamma(1.5)));
        }
    }
    return {err_ml <= 2e-3 && err_cf <= 1e-8,
            fmt("relaxation sup err %.2e (2e-3), ", err_ml) + fmt("constant forcing %.2e (1e-8)", err_cf)};
}

Outcome reduction() {
    // The expm1 scenario against the same problem written in s = e^t - 1 with psi = identity,
    // solved on a grid twice as fine and compared at the shared nodes.
    const auto p = catalog("two_impulse_psi_exp", 1025);
    ImpulsiveProblem q;
    q.orders = p.orders;
    q.psi = PsiFunction::identity();
    q.x0 = p.x0;
    q.partition.T = std::expm1(p.partition.T);
    for (double t : p.partition.t_points) {
        q.partition.t_points.push_back(std::expm1(t));
    }
    for (double s : p.partition.s_points) {
        q.partition.s_points.push_back(std::expm1(s));
    }
    q.f = [f = p.f](double s, double v) { return f(std::log1p(s), v); };
    for (const auto& g : p.g) {
        q.g.push_back([g](double s, double v) { return g(std::log1p(s), v); });
    }
    const auto xp = picard_solve(p, {1025, 1e-12, 500}).solution;
    const auto xq = picard_solve(q, {2049, 1e-12, 500}).solution;
    if (xp.branches.size() != xq.branches.size()) {
        return {false, "layouts differ"};
    }
    double err = 0.0;
    for (std::size_t bi = 0; bi < xp.branches.size(); ++bi) {
        const auto& a = xp.branches[bi];
        const auto& b = xq.branches[bi];
        for (std::size_t j = 0; j < a.x.size(); ++j) {
            if (std::fabs(std::expm1(a.grid.t[j]) - b.grid.t[2 * j]) > 1e-12) {
                return {false, "node mismatch"};
            }
            // Weighted values: the raw solution is singular at the origin.
            err = std::max(err, std::fabs(a.weighted[j] - b.weighted[2 * j]));
        }
    }
    return {err <= 5e-3, fmt("sup weighted mismatch %.2e (limit 5e-3)", err)};
}

GridSolution random_iterate(const OmegaOperator& omega, std::mt19937_64& rng, double scale) {
    auto s = omega.zeros();
    std::uniform_real_distribution<double> amp(-scale, scale);
    std::uniform_real_distribution<double> freq(0.0, 12.0);
    const int style = static_cast<int>(rng() % 3);
    const double a = amp(rng);
    const double b = amp(rng);
    const double w = freq(rng);
    for (auto& br : s.branches) {
        for (std::size_t j = 0; j < br.x.size(); ++j) {
            const double t = br.grid.t[j];
            double v = 0.0;
            if (style == 0) {
                v = amp(rng); // rough nodal noise
            } else if (style == 1) {
                v = a + b * std::sin(w * t);
            } else {
                v = a * std::exp(2.0 * t) + 0.1 * amp(rng);
            }
            br.x[j] = v;
            br.weighted[j] = v;
        }
    }
    return s;
}

Outcome contraction() {
    const std::size_t n = 1024;
    const auto p = catalog("single_impulse", n);
    const auto& sd = *p.lip;
    if (!(sd.Phi() < 1.0)) {
        return {false, fmt("Phi = %.4f is not below 1", sd.Phi())};
    }
    const OmegaOperator omega(p, n);
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto g = random_iterate(omega, rng, 3.0);
        const auto h = random_iterate(omega, rng, 3.0);
        const auto before = generalized_distance(g, h, sd.phi(), sd.xi(), p.orders.delta);
        const auto after = generalized_distance(omega.apply(g), omega.apply(h), sd.phi(), sd.xi(), p.orders.delta);
        worst = std::max(worst, after.d / (sd.Phi() * before.d));
    }
    return {worst <= 1.0 + 1e-6, fmt("Phi %.4f, max d(Og,Oh)/(Phi d(g,h)) = %.4f", sd.Phi(), worst)};
}

Outcome certificate_soundness() {
    const std::size_t n = 1024;
    const PerturbMode modes[] = {PerturbMode::constant, PerturbMode::ramp, PerturbMode::random_smooth};
    int checked = 0;
    int violations = 0;
    int scenarios = 0;
    double worst_ratio = 0.0;
    std::string skipped;
    for (const auto& name : catalog_names()) {
        const auto p = catalog(name, n);
        if (!(p.lip->Phi() < 1.0)) {
            skipped += " " + name;
            continue;
        }
        ++scenarios;
        const SolveOptions opt{n, 1e-12, 500};
        const auto y0 = picard_solve(p, opt).solution;
        for (int k = 0; k < 100; ++k) {
            const double amp = std::pow(10.0, -4.0 + 3.0 * k / 99.0);
            const auto y = perturb(p, y0, {amp, modes[k % 3]}, 1000 + static_cast<std::uint64_t>(k));
            const auto cert = check_certificate(p, y, *p.lip, opt);
            ++checked;
            if (cert.verdict != Verdict::pass) {
                ++violations;
            }
            for (std::size_t i = 0; i < cert.lhs.size(); ++i) {
                if (cert.bound[i] > 0.0) {
                    worst_ratio = std::max(worst_ratio, cert.lhs[i] / cert.bound[i]);
                }
            }
        }
    }
    std::string detail = std::to_string(scenarios) + " scenarios, " + std::to_string(checked) + " trials, " +
                         std::to_string(violations) + " violations" + fmt(", max lhs/bound %.3f", worst_ratio);
    if (!skipped.empty()) {
        detail += "; Phi>=1:" + skipped;
    }
    return {violations == 0 && scenarios > 0, detail};
}

Outcome metric_axioms() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int asym = 0;
    int indiscernible = 0;
    double worst_triangle = 0.0;
    const auto p = catalog("two_impulse_psi_exp", 64);
    const OmegaOperator omega(p, 64);
    for (int k = 0; k < 500; ++k) {
        const double delta = 0.05 + 0.95 * unit(rng);
        const auto& phi = p.lip->phi();
        const double xi = p.lip->xi();
        auto a = random_iterate(omega, rng, 2.0);
        auto b = random_iterate(omega, rng, 2.0);
        auto c = random_iterate(omega, rng, 2.0);
        if (k % 10 == 0) {
            b = a; // exercise identity of indiscernibles on equal grids
        }
        const double ab = generalized_distance(a, b, phi, xi, delta).d;
        const double ba = generalized_distance(b, a, phi, xi, delta).d;
        const double bc = generalized_distance(b, c, phi, xi, delta).d;
        const double ac = generalized_distance(a, c, phi, xi, delta).d;
        asym += ab != ba;
        const bool equal = [&] {
            for (std::size_t i = 0; i < a.branches.size(); ++i) {
                if (a.branches[i].x != b.branches[i].x) {
                    return false;
                }
            }
            return true;
        }();
        indiscernible += equal != (ab == 0.0);
        indiscernible += generalized_distance(a, a, phi, xi, delta).d != 0.0;
        worst_triangle = std::max(worst_triangle, ac - (ab + bc));
    }
    return {asym == 0 && indiscernible == 0 && worst_triangle <= 1e-12,
            std::to_string(asym) + " asymmetric, " + std::to_string(indiscernible) + " indiscernibility errors" +
                fmt(", max triangle excess %.1e", worst_triangle)};
}

int run_cli(const std::string& fixture, const std::string& out) {
    const std::string cmd = std::string(HILFER_CLI_PATH) + " --config " + HILFER_FIXTURE_DIR + "/" + fixture +
                            " --output " + out + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_contract() {
    const auto dir = std::filesystem::temp_directory_path() / ("hilfer_accept_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const auto path = [&](const char* n) { return (dir / n).string(); };
    std::string detail;
    bool ok = true;
    auto expect = [&](const char* fixture, const char* out, int code) {
        const int got = run_cli(fixture, path(out));
        if (got != code) {
            ok = false;
            detail += std::string(fixture) + " exit " + std::to_string(got) + " != " + std::to_string(code) + "; ";
        }
    };
    expect("stability_linear_relaxation.ini", "stab1.csv", 0);
    expect("stability_linear_relaxation.ini", "stab2.csv", 0);
    const auto s1 = slurp(path("stab1.csv"));
    const bool identical = !s1.empty() && s1 == slurp(path("stab2.csv"));
    ok = ok && identical;
    int rows = 0;
    int passes = 0;
    {
        std::istringstream in(s1);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            ++rows;
            passes += line.size() >= 5 && line.compare(line.size() - 5, 5, ",pass") == 0;
        }
    }
    ok = ok && rows == 100 && passes == 100;

    expect("solve_constant_forcing.ini", "solve.csv", 0);
    double err = 0.0;
    int solve_rows = 0;
    {
        std::istringstream in(slurp(path("solve.csv")));
        std::string line;
        std::getline(in, line);
        ok = ok && line == "branch_index,kind,t,x,weighted_x";
        while (std::getline(in, line)) {
            ++solve_rows;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            std::string bi;
            std::string kind;
            double t = 0.0;
            double x = 0.0;
            row >> bi >> kind >> t >> x;
            err = std::max(err, std::fabs(x - std::sqrt(t) / std::tgamma(1.5)));
        }
    }
    ok = ok && solve_rows == 1024 && err <= 1e-8;

    expect("inline_bad_order.ini", "bad.csv", 2);
    expect("inline_no_convergence.ini", "nc.csv", 3);
    expect("inline_certificate_fail.ini", "fail.csv", 4);
    expect("inline_inapplicable.ini", "na.csv", 5);
    std::filesystem::remove_all(dir);
    detail += std::string(identical ? "byte-identical reruns" : "reruns differ") + ", " + std::to_string(passes) +
              "/100 pass" + fmt(", solve err %.1e, exit codes 0/2/3/4/5 ", err) + (ok ? "ok" : "mismatch");
    return {ok, detail};
}

} // namespace

int main() {
    criterion(1, "special-function identities", 1, special_functions);
    criterion(2, "power-law fractional integrals", 10, power_law);
    criterion(3, "quadrature convergence order", 10, quadrature_order);
    criterion(4, "homogeneous annihilation", 5, annihilation);
    criterion(5, "solver vs closed forms", 30, solver_oracles);
    criterion(6, "reduction consistency", 30, reduction);
    criterion(7, "contraction realization", 20, contraction);
    criterion(8, "certificate soundness", 120, certificate_soundness);
    criterion(9, "generalized-metric axioms", 5, metric_axioms);
    criterion(10, "CLI determinism and exit codes", 10, cli_contract);
    std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
