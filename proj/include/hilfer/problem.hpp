#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hilfer/error.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/special_fn.hpp"

namespace hilfer {

using ScalarMap = std::function<double(double t, double x)>;
using TimeMap = std::function<double(double t)>;

/// Impulse times 0 = t_0 = s_0 < t_1 <= s_1 <= t_2 < ... < t_m <= s_m < t_{m+1} = T.
struct Partition {
    std::vector<double> t_points;
    std::vector<double> s_points;
    double T = 1.0;

    [[nodiscard]] std::size_t impulses() const { return t_points.size(); }
    /// t_i for i in [0, m+1] with t_0 = 0 and t_{m+1} = T.
    [[nodiscard]] double t(std::size_t i) const {
        return i == 0 ? 0.0 : (i <= t_points.size() ? t_points[i - 1] : T);
    }
    [[nodiscard]] double s(std::size_t i) const { return i == 0 ? 0.0 : s_points[i - 1]; }

    [[nodiscard]] std::vector<std::string> issues() const {
        std::vector<std::string> out;
        if (!(T > 0.0) || !std::isfinite(T)) {
            out.emplace_back("horizon T must be positive");
            return out;
        }
        if (t_points.size() != s_points.size()) {
            out.emplace_back("partition needs as many s_i as t_i");
            return out;
        }
        double prev_s = 0.0;
        for (std::size_t i = 0; i < t_points.size(); ++i) {
            const double ti = t_points[i];
            const double si = s_points[i];
            const auto idx = std::to_string(i + 1);
            if (!(ti > prev_s)) {
                out.push_back("ordering violation: t_" + idx + " must exceed s_" + std::to_string(i));
            }
            if (!(si >= ti)) {
                out.push_back("ordering violation: s_" + idx + " < t_" + idx);
            }
            prev_s = si;
        }
        if (!(T > prev_s)) {
            out.emplace_back("ordering violation: last s_m must be below T");
        }
        return out;
    }
};

/// Per-branch grid specification shared by the solver and the stability code.
struct BranchSpec {
    BranchKind kind;
    std::size_t impulse;
    SubGrid grid;
};

/// [0,t_1], then (t_i,s_i] (skipped when t_i = s_i) and (s_i,t_{i+1}], each on n nodes.
inline std::vector<BranchSpec> branch_layout(const PsiFunction& psi, const Partition& part, std::size_t n) {
    std::vector<BranchSpec> out;
    const std::size_t m = part.impulses();
    out.push_back({BranchKind::integral, 0, make_subgrid(psi, 0.0, part.t(1), n)});
    for (std::size_t i = 1; i <= m; ++i) {
        if (part.s(i) > part.t(i)) {
            out.push_back({BranchKind::impulse, i, make_subgrid(psi, part.t(i), part.s(i), n)});
        }
        out.push_back({BranchKind::integral, i, make_subgrid(psi, part.s(i), part.t(i + 1), n)});
    }
    return out;
}

/// max_i (L_{g_i}^delta + L_f^delta C_phi^delta); L_f^delta C_phi^delta when m = 0.
inline double contraction_constant(double L_f, const std::vector<double>& L_g, double c_phi, double delta) {
    const double base = std::pow(L_f, delta) * std::pow(c_phi, delta);
    if (L_g.empty()) {
        return base;
    }
    double best = 0.0;
    for (double lg : L_g) {
        best = std::max(best, std::pow(lg, delta) + base);
    }
    return best;
}

/// Largest ratio I[phi](t)/phi(t) over the nodes of every integral branch,
/// with each branch integral started at the branch's own left endpoint.
inline CPhiEstimate c_phi_on_branches(const std::vector<BranchSpec>& layout, double alpha, const TimeMap& phi) {
    CPhiEstimate best;
    for (const auto& b : layout) {
        if (b.kind != BranchKind::integral) {
            continue;
        }
        std::vector<double> vals(b.grid.size());
        std::transform(b.grid.t.begin(), b.grid.t.end(), vals.begin(), phi);
        const auto integral = QuadPlan(b.grid.size(), alpha).apply(vals, b.grid.step());
        for (std::size_t j = 1; j < vals.size(); ++j) {
            if (!(vals[j] > 0.0)) {
                throw DomainError("c_phi_on_branches: phi vanishes at an interior node");
            }
            const double r = integral[j] / vals[j];
            if (r > best.value) {
                best = {r, b.grid.t[j]};
            }
        }
    }
    return best;
}

/// Lipschitz constants and comparison data (phi, xi) with the derived constants C_phi and Phi.
///
/// C_phi is the tightest grid constant for phi on [0, T] (and on the
/// branch-local integrals of the default layout); Phi always follows from it.
class StabilityData {
public:
    StabilityData(double L_f, std::vector<double> L_g, TimeMap phi, double xi, const PsiFunction& psi,
                  const Orders& orders, const Partition& part, std::size_t grid_n = 1024)
        : L_f_(L_f), L_g_(std::move(L_g)), phi_(std::move(phi)), xi_(xi) {
        if (!(xi_ >= 0.0)) {
            throw DomainError("StabilityData: xi must be nonnegative");
        }
        const auto grid = make_subgrid(psi, 0.0, part.T, grid_n);
        std::vector<double> vals(grid.size());
        std::transform(grid.t.begin(), grid.t.end(), vals.begin(), phi_);
        auto est = estimate_c_phi(psi, orders.alpha, grid, vals);
        const auto local = c_phi_on_branches(branch_layout(psi, part, grid_n), orders.alpha, phi_);
        if (local.value > est.value) {
            est = local;
        }
        c_phi_ = est.value;
        c_phi_argmax_ = est.argmax_t;
        delta_ = orders.delta;
        Phi_ = contraction_constant(L_f_, L_g_, c_phi_, delta_);
    }

    [[nodiscard]] double L_f() const { return L_f_; }
    [[nodiscard]] const std::vector<double>& L_g() const { return L_g_; }
    [[nodiscard]] const TimeMap& phi() const { return phi_; }
    [[nodiscard]] double xi() const { return xi_; }
    [[nodiscard]] double c_phi() const { return c_phi_; }
    [[nodiscard]] double c_phi_argmax() const { return c_phi_argmax_; }
    [[nodiscard]] double Phi() const { return Phi_; }
    [[nodiscard]] double delta() const { return delta_; }

private:
    double L_f_;
    std::vector<double> L_g_;
    TimeMap phi_;
    double xi_;
    double c_phi_ = 0.0;
    double c_phi_argmax_ = 0.0;
    double delta_ = 1.0;
    double Phi_ = 0.0;
};

struct ImpulsiveProblem {
    std::string name = "inline";
    Orders orders;
    PsiFunction psi = PsiFunction::identity();
    Partition partition;
    ScalarMap f;
    std::vector<ScalarMap> g;
    /// Weighted initial datum: I^{1-gamma;psi} x(0) = x0.
    double x0 = 0.0;
    std::optional<StabilityData> lip;
    /// Closed-form solution when one is known (scenario oracle).
    TimeMap exact;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> messages;

    void fail(std::string msg) {
        ok = false;
        messages.push_back(std::move(msg));
    }
};

namespace detail {

inline double radical_inverse(std::size_t index, std::size_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

} // namespace detail

/// Structural checks; never throws, always reports.
inline ValidationReport validate(const ImpulsiveProblem& p) {
    ValidationReport rep;
    for (auto& msg : p.orders.issues()) {
        rep.fail(std::move(msg));
    }
    const auto part_issues = p.partition.issues();
    for (const auto& msg : part_issues) {
        rep.fail(msg);
    }
    if (!std::isfinite(p.x0)) {
        rep.fail("initial datum x0 must be finite");
    }
    if (p.g.size() != p.partition.impulses()) {
        rep.fail("need one impulse map per impulse time");
    }
    if (!p.f) {
        rep.fail("right-hand side f is missing");
    }
    if (!part_issues.empty()) {
        return rep;
    }
    try {
        for (auto& msg : p.psi.check_on(p.partition.T)) {
            rep.fail(std::move(msg));
        }
    } catch (const std::exception& e) {
        rep.fail(std::string("psi check failed: ") + e.what());
    }
    auto sample_finite = [](const ScalarMap& h, double a, double b) {
        for (std::size_t k = 1; k <= 100; ++k) {
            const double t = a + (b - a) * detail::radical_inverse(k, 2);
            const double x = -10.0 + 20.0 * detail::radical_inverse(k, 3);
            if (!std::isfinite(h(t, x))) {
                return false;
            }
        }
        return std::isfinite(h(a, 0.0)) && std::isfinite(h(b, 0.0));
    };
    if (p.f && !sample_finite(p.f, 0.0, p.partition.T)) {
        rep.fail("f produced a non-finite value on [0,T] x [-10,10]");
    }
    for (std::size_t i = 0; i < p.g.size() && i < p.partition.impulses(); ++i) {
        if (!p.g[i] || !sample_finite(p.g[i], p.partition.t_points[i], p.partition.s_points[i])) {
            rep.fail("g_" + std::to_string(i + 1) + " produced a non-finite value");
        }
    }
    if (p.lip) {
        if (!(p.lip->L_f() > 0.0)) {
            rep.fail("L_f must be positive");
        }
        if (p.lip->L_g().size() != p.partition.impulses()) {
            rep.fail("need one L_g per impulse");
        }
        for (double lg : p.lip->L_g()) {
            if (!(lg >= 0.0)) {
                rep.fail("L_g must be nonnegative");
            }
        }
    }
    return rep;
}

/// Sampled lower estimate of the Lipschitz constant of h in x.
///
/// Triples (t, x1, x2) come from a Halton sequence (bases 2, 3, 5), so a
/// larger sample is always a superset of a smaller one.
inline double estimate_lipschitz(const ScalarMap& h, std::pair<double, double> t_range,
                                 std::pair<double, double> x_range, std::size_t samples) {
    if (samples < 2) {
        throw DomainError("estimate_lipschitz: need at least two samples");
    }
    const auto [t0, t1] = t_range;
    const auto [x0, x1] = x_range;
    if (!(t1 >= t0) || !(x1 > x0)) {
        throw DomainError("estimate_lipschitz: degenerate range");
    }
    const double min_gap = 1e-9 * (x1 - x0);
    double best = 0.0;
    for (std::size_t k = 1; k <= samples; ++k) {
        const double t = t0 + (t1 - t0) * detail::radical_inverse(k, 2);
        const double a = x0 + (x1 - x0) * detail::radical_inverse(k, 3);
        const double b = x0 + (x1 - x0) * detail::radical_inverse(k, 5);
        if (std::fabs(a - b) < min_gap) {
            continue;
        }
        const double ha = h(t, a);
        const double hb = h(t, b);
        if (!std::isfinite(ha) || !std::isfinite(hb)) {
            throw EvaluationError("estimate_lipschitz: non-finite value of h");
        }
        best = std::max(best, std::fabs(ha - hb) / std::fabs(a - b));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Scenario catalog

inline std::vector<std::string> catalog_names() {
    return {"linear_relaxation", "constant_forcing", "single_impulse", "two_impulse_psi_exp",
            "caputo_reduction"};
}

/// phi(t) = exp(kappa (psi(t) - psi(0))), the comparison function used by the catalog.
inline TimeMap exponential_phi(const PsiFunction& psi, double kappa) {
    const double psi0 = psi(0.0);
    return [psi, psi0, kappa](double t) { return std::exp(kappa * (psi(t) - psi0)); };
}

inline ImpulsiveProblem catalog(const std::string& name, std::size_t grid_n = 1024) {
    ImpulsiveProblem p;
    p.name = name;
    if (name == "linear_relaxation") {
        // D^{1/2,1} x = -x, x(0) = 1; x(t) = E_{1/2}(-t^{1/2}).
        p.orders = {0.5, 1.0, 1.0};
        p.partition = {{}, {}, 1.0};
        p.f = [](double, double x) { return -x; };
        p.x0 = 1.0;
        p.exact = [](double t) { return mittag_leffler({0.5, 1.0, 2000, 1e-17}, -std::sqrt(t)); };
        p.lip.emplace(1.0, std::vector<double>{}, exponential_phi(p.psi, 4.0), 0.0, p.psi, p.orders,
                      p.partition, grid_n);
    } else if (name == "constant_forcing") {
        // D^{1/2,0} x = 1 with zero datum; x(t) = t^{1/2} / Gamma(3/2).
        p.orders = {0.5, 0.0, 1.0};
        p.partition = {{}, {}, 1.0};
        p.f = [](double, double) { return 1.0; };
        p.x0 = 0.0;
        p.exact = [](double t) { return std::pow(t, 0.5) / gamma(1.5); };
        // f does not depend on x; 0.1 is a valid (non-tight) positive constant.
        p.lip.emplace(0.1, std::vector<double>{}, exponential_phi(p.psi, 4.0), 0.0, p.psi, p.orders,
                      p.partition, grid_n);
    } else if (name == "single_impulse") {
        p.orders = {0.5, 1.0, 1.0};
        p.partition = {{0.4}, {0.6}, 1.0};
        p.f = [](double, double x) { return -x; };
        p.g = {[](double, double x) { return 0.2 * x; }};
        p.x0 = 1.0;
        // xi = phi(T): the window tolerance sits at the top of phi's range.
        p.lip.emplace(1.0, std::vector<double>{0.2}, exponential_phi(p.psi, 4.0), std::exp(4.0), p.psi,
                      p.orders, p.partition, grid_n);
    } else if (name == "two_impulse_psi_exp") {
        p.orders = {0.6, 0.5, 1.0};
        p.psi = PsiFunction::expm1();
        p.partition = {{0.3, 0.65}, {0.4, 0.75}, 1.0};
        p.f = [](double t, double x) { return -0.8 * x + 0.5 * std::sin(t); };
        p.g = {[](double t, double x) { return 0.3 * x * std::cos(t); },
               [](double t, double x) { return 0.3 * x * std::cos(t) + 0.1; }};
        p.x0 = 1.0;
        const double kappa = 6.0;
        p.lip.emplace(0.8, std::vector<double>{0.3, 0.3}, exponential_phi(p.psi, kappa),
                      std::exp(kappa * std::expm1(1.0)), p.psi, p.orders, p.partition, grid_n);
    } else if (name == "caputo_reduction") {
        // alpha = beta = 1: the classical problem x' = -x/2 + t, x(0) = 1.
        p.orders = {1.0, 1.0, 1.0};
        p.partition = {{}, {}, 1.0};
        p.f = [](double t, double x) { return -0.5 * x + t; };
        p.x0 = 1.0;
        p.exact = [](double t) { return 2.0 * t - 4.0 + 5.0 * std::exp(-0.5 * t); };
        p.lip.emplace(0.5, std::vector<double>{}, exponential_phi(p.psi, 4.0), 0.0, p.psi, p.orders,
                      p.partition, grid_n);
    } else {
        throw DomainError("catalog: unknown scenario '" + name + "'");
    }
    return p;
}

} // namespace hilfer
