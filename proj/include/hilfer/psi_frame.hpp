#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hilfer/error.hpp"

namespace hilfer {

/// Increasing reparametrization psi of the time axis, with psi' and psi^{-1}.
///
/// The built-in catalog carries exact derivatives and inverses. A custom psi
/// without an inverse falls back to bisection (absolute tolerance 1e-12).
class PsiFunction {
public:
    using Map = std::function<double(double)>;

    PsiFunction(std::string name, Map eval, Map deriv, std::optional<Map> inverse = std::nullopt)
        : name_(std::move(name)), eval_(std::move(eval)), deriv_(std::move(deriv)),
          inverse_(std::move(inverse)) {}

    static PsiFunction identity() {
        return {"identity", [](double t) { return t; }, [](double) { return 1.0; },
                [](double u) { return u; }};
    }

    /// t -> t^p, p > 0.
    static PsiFunction power(double p) {
        if (!(p > 0.0)) {
            throw DomainError("PsiFunction::power: exponent must be positive");
        }
        return {"power:" + format_exponent(p), [p](double t) { return std::pow(t, p); },
                [p](double t) { return p * std::pow(t, p - 1.0); },
                [p](double u) { return std::pow(u, 1.0 / p); }};
    }

    /// t -> e^t - 1.
    static PsiFunction expm1() {
        return {"expm1", [](double t) { return std::expm1(t); }, [](double t) { return std::exp(t); },
                [](double u) { return std::log1p(u); }};
    }

    /// t -> ln(1 + t).
    static PsiFunction log1p() {
        return {"log1p", [](double t) { return std::log1p(t); },
                [](double t) { return 1.0 / (1.0 + t); }, [](double u) { return std::expm1(u); }};
    }

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] double operator()(double t) const { return eval_(t); }
    [[nodiscard]] double eval(double t) const { return eval_(t); }
    [[nodiscard]] double deriv(double t) const { return deriv_(t); }
    [[nodiscard]] bool has_inverse() const { return inverse_.has_value(); }

    [[nodiscard]] double inverse(double u) const {
        if (inverse_) {
            return (*inverse_)(u);
        }
        return bisect_inverse(u);
    }

    /// Samples [0, T] and reports whether psi is strictly increasing with
    /// positive derivative on (0, T] and a consistent inverse.
    [[nodiscard]] std::vector<std::string> check_on(double T, int samples = 100) const {
        std::vector<std::string> issues;
        double prev = eval(0.0);
        for (int k = 1; k <= samples; ++k) {
            const double t = T * k / samples;
            const double v = eval(t);
            if (!std::isfinite(v) || !(v > prev)) {
                issues.push_back("psi is not strictly increasing near t=" + std::to_string(t));
                break;
            }
            if (!(deriv(t) > 0.0) || !std::isfinite(deriv(t))) {
                issues.push_back("psi' is not positive near t=" + std::to_string(t));
                break;
            }
            if (std::fabs(inverse(v) - t) > 1e-10 * std::max(1.0, std::fabs(t))) {
                issues.push_back("psi inverse inconsistent near t=" + std::to_string(t));
                break;
            }
            prev = v;
        }
        return issues;
    }

private:
    static std::string format_exponent(double p) {
        std::string s = std::to_string(p);
        while (!s.empty() && s.back() == '0') {
            s.pop_back();
        }
        if (!s.empty() && s.back() == '.') {
            s.pop_back();
        }
        return s;
    }

    [[nodiscard]] double bisect_inverse(double u) const {
        double lo = 0.0;
        double hi = 1.0;
        while (eval(hi) < u) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e12) {
                throw DomainError("PsiFunction::inverse: value outside the range of psi");
            }
        }
        if (eval(lo) > u) {
            throw DomainError("PsiFunction::inverse: value below psi(0)");
        }
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (eval(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    std::string name_;
    Map eval_;
    Map deriv_;
    std::optional<Map> inverse_;
};

/// Fractional orders of the problem. gamma_w() is always derived, never stored.
struct Orders {
    double alpha = 0.5;
    double beta = 0.0;
    double delta = 1.0;

    [[nodiscard]] double gamma_w() const { return alpha + beta * (1.0 - alpha); }

    [[nodiscard]] std::vector<std::string> issues() const {
        std::vector<std::string> out;
        if (!(alpha > 0.0 && alpha <= 1.0)) {
            out.emplace_back("alpha must lie in (0, 1]");
        }
        if (!(beta >= 0.0 && beta <= 1.0)) {
            out.emplace_back("beta must lie in [0, 1]");
        }
        if (!(delta > 0.0 && delta <= 1.0)) {
            out.emplace_back("delta must lie in (0, 1]");
        }
        return out;
    }
};

/// Nodes on [a, b] uniform in u = psi(t). `u` holds psi(nodes).
struct SubGrid {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> t;
    std::vector<double> u;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    /// Spacing in u.
    [[nodiscard]] double step() const { return (u.back() - u.front()) / static_cast<double>(u.size() - 1); }
};

inline SubGrid make_subgrid(const PsiFunction& psi, double a, double b, std::size_t n) {
    if (n < 2) {
        throw ShapeError("make_subgrid: need at least two nodes");
    }
    if (!(b > a)) {
        throw DomainError("make_subgrid: empty interval");
    }
    SubGrid g;
    g.a = a;
    g.b = b;
    g.t.resize(n);
    g.u.resize(n);
    const double ua = psi(a);
    const double ub = psi(b);
    const double h = (ub - ua) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        g.u[j] = ua + h * static_cast<double>(j);
    }
    g.u.back() = ub;
    g.t.front() = a;
    g.t.back() = b;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        g.t[j] = psi.inverse(g.u[j]);
    }
    return g;
}

/// psi'(s) (psi(t) - psi(s))^(alpha-1), the kernel with t the outer time and
/// s the integration variable.
inline double kernel(const PsiFunction& psi, double alpha, double t, double s) {
    if (!(s < t)) {
        throw DomainError("kernel: requires s < t");
    }
    const double ds = psi.deriv(s);
    if (ds == 0.0) {
        return 0.0;
    }
    return ds * std::pow(psi(t) - psi(s), alpha - 1.0);
}

/// (psi(t) - psi(0))^(1-gamma); limit value at t = 0.
inline double psi_weight(const PsiFunction& psi, const Orders& orders, double t) {
    const double e = 1.0 - orders.gamma_w();
    if (e == 0.0) {
        return 1.0;
    }
    const double d = psi(t) - psi(0.0);
    return d <= 0.0 ? 0.0 : std::pow(d, e);
}

inline double delta_norm(double x, double delta) {
    return std::pow(std::fabs(x), delta);
}

enum class BranchKind { integral, impulse };

inline const char* to_string(BranchKind k) {
    return k == BranchKind::integral ? "integral" : "impulse";
}

/// One piece of a piecewise solution: [0, t_1], (t_i, s_i] or (s_i, t_{i+1}].
///
/// `impulse` is 0 for the first integral branch and i for both the window
/// (t_i, s_i] and the integral branch that follows it. The left node of a
/// left-open branch holds the right limit there. `weighted` is
/// (psi(t)-psi(0))^(1-gamma) x(t) with its limit value at t = 0, so a
/// singular raw value at the origin never has to be multiplied out.
struct Branch {
    BranchKind kind = BranchKind::integral;
    std::size_t impulse = 0;
    SubGrid grid;
    std::vector<double> x;
    std::vector<double> weighted;
};

struct GridSolution {
    std::vector<Branch> branches;

    [[nodiscard]] std::size_t node_count() const {
        std::size_t n = 0;
        for (const auto& b : branches) {
            n += b.x.size();
        }
        return n;
    }

    [[nodiscard]] bool same_layout(const GridSolution& other) const {
        if (branches.size() != other.branches.size()) {
            return false;
        }
        for (std::size_t i = 0; i < branches.size(); ++i) {
            const auto& l = branches[i];
            const auto& r = other.branches[i];
            if (l.kind != r.kind || l.impulse != r.impulse || l.grid.t != r.grid.t ||
                l.x.size() != r.x.size()) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

// Nodes of J' = (0, T]: the origin is excluded when the weight vanishes there.
inline bool skip_origin(const Branch& b, std::size_t j, double gamma_w) {
    return j == 0 && b.grid.a == 0.0 && gamma_w < 1.0;
}

} // namespace detail

/// C_{1-gamma;psi} delta-norm of nodal values on one grid.
inline double weighted_sup_norm(const SubGrid& grid, std::span<const double> x, const PsiFunction& psi,
                                const Orders& orders) {
    if (x.empty() || x.size() != grid.size()) {
        throw ShapeError("weighted_sup_norm: values do not match grid");
    }
    const double psi0 = psi(0.0);
    const double e = 1.0 - orders.gamma_w();
    double best = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j == 0 && grid.a == 0.0 && e > 0.0) {
            continue;
        }
        const double w = e == 0.0 ? 1.0 : std::pow(grid.u[j] - psi0, e);
        best = std::max(best, w * delta_norm(x[j], orders.delta));
    }
    return best;
}

/// PC_{1-gamma;psi} delta-norm: max over branches of the per-branch sup.
inline double weighted_sup_norm(const GridSolution& sol, const PsiFunction& psi, const Orders& orders) {
    if (sol.branches.empty()) {
        throw ShapeError("weighted_sup_norm: empty solution");
    }
    double best = 0.0;
    for (const auto& b : sol.branches) {
        best = std::max(best, weighted_sup_norm(b.grid, b.x, psi, orders));
    }
    return best;
}

/// PC weighted delta-norm of a - b, skipping the origin when gamma < 1.
inline double weighted_sup_distance(const GridSolution& a, const GridSolution& b, const PsiFunction& psi,
                                    const Orders& orders) {
    if (!a.same_layout(b)) {
        throw ShapeError("weighted_sup_distance: layouts differ");
    }
    const double psi0 = psi(0.0);
    const double g = orders.gamma_w();
    const double e = 1.0 - g;
    double best = 0.0;
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        const auto& ba = a.branches[i];
        const auto& bb = b.branches[i];
        for (std::size_t j = 0; j < ba.x.size(); ++j) {
            if (detail::skip_origin(ba, j, g)) {
                continue;
            }
            const double w = e == 0.0 ? 1.0 : std::pow(ba.grid.u[j] - psi0, e);
            const double d = delta_norm(ba.x[j] - bb.x[j], orders.delta);
            best = std::max(best, std::isnan(d) ? std::numeric_limits<double>::infinity() : w * d);
        }
    }
    return best;
}

} // namespace hilfer
