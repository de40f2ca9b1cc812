#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hilfer/error.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/special_fn.hpp"

namespace hilfer {

namespace detail {

// sum_i c_i r^i / denom(i) with c_i the coefficients of (1 - r)^p, i.e.
// binom(p, i)(-1)^i. Used for head/diagonal panel moments, r <= 1/2.
template <class Denominator>
double binomial_moment_series(double p, double r, Denominator denom) {
    double coef = 1.0;
    double rpow = 1.0;
    double sum = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double term = coef * rpow / denom(i);
        sum += term;
        if (i > 2 && std::fabs(term) < 1e-18 * std::fabs(sum)) {
            break;
        }
        coef *= (static_cast<double>(i) - p) / static_cast<double>(i + 1);
        rpow *= r;
    }
    return sum;
}

// k^p - (k-1)^p for k >= 1 without cancellation.
inline double power_difference(double k, double p) {
    if (k == 1.0) {
        return 1.0;
    }
    return -std::pow(k, p) * std::expm1(p * std::log1p(-1.0 / k));
}

} // namespace detail

/// Product-integration weights for (1/Gamma(nu)) int_a^U (U-u)^(nu-1) F(u) du
/// on n nodes uniform in u, F piecewise linear between nodes.
///
/// Weights are scale free; apply() takes the u-step. With a nonzero
/// origin_exponent mu the plan integrates F(u) = (u-a)^mu G(u) with G
/// piecewise linear, and apply() expects the values of G.
class QuadPlan {
public:
    QuadPlan(std::size_t nodes, double order, double origin_exponent = 0.0)
        : n_(nodes), order_(order), mu_(origin_exponent) {
        if (nodes < 2) {
            throw ShapeError("QuadPlan: need at least two nodes");
        }
        if (!(order > 0.0 && order <= 1.0)) {
            throw DomainError("QuadPlan: order must lie in (0, 1]");
        }
        if (!(origin_exponent > -1.0 && origin_exponent <= 0.0)) {
            throw DomainError("QuadPlan: origin exponent must lie in (-1, 0]");
        }
        if (mu_ == 0.0) {
            build_toeplitz();
        } else {
            build_singular();
        }
    }

    [[nodiscard]] std::size_t nodes() const { return n_; }
    [[nodiscard]] double order() const { return order_; }
    [[nodiscard]] double origin_exponent() const { return mu_; }

    /// Weight of source node j at target node n (before the h-power and 1/Gamma factor).
    [[nodiscard]] double weight(std::size_t n, std::size_t j) const {
        if (j > n || n == 0) {
            return 0.0;
        }
        if (mu_ != 0.0) {
            return tri_[row_start(n) + j];
        }
        if (j == 0) {
            return a_[n];
        }
        if (j == n) {
            return b_[1];
        }
        return a_[n - j] + b_[n - j + 1];
    }

    [[nodiscard]] std::vector<double> apply(std::span<const double> values, double step) const {
        if (values.size() != n_) {
            throw ShapeError("QuadPlan::apply: values do not match plan size");
        }
        const double scale = std::pow(step, order_ + mu_) / gamma(order_);
        std::vector<double> out(n_, 0.0);
        for (std::size_t n = 1; n < n_; ++n) {
            double acc = 0.0;
            if (mu_ != 0.0) {
                const double* w = tri_.data() + row_start(n);
                for (std::size_t j = 0; j <= n; ++j) {
                    acc += w[j] * values[j];
                }
            } else {
                acc = a_[n] * values[0] + b_[1] * values[n];
                for (std::size_t j = 1; j < n; ++j) {
                    acc += (a_[n - j] + b_[n - j + 1]) * values[j];
                }
            }
            out[n] = scale * acc;
        }
        return out;
    }

private:
    // Panel k = n - j spans w = (U-u)/h in [k-1, k].
    //   a_k = int w^(nu-1) (w-k+1) dw   (left node of the panel)
    //   b_k = int w^(nu-1) (k-w) dw     (right node)
    void build_toeplitz() {
        const double nu = order_;
        a_.assign(n_, 0.0);
        b_.assign(n_ + 1, 0.0);
        for (std::size_t ki = 1; ki < n_ + 1; ++ki) {
            const double k = static_cast<double>(ki);
            if (ki == 1) {
                a_[1] = 1.0 / (nu + 1.0);
                b_[1] = 1.0 / (nu * (nu + 1.0));
                continue;
            }
            const double m = k - 1.0;
            if (ki >= 10) {
                // (m+s)^(nu-1) = m^(nu-1) sum binom(nu-1,i) (s/m)^i, s in [0,1]; r = -1/m
                // in the (1-r)^p convention of binomial_moment_series.
                const double lead = std::pow(m, nu - 1.0);
                const double r = -1.0 / m;
                const double left = detail::binomial_moment_series(
                    nu - 1.0, r, [](int i) { return static_cast<double>(i + 2); });
                const double right = detail::binomial_moment_series(
                    nu - 1.0, r, [](int i) { return static_cast<double>(i + 1) * (i + 2); });
                if (ki < n_) {
                    a_[ki] = lead * left;
                }
                b_[ki] = lead * right;
            } else {
                const double dnu1 = detail::power_difference(k, nu + 1.0);
                const double dnu = detail::power_difference(k, nu);
                if (ki < n_) {
                    a_[ki] = dnu1 / (nu + 1.0) - m * dnu / nu;
                }
                b_[ki] = k * dnu / nu - dnu1 / (nu + 1.0);
            }
        }
    }

    // Moments of (n-v)^(nu-1) v^mu against the hat functions of panel [j, j+1].
    struct PanelMoments {
        double left;
        double right;
    };

    [[nodiscard]] PanelMoments panel_moments(std::size_t ni, std::size_t ji) const {
        const double nu = order_;
        const double mu = mu_;
        const double n = static_cast<double>(ni);
        const double j = static_cast<double>(ji);
        if (ni == 1) {
            return {beta_fn(nu + 1.0, mu + 1.0), beta_fn(nu, mu + 2.0)};
        }
        if (ji == 0) {
            // (n-v)^(nu-1) = n^(nu-1) (1 - v/n)^(nu-1)
            const double lead = std::pow(n, nu - 1.0);
            const double r = 1.0 / n;
            const double left = detail::binomial_moment_series(nu - 1.0, r, [mu](int i) {
                return (mu + i + 1.0) * (mu + i + 2.0);
            });
            const double right =
                detail::binomial_moment_series(nu - 1.0, r, [mu](int i) { return mu + i + 2.0; });
            return {lead * left, lead * right};
        }
        if (ji + 1 == ni) {
            // w = n - v in [0, 1]; v^mu = n^mu (1 - w/n)^mu
            const double lead = std::pow(n, mu);
            const double r = 1.0 / n;
            const double left =
                detail::binomial_moment_series(mu, r, [nu](int i) { return nu + i + 1.0; });
            const double right = detail::binomial_moment_series(
                mu, r, [nu](int i) { return (nu + i) * (nu + i + 1.0); });
            return {lead * left, lead * right};
        }
        using GL = boost::math::quadrature::gauss<double, 12>;
        const auto& x = GL::abscissa();
        const auto& w = GL::weights();
        double left = 0.0;
        double right = 0.0;
        auto add = [&](double s, double weight) {
            const double v = j + 0.5 + 0.5 * s;
            const double f = weight * std::pow(n - v, nu - 1.0) * std::pow(v, mu);
            left += f * (j + 1.0 - v);
            right += f * (v - j);
        };
        for (std::size_t q = 0; q < x.size(); ++q) {
            if (x[q] == 0.0) {
                add(0.0, w[q]);
            } else {
                add(x[q], w[q]);
                add(-x[q], w[q]);
            }
        }
        return {0.5 * left, 0.5 * right};
    }

    // Row n of the packed triangle holds n + 1 weights; rows start at n = 1.
    static std::size_t row_start(std::size_t n) { return (n - 1) * (n + 2) / 2; }

    void build_singular() {
        tri_.assign(row_start(n_), 0.0);
        for (std::size_t n = 1; n < n_; ++n) {
            double* row = tri_.data() + row_start(n);
            for (std::size_t j = 0; j < n; ++j) {
                const auto m = panel_moments(n, j);
                row[j] += m.left;
                row[j + 1] += m.right;
            }
        }
    }

    std::size_t n_;
    double order_;
    double mu_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> tri_;
};

/// psi-Riemann-Liouville integral of order alpha from grid.a, at every node.
inline std::vector<double> frac_integral(const QuadPlan& plan, const SubGrid& grid, std::span<const double> F) {
    if (F.size() != grid.size() || plan.nodes() != grid.size()) {
        throw ShapeError("frac_integral: grid, plan and values disagree in length");
    }
    return plan.apply(F, grid.step());
}

inline std::vector<double> frac_integral(const PsiFunction& psi, double alpha, const SubGrid& grid,
                                         std::span<const double> F) {
    (void)psi; // the grid already carries psi(nodes)
    if (F.size() != grid.size()) {
        throw ShapeError("frac_integral: values do not match grid");
    }
    return frac_integral(QuadPlan(grid.size(), alpha), grid, F);
}

/// Integral of F = (psi(s)-psi(a))^mu G(s) given the nodal values of G.
inline std::vector<double> frac_integral_weighted(double alpha, double mu, const SubGrid& grid,
                                                  std::span<const double> G) {
    if (G.size() != grid.size()) {
        throw ShapeError("frac_integral_weighted: values do not match grid");
    }
    return frac_integral(QuadPlan(grid.size(), alpha, mu), grid, G);
}

namespace detail {

inline std::vector<double> u_derivative(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        d[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

} // namespace detail

/// psi-Hilfer derivative I^{beta(1-alpha)} (1/psi' d/dt) I^{(1-beta)(1-alpha)} x, n = 1.
///
/// Diagnostic only: d/dt is a centered difference in u. When x[0] is not
/// finite (gamma < 1, grid anchored at the origin) the inner integral is
/// taken on the weighted values (u-u_0)^(1-gamma) x with exact singular moments.
/// Accuracy degrades to O(step) near t = 0.
inline std::vector<double> hilfer_derivative(const PsiFunction& psi, const Orders& orders, const SubGrid& grid,
                                             std::span<const double> x) {
    (void)psi;
    const std::size_t n = grid.size();
    if (x.size() != n) {
        throw ShapeError("hilfer_derivative: values do not match grid");
    }
    if (n < 5) {
        throw ShapeError("hilfer_derivative: need at least five nodes");
    }
    const double alpha = orders.alpha;
    const double beta = orders.beta;
    const double g = orders.gamma_w();
    const double inner_order = (1.0 - beta) * (1.0 - alpha);
    const double outer_order = beta * (1.0 - alpha);
    const double h = grid.step();

    std::vector<double> inner;
    if (inner_order <= 0.0) {
        inner.assign(x.begin(), x.end());
    } else if (!std::isfinite(x[0]) && g < 1.0) {
        const double e = 1.0 - g;
        std::vector<double> G(n);
        for (std::size_t j = 1; j < n; ++j) {
            G[j] = std::pow(grid.u[j] - grid.u[0], e) * x[j];
        }
        G[0] = G[1];
        inner = QuadPlan(n, inner_order, g - 1.0).apply(G, h);
        // The weighted integral has a finite limit at the origin: extend it.
        inner[0] = 2.0 * inner[1] - inner[2];
    } else {
        inner = QuadPlan(n, inner_order).apply(x, h);
    }
    auto d = detail::u_derivative(inner, h);
    if (outer_order <= 0.0) {
        return d;
    }
    return QuadPlan(n, outer_order).apply(d, h);
}

struct CPhiEstimate {
    double value = 0.0;
    double argmax_t = 0.0;
};

/// Tightest grid constant C with I^alpha[phi](t) <= C phi(t) at the nodes t > a.
inline CPhiEstimate estimate_c_phi(const PsiFunction& psi, double alpha, const SubGrid& grid,
                                   std::span<const double> phi) {
    if (phi.size() != grid.size()) {
        throw ShapeError("estimate_c_phi: values do not match grid");
    }
    for (std::size_t j = 1; j < phi.size(); ++j) {
        if (phi[j] < phi[j - 1]) {
            throw DomainError("estimate_c_phi: phi must be nondecreasing");
        }
        if (!(phi[j] > 0.0)) {
            throw DomainError("estimate_c_phi: phi vanishes at an interior node");
        }
    }
    const auto integral = frac_integral(psi, alpha, grid, phi);
    CPhiEstimate est;
    for (std::size_t j = 1; j < phi.size(); ++j) {
        const double r = integral[j] / phi[j];
        if (r > est.value) {
            est.value = r;
            est.argmax_t = grid.t[j];
        }
    }
    return est;
}

} // namespace hilfer
