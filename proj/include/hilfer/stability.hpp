#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hilfer/error.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/problem.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/special_fn.hpp"

namespace hilfer {

inline constexpr double inf_v = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Generalized metric

struct Distance {
    double d = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

namespace detail {

// |g-h|^delta / scale^delta with the extended-value conventions 0/0 = 0 and a/0 = inf.
inline double scaled_gap(double g, double h, double scale, double delta) {
    if (g == h) {
        return 0.0;
    }
    const double gap = delta_norm(g - h, delta);
    if (std::isnan(gap)) {
        return inf_v;
    }
    if (gap == 0.0) {
        return 0.0;
    }
    const double den = delta_norm(scale, delta);
    return den > 0.0 ? gap / den : inf_v;
}

} // namespace detail

/// The generalized metric of the stability analysis, realized constructively:
/// C1 = sup over integral-branch nodes of |g-h|^delta / phi^delta,
/// C2 = sup over impulse-window nodes of |g-h|^delta / xi^delta, d = C1 + C2.
inline Distance generalized_distance(const GridSolution& g, const GridSolution& h, const TimeMap& phi, double xi,
                                     double delta) {
    if (!g.same_layout(h)) {
        throw ShapeError("generalized_distance: grids differ");
    }
    Distance out;
    for (std::size_t bi = 0; bi < g.branches.size(); ++bi) {
        const auto& bg = g.branches[bi];
        const auto& bh = h.branches[bi];
        const bool integral = bg.kind == BranchKind::integral;
        for (std::size_t j = 0; j < bg.x.size(); ++j) {
            const double a = bg.x[j];
            const double b = bh.x[j];
            // The origin is outside J' when the raw values are singular there.
            if (j == 0 && bi == 0 && !std::isfinite(a) && !std::isfinite(b)) {
                continue;
            }
            const double scale = integral ? phi(bg.grid.t[j]) : xi;
            const double r = detail::scaled_gap(a, b, scale, delta);
            (integral ? out.C1 : out.C2) = std::max(integral ? out.C1 : out.C2, r);
        }
    }
    out.d = out.C1 + out.C2;
    return out;
}

// ---------------------------------------------------------------------------
// Defects

struct DefectProfile {
    /// Integral-form residual |y - Omega y| per branch (zero on impulse windows).
    std::vector<std::vector<double>> G;
    /// sup over each window (t_i, s_i] of |y - g_i(t, y(t_i^+))|, indexed by impulse - 1.
    std::vector<double> g_imp;
    /// Nondecreasing comparison function per branch node: scale * shape.
    std::vector<std::vector<double>> phi_fit;
    double xi_fit = 0.0;
    double scale = 0.0;
    /// Weighted initial datum of y, Gamma(gamma) lim (psi(t)-psi(0))^(1-gamma) y(t).
    double datum = 0.0;

    [[nodiscard]] double phi_max() const {
        double m = 0.0;
        for (const auto& b : phi_fit) {
            for (double v : b) {
                m = std::max(m, v);
            }
        }
        return m;
    }
};

inline double weighted_datum(const GridSolution& y, const Orders& orders) {
    return gamma(orders.gamma_w()) * y.branches.front().weighted.front();
}

/// Measures how far y is from solving the problem in integral form.
///
/// The first branch is compared with Psi^lambda(t,0) times y's own weighted
/// datum; later branches restart from g_i(s_i, y(t_i^+)). The restart residual
/// and window residuals go into xi_fit. phi_fit = c* shape, with shape the
/// problem's comparison function when it carries StabilityData and the
/// running max of the residual otherwise, and c* the least scale with
/// D <= I[phi_fit] on the first branch and D <= xi_fit + I_{s_i}[phi_fit] later.
inline DefectProfile measure_defect(const ImpulsiveProblem& p, const GridSolution& y,
                                    const std::optional<TimeMap>& shape_override = std::nullopt) {
    if (y.branches.empty()) {
        throw ShapeError("measure_defect: empty solution");
    }
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        for (std::size_t j = 0; j < y.branches[bi].x.size(); ++j) {
            if (!(bi == 0 && j == 0) && !std::isfinite(y.branches[bi].x[j])) {
                throw EvaluationError("measure_defect: non-finite candidate value");
            }
        }
    }
    DefectProfile out;
    out.datum = weighted_datum(y, p.orders);
    ImpulsiveProblem own = p;
    own.x0 = out.datum;
    const OmegaOperator omega(own, y.branches.front().x.size());
    const GridSolution oy = omega.apply(y);
    if (!oy.same_layout(y)) {
        throw ShapeError("measure_defect: candidate is not on the problem layout");
    }

    out.G.resize(y.branches.size());
    out.g_imp.assign(p.partition.impulses(), 0.0);
    const double g = p.orders.gamma_w();
    const double psi0 = p.psi(0.0);
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        const auto& by = y.branches[bi];
        const auto& bo = oy.branches[bi];
        auto& D = out.G[bi];
        D.assign(by.x.size(), 0.0);
        for (std::size_t j = 0; j < by.x.size(); ++j) {
            double r = 0.0;
            if (bi == 0 && g < 1.0) {
                // Compare weighted values and unweight: avoids differencing large raw values.
                if (j > 0) {
                    const double w = std::pow(by.grid.u[j] - psi0, 1.0 - g);
                    r = std::fabs(by.weighted[j] - bo.weighted[j]) / w;
                }
            } else {
                r = std::fabs(by.x[j] - bo.x[j]);
            }
            if (by.kind == BranchKind::impulse) {
                out.g_imp[by.impulse - 1] = std::max(out.g_imp[by.impulse - 1], r);
            } else {
                D[j] = r;
            }
        }
    }
    for (double v : out.g_imp) {
        out.xi_fit = std::max(out.xi_fit, v);
    }
    for (std::size_t bi = 1; bi < y.branches.size(); ++bi) {
        if (y.branches[bi].kind == BranchKind::integral) {
            out.xi_fit = std::max(out.xi_fit, out.G[bi].front());
        }
    }

    // Shape values per branch node, nondecreasing in time.
    std::vector<std::vector<double>> shape(y.branches.size());
    const TimeMap* shape_fn = nullptr;
    if (shape_override) {
        shape_fn = &*shape_override;
    } else if (p.lip) {
        shape_fn = &p.lip->phi();
    }
    double running = 0.0;
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        const auto& b = y.branches[bi];
        shape[bi].resize(b.x.size());
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            if (shape_fn) {
                shape[bi][j] = (*shape_fn)(b.grid.t[j]);
            } else {
                if (b.kind == BranchKind::integral) {
                    running = std::max(running, out.G[bi][j]);
                }
                shape[bi][j] = running;
            }
        }
    }

    const QuadPlan plan(y.branches.front().x.size(), p.orders.alpha);
    double scale = 0.0;
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        const auto& b = y.branches[bi];
        if (b.kind != BranchKind::integral) {
            continue;
        }
        const auto I = plan.apply(shape[bi], b.grid.step());
        const double floor = bi == 0 ? 0.0 : out.xi_fit;
        for (std::size_t j = 1; j < b.x.size(); ++j) {
            const double excess = out.G[bi][j] - floor;
            if (excess <= 0.0) {
                continue;
            }
            scale = std::max(scale, I[j] > 0.0 ? excess / I[j] : inf_v);
        }
    }
    out.scale = scale;
    out.phi_fit.resize(y.branches.size());
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        out.phi_fit[bi].resize(shape[bi].size());
        for (std::size_t j = 0; j < shape[bi].size(); ++j) {
            out.phi_fit[bi][j] = scale == 0.0 ? 0.0 : scale * shape[bi][j];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Certificate

/// (1 + C_phi^delta)(phi^delta + xi^delta) / (1 - Phi).
inline double certificate_bound(double c_phi, double Phi, double phi, double xi, double delta) {
    return (1.0 + std::pow(c_phi, delta)) * (std::pow(phi, delta) + std::pow(xi, delta)) / (1.0 - Phi);
}

enum class Verdict { pass, fail, inapplicable };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    default:
        return "inapplicable";
    }
}

struct Certificate {
    bool applicable = false;
    std::vector<double> bound;
    std::vector<double> lhs;
    /// Node times matching bound/lhs.
    std::vector<double> t;
    double margin = inf_v;
    Verdict verdict = Verdict::inapplicable;
    double c_phi = 0.0;
    double Phi = 0.0;
    double phi_max = 0.0;
    double xi = 0.0;
    SolveReport solve;

    [[nodiscard]] double lhs_max() const {
        return lhs.empty() ? 0.0 : *std::max_element(lhs.begin(), lhs.end());
    }
    [[nodiscard]] double bound_min() const {
        return bound.empty() ? inf_v : *std::min_element(bound.begin(), bound.end());
    }
};

/// Checks |y - y_0|^delta <= (1+C_phi^delta)(phi^delta + xi^delta)/(1-Phi) nodewise.
///
/// (phi, xi) come from measure_defect with sd's comparison function as shape;
/// y_0 is the fixed point for y's own weighted datum. C_phi is the larger of
/// sd.c_phi and the tightest constant on y's own integral-branch grids.
inline Certificate check_certificate(const ImpulsiveProblem& p, const GridSolution& y, const StabilityData& sd,
                                     const SolveOptions& opt_in = {}) {
    const double delta = p.orders.delta;
    Certificate cert;
    const auto defect = measure_defect(p, y, sd.phi());
    cert.xi = defect.xi_fit;
    cert.phi_max = defect.phi_max();

    std::vector<BranchSpec> layout;
    for (const auto& b : y.branches) {
        layout.push_back({b.kind, b.impulse, b.grid});
    }
    cert.c_phi = std::max(sd.c_phi(), c_phi_on_branches(layout, p.orders.alpha, sd.phi()).value);
    cert.Phi = contraction_constant(sd.L_f(), sd.L_g(), cert.c_phi, delta);
    cert.applicable = cert.Phi < 1.0;

    ImpulsiveProblem own = p;
    own.x0 = defect.datum;
    auto opt = opt_in;
    opt.grid_n = y.branches.front().x.size();
    const auto solved = picard_solve(own, opt);
    cert.solve = solved.report;
    const auto& y0 = solved.solution;
    if (!y0.same_layout(y)) {
        throw ShapeError("check_certificate: candidate is not on the solver layout");
    }

    const double g = p.orders.gamma_w();
    const double psi0 = p.psi(0.0);
    double bound_max = 0.0;
    for (std::size_t bi = 0; bi < y.branches.size(); ++bi) {
        const auto& by = y.branches[bi];
        const auto& b0 = y0.branches[bi];
        for (std::size_t j = 0; j < by.x.size(); ++j) {
            if (bi == 0 && j == 0 && g < 1.0) {
                continue;
            }
            double diff = 0.0;
            if (bi == 0 && g < 1.0) {
                diff = std::fabs(by.weighted[j] - b0.weighted[j]) / std::pow(by.grid.u[j] - psi0, 1.0 - g);
            } else {
                diff = std::fabs(by.x[j] - b0.x[j]);
            }
            cert.t.push_back(by.grid.t[j]);
            cert.lhs.push_back(std::pow(diff, delta));
            const double bnd = cert.applicable
                                   ? certificate_bound(cert.c_phi, cert.Phi, defect.phi_fit[bi][j], cert.xi, delta)
                                   : inf_v;
            cert.bound.push_back(bnd);
            bound_max = std::max(bound_max, bnd);
        }
    }
    if (!cert.applicable) {
        cert.verdict = Verdict::inapplicable;
        cert.margin = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    for (std::size_t k = 0; k < cert.lhs.size(); ++k) {
        cert.margin = std::min(cert.margin, cert.bound[k] - cert.lhs[k]);
    }
    cert.verdict = cert.margin >= -1e-9 * bound_max ? Verdict::pass : Verdict::fail;
    return cert;
}

// ---------------------------------------------------------------------------
// Perturbations

enum class PerturbMode { constant, ramp, random_smooth };

inline PerturbMode parse_perturb_mode(const std::string& s) {
    if (s == "constant") {
        return PerturbMode::constant;
    }
    if (s == "ramp") {
        return PerturbMode::ramp;
    }
    if (s == "random-smooth") {
        return PerturbMode::random_smooth;
    }
    throw DomainError("unknown perturbation mode '" + s + "'");
}

struct PerturbSpec {
    double amplitude = 0.01;
    PerturbMode mode = PerturbMode::constant;
};

namespace detail {

// Uniform [0,1) from a 64-bit engine, identical on every standard library.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

/// y = y_0 + e with |e| <= amplitude, branch by branch.
///
/// Impulse windows always get a constant offset. random-smooth integral
/// branches get a five-mode Fourier sum in the normalized branch coordinate
/// u, rescaled so its nodal sup equals amplitude times a random factor in (0,1].
inline GridSolution perturb(const ImpulsiveProblem& p, const GridSolution& y0, const PerturbSpec& spec,
                            std::uint64_t seed) {
    GridSolution y = y0;
    if (spec.amplitude == 0.0) {
        return y;
    }
    std::mt19937_64 rng(seed);
    const double g = p.orders.gamma_w();
    const double psi0 = p.psi(0.0);
    const double span_u = p.psi(p.partition.T) - psi0;
    const double a = spec.amplitude;
    for (auto& b : y.branches) {
        const std::size_t n = b.x.size();
        std::vector<double> e(n, 0.0);
        switch (spec.mode) {
        case PerturbMode::constant:
            std::fill(e.begin(), e.end(), a);
            break;
        case PerturbMode::ramp:
            for (std::size_t j = 0; j < n; ++j) {
                const double t = b.kind == BranchKind::impulse ? b.grid.u.front() : b.grid.u[j];
                e[j] = a * (t - psi0) / span_u;
            }
            break;
        case PerturbMode::random_smooth:
            if (b.kind == BranchKind::impulse) {
                std::fill(e.begin(), e.end(), a * (2.0 * detail::unit_uniform(rng) - 1.0));
            } else {
                constexpr int modes = 5;
                double c[modes + 1];
                double ph[modes + 1];
                for (int k = 0; k <= modes; ++k) {
                    c[k] = (2.0 * detail::unit_uniform(rng) - 1.0) / (1.0 + k);
                    ph[k] = 2.0 * std::numbers::pi * detail::unit_uniform(rng);
                }
                const double level = 0.05 + 0.95 * detail::unit_uniform(rng);
                const double u0 = b.grid.u.front();
                const double len = b.grid.u.back() - u0;
                double peak = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double v = (b.grid.u[j] - u0) / len;
                    double s = c[0];
                    for (int k = 1; k <= modes; ++k) {
                        s += c[k] * std::sin(k * std::numbers::pi * v + ph[k]);
                    }
                    e[j] = s;
                    peak = std::max(peak, std::fabs(s));
                }
                const double factor = peak > 0.0 ? a * level / peak : 0.0;
                for (double& v : e) {
                    v *= factor;
                }
            }
            break;
        }
        for (std::size_t j = 0; j < n; ++j) {
            b.x[j] += e[j];
            if (g < 1.0 && b.grid.u[j] == psi0) {
                continue; // the weight vanishes: the weighted limit is unchanged
            }
            b.weighted[j] += (g < 1.0 ? std::pow(b.grid.u[j] - psi0, 1.0 - g) : 1.0) * e[j];
        }
    }
    return y;
}

} // namespace hilfer
