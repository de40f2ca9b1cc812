#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hilfer/error.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/problem.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/special_fn.hpp"

namespace hilfer {

struct SolveReport {
    int iterations = 0;
    /// Successive-iterate distance in the PC weighted delta-norm.
    double final_delta = std::numeric_limits<double>::infinity();
    double contraction_ratio_observed = 0.0;
    /// Phi of the problem's StabilityData, NaN when absent.
    double phi_bound = std::numeric_limits<double>::quiet_NaN();
    /// final_delta / (1 - Phi) when Phi < 1, NaN otherwise.
    double apriori_error = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    bool certificate_applicable = false;
};

class SolverDivergence : public ConvergenceError {
public:
    SolverDivergence(const std::string& what, SolveReport report)
        : ConvergenceError(what), report_(report) {}
    [[nodiscard]] const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct SolveResult {
    GridSolution solution;
    SolveReport report;
};

/// The fixed-point map of the integral formulation, discretized on a branch layout.
///
/// Integral branches use product integration started at each branch's own
/// left endpoint. When gamma < 1 and x0 != 0 the first branch carries the
/// singular factor (psi(t)-psi(0))^(gamma-1); its integral is then taken on
/// weighted values with a singular-moment plan.
class OmegaOperator {
public:
    OmegaOperator(const ImpulsiveProblem& p, std::size_t grid_n)
        : problem_(&p), layout_(branch_layout(p.psi, p.partition, grid_n)) {
        const double g = p.orders.gamma_w();
        singular_ = g < 1.0 && p.x0 != 0.0;
        regular_plan_ = std::make_shared<QuadPlan>(grid_n, p.orders.alpha);
        if (singular_) {
            singular_plan_ = std::make_shared<QuadPlan>(grid_n, p.orders.alpha, g - 1.0);
        }
    }

    [[nodiscard]] const ImpulsiveProblem& problem() const { return *problem_; }
    [[nodiscard]] const std::vector<BranchSpec>& layout() const { return layout_; }
    [[nodiscard]] bool singular_origin() const { return singular_; }

    /// Solution skeleton on the layout with all values zero.
    [[nodiscard]] GridSolution zeros() const {
        GridSolution s;
        for (const auto& spec : layout_) {
            Branch b;
            b.kind = spec.kind;
            b.impulse = spec.impulse;
            b.grid = spec.grid;
            b.x.assign(spec.grid.size(), 0.0);
            b.weighted.assign(spec.grid.size(), 0.0);
            s.branches.push_back(std::move(b));
        }
        return s;
    }

    /// Psi^lambda(t,0) x0 on the first branch, zero elsewhere.
    [[nodiscard]] GridSolution initial_iterate() const {
        auto s = zeros();
        auto& b = s.branches.front();
        const std::vector<double> zero(b.x.size(), 0.0);
        fill_first_branch(b, zero);
        return s;
    }

    [[nodiscard]] GridSolution apply(const GridSolution& x) const {
        if (x.branches.size() != layout_.size()) {
            throw ShapeError("apply_omega: solution does not match the problem layout");
        }
        const auto& p = *problem_;
        GridSolution out = zeros();
        double left_limit = 0.0; // x(t_i^+): last node of the integral branch ending at t_i
        for (std::size_t bi = 0; bi < layout_.size(); ++bi) {
            const auto& src = x.branches[bi];
            auto& dst = out.branches[bi];
            if (src.x.size() != dst.x.size()) {
                throw ShapeError("apply_omega: branch size mismatch");
            }
            if (bi == 0) {
                fill_first_branch(dst, rhs_values(src, true));
            } else if (dst.kind == BranchKind::impulse) {
                const auto& gi = p.g.at(dst.impulse - 1);
                for (std::size_t j = 0; j < dst.x.size(); ++j) {
                    dst.x[j] = checked(gi(dst.grid.t[j], left_limit), "g_i");
                }
                refresh_weighted(dst);
            } else {
                const auto& gi = p.g.at(dst.impulse - 1);
                const double restart = checked(gi(dst.grid.a, left_limit), "g_i");
                const auto F = rhs_values(src, false);
                const auto I = regular_plan_->apply(F, dst.grid.step());
                for (std::size_t j = 0; j < dst.x.size(); ++j) {
                    dst.x[j] = restart + I[j];
                }
                refresh_weighted(dst);
            }
            if (src.kind == BranchKind::integral) {
                left_limit = src.x.back();
            }
        }
        return out;
    }

private:
    static double checked(double v, const char* what) {
        if (!std::isfinite(v)) {
            throw EvaluationError(std::string("apply_omega: non-finite value of ") + what);
        }
        return v;
    }

    // f(t, x(t)) on a branch; on a singular first branch, the weighted values
    // (u-u0)^(1-gamma) f with node 0 copied from node 1.
    [[nodiscard]] std::vector<double> rhs_values(const Branch& b, bool first) const {
        const auto& p = *problem_;
        std::vector<double> F(b.x.size());
        if (first && singular_) {
            const double e = 1.0 - p.orders.gamma_w();
            for (std::size_t j = 1; j < F.size(); ++j) {
                const double u = b.grid.u[j] - b.grid.u[0];
                F[j] = std::pow(u, e) * checked(p.f(b.grid.t[j], b.x[j]), "f");
            }
            F[0] = F[1];
            return F;
        }
        for (std::size_t j = 0; j < F.size(); ++j) {
            F[j] = checked(p.f(b.grid.t[j], b.x[j]), "f");
        }
        return F;
    }

    void fill_first_branch(Branch& b, const std::vector<double>& F) const {
        const auto& p = *problem_;
        const double g = p.orders.gamma_w();
        const double e = 1.0 - g;
        const double head = p.x0 / gamma(g);
        const auto I = (singular_ ? *singular_plan_ : *regular_plan_).apply(F, b.grid.step());
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            const double u = b.grid.u[j] - b.grid.u[0];
            if (e == 0.0) {
                b.x[j] = head + I[j];
                b.weighted[j] = b.x[j];
            } else if (j == 0) {
                b.x[j] = p.x0 == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), p.x0);
                b.weighted[j] = head;
            } else if (singular_) {
                const double w = std::pow(u, e);
                b.x[j] = head / w + I[j];
                b.weighted[j] = head + w * I[j];
            } else {
                b.x[j] = I[j];
                b.weighted[j] = std::pow(u, e) * I[j];
            }
        }
    }

    void refresh_weighted(Branch& b) const {
        const auto& p = *problem_;
        const double e = 1.0 - p.orders.gamma_w();
        const double psi0 = p.psi(0.0);
        for (std::size_t j = 0; j < b.x.size(); ++j) {
            b.weighted[j] = e == 0.0 ? b.x[j] : std::pow(b.grid.u[j] - psi0, e) * b.x[j];
        }
    }

    const ImpulsiveProblem* problem_;
    std::vector<BranchSpec> layout_;
    bool singular_ = false;
    std::shared_ptr<const QuadPlan> regular_plan_;
    std::shared_ptr<const QuadPlan> singular_plan_;
};

/// One application of the fixed-point map on x's layout (grid_n nodes per branch).
inline GridSolution apply_omega(const ImpulsiveProblem& p, const GridSolution& x) {
    if (x.branches.empty()) {
        throw ShapeError("apply_omega: empty solution");
    }
    return OmegaOperator(p, x.branches.front().x.size()).apply(x);
}

/// max_i (L_{g_i}^delta + L_f^delta C_phi^delta) from the Lipschitz data.
inline double phi_constant(const StabilityData& sd, const Orders& orders) {
    return contraction_constant(sd.L_f(), sd.L_g(), sd.c_phi(), orders.delta);
}

struct SolveOptions {
    std::size_t grid_n = 1024;
    double tol = 1e-10;
    int max_iter = 500;
};

/// Picard iteration x_{k+1} = Omega x_k from the homogeneous start, stopped on
/// the PC weighted delta-norm of successive iterates.
inline SolveResult picard_solve(const ImpulsiveProblem& p, const SolveOptions& opt) {
    if (!(opt.tol > 0.0) || opt.max_iter < 1) {
        throw DomainError("picard_solve: need tol > 0 and max_iter >= 1");
    }
    const OmegaOperator omega(p, opt.grid_n);
    SolveReport rep;
    if (p.lip) {
        rep.phi_bound = phi_constant(*p.lip, p.orders);
        rep.certificate_applicable = rep.phi_bound < 1.0;
    }
    GridSolution x = omega.initial_iterate();
    double prev_delta = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= opt.max_iter; ++k) {
        GridSolution next = omega.apply(x);
        const double d = weighted_sup_distance(next, x, p.psi, p.orders);
        rep.iterations = k;
        rep.final_delta = d;
        if (std::isfinite(prev_delta) && prev_delta > 0.0) {
            rep.contraction_ratio_observed = d / prev_delta;
        }
        prev_delta = d;
        x = std::move(next);
        if (d <= opt.tol) {
            rep.converged = true;
            break;
        }
    }
    if (rep.certificate_applicable) {
        rep.apriori_error = rep.final_delta / (1.0 - rep.phi_bound);
    }
    if (!rep.converged) {
        throw SolverDivergence("picard_solve: max_iter reached with successive distance " +
                                   std::to_string(rep.final_delta) + " > tol",
                               rep);
    }
    return {std::move(x), rep};
}

} // namespace hilfer
