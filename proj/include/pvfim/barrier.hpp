#pragma once

#include <optional>

#include "pvfim/problem.hpp"

namespace pvfim {

/// Parameters of the barrier objective and of the lower-level approximation:
/// tau is the barrier weight, J the number of lower projected-descent steps,
/// c0 the restricted-set margin, alpha the lower stepsize. alpha = 0 is
/// admitted as the degenerate zero-step case used by edge-case tests.
struct BarrierParams {
    double tau = 0.5;
    int J = 1;
    double c0 = 0.0;
    double alpha = 0.0;

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("BarrierParams: tau must lie in (0,1)");
        if (J < 1) throw std::invalid_argument("BarrierParams: J must be >= 1");
        if (!(c0 > 0.0)) throw std::invalid_argument("BarrierParams: c0 must be positive");
        if (alpha < 0.0) throw std::invalid_argument("BarrierParams: alpha must be >= 0");
    }

    /// c0 <= eps guarantees the lower approximation point itself is feasible
    /// for the restricted set (its slack is exactly eps >= c0/2).
    void validate_against(const BilevelProblem& prob) const {
        validate();
        if (c0 > prob.eps)
            throw std::invalid_argument("BarrierParams: c0 must not exceed eps");
    }
};

/// Output of the lower-level projected gradient descent: the approximate
/// minimizer, its objective value, and optionally the full iterate path.
struct LowerApproxResult {
    Vec y;        // approximate lower minimizer after J steps
    double f_J;   // f(x, y), the value-function approximation at x
    std::optional<std::vector<Vec>> trajectory;  // y_0 .. y_J when requested
};

/// Runs exactly J steps of projected gradient descent on f(x, .) over Y from
/// y0 and evaluates the value-function approximation at the final iterate.
inline LowerApproxResult approx_lower_solution(const BilevelProblem& prob, const Vec& x,
                                               const BarrierParams& params, const Vec& y0,
                                               bool keep_trajectory = false) {
    params.validate();
    require_dim(x, prob.X.dim(), "approx_lower_solution x");
    require_dim(y0, prob.Y.dim(), "approx_lower_solution y0");

    LowerApproxResult out;
    if (keep_trajectory) out.trajectory.emplace();
    Vec y = project_box(y0, prob.Y);
    if (keep_trajectory) out.trajectory->push_back(y);
    for (int j = 0; j < params.J; ++j) {
        EvalResult e;
        try {
            e = prob.f(x, y);
        } catch (const NumericalError& err) {
            throw NumericalError(std::string("approx_lower_solution: lower step ") +
                                 std::to_string(j) + ": " + err.what());
        }
        y = project_box(add_scaled(y, -params.alpha, e.grad_y), prob.Y);
        if (keep_trajectory) out.trajectory->push_back(y);
    }
    out.f_J = prob.f.value(x, y);
    out.y = std::move(y);
    return out;
}

/// Barrier objective value and gradients at (x, y), with the positive log
/// argument reported as `slack`.
struct BarrierEval {
    double value;  // F(x,y) + tau * ln(slack)
    Vec grad_x;
    Vec grad_y;
    double slack;  // f_J + eps - f(x,y), positive whenever value is finite
};

/// Evaluates the log-barrier objective. grad_y is always the full analytic
/// gradient. grad_x carries the chain term through the value-function
/// approximation only when the caller supplies it (grad_f_J); without it the
/// term is omitted, which is the estimate the solver itself consumes.
inline BarrierEval barrier_eval(const BilevelProblem& prob, const Vec& x, const Vec& y,
                                double f_J, const BarrierParams& params,
                                const std::optional<Vec>& grad_f_J = std::nullopt) {
    EvalResult eF = prob.F(x, y);
    EvalResult ef = prob.f(x, y);
    double slack = f_J + prob.eps - ef.value;
    if (!(slack > 0.0))
        throw BarrierDomainError("barrier_eval: nonpositive slack " + std::to_string(slack),
                                 slack);
    double w = params.tau / slack;

    BarrierEval out;
    out.value = eF.value + params.tau * std::log(slack);
    out.slack = slack;
    out.grad_y = add_scaled(eF.grad_y, -w, ef.grad_y);
    if (grad_f_J) {
        require_dim(*grad_f_J, x.size(), "barrier_eval grad_f_J");
        out.grad_x = add_scaled(eF.grad_x, w, sub(*grad_f_J, ef.grad_x));
    } else {
        out.grad_x = add_scaled(eF.grad_x, -w, ef.grad_x);
    }
    return out;
}

/// Membership in the restricted set: y in Y and slack >= c0/2, compared
/// exactly (no tolerance).
inline bool in_restricted_set(const BilevelProblem& prob, const Vec& x, const Vec& y,
                              double f_J, double c0) {
    require_dim(x, prob.X.dim(), "in_restricted_set x");
    require_dim(y, prob.Y.dim(), "in_restricted_set y");
    if (!prob.Y.contains(y)) return false;
    return f_J + prob.eps - prob.f.value(x, y) >= 0.5 * c0;
}

/// Pulls an infeasible trial point back into the restricted set along the
/// segment from the last feasible iterate, by bisection on the slack. This
/// is a feasibility restoration, not the exact Euclidean projection: the
/// crossing is unique because f(x,.) is convex and the anchor is feasible.
/// The result satisfies slack in [c0/2, c0/2 + tol].
inline Vec restore_feasibility(const BilevelProblem& prob, const Vec& x, const Vec& y_feasible,
                               const Vec& y_trial, double f_J, double c0, double tol = 1e-10) {
    if (in_restricted_set(prob, x, y_trial, f_J, c0)) return y_trial;
    if (!in_restricted_set(prob, x, y_feasible, f_J, c0))
        throw ContractViolation("restore_feasibility: anchor point is infeasible");

    const double target = 0.5 * c0;
    auto slack_at = [&](double s) {
        return f_J + prob.eps - prob.f.value(x, lerp(y_feasible, y_trial, s));
    };
    double lo = 0.0, hi = 1.0;  // slack(lo) >= target > slack(hi)
    for (int it = 0; it < 200; ++it) {
        double s_lo = slack_at(lo);
        if (s_lo >= target && s_lo <= target + tol) break;
        if (hi - lo < 1e-16) break;
        double mid = 0.5 * (lo + hi);
        if (slack_at(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return lerp(y_feasible, y_trial, lo);
}

/// The solver's computable surrogate for the x-gradient of the inner value
/// function. b is the difference of lower gradients at the two inner points;
/// the chain term through the value-function approximation is dropped by
/// construction.
struct GradientEstimate {
    Vec a;       // grad_x F(x, y_K) + (tau/slack) * b
    Vec b;       // grad_x f(x, y_J) - grad_x f(x, y_K)
    double slack;
};

inline GradientEstimate grad_estimate(const BilevelProblem& prob, const Vec& x,
                                      const LowerApproxResult& lower, const Vec& y_K,
                                      const BarrierParams& params) {
    EvalResult eF = prob.F(x, y_K);
    EvalResult ef_K = prob.f(x, y_K);
    EvalResult ef_J = prob.f(x, lower.y);
    double slack = lower.f_J + prob.eps - ef_K.value;
    if (!(slack > 0.0))
        throw BarrierDomainError("grad_estimate: nonpositive slack " + std::to_string(slack),
                                 slack);
    GradientEstimate out;
    out.b = sub(ef_J.grad_x, ef_K.grad_x);
    out.a = add_scaled(eF.grad_x, params.tau / slack, out.b);
    out.slack = slack;
    return out;
}

/// Exact gradient of the value-function approximation by forward finite
/// differences, one extra lower solve per coordinate. Used by certificates
/// and analysis, never by the solver's own update.
inline Vec grad_f_J_fd(const BilevelProblem& prob, const Vec& x, const BarrierParams& params,
                       const Vec& y0, double step = 1e-6) {
    double base = approx_lower_solution(prob, x, params, y0).f_J;
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xp = x;
        xp[i] += step;
        g[i] = (approx_lower_solution(prob, xp, params, y0).f_J - base) / step;
    }
    return g;
}

/// Exact Euclidean projection onto the restricted slab of the synthetic
/// instance, ignoring the outer box: {y : (y1-2*y2)^2 <= f_J + eps - c0/2 - x}.
/// Used in tests to bound how far the segment-bisection restoration deviates
/// from a true projection.
inline Vec example3_slab_project(const Vec& x, const Vec& y, double f_J, double eps, double c0) {
    double room = f_J + eps - 0.5 * c0 - x[0];
    if (room < 0.0)
        throw ContractViolation("example3_slab_project: empty slab");
    double t_max = std::sqrt(room);
    double t = y[0] - 2.0 * y[1];
    if (std::abs(t) <= t_max) return y;
    double excess = t - (t > 0 ? t_max : -t_max);
    // min-norm correction along (1,-2)/5, which changes t by exactly -excess
    return Vec{y[0] - excess / 5.0, y[1] + 2.0 * excess / 5.0};
}

}  // namespace pvfim
