#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <utility>

#include "pvfim/common.hpp"

namespace pvfim {

/// Axis-aligned box [lo, hi]. The feasible sets of both players are boxes;
/// projection onto a box is the coordinatewise clamp and is exact.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size())
            throw std::invalid_argument("Box: lo/hi dimension mismatch");
        require_finite(lo, "Box lo");
        require_finite(hi, "Box hi");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i])
                throw std::invalid_argument("Box: lo > hi at coordinate " + std::to_string(i));
    }

    std::size_t dim() const { return lo.size(); }

    bool contains(const Vec& p) const {
        if (p.size() != lo.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }

    bool strictly_contains(const Vec& p) const {
        if (p.size() != lo.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
        return true;
    }

    Vec center() const {
        Vec c(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    /// sup of the Euclidean norm over the box (attained at a corner).
    double norm_bound() const {
        double s = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            double m = std::max(std::abs(lo[i]), std::abs(hi[i]));
            s += m * m;
        }
        return std::sqrt(s);
    }
};

/// Euclidean projection onto a box: coordinatewise clamp.
inline Vec project_box(const Vec& p, const Box& box) {
    require_dim(p, box.dim(), "project_box");
    require_finite(p, "project_box input");
    Vec r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        r[i] = std::min(std::max(p[i], box.lo[i]), box.hi[i]);
    return r;
}

struct EvalResult {
    double value;
    Vec grad_x;
    Vec grad_y;
};

/// A twice continuously differentiable objective supplied with analytic
/// gradients. Evaluations are pure: same inputs, same outputs, no hidden
/// state, safe to call from multiple threads. Non-finite inputs or outputs
/// are rejected at this boundary; nothing non-finite enters the solver.
///
/// Copies share one evaluation counter, so a problem and the traces derived
/// from it report a single total.
class SmoothFn {
public:
    using EvalFn = std::function<EvalResult(const Vec&, const Vec&)>;

    SmoothFn() = default;
    SmoothFn(std::string name, EvalFn eval)
        : name_(std::move(name)),
          eval_(std::move(eval)),
          count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

    EvalResult operator()(const Vec& x, const Vec& y) const {
        require_finite(x, name_.c_str());
        require_finite(y, name_.c_str());
        count_->fetch_add(1, std::memory_order_relaxed);
        EvalResult r = eval_(x, y);
        if (!std::isfinite(r.value) || !all_finite(r.grad_x) || !all_finite(r.grad_y))
            throw NumericalError(name_ + ": non-finite evaluation");
        return r;
    }

    double value(const Vec& x, const Vec& y) const { return (*this)(x, y).value; }

    const std::string& name() const { return name_; }
    std::uint64_t eval_count() const { return count_->load(std::memory_order_relaxed); }
    void reset_eval_count() const { count_->store(0, std::memory_order_relaxed); }

private:
    std::string name_;
    EvalFn eval_;
    std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

/// One bilevel instance: upper objective F (maximized by the follower's
/// adversarial response, minimized in x), lower objective f, box sets X and
/// Y, and the lower-level optimality relaxation eps.
struct BilevelProblem {
    SmoothFn F;
    SmoothFn f;
    Box X;
    Box Y;
    double eps = 0.0;

    BilevelProblem() = default;
    BilevelProblem(SmoothFn F_, SmoothFn f_, Box X_, Box Y_, double eps_)
        : F(std::move(F_)), f(std::move(f_)), X(std::move(X_)), Y(std::move(Y_)), eps(eps_) {
        if (!(eps > 0.0)) throw std::invalid_argument("BilevelProblem: eps must be positive");
        if (X.dim() == 0 || Y.dim() == 0)
            throw std::invalid_argument("BilevelProblem: empty variable space");
    }

    std::uint64_t eval_count() const { return F.eval_count() + f.eval_count(); }
};

/// Lipschitz and structure constants of a problem instance: h0, h1 bound F
/// and its gradient, L0..L3 bound f and its first and mixed second
/// derivatives, mu is the strong-concavity modulus of F(x,.), H and M bound
/// the norms over X and Y, and c is the restricted-set margin.
struct LipschitzSpec {
    double h0 = 0, h1 = 0;
    double L0 = 0, L1 = 0, L2 = 0, L3 = 0;
    double mu = 0;
    double H = 0, M = 0;
    double c = 0;

    /// Validity of the margin c depends on the owning problem's eps, so the
    /// check takes it as context.
    void validate(double eps) const {
        if (!(mu > 0)) throw std::invalid_argument("LipschitzSpec: mu must be positive");
        if (!(H > 0) || !(M > 1))
            throw std::invalid_argument("LipschitzSpec: requires H > 0 and M > 1");
        if (!(c > 0) || c > std::min({eps / 2.0, L0 * H, 1.0}))
            throw std::invalid_argument(
                "LipschitzSpec: c must lie in (0, min(eps/2, L0*H, 1)]");
        for (double v : {h0, h1, L0, L1, L2, L3})
            if (v < 0 || !std::isfinite(v))
                throw std::invalid_argument("LipschitzSpec: negative or non-finite constant");
    }
};

namespace detail {

/// Spectral norm (largest |eigenvalue|) of a small symmetric matrix via
/// cyclic Jacobi rotations. Deterministic; n <= 4 is all we need.
template <std::size_t N>
double sym_spectral_norm(std::array<std::array<double, N>, N> a) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double cth = 1.0 / std::sqrt(t * t + 1.0);
                double sth = t * cth;
                for (std::size_t k = 0; k < N; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = cth * akp - sth * akq;
                    a[k][q] = sth * akp + cth * akq;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = cth * apk - sth * aqk;
                    a[q][k] = sth * apk + cth * aqk;
                }
            }
        }
    }
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i][i]));
    return m;
}

}  // namespace detail

/// The synthetic instance used throughout the tests and the CLI:
///   F(x,y) = -(y1-x)^2 - (y2-x/2)^2 + sin x
///   f(x,y) = (y1-2*y2)^2 + x
///   X = [pi/2, 4*pi],  Y = [-40,40] x [-20,20]
/// For every x the adversarial response set is the single point (x, x/2),
/// the lower value function is x, and the pessimistic value is sin x with
/// global minimizers 3*pi/2 and 7*pi/2.
inline BilevelProblem example3_problem(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("example3_problem: eps must be positive");
    const double pi = std::acos(-1.0);

    SmoothFn F("example3.F", [](const Vec& x, const Vec& y) -> EvalResult {
        double d1 = y[0] - x[0];
        double d2 = y[1] - 0.5 * x[0];
        double value = -d1 * d1 - d2 * d2 + std::sin(x[0]);
        Vec gx{2.0 * d1 + d2 + std::cos(x[0])};
        Vec gy{-2.0 * d1, -2.0 * d2};
        return {value, std::move(gx), std::move(gy)};
    });
    SmoothFn f("example3.f", [](const Vec& x, const Vec& y) -> EvalResult {
        double t = y[0] - 2.0 * y[1];
        double value = t * t + x[0];
        Vec gx{1.0};
        Vec gy{2.0 * t, -4.0 * t};
        return {value, std::move(gx), std::move(gy)};
    });

    Box X(Vec{pi / 2.0}, Vec{4.0 * pi});
    Box Y(Vec{-40.0, -20.0}, Vec{40.0, 20.0});
    return BilevelProblem(std::move(F), std::move(f), std::move(X), std::move(Y), eps);
}

/// Constants for example3_problem, computed from closed forms over X x Y
/// (coordinatewise interval bounds for the suprema), so that downstream
/// schedules are deterministic. The margin c = 0.25 matches eps = 0.5.
inline LipschitzSpec example3_lipschitz() {
    const double pi = std::acos(-1.0);
    LipschitzSpec s;

    // |y1 - 2*y2| <= 80 on Y, so ||grad f|| = sqrt(1 + 20 t^2) <= sqrt(1 + 20*6400).
    s.L0 = std::sqrt(1.0 + 20.0 * 6400.0);
    // Hessian of f in (x, y1, y2) is constant; eigenvalues of [[2,-4],[-4,8]] are {0, 10}.
    s.L1 = detail::sym_spectral_norm<3>(
        {{{0, 0, 0}, {0, 2, -4}, {0, -4, 8}}});
    s.L2 = 0.0;  // grad_yx f is constant
    s.L3 = 0.0;  // grad_yy f is constant

    const double A = 40.0 + 4.0 * pi;  // max |y1 - x|
    const double B = 20.0 + 2.0 * pi;  // max |y2 - x/2|
    s.h0 = std::sqrt((2.0 * A + B + 1.0) * (2.0 * A + B + 1.0) + 4.0 * A * A + 4.0 * B * B);

    // Hessian of F is affine in sin x; the spectral norm is convex in that
    // parameter, so the supremum sits at sin x = +-1.
    double hplus = detail::sym_spectral_norm<3>(
        {{{-2.5 - 1.0, 2, 1}, {2, -2, 0}, {1, 0, -2}}});
    double hminus = detail::sym_spectral_norm<3>(
        {{{-2.5 + 1.0, 2, 1}, {2, -2, 0}, {1, 0, -2}}});
    s.h1 = std::max(hplus, hminus);

    s.mu = 2.0;  // F(x,.) has Hessian -2*I
    s.H = 4.0 * pi;
    s.M = std::sqrt(40.0 * 40.0 + 20.0 * 20.0);
    s.c = 0.25;
    return s;
}

}  // namespace pvfim
