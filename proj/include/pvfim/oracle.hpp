#pragma once

#include <thread>

#include "pvfim/barrier.hpp"

namespace pvfim {

/// Resolution of the brute-force sweep: x_points over X, a lattice with
/// y_points_per_dim per coordinate over Y, and refine_rounds local
/// subdivisions around incumbents.
struct GridSpec {
    int x_points = 2001;
    int y_points_per_dim = 401;
    int refine_rounds = 3;

    void validate() const {
        if (x_points < 2 || y_points_per_dim < 2)
            throw std::invalid_argument("GridSpec: need at least 2 points per dimension");
        if (refine_rounds < 0)
            throw std::invalid_argument("GridSpec: refine_rounds must be >= 0");
    }
};

struct OracleOptions {
    double alpha = 0.1;        // lower polish stepsize, 1/L1 of the instance
    int polish_iters = 10000;  // projected-descent polish budget per x
    double ascent_step = 0.25; // polish stepsize for the constrained max
    int workers = 0;           // 0 = hardware concurrency
};

struct OracleRow {
    double x;
    double f_star;   // lower value function
    double F_star;   // constrained maximum of F over the eps-optimal set
    double phi_eps;  // pessimistic value; equals F_star by construction
    Vec y_argmax;    // a maximizer achieving phi_eps
};

struct OracleResult {
    std::vector<OracleRow> rows;
    double phi_min = 0.0;
    double x_argmin = 0.0;
};

/// Ground truth for a candidate upper point, as used by certificates.
struct PointOracle {
    double f_star;
    double F_star;
    Vec y_argmax;
};

namespace detail {

/// Visits every node of the lattice with `pts` points per dimension on
/// [lo, hi] (odometer order, deterministic).
template <typename Fn>
void for_each_lattice(const Vec& lo, const Vec& hi, int pts, Fn&& fn) {
    const std::size_t m = lo.size();
    std::vector<int> idx(m, 0);
    Vec y(m);
    Vec step(m);
    for (std::size_t d = 0; d < m; ++d) step[d] = (hi[d] - lo[d]) / (pts - 1);
    for (;;) {
        for (std::size_t d = 0; d < m; ++d) y[d] = lo[d] + idx[d] * step[d];
        fn(static_cast<const Vec&>(y));
        std::size_t d = 0;
        while (d < m && ++idx[d] == pts) idx[d++] = 0;
        if (d == m) break;
    }
}

inline Box sub_box_around(const Box& outer, const Vec& center, const Vec& halfwidth) {
    Vec lo(center.size()), hi(center.size());
    for (std::size_t d = 0; d < center.size(); ++d) {
        lo[d] = std::max(outer.lo[d], center[d] - halfwidth[d]);
        hi[d] = std::min(outer.hi[d], center[d] + halfwidth[d]);
        if (lo[d] > hi[d]) lo[d] = hi[d] = center[d];
    }
    return Box(std::move(lo), std::move(hi));
}

struct PerXResult {
    double f_star;
    Vec y_f;
    double phi;
    Vec y_phi;
};

/// The full per-x enumeration: lower minimum with refinement and descent
/// polish, then the constrained maximum over the eps-sublevel slice with
/// refinement and an ascent polish that bisects back to the slab boundary
/// whenever a step leaves it.
inline PerXResult oracle_at_x(const BilevelProblem& prob, const Vec& x, const GridSpec& grid,
                              const OracleOptions& opt) {
    const int refine_pts = 41;
    Vec cell(prob.Y.dim());
    for (std::size_t d = 0; d < cell.size(); ++d)
        cell[d] = (prob.Y.hi[d] - prob.Y.lo[d]) / (grid.y_points_per_dim - 1);

    // Lower minimum.
    double f_best = std::numeric_limits<double>::infinity();
    Vec y_best;
    for_each_lattice(prob.Y.lo, prob.Y.hi, grid.y_points_per_dim, [&](const Vec& y) {
        double v = prob.f.value(x, y);
        if (v < f_best) {
            f_best = v;
            y_best = y;
        }
    });
    Vec half = cell;
    for (int r = 0; r < grid.refine_rounds; ++r) {
        Box sub = sub_box_around(prob.Y, y_best, half);
        for_each_lattice(sub.lo, sub.hi, refine_pts, [&](const Vec& y) {
            double v = prob.f.value(x, y);
            if (v < f_best) {
                f_best = v;
                y_best = y;
            }
        });
        for (double& h : half) h *= 2.0 / (refine_pts - 1);
    }
    {  // descent polish
        Vec y = y_best;
        for (int j = 0; j < opt.polish_iters; ++j) {
            Vec y_next = project_box(add_scaled(y, -opt.alpha, prob.f(x, y).grad_y), prob.Y);
            double moved = distance(y_next, y);
            y = std::move(y_next);
            double v = prob.f.value(x, y);
            if (v < f_best) {
                f_best = v;
                y_best = y;
            }
            if (moved < 1e-16) break;
        }
    }

    // Constrained maximum over {y in Y : f(x,y) <= f_star + eps}. The point
    // achieving f_star is itself feasible, so the candidate set is nonempty.
    const double threshold = f_best + prob.eps;
    double phi_best = -std::numeric_limits<double>::infinity();
    Vec y_phi;
    auto consider = [&](const Vec& y) {
        if (prob.f.value(x, y) > threshold) return;
        double v = prob.F.value(x, y);
        if (v > phi_best) {
            phi_best = v;
            y_phi = y;
        }
    };
    consider(y_best);
    for_each_lattice(prob.Y.lo, prob.Y.hi, grid.y_points_per_dim, consider);
    if (!std::isfinite(phi_best))
        throw std::logic_error("oracle: empty eps-feasible slice despite feasible minimizer");
    half = cell;
    for (int r = 0; r < grid.refine_rounds; ++r) {
        Box sub = sub_box_around(prob.Y, y_phi, half);
        for_each_lattice(sub.lo, sub.hi, refine_pts, consider);
        for (double& h : half) h *= 2.0 / (refine_pts - 1);
    }
    {  // ascent polish inside the slab
        Vec y = y_phi;
        for (int k = 0; k < opt.polish_iters; ++k) {
            Vec y_next = project_box(add_scaled(y, opt.ascent_step, prob.F(x, y).grad_y), prob.Y);
            if (prob.f.value(x, y_next) > threshold) {
                double lo = 0.0, hi = 1.0;  // y stays feasible, y_next is not
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (prob.f.value(x, lerp(y, y_next, mid)) <= threshold)
                        lo = mid;
                    else
                        hi = mid;
                }
                y_next = lerp(y, y_next, lo);
            }
            double moved = distance(y_next, y);
            y = std::move(y_next);
            double v = prob.F.value(x, y);
            if (v > phi_best) {
                phi_best = v;
                y_phi = y;
            }
            if (moved < 1e-16) break;
        }
    }
    return {f_best, y_best, phi_best, y_phi};
}

}  // namespace detail

/// Ground truth at a single upper point.
inline PointOracle oracle_point(const BilevelProblem& prob, const Vec& x, const GridSpec& grid,
                                const OracleOptions& opt = {}) {
    grid.validate();
    require_dim(x, prob.X.dim(), "oracle_point x");
    detail::PerXResult r = detail::oracle_at_x(prob, x, grid, opt);
    return {r.f_star, r.phi, r.y_phi};
}

/// Brute-force sweep over an x grid. The per-x work is independent and runs
/// on a small worker pool; assembly is keyed by grid index, so the result is
/// identical for any worker count.
inline OracleResult oracle_sweep(const BilevelProblem& prob, const GridSpec& grid,
                                 const OracleOptions& opt = {}) {
    grid.validate();
    if (prob.X.dim() != 1)
        throw std::invalid_argument("oracle_sweep: only 1-D upper variables are supported");

    OracleResult out;
    out.rows.resize(grid.x_points);
    const double x_lo = prob.X.lo[0], x_hi = prob.X.hi[0];
    const double dx = (x_hi - x_lo) / (grid.x_points - 1);

    unsigned workers = opt.workers > 0 ? static_cast<unsigned>(opt.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.x_points));

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mu;
    auto work = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= grid.x_points || failed.load()) return;
            try {
                Vec x{x_lo + i * dx};
                detail::PerXResult r = detail::oracle_at_x(prob, x, grid, opt);
                out.rows[i] = {x[0], r.f_star, r.phi, r.phi, r.y_phi};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> g(error_mu);
                failed.store(true);
                if (error_msg.empty()) error_msg = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw NumericalError("oracle_sweep: " + error_msg);

    out.phi_min = std::numeric_limits<double>::infinity();
    for (const OracleRow& row : out.rows) {
        if (row.phi_eps < out.phi_min) {
            out.phi_min = row.phi_eps;
            out.x_argmin = row.x;
        }
    }
    return out;
}

}  // namespace pvfim
