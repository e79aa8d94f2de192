#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "divergences.hpp"
#include "errors.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "radius.hpp"

namespace robust_resolve {

// Threshold above which no almost-sure radius is finite.
inline double rbar_prime(double alpha) {
    check_alpha(alpha);
    if (alpha == 0.0) return kInf;
    return (1.0 - alpha) * std::log((1.0 - alpha) / alpha) + alpha * std::log(alpha / (1.0 - alpha));
}

struct AlmostSureOptions {
    std::size_t grid_n = 801;
    double grid_span = 0.0;         // grid half-width beyond delta in units of sigma; 0: family default
    std::size_t theta_nodes = 21;   // scan nodes on [0, delta] (mirrored: 41 on [-delta, delta])
    double theta_tol = 1e-4;        // golden-section refinement of the best scan cell
    double lambda_tol = 1e-9;
    double balance_tol = 1e-9;      // |KL- - KL+| accepted as balanced
    double inner_tol = 1e-13;
    std::size_t inner_max_iter = 20000;
    // radius search
    double delta_cap = 20.0;        // units of sigma
    double eps_thr = 1e-4;
    double scan_step = 0.25;        // units of sigma
    double delta_tol = 1e-4;
    double monotone_slack = 1e-4;

    // Settings for dense sweeps (phase diagrams): coarser grid and scan.
    static AlmostSureOptions sweep() {
        AlmostSureOptions o;
        o.grid_n = 201;
        o.theta_nodes = 11;
        o.theta_tol = 1e-3;
        o.lambda_tol = 1e-6;
        o.balance_tol = 1e-7;
        o.inner_tol = 1e-11;
        return o;
    }
};

struct FixedThetaSolution {
    double theta = 0.0;
    double value = 0.0;   // dual value h(lambda), a lower bound
    double upper = 0.0;   // max(KL-, KL+) at the returned triple
    double lambda = 0.5;
    std::vector<double> p, q_minus, q_plus;
    std::size_t iterations = 0;
};

struct AlmostSureSolution {
    double delta = 0.0;
    double alpha = 0.0;
    double r_prime = 0.0;
    double theta_witness = 0.0;
    double gap = 0.0;  // primal max-KL minus dual value at the witness
    DiscreteDistribution p_hat;
    DiscreteDistribution q_minus;
    DiscreteDistribution q_plus;
};

namespace detail {

struct InnerResult {
    double value, km, kp;
    std::vector<double> p, qm, qp;
    std::size_t iterations;
};

// min over (P, Q-, Q+) of lambda KL(P||Q-) + (1-lambda) KL(P||Q+) by exact block minimization.
inline InnerResult weighted_inner(const std::vector<double>& am, const std::vector<double>& ap,
                                  const std::vector<double>& at, double alpha, double lambda, std::vector<double> p,
                                  const AlmostSureOptions& opt) {
    const std::size_t n = at.size();
    std::vector<double> m(n);
    InnerResult r{kInf, 0, 0, {}, {}, {}, 0};
    double prev = kInf;
    for (std::size_t it = 1; it <= opt.inner_max_iter; ++it) {
        auto qm = tv_clamp_projection(p, am, alpha, ZeroWeight::Free).x;
        auto qp = tv_clamp_projection(p, ap, alpha, ZeroWeight::Free).x;
        for (std::size_t i = 0; i < n; ++i) m[i] = std::exp(lambda * safe_log(qm[i]) + (1.0 - lambda) * safe_log(qp[i]));
        auto pr = tv_clamp_projection(m, at, alpha, ZeroWeight::Forbidden);
        if (!pr.feasible) throw infeasible_error("almost_sure: widen the grid (no finite-KL point)");
        p = std::move(pr.x);
        double km = std::max(kl(p, qm), 0.0), kp = std::max(kl(p, qp), 0.0);
        double v = lambda * km + (1.0 - lambda) * kp;
        r = {v, km, kp, p, std::move(qm), std::move(qp), it};
        if (std::abs(prev - v) <= opt.inner_tol * std::max(1.0, v)) return r;
        prev = v;
    }
    throw unconverged_error("almost_sure: alternating minimization did not settle", r.p, std::abs(prev - r.value));
}

}  // namespace detail

// r'(delta) restricted to one location theta. The max over the two KLs is dualized with a weight
// lambda; h(lambda) is concave with derivative KL- - KL+ at the inner minimizer, so lambda is
// found by bisection on that sign.
inline FixedThetaSolution almost_sure_fixed_theta(const LocationFamily& family, double delta, double theta,
                                                  double alpha, const Grid& grid, const AlmostSureOptions& opt = {}) {
    check_alpha(alpha);
    const auto am = discretize(family, -delta, grid).weights;
    const auto ap = discretize(family, delta, grid).weights;
    const auto at = discretize(family, theta, grid).weights;

    std::vector<double> warm = at;
    FixedThetaSolution best;
    best.theta = theta;
    best.value = -kInf;
    best.upper = kInf;
    std::size_t iters = 0;
    auto eval = [&](double lambda) {
        auto r = detail::weighted_inner(am, ap, at, alpha, lambda, warm, opt);
        warm = r.p;
        iters += r.iterations;
        if (r.value > best.value) {
            best.value = r.value;
            best.lambda = lambda;
        }
        double up = std::max(r.km, r.kp);
        if (up < best.upper) {
            best.upper = up;
            best.p = r.p;
            best.q_minus = r.qm;
            best.q_plus = r.qp;
        }
        return r;
    };

    auto r1 = eval(1.0);
    if (r1.km - r1.kp >= 0.0) {
        // h increasing up to lambda = 1
    } else {
        auto r0 = eval(0.0);
        if (r0.km - r0.kp > 0.0) {
            double lo = 0.0, hi = 1.0;
            while (hi - lo > opt.lambda_tol) {
                double mid = 0.5 * (lo + hi);
                auto r = eval(mid);
                double d = r.km - r.kp;
                if (std::abs(d) <= opt.balance_tol * std::max(1.0, r.value)) break;
                if (d > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
        }
    }
    best.iterations = iters;
    return best;
}

namespace detail {

inline std::vector<double> default_theta_scan(double delta, const Grid& grid, std::size_t nodes) {
    std::vector<double> th;
    nodes = std::max<std::size_t>(nodes, 2);
    bool mirror = grid.is_symmetric();
    double lo = mirror ? 0.0 : -delta;
    std::size_t count = mirror ? nodes : 2 * nodes - 1;
    for (std::size_t i = 0; i < count; ++i)
        th.push_back(lo + (delta - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return th;
}

}  // namespace detail

// r'^alpha(delta) = min over theta in [-delta, delta] of the fixed-theta program. Scans theta
// (on [0, delta] when the grid is symmetric, by the mirror symmetry of the program), then refines
// the best cell by golden section.
inline AlmostSureSolution almost_sure_resolution(const LocationFamily& family, double delta, double alpha,
                                                 const Grid& grid, std::vector<double> thetas = {},
                                                 const AlmostSureOptions& opt = {}) {
    check_alpha(alpha);
    if (!(delta >= 0.0)) throw domain_error("almost_sure_resolution: delta must be >= 0");
    AlmostSureSolution out;
    out.delta = delta;
    out.alpha = alpha;
    if (delta == 0.0) {
        auto p0 = discretize(family, 0.0, grid);
        out.p_hat = out.q_minus = out.q_plus = p0;
        return out;
    }
    if (thetas.empty()) thetas = detail::default_theta_scan(delta, grid, opt.theta_nodes);
    for (double t : thetas)
        if (!(t >= -delta - 1e-12 && t <= delta + 1e-12)) throw domain_error("almost_sure_resolution: theta outside [-delta, delta]");

    std::vector<FixedThetaSolution> scan(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t i) { scan[i] = almost_sure_fixed_theta(family, delta, thetas[i], alpha, grid, opt); });
    std::size_t k = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (scan[i].value < scan[k].value) k = i;
    FixedThetaSolution best = scan[k];
    if (scan.size() >= 2 && opt.theta_tol > 0.0) {
        double a = thetas[k > 0 ? k - 1 : 0], b = thetas[std::min(k + 1, thetas.size() - 1)];
        auto g = golden_section_minimize(
            [&](double t) {
                auto s = almost_sure_fixed_theta(family, delta, t, alpha, grid, opt);
                if (s.value < best.value) best = s;
                return s.value;
            },
            a, b, opt.theta_tol);
        (void)g;
    }
    out.r_prime = std::max(best.value, 0.0);
    out.theta_witness = best.theta;
    out.gap = std::max(best.upper - best.value, 0.0);
    out.p_hat = DiscreteDistribution::normalized(grid, best.p);
    out.q_minus = DiscreteDistribution::normalized(grid, best.q_minus);
    out.q_plus = DiscreteDistribution::normalized(grid, best.q_plus);
    return out;
}

inline AlmostSureSolution almost_sure_resolution(const LocationFamily& family, double delta, double alpha,
                                                 const AlmostSureOptions& opt = {}) {
    return almost_sure_resolution(family, delta, alpha, working_grid(family, delta, opt.grid_n, opt.grid_span), {}, opt);
}

struct AlmostSureCurvePoint {
    double delta = 0.0;
    double r_prime = 0.0;
    double theta = 0.0;
    double gap = 0.0;
};

struct AlmostSureCurve {
    std::vector<AlmostSureCurvePoint> points;
    bool monotone = true;
    double worst_drop = 0.0;
    double worst_drop_at = 0.0;
};

inline AlmostSureCurve almost_sure_curve(const LocationFamily& family, double alpha, const std::vector<double>& deltas,
                                         const AlmostSureOptions& opt = {}) {
    AlmostSureCurve c;
    c.points.resize(deltas.size());
    parallel_for(deltas.size(), [&](std::size_t i) {
        auto s = almost_sure_resolution(family, deltas[i], alpha, opt);
        c.points[i] = {deltas[i], s.r_prime, s.theta_witness, s.gap};
    });
    check_monotone(c.points, [](const AlmostSureCurvePoint& p) { return p.r_prime; }, opt.monotone_slack, c.monotone,
                   c.worst_drop, c.worst_drop_at);
    return c;
}

// kappa'_{r,alpha} = sup{delta : r'^alpha(delta) <= r}: coarse scan with monotonicity check,
// then bisection inside the first cell where r' exceeds r.
inline Radius almost_sure_radius(const LocationFamily& family, double r, double alpha, const AlmostSureOptions& opt = {}) {
    check_alpha(alpha);
    if (!(r >= 0.0)) throw domain_error("almost_sure_radius: r must be >= 0");
    if (r >= rbar_prime(alpha) - opt.eps_thr) return Radius::unbounded();
    const double s = family.sigma();
    const double cap = opt.delta_cap * s;
    auto rp = [&](double d) { return almost_sure_resolution(family, d, alpha, opt).r_prime; };
    double prev_d = 0.0, prev_v = 0.0;
    for (double d = opt.scan_step * s;; d += opt.scan_step * s) {
        d = std::min(d, cap);
        double v = rp(d);
        if (v < prev_v - opt.monotone_slack)
            throw monotonicity_error("almost_sure_radius: r' decreases near delta = " + std::to_string(d), d, prev_v - v);
        if (v > r) {
            double lo = prev_d, hi = d;
            while (hi - lo > opt.delta_tol) {
                double mid = 0.5 * (lo + hi);
                if (rp(mid) > r)
                    hi = mid;
                else
                    lo = mid;
            }
            double k = 0.5 * (lo + hi);
            return Radius{k, k};
        }
        if (d >= cap) return Radius::unbounded();
        prev_d = d;
        prev_v = v;
    }
}

// sup{delta : value(delta) <= r} over a sampled increasing-delta curve, interpolating linearly
// between the last point at or below r and its successor; +inf when the last point is still <= r.
template <class Point, class Value>
Radius invert_sampled_curve(const std::vector<Point>& pts, Value value, double r) {
    if (pts.empty()) return Radius::unbounded();
    std::size_t i = pts.size();
    while (i > 0 && value(pts[i - 1]) > r) --i;
    if (i == pts.size()) return Radius::unbounded();
    if (i == 0) return Radius{pts[0].delta, pts[0].delta};
    double v0 = value(pts[i - 1]), v1 = value(pts[i]);
    double d0 = pts[i - 1].delta, d1 = pts[i].delta;
    double k = v1 == v0 ? d0 : d0 + (d1 - d0) * (r - v0) / (v1 - v0);
    return Radius{k, k};
}

}  // namespace robust_resolve
