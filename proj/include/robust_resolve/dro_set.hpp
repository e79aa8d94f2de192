#pragma once
#include <algorithm>
#include <cmath>
#include <vector>

#include "divergences.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace robust_resolve {

// Bins atoms to the nearest grid node, preserving mass.
inline DiscreteDistribution bin_sample(const EmpiricalSample& data, const Grid& grid) {
    std::vector<double> w(grid.n, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) w[grid.nearest(data.points[i])] += data.weight(i);
    return DiscreteDistribution::normalized(grid, std::move(w));
}

enum class DroSolver {
    ClosedForm,        // KKT clamp solution, exact
    ProjectedGradient  // generic first-order solver
};

// r^alpha(p_hat, theta) = min{ KL(p_hat || Q) : TV(Q, P_theta) <= alpha } with P_theta discretized
// on the grid of p_hat.
inline double dro_resolution(const DiscreteDistribution& p_hat, const LocationFamily& family, double theta,
                             double alpha, DroSolver solver = DroSolver::ClosedForm, const SolverOptions& opt = {}) {
    check_alpha(alpha);
    p_hat.validate();
    const auto center = discretize(family, theta, p_hat.grid);
    if (tv(p_hat.weights, center.weights) <= alpha) return 0.0;  // Q = p_hat is feasible
    if (solver == DroSolver::ClosedForm) {
        auto q = tv_clamp_projection(p_hat.weights, center.weights, alpha, ZeroWeight::Free);
        return std::max(kl(p_hat.weights, q.x), 0.0);
    }
    // Atoms lighter than 1e-12 of the heaviest one are dropped: they change the value by far less than
    // solver tolerance but their p / q^2 curvature stalls a first-order method.
    std::vector<double> p = p_hat.weights;
    const double cut = 1e-12 * *std::max_element(p.begin(), p.end());
    for (double& v : p)
        if (v < cut) v = 0.0;
    auto objective = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (p[i] <= 0.0) continue;
            if (q[i] <= 0.0) return -kInf;
            s += p[i] * std::log(q[i]);
        }
        return s;
    };
    auto gradient = [&](const std::vector<double>& q) {
        std::vector<double> g(q.size(), 0.0);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (p[i] > 0.0) g[i] = p[i] / std::max(q[i], kLogFloor);
        return g;
    };
    // (1 - alpha) P_theta + alpha p_hat is feasible and keeps p / q <= 1 / alpha
    std::vector<double> x0(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) x0[i] = (1.0 - alpha) * center.weights[i] + alpha * p[i];
    auto sol = maximize_concave_on_polytope(objective, gradient, TvBall{center.weights, alpha, {}}, std::move(x0), opt);
    double neg_entropy = 0.0;
    for (double v : p)
        if (v > 0.0) neg_entropy += v * std::log(v);
    return std::max(neg_entropy - sol.value, 0.0);
}

struct ConfidenceRegion {
    double r = 0.0;
    double alpha = 0.0;
    std::vector<Interval> intervals;
    Grid theta_grid;
    std::vector<double> residual;
};

// Sublevel set {theta : r^alpha(p_hat, theta) <= r} over theta_grid. Endpoints between a member
// node and a non-member node start from linear interpolation of the residual, followed by five
// bisection steps on the exact residual.
inline ConfidenceRegion confidence_region(const DiscreteDistribution& p_hat, const LocationFamily& family, double r,
                                          double alpha, const Grid& theta_grid) {
    check_alpha(alpha);
    if (!(r >= 0.0)) throw domain_error("confidence_region: r must be >= 0");
    ConfidenceRegion out;
    out.r = r;
    out.alpha = alpha;
    out.theta_grid = theta_grid;
    out.residual.resize(theta_grid.n);
    auto res = [&](double t) { return dro_resolution(p_hat, family, t, alpha); };
    parallel_for(theta_grid.n, [&](std::size_t i) { out.residual[i] = res(theta_grid.node(i)); });

    // crossing between node i (inside == in_left) and node i+1
    auto crossing = [&](std::size_t i) {
        double t0 = theta_grid.node(i), t1 = theta_grid.node(i + 1);
        double v0 = out.residual[i], v1 = out.residual[i + 1];
        bool left_in = v0 <= r;
        double guess = v1 == v0 ? 0.5 * (t0 + t1) : t0 + (t1 - t0) * (r - v0) / (v1 - v0);
        guess = std::clamp(guess, t0, t1);
        double a = t0, b = t1;  // a on the left_in side
        double g = guess;
        for (int k = 0; k < 6; ++k) {
            bool in = res(g) <= r;
            if (in == left_in)
                a = g;
            else
                b = g;
            g = 0.5 * (a + b);
        }
        return 0.5 * (a + b);
    };

    std::size_t i = 0;
    const std::size_t n = theta_grid.n;
    while (i < n) {
        if (out.residual[i] > r) {
            ++i;
            continue;
        }
        double lo = i == 0 ? theta_grid.node(0) : crossing(i - 1);
        std::size_t j = i;
        while (j + 1 < n && out.residual[j + 1] <= r) ++j;
        double hi = j + 1 == n ? theta_grid.node(n - 1) : crossing(j);
        out.intervals.push_back({lo, hi});
        i = j + 1;
    }
    return out;
}

// Chebyshev radius of a union of intervals: half of (max hi - min lo). Zero for an empty region.
inline double region_radius(const ConfidenceRegion& region) {
    if (region.intervals.empty()) return 0.0;
    return 0.5 * (region.intervals.back().hi - region.intervals.front().lo);
}

}  // namespace robust_resolve
