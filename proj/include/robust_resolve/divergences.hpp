#pragma once
#include <cmath>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "numerics.hpp"

namespace robust_resolve {

struct DiscreteDistribution {
    Grid grid;
    std::vector<double> weights;

    // Rescales nonnegative raw masses to sum one.
    static DiscreteDistribution normalized(const Grid& grid, std::vector<double> raw) {
        if (raw.size() != grid.n) throw domain_error("distribution: weight count differs from grid size");
        double s = 0.0;
        for (double v : raw) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw domain_error("distribution: weights must be finite and >= 0");
            s += v;
        }
        if (!(s > 0.0)) throw domain_error("distribution: zero total mass");
        for (double& v : raw) v /= s;
        return DiscreteDistribution{grid, std::move(raw)};
    }

    void validate() const {
        if (weights.size() != grid.n) throw domain_error("distribution: weight count differs from grid size");
        double s = 0.0;
        for (double v : weights) {
            if (!(v >= 0.0)) throw domain_error("distribution: negative weight");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-10) throw domain_error("distribution: weights do not sum to one");
    }

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
};

inline void require_same_grid(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (!(p.grid == q.grid) || p.size() != q.size()) throw grid_mismatch_error("distributions live on different grids");
}

// Node masses g(xi_i - theta) * step, renormalized; computed from log densities so far tails
// keep their relative size instead of underflowing, then floored at 1e-300.
inline DiscreteDistribution discretize(const LocationFamily& family, double theta, const Grid& grid) {
    std::vector<double> lg(grid.n);
    double m = -kInf;
    for (std::size_t i = 0; i < grid.n; ++i) {
        lg[i] = family.log_density(theta, grid.node(i));
        m = std::max(m, lg[i]);
    }
    double s = 0.0;
    for (double& v : lg) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : lg) v = std::max(v / s, kLogFloor);
    return DiscreteDistribution::normalized(grid, std::move(lg));
}

// Sum p log(p/q); 0 log 0 = 0; +inf when p charges a node q does not. q may be unnormalized.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw grid_mismatch_error("kl: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < kLogFloor) continue;
        if (!(q[i] > 0.0)) return kInf;
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

inline double kl(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_grid(p, q);
    return std::max(kl(p.weights, q.weights), 0.0);
}

inline double tv(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw grid_mismatch_error("tv: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

inline double tv(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_grid(p, q);
    return std::min(tv(p.weights, q.weights), 1.0);
}

// -log of the integral of sqrt(g(xi - delta) g(xi + delta)).
inline double bhattacharyya_exponent(const LocationFamily& family, double delta, const Grid& grid) {
    if (!(delta >= 0.0)) throw domain_error("bhattacharyya_exponent: delta must be >= 0");
    if (delta == 0.0) return 0.0;
    double bc = integrate(
        [&](double x) { return std::exp(0.5 * (family.log_generator(x - delta) + family.log_generator(x + delta))); },
        grid);
    return std::max(-std::log(bc), 0.0);
}

// argmin_Q KL(p || Q) over the TV ball of radius alpha around `center`.
inline DiscreteDistribution m_projection(const DiscreteDistribution& p, const DiscreteDistribution& center, double alpha) {
    require_same_grid(p, center);
    auto r = tv_clamp_projection(p.weights, center.weights, alpha, ZeroWeight::Free);
    return DiscreteDistribution{p.grid, std::move(r.x)};
}

}  // namespace robust_resolve
