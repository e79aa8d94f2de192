#pragma once
#include <cmath>
#include <vector>

#include "divergences.hpp"
#include "errors.hpp"
#include "families.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace robust_resolve {

inline void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 0.5)) throw domain_error("alpha must lie in [0, 1/2]");
}

// Point where log_ratio(delta, .) crosses log_c, or -inf / +inf when it does not cross inside the grid.
inline double ratio_kink(const LocationFamily& family, double delta, double log_c, const Grid& grid) {
    if (std::isinf(log_c) && log_c < 0) return -kInf;
    if (family.log_ratio(delta, grid.lo) >= log_c) return -kInf;
    if (family.log_ratio(delta, grid.hi) <= log_c) return kInf;
    if (family.kind() == FamilyKind::Normal) {
        double s = family.sigma();
        return std::clamp(s * s * log_c / (2.0 * delta), grid.lo, grid.hi);
    }
    return find_root([&](double x) { return family.log_ratio(delta, x) - log_c; }, grid.lo, grid.hi, 1e-14);
}

// f_delta(c) = integral of (c g(xi + delta) - g(xi - delta))^+ / (1 + c), on precomputed nodes.
class FDelta {
public:
    FDelta(const LocationFamily& family, double delta, const Grid& grid)
        : family_(family), delta_(delta), grid_(grid), gp_(grid.n), gm_(grid.n) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            double x = grid.node(i);
            gp_[i] = family.density(-delta, x);
            gm_[i] = family.density(delta, x);
        }
    }

    double operator()(double c) const {
        if (delta_ == 0.0 || c <= 0.0) return 0.0;
        const double a = ratio_kink(family_, delta_, std::log(c), grid_);
        const double h = grid_.step();
        double s = 0.0;
        std::size_t last = 0;  // last node strictly left of the kink
        bool any = false;
        for (std::size_t i = 0; i < grid_.n; ++i) {
            double x = grid_.node(i);
            if (x >= a) break;
            double v = std::max(c * gp_[i] - gm_[i], 0.0);
            s += (i == 0 ? 0.5 : 1.0) * v * h;
            last = i;
            any = true;
        }
        if (!any) return 0.0;
        const double xl = grid_.node(last);
        const double vl = std::max(c * gp_[last] - gm_[last], 0.0);
        if (std::isinf(a) || last + 1 >= grid_.n) {
            s -= 0.5 * vl * h;  // trailing half weight of the last node
        } else {
            // partial segment [x_last, a]: the integrand vanishes at the kink
            s += -0.5 * vl * h + 0.5 * vl * (a - xl);
        }
        return s / (1.0 + c);
    }

private:
    const LocationFamily& family_;
    double delta_;
    Grid grid_;
    std::vector<double> gp_, gm_;
};

inline double f_delta(const LocationFamily& family, double delta, double c, const Grid& grid) {
    return FDelta(family, delta, grid)(c);
}

struct CPrime {
    double value = 0.0;   // c' in [0, 1]; 1 in the overlap regime
    bool overlap = false; // TV balls around P_{-delta} and P_{delta} intersect
};

// Solves f_delta(c') = alpha on [0, 1].
inline CPrime solve_c_prime(const LocationFamily& family, double delta, double alpha, const Grid& grid) {
    check_alpha(alpha);
    if (!(delta >= 0.0)) throw domain_error("solve_c_prime: delta must be >= 0");
    if (alpha == 0.0) return {0.0, delta == 0.0};
    FDelta f(family, delta, grid);
    if (f(1.0) <= alpha) return {1.0, true};
    double c = find_root([&](double x) { return f(x) - alpha; }, 0.0, 1.0, 1e-15);
    return {c, false};
}

struct LeastFavorablePair {
    double delta = 0.0;
    double alpha = 0.0;
    double c_prime = 0.0;
    bool overlap = false;
    DiscreteDistribution q_minus;
    DiscreteDistribution q_plus;
    DiscreteDistribution p_hat_star;
    double resolution = 0.0;
};

// Piecewise densities of the least-favorable pair at a point.
struct PairDensity {
    const LocationFamily& family;
    double delta, c, a;  // a: left kink; the right kink is -a

    double q_minus(double x) const {
        double gp = family.density(-delta, x), gm = family.density(delta, x);
        if (x <= a) return (gp + gm) / (1.0 + c);
        if (x >= -a) return c * (gp + gm) / (1.0 + c);
        return gp;
    }
    double q_plus(double x) const {
        double gp = family.density(-delta, x), gm = family.density(delta, x);
        if (x <= a) return c * (gp + gm) / (1.0 + c);
        if (x >= -a) return (gp + gm) / (1.0 + c);
        return gm;
    }
};

struct Resolution {
    double value = 0.0;
    double c_prime = 0.0;
    bool overlap = false;
};

// r^alpha(delta) = -log integral sqrt(q- q+), with the kinks inserted as quadrature nodes.
inline Resolution resolution(const LocationFamily& family, double delta, double alpha, const Grid& grid) {
    CPrime cp = solve_c_prime(family, delta, alpha, grid);
    if (cp.overlap) return {0.0, cp.value, true};
    double a = cp.value > 0.0 ? ratio_kink(family, delta, std::log(cp.value), grid) : -kInf;
    PairDensity d{family, delta, cp.value, a};
    std::vector<double> kinks;
    if (std::isfinite(a)) kinks = {a, -a};
    double bc = integrate([&](double x) { return std::sqrt(d.q_minus(x) * d.q_plus(x)); }, grid, kinks);
    double zm = integrate([&](double x) { return d.q_minus(x); }, grid, kinks);
    double zp = integrate([&](double x) { return d.q_plus(x); }, grid, kinks);
    return {std::max(-std::log(bc / std::sqrt(zm * zp)), 0.0), cp.value, false};
}

inline LeastFavorablePair build_pair(const LocationFamily& family, double delta, double alpha, const Grid& grid) {
    CPrime cp = solve_c_prime(family, delta, alpha, grid);
    LeastFavorablePair out;
    out.delta = delta;
    out.alpha = alpha;
    out.c_prime = cp.value;
    out.overlap = cp.overlap;
    if (cp.overlap || delta == 0.0) {
        auto lm = discretize(family, -delta, grid), lp = discretize(family, delta, grid);
        std::vector<double> mix(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) mix[i] = 0.5 * (lm[i] + lp[i]);
        out.q_minus = out.q_plus = out.p_hat_star = DiscreteDistribution::normalized(grid, mix);
        out.resolution = 0.0;
        return out;
    }
    double a = cp.value > 0.0 ? ratio_kink(family, delta, std::log(cp.value), grid) : -kInf;
    PairDensity d{family, delta, cp.value, a};
    std::vector<double> qm(grid.n), qp(grid.n), ps(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        qm[i] = std::max(d.q_minus(x), kLogFloor);
        qp[i] = std::max(d.q_plus(x), kLogFloor);
        ps[i] = std::sqrt(qm[i] * qp[i]);
    }
    out.q_minus = DiscreteDistribution::normalized(grid, qm);
    out.q_plus = DiscreteDistribution::normalized(grid, qp);
    out.p_hat_star = DiscreteDistribution::normalized(grid, ps);
    out.resolution = resolution(family, delta, alpha, grid).value;
    return out;
}

// clip(log c_delta(xi), log c', -log c'): the log of the clipped likelihood ratio.
inline double clipped_log_ratio(const LocationFamily& family, double delta, double c_prime, double xi) {
    double k = c_prime > 0.0 ? -std::log(c_prime) : kInf;
    return std::clamp(family.log_ratio(delta, xi), -k, k);
}

struct CurvePoint {
    double delta = 0.0;
    double resolution = 0.0;
    double c_prime = 0.0;
    bool overlap = false;
};

struct ResolutionCurve {
    std::vector<CurvePoint> points;
    bool monotone = true;
    double worst_drop = 0.0;     // largest decrease between consecutive points
    double worst_drop_at = 0.0;  // delta where it occurs
};

// Flags decreases larger than `slack` between consecutive curve values.
template <class Point, class Value>
void check_monotone(const std::vector<Point>& pts, Value value, double slack, bool& monotone, double& drop,
                    double& at) {
    monotone = true;
    drop = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double d = value(pts[i - 1]) - value(pts[i]);
        if (d > drop) {
            drop = d;
            at = pts[i].delta;
        }
    }
    if (drop > slack) monotone = false;
}

inline ResolutionCurve resolution_curve(const LocationFamily& family, double alpha, const std::vector<double>& deltas,
                                        const Grid& grid) {
    check_alpha(alpha);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] >= 0.0)) throw domain_error("resolution_curve: deltas must be >= 0");
        if (i > 0 && !(deltas[i] > deltas[i - 1])) throw domain_error("resolution_curve: deltas must increase");
    }
    ResolutionCurve c;
    c.points.resize(deltas.size());
    parallel_for(deltas.size(), [&](std::size_t i) {
        Resolution r = resolution(family, deltas[i], alpha, grid);
        c.points[i] = {deltas[i], r.value, r.c_prime, r.overlap};
    });
    check_monotone(c.points, [](const CurvePoint& p) { return p.resolution; }, 1e-9, c.monotone, c.worst_drop,
                   c.worst_drop_at);
    return c;
}

inline ResolutionCurve resolution_curve(const LocationFamily& family, double alpha, const std::vector<double>& deltas) {
    double dmax = deltas.empty() ? 0.0 : deltas.back();
    return resolution_curve(family, alpha, deltas, working_grid(family, dmax));
}

}  // namespace robust_resolve
