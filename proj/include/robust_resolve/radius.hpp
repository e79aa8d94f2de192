#pragma once
#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "numerics.hpp"

namespace robust_resolve {

struct Radius {
    double value = 0.0;                 // +inf when unbounded
    std::optional<double> achieved_at;  // delta at which the resolution curve reaches r

    bool infinite() const { return std::isinf(value); }
    static Radius unbounded() { return Radius{kInf, std::nullopt}; }
};

struct RadiusOptions {
    std::size_t grid_n = 4001;
    double grid_span = 0.0;          // grid half-width beyond delta in units of sigma; 0: family default
    double delta_cap = 20.0;         // in units of sigma; reaching it means +inf
    double eps_thr = 1e-4;           // r within eps_thr of the threshold counts as unreachable
    double scan_step = 0.25;         // coarse monotonicity scan, in units of sigma
    double tol = 1e-10;              // bisection tolerance on delta
};

// Threshold above which no worst-case radius is finite.
inline double rbar(double alpha) {
    check_alpha(alpha);
    if (alpha == 0.0) return kInf;
    return 0.5 * std::log(1.0 / (2.0 * alpha)) + 0.5 * std::log(1.0 / (2.0 * (1.0 - alpha)));
}

// kappa_{0,alpha}: largest delta whose TV balls still overlap, i.e. the root of f_delta(1) = alpha.
inline double median_regime_radius(const LocationFamily& family, double alpha, const Grid& grid) {
    check_alpha(alpha);
    if (alpha >= 0.5) throw domain_error("median_regime_radius: alpha must be < 1/2");
    if (alpha == 0.0) return 0.0;
    auto excess = [&](double d) { return f_delta(family, d, 1.0, grid) - alpha; };
    double hi = family.sigma();
    const double limit = 0.5 * grid.hi;
    while (excess(hi) < 0.0) {
        if (hi >= limit) throw no_root_error("median_regime_radius: grid too narrow to reach f_delta(1) = alpha");
        hi = std::min(2.0 * hi, limit);
    }
    return find_root(excess, 0.0, hi, 1e-12);
}

inline double median_regime_radius(const LocationFamily& family, double alpha) {
    return median_regime_radius(family, alpha, working_grid(family, 20.0 * family.sigma()));
}

// kappa_{r,alpha} = sup{delta : r^alpha(delta) <= r}, by a monotonicity-checked scan and bisection.
inline Radius worst_case_radius(const LocationFamily& family, double r, double alpha, const RadiusOptions& opt = {}) {
    check_alpha(alpha);
    if (!(r >= 0.0)) throw domain_error("worst_case_radius: r must be >= 0");
    if (r >= rbar(alpha) - opt.eps_thr) return Radius::unbounded();
    const double s = family.sigma();
    const double cap = opt.delta_cap * s;
    const Grid grid = working_grid(family, cap, opt.grid_n, opt.grid_span);
    const double k0 = median_regime_radius(family, alpha, grid);
    if (r == 0.0) return Radius{k0, k0};

    auto res = [&](double d) { return resolution(family, d, alpha, grid).value; };
    double prev_d = k0, prev_v = 0.0;
    for (double d = k0 + opt.scan_step * s;; d += opt.scan_step * s) {
        d = std::min(d, cap);
        double v = res(d);
        if (v < prev_v - 1e-9)
            throw monotonicity_error("worst_case_radius: resolution curve decreases near delta = " + std::to_string(d), d,
                                     prev_v - v);
        if (v > r) {
            double k = find_root([&](double x) { return res(x) - r; }, prev_d, d, opt.tol);
            return Radius{k, k};
        }
        if (d >= cap) return Radius::unbounded();
        prev_d = d;
        prev_v = v;
    }
}

enum class Regime { MeanRegime, MedianRegime, FiniteBoth, AlmostSureOnly, Unreachable };

inline std::string to_string(Regime g) {
    switch (g) {
        case Regime::MeanRegime: return "MeanRegime";
        case Regime::MedianRegime: return "MedianRegime";
        case Regime::FiniteBoth: return "FiniteBoth";
        case Regime::AlmostSureOnly: return "AlmostSureOnly";
        case Regime::Unreachable: return "Unreachable";
    }
    return "Unknown";
}

inline Regime classify(double r, double alpha, const Radius& kappa, const Radius& kappa_prime) {
    if (alpha == 0.0 && r > 0.0) return Regime::MeanRegime;
    if (r == 0.0) return Regime::MedianRegime;
    if (kappa_prime.infinite()) return Regime::Unreachable;
    if (kappa.infinite()) return Regime::AlmostSureOnly;
    return Regime::FiniteBoth;
}

struct PhasePoint {
    double r = 0.0;
    double alpha = 0.0;
    Radius kappa;
    Radius kappa_prime;
    Regime regime = Regime::FiniteBoth;
};

}  // namespace robust_resolve
