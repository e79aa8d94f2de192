#pragma once
#include <algorithm>
#include <vector>

#include "almost_sure.hpp"
#include "families.hpp"
#include "parallel.hpp"
#include "radius.hpp"

namespace robust_resolve {

struct PhaseOptions {
    RadiusOptions radius;
    AlmostSureOptions almost_sure = AlmostSureOptions::sweep();
    double fine_step = 0.1;      // r' curve spacing up to fine_limit (units of sigma)
    double fine_limit = 4.0;
    double coarse_step = 0.5;    // spacing beyond fine_limit
    bool with_almost_sure = true;
    std::size_t refine_steps = 6;  // bisection steps on r' inside the bracketing curve cell
};

// Delta nodes used for the sampled r' curve of a phase row.
inline std::vector<double> phase_delta_nodes(const LocationFamily& family, const PhaseOptions& opt) {
    const double s = family.sigma();
    const double cap = opt.almost_sure.delta_cap * s;
    std::vector<double> d;
    for (double x = opt.fine_step * s; x <= opt.fine_limit * s + 1e-12; x += opt.fine_step * s) d.push_back(x);
    for (double x = d.empty() ? opt.coarse_step * s : d.back() + opt.coarse_step * s; x <= cap + 1e-12;
         x += opt.coarse_step * s)
        d.push_back(x);
    return d;
}

// Inverts the sampled r' curve at level r, then bisects on r' inside the bracketing cell.
inline Radius refine_crossing(const LocationFamily& family, double alpha, const std::vector<AlmostSureCurvePoint>& curve,
                              double r, const PhaseOptions& opt) {
    auto k = invert_sampled_curve(curve, [](const AlmostSureCurvePoint& c) { return c.r_prime; }, r);
    if (k.infinite() || opt.refine_steps == 0) return k;
    std::size_t i = 0;
    while (i + 1 < curve.size() && curve[i + 1].r_prime <= r) ++i;
    if (i + 1 >= curve.size()) return k;
    double lo = curve[i].delta, hi = curve[i + 1].delta;
    for (std::size_t s = 0; s < opt.refine_steps; ++s) {
        double mid = 0.5 * (lo + hi);
        if (almost_sure_resolution(family, mid, alpha, opt.almost_sure).r_prime <= r)
            lo = mid;
        else
            hi = mid;
    }
    double mid = 0.5 * (lo + hi);
    return Radius{mid, mid};
}

// Phase grid over (r, alpha), row-major in alpha. kappa comes from worst_case_radius per cell;
// kappa' inverts one sampled r' curve per alpha row, extended only as far as the row needs.
inline std::vector<PhasePoint> phase_diagram(const LocationFamily& family, const std::vector<double>& r_grid,
                                             const std::vector<double>& alpha_grid, const PhaseOptions& opt = {}) {
    std::vector<PhasePoint> out(r_grid.size() * alpha_grid.size());
    const auto nodes = phase_delta_nodes(family, opt);
    parallel_for(alpha_grid.size(), [&](std::size_t ia) {
        const double alpha = alpha_grid[ia];
        const double thr = rbar_prime(alpha) - opt.almost_sure.eps_thr;
        double need = -1.0;
        for (double r : r_grid)
            if (r < thr) need = std::max(need, r);
        std::vector<AlmostSureCurvePoint> curve;
        if (opt.with_almost_sure && need >= 0.0) {
            curve.push_back({0.0, 0.0, 0.0, 0.0});
            for (double d : nodes) {
                auto s = almost_sure_resolution(family, d, alpha, opt.almost_sure);
                curve.push_back({d, s.r_prime, s.theta_witness, s.gap});
                if (s.r_prime > need + 1e-3) break;
            }
        }
        for (std::size_t ir = 0; ir < r_grid.size(); ++ir) {
            PhasePoint& p = out[ia * r_grid.size() + ir];
            p.r = r_grid[ir];
            p.alpha = alpha;
            p.kappa = worst_case_radius(family, p.r, alpha, opt.radius);
            if (!opt.with_almost_sure || p.r >= thr)
                p.kappa_prime = Radius::unbounded();
            else
                p.kappa_prime = refine_crossing(family, alpha, curve, p.r + 1e-8, opt);
            p.regime = classify(p.r, alpha, p.kappa, p.kappa_prime);
        }
    });
    return out;
}

}  // namespace robust_resolve
