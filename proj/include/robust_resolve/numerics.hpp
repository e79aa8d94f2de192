#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace robust_resolve {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLogFloor = 1e-300;

inline double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

// Uniform grid with n nodes on [lo, hi].
struct Grid {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t n = 3;

    static Grid make(double lo, double hi, std::size_t n) {
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
            throw domain_error("grid: need finite lo < hi");
        if (n < 3) throw domain_error("grid: need at least 3 nodes");
        return Grid{lo, hi, n};
    }
    static Grid symmetric(double half_width, std::size_t n) { return make(-half_width, half_width, n); }

    double step() const { return (hi - lo) / static_cast<double>(n - 1); }
    bool is_symmetric() const { return lo == -hi; }

    // Symmetric grids return exactly mirrored nodes: node(n-1-i) == -node(i).
    double node(std::size_t i) const {
        if (2 * i <= n - 1) return lo + static_cast<double>(i) * step();
        double back = static_cast<double>(n - 1 - i) * step();
        return is_symmetric() ? -(lo + back) : hi - back;
    }
    std::vector<double> nodes() const {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = node(i);
        return x;
    }
    // Index of the node closest to x, clamped to the grid.
    std::size_t nearest(double x) const {
        double t = std::round((x - lo) / step());
        if (!(t > 0.0)) return 0;
        if (t >= static_cast<double>(n - 1)) return n - 1;
        return static_cast<std::size_t>(t);
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

// Composite trapezoid over arbitrary increasing abscissae.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

template <class F>
double integrate(F&& f, const Grid& grid) {
    const double h = grid.step();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        double v = f(grid.node(i));
        if (!std::isfinite(v))
            throw bad_integrand_error("integrate: non-finite integrand at node " + std::to_string(grid.node(i)));
        s += (i == 0 || i + 1 == grid.n) ? 0.5 * v : v;
    }
    return s * h;
}

// Trapezoid on the grid nodes merged with extra breakpoints (kinks) inside [lo, hi].
template <class F>
double integrate(F&& f, const Grid& grid, std::vector<double> breakpoints) {
    std::vector<double> x = grid.nodes();
    for (double b : breakpoints)
        if (b > grid.lo && b < grid.hi) x.push_back(b);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = f(x[i]);
        if (!std::isfinite(y[i]))
            throw bad_integrand_error("integrate: non-finite integrand at " + std::to_string(x[i]));
    }
    return trapezoid(x, y);
}

// Bisection for a monotone f with a sign change on [a, b]. Tolerates flat stretches.
template <class F>
double find_root(F&& f, double a, double b, double tol = 1e-10) {
    if (a > b) std::swap(a, b);
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb) || std::isnan(fa) || std::isnan(fb))
        throw no_root_error("find_root: no sign change on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    const bool a_negative = std::signbit(fa);
    while (true) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) return m;
        double fm = f(m);
        if (std::abs(fm) <= tol && b - a <= std::max(tol, 1e3 * tol * std::abs(m))) return m;
        if (fm == 0.0) return m;
        if (std::signbit(fm) == a_negative)
            a = m;
        else
            b = m;
        if (b - a <= tol) return 0.5 * (a + b);
    }
}

struct ScalarMin {
    double x;
    double fx;
};

// Golden-section search for a minimum of f on [a, b]; endpoints are also compared.
template <class F>
ScalarMin golden_section_minimize(F&& f, double a, double b, double tol = 1e-6) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

// ---------------------------------------------------------------------------
// Feasible sets {x : x >= 0, x <= cap, sum x = 1, (1/2)|x - center|_1 <= alpha}.

struct TvBall {
    std::vector<double> center;
    double alpha = 0.0;
    std::vector<double> cap;  // empty: no upper caps
};

namespace detail {

inline double shrink(double v, double nu) {
    if (v > nu) return v - nu;
    if (v < -nu) return v + nu;
    return 0.0;
}

inline void capped_point(const std::vector<double>& y, const TvBall& ball, double mu, double nu,
                         std::vector<double>& q) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        double a = ball.center[i];
        double v = a + shrink(y[i] - mu - a, nu);
        double ub = ball.cap.empty() ? kInf : ball.cap[i];
        q[i] = std::clamp(v, 0.0, ub);
    }
}

inline double solve_mu(const std::vector<double>& y, const TvBall& ball, double nu, std::vector<double>& q) {
    double ymin = *std::min_element(y.begin(), y.end());
    double ymax = *std::max_element(y.begin(), y.end());
    double lo = ymin - nu - 2.0, hi = ymax + nu + 1.0;
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        capped_point(y, ball, m, nu, q);
        double s = std::accumulate(q.begin(), q.end(), 0.0);
        if (s > 1.0)
            lo = m;
        else
            hi = m;
    }
    double mu = 0.5 * (lo + hi);
    capped_point(y, ball, mu, nu, q);
    return mu;
}

inline double half_l1(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return 0.5 * s;
}

}  // namespace detail

inline void check_ball(const TvBall& ball, std::size_t n) {
    if (ball.center.size() != n) throw domain_error("tv ball: dimension mismatch");
    if (!(ball.alpha >= 0.0)) throw infeasible_error("tv ball: negative radius");
    if (!ball.cap.empty()) {
        if (ball.cap.size() != n) throw domain_error("tv ball: cap dimension mismatch");
        double cs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (ball.center[i] > ball.cap[i] + 1e-15) throw infeasible_error("tv ball: center violates caps");
            cs += ball.cap[i];
        }
        if (cs < 1.0 - 1e-12) throw infeasible_error("tv ball: caps sum below one");
    }
}

// Exact Euclidean projection of y onto a TvBall, via the KKT form
// x_i = clip(center_i + shrink(y_i - mu - center_i, nu), 0, cap_i) with nested bisection in (nu, mu).
inline std::vector<double> project_tv_ball(const std::vector<double>& y, const TvBall& ball) {
    const std::size_t n = y.size();
    check_ball(ball, n);
    std::vector<double> q(n);
    detail::solve_mu(y, ball, 0.0, q);
    if (detail::half_l1(q, ball.center) <= ball.alpha) return q;
    double span = 0.0;
    for (std::size_t i = 0; i < n; ++i) span = std::max(span, std::abs(y[i]) + ball.center[i]);
    double lo = 0.0, hi = 2.0 * span + 1.0;
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        detail::solve_mu(y, ball, m, q);
        if (detail::half_l1(q, ball.center) > ball.alpha)
            lo = m;
        else
            hi = m;
    }
    detail::solve_mu(y, ball, hi, q);
    return q;
}

struct SolverOptions {
    double tol = 1e-7;
    std::size_t max_iter = 100000;
};

struct PolytopeSolution {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    double gap = 0.0;  // certified upper bound on optimum - value
};

// max of g.s over one TvBall. Mass moves greedily from the lowest-gradient nodes (down to zero)
// to the highest-gradient nodes (up to their caps) while that gains and the budget alpha lasts.
inline double tv_ball_linear_max(const std::vector<double>& g, const TvBall& ball) {
    const std::size_t n = g.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return g[i] < g[j]; });
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += g[i] * ball.center[i];
    double budget = ball.alpha;
    std::size_t lo = 0, hi = n;
    double take = n > 0 ? ball.center[order[0]] : 0.0;
    double room = 0.0;
    auto refill = [&]() {
        std::size_t i = order[hi - 1];
        room = ball.cap.empty() ? kInf : ball.cap[i] - ball.center[i];
    };
    if (n > 0) refill();
    while (budget > 0.0 && lo < hi - 1) {
        double gain = g[order[hi - 1]] - g[order[lo]];
        if (gain <= 0.0) break;
        double m = std::min({budget, take, room});
        value += m * gain;
        budget -= m;
        take -= m;
        room -= m;
        if (take <= 0.0) {
            ++lo;
            take = ball.center[order[lo]];
        }
        if (room <= 0.0) {
            --hi;
            refill();
        }
    }
    return value;
}

// Maximizes a concave objective over a product of TvBalls (x is the concatenation of the blocks).
// Accelerated projected gradient with backtracking and adaptive restart. Stops once an upper bound
// on optimum - value drops below opt.tol: the smaller of the Frank-Wolfe gap max_s grad.(s - x)
// and the gradient-mapping norm times the feasible-set diameter.
inline PolytopeSolution maximize_concave_on_polytope(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
    const std::vector<TvBall>& blocks, std::vector<double> x0, const SolverOptions& opt = {}) {
    std::size_t total = 0;
    for (const auto& b : blocks) {
        check_ball(b, b.center.size());
        total += b.center.size();
    }
    if (x0.empty()) {
        for (const auto& b : blocks) x0.insert(x0.end(), b.center.begin(), b.center.end());
    }
    if (x0.size() != total) throw domain_error("maximize_concave_on_polytope: start point dimension");

    auto project = [&](const std::vector<double>& v) {
        std::vector<double> out(total);
        std::size_t off = 0;
        for (const auto& b : blocks) {
            std::vector<double> part(v.begin() + off, v.begin() + off + b.center.size());
            auto p = project_tv_ball(part, b);
            std::copy(p.begin(), p.end(), out.begin() + off);
            off += b.center.size();
        }
        return out;
    };
    auto step_to = [&](const std::vector<double>& from, const std::vector<double>& g, double s) {
        std::vector<double> v(total);
        for (std::size_t i = 0; i < total; ++i) v[i] = from[i] + s * g[i];
        return project(v);
    };

    std::vector<double> x = project(x0);
    double fx = objective(x);
    if (!std::isfinite(fx)) {
        std::vector<double> c;
        for (const auto& b : blocks) c.insert(c.end(), b.center.begin(), b.center.end());
        x = c;
        fx = objective(x);
        if (!std::isfinite(fx)) throw infeasible_error("maximize_concave_on_polytope: objective not finite at start");
    }
    auto fw_gap = [&](const std::vector<double>& at) {
        std::vector<double> g = gradient(at);
        double total_gap = 0.0;
        std::size_t off = 0;
        for (const auto& b : blocks) {
            std::vector<double> part(g.begin() + off, g.begin() + off + b.center.size());
            double here = 0.0;
            for (std::size_t i = 0; i < part.size(); ++i) here += part[i] * at[off + i];
            total_gap += tv_ball_linear_max(part, b) - here;
            off += b.center.size();
        }
        return std::max(total_gap, 0.0);
    };
    std::vector<double> y = x;
    double fy = fx;
    double t = 1.0;
    double s = 1.0;
    double gap = kInf;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        std::vector<double> gy = gradient(y);
        // The feasible set has diameter <= 2; longer steps only cost projection accuracy.
        double gmax = 0.0;
        for (double v : gy) gmax = std::max(gmax, std::abs(v));
        if (gmax > 0.0) s = std::min(s, 1.0 / gmax);
        const double s_entry = s;
        std::vector<double> z;
        double fz = -kInf;
        double sq = 0.0;
        while (true) {
            z = step_to(y, gy, s);
            fz = objective(z);
            double lin = 0.0;
            sq = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                double d = z[i] - y[i];
                lin += gy[i] * d;
                sq += d * d;
            }
            if (std::isfinite(fz) && fz >= fy + lin - sq / (2.0 * s) - 1e-15 * std::abs(fy)) break;
            s *= 0.5;
            if (s < 1e-300) throw unconverged_error("maximize_concave_on_polytope: step underflow", x, gap);
        }
        if (fz < fx && y != x) {
            // objective went down: drop momentum and retry from x with the step it came in with
            y = x;
            fy = fx;
            t = 1.0;
            s = s_entry;
            continue;
        }
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        std::vector<double> x_prev = std::move(x);
        x = std::move(z);
        fx = fz;
        y.resize(total);
        for (std::size_t i = 0; i < total; ++i) y[i] = x[i] + ((t - 1.0) / t_next) * (x[i] - x_prev[i]);
        y = project(y);
        fy = objective(y);
        if (!std::isfinite(fy) || fy < fx) {
            y = x;
            fy = fx;
            t_next = 1.0;
        }
        t = t_next;
        s *= 1.25;
        // Gradient-mapping bound: f* - f(z) <= |(z - y) / s| * diam, diam^2 = 2 * blocks.
        const double gm_bound = std::sqrt(sq) / s * std::sqrt(2.0 * static_cast<double>(blocks.size()));
        gap = std::min(fw_gap(x), gm_bound);
        if (gap <= opt.tol) return {x, fx, it, gap};
    }
    throw unconverged_error("maximize_concave_on_polytope: iteration limit reached", x, gap);
}

inline PolytopeSolution maximize_concave_on_polytope(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient, const TvBall& ball,
    std::vector<double> x0 = {}, const SolverOptions& opt = {}) {
    return maximize_concave_on_polytope(objective, gradient, std::vector<TvBall>{ball}, std::move(x0), opt);
}

// ---------------------------------------------------------------------------
// KL projections onto a TV ball in closed form.
//
// Both argmin_Q KL(w || Q) and argmin_P KL(P || w) over {sum = 1, (1/2)|. - a|_1 <= alpha} have the
// clamp solution x_i = min(max(a_i, lo * w_i), hi * w_i), where lo and hi spend exactly alpha of
// added and removed mass. The two programs differ only at nodes with w_i = 0.

enum class ZeroWeight {
    Free,      // argmin_Q KL(w || Q): mass there is free to remove
    Forbidden  // argmin_P KL(P || w): mass there must be removed entirely
};

struct ClampProjection {
    std::vector<double> x;
    bool feasible = true;
    bool active = false;  // TV constraint binding
};

inline ClampProjection tv_clamp_projection(const std::vector<double>& w, const std::vector<double>& a, double alpha,
                                           ZeroWeight zero) {
    const std::size_t n = w.size();
    if (a.size() != n) throw domain_error("tv_clamp_projection: dimension mismatch");
    if (!(alpha >= 0.0)) throw infeasible_error("tv_clamp_projection: negative radius");
    double W = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw domain_error("tv_clamp_projection: weights must be finite and >= 0");
        W += v;
    }
    if (!(W > 0.0)) throw domain_error("tv_clamp_projection: zero total weight");

    ClampProjection out;
    out.x.resize(n);
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += std::abs(w[i] / W - a[i]);
    if (0.5 * dist <= alpha) {
        for (std::size_t i = 0; i < n; ++i) out.x[i] = w[i] / W;
        return out;
    }
    out.active = true;

    double zero_mass = 0.0;
    std::vector<std::size_t> pos;
    pos.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0)
            pos.push_back(i);
        else
            zero_mass += a[i];
    }
    if (zero == ZeroWeight::Forbidden && zero_mass > alpha * (1.0 + 1e-12)) {
        out.feasible = false;
        return out;
    }
    std::vector<std::size_t> order = pos;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i] * w[j] < a[j] * w[i]; });

    // lo: sum over w>0 of (lo w_i - a_i)^+ = alpha. Ascending breakpoints a_i / w_i.
    double lo = 0.0;
    {
        double ws = 0.0, as = 0.0;
        bool found = false;
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::size_t i = order[k];
            ws += w[i];
            as += a[i];
            double next = (k + 1 < order.size()) ? a[order[k + 1]] / w[order[k + 1]] : kInf;
            double u = (alpha + as) / ws;
            if (u <= next) {
                lo = u;
                found = true;
                break;
            }
        }
        if (!found) lo = (alpha + as) / ws;
    }
    // hi: sum_i (a_i - hi w_i)^+ = alpha, nodes with w = 0 always contribute a_i.
    double hi = kInf;
    if (zero_mass < alpha) {
        double ws = 0.0, as = 0.0;
        for (std::size_t k = order.size(); k-- > 0;) {
            std::size_t i = order[k];
            ws += w[i];
            as += a[i];
            double next = k > 0 ? a[order[k - 1]] / w[order[k - 1]] : 0.0;
            double v = (as + zero_mass - alpha) / ws;
            if (v >= next) {
                hi = v;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0) {
            double v = std::max(a[i], lo * w[i]);
            out.x[i] = std::isinf(hi) ? v : std::min(v, hi * w[i]);
        } else if (std::isinf(hi) && zero_mass > 0.0) {
            out.x[i] = zero == ZeroWeight::Forbidden ? 0.0 : a[i] * (1.0 - alpha / zero_mass);
        } else {
            out.x[i] = 0.0;
        }
    }
    double s = std::accumulate(out.x.begin(), out.x.end(), 0.0);
    for (double& v : out.x) v /= s;
    return out;
}

}  // namespace robust_resolve
