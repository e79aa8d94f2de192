#pragma once
#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "numerics.hpp"

namespace robust_resolve {

struct EmpiricalSample {
    std::vector<double> points;
    std::vector<double> weights;  // empty means uniform

    EmpiricalSample() = default;
    explicit EmpiricalSample(std::vector<double> pts, std::vector<double> w = {})
        : points(std::move(pts)), weights(std::move(w)) {
        validate();
    }

    void validate() const {
        if (points.empty()) throw domain_error("sample: need at least one point");
        for (double x : points)
            if (!std::isfinite(x)) throw domain_error("sample: non-finite observation");
        if (weights.empty()) return;
        if (weights.size() != points.size()) throw domain_error("sample: weight count differs from point count");
        double s = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw domain_error("sample: negative weight");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-10) throw domain_error("sample: weights must sum to one");
    }

    std::size_t size() const { return points.size(); }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 / static_cast<double>(points.size()) : weights[i]; }

    EmpiricalSample shifted(double t) const {
        EmpiricalSample s = *this;
        for (double& x : s.points) x += t;
        return s;
    }
};

// One observation per line, optional second column with a weight. Weights are renormalized.
inline EmpiricalSample load_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("sample: cannot open " + path);
    std::vector<double> pts, w;
    std::string line;
    std::size_t lineno = 0;
    bool weighted = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x;
        if (!(ss >> x)) {
            if (pts.empty() && lineno == 1) continue;  // header
            throw domain_error("sample: cannot parse line " + std::to_string(lineno));
        }
        double v;
        bool has_w = static_cast<bool>(ss >> v);
        if (pts.empty()) weighted = has_w;
        if (has_w != weighted) throw domain_error("sample: inconsistent weight column at line " + std::to_string(lineno));
        pts.push_back(x);
        if (has_w) w.push_back(v);
    }
    if (weighted) {
        double s = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(s > 0.0)) throw domain_error("sample: weights sum to zero");
        for (double& v : w) v /= s;
    }
    return EmpiricalSample(std::move(pts), std::move(w));
}

enum class PhiKind { Mean, Sign, GeneralizedMean, Huber };

inline std::string to_string(PhiKind k) {
    switch (k) {
        case PhiKind::Mean: return "mean";
        case PhiKind::Sign: return "median";
        case PhiKind::GeneralizedMean: return "generalized-mean";
        case PhiKind::Huber: return "huber";
    }
    return "unknown";
}

struct InfluenceFunction {
    PhiKind kind = PhiKind::Mean;
    double delta = 0.0;
    double k = kInf;  // Huber clip level
    std::shared_ptr<const LocationFamily> family;

    static InfluenceFunction mean() { return {PhiKind::Mean, 0.0, kInf, nullptr}; }
    static InfluenceFunction sign() { return {PhiKind::Sign, 0.0, kInf, nullptr}; }
    static InfluenceFunction generalized_mean(const LocationFamily& f, double delta) {
        if (!(delta > 0.0)) throw domain_error("generalized mean: delta must be > 0");
        return {PhiKind::GeneralizedMean, delta, kInf, std::make_shared<const LocationFamily>(f)};
    }
    static InfluenceFunction huber(const LocationFamily& f, double delta, double k) {
        if (!(delta > 0.0)) throw domain_error("huber: delta must be > 0");
        if (!(k >= 0.0)) throw domain_error("huber: clip level must be >= 0");
        return {PhiKind::Huber, delta, k, std::make_shared<const LocationFamily>(f)};
    }
};

inline double phi_eval(const InfluenceFunction& phi, double xi) {
    switch (phi.kind) {
        case PhiKind::Mean: return xi;
        case PhiKind::Sign: return xi > 0.0 ? 1.0 : (xi < 0.0 ? -1.0 : 0.0);
        case PhiKind::GeneralizedMean: return 0.5 * phi.family->log_ratio(phi.delta, xi);
        case PhiKind::Huber: return std::clamp(phi.family->log_ratio(phi.delta, xi), -phi.k, phi.k);
    }
    return 0.0;
}

// theta -> sum_i w_i phi(xi_i - theta); nonincreasing.
inline double estimating_equation(const InfluenceFunction& phi, const EmpiricalSample& data, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) s += data.weight(i) * phi_eval(phi, data.points[i] - theta);
    return s;
}

namespace detail {

// Largest theta in [a, b] with pred(theta) true, assuming pred(a) true and pred(b) false and pred
// monotone; bisects to floating-point resolution.
template <class Pred>
double boundary(Pred pred, double a, double b) {
    while (true) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) return a;
        if (pred(m))
            a = m;
        else
            b = m;
    }
}

}  // namespace detail

// Root of the estimating equation; the midpoint of the root set when it is an interval.
inline double estimate(const InfluenceFunction& phi, const EmpiricalSample& data) {
    data.validate();
    if (phi.kind == PhiKind::Mean) {
        double s = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) s += data.weight(i) * data.points[i];
        return s;
    }
    auto [mn, mx] = std::minmax_element(data.points.begin(), data.points.end());
    double lo = *mn - 1.0, hi = *mx + 1.0;
    auto psi = [&](double t) { return estimating_equation(phi, data, t); };
    double width = hi - lo;
    for (int expand = 0; !(psi(lo) > 0.0 && psi(hi) < 0.0); ++expand) {
        if (expand > 60) throw degenerate_sample_error("estimate: estimating equation has no sign change");
        width *= 2.0;
        lo = *mn - width;
        hi = *mx + width;
    }
    // t1 = sup{psi > 0}, t2 = inf{psi < 0}
    double t1 = detail::boundary([&](double t) { return psi(t) > 0.0; }, lo, hi);
    double t2 = detail::boundary([&](double t) { return !(psi(t) < 0.0); }, lo, hi);
    return 0.5 * (t1 + t2);
}

struct HuberChoice {
    InfluenceFunction phi;
    double c_prime = 0.0;
    std::optional<std::string> warning;
};

// Huber influence function with k = -log c'(delta, alpha). alpha = 0 gives the unclipped
// generalized mean; the overlap regime falls back to the median.
inline HuberChoice huber_from_alpha(const LocationFamily& family, double delta, double alpha, const Grid& grid) {
    CPrime cp = solve_c_prime(family, delta, alpha, grid);
    if (cp.overlap)
        return {InfluenceFunction::sign(), cp.value,
                "delta is inside the overlap regime (c' = 1): the Huber estimator degenerates to the median"};
    if (cp.value == 0.0) return {InfluenceFunction::generalized_mean(family, delta), 0.0, std::nullopt};
    return {InfluenceFunction::huber(family, delta, -std::log(cp.value)), cp.value, std::nullopt};
}

inline HuberChoice huber_from_alpha(const LocationFamily& family, double delta, double alpha) {
    return huber_from_alpha(family, delta, alpha, working_grid(family, delta));
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

inline Interval confidence_interval(const InfluenceFunction& phi, const EmpiricalSample& data, double delta) {
    if (!(delta >= 0.0)) throw domain_error("confidence_interval: half-width must be >= 0");
    double e = estimate(phi, data);
    return {e - delta, e + delta};
}

}  // namespace robust_resolve
