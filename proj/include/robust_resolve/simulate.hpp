#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "divergences.hpp"
#include "dro_set.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "parallel.hpp"

namespace robust_resolve {

// Inverse-CDF sampler for a gridded distribution: picks a node, then a uniform point in its cell,
// so the draw has the piecewise-constant density weight_i / step.
class GridSampler {
public:
    explicit GridSampler(DiscreteDistribution d) : dist_(std::move(d)), cum_(dist_.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < dist_.size(); ++i) cum_[i] = (s += dist_.weights[i]);
        for (double& c : cum_) c /= s;
    }
    template <class Rng>
    std::size_t draw_index(Rng& rng) const {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cum_.begin());
        while (i < cum_.size() && dist_.weights[std::min(i, cum_.size() - 1)] == 0.0) ++i;
        return std::min(i, cum_.size() - 1);
    }
    template <class Rng>
    double jitter(std::size_t i, Rng& rng) const {
        double h = dist_.grid.step();
        return dist_.grid.node(i) + std::uniform_real_distribution<double>(-0.5 * h, 0.5 * h)(rng);
    }
    const DiscreteDistribution& distribution() const { return dist_; }

private:
    DiscreteDistribution dist_;
    std::vector<double> cum_;
};

enum class CorruptionKind { MixtureOutlier, LeastFavorableMinus, Custom };

class CorruptionModel {
public:
    // (1 - alpha) P_theta* + alpha P_{theta* + offset}
    static CorruptionModel mixture_outlier(const LocationFamily& f, double theta_star, double offset, double alpha) {
        check_alpha(alpha);
        CorruptionModel m(CorruptionKind::MixtureOutlier, f, theta_star);
        m.offset_ = offset;
        m.alpha_ = alpha;
        return m;
    }
    // The least-favorable q-* for (delta, alpha), moved so that its uncorrupted base sits at theta*.
    static CorruptionModel least_favorable_minus(const LocationFamily& f, double theta_star, double delta, double alpha,
                                                 std::size_t grid_n = 4001) {
        check_alpha(alpha);
        CorruptionModel m(CorruptionKind::LeastFavorableMinus, f, theta_star);
        m.delta_ = delta;
        m.alpha_ = alpha;
        auto pair = build_pair(f, delta, alpha, working_grid(f, delta, grid_n));
        m.base_ = std::make_shared<const DiscreteDistribution>(discretize(f, -delta, pair.q_minus.grid));
        m.grid_ = std::make_shared<const GridSampler>(pair.q_minus);
        m.tilt_ = std::make_shared<const GridSampler>(pair.p_hat_star);
        m.shift_ = theta_star + delta;
        return m;
    }
    // Any gridded distribution, in absolute coordinates.
    static CorruptionModel custom(const LocationFamily& f, double theta_star, const DiscreteDistribution& d,
                                  double alpha) {
        check_alpha(alpha);
        d.validate();
        CorruptionModel m(CorruptionKind::Custom, f, theta_star);
        m.alpha_ = alpha;
        m.base_ = std::make_shared<const DiscreteDistribution>(discretize(f, theta_star, d.grid));
        m.grid_ = std::make_shared<const GridSampler>(d);
        return m;
    }

    CorruptionKind kind() const { return kind_; }
    const LocationFamily& family() const { return family_; }
    double theta_star() const { return theta_star_; }
    double alpha() const { return alpha_; }
    double delta() const { return delta_; }
    double offset() const { return offset_; }
    bool has_tilt() const { return static_cast<bool>(tilt_); }

    // TV distance between the corrupted law and P_theta* (on the grid for gridded kinds).
    double corruption_tv() const {
        if (kind_ == CorruptionKind::MixtureOutlier) {
            double far = 2.0 * family_.generator_cdf(0.5 * std::abs(offset_)) - 1.0;
            return alpha_ * far;
        }
        return tv(grid_->distribution(), *base_);
    }
    void validate() const {
        if (corruption_tv() > alpha_ + 2e-3) throw domain_error("corruption model: TV to P_theta* exceeds alpha");
    }

    template <class Rng>
    double draw(Rng& rng) const {
        switch (kind_) {
            case CorruptionKind::MixtureOutlier: {
                bool outlier = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < alpha_;
                return theta_star_ + (outlier ? offset_ : 0.0) + family_.sample_generator(rng);
            }
            case CorruptionKind::LeastFavorableMinus: return shift_ + grid_->jitter(grid_->draw_index(rng), rng);
            case CorruptionKind::Custom: return grid_->jitter(grid_->draw_index(rng), rng);
        }
        return 0.0;
    }

    // Draw from the tilted proposal p_hat* and return the log likelihood ratio q-* / p_hat*.
    template <class Rng>
    double draw_tilted(Rng& rng, double& log_weight) const {
        if (!tilt_) throw domain_error("corruption model: no tilted proposal for this kind");
        std::size_t i = tilt_->draw_index(rng);
        log_weight += std::log(grid_->distribution().weights[i] / tilt_->distribution().weights[i]);
        return shift_ + tilt_->jitter(i, rng);
    }

private:
    CorruptionModel(CorruptionKind k, const LocationFamily& f, double theta_star)
        : kind_(k), family_(f), theta_star_(theta_star) {}

    CorruptionKind kind_;
    LocationFamily family_;
    double theta_star_ = 0.0;
    double alpha_ = 0.0;
    double delta_ = 0.0;
    double offset_ = 0.0;
    double shift_ = 0.0;
    std::shared_ptr<const DiscreteDistribution> base_;
    std::shared_ptr<const GridSampler> grid_;
    std::shared_ptr<const GridSampler> tilt_;
};

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

inline EmpiricalSample sample(const CorruptionModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw domain_error("sample: n must be >= 1");
    auto rng = substream(seed, 0);
    std::vector<double> x(n);
    for (double& v : x) v = model.draw(rng);
    return EmpiricalSample(std::move(x));
}

enum class SetEstimatorKind { HuberInterval, MedianInterval, MeanInterval, DroRegion };

struct SetEstimator {
    SetEstimatorKind kind = SetEstimatorKind::HuberInterval;
    double delta = 0.0;  // interval half-width (and Huber design separation)
    double alpha = 0.0;  // Huber design corruption / DRO ball radius
    double r = 0.0;      // DRO resolution threshold
    Grid grid;           // DRO binning grid

    static SetEstimator huber_interval(double delta, double alpha) { return {SetEstimatorKind::HuberInterval, delta, alpha, 0.0, {}}; }
    static SetEstimator median_interval(double delta) { return {SetEstimatorKind::MedianInterval, delta, 0.0, 0.0, {}}; }
    static SetEstimator mean_interval(double delta) { return {SetEstimatorKind::MeanInterval, delta, 0.0, 0.0, {}}; }
    static SetEstimator dro_region(double r, double alpha, const Grid& grid) { return {SetEstimatorKind::DroRegion, 0.0, alpha, r, grid}; }

    std::string name() const {
        switch (kind) {
            case SetEstimatorKind::HuberInterval: return "huber";
            case SetEstimatorKind::MedianInterval: return "median";
            case SetEstimatorKind::MeanInterval: return "mean";
            case SetEstimatorKind::DroRegion: return "dro";
        }
        return "unknown";
    }
};

enum class Sampling {
    Direct,  // plain Monte Carlo from the corrupted law
    Tilted   // importance sampling from p_hat* (least-favorable models only)
};

struct TrialReport {
    std::string estimator;
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t failures = 0;  // trials whose set missed theta* (under the proposal when tilted)
    double rate = 0.0;         // failure probability estimate
    std::optional<double> exponent_estimate;  // -log(rate)/n; empty when no failure was seen
    std::uint64_t seed = 0;
    bool tilted = false;
    double std_error = 0.0;
};

// Returns whether the set built from `data` contains theta*.
class CoverageCheck {
public:
    CoverageCheck(const SetEstimator& est, const CorruptionModel& model) : est_(est), theta_(model.theta_star()), family_(model.family()) {
        switch (est.kind) {
            case SetEstimatorKind::HuberInterval: phi_ = huber_from_alpha(family_, est.delta, est.alpha).phi; break;
            case SetEstimatorKind::MedianInterval: phi_ = InfluenceFunction::sign(); break;
            case SetEstimatorKind::MeanInterval: phi_ = InfluenceFunction::mean(); break;
            case SetEstimatorKind::DroRegion: break;
        }
    }
    bool covers(const EmpiricalSample& data) const {
        if (est_.kind == SetEstimatorKind::DroRegion)
            return dro_resolution(bin_sample(data, est_.grid), family_, theta_, est_.alpha) <= est_.r;
        return confidence_interval(phi_, data, est_.delta).contains(theta_);
    }

private:
    SetEstimator est_;
    double theta_;
    LocationFamily family_;
    InfluenceFunction phi_;
};

inline std::vector<TrialReport> coverage_experiment(const CorruptionModel& model, const SetEstimator& est,
                                                    const std::vector<std::size_t>& n_list, std::size_t trials,
                                                    std::uint64_t seed, Sampling sampling = Sampling::Direct) {
    if (trials == 0) throw domain_error("coverage_experiment: trials must be >= 1");
    if (sampling == Sampling::Tilted && !model.has_tilt())
        throw domain_error("coverage_experiment: tilted sampling needs a least-favorable model");
    model.validate();
    const CoverageCheck check(est, model);
    std::vector<TrialReport> out;
    for (std::size_t n : n_list) {
        if (n == 0) throw domain_error("coverage_experiment: n must be >= 1");
        std::vector<double> contrib(trials, 0.0);
        std::vector<char> failed(trials, 0);
        parallel_for(trials, [&](std::size_t t) {
            auto rng = substream(seed, n, t);
            std::vector<double> x(n);
            double logw = 0.0;
            for (double& v : x) v = sampling == Sampling::Tilted ? model.draw_tilted(rng, logw) : model.draw(rng);
            bool miss = !check.covers(EmpiricalSample(std::move(x)));
            failed[t] = miss;
            contrib[t] = miss ? std::exp(logw) : 0.0;
        });
        TrialReport rep;
        rep.estimator = est.name();
        rep.n = n;
        rep.trials = trials;
        rep.seed = seed;
        rep.tilted = sampling == Sampling::Tilted;
        double mean = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            rep.failures += failed[t] ? 1 : 0;
            mean += contrib[t];
        }
        mean /= static_cast<double>(trials);
        double var = 0.0;
        for (double c : contrib) var += (c - mean) * (c - mean);
        var /= static_cast<double>(trials > 1 ? trials - 1 : 1);
        rep.rate = mean;
        rep.std_error = std::sqrt(var / static_cast<double>(trials));
        if (mean > 0.0) rep.exponent_estimate = std::max(0.0, -std::log(mean) / static_cast<double>(n));
        out.push_back(rep);
    }
    return out;
}

// Least-squares slope of log(rate) against n; empty when fewer than two reports have rate > 0.
inline std::optional<double> failure_slope(const std::vector<TrialReport>& reports) {
    std::vector<double> xs, ys;
    for (const auto& r : reports)
        if (r.rate > 0.0) {
            xs.push_back(static_cast<double>(r.n));
            ys.push_back(std::log(r.rate));
        }
    if (xs.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace robust_resolve
