#include <gtest/gtest.h>

#include <cmath>
#include <robust_resolve/radius.hpp>
#include <robust_resolve/simulate.hpp>

using namespace robust_resolve;

namespace {

const LocationFamily kNormal = LocationFamily::normal(1.0);
const std::vector<std::size_t> kDeskN{50, 100, 200, 400};

double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TEST(Sample, Deterministic) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 1.0, 5.0, 0.2);
    EXPECT_EQ(sample(m, 100, 3).points, sample(m, 100, 3).points);
    EXPECT_NE(sample(m, 100, 3).points, sample(m, 100, 4).points);
    auto lf = CorruptionModel::least_favorable_minus(kNormal, 0.0, 1.0, 0.1);
    EXPECT_EQ(sample(lf, 50, 9).points, sample(lf, 50, 9).points);
    EXPECT_THROW(sample(m, 0, 1), domain_error);
}

TEST(Sample, UncorruptedMeanConverges) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 2.5, 5.0, 0.0);
    const std::size_t n = 40000;
    EXPECT_NEAR(estimate(InfluenceFunction::mean(), sample(m, n, 11)), 2.5, 4.0 / std::sqrt(double(n)));
}

TEST(Sample, OutlierFraction) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 0.0, 5.0, 0.3);
    const std::size_t n = 20000;
    auto s = sample(m, n, 12);
    double frac = 0.0;
    for (double x : s.points) frac += x > 2.5 ? 1.0 : 0.0;
    frac /= double(n);
    const double expect = 0.7 * upper_tail(2.5) + 0.3 * (1.0 - upper_tail(2.5));
    EXPECT_NEAR(frac, expect, 3.0 * std::sqrt(expect * (1.0 - expect) / double(n)));
}

TEST(CorruptionModel, WithinTvBudget) {
    for (double a : {0.05, 0.1, 0.3}) {
        auto lf = CorruptionModel::least_favorable_minus(kNormal, 0.7, 2.0, a);
        EXPECT_LE(lf.corruption_tv(), a + 2e-3);
        EXPECT_NO_THROW(lf.validate());
        auto mo = CorruptionModel::mixture_outlier(kNormal, 0.0, 1e4, a);
        EXPECT_NEAR(mo.corruption_tv(), a, 1e-12);
    }
    // a near outlier overlaps the base, so it uses less than the budget
    EXPECT_LT(CorruptionModel::mixture_outlier(kNormal, 0.0, 1.0, 0.2).corruption_tv(), 0.2);
}

TEST(CorruptionModel, CustomValidated) {
    Grid g = working_grid(kNormal, 1.0, 401);
    auto near = CorruptionModel::custom(kNormal, 0.0, discretize(kNormal, 0.05, g), 0.1);
    EXPECT_NO_THROW(near.validate());
    auto far = CorruptionModel::custom(kNormal, 0.0, discretize(kNormal, 3.0, g), 0.1);
    EXPECT_THROW(far.validate(), domain_error);
    EXPECT_THROW(coverage_experiment(far, SetEstimator::median_interval(1.0), {10}, 10, 1), domain_error);
}

TEST(CoverageExperiment, Deterministic) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 0.0, 3.0, 0.1);
    auto a = coverage_experiment(m, SetEstimator::median_interval(0.4), {20, 40}, 300, 5);
    auto b = coverage_experiment(m, SetEstimator::median_interval(0.4), {20, 40}, 300, 5);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].failures, b[i].failures);
        EXPECT_EQ(a[i].rate, b[i].rate);
        EXPECT_EQ(a[i].seed, 5u);
        EXPECT_GE(a[i].rate, 0.0);
        EXPECT_LE(a[i].rate, 1.0);
    }
}

TEST(CoverageExperiment, TiltedMatchesDirect) {
    // small n, where plain Monte Carlo still sees failures
    auto m = CorruptionModel::least_favorable_minus(kNormal, 0.0, 1.0, 0.1);
    auto est = SetEstimator::huber_interval(1.0, 0.1);
    auto d = coverage_experiment(m, est, {4, 8}, 20000, 21, Sampling::Direct);
    auto t = coverage_experiment(m, est, {4, 8}, 20000, 22, Sampling::Tilted);
    for (std::size_t i = 0; i < d.size(); ++i) {
        ASSERT_GT(d[i].failures, 50u);
        EXPECT_TRUE(t[i].tilted);
        EXPECT_NEAR(t[i].rate, d[i].rate, 4.0 * std::hypot(d[i].std_error, t[i].std_error)) << d[i].n;
    }
}

TEST(CoverageExperiment, HuberExponentUnderLeastFavorableAdversary) {
    const double r = 0.43, a = 0.1, delta = 2.2;
    ASSERT_GT(delta, worst_case_radius(kNormal, r, a).value);
    auto m = CorruptionModel::least_favorable_minus(kNormal, 0.0, delta, a);
    auto reps = coverage_experiment(m, SetEstimator::huber_interval(delta, a), kDeskN, 2000, 7, Sampling::Tilted);
    for (std::size_t i = 1; i < reps.size(); ++i) EXPECT_LT(reps[i].rate, reps[i - 1].rate);
    auto slope = failure_slope(reps);
    ASSERT_TRUE(slope.has_value());
    EXPECT_LE(*slope, -0.75 * r);
}

TEST(CoverageExperiment, MedianIntervalBeyondMedianRadius) {
    const double k0 = median_regime_radius(kNormal, 0.1);
    auto m = CorruptionModel::least_favorable_minus(kNormal, 0.0, k0 + 0.3, 0.1);
    auto reps = coverage_experiment(m, SetEstimator::median_interval(k0 + 0.3), kDeskN, 2000, 7);
    EXPECT_LT(reps.back().rate, 0.01);
    EXPECT_LT(reps.back().rate, reps.front().rate);
    EXPECT_FALSE(reps.back().failures > 0 && !reps.back().exponent_estimate.has_value());
}

TEST(CoverageExperiment, MeanBreaksDownHuberDoesNot) {
    auto far = CorruptionModel::mixture_outlier(kNormal, 0.0, 1e4, 0.1);
    auto mean = coverage_experiment(far, SetEstimator::mean_interval(2.2), kDeskN, 2000, 7);
    for (const auto& rep : mean) EXPECT_GT(rep.rate, 0.95) << rep.n;
    auto near = CorruptionModel::mixture_outlier(kNormal, 0.0, 50.0, 0.1);
    auto h_far = coverage_experiment(far, SetEstimator::huber_interval(2.2, 0.1), kDeskN, 2000, 7);
    auto h_near = coverage_experiment(near, SetEstimator::huber_interval(2.2, 0.1), kDeskN, 2000, 7);
    for (std::size_t i = 0; i < h_far.size(); ++i) {
        // both outliers sit on the clipped part of the influence function
        EXPECT_EQ(h_far[i].failures, h_near[i].failures);
    }
}

TEST(CoverageExperiment, MonotoneInWidth) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 0.0, 4.0, 0.2);
    double prev = 1.0, prev_se = 0.0;
    for (double d : {0.3, 0.6, 0.9, 1.2}) {
        auto rep = coverage_experiment(m, SetEstimator::huber_interval(d, 0.2), {30}, 2000, 8).front();
        EXPECT_LE(rep.rate, prev + 2.0 * std::hypot(rep.std_error, prev_se)) << d;
        prev = rep.rate;
        prev_se = rep.std_error;
    }
}

TEST(CoverageExperiment, DroRegionCoverageGrows) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 0.0, 5.0, 0.1);
    auto est = SetEstimator::dro_region(0.0, 0.25, Grid::make(-4.0, 10.0, 29));
    auto reps = coverage_experiment(m, est, {20, 200, 2000}, 300, 9);
    EXPECT_GT(reps.front().rate, reps.back().rate);
    EXPECT_EQ(reps.back().failures, 0u);
    EXPECT_FALSE(reps.back().exponent_estimate.has_value());
}

TEST(CoverageExperiment, RejectsBadInput) {
    auto m = CorruptionModel::mixture_outlier(kNormal, 0.0, 5.0, 0.1);
    EXPECT_THROW(coverage_experiment(m, SetEstimator::median_interval(1.0), {10}, 0, 1), domain_error);
    EXPECT_THROW(coverage_experiment(m, SetEstimator::median_interval(1.0), {0}, 10, 1), domain_error);
    EXPECT_THROW(coverage_experiment(m, SetEstimator::median_interval(1.0), {10}, 10, 1, Sampling::Tilted), domain_error);
}

TEST(FailureSlope, Regression) {
    std::vector<TrialReport> reps(3);
    for (std::size_t i = 0; i < 3; ++i) {
        reps[i].n = 10 * (i + 1);
        reps[i].rate = std::exp(-0.5 * double(reps[i].n) + 1.0);
    }
    EXPECT_NEAR(*failure_slope(reps), -0.5, 1e-12);
    reps[1].rate = reps[2].rate = 0.0;
    EXPECT_FALSE(failure_slope(reps).has_value());
}
