#pragma once
#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace robust_resolve {

enum class FamilyKind { Normal, Logistic, Laplace, CustomTable };

inline std::string to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::Normal: return "normal";
        case FamilyKind::Logistic: return "logistic";
        case FamilyKind::Laplace: return "laplace";
        case FamilyKind::CustomTable: return "custom";
    }
    return "unknown";
}

// Tabulated symmetric log-concave generator. log g is linear between nodes, so the
// density is piecewise exponential and its integral is available in closed form.
struct DensityTable {
    std::vector<double> xi;
    std::vector<double> log_g;
    std::vector<double> cdf_at;  // CDF at each node

    double segment_mass(std::size_t k, double to) const {
        double h = to - xi[k];
        double slope = (log_g[k + 1] - log_g[k]) / (xi[k + 1] - xi[k]);
        double base = std::exp(log_g[k]);
        if (std::abs(slope * h) < 1e-12) return base * h * (1.0 + 0.5 * slope * h);
        return base * std::expm1(slope * h) / slope;
    }
    std::size_t segment(double u) const {
        auto it = std::upper_bound(xi.begin(), xi.end(), u);
        std::size_t k = static_cast<std::size_t>(it - xi.begin());
        return k == 0 ? 0 : std::min(k - 1, xi.size() - 2);
    }
};

class LocationFamily {
public:
    static LocationFamily normal(double sigma = 1.0) { return LocationFamily(FamilyKind::Normal, sigma); }
    static LocationFamily logistic(double sigma = 1.0) { return LocationFamily(FamilyKind::Logistic, sigma); }
    static LocationFamily laplace(double sigma = 1.0) { return LocationFamily(FamilyKind::Laplace, sigma); }

    // Builds a CustomTable family: the table is symmetrized, checked for log-concavity,
    // and renormalized to unit mass.
    static LocationFamily custom_table(const std::vector<double>& xi, const std::vector<double>& log_density) {
        const std::size_t n = xi.size();
        if (n < 3 || log_density.size() != n) throw domain_error("custom table: need >= 3 rows of (xi, log_density)");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(xi[i])) throw domain_error("custom table: non-finite xi");
            if (!std::isfinite(log_density[i]))
                throw domain_error("custom table: density must be strictly positive (finite log density) at every node");
            if (i > 0 && !(xi[i] > xi[i - 1])) throw domain_error("custom table: xi must be strictly increasing");
        }
        const double scale = std::max(std::abs(xi.front()), std::abs(xi.back()));
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(xi[i] + xi[n - 1 - i]) > 1e-9 * scale) throw domain_error("custom table: xi column must be symmetric");

        auto t = std::make_shared<DensityTable>();
        t->xi.resize(n);
        t->log_g.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = n - 1 - i;
            t->xi[i] = i < j ? 0.5 * (xi[i] - xi[j]) : (i == j ? 0.0 : -t->xi[j]);
            double a = log_density[i], b = log_density[j];
            double m = std::max(a, b);
            t->log_g[i] = m + std::log(0.5 * (std::exp(a - m) + std::exp(b - m)));
        }
        for (std::size_t i = 0; i < n; ++i) t->log_g[n - 1 - i] = t->log_g[i];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double s0 = (t->log_g[i] - t->log_g[i - 1]) / (t->xi[i] - t->xi[i - 1]);
            double s1 = (t->log_g[i + 1] - t->log_g[i]) / (t->xi[i + 1] - t->xi[i]);
            if ((s1 - s0) * 0.5 * (t->xi[i + 1] - t->xi[i - 1]) > 1e-9) throw domain_error("custom table: log density is not concave at xi = " + std::to_string(t->xi[i]));
        }
        double mass = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) mass += t->segment_mass(k, t->xi[k + 1]);
        double lm = std::log(mass);
        for (double& v : t->log_g) v -= lm;
        t->cdf_at.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) t->cdf_at[k + 1] = t->cdf_at[k] + t->segment_mass(k, t->xi[k + 1]);

        // scale = standard deviation of the tabulated law
        double var = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double x0 = t->xi[k], x1 = t->xi[k + 1];
            const int sub = 8;
            for (int s = 0; s < sub; ++s) {
                double u0 = x0 + (x1 - x0) * s / sub, u1 = x0 + (x1 - x0) * (s + 1) / sub;
                double g0 = std::exp(t->log_g[k] + (t->log_g[k + 1] - t->log_g[k]) * (u0 - x0) / (x1 - x0));
                double g1 = std::exp(t->log_g[k] + (t->log_g[k + 1] - t->log_g[k]) * (u1 - x0) / (x1 - x0));
                var += 0.5 * (u1 - u0) * (u0 * u0 * g0 + u1 * u1 * g1);
            }
        }
        LocationFamily f(FamilyKind::CustomTable, std::sqrt(var));
        f.table_ = std::move(t);
        return f;
    }

    // Two-column CSV `xi,log_density`; a non-numeric first line is treated as a header.
    static LocationFamily load_custom_table(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw domain_error("custom table: cannot open " + path);
        std::vector<double> xi, lg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ss(line);
            double a, b;
            if (!(ss >> a >> b)) {
                if (xi.empty() && lineno == 1) continue;
                throw domain_error("custom table: cannot parse line " + std::to_string(lineno));
            }
            xi.push_back(a);
            lg.push_back(b);
        }
        return custom_table(xi, lg);
    }

    FamilyKind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    std::string name() const { return to_string(kind_); }

    // Largest |u| where the generator is defined.
    double support_limit() const { return table_ ? table_->xi.back() : kInf; }

    double log_generator(double u) const {
        const double s = sigma_;
        switch (kind_) {
            case FamilyKind::Normal: {
                double z = u / s;
                return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
            }
            case FamilyKind::Logistic: {
                double z = std::abs(u) / s;
                return -z - 2.0 * std::log1p(std::exp(-z)) - std::log(s);
            }
            case FamilyKind::Laplace: return -std::abs(u) / s - std::log(2.0 * s);
            case FamilyKind::CustomTable: {
                const auto& t = *table_;
                double a = std::abs(u);
                if (a > t.xi.back()) throw extrapolation_error("custom table: xi = " + std::to_string(u) + " outside table");
                std::size_t k = t.segment(a);
                double w = (a - t.xi[k]) / (t.xi[k + 1] - t.xi[k]);
                return t.log_g[k] + w * (t.log_g[k + 1] - t.log_g[k]);
            }
        }
        return -kInf;
    }
    double generator(double u) const { return std::exp(log_generator(u)); }

    // g(xi - theta)
    double density(double theta, double xi) const { return generator(xi - theta); }
    double log_density(double theta, double xi) const { return log_generator(xi - theta); }

    // log g(xi - delta) - log g(xi + delta)
    double log_ratio(double delta, double xi) const {
        switch (kind_) {
            case FamilyKind::Normal: return 2.0 * delta * xi / (sigma_ * sigma_);
            case FamilyKind::Laplace: return (std::abs(xi + delta) - std::abs(xi - delta)) / sigma_;
            default: return log_generator(xi - delta) - log_generator(xi + delta);
        }
    }

    double generator_cdf(double u) const {
        const double s = sigma_;
        switch (kind_) {
            case FamilyKind::Normal: return 0.5 * std::erfc(-u / (s * std::numbers::sqrt2));
            case FamilyKind::Logistic: return 1.0 / (1.0 + std::exp(-u / s));
            case FamilyKind::Laplace: return u < 0.0 ? 0.5 * std::exp(u / s) : 1.0 - 0.5 * std::exp(-u / s);
            case FamilyKind::CustomTable: {
                const auto& t = *table_;
                if (u <= t.xi.front()) return 0.0;
                if (u >= t.xi.back()) return 1.0;
                std::size_t k = t.segment(u);
                return std::clamp(t.cdf_at[k] + t.segment_mass(k, u), 0.0, 1.0);
            }
        }
        return 0.0;
    }
    double cdf(double theta, double x) const { return generator_cdf(x - theta); }

    // Draw from the generator (theta = 0).
    template <class Rng>
    double sample_generator(Rng& rng) const {
        switch (kind_) {
            case FamilyKind::Normal: return std::normal_distribution<double>(0.0, sigma_)(rng);
            case FamilyKind::Logistic: {
                double u = open_uniform(rng);
                return sigma_ * std::log(u / (1.0 - u));
            }
            case FamilyKind::Laplace: {
                double u = open_uniform(rng) - 0.5;
                return u < 0.0 ? sigma_ * std::log1p(2.0 * u) : -sigma_ * std::log1p(-2.0 * u);
            }
            case FamilyKind::CustomTable: {
                double u = open_uniform(rng);
                const auto& t = *table_;
                return find_root([&](double x) { return generator_cdf(x) - u; }, t.xi.front(), t.xi.back(), 1e-12);
            }
        }
        return 0.0;
    }

private:
    LocationFamily(FamilyKind k, double sigma) : kind_(k), sigma_(sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw domain_error("family: sigma must be positive and finite");
    }
    template <class Rng>
    static double open_uniform(Rng& rng) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double u;
        do u = U(rng);
        while (u <= 0.0 || u >= 1.0);
        return u;
    }

    FamilyKind kind_;
    double sigma_;
    std::shared_ptr<const DensityTable> table_;
};

// Tail span, in units of sigma, beyond which the generator keeps less than about 1e-10 of its
// mass: 10 for Gaussian tails, 25 for exponential ones.
inline double default_span(const LocationFamily& family) {
    switch (family.kind()) {
        case FamilyKind::Logistic:
        case FamilyKind::Laplace: return 25.0;
        default: return 10.0;
    }
}

// Symmetric working grid [-(delta_max + span*sigma), +(...)]; span <= 0 selects default_span.
inline Grid working_grid(const LocationFamily& family, double delta_max, std::size_t n = 4001, double span = 0.0) {
    if (!(delta_max >= 0.0)) throw domain_error("working_grid: delta_max must be >= 0");
    if (!(span > 0.0)) span = default_span(family);
    double half = delta_max + span * family.sigma();
    double limit = family.support_limit();
    if (std::isfinite(limit)) {
        half = std::min(half, limit - delta_max);
        if (!(half > delta_max)) throw domain_error("working_grid: custom table too narrow for delta " + std::to_string(delta_max));
    }
    return Grid::symmetric(half, n);
}

}  // namespace robust_resolve
