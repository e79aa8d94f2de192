#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace robust_resolve {

// Input outside a documented domain (alpha outside [0, 1/2], bad grid, table too narrow, ...).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Density table queried outside its support.
struct extrapolation_error : domain_error {
    using domain_error::domain_error;
};

// Two distributions that should share a grid do not.
struct grid_mismatch_error : domain_error {
    using domain_error::domain_error;
};

// Non-finite integrand value at a quadrature node.
struct bad_integrand_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_root_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_sample_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A curve that inversion relies on turned out non-monotone.
struct monotonicity_error : std::runtime_error {
    double at;
    double drop;
    monotonicity_error(const std::string& what, double at_, double drop_)
        : std::runtime_error(what), at(at_), drop(drop_) {}
};

struct unconverged_error : std::runtime_error {
    std::vector<double> last_iterate;
    double gap;
    unconverged_error(const std::string& what, std::vector<double> x, double gap_)
        : std::runtime_error(what), last_iterate(std::move(x)), gap(gap_) {}
};

}  // namespace robust_resolve
