#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "hothand/ou.hpp"

namespace hothand {

// Uniform partition of [lower, upper] into m cells; midpoints carry the
// representative state value of each cell.
struct StateGrid {
    double lower;
    double upper;
    int m;
    Eigen::VectorXd boundaries;  // m+1, strictly increasing
    Eigen::VectorXd midpoints;   // m
};

inline StateGrid build_grid(double lower, double upper, int m) {
    if (m < 1) throw std::invalid_argument("build_grid: m must be >= 1");
    if (!(lower < upper)) throw std::invalid_argument("build_grid: lower must be < upper");
    StateGrid g;
    g.lower = lower;
    g.upper = upper;
    g.m = m;
    g.boundaries = Eigen::VectorXd::LinSpaced(m + 1, lower, upper);
    g.midpoints = 0.5 * (g.boundaries.head(m) + g.boundaries.tail(m));
    return g;
}

inline StateGrid default_grid() { return build_grid(-2.0, 2.0, 100); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Cell masses of a Gaussian over the grid, with tail mass folded into the
// boundary cells so the vector always sums to 1. A point mass (variance 0)
// lands in the cell containing the mean; ties on a boundary go to the
// higher cell.
inline Eigen::VectorXd discretize_gaussian(const StateGrid& grid, const GaussianLaw& law) {
    if (!std::isfinite(law.mean))
        throw std::invalid_argument("discretize_gaussian: non-finite mean");
    if (law.variance < 0.0)
        throw std::invalid_argument("discretize_gaussian: negative variance");

    const int m = grid.m;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    if (law.variance == 0.0) {
        int cell;
        if (law.mean < grid.boundaries[0]) {
            cell = 0;
        } else if (law.mean >= grid.boundaries[m]) {
            cell = m - 1;
        } else {
            const double width = (grid.upper - grid.lower) / m;
            cell = static_cast<int>(std::floor((law.mean - grid.lower) / width));
            if (cell >= m) cell = m - 1;
            // exact boundary hits belong to the higher cell; floor already
            // does that, guard only against rounding just below a boundary
            if (cell + 1 <= m - 1 && law.mean >= grid.boundaries[cell + 1]) ++cell;
        }
        p[cell] = 1.0;
        return p;
    }

    const double sd = std::sqrt(law.variance);
    Eigen::VectorXd cdf(m + 1);
    for (int i = 0; i <= m; ++i)
        cdf[i] = normal_cdf((grid.boundaries[i] - law.mean) / sd);
    p = cdf.tail(m) - cdf.head(m);
    p[0] += cdf[0];             // mass below lower
    p[m - 1] += 1.0 - cdf[m];   // mass above upper
    const double total = p.sum();
    if (total > 0.0) p /= total;
    return p;
}

// Row-stochastic cell-to-cell transition probabilities for an elapsed gap;
// delta = 0 is the identity.
struct TransitionMatrix {
    Eigen::MatrixXd prob;  // m x m, rows sum to 1
    double delta;
};

inline TransitionMatrix transition_matrix(const StateGrid& grid, const OUParams& params,
                                          double delta) {
    if (!(delta >= 0.0))
        throw std::invalid_argument("transition_matrix: negative delta");
    const int m = grid.m;
    TransitionMatrix tm;
    tm.delta = delta;
    if (delta == 0.0) {
        tm.prob = Eigen::MatrixXd::Identity(m, m);
        return tm;
    }
    tm.prob.resize(m, m);
    for (int i = 0; i < m; ++i)
        tm.prob.row(i) = discretize_gaussian(grid, conditional_law(params, grid.midpoints[i], delta)).transpose();
    return tm;
}

// Memoizes transition matrices per gap for one fixed (theta, sigma). Gaps
// recur heavily (free-throw sets share timestamps), so this dominates the
// saving in a likelihood evaluation. Single-owner use; not thread-safe.
class TransitionCache {
  public:
    TransitionCache(const StateGrid& grid, const OUParams& params)
        : grid_(grid), params_(params) {}

    const Eigen::MatrixXd& matrix(double delta) {
        const std::int64_t key = quantize(delta);
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(key, transition_matrix(grid_, params_, delta).prob).first;
        return it->second;
    }

    const StateGrid& grid() const { return grid_; }
    const OUParams& params() const { return params_; }
    std::size_t size() const { return cache_.size(); }

  private:
    // Game-clock times carry two decimals, so gaps are exact multiples of
    // 0.01 min; quantizing at 1e-6 min merges only numerically identical
    // gaps.
    static std::int64_t quantize(double delta) {
        return static_cast<std::int64_t>(std::llround(delta * 1e6));
    }

    StateGrid grid_;
    OUParams params_;
    std::map<std::int64_t, Eigen::MatrixXd> cache_;
};

}  // namespace hothand
