#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hothand/grid.hpp"
#include "hothand/observation.hpp"
#include "hothand/ou.hpp"

namespace hothand {

struct ThrowRecord {
    double t;  // minutes on the game clock
    int y;     // 0/1
    Covariates cov;
};

// One player-game's ordered throws. Times are nondecreasing; ties occur
// within free-throw sets.
struct ThrowSequence {
    PlayerId player;
    std::string game;
    std::vector<ThrowRecord> records;

    void validate() const;
};

struct DecodedSequence {
    PlayerId player;
    std::string game;
    std::vector<int> cell_indices;
    std::vector<double> midpoints;
};

// Log-likelihood of one sequence via the scaled forward recursion over the
// discretized state space. The cache must be built for the (theta, sigma)
// in use.
double sequence_loglik(const ThrowSequence& seq, const RegressionParams& reg,
                       TransitionCache& cache);

inline double sequence_loglik(const ThrowSequence& seq, const OUParams& ou,
                              const RegressionParams& reg, const StateGrid& grid) {
    TransitionCache cache(grid, ou);
    return sequence_loglik(seq, reg, cache);
}

// Sum of per-sequence log-likelihoods, accumulated in dataset order with
// compensated summation so the result does not depend on grouping.
double total_loglik(const std::vector<ThrowSequence>& data, const OUParams& ou,
                    const RegressionParams& reg, const StateGrid& grid);

double total_loglik(const std::vector<ThrowSequence>& data, const RegressionParams& reg,
                    TransitionCache& cache);

// State-free Bernoulli log-likelihood (the logistic-regression benchmark,
// state identically 0).
double benchmark_loglik(const std::vector<ThrowSequence>& data, const RegressionParams& reg);

// Jointly most probable cell path, log-space Viterbi; ties break toward the
// lower cell index.
DecodedSequence viterbi_decode(const ThrowSequence& seq, const RegressionParams& reg,
                               TransitionCache& cache);

inline DecodedSequence viterbi_decode(const ThrowSequence& seq, const OUParams& ou,
                                      const RegressionParams& reg, const StateGrid& grid) {
    TransitionCache cache(grid, ou);
    return viterbi_decode(seq, reg, cache);
}

}  // namespace hothand
