#pragma once

// Independent reference computations for the test suite. Everything here
// deliberately avoids the forward/Viterbi recursions under test: the
// likelihood oracle enumerates every state path, the benchmark oracle is
// the closed-form Bernoulli sum.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "hothand/grid.hpp"
#include "hothand/inference.hpp"
#include "hothand/observation.hpp"
#include "hothand/ou.hpp"

namespace oracle {

using namespace hothand;

// log sum over all m^T paths of init * transitions * emissions
inline double brute_force_loglik(const ThrowSequence& seq, const OUParams& ou,
                                 const RegressionParams& reg, const StateGrid& grid) {
    const int m = grid.m;
    const std::size_t T = seq.records.size();

    const Eigen::VectorXd init = discretize_gaussian(grid, stationary_law(ou));
    std::vector<Eigen::MatrixXd> trans(T);
    for (std::size_t tau = 1; tau < T; ++tau)
        trans[tau] =
            transition_matrix(grid, ou, seq.records[tau].t - seq.records[tau - 1].t).prob;

    std::vector<int> path(T, 0);
    double total = 0.0;
    while (true) {
        double p = init[path[0]] * emission_probability(seq.records[0].y,
                                                        grid.midpoints[path[0]],
                                                        seq.records[0].cov, reg, seq.player);
        for (std::size_t tau = 1; tau < T; ++tau)
            p *= trans[tau](path[tau - 1], path[tau]) *
                 emission_probability(seq.records[tau].y, grid.midpoints[path[tau]],
                                      seq.records[tau].cov, reg, seq.player);
        total += p;

        std::size_t i = 0;
        while (i < T && ++path[i] == m) {
            path[i] = 0;
            ++i;
        }
        if (i == T) break;
    }
    return std::log(total);
}

// exhaustive argmax over all paths; ties resolved toward lexicographically
// smaller index vectors (matching the decoder's lower-index rule)
inline std::vector<int> brute_force_viterbi(const ThrowSequence& seq, const OUParams& ou,
                                            const RegressionParams& reg,
                                            const StateGrid& grid) {
    const int m = grid.m;
    const std::size_t T = seq.records.size();

    const Eigen::VectorXd init = discretize_gaussian(grid, stationary_law(ou));
    std::vector<Eigen::MatrixXd> trans(T);
    for (std::size_t tau = 1; tau < T; ++tau)
        trans[tau] =
            transition_matrix(grid, ou, seq.records[tau].t - seq.records[tau - 1].t).prob;

    std::vector<int> path(T, 0), best_path(T, 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        double lp = std::log(init[path[0]]) +
                    std::log(emission_probability(seq.records[0].y, grid.midpoints[path[0]],
                                                  seq.records[0].cov, reg, seq.player));
        for (std::size_t tau = 1; tau < T; ++tau)
            lp += std::log(trans[tau](path[tau - 1], path[tau])) +
                  std::log(emission_probability(seq.records[tau].y, grid.midpoints[path[tau]],
                                                seq.records[tau].cov, reg, seq.player));
        if (lp > best) {
            best = lp;
            best_path = path;
        }

        std::size_t i = T;
        while (i-- > 0) {
            if (++path[i] < m) break;
            path[i] = 0;
            if (i == 0) return best_path;
        }
    }
}

inline double bernoulli_loglik(const std::vector<ThrowSequence>& data,
                               const RegressionParams& reg) {
    double sum = 0.0;
    for (const auto& seq : data)
        for (const auto& rec : seq.records) {
            const double pi = success_probability(0.0, rec.cov, reg, seq.player);
            sum += rec.y == 1 ? std::log(pi) : std::log(1.0 - pi);
        }
    return sum;
}

// random small instance for the path-enumeration oracles
struct RandomInstance {
    ThrowSequence seq;
    OUParams ou{0.1, 0.1};
    RegressionParams reg;
    StateGrid grid;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int m = 4, int T = 5) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RandomInstance inst;
    inst.ou = OUParams(0.05 + unif(rng), 0.05 + unif(rng));
    inst.grid = build_grid(-2.0, 2.0, m);
    inst.reg.player_intercepts["p"] = 2.0 * unif(rng) - 1.0;
    for (int i = 0; i < 5; ++i) inst.reg.beta[i] = unif(rng) - 0.5;
    inst.seq.player = "p";
    inst.seq.game = "g";
    double t = 0.0;
    for (int tau = 0; tau < T; ++tau) {
        if (tau > 0) t += unif(rng) < 0.3 ? 0.0 : 20.0 * unif(rng);
        ThrowRecord rec;
        rec.t = t;
        rec.y = unif(rng) < 0.6 ? 1 : 0;
        rec.cov.home = unif(rng) < 0.5;
        rec.cov.scorediff = static_cast<int>(std::floor(21.0 * unif(rng))) - 10;
        rec.cov.last30 = unif(rng) < 0.1;
        if (unif(rng) < 0.4) rec.cov.ft2 = 1;
        inst.seq.records.push_back(rec);
    }
    return inst;
}

}  // namespace oracle
