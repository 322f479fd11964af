#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace hothand {

using PlayerId = std::string;

struct Covariates {
    int home = 0;       // 0/1
    int scorediff = 0;  // shooter's team minus opponent
    int last30 = 0;     // 0/1, last 30 seconds of a quarter
    int ft2 = 0;        // second throw of a set
    int ft3 = 0;        // third throw of a set

    void validate() const {
        auto binary = [](int v) { return v == 0 || v == 1; };
        if (!binary(home) || !binary(last30) || !binary(ft2) || !binary(ft3))
            throw std::invalid_argument("Covariates: indicator fields must be 0 or 1");
        if (ft2 == 1 && ft3 == 1)
            throw std::invalid_argument("Covariates: ft2 and ft3 cannot both be 1");
        if (std::abs(scorediff) > 100)
            throw std::invalid_argument("Covariates: |scorediff| > 100");
    }
};

// Player-specific intercepts plus slopes shared across players, ordered
// (home, scorediff, last30, ft2, ft3).
struct RegressionParams {
    std::map<PlayerId, double> player_intercepts;
    Eigen::Matrix<double, 5, 1> beta = Eigen::Matrix<double, 5, 1>::Zero();

    double intercept(const PlayerId& player) const {
        auto it = player_intercepts.find(player);
        if (it == player_intercepts.end())
            throw std::invalid_argument("RegressionParams: unknown player '" + player + "'");
        return it->second;
    }
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double linear_predictor(double state, const Covariates& cov,
                               const RegressionParams& reg, const PlayerId& player) {
    return state + reg.intercept(player) + reg.beta[0] * cov.home +
           reg.beta[1] * cov.scorediff + reg.beta[2] * cov.last30 +
           reg.beta[3] * cov.ft2 + reg.beta[4] * cov.ft3;
}

// Clamping the predictor keeps log-emissions finite under extreme optimizer
// proposals; +-35 is far outside any fitted region.
inline double success_probability(double state, const Covariates& cov,
                                  const RegressionParams& reg, const PlayerId& player) {
    double eta = linear_predictor(state, cov, reg, player);
    eta = std::clamp(eta, -35.0, 35.0);
    return logistic(eta);
}

inline double emission_probability(int y, double state, const Covariates& cov,
                                   const RegressionParams& reg, const PlayerId& player) {
    if (y != 0 && y != 1)
        throw std::invalid_argument("emission_probability: y must be 0 or 1");
    const double pi = success_probability(state, cov, reg, player);
    return y == 1 ? pi : 1.0 - pi;
}

}  // namespace hothand
