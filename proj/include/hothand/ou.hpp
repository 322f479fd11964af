#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace hothand {

// Mean-reverting diffusion dS = theta*(mu - S) dt + sigma dB with mu fixed
// at 0. Time is measured in minutes throughout.
struct OUParams {
    double theta;  // mean-reversion rate, per minute
    double sigma;  // diffusion, per sqrt(minute)

    OUParams(double theta_, double sigma_) : theta(theta_), sigma(sigma_) {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("OUParams: theta must be positive and finite");
        // sigma = 0 is admitted as the noiseless limit (degenerate state)
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("OUParams: sigma must be nonnegative and finite");
    }

    double stationary_variance() const { return sigma * sigma / (2.0 * theta); }
};

struct GaussianLaw {
    double mean;
    double variance;  // 0 allowed (point mass)
};

// Law of S_{t+delta} given S_t = s_prev. delta = 0 gives a point mass at
// s_prev.
inline GaussianLaw conditional_law(const OUParams& p, double s_prev, double delta) {
    if (!std::isfinite(s_prev))
        throw std::invalid_argument("conditional_law: non-finite s_prev");
    if (!(delta >= 0.0))
        throw std::invalid_argument("conditional_law: negative delta");
    const double decay = std::exp(-p.theta * delta);
    const double mean = decay * s_prev;
    const double variance = p.stationary_variance() * (1.0 - decay * decay);
    return {mean, variance};
}

inline GaussianLaw stationary_law(const OUParams& p) {
    return {0.0, p.stationary_variance()};
}

struct PathPoint {
    double t;
    double state;
};

// Fixed-step Euler-Maruyama path from s0 over [0, t_end]. Deterministic for
// a fixed seed; ceil(t_end/dt)+1 points, the last step truncated to land on
// t_end.
inline std::vector<PathPoint> simulate_trajectory(const OUParams& p, double s0,
                                                  double t_end, double dt,
                                                  std::uint64_t seed) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("simulate_trajectory: dt and t_end must be positive");
    if (dt > t_end)
        throw std::invalid_argument("simulate_trajectory: dt exceeds t_end");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    std::vector<PathPoint> path;
    path.reserve(n_steps + 1);
    double s = s0;
    path.push_back({0.0, s});
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t_prev = (k - 1) * dt;
        const double t_next = std::min(k * dt, t_end);
        const double h = t_next - t_prev;
        s += p.theta * (0.0 - s) * h + p.sigma * std::sqrt(h) * gauss(rng);
        path.push_back({t_next, s});
    }
    return path;
}

}  // namespace hothand
