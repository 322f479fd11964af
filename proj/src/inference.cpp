#include "hothand/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hothand {

void ThrowSequence::validate() const {
    if (records.empty())
        throw std::invalid_argument("ThrowSequence: empty sequence (" + player + ", " + game + ")");
    double prev = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!std::isfinite(r.t) || r.t < 0.0)
            throw std::invalid_argument("ThrowSequence: negative or non-finite time");
        if (r.t < prev)
            throw std::invalid_argument("ThrowSequence: times must be nondecreasing (" +
                                        player + ", " + game + ")");
        if (r.y != 0 && r.y != 1)
            throw std::invalid_argument("ThrowSequence: outcome must be 0 or 1");
        r.cov.validate();
        prev = r.t;
    }
}

namespace {

Eigen::VectorXd emission_vector(const Eigen::VectorXd& midpoints, const ThrowRecord& rec,
                                const RegressionParams& reg, const PlayerId& player) {
    Eigen::VectorXd e(midpoints.size());
    for (Eigen::Index j = 0; j < midpoints.size(); ++j)
        e[j] = emission_probability(rec.y, midpoints[j], rec.cov, reg, player);
    return e;
}

}  // namespace

double sequence_loglik(const ThrowSequence& seq, const RegressionParams& reg,
                       TransitionCache& cache) {
    seq.validate();
    const StateGrid& grid = cache.grid();

    Eigen::VectorXd alpha =
        discretize_gaussian(grid, stationary_law(cache.params()))
            .cwiseProduct(emission_vector(grid.midpoints, seq.records[0], reg, seq.player));

    double log_scale = 0.0;
    double norm = alpha.sum();
    if (norm <= 0.0) return -std::numeric_limits<double>::infinity();
    log_scale += std::log(norm);
    alpha /= norm;

    for (std::size_t tau = 1; tau < seq.records.size(); ++tau) {
        const double delta = seq.records[tau].t - seq.records[tau - 1].t;
        if (delta == 0.0) {
            // identical timestamps inside a set: identity transition
            alpha = alpha.cwiseProduct(
                emission_vector(grid.midpoints, seq.records[tau], reg, seq.player));
        } else {
            alpha = (alpha.transpose() * cache.matrix(delta)).transpose().cwiseProduct(
                emission_vector(grid.midpoints, seq.records[tau], reg, seq.player));
        }
        norm = alpha.sum();
        if (norm <= 0.0) return -std::numeric_limits<double>::infinity();
        log_scale += std::log(norm);
        alpha /= norm;
    }
    return log_scale;
}

double total_loglik(const std::vector<ThrowSequence>& data, const RegressionParams& reg,
                    TransitionCache& cache) {
    // Kahan summation keeps the total invariant under reordering to ~1e-12.
    double sum = 0.0, comp = 0.0;
    for (const auto& seq : data) {
        double ll;
        try {
            ll = sequence_loglik(seq, reg, cache);
        } catch (const std::exception& e) {
            throw std::runtime_error("total_loglik: sequence (" + seq.player + ", " +
                                     seq.game + "): " + e.what());
        }
        const double y = ll - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double total_loglik(const std::vector<ThrowSequence>& data, const OUParams& ou,
                    const RegressionParams& reg, const StateGrid& grid) {
    TransitionCache cache(grid, ou);
    return total_loglik(data, reg, cache);
}

double benchmark_loglik(const std::vector<ThrowSequence>& data, const RegressionParams& reg) {
    double sum = 0.0, comp = 0.0;
    for (const auto& seq : data) {
        seq.validate();
        for (const auto& rec : seq.records) {
            const double pi = success_probability(0.0, rec.cov, reg, seq.player);
            const double ll = rec.y == 1 ? std::log(pi) : std::log1p(-pi);
            const double y = ll - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    return sum;
}

DecodedSequence viterbi_decode(const ThrowSequence& seq, const RegressionParams& reg,
                               TransitionCache& cache) {
    seq.validate();
    const StateGrid& grid = cache.grid();
    const int m = grid.m;
    const std::size_t T = seq.records.size();
    const double neg_inf = -std::numeric_limits<double>::infinity();

    auto log_vec = [](const Eigen::VectorXd& v) {
        return v.unaryExpr([](double x) {
            return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
        });
    };

    Eigen::VectorXd delta_log =
        log_vec(discretize_gaussian(grid, stationary_law(cache.params()))) +
        log_vec(emission_vector(grid.midpoints, seq.records[0], reg, seq.player));

    Eigen::MatrixXi backptr(T, m);
    backptr.row(0).setZero();

    for (std::size_t tau = 1; tau < T; ++tau) {
        const double gap = seq.records[tau].t - seq.records[tau - 1].t;
        const Eigen::VectorXd e_log =
            log_vec(emission_vector(grid.midpoints, seq.records[tau], reg, seq.player));
        Eigen::VectorXd next(m);
        if (gap == 0.0) {
            next = delta_log + e_log;
            for (int j = 0; j < m; ++j) backptr(tau, j) = j;
        } else {
            const Eigen::MatrixXd& trans = cache.matrix(gap);
            for (int j = 0; j < m; ++j) {
                double best = neg_inf;
                int best_i = 0;
                for (int i = 0; i < m; ++i) {
                    const double p = trans(i, j);
                    const double cand =
                        delta_log[i] + (p > 0.0 ? std::log(p) : neg_inf);
                    if (cand > best) {  // strict: ties keep the lower index
                        best = cand;
                        best_i = i;
                    }
                }
                next[j] = best + e_log[j];
                backptr(tau, j) = best_i;
            }
        }
        delta_log = next;
    }

    int best_j = 0;
    delta_log.maxCoeff(&best_j);

    DecodedSequence out;
    out.player = seq.player;
    out.game = seq.game;
    out.cell_indices.resize(T);
    out.midpoints.resize(T);
    int j = best_j;
    for (std::size_t tau = T; tau-- > 0;) {
        out.cell_indices[tau] = j;
        out.midpoints[tau] = grid.midpoints[j];
        j = backptr(tau, j);
    }
    return out;
}

}  // namespace hothand
