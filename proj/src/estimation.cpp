#include "hothand/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace hothand {

namespace {

constexpr const char* kSlopeNames[5] = {"beta_home", "beta_scorediff", "beta_last30",
                                        "beta_ft2", "beta_ft3"};

std::vector<PlayerId> sorted_players(const std::vector<ThrowSequence>& data) {
    std::set<PlayerId> players;
    for (const auto& seq : data) players.insert(seq.player);
    return {players.begin(), players.end()};
}

long count_throws(const std::vector<ThrowSequence>& data) {
    long n = 0;
    for (const auto& seq : data) n += static_cast<long>(seq.records.size());
    return n;
}

double clamped_logit(double rate) {
    const double eps = 1e-9;
    rate = std::clamp(rate, eps, 1.0 - eps);
    return std::clamp(std::log(rate / (1.0 - rate)), -3.0, 3.0);
}

// Negative mean log-likelihood objective over the packed working-scale
// vector. Keeping the objective per-throw puts gradient tolerances on an
// O(1) scale regardless of dataset size.
class Objective {
  public:
    Objective(const std::vector<ThrowSequence>& data, const StateGrid& grid, ModelKind kind,
              std::vector<std::string> names, const OptimizerConfig& config)
        : data_(data), grid_(grid), kind_(kind), names_(std::move(names)), config_(config) {
        n_ = count_throws(data);
        players_ = sorted_players(data);
        for (std::size_t s = 0; s < data.size(); ++s)
            player_seqs_[data[s].player].push_back(s);
    }

    long n() const { return n_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<PlayerId>& players() const { return players_; }

    double operator()(const Eigen::VectorXd& x) const {
        std::optional<OUParams> ou;
        RegressionParams reg;
        unpack_params(kind_, x, names_, ou, reg);
        if (kind_ == ModelKind::Benchmark)
            return -benchmark_loglik(data_, reg) / static_cast<double>(n_);
        TransitionCache cache(grid_, *ou);
        return -total_loglik(data_, reg, cache) / static_cast<double>(n_);
    }

    // Central finite differences with step fd_step * max(1, |x_i|).
    // Transition matrices depend only on (theta, sigma), so perturbing
    // regression coefficients reuses one cache, and a player-intercept
    // partial only touches that player's sequences (the rest cancels in
    // the central difference).
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        const Eigen::Index dim = x.size();
        Eigen::VectorXd g(dim);

        std::optional<OUParams> center_ou;
        RegressionParams center_reg;
        unpack_params(kind_, x, names_, center_ou, center_reg);
        std::optional<TransitionCache> cache;
        if (kind_ == ModelKind::Ssm) cache.emplace(grid_, *center_ou);

        for (Eigen::Index i = 0; i < dim; ++i) {
            const double h = config_.fd_step * std::max(1.0, std::abs(x[i]));
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const std::string& name = names_[i];
            if (kind_ == ModelKind::Ssm && (name == "log_theta" || name == "log_sigma")) {
                g[i] = ((*this)(xp) - (*this)(xm)) / (2.0 * h);
            } else if (name.rfind("b0:", 0) == 0) {
                const PlayerId player = name.substr(3);
                g[i] = (partial(xp, player, cache) - partial(xm, player, cache)) / (2.0 * h);
            } else {
                g[i] = (eval_with_cache(xp, cache) - eval_with_cache(xm, cache)) / (2.0 * h);
            }
        }
        return g;
    }

    // Hessian evaluation helper: full objective, reusing the center cache
    // when (theta, sigma) are untouched by the perturbation.
    double eval_reusing(const Eigen::VectorXd& x, bool theta_sigma_touched,
                        std::optional<TransitionCache>& cache) const {
        if (kind_ == ModelKind::Ssm && !theta_sigma_touched && cache)
            return eval_with_cache(x, cache);
        return (*this)(x);
    }

  private:
    double eval_with_cache(const Eigen::VectorXd& x,
                           const std::optional<TransitionCache>& cache) const {
        std::optional<OUParams> ou;
        RegressionParams reg;
        unpack_params(kind_, x, names_, ou, reg);
        if (kind_ == ModelKind::Benchmark)
            return -benchmark_loglik(data_, reg) / static_cast<double>(n_);
        return -total_loglik(data_, reg, const_cast<TransitionCache&>(*cache)) /
               static_cast<double>(n_);
    }

    // Sum of the given player's sequence log-likelihoods only (negated,
    // mean scale).
    double partial(const Eigen::VectorXd& x, const PlayerId& player,
                   const std::optional<TransitionCache>& cache) const {
        std::optional<OUParams> ou;
        RegressionParams reg;
        unpack_params(kind_, x, names_, ou, reg);
        double sum = 0.0;
        auto it = player_seqs_.find(player);
        if (it == player_seqs_.end()) return 0.0;
        for (std::size_t s : it->second) {
            if (kind_ == ModelKind::Benchmark)
                sum += benchmark_loglik({data_[s]}, reg);
            else
                sum += sequence_loglik(data_[s], reg, const_cast<TransitionCache&>(*cache));
        }
        return -sum / static_cast<double>(n_);
    }

    const std::vector<ThrowSequence>& data_;
    StateGrid grid_;
    ModelKind kind_;
    std::vector<std::string> names_;
    OptimizerConfig config_;
    long n_ = 0;
    std::vector<PlayerId> players_;
    std::map<PlayerId, std::vector<std::size_t>> player_seqs_;
};

struct LbfgsOutcome {
    Eigen::VectorXd x;
    double f;
    Eigen::VectorXd grad;
    int iterations;
    bool converged;
};

LbfgsOutcome lbfgs_minimize(const Objective& obj, Eigen::VectorXd x,
                            const OptimizerConfig& config) {
    const Eigen::Index dim = x.size();
    const int memory = 10;
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    double f = obj(x);
    Eigen::VectorXd g = obj.gradient(x);

    LbfgsOutcome out{x, f, g, 0, false};
    double prev_f = f;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        out.iterations = iter;
        if (g.cwiseAbs().maxCoeff() < config.tol_grad &&
            (iter == 1 ||
             std::abs(prev_f - f) <= config.tol_rel_loglik * std::max(1.0, std::abs(f)))) {
            out.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd d = -q;
        if (d.dot(g) >= 0.0) d = -g;  // not a descent direction, reset

        // Armijo backtracking
        const double c1 = 1e-4;
        const double slope = g.dot(d);
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = x + step * d;
            f_new = obj(x_new);
            if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no usable step; report current point

        Eigen::VectorXd g_new = obj.gradient(x_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        prev_f = f;
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
        out.x = x;
        out.f = f;
        out.grad = g;

        if (std::abs(prev_f - f) <= config.tol_rel_loglik * std::max(1.0, std::abs(f)) &&
            g.cwiseAbs().maxCoeff() < config.tol_grad) {
            out.converged = true;
            break;
        }
    }
    (void)dim;
    return out;
}

Eigen::VectorXd starting_point(const std::vector<ThrowSequence>& data, ModelKind kind,
                               const std::vector<std::string>& names,
                               const OptimizerConfig& config) {
    std::map<PlayerId, std::pair<long, long>> hits;  // made, total
    for (const auto& seq : data)
        for (const auto& rec : seq.records) {
            auto& h = hits[seq.player];
            h.first += rec.y;
            h.second += 1;
        }

    Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& name = names[i];
        if (name == "log_theta" || name == "log_sigma") {
            x[i] = std::log(0.1);
        } else if (name.rfind("b0:", 0) == 0) {
            const auto& h = hits.at(name.substr(3));
            x[i] = clamped_logit(static_cast<double>(h.first) / h.second);
        } else {
            x[i] = 0.0;
        }
    }
    if (config.start_jitter > 0.0) {
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unif(-config.start_jitter, config.start_jitter);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += unif(rng);
    }
    return x;
}

std::vector<std::string> separation_warnings(const std::vector<ThrowSequence>& data) {
    std::map<PlayerId, std::pair<long, long>> hits;
    for (const auto& seq : data)
        for (const auto& rec : seq.records) {
            auto& h = hits[seq.player];
            h.first += rec.y;
            h.second += 1;
        }
    std::vector<std::string> warnings;
    for (const auto& [player, h] : hits)
        if (h.first == 0 || h.first == h.second)
            warnings.push_back("separation: player '" + player +
                               "' has all-identical outcomes; intercept has no finite maximizer");
    return warnings;
}

FitResult finalize_fit(ModelKind kind, const std::vector<ThrowSequence>& data,
                       const std::vector<std::string>& names, const LbfgsOutcome& opt) {
    FitResult fit;
    fit.kind = kind;
    fit.param_names = names;
    unpack_params(kind, opt.x, names, fit.ou, fit.reg);
    fit.n = count_throws(data);
    fit.k = static_cast<int>(names.size());
    fit.loglik = -opt.f * static_cast<double>(fit.n);
    fit.aic = -2.0 * fit.loglik + 2.0 * fit.k;
    fit.bic = -2.0 * fit.loglik + fit.k * std::log(static_cast<double>(fit.n));
    fit.iterations = opt.iterations;
    fit.converged = opt.converged;
    fit.grad_norm = opt.grad.cwiseAbs().maxCoeff();
    fit.warnings = separation_warnings(data);
    if (kind == ModelKind::Ssm && fit.ou) {
        if (fit.ou->sigma < 1e-3)
            fit.warnings.push_back("boundary: sigma near zero, state process degenerate");
        if (fit.ou->theta > 20.0)
            fit.warnings.push_back("boundary: theta large, state decorrelates between throws");
    }

    // natural-scale estimates in packing order
    fit.estimates.resize(opt.x.size());
    for (Eigen::Index i = 0; i < opt.x.size(); ++i) {
        const std::string& name = names[i];
        fit.estimates[i] =
            (name == "log_theta" || name == "log_sigma") ? std::exp(opt.x[i]) : opt.x[i];
    }
    return fit;
}

}  // namespace

std::vector<std::string> param_names_for(const std::vector<ThrowSequence>& data,
                                         ModelKind kind) {
    std::vector<std::string> names;
    if (kind == ModelKind::Ssm) {
        names.emplace_back("log_theta");
        names.emplace_back("log_sigma");
    }
    for (const auto& player : sorted_players(data)) names.push_back("b0:" + player);
    for (const char* slope : kSlopeNames) names.emplace_back(slope);
    return names;
}

Eigen::VectorXd pack_params(ModelKind kind, const std::optional<OUParams>& ou,
                            const RegressionParams& reg,
                            const std::vector<std::string>& names) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& name = names[i];
        if (name == "log_theta") {
            x[i] = std::log(ou->theta);
        } else if (name == "log_sigma") {
            x[i] = std::log(ou->sigma);
        } else if (name.rfind("b0:", 0) == 0) {
            x[i] = reg.intercept(name.substr(3));
        } else {
            const auto it = std::find(std::begin(kSlopeNames), std::end(kSlopeNames), name);
            if (it == std::end(kSlopeNames))
                throw std::invalid_argument("pack_params: unknown name '" + name + "'");
            x[i] = reg.beta[it - std::begin(kSlopeNames)];
        }
    }
    (void)kind;
    return x;
}

void unpack_params(ModelKind kind, const Eigen::VectorXd& x,
                   const std::vector<std::string>& names, std::optional<OUParams>& ou,
                   RegressionParams& reg) {
    double log_theta = 0.0, log_sigma = 0.0;
    bool has_theta = false, has_sigma = false;
    reg.player_intercepts.clear();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& name = names[i];
        if (name == "log_theta") {
            log_theta = x[i];
            has_theta = true;
        } else if (name == "log_sigma") {
            log_sigma = x[i];
            has_sigma = true;
        } else if (name.rfind("b0:", 0) == 0) {
            reg.player_intercepts[name.substr(3)] = x[i];
        } else {
            const auto it = std::find(std::begin(kSlopeNames), std::end(kSlopeNames), name);
            if (it == std::end(kSlopeNames))
                throw std::invalid_argument("unpack_params: unknown name '" + name + "'");
            reg.beta[it - std::begin(kSlopeNames)] = x[i];
        }
    }
    if (kind == ModelKind::Ssm) {
        if (!has_theta || !has_sigma)
            throw std::invalid_argument("unpack_params: SSM requires log_theta and log_sigma");
        ou.emplace(std::exp(log_theta), std::exp(log_sigma));
    } else {
        ou.reset();
    }
}

FitResult fit_ssm(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                  const OptimizerConfig& config) {
    if (data.empty()) throw std::invalid_argument("fit_ssm: empty dataset");
    for (const auto& seq : data) seq.validate();
    const auto names = param_names_for(data, ModelKind::Ssm);
    Objective obj(data, grid, ModelKind::Ssm, names, config);
    const auto opt = lbfgs_minimize(obj, starting_point(data, ModelKind::Ssm, names, config), config);
    return finalize_fit(ModelKind::Ssm, data, names, opt);
}

FitResult fit_benchmark(const std::vector<ThrowSequence>& data, const OptimizerConfig& config) {
    if (data.empty()) throw std::invalid_argument("fit_benchmark: empty dataset");
    for (const auto& seq : data) seq.validate();
    const auto names = param_names_for(data, ModelKind::Benchmark);
    const StateGrid dummy = build_grid(-1.0, 1.0, 1);
    Objective obj(data, dummy, ModelKind::Benchmark, names, config);
    const auto opt =
        lbfgs_minimize(obj, starting_point(data, ModelKind::Benchmark, names, config), config);
    return finalize_fit(ModelKind::Benchmark, data, names, opt);
}

FitResult fit_ssm(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                  const OptimizerConfig& config, const FitResult& warm_start) {
    if (data.empty()) throw std::invalid_argument("fit_ssm: empty dataset");
    for (const auto& seq : data) seq.validate();
    const auto names = param_names_for(data, ModelKind::Ssm);
    Objective obj(data, grid, ModelKind::Ssm, names, config);
    const Eigen::VectorXd x0 =
        pack_params(ModelKind::Ssm, warm_start.ou, warm_start.reg, names);
    return finalize_fit(ModelKind::Ssm, data, names, lbfgs_minimize(obj, x0, config));
}

FitResult fit_benchmark(const std::vector<ThrowSequence>& data, const OptimizerConfig& config,
                        const FitResult& warm_start) {
    if (data.empty()) throw std::invalid_argument("fit_benchmark: empty dataset");
    for (const auto& seq : data) seq.validate();
    const auto names = param_names_for(data, ModelKind::Benchmark);
    const StateGrid dummy = build_grid(-1.0, 1.0, 1);
    Objective obj(data, dummy, ModelKind::Benchmark, names, config);
    const Eigen::VectorXd x0 =
        pack_params(ModelKind::Benchmark, warm_start.ou, warm_start.reg, names);
    return finalize_fit(ModelKind::Benchmark, data, names, lbfgs_minimize(obj, x0, config));
}

Eigen::VectorXd loglik_gradient(const std::vector<ThrowSequence>& data, const StateGrid& grid,
                                ModelKind kind, const Eigen::VectorXd& x,
                                const std::vector<std::string>& names,
                                const OptimizerConfig& config) {
    Objective obj(data, grid, kind, names, config);
    return -static_cast<double>(obj.n()) * obj.gradient(x);
}

FitResult confidence_intervals(FitResult fit, const std::vector<ThrowSequence>& data,
                               const StateGrid& grid) {
    if (!fit.converged) {
        fit.ci_available = false;
        return fit;
    }
    OptimizerConfig config;
    Objective obj(data, grid, fit.kind, fit.param_names, config);
    const Eigen::VectorXd x0 = pack_params(fit.kind, fit.ou, fit.reg, fit.param_names);
    const Eigen::Index dim = x0.size();
    const double scale = static_cast<double>(fit.n);  // objective is mean NLL

    std::optional<OUParams> center_ou;
    RegressionParams center_reg;
    unpack_params(fit.kind, x0, fit.param_names, center_ou, center_reg);
    std::optional<TransitionCache> cache;
    if (fit.kind == ModelKind::Ssm) cache.emplace(grid, *center_ou);

    auto is_ou_name = [&](Eigen::Index i) {
        return fit.param_names[i] == "log_theta" || fit.param_names[i] == "log_sigma";
    };
    auto eval = [&](const Eigen::VectorXd& x, bool ou_touched) {
        return scale * obj.eval_reusing(x, ou_touched, cache);
    };

    Eigen::VectorXd h(dim);
    for (Eigen::Index i = 0; i < dim; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(x0[i]));

    const double f0 = eval(x0, false);
    Eigen::MatrixXd hess(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[i] += h[i];
        xm[i] -= h[i];
        const bool touched = is_ou_name(i);
        hess(i, i) = (eval(xp, touched) - 2.0 * f0 + eval(xm, touched)) / (h[i] * h[i]);
        for (Eigen::Index j = i + 1; j < dim; ++j) {
            const bool touch_ij = touched || is_ou_name(j);
            Eigen::VectorXd xpp = x0, xpm = x0, xmp = x0, xmm = x0;
            xpp[i] += h[i]; xpp[j] += h[j];
            xpm[i] += h[i]; xpm[j] -= h[j];
            xmp[i] -= h[i]; xmp[j] += h[j];
            xmm[i] -= h[i]; xmm[j] -= h[j];
            const double hij = (eval(xpp, touch_ij) - eval(xpm, touch_ij) -
                                eval(xmp, touch_ij) + eval(xmm, touch_ij)) /
                               (4.0 * h[i] * h[j]);
            hess(i, j) = hij;
            hess(j, i) = hij;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    if (es.info() != Eigen::Success ||
        es.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) {
        fit.ci_available = false;
        fit.warnings.push_back("CI unavailable: Hessian not positive definite");
        return fit;
    }

    const Eigen::MatrixXd cov = es.eigenvectors() *
                                es.eigenvalues().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
    fit.ci.clear();
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double se = std::sqrt(cov(i, i));
        double lo = x0[i] - 1.96 * se;
        double hi = x0[i] + 1.96 * se;
        std::string name = fit.param_names[i];
        if (name == "log_theta" || name == "log_sigma") {
            lo = std::exp(lo);
            hi = std::exp(hi);
            name = name.substr(4);  // strip "log_"
        }
        fit.ci[name] = {lo, hi};
    }
    fit.ci_available = true;
    return fit;
}

ComparisonReport compare(const FitResult& ssm, const FitResult& benchmark) {
    if (ssm.n != benchmark.n)
        throw std::invalid_argument("compare: fits were computed on different sample sizes");
    ComparisonReport rep;
    rep.n = ssm.n;
    rep.delta_aic = benchmark.aic - ssm.aic;
    rep.delta_bic = benchmark.bic - ssm.bic;
    rep.preferred_aic = rep.delta_aic > 0.0 ? "ssm" : "benchmark";
    rep.preferred_bic = rep.delta_bic > 0.0 ? "ssm" : "benchmark";
    return rep;
}

}  // namespace hothand
