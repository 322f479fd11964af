// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Heavier studies (parameter recovery, model selection) run here
// rather than in the unit suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hothand/data_io.hpp"
#include "hothand/estimation.hpp"
#include "hothand/inference.hpp"
#include "oracles.hpp"

using namespace hothand;
namespace fs = std::filesystem;

#ifndef CLI_PATH
#define CLI_PATH "./hothand"
#endif
#ifndef FIXTURE_DIR
#define FIXTURE_DIR "."
#endif

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// --- criterion 1: worked-example fidelity -------------------------------
void criterion_1() {
    const OUParams p(0.042, 0.101);
    const auto a = conditional_law(p, -0.092, 1.65);
    const auto b = conditional_law(p, -0.084, 12.22);
    const bool ok = std::abs(a.mean - (-0.086)) < 5e-3 && std::abs(a.variance - 0.016) < 5e-3 &&
                    std::abs(b.mean - (-0.050)) < 5e-3 && std::abs(b.variance - 0.078) < 5e-3;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%.4f, %.4f), (%.4f, %.4f)", a.mean, a.variance, b.mean,
                  b.variance);
    report(1, "worked-example conditional moments", ok, buf);
}

// --- criterion 2: stationary standard deviation -------------------------
void criterion_2() {
    const double sd = std::sqrt(stationary_law(OUParams(0.042, 0.101)).variance);
    report(2, "stationary sd 0.348", std::abs(sd - 0.348) < 1e-3,
           "sd = " + std::to_string(sd));
}

// --- criterion 3: forward algorithm vs exhaustive enumeration -----------
void criterion_3() {
    std::mt19937_64 rng(30303);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        auto inst = oracle::random_instance(rng, 4, 5);
        const double expected = oracle::brute_force_loglik(inst.seq, inst.ou, inst.reg, inst.grid);
        const double got = sequence_loglik(inst.seq, inst.ou, inst.reg, inst.grid);
        worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
    report(3, "forward algorithm matches path enumeration", worst < 1e-10,
           "worst relative error " + std::to_string(worst));
}

// --- criterion 4: viterbi vs exhaustive argmax --------------------------
void criterion_4() {
    std::mt19937_64 rng(40404);
    int mismatches = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto inst = oracle::random_instance(rng, 4, 5);
        const auto expected = oracle::brute_force_viterbi(inst.seq, inst.ou, inst.reg, inst.grid);
        const auto got = viterbi_decode(inst.seq, inst.ou, inst.reg, inst.grid);
        for (std::size_t i = 0; i < expected.size(); ++i)
            if (got.cell_indices[i] != expected[i]) ++mismatches;
    }
    report(4, "viterbi matches exhaustive argmax", mismatches == 0,
           std::to_string(mismatches) + " mismatched cells");
}

// --- criterion 5: benchmark equivalences --------------------------------
void criterion_5() {
    std::mt19937_64 rng(50505);
    bool ok = true;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<ThrowSequence> data;
        for (int s = 0; s < 4; ++s) data.push_back(oracle::random_instance(rng, 3, 6).seq);
        RegressionParams reg;
        reg.player_intercepts["p"] = 0.2 * rep - 1.0;
        reg.beta << 0.05, 0.01, -0.02, 0.2, 0.4;
        const double direct = oracle::bernoulli_loglik(data, reg);
        if (std::abs(benchmark_loglik(data, reg) - direct) > 1e-12 * std::abs(direct)) ok = false;

        const auto grid = build_grid(-1e-6, 1e-6, 1);
        const double ssm = total_loglik(data, OUParams(0.1, 0.1), reg, grid);
        if (std::abs(ssm - direct) > 1e-8) ok = false;
    }
    report(5, "benchmark equals closed form and degenerate grid", ok);
}

// --- criterion 6: transition matrix properties --------------------------
void criterion_6() {
    const auto grid = build_grid(-2.0, 2.0, 100);
    const OUParams p(0.042, 0.101);
    bool ok = true;

    for (double d : {0.01, 1.65, 12.22, 48.0}) {
        const auto tm = transition_matrix(grid, p, d);
        for (int i = 0; i < grid.m; ++i)
            if (std::abs(tm.prob.row(i).sum() - 1.0) > 1e-12) ok = false;
    }
    if (!transition_matrix(grid, p, 0.0).prob.isIdentity(0.0)) ok = false;

    const auto far = transition_matrix(grid, p, 1e4);
    const auto stat = discretize_gaussian(grid, stationary_law(p));
    for (int i = 0; i < grid.m; ++i)
        if (0.5 * (far.prob.row(i).transpose() - stat).cwiseAbs().sum() > 1e-6) ok = false;

    report(6, "transition rows stochastic, identity at zero, stationary at infinity", ok);
}

// --- criterion 7: parameter recovery ------------------------------------
void criterion_7() {
    SyntheticSpec spec;
    spec.ou = OUParams(0.5, 0.5);
    spec.n_players = 10;
    // the free design knobs are set for identification: near-even success
    // rates maximize per-throw information, frequent sets give repeated
    // Bernoulli readings of a shared state, and ~2-minute gaps sit where
    // the sensitivity of the latent autocorrelation to theta peaks
    spec.intercept_low = -0.25;
    spec.intercept_high = 0.25;
    spec.p_zero_gap = 0.9;
    spec.mean_gap_minutes = 2.0;
    spec.beta << 0.02, 0.03, 0.0, 0.2, 0.4;
    spec.sequences_per_player = 200;
    spec.min_length = 10;
    spec.max_length = 10;
    spec.seed = 34;
    const auto [data, truth] = generate_synthetic(spec);

    const auto grid = build_grid(-2.0, 2.0, 50);
    const auto t0 = std::chrono::steady_clock::now();
    const auto fit = fit_ssm(data.sequences, grid);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool ok = fit.ou.has_value();
    std::ostringstream detail;
    if (fit.ou) {
        const double theta_err = std::abs(fit.ou->theta - 0.5) / 0.5;
        const double sigma_err = std::abs(fit.ou->sigma - 0.5) / 0.5;
        ok = ok && theta_err < 0.20 && sigma_err < 0.20;
        detail << "theta " << fit.ou->theta << " sigma " << fit.ou->sigma;
        for (int i = 0; i < 5; ++i) {
            if (std::abs(fit.reg.beta[i] - spec.beta[i]) >= 0.05) ok = false;
        }
        detail << ", beta (";
        for (int i = 0; i < 5; ++i) detail << fit.reg.beta[i] << (i < 4 ? " " : ")");
        detail << ", " << fit.iterations << " iters, " << static_cast<int>(secs) << "s";
    }
    report(7, "parameter recovery at theta=sigma=0.5", ok, detail.str());
}

// --- criterion 8: model selection behaviour -----------------------------
void criterion_8() {
    const auto grid = build_grid(-2.0, 2.0, 40);
    OptimizerConfig config;
    config.max_iter = 300;

    int ssm_preferred = 0;
    for (int r = 0; r < 10; ++r) {
        SyntheticSpec spec;
        spec.ou = OUParams(0.1, 1.0);
        spec.n_players = 5;
        spec.beta << 0.0, 0.02, 0.0, 0.2, 0.3;
        spec.sequences_per_player = 40;
        spec.seed = 8000 + r;
        const auto [data, truth] = generate_synthetic(spec);
        const auto ssm = fit_ssm(data.sequences, grid, config);
        const auto bench = fit_benchmark(data.sequences, config);
        if (compare(ssm, bench).preferred_aic == "ssm") ++ssm_preferred;
    }

    int bench_preferred = 0;
    for (int r = 0; r < 10; ++r) {
        SyntheticSpec spec;
        spec.ou = OUParams(1.0, 0.0);  // state identically zero
        spec.n_players = 5;
        spec.beta << 0.0, 0.02, 0.0, 0.2, 0.3;
        spec.sequences_per_player = 40;
        spec.seed = 9000 + r;
        const auto [data, truth] = generate_synthetic(spec);
        const auto ssm = fit_ssm(data.sequences, grid, config);
        const auto bench = fit_benchmark(data.sequences, config);
        if (compare(ssm, bench).preferred_bic == "benchmark") ++bench_preferred;
    }

    const bool ok = ssm_preferred >= 9 && bench_preferred >= 8;
    report(8, "model selection prefers the generating model", ok,
           "AIC->ssm " + std::to_string(ssm_preferred) + "/10, BIC->benchmark " +
               std::to_string(bench_preferred) + "/10");
}

// --- criterion 9: Euler-Maruyama correctness ----------------------------
void criterion_9() {
    const double theta = 0.042, dt = 0.01;
    bool ok = true;

    const auto decay = simulate_trajectory(OUParams(theta, 0.0), 1.0, 48.0, dt, 1);
    double max_err = 0.0;
    for (const auto& pt : decay)
        max_err = std::max(max_err, std::abs(pt.state - std::exp(-theta * pt.t)));
    if (max_err >= 2.0 * theta * dt) ok = false;

    const OUParams p(theta, 0.101);
    const int reps = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto path = simulate_trajectory(p, 0.0, 48.0, dt, 100000 + r);
        sum += path.back().state;
        sumsq += path.back().state * path.back().state;
    }
    const double var = sumsq / reps - (sum / reps) * (sum / reps);
    const double target = p.stationary_variance();
    if (std::abs(var - target) > 0.05 * target) ok = false;

    char buf[128];
    std::snprintf(buf, sizeof(buf), "decay err %.2e, terminal var %.5f vs %.5f", max_err, var,
                  target);
    report(9, "Euler-Maruyama decay and terminal variance", ok, buf);
}

// --- criterion 10: grid convergence -------------------------------------
void criterion_10() {
    SyntheticSpec spec;
    spec.ou = OUParams(0.042, 0.101);
    spec.n_players = 4;
    spec.intercept_low = 0.8;
    spec.intercept_high = 1.6;
    spec.beta << 0.02, 0.03, 0.0, 0.2, 0.4;
    spec.sequences_per_player = 50;
    spec.seed = 1010;
    const auto [data, truth] = generate_synthetic(spec);
    long n = 0;
    for (const auto& seq : data.sequences) n += static_cast<long>(seq.records.size());

    const double ll100 =
        total_loglik(data.sequences, truth.ou, truth.reg, build_grid(-2.0, 2.0, 100));
    const double ll200 =
        total_loglik(data.sequences, truth.ou, truth.reg, build_grid(-2.0, 2.0, 200));
    const double diff_per_1000 = std::abs(ll100 - ll200) / (static_cast<double>(n) / 1000.0);
    report(10, "grid convergence m=100 vs m=200", diff_per_1000 < 1e-4,
           "|diff| per 1000 obs = " + std::to_string(diff_per_1000));
}

// --- criterion 11: gradient sanity --------------------------------------
void criterion_11() {
    SyntheticSpec spec;
    spec.ou = OUParams(0.3, 0.4);
    spec.n_players = 2;
    spec.sequences_per_player = 10;
    spec.beta << 0.05, 0.02, 0.0, 0.2, 0.3;
    spec.seed = 1111;
    const auto [data, truth] = generate_synthetic(spec);
    const auto grid = build_grid(-2.0, 2.0, 25);
    const auto names = param_names_for(data.sequences, ModelKind::Ssm);

    std::mt19937_64 rng(111111);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    bool ok = true;
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unif(rng);
        x[0] = std::log(0.3) + unif(rng);
        x[1] = std::log(0.4) + unif(rng);

        const Eigen::VectorXd g =
            loglik_gradient(data.sequences, grid, ModelKind::Ssm, x, names);
        Eigen::VectorXd g_fd(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            std::optional<OUParams> ou;
            RegressionParams reg;
            unpack_params(ModelKind::Ssm, xp, names, ou, reg);
            const double fp = total_loglik(data.sequences, *ou, reg, grid);
            unpack_params(ModelKind::Ssm, xm, names, ou, reg);
            const double fm = total_loglik(data.sequences, *ou, reg, grid);
            g_fd[i] = (fp - fm) / (2.0 * h);
        }
        const double rel = (g - g_fd).norm() / g_fd.norm();
        worst = std::max(worst, rel);
        if (rel > 1e-5) ok = false;
    }
    report(11, "optimizer gradient matches independent finite differences", ok,
           "worst relative deviation " + std::to_string(worst));
}

// --- criterion 12: CLI determinism and fixture round-trip ---------------
void criterion_12() {
    bool ok = true;
    const fs::path base = fs::temp_directory_path() / "hothand_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    for (const char* sub : {"a", "b"}) {
        const std::string cmd = std::string(CLI_PATH) + " simulate --outdir " +
                                (base / sub).string() +
                                " --theta 0.042 --sigma 0.101 --n-trajectories 3 --seed 99" +
                                " >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) ok = false;
    }
    if (slurp(base / "a" / "trajectories.csv") != slurp(base / "b" / "trajectories.csv"))
        ok = false;

    const auto data = parse_csv_file(std::string(FIXTURE_DIR) + "/lebron_freethrows.csv");
    std::ostringstream out;
    write_dataset_csv(data, out);
    std::istringstream in(out.str());
    const auto reparsed = parse_csv(in);
    if (reparsed.sequences.size() != data.sequences.size()) ok = false;
    for (std::size_t s = 0; ok && s < data.sequences.size(); ++s) {
        const auto& a = data.sequences[s];
        const auto& b = reparsed.sequences[s];
        if (a.records.size() != b.records.size()) {
            ok = false;
            break;
        }
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            if (std::abs(a.records[i].t - b.records[i].t) > 1e-9 ||
                a.records[i].y != b.records[i].y || a.records[i].cov.home != b.records[i].cov.home ||
                a.records[i].cov.scorediff != b.records[i].cov.scorediff ||
                a.records[i].cov.last30 != b.records[i].cov.last30 ||
                a.records[i].cov.ft2 != b.records[i].cov.ft2 ||
                a.records[i].cov.ft3 != b.records[i].cov.ft3)
                ok = false;
        }
    }
    report(12, "CLI determinism and fixture round-trip", ok);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_7();
    criterion_8();

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
