#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hothand/data_io.hpp"
#include "hothand/estimation.hpp"
#include "hothand/inference.hpp"
#include "hothand/svg.hpp"

namespace fs = std::filesystem;
using namespace hothand;

namespace {

// Exit codes are a stable scripting contract.
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitNumerical = 4;

struct GridOptions {
    double lower = -2.0;
    double upper = 2.0;
    int m = 100;
};

void add_grid_options(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--grid-lower", g.lower, "Lower bound of the state grid");
    cmd->add_option("--grid-upper", g.upper, "Upper bound of the state grid");
    cmd->add_option("--grid-m", g.m, "Number of grid cells");
}

// write temp + rename, so readers never see partial files
void atomic_write(const fs::path& dest, const std::string& content) {
    const fs::path tmp = dest.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + dest.string());
        out << content;
    }
    fs::rename(tmp, dest);
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return out;
}

int cmd_fit(const std::string& input, const std::string& outdir, const GridOptions& g,
            double tol_grad, int max_iter) {
    Dataset data;
    try {
        data = parse_csv_file(input);
    } catch (const std::exception& e) {
        std::cerr << "fit: input error: " << e.what() << "\n";
        return kExitInput;
    }
    if (data.dropped_sequences > 0)
        std::cerr << "fit: dropped " << data.dropped_sequences
                  << " sequences under the minimum-length filter\n";
    if (data.sequences.empty()) {
        std::cerr << "fit: no sequences left after filtering\n";
        return kExitInput;
    }

    OptimizerConfig config;
    config.tol_grad = tol_grad;
    config.max_iter = max_iter;

    try {
        const StateGrid grid = build_grid(g.lower, g.upper, g.m);
        FitResult ssm = fit_ssm(data.sequences, grid, config);
        FitResult bench = fit_benchmark(data.sequences, config);
        ssm = confidence_intervals(std::move(ssm), data.sequences, grid);
        bench = confidence_intervals(std::move(bench), data.sequences, grid);
        fs::create_directories(outdir);
        std::ostringstream s1, s2, s3;
        write_fit_result(ssm, s1);
        write_fit_result(bench, s2);
        // compare the serialized fits so a later `compare` on the written
        // files reproduces this report byte for byte
        std::istringstream r1(s1.str()), r2(s2.str());
        const ComparisonReport rep = compare(read_fit_result(r1), read_fit_result(r2));
        write_comparison(rep, s3);
        atomic_write(fs::path(outdir) / "fit_ssm.txt", s1.str());
        atomic_write(fs::path(outdir) / "fit_benchmark.txt", s2.str());
        atomic_write(fs::path(outdir) / "comparison.txt", s3.str());

        for (const auto& w : ssm.warnings) std::cerr << "fit(ssm): " << w << "\n";
        for (const auto& w : bench.warnings) std::cerr << "fit(benchmark): " << w << "\n";
        if (!ssm.converged || !bench.converged) {
            std::cerr << "fit: optimizer did not converge"
                      << (ssm.converged ? "" : " [ssm]")
                      << (bench.converged ? "" : " [benchmark]") << "\n";
            return kExitNoConvergence;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "fit: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_decode(const std::string& input, const std::string& params_path,
               const std::string& outdir, const GridOptions& g, bool svg) {
    Dataset data;
    FitResult fit;
    try {
        data = parse_csv_file(input);
        std::ifstream pin(params_path);
        if (!pin) throw std::runtime_error("cannot open parameter file: " + params_path);
        fit = read_fit_result(pin);
        if (fit.kind != ModelKind::Ssm || !fit.ou)
            throw std::runtime_error("parameter file does not describe an SSM fit");
    } catch (const std::exception& e) {
        std::cerr << "decode: input error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        const StateGrid grid = build_grid(g.lower, g.upper, g.m);
        TransitionCache cache(grid, *fit.ou);
        std::vector<DecodedSequence> decoded;
        decoded.reserve(data.sequences.size());
        for (const auto& seq : data.sequences)
            decoded.push_back(viterbi_decode(seq, fit.reg, cache));

        fs::create_directories(outdir);
        std::ostringstream csv;
        write_decoded_csv(decoded, data.sequences, csv);
        atomic_write(fs::path(outdir) / "decoded.csv", csv.str());

        if (svg) {
            for (std::size_t s = 0; s < decoded.size(); ++s) {
                SvgChart chart(640, 320);
                std::vector<std::pair<double, double>> pts;
                for (std::size_t i = 0; i < decoded[s].midpoints.size(); ++i)
                    pts.emplace_back(data.sequences[s].records[i].t, decoded[s].midpoints[i]);
                chart.add_line(pts, "steelblue", /*step=*/true);
                for (std::size_t i = 0; i < pts.size(); ++i)
                    chart.add_marker(pts[i].first, pts[i].second,
                                     data.sequences[s].records[i].y ? "gold" : "black");
                const std::string name = "decoded_" + sanitize(data.sequences[s].player) + "_" +
                                         sanitize(data.sequences[s].game) + ".svg";
                atomic_write(fs::path(outdir) / name, chart.render());
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "decode: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_simulate_trajectories(const std::string& outdir, double theta, double sigma,
                              int n_traj, double t_end, double dt, double intercept,
                              std::uint64_t seed, bool svg) {
    try {
        const OUParams ou(theta, sigma);
        fs::create_directories(outdir);
        std::ostringstream csv;
        csv << "trajectory_id,t,state,implied_probability\n";
        SvgChart chart(800, 400);
        const char* colors[] = {"steelblue", "darkorange", "seagreen", "firebrick",
                                "mediumpurple", "goldenrod", "teal", "slategray"};
        bool out_of_range = false;
        for (int k = 0; k < n_traj; ++k) {
            const auto path = simulate_trajectory(ou, 0.0, t_end, dt, seed + k);
            std::vector<std::pair<double, double>> pts;
            for (const auto& pt : path) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g\n", k + 1, pt.t, pt.state,
                              logistic(pt.state + intercept));
                csv << buf;
                pts.emplace_back(pt.t, pt.state);
                if (std::abs(pt.state) >= 2.0) out_of_range = true;
            }
            if (svg) chart.add_line(pts, colors[k % 8]);
        }
        atomic_write(fs::path(outdir) / "trajectories.csv", csv.str());
        if (svg) atomic_write(fs::path(outdir) / "trajectories.svg", chart.render());
        if (out_of_range)
            std::cerr << "simulate: warning: a trajectory left the default [-2, 2] state range\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_simulate_dataset(const std::string& outdir, const std::string& spec_path,
                         std::uint64_t seed) {
    SyntheticSpec spec;
    try {
        std::ifstream in(spec_path);
        if (!in) throw std::runtime_error("cannot open spec file: " + spec_path);
        spec = read_synthetic_spec(in);
    } catch (const std::exception& e) {
        std::cerr << "simulate: input error: " << e.what() << "\n";
        return kExitInput;
    }
    try {
        spec.seed = seed;
        const auto [data, truth] = generate_synthetic(spec);
        fs::create_directories(outdir);
        std::ostringstream csv;
        write_dataset_csv(data, csv);
        atomic_write(fs::path(outdir) / "synthetic.csv", csv.str());

        FitResult truth_fit;
        truth_fit.kind = ModelKind::Ssm;
        truth_fit.ou = truth.ou;
        truth_fit.reg = truth.reg;
        truth_fit.n = 0;
        std::ostringstream params;
        write_fit_result(truth_fit, params);
        atomic_write(fs::path(outdir) / "true_params.txt", params.str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_compare(const std::string& ssm_path, const std::string& bench_path,
                const std::string& outdir) {
    try {
        std::ifstream in1(ssm_path), in2(bench_path);
        if (!in1) throw std::runtime_error("cannot open " + ssm_path);
        if (!in2) throw std::runtime_error("cannot open " + bench_path);
        FitResult ssm = read_fit_result(in1);
        FitResult bench = read_fit_result(in2);
        if (ssm.kind != ModelKind::Ssm) std::swap(ssm, bench);
        const ComparisonReport rep = compare(ssm, bench);
        std::ostringstream out;
        write_comparison(rep, out);
        if (outdir.empty()) {
            std::cout << out.str();
        } else {
            fs::create_directories(outdir);
            atomic_write(fs::path(outdir) / "comparison.txt", out.str());
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "compare: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-time latent-form models for free-throw sequences"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the state-space and benchmark models");
    std::string fit_input, fit_outdir = "out";
    GridOptions fit_grid;
    double tol_grad = 1e-5;
    int max_iter = 500;
    fit->add_option("--input", fit_input, "Input CSV")->required();
    fit->add_option("--outdir", fit_outdir, "Output directory");
    add_grid_options(fit, fit_grid);
    fit->add_option("--tol-grad", tol_grad, "Gradient max-norm tolerance");
    fit->add_option("--max-iter", max_iter, "Iteration cap");

    // decode
    auto* decode = app.add_subcommand("decode", "Viterbi-decode latent states");
    std::string dec_input, dec_params, dec_outdir = "out";
    GridOptions dec_grid;
    bool dec_svg = false;
    decode->add_option("--input", dec_input, "Input CSV")->required();
    decode->add_option("--params", dec_params, "Fitted SSM parameter file")->required();
    decode->add_option("--outdir", dec_outdir, "Output directory");
    add_grid_options(decode, dec_grid);
    decode->add_flag("--svg", dec_svg, "Emit per-sequence step plots");

    // simulate
    auto* simulate = app.add_subcommand("simulate",
                                        "Simulate state trajectories or a synthetic dataset");
    std::string sim_outdir = "out", sim_spec;
    double sim_theta = 0.042, sim_sigma = 0.101, sim_t_end = 48.0, sim_dt = 0.01;
    double sim_intercept = 0.0;
    int sim_n = 5;
    std::uint64_t sim_seed = 0;
    bool sim_svg = false;
    simulate->add_option("--outdir", sim_outdir, "Output directory");
    simulate->add_option("--spec", sim_spec, "Synthetic dataset spec file (key=value)");
    simulate->add_option("--theta", sim_theta, "OU drift");
    simulate->add_option("--sigma", sim_sigma, "OU diffusion");
    simulate->add_option("--t-end", sim_t_end, "Horizon in minutes");
    simulate->add_option("--dt", sim_dt, "Euler-Maruyama step");
    simulate->add_option("--n-trajectories", sim_n, "Number of trajectories");
    simulate->add_option("--intercept", sim_intercept,
                         "Intercept for the implied-probability column");
    simulate->add_option("--seed", sim_seed, "RNG seed")->required();
    simulate->add_flag("--svg", sim_svg, "Emit an overlay plot");

    // compare
    auto* comp = app.add_subcommand("compare", "Compare two fit result files");
    std::string cmp_ssm, cmp_bench, cmp_outdir;
    comp->add_option("--ssm", cmp_ssm, "SSM fit result file")->required();
    comp->add_option("--benchmark", cmp_bench, "Benchmark fit result file")->required();
    comp->add_option("--outdir", cmp_outdir, "Output directory (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(fit_input, fit_outdir, fit_grid, tol_grad, max_iter);
        if (decode->parsed())
            return cmd_decode(dec_input, dec_params, dec_outdir, dec_grid, dec_svg);
        if (simulate->parsed()) {
            if (!sim_spec.empty()) return cmd_simulate_dataset(sim_outdir, sim_spec, sim_seed);
            return cmd_simulate_trajectories(sim_outdir, sim_theta, sim_sigma, sim_n, sim_t_end,
                                             sim_dt, sim_intercept, sim_seed, sim_svg);
        }
        if (comp->parsed()) return cmd_compare(cmp_ssm, cmp_bench, cmp_outdir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
