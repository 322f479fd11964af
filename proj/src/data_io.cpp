#include "hothand/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hothand {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, long row, const char* col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(trim(s), &pos);
        if (pos != trim(s).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("row " + std::to_string(row) + ": malformed numeric in column '" +
                                 col + "': '" + s + "'");
    }
}

int parse_int(const std::string& s, long row, const char* col) {
    const double v = parse_double(s, row, col);
    if (v != std::floor(v))
        throw std::runtime_error("row " + std::to_string(row) + ": non-integer value in column '" +
                                 col + "': '" + s + "'");
    return static_cast<int>(v);
}

const std::vector<std::string> kColumns = {"player_id", "game_id", "t_min",  "made", "home",
                                           "scorediff", "last30",  "ft2",    "ft3"};

}  // namespace

void SyntheticSpec::validate() const {
    if (n_players < 1 || sequences_per_player < 1)
        throw std::invalid_argument("SyntheticSpec: counts must be positive");
    if (min_length < 1 || max_length < min_length)
        throw std::invalid_argument("SyntheticSpec: bad length range");
    if (p_zero_gap < 0.0 || p_zero_gap >= 1.0 || mean_gap_minutes <= 0.0)
        throw std::invalid_argument("SyntheticSpec: bad gap distribution");
    if (!(intercept_low <= intercept_high))
        throw std::invalid_argument("SyntheticSpec: bad intercept range");
}

Dataset parse_csv(std::istream& in, int min_length) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("parse_csv: missing header row");
    {
        auto header = split_csv_line(trim(line));
        for (auto& h : header) h = trim(h);
        if (header != kColumns)
            throw std::runtime_error(
                "parse_csv: header must be player_id,game_id,t_min,made,home,scorediff,last30,ft2,ft3");
    }

    // groups keyed by (player, game), kept in first-appearance order
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<ThrowSequence> groups;

    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != kColumns.size())
            throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                                     std::to_string(kColumns.size()) + " columns, got " +
                                     std::to_string(fields.size()));
        ThrowRecord rec;
        const std::string player = trim(fields[0]);
        const std::string game = trim(fields[1]);
        rec.t = parse_double(fields[2], row, "t_min");
        rec.y = parse_int(fields[3], row, "made");
        rec.cov.home = parse_int(fields[4], row, "home");
        rec.cov.scorediff = parse_int(fields[5], row, "scorediff");
        rec.cov.last30 = parse_int(fields[6], row, "last30");
        rec.cov.ft2 = parse_int(fields[7], row, "ft2");
        rec.cov.ft3 = parse_int(fields[8], row, "ft3");
        if (rec.t < 0.0)
            throw std::runtime_error("row " + std::to_string(row) + ": negative t_min");
        if (rec.y != 0 && rec.y != 1)
            throw std::runtime_error("row " + std::to_string(row) + ": made must be 0 or 1");
        try {
            rec.cov.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error("row " + std::to_string(row) + ": " + e.what());
        }

        const auto key = std::make_pair(player, game);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.push_back({player, game, {}});
        }
        groups[it->second].records.push_back(rec);
    }

    Dataset data;
    for (auto& g : groups) {
        // stable sort keeps input order within a free-throw set
        std::stable_sort(g.records.begin(), g.records.end(),
                         [](const ThrowRecord& a, const ThrowRecord& b) { return a.t < b.t; });
        if (static_cast<int>(g.records.size()) < min_length) {
            ++data.dropped_sequences;
            continue;
        }
        g.validate();
        data.sequences.push_back(std::move(g));
    }
    {
        std::map<PlayerId, bool> seen;
        for (const auto& seq : data.sequences) seen[seq.player] = true;
        for (const auto& [p, _] : seen) data.players.push_back(p);
    }
    return data;
}

Dataset parse_csv_file(const std::string& path, int min_length) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return parse_csv(in, min_length);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    out << "player_id,game_id,t_min,made,home,scorediff,last30,ft2,ft3\n";
    for (const auto& seq : data.sequences)
        for (const auto& r : seq.records)
            out << seq.player << ',' << seq.game << ',' << fmt(r.t, "%.10g") << ',' << r.y << ','
                << r.cov.home << ',' << r.cov.scorediff << ',' << r.cov.last30 << ','
                << r.cov.ft2 << ',' << r.cov.ft3 << '\n';
}

std::pair<Dataset, ModelParams> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    RegressionParams reg;
    reg.beta = spec.beta;
    std::vector<PlayerId> players;
    for (int p = 0; p < spec.n_players; ++p) {
        char name[16];
        std::snprintf(name, sizeof(name), "P%03d", p + 1);
        players.emplace_back(name);
        const double frac =
            spec.n_players == 1 ? 0.5 : static_cast<double>(p) / (spec.n_players - 1);
        reg.player_intercepts[name] =
            spec.intercept_low + frac * (spec.intercept_high - spec.intercept_low);
    }

    Dataset data;
    data.provenance = "synthetic seed=" + std::to_string(spec.seed);
    data.players = players;

    long seq_counter = 0;
    for (int p = 0; p < spec.n_players; ++p) {
        for (int s = 0; s < spec.sequences_per_player; ++s, ++seq_counter) {
            // per-sequence derived seed keeps generation order-independent
            std::seed_seq sseq{static_cast<std::uint32_t>(spec.seed),
                               static_cast<std::uint32_t>(spec.seed >> 32),
                               static_cast<std::uint32_t>(seq_counter)};
            std::mt19937_64 rng(sseq);
            std::uniform_int_distribution<int> len_dist(spec.min_length, spec.max_length);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::exponential_distribution<double> gap_dist(1.0 / spec.mean_gap_minutes);
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::normal_distribution<double> score_dist(0.58, 9.86);

            ThrowSequence seq;
            seq.player = players[p];
            seq.game = "G" + std::to_string(s + 1);
            const int T = len_dist(rng);
            const int home = unif(rng) < 0.5 ? 1 : 0;

            double t = 1.0 + 9.0 * unif(rng);
            double state = gauss(rng) * std::sqrt(spec.ou.stationary_variance());
            int set_pos = 1;
            for (int tau = 0; tau < T; ++tau) {
                if (tau > 0) {
                    const bool same_set = set_pos < 3 && unif(rng) < spec.p_zero_gap;
                    if (same_set) {
                        ++set_pos;  // gap 0, state carries over
                    } else {
                        // game clocks carry two decimals; keep gaps on that lattice
                        const double gap =
                            std::max(0.01, std::round(gap_dist(rng) * 100.0) / 100.0);
                        t += gap;
                        set_pos = 1;
                        const GaussianLaw law = conditional_law(spec.ou, state, gap);
                        state = law.mean + gauss(rng) * std::sqrt(law.variance);
                    }
                }
                ThrowRecord rec;
                rec.t = t;
                rec.cov.home = home;
                rec.cov.scorediff =
                    std::clamp(static_cast<int>(std::lround(score_dist(rng))), -45, 49);
                rec.cov.last30 = unif(rng) < 0.093 ? 1 : 0;
                rec.cov.ft2 = set_pos == 2 ? 1 : 0;
                rec.cov.ft3 = set_pos == 3 ? 1 : 0;
                const double pi = success_probability(state, rec.cov, reg, seq.player);
                rec.y = unif(rng) < pi ? 1 : 0;
                seq.records.push_back(rec);
            }
            data.sequences.push_back(std::move(seq));
        }
    }
    return {std::move(data), ModelParams{spec.ou, reg}};
}

void write_fit_result(const FitResult& fit, std::ostream& out) {
    out << "model=" << (fit.kind == ModelKind::Ssm ? "ssm" : "benchmark") << '\n';
    out << "n=" << fit.n << '\n';
    out << "k=" << fit.k << '\n';
    out << "loglik=" << fmt(fit.loglik, "%.10g") << '\n';
    out << "aic=" << fmt(fit.aic, "%.10g") << '\n';
    out << "bic=" << fmt(fit.bic, "%.10g") << '\n';
    out << "converged=" << (fit.converged ? 1 : 0) << '\n';
    out << "iterations=" << fit.iterations << '\n';
    out << "grad_norm=" << fmt(fit.grad_norm) << '\n';
    if (fit.ou) {
        out << "theta=" << fmt(fit.ou->theta) << '\n';
        out << "sigma=" << fmt(fit.ou->sigma) << '\n';
    }
    for (const auto& [player, b0] : fit.reg.player_intercepts)
        out << "b0:" << player << '=' << fmt(b0) << '\n';
    const char* slopes[5] = {"beta_home", "beta_scorediff", "beta_last30", "beta_ft2",
                             "beta_ft3"};
    for (int i = 0; i < 5; ++i) out << slopes[i] << '=' << fmt(fit.reg.beta[i]) << '\n';
    out << "ci_available=" << (fit.ci_available ? 1 : 0) << '\n';
    if (fit.ci_available) {
        for (const auto& [name, iv] : fit.ci)
            out << "ci:" << name << '=' << fmt(iv.lower) << ',' << fmt(iv.upper) << '\n';
    } else {
        out << "ci:all=NA\n";
    }
    for (const auto& w : fit.warnings) out << "warning=" << w << '\n';
}

FitResult read_fit_result(std::istream& in) {
    FitResult fit;
    std::string line;
    double theta = 0.0, sigma = 0.0;
    bool has_theta = false, has_sigma = false;
    const std::vector<std::string> slopes = {"beta_home", "beta_scorediff", "beta_last30",
                                             "beta_ft2", "beta_ft3"};
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("fit result: malformed line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "model") {
            if (val != "ssm" && val != "benchmark")
                throw std::runtime_error("fit result: unknown model '" + val + "'");
            fit.kind = val == "ssm" ? ModelKind::Ssm : ModelKind::Benchmark;
        } else if (key == "n") {
            fit.n = std::stol(val);
        } else if (key == "k") {
            fit.k = std::stoi(val);
        } else if (key == "loglik") {
            fit.loglik = std::stod(val);
        } else if (key == "aic") {
            fit.aic = std::stod(val);
        } else if (key == "bic") {
            fit.bic = std::stod(val);
        } else if (key == "converged") {
            fit.converged = val == "1";
        } else if (key == "iterations") {
            fit.iterations = std::stoi(val);
        } else if (key == "grad_norm") {
            fit.grad_norm = std::stod(val);
        } else if (key == "theta") {
            theta = std::stod(val);
            has_theta = true;
        } else if (key == "sigma") {
            sigma = std::stod(val);
            has_sigma = true;
        } else if (key.rfind("b0:", 0) == 0) {
            fit.reg.player_intercepts[key.substr(3)] = std::stod(val);
        } else if (std::find(slopes.begin(), slopes.end(), key) != slopes.end()) {
            fit.reg.beta[std::find(slopes.begin(), slopes.end(), key) - slopes.begin()] =
                std::stod(val);
        } else if (key == "ci_available") {
            fit.ci_available = val == "1";
        } else if (key.rfind("ci:", 0) == 0) {
            if (val != "NA") {
                const auto comma = val.find(',');
                if (comma == std::string::npos)
                    throw std::runtime_error("fit result: malformed CI line '" + line + "'");
                fit.ci[key.substr(3)] = {std::stod(val.substr(0, comma)),
                                         std::stod(val.substr(comma + 1))};
            }
        } else if (key == "warning") {
            fit.warnings.push_back(val);
        } else {
            throw std::runtime_error("fit result: unknown key '" + key + "'");
        }
    }
    if (fit.kind == ModelKind::Ssm) {
        if (!has_theta || !has_sigma)
            throw std::runtime_error("fit result: SSM file missing theta/sigma");
        fit.ou.emplace(theta, sigma);
    }
    if (fit.reg.player_intercepts.empty())
        throw std::runtime_error("fit result: no player intercepts");
    return fit;
}

void write_decoded_csv(const std::vector<DecodedSequence>& decoded,
                       const std::vector<ThrowSequence>& sequences, std::ostream& out) {
    if (decoded.size() != sequences.size())
        throw std::invalid_argument("write_decoded_csv: size mismatch");
    out << "player_id,game_id,t_min,made,decoded_state\n";
    for (std::size_t s = 0; s < decoded.size(); ++s) {
        const auto& d = decoded[s];
        const auto& seq = sequences[s];
        if (d.midpoints.size() != seq.records.size())
            throw std::invalid_argument("write_decoded_csv: length mismatch in sequence " +
                                        seq.player + "/" + seq.game);
        for (std::size_t i = 0; i < seq.records.size(); ++i)
            out << seq.player << ',' << seq.game << ',' << fmt(seq.records[i].t, "%.10g") << ','
                << seq.records[i].y << ',' << fmt(d.midpoints[i], "%.10g") << '\n';
    }
}

void write_comparison(const ComparisonReport& rep, std::ostream& out) {
    out << "n=" << rep.n << '\n';
    out << "delta_aic=" << fmt(rep.delta_aic, "%.10g") << '\n';
    out << "delta_bic=" << fmt(rep.delta_bic, "%.10g") << '\n';
    out << "preferred_aic=" << rep.preferred_aic << '\n';
    out << "preferred_bic=" << rep.preferred_bic << '\n';
}

SyntheticSpec read_synthetic_spec(std::istream& in) {
    SyntheticSpec spec;
    std::string line;
    double theta = spec.ou.theta, sigma = spec.ou.sigma;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("synthetic spec: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "n_players") spec.n_players = std::stoi(val);
        else if (key == "intercept_low") spec.intercept_low = std::stod(val);
        else if (key == "intercept_high") spec.intercept_high = std::stod(val);
        else if (key == "theta") theta = std::stod(val);
        else if (key == "sigma") sigma = std::stod(val);
        else if (key == "beta_home") spec.beta[0] = std::stod(val);
        else if (key == "beta_scorediff") spec.beta[1] = std::stod(val);
        else if (key == "beta_last30") spec.beta[2] = std::stod(val);
        else if (key == "beta_ft2") spec.beta[3] = std::stod(val);
        else if (key == "beta_ft3") spec.beta[4] = std::stod(val);
        else if (key == "sequences_per_player") spec.sequences_per_player = std::stoi(val);
        else if (key == "min_length") spec.min_length = std::stoi(val);
        else if (key == "max_length") spec.max_length = std::stoi(val);
        else if (key == "p_zero_gap") spec.p_zero_gap = std::stod(val);
        else if (key == "mean_gap_minutes") spec.mean_gap_minutes = std::stod(val);
        else if (key == "seed") spec.seed = std::stoull(val);
        else throw std::runtime_error("synthetic spec: unknown key '" + key + "'");
    }
    spec.ou = OUParams(theta, sigma);
    spec.validate();
    return spec;
}

}  // namespace hothand
