#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hothand/estimation.hpp"
#include "hothand/inference.hpp"

namespace hothand {

struct Dataset {
    std::vector<ThrowSequence> sequences;
    std::vector<PlayerId> players;
    std::string provenance;
    long dropped_sequences = 0;  // groups removed by the min-length filter
};

// Shape of a synthetic dataset: latent states evolve by the exact OU
// conditional law, outcomes are Bernoulli through the logit link. Gaps mix
// a point mass at 0 (within-set throws) with an exponential tail.
struct SyntheticSpec {
    int n_players = 10;
    double intercept_low = 0.5;
    double intercept_high = 1.5;
    OUParams ou{0.1, 0.1};
    Eigen::Matrix<double, 5, 1> beta = Eigen::Matrix<double, 5, 1>::Zero();
    int sequences_per_player = 100;
    int min_length = 4;
    int max_length = 12;
    double p_zero_gap = 0.45;
    double mean_gap_minutes = 8.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ModelParams {
    OUParams ou;
    RegressionParams reg;
};

// CSV schema: player_id,game_id,t_min,made,home,scorediff,last30,ft2,ft3
// with a mandatory header. Rows group into sequences by (player_id,
// game_id), sorted by time with input order as tiebreak; groups shorter
// than min_length are dropped and counted.
Dataset parse_csv(std::istream& in, int min_length = 4);
Dataset parse_csv_file(const std::string& path, int min_length = 4);

void write_dataset_csv(const Dataset& data, std::ostream& out);

std::pair<Dataset, ModelParams> generate_synthetic(const SyntheticSpec& spec);

// Flat key=value text, stable field order, 6 significant digits;
// unavailable CIs serialize as NA.
void write_fit_result(const FitResult& fit, std::ostream& out);
FitResult read_fit_result(std::istream& in);

void write_decoded_csv(const std::vector<DecodedSequence>& decoded,
                       const std::vector<ThrowSequence>& sequences, std::ostream& out);

void write_comparison(const ComparisonReport& rep, std::ostream& out);

// Synthetic spec as key=value text for the CLI.
SyntheticSpec read_synthetic_spec(std::istream& in);

}  // namespace hothand
