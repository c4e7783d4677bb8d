#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedrisk/config.hpp"
#include "fedrisk/data.hpp"
#include "fedrisk/model.hpp"

namespace fedrisk {

struct RoundLog {
    int round = 0;
    double test_accuracy = 0.0;
    std::vector<int> selected;
    std::vector<int> transmitted; // subset of selected
    int links = 0;                // |transmitted|
    std::vector<std::pair<int, double>> shapley; // (device, value) for received updates
    double regret_signal = 0.0;  // value broadcast at the start of the round
    double regret_bound = 0.0;   // bound broadcast with it
    double cvar_regret = 0.0;    // ledger value after the round (unclamped)
    double avg_risk = 0.0;       // R(t)
    double wall_ms = 0.0;
};

// Everything derived from the config before round 1: the dataset, the global
// test set (its own dataset when separate files are given), the server-side
// validation split, and per-device train/val splits.
struct DataBundle {
    Dataset ds;
    std::optional<Dataset> test_ds;
    std::vector<int> test_indices; // into test_ds if present, else ds
    std::vector<int> server_val_indices;
    std::vector<std::vector<int>> device_train;
    std::vector<std::vector<int>> device_val;
    std::vector<int> pooled_train; // centralized baseline trains on this
};

DataBundle prepare_data(const ExperimentConfig& cfg);

// Full simulation: one RoundLog per round, a pure function of the config.
std::vector<RoundLog> run(const ExperimentConfig& cfg);

// First 1-indexed round whose test accuracy reaches `target`.
std::optional<int> rounds_to_accuracy(std::span<const RoundLog> logs, double target);

// Mean links over the first min(first_n, |logs|) rounds.
double links_per_round(std::span<const RoundLog> logs, int first_n);

// CSV schema: round,test_accuracy,links,selected,transmitted,regret_signal,
// regret_bound,avg_risk. Device lists are semicolon-joined, reals use 6
// decimals, lines end in LF.
void emit_csv(std::span<const RoundLog> logs, const std::string& path);

struct DeltaSweepRow {
    double delta = 0.0;
    std::optional<int> rounds_to_target;
    double avg_links = 0.0;
};

// Runs the alg1 variant once per delta on identical data/seed.
std::vector<DeltaSweepRow> sweep_delta(const ExperimentConfig& base, std::span<const double> delta_values);

void emit_sweep_csv(std::span<const DeltaSweepRow> rows, const std::string& path);

} // namespace fedrisk
