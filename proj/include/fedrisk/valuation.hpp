#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fedrisk/fedcore.hpp"

namespace fedrisk {

// Utility of a coalition given as a bitmask over this round's players.
using UtilityFn = std::function<double(std::uint64_t)>;

// Memoized coalition utility over the updates received in one round:
// U(S) = validation accuracy of the model aggregated from the subset S, with
// U(empty) the pre-round accuracy. At most 63 players (bitmask width).
class CoalitionUtilityCache {
public:
    CoalitionUtilityCache(const ModelParams& w_round, std::vector<ClientUpdate> updates, double eta,
                          std::vector<int> validation_indices, const Dataset* ds, double total_weight = 0.0);

    int players() const { return static_cast<int>(updates_.size()); }
    double utility(std::uint64_t mask);
    double operator()(std::uint64_t mask) { return utility(mask); }

    // Evaluates every subset up front (m <= 20); safe to call concurrently
    // after this, and what shapley_exact expects for speed.
    void precompute_all(int threads = 1);

    // Distinct utilities actually computed; exposes memoization behavior.
    long evaluations() const { return evaluations_; }

private:
    double compute(std::uint64_t mask) const;

    ModelParams w_round_;
    std::vector<ClientUpdate> updates_;
    double eta_;
    std::vector<int> validation_indices_;
    const Dataset* ds_;
    double total_weight_;
    std::vector<double> table_;                         // used when players() <= 20
    std::vector<char> table_set_;
    std::unordered_map<std::uint64_t, double> sparse_;  // used above that
    long evaluations_ = 0;
};

// Exact Shapley values by subset enumeration (players <= 12):
// phi_k = sum over S not containing k of |S|! (m-1-|S|)! (U(S+k) - U(S)) / m!.
std::vector<double> shapley_exact(int players, const UtilityFn& utility);

// Mean marginal contribution over an explicit permutation list.
std::vector<double> shapley_from_permutations(int players, const UtilityFn& utility,
                                              std::span<const std::vector<int>> permutations);

// Unbiased permutation-sampling estimator of the exact values.
std::vector<double> shapley_mc(int players, const UtilityFn& utility, int n_permutations, std::uint64_t seed);

// Per-device (round, Shapley value) samples: the empirical contribution
// distribution the bandit scores against. Raw values are kept (they may be
// negative); risk-side consumers clamp where they need [0, 1].
class ContributionHistory {
public:
    explicit ContributionHistory(int devices) : samples_(static_cast<std::size_t>(devices)) {}

    void record(int device, int round, double value);

    int devices() const { return static_cast<int>(samples_.size()); }
    int count(int device) const { return static_cast<int>(samples_[static_cast<std::size_t>(device)].size()); }
    double mean(int device) const; // 0 when no samples
    std::vector<double> values(int device) const;
    std::span<const std::pair<int, double>> entries(int device) const {
        return samples_[static_cast<std::size_t>(device)];
    }

private:
    std::vector<std::vector<std::pair<int, double>>> samples_; // (round, value), ascending rounds
};

} // namespace fedrisk
