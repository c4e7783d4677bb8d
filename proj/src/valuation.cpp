#include "fedrisk/valuation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "fedrisk/errors.hpp"
#include "fedrisk/parallel.hpp"
#include "fedrisk/rng.hpp"

namespace fedrisk {

CoalitionUtilityCache::CoalitionUtilityCache(const ModelParams& w_round, std::vector<ClientUpdate> updates, double eta,
                                             std::vector<int> validation_indices, const Dataset* ds,
                                             double total_weight)
    : w_round_(w_round),
      updates_(std::move(updates)),
      eta_(eta),
      validation_indices_(std::move(validation_indices)),
      ds_(ds),
      total_weight_(total_weight) {
    if (updates_.size() > 63) {
        throw ContractError("CoalitionUtilityCache: at most 63 players");
    }
    if (ds_ == nullptr || validation_indices_.empty()) {
        throw ContractError("CoalitionUtilityCache: need a nonempty validation set");
    }
    if (players() <= 20) {
        table_.assign(std::size_t{1} << players(), 0.0);
        table_set_.assign(std::size_t{1} << players(), 0);
    }
}

double CoalitionUtilityCache::compute(std::uint64_t mask) const {
    std::vector<ClientUpdate> subset;
    subset.reserve(static_cast<std::size_t>(players()));
    for (int i = 0; i < players(); ++i) {
        if (mask & (std::uint64_t{1} << i)) {
            subset.push_back(updates_[static_cast<std::size_t>(i)]);
        }
    }
    const ModelParams w = aggregate(w_round_, subset, eta_, total_weight_);
    return accuracy(w, validation_indices_, *ds_);
}

double CoalitionUtilityCache::utility(std::uint64_t mask) {
    if (mask >> players()) {
        throw ContractError("CoalitionUtilityCache: mask names players outside this round");
    }
    if (!table_.empty()) {
        if (!table_set_[mask]) {
            table_[mask] = compute(mask);
            table_set_[mask] = 1;
            ++evaluations_;
        }
        return table_[mask];
    }
    const auto it = sparse_.find(mask);
    if (it != sparse_.end()) {
        return it->second;
    }
    const double value = compute(mask);
    sparse_.emplace(mask, value);
    ++evaluations_;
    return value;
}

void CoalitionUtilityCache::precompute_all(int threads) {
    if (table_.empty()) {
        throw ContractError("precompute_all: only available for <= 20 players");
    }
    const int count = 1 << players();
    parallel_for(count, threads, [this](int mask) {
        table_[static_cast<std::size_t>(mask)] = compute(static_cast<std::uint64_t>(mask));
        table_set_[static_cast<std::size_t>(mask)] = 1;
    });
    evaluations_ = count;
}

std::vector<double> shapley_exact(int players, const UtilityFn& utility) {
    if (players < 1 || players > 12) {
        throw ContractError("shapley_exact: players must be in [1, 12]; use shapley_mc above that");
    }
    // Factorial coalition weights: |S|! (m-1-|S|)!.
    std::vector<double> weight(static_cast<std::size_t>(players), 1.0);
    std::vector<double> factorial(static_cast<std::size_t>(players) + 1, 1.0);
    for (int i = 1; i <= players; ++i) {
        factorial[static_cast<std::size_t>(i)] = factorial[static_cast<std::size_t>(i - 1)] * i;
    }
    for (int s = 0; s < players; ++s) {
        weight[static_cast<std::size_t>(s)] =
            factorial[static_cast<std::size_t>(s)] * factorial[static_cast<std::size_t>(players - 1 - s)];
    }

    std::vector<double> cache(std::size_t{1} << players);
    for (std::uint64_t mask = 0; mask < cache.size(); ++mask) {
        cache[mask] = utility(mask);
    }

    std::vector<double> phi(static_cast<std::size_t>(players), 0.0);
    const std::uint64_t full = (std::uint64_t{1} << players) - 1;
    for (std::uint64_t mask = 0; mask <= full; ++mask) {
        const int size = std::popcount(mask);
        for (int k = 0; k < players; ++k) {
            const std::uint64_t bit = std::uint64_t{1} << k;
            if (mask & bit) {
                continue;
            }
            phi[static_cast<std::size_t>(k)] +=
                weight[static_cast<std::size_t>(size)] * (cache[mask | bit] - cache[mask]);
        }
    }
    const double m_factorial = factorial[static_cast<std::size_t>(players)];
    for (double& v : phi) {
        v /= m_factorial;
    }
    return phi;
}

std::vector<double> shapley_from_permutations(int players, const UtilityFn& utility,
                                              std::span<const std::vector<int>> permutations) {
    if (players < 1 || players > 63) {
        throw ContractError("shapley_from_permutations: players must be in [1, 63]");
    }
    if (permutations.empty()) {
        throw ContractError("shapley_from_permutations: need at least one permutation");
    }
    std::vector<double> phi(static_cast<std::size_t>(players), 0.0);
    for (const auto& perm : permutations) {
        std::uint64_t mask = 0;
        double prev = utility(0);
        for (const int k : perm) {
            mask |= std::uint64_t{1} << k;
            const double next = utility(mask);
            phi[static_cast<std::size_t>(k)] += next - prev;
            prev = next;
        }
    }
    for (double& v : phi) {
        v /= static_cast<double>(permutations.size());
    }
    return phi;
}

std::vector<double> shapley_mc(int players, const UtilityFn& utility, int n_permutations, std::uint64_t seed) {
    if (n_permutations < 1) {
        throw ContractError("shapley_mc: n_permutations must be >= 1");
    }
    SplitRng rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(players));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    perms.reserve(static_cast<std::size_t>(n_permutations));
    for (int i = 0; i < n_permutations; ++i) {
        rng.shuffle(perm);
        perms.push_back(perm);
    }
    return shapley_from_permutations(players, utility, perms);
}

void ContributionHistory::record(int device, int round, double value) {
    auto& list = samples_[static_cast<std::size_t>(device)];
    if (!list.empty() && list.back().first >= round) {
        throw ContractError("ContributionHistory: duplicate or out-of-order sample for device " +
                            std::to_string(device) + " round " + std::to_string(round));
    }
    list.emplace_back(round, value);
}

double ContributionHistory::mean(int device) const {
    const auto& list = samples_[static_cast<std::size_t>(device)];
    if (list.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [round, value] : list) {
        sum += value;
    }
    return sum / static_cast<double>(list.size());
}

std::vector<double> ContributionHistory::values(int device) const {
    const auto& list = samples_[static_cast<std::size_t>(device)];
    std::vector<double> out;
    out.reserve(list.size());
    for (const auto& [round, value] : list) {
        out.push_back(value);
    }
    return out;
}

} // namespace fedrisk
