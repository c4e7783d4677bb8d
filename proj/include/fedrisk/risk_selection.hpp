#pragma once

#include <array>
#include <span>
#include <vector>

namespace fedrisk {

// Per-device bandit bookkeeping: how often each device has been selected.
// Contribution samples live in the valuation module's ContributionHistory;
// scoring functions take them as spans.
struct ArmStats {
    std::vector<int> selections;
    int round = 0;

    explicit ArmStats(int devices = 0) : selections(static_cast<std::size_t>(devices), 0) {}

    void record_selected(std::span<const int> selected, int at_round) {
        round = at_round;
        for (const int k : selected) {
            ++selections[static_cast<std::size_t>(k)];
        }
    }

    int count(int device) const { return selections[static_cast<std::size_t>(device)]; }
};

// mean + sqrt(ln t / N); an unexplored arm (N = 0) scores +infinity so it is
// selected before any explored arm.
double ucb_score(double mean, int selection_count, int round);

// Lower-tail CVaR of the empirical distribution at level alpha in (0, 1]:
// the mean of the worst alpha-fraction of the samples. CVaR_1 is the mean.
double empirical_cvar(std::span<const double> samples, double alpha);

// empirical_cvar of samples clamped into [0, 1] plus the UCB bonus. A never-
// selected arm (N = 0) scores the exploration sentinel; a selected arm with no
// received contributions scores the bare bonus.
double cvar_ucb_score(std::span<const double> samples, double theta, int selection_count, int round);

// Top-`budget` device ids by score, ties broken toward the lower id.
std::vector<int> select_devices(std::span<const double> scores, int budget);

// (4 * eps_max / theta) * sqrt(tau * K * ln(sqrt(2) * tau)).
double regret_bound(int tau, int device_count, double theta, double eps_max);

// exp(-eps^2 / (2 (A + eps * theta_th / 3))): Bernstein-style tail bound on
// the deviation of a sum of independent bounded risk variables.
double bernstein_bound(double eps, double variance_sum, double theta_th);

// Population-risk accounting: devices whose improvement reaches
// improvement_eps are counted into 0.1-wide risk buckets; average_risk is the
// bucket-weighted mean risk over the counted devices.
struct RiskProfile {
    double improvement_eps = 0.001;
    std::array<int, 10> bucket_counts{};
    int counted_devices = 0;  // K(t)
    double average_risk = 0.0; // R(t), 0 when nothing is counted
};

RiskProfile update_risk_profile(const RiskProfile& profile, std::span<const double> device_risks,
                                std::span<const double> improvements);

// Cumulative CVaR-regret series: after t rounds the regret is
// t * best_cvar_estimate - sum of realized per-round CVaRs. Rounds with no
// received contributions realize a CVaR of 0.
class RegretLedger {
public:
    RegretLedger(double theta, double eps_max) : theta_(theta), eps_max_(eps_max) {}

    void step(std::span<const double> round_samples, double best_cvar_estimate);

    int rounds() const { return static_cast<int>(regret_.size()); }
    double regret_at(int t) const { return regret_[static_cast<std::size_t>(t - 1)]; }
    double latest() const { return regret_.empty() ? 0.0 : regret_.back(); }
    std::span<const double> regret_series() const { return regret_; }
    std::span<const double> realized_series() const { return realized_; }
    double theta() const { return theta_; }
    double eps_max() const { return eps_max_; }

private:
    double theta_;
    double eps_max_;
    double realized_sum_ = 0.0;
    std::vector<double> realized_;
    std::vector<double> regret_;
};

} // namespace fedrisk
