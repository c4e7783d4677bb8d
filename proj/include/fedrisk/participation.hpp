#pragma once

#include <span>
#include <vector>

#include "fedrisk/fedcore.hpp"

namespace fedrisk {

// Device-side view of the model's worth: accuracy on the local validation split.
double evaluate_valuation(const ModelParams& w, std::span<const int> local_val_indices, const Dataset& ds);

// Change in valuation between consecutive evaluations; positive means the
// global model got better for this device.
double local_regret(double v_now, double v_prev);

struct ParticipationDecision {
    int device_id = 0;
    int round = 0;
    bool transmit = false;
    double relevance = 0.0;    // rho in [0, 1]
    double local_regret = 0.0;
};

// Transmit/skip rule. The regret signal is normalized by its bound and used
// to scale the gain: gain_eff = gamma * (1 + lambda * min(1, signal / bound)).
// rho = clamp(0.5 + gain_eff * regret, 0, 1); transmit iff rho > delta, so a
// device skips on equality. Skipping affects only this round.
ParticipationDecision decide(int device_id, int round, double regret, double delta, const Feedback& feedback,
                             double gamma, double lambda);

// Per-device valuation record. v0 must be set from the initial broadcast
// model before the first decision; feedback rounds must arrive in order.
class ValuationHistory {
public:
    ValuationHistory(int device_id, double delta) : device_id_(device_id), delta_(delta) {}

    void set_initial(double v0);
    void observe_feedback(const Feedback& feedback);

    // Stores v for the round and returns the regret vs. the previous entry.
    double record_valuation(int round, double v);

    int device_id() const { return device_id_; }
    double delta() const { return delta_; }
    double latest() const;
    bool has_feedback() const { return last_feedback_round_ > 0; }
    double feedback_weight() const { return feedback_weight_; } // normalized signal in [0, 1]
    std::span<const std::pair<int, double>> series() const { return series_; }

private:
    int device_id_;
    double delta_;
    double feedback_weight_ = 0.0;
    int last_feedback_round_ = 0;
    std::vector<std::pair<int, double>> series_; // (round, v), round 0 = initial
};

} // namespace fedrisk
