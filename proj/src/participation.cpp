#include "fedrisk/participation.hpp"

#include <algorithm>
#include <cmath>

#include "fedrisk/errors.hpp"

namespace fedrisk {

double evaluate_valuation(const ModelParams& w, std::span<const int> local_val_indices, const Dataset& ds) {
    if (local_val_indices.empty()) {
        throw ConfigError("evaluate_valuation: empty local validation split");
    }
    return accuracy(w, local_val_indices, ds);
}

double local_regret(double v_now, double v_prev) {
    if (v_now < 0.0 || v_now > 1.0 || v_prev < 0.0 || v_prev > 1.0) {
        throw ContractError("local_regret: valuations must be in [0, 1]");
    }
    return v_now - v_prev;
}

ParticipationDecision decide(int device_id, int round, double regret, double delta, const Feedback& feedback,
                             double gamma, double lambda) {
    if (delta < 0.0 || delta > 1.0 || !(gamma > 0.0) || lambda < 0.0) {
        throw ContractError("decide: need delta in [0, 1], gamma > 0, lambda >= 0");
    }
    const double normalized =
        feedback.regret_bound_value > 0.0 ? std::min(1.0, feedback.regret_signal / feedback.regret_bound_value) : 0.0;
    const double gain = gamma * (1.0 + lambda * normalized);

    ParticipationDecision d;
    d.device_id = device_id;
    d.round = round;
    d.local_regret = regret;
    d.relevance = std::clamp(0.5 + gain * regret, 0.0, 1.0);
    d.transmit = d.relevance > delta;
    return d;
}

void ValuationHistory::set_initial(double v0) {
    if (!series_.empty()) {
        throw ContractError("ValuationHistory: initial valuation already set");
    }
    series_.emplace_back(0, v0);
}

void ValuationHistory::observe_feedback(const Feedback& feedback) {
    if (feedback.round <= last_feedback_round_) {
        throw ContractError("ValuationHistory: feedback rounds must be strictly increasing");
    }
    last_feedback_round_ = feedback.round;
    feedback_weight_ =
        feedback.regret_bound_value > 0.0 ? std::min(1.0, feedback.regret_signal / feedback.regret_bound_value) : 0.0;
}

double ValuationHistory::record_valuation(int round, double v) {
    if (series_.empty()) {
        throw ContractError("ValuationHistory: set_initial must run before recording rounds");
    }
    if (round <= series_.back().first) {
        throw ContractError("ValuationHistory: valuation rounds must be strictly increasing");
    }
    const double regret = local_regret(v, series_.back().second);
    series_.emplace_back(round, v);
    return regret;
}

double ValuationHistory::latest() const {
    if (series_.empty()) {
        throw ContractError("ValuationHistory: no valuation recorded yet");
    }
    return series_.back().second;
}

} // namespace fedrisk
