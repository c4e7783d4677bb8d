#include "fedrisk/fedcore.hpp"

#include <cmath>

#include "fedrisk/errors.hpp"
#include "fedrisk/risk_selection.hpp"

namespace fedrisk {

ModelParams aggregate(const ModelParams& w, std::span<const ClientUpdate> updates, double eta, double total_weight) {
    if (updates.empty()) {
        return w; // zero-participation round
    }
    double mass = 0.0;
    for (const auto& u : updates) {
        if (u.grad_equivalent.size() != w.w.size()) {
            throw ContractError("aggregate: update layout mismatch");
        }
        if (u.round != updates.front().round) {
            throw ContractError("aggregate: updates from mixed rounds");
        }
        if (u.sample_count < 1) {
            throw ContractError("aggregate: sample_count must be >= 1");
        }
        mass += static_cast<double>(u.sample_count);
    }
    const double denom = total_weight > 0.0 ? total_weight : mass;

    ModelParams out = w;
    double weight_sum = 0.0;
    for (const auto& u : updates) {
        const double wk = static_cast<double>(u.sample_count) / denom;
        weight_sum += wk;
        const double scale = eta * wk;
        for (std::size_t i = 0; i < out.w.size(); ++i) {
            out.w[i] -= scale * u.grad_equivalent[i];
        }
    }
    if (total_weight <= 0.0 && std::abs(weight_sum - 1.0) > 1e-9) {
        throw NumericError("aggregate: participant weights failed to sum to 1");
    }
    return out;
}

Feedback make_feedback(const ModelParams& w_next, double regret_signal, int round, double theta, int device_count,
                       double eps_max) {
    if (regret_signal < 0.0 || round < 1) {
        throw ContractError("make_feedback: need regret_signal >= 0 and round >= 1");
    }
    Feedback fb;
    fb.round = round;
    fb.weights = w_next;
    fb.regret_signal = regret_signal;
    fb.regret_bound_value = regret_bound(round, device_count, theta, eps_max);
    return fb;
}

} // namespace fedrisk
