#pragma once

#include <span>
#include <vector>

#include "fedrisk/model.hpp"

namespace fedrisk {

// One device's upload for a round: the accumulated gradient-equivalent
// (w_in - w_local) / eta, plus the sample count used as aggregation weight.
struct ClientUpdate {
    int device_id = 0;
    int round = 0;
    std::vector<double> grad_equivalent;
    int sample_count = 0;
};

// Server broadcast at the start of a round: current global weights plus the
// regret signal devices use to calibrate their transmit decisions.
struct Feedback {
    int round = 0;
    ModelParams weights;
    double regret_signal = 0.0;      // >= 0
    double regret_bound_value = 1.0; // > 0, used to normalize the signal
};

// Weighted gradient aggregation: w' = w - eta * sum_k (D_k / D) g_k.
// D defaults to the participating mass (sum of received sample counts); pass
// total_weight > 0 to normalize by a fixed global mass instead. An empty
// update list is a no-op round and returns w unchanged.
ModelParams aggregate(const ModelParams& w, std::span<const ClientUpdate> updates, double eta,
                      double total_weight = 0.0);

Feedback make_feedback(const ModelParams& w_next, double regret_signal, int round, double theta, int device_count,
                       double eps_max);

} // namespace fedrisk
