#include "fedrisk/risk_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedrisk/errors.hpp"

namespace fedrisk {

double ucb_score(double mean, int selection_count, int round) {
    if (round < 1) {
        throw ContractError("ucb_score: round must be >= 1");
    }
    if (selection_count == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return mean + std::sqrt(std::log(static_cast<double>(round)) / selection_count);
}

double empirical_cvar(std::span<const double> samples, double alpha) {
    if (samples.empty()) {
        throw ContractError("empirical_cvar: samples must be nonempty");
    }
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw ContractError("empirical_cvar: alpha must be in (0, 1]");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double an = alpha * static_cast<double>(sorted.size());
    // The -1e-9 strips float dust when alpha * n lands on an integer.
    int j = static_cast<int>(std::ceil(an - 1e-9));
    j = std::clamp(j, 1, static_cast<int>(sorted.size()));

    double tail = 0.0;
    for (int i = 0; i < j - 1; ++i) {
        tail += sorted[static_cast<std::size_t>(i)];
    }
    tail += (an - j + 1) * sorted[static_cast<std::size_t>(j - 1)];
    return tail / an;
}

double cvar_ucb_score(std::span<const double> samples, double theta, int selection_count, int round) {
    if (selection_count == 0) {
        return std::numeric_limits<double>::infinity();
    }
    // A selected device that never delivered an update has no contribution
    // evidence; it scores the bare exploration bonus and gets retried as the
    // bonus grows, instead of hogging a slot with the sentinel.
    double cvar_term = 0.0;
    if (!samples.empty()) {
        std::vector<double> clamped(samples.begin(), samples.end());
        for (double& v : clamped) {
            v = std::clamp(v, 0.0, 1.0);
        }
        cvar_term = empirical_cvar(clamped, theta);
    }
    return cvar_term + std::sqrt(std::log(static_cast<double>(round)) / selection_count);
}

std::vector<int> select_devices(std::span<const double> scores, int budget) {
    if (budget < 1) {
        throw ContractError("select_devices: budget must be >= 1");
    }
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) {
            return sa > sb;
        }
        return a < b;
    });
    order.resize(static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(budget), scores.size())));
    std::sort(order.begin(), order.end());
    return order;
}

double regret_bound(int tau, int device_count, double theta, double eps_max) {
    if (tau < 1 || device_count < 1 || !(theta > 0.0) || theta > 1.0 || !(eps_max > 0.0)) {
        throw ContractError("regret_bound: need tau >= 1, K >= 1, theta in (0, 1], eps_max > 0");
    }
    const double t = static_cast<double>(tau);
    return (4.0 * eps_max / theta) * std::sqrt(t * device_count * std::log(std::sqrt(2.0) * t));
}

double bernstein_bound(double eps, double variance_sum, double theta_th) {
    if (eps < 0.0 || variance_sum < 0.0 || theta_th < 0.0) {
        throw ContractError("bernstein_bound: arguments must be nonnegative");
    }
    if (eps == 0.0) {
        return 1.0;
    }
    const double denom = 2.0 * (variance_sum + eps * theta_th / 3.0);
    if (denom == 0.0) {
        throw ContractError("bernstein_bound: degenerate denominator");
    }
    return std::exp(-eps * eps / denom);
}

RiskProfile update_risk_profile(const RiskProfile& profile, std::span<const double> device_risks,
                                std::span<const double> improvements) {
    if (device_risks.size() != improvements.size()) {
        throw ContractError("update_risk_profile: size mismatch");
    }
    RiskProfile out;
    out.improvement_eps = profile.improvement_eps;
    for (std::size_t k = 0; k < device_risks.size(); ++k) {
        if (improvements[k] < out.improvement_eps) {
            continue;
        }
        const double theta = device_risks[k];
        if (theta < 0.0 || theta > 1.0) {
            throw ContractError("update_risk_profile: device risk outside [0, 1]");
        }
        const int bucket = std::clamp(static_cast<int>(std::floor(theta * 10.0 + 1e-9)), 0, 9);
        ++out.bucket_counts[static_cast<std::size_t>(bucket)];
        ++out.counted_devices;
    }
    if (out.counted_devices > 0) {
        double weighted = 0.0;
        for (int b = 0; b < 10; ++b) {
            weighted += (b * 0.1) * out.bucket_counts[static_cast<std::size_t>(b)];
        }
        out.average_risk = weighted / out.counted_devices;
    }
    return out;
}

void RegretLedger::step(std::span<const double> round_samples, double best_cvar_estimate) {
    const double realized = round_samples.empty() ? 0.0 : empirical_cvar(round_samples, theta_);
    realized_sum_ += realized;
    realized_.push_back(realized);
    const double t = static_cast<double>(realized_.size());
    regret_.push_back(t * best_cvar_estimate - realized_sum_);
}

} // namespace fedrisk
