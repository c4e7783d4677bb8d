#include "fedrisk/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fedrisk/errors.hpp"
#include "fedrisk/fedcore.hpp"
#include "fedrisk/parallel.hpp"
#include "fedrisk/participation.hpp"
#include "fedrisk/risk_selection.hpp"
#include "fedrisk/rng.hpp"
#include "fedrisk/valuation.hpp"

namespace fedrisk {

namespace {

// Reserved stream ids (device ids are >= 0, the server is -1).
constexpr std::int64_t kInitStream = -3;
constexpr std::int64_t kDataStream = -4;

std::vector<int> iota_vec(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

} // namespace

DataBundle prepare_data(const ExperimentConfig& cfg) {
    DataBundle bundle;
    if (cfg.dataset == DatasetKind::synthetic) {
        bundle.ds = synth_gaussian_mixture(cfg.synth_n, cfg.synth_p, cfg.synth_classes, cfg.synth_sep,
                                           stream_seed(cfg.seed, kDataStream, 0));
    } else {
        bundle.ds = load_idx(cfg.mnist_images, cfg.mnist_labels);
        if (!cfg.mnist_test_images.empty()) {
            bundle.test_ds = load_idx(cfg.mnist_test_images, cfg.mnist_test_labels);
        }
    }

    std::vector<int> pool;
    if (bundle.test_ds.has_value()) {
        bundle.test_indices = iota_vec(bundle.test_ds->n);
        pool = iota_vec(bundle.ds.n);
    } else {
        auto [rest, test] = split_train_val(iota_vec(bundle.ds.n), cfg.test_fraction,
                                            stream_seed(cfg.seed, kDataStream, 1));
        bundle.test_indices = std::move(test);
        pool = std::move(rest);
    }

    auto [device_pool, server_val] =
        split_train_val(pool, cfg.server_val_fraction, stream_seed(cfg.seed, kDataStream, 2));
    bundle.server_val_indices = std::move(server_val);
    bundle.pooled_train = device_pool;

    Partition part;
    if (cfg.partition == PartitionKind::iid) {
        part = partition_iid_indices(device_pool, cfg.devices, stream_seed(cfg.seed, kDataStream, 3));
    } else {
        part = partition_noniid_shards_indices(device_pool, bundle.ds.labels, cfg.devices, cfg.shards_per_device,
                                               stream_seed(cfg.seed, kDataStream, 3));
    }

    bundle.device_train.resize(static_cast<std::size_t>(cfg.devices));
    bundle.device_val.resize(static_cast<std::size_t>(cfg.devices));
    for (int k = 0; k < cfg.devices; ++k) {
        auto [train, val] =
            split_train_val(part.device_indices[static_cast<std::size_t>(k)], cfg.val_fraction, stream_seed(cfg.seed, k, 0));
        bundle.device_train[static_cast<std::size_t>(k)] = std::move(train);
        bundle.device_val[static_cast<std::size_t>(k)] = std::move(val);
    }
    return bundle;
}

namespace {

struct ClientOutcome {
    bool participated = false; // selected this round
    bool transmit = false;
    double valuation = 0.0;
    double regret = 0.0;
    LocalTrainResult train;
};

bool is_bandit(Variant v) { return v == Variant::alg1 || v == Variant::ucb; }

} // namespace

std::vector<RoundLog> run(const ExperimentConfig& cfg) {
    validate(cfg);
    const DataBundle data = prepare_data(cfg);
    const Dataset& ds = data.ds;
    const Dataset& test_ds = data.test_ds.has_value() ? *data.test_ds : data.ds;

    const ModelLayout layout = cfg.model == ModelKind::linear
                                   ? ModelLayout::make_linear(ds.p, ds.classes)
                                   : ModelLayout::make_mlp(ds.p, cfg.hidden, ds.classes);
    ModelParams w = init_params(layout, stream_seed(cfg.seed, kInitStream, 0));

    const int K = cfg.devices;
    double global_mass = 0.0;
    for (int k = 0; k < K; ++k) {
        global_mass += static_cast<double>(data.device_train[static_cast<std::size_t>(k)].size());
    }
    const double agg_denom = cfg.aggregate_norm == AggregateNorm::global ? global_mass : 0.0;

    ArmStats arms(K);
    ContributionHistory contributions(K);
    RegretLedger ledger(cfg.theta, cfg.eps_max);
    RiskProfile profile;
    profile.improvement_eps = cfg.improvement_eps;
    std::vector<char> alive(static_cast<std::size_t>(K), 1);

    std::vector<ValuationHistory> histories;
    histories.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const double delta_k =
            cfg.delta_per_device.empty() ? cfg.delta : cfg.delta_per_device[static_cast<std::size_t>(k)];
        histories.emplace_back(k, delta_k);
    }
    if (cfg.variant == Variant::alg1) {
        // Every device values the initial broadcast model before round 1.
        parallel_for(K, cfg.threads, [&](int k) {
            histories[static_cast<std::size_t>(k)].set_initial(
                evaluate_valuation(w, data.device_val[static_cast<std::size_t>(k)], ds));
        });
    }

    std::vector<RoundLog> logs;
    logs.reserve(static_cast<std::size_t>(cfg.rounds));

    for (int t = 1; t <= cfg.rounds; ++t) {
        const auto started = std::chrono::steady_clock::now();
        try {
            SplitRng server_rng = SplitRng::stream(cfg.seed, -1, t);
            std::vector<int> alive_ids;
            for (int k = 0; k < K; ++k) {
                if (alive[static_cast<std::size_t>(k)]) {
                    alive_ids.push_back(k);
                }
            }

            // device selection
            std::vector<int> selected;
            if (cfg.variant == Variant::fedsgd_full) {
                selected = alive_ids;
            } else if (cfg.variant == Variant::fedsgd_partial) {
                const int want = std::max(1, static_cast<int>(std::llround(0.6 * K)));
                const auto pick = server_rng.sample_without_replacement(static_cast<int>(alive_ids.size()),
                                                                        std::min<int>(want, static_cast<int>(alive_ids.size())));
                for (const int pos : pick) {
                    selected.push_back(alive_ids[static_cast<std::size_t>(pos)]);
                }
            } else if (is_bandit(cfg.variant)) {
                std::vector<double> scores;
                scores.reserve(alive_ids.size());
                for (const int k : alive_ids) {
                    scores.push_back(cvar_ucb_score(contributions.values(k), cfg.theta, arms.count(k), t));
                }
                const auto picked = select_devices(scores, cfg.budget);
                const bool explore = server_rng.next_double() < cfg.explore_prob;
                if (explore) {
                    const auto pick = server_rng.sample_without_replacement(
                        static_cast<int>(alive_ids.size()), std::min<int>(cfg.budget, static_cast<int>(alive_ids.size())));
                    for (const int pos : pick) {
                        selected.push_back(alive_ids[static_cast<std::size_t>(pos)]);
                    }
                } else {
                    for (const int pos : picked) {
                        selected.push_back(alive_ids[static_cast<std::size_t>(pos)]);
                    }
                }
            }
            arms.record_selected(selected, t);

            // feedback broadcast
            const double signal = std::max(0.0, ledger.latest());
            const Feedback feedback =
                make_feedback(w, signal, t, cfg.theta, std::max(1, static_cast<int>(alive_ids.size())), cfg.eps_max);

            // client phase: valuation, transmit decision, local training
            std::vector<ClientOutcome> outcomes(static_cast<std::size_t>(K));
            const bool centralized = cfg.variant == Variant::centralized;
            parallel_for(static_cast<int>(selected.size()), cfg.threads, [&](int i) {
                const int k = selected[static_cast<std::size_t>(i)];
                ClientOutcome& out = outcomes[static_cast<std::size_t>(k)];
                out.participated = true;
                if (cfg.variant == Variant::alg1) {
                    auto& hist = histories[static_cast<std::size_t>(k)];
                    // A device with no feedback yet has nothing to base a skip
                    // on and uploads naively; the rule takes over afterwards.
                    const bool first_contact = !hist.has_feedback();
                    out.valuation = evaluate_valuation(w, data.device_val[static_cast<std::size_t>(k)], ds);
                    hist.observe_feedback(feedback);
                    out.regret = hist.record_valuation(t, out.valuation);
                    out.transmit =
                        first_contact ||
                        decide(k, t, out.regret, hist.delta(), feedback, cfg.gamma, cfg.lambda).transmit;
                } else {
                    out.transmit = true;
                }
                if (out.transmit) {
                    out.train = local_train(w, data.device_train[static_cast<std::size_t>(k)], ds, cfg.local_epochs,
                                            cfg.batch_size, cfg.eta, stream_seed(cfg.seed, k, t));
                }
            });

            // aggregation over received updates, folded in ascending device id
            std::vector<int> transmitted;
            std::vector<ClientUpdate> updates;
            for (const int k : selected) {
                if (!outcomes[static_cast<std::size_t>(k)].transmit) {
                    continue;
                }
                transmitted.push_back(k);
                ClientUpdate u;
                u.device_id = k;
                u.round = t;
                u.sample_count = static_cast<int>(data.device_train[static_cast<std::size_t>(k)].size());
                u.grad_equivalent = std::move(outcomes[static_cast<std::size_t>(k)].train.grad_equivalent);
                updates.push_back(std::move(u));
            }

            ModelParams w_next;
            if (centralized) {
                w_next = local_train(w, data.pooled_train, ds, cfg.local_epochs, cfg.batch_size, cfg.eta,
                                     stream_seed(cfg.seed, -1, t))
                             .weights;
            } else {
                w_next = aggregate(w, updates, cfg.eta, agg_denom);
            }

            RoundLog log;
            log.round = t;
            log.selected = selected;
            log.transmitted = transmitted;
            log.links = static_cast<int>(transmitted.size());
            log.regret_signal = signal;
            log.regret_bound = feedback.regret_bound_value;

            if (is_bandit(cfg.variant)) {
                // Contribution valuation over what was actually received.
                std::vector<double> round_values;
                if (!updates.empty()) {
                    const int m = static_cast<int>(updates.size());
                    CoalitionUtilityCache cache(w, updates, cfg.eta, data.server_val_indices, &ds, agg_denom);
                    std::vector<double> phi;
                    if (m <= 12) {
                        cache.precompute_all(cfg.threads);
                        phi = shapley_exact(m, [&](std::uint64_t mask) { return cache.utility(mask); });
                    } else {
                        phi = shapley_mc(m, [&](std::uint64_t mask) { return cache.utility(mask); }, 2000,
                                         server_rng.next_u64());
                    }
                    for (int i = 0; i < m; ++i) {
                        const int k = updates[static_cast<std::size_t>(i)].device_id;
                        contributions.record(k, t, phi[static_cast<std::size_t>(i)]);
                        log.shapley.emplace_back(k, phi[static_cast<std::size_t>(i)]);
                        round_values.push_back(phi[static_cast<std::size_t>(i)]);
                    }
                }

                // Risk accounting over the available devices.
                std::vector<double> risks;
                std::vector<double> improvements;
                risks.reserve(alive_ids.size());
                improvements.reserve(alive_ids.size());
                for (const int k : alive_ids) {
                    const auto values = contributions.values(k);
                    int positive = 0;
                    for (const double v : values) {
                        if (v > cfg.improvement_eps) {
                            ++positive;
                        }
                    }
                    risks.push_back(1.0 - static_cast<double>(positive) /
                                              std::max<std::size_t>(std::size_t{1}, values.size()));
                    improvements.push_back(contributions.mean(k));
                }
                profile = update_risk_profile(profile, risks, improvements);

                double best_cvar = 0.0;
                for (int k = 0; k < K; ++k) {
                    const auto values = contributions.values(k);
                    if (!values.empty()) {
                        best_cvar = std::max(best_cvar, empirical_cvar(values, cfg.theta));
                    }
                }
                ledger.step(round_values, best_cvar);
                log.cvar_regret = ledger.latest();
                log.avg_risk = profile.average_risk;
            }

            if (cfg.variant == Variant::alg1 && cfg.permanent_dropout) {
                for (const int k : selected) {
                    if (!outcomes[static_cast<std::size_t>(k)].transmit) {
                        alive[static_cast<std::size_t>(k)] = 0;
                    }
                }
            }

            w = std::move(w_next);
            log.test_accuracy = accuracy(w, data.test_indices, test_ds);
            log.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
            logs.push_back(std::move(log));
        } catch (const NumericError& e) {
            throw NumericError("round " + std::to_string(t) + ": " + e.what());
        }
    }
    return logs;
}

std::optional<int> rounds_to_accuracy(std::span<const RoundLog> logs, double target) {
    if (!(target > 0.0) || !(target < 1.0)) {
        throw ContractError("rounds_to_accuracy: target must be in (0, 1)");
    }
    for (const auto& log : logs) {
        if (log.test_accuracy >= target) {
            return log.round;
        }
    }
    return std::nullopt;
}

double links_per_round(std::span<const RoundLog> logs, int first_n) {
    if (first_n < 1) {
        throw ContractError("links_per_round: first_n must be >= 1");
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(first_n), logs.size());
    if (take == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
        total += logs[i].links;
    }
    return total / static_cast<double>(take);
}

namespace {

std::string join_ids(std::span<const int> ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) {
            out += ';';
        }
        out += std::to_string(ids[i]);
    }
    return out;
}

} // namespace

void emit_csv(std::span<const RoundLog> logs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("emit_csv: cannot write " + path);
    }
    out << "round,test_accuracy,links,selected,transmitted,regret_signal,regret_bound,avg_risk\n";
    char buf[160];
    for (const auto& log : logs) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,", log.round, log.test_accuracy, log.links);
        out << buf << join_ids(log.selected) << ',' << join_ids(log.transmitted) << ',';
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", log.regret_signal, log.regret_bound, log.avg_risk);
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("emit_csv: write failed for " + path);
    }
}

std::vector<DeltaSweepRow> sweep_delta(const ExperimentConfig& base, std::span<const double> delta_values) {
    if (delta_values.empty()) {
        throw ContractError("sweep_delta: need at least one delta");
    }
    std::vector<DeltaSweepRow> rows;
    rows.reserve(delta_values.size());
    for (const double delta : delta_values) {
        ExperimentConfig cfg = base;
        cfg.variant = Variant::alg1;
        cfg.delta = delta;
        const auto logs = run(cfg);
        DeltaSweepRow row;
        row.delta = delta;
        row.rounds_to_target = rounds_to_accuracy(logs, cfg.accuracy_target);
        row.avg_links = links_per_round(logs, 10);
        rows.push_back(row);
    }
    return rows;
}

void emit_sweep_csv(std::span<const DeltaSweepRow> rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("emit_sweep_csv: cannot write " + path);
    }
    out << "delta,rounds_to_target,avg_links\n";
    char buf[96];
    for (const auto& row : rows) {
        if (row.rounds_to_target.has_value()) {
            std::snprintf(buf, sizeof(buf), "%.6f,%d,%.6f\n", row.delta, *row.rounds_to_target, row.avg_links);
        } else {
            std::snprintf(buf, sizeof(buf), "%.6f,,%.6f\n", row.delta, row.avg_links);
        }
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("emit_sweep_csv: write failed for " + path);
    }
}

} // namespace fedrisk
