#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedrisk {

enum class Variant { alg1, ucb, fedsgd_full, fedsgd_partial, centralized };
enum class DatasetKind { synthetic, mnist };
enum class PartitionKind { iid, shards };
enum class AggregateNorm { participants, global };
enum class ModelKind { linear, mlp };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::synthetic;
    int synth_n = 10000;
    int synth_p = 20;
    int synth_classes = 10;
    double synth_sep = 20.0;
    std::string mnist_images;
    std::string mnist_labels;
    std::string mnist_test_images; // optional; test split is carved when empty
    std::string mnist_test_labels;

    PartitionKind partition = PartitionKind::iid;
    int shards_per_device = 2;

    int devices = 50;    // K
    int budget = 3;      // devices selected per round
    int rounds = 100;
    double eta = 0.001;
    int batch_size = 30;
    int local_epochs = 1;

    double delta = 0.9;                                              // single-run threshold
    std::vector<double> delta_per_device;                            // optional, one entry per device
    std::vector<double> delta_sweep = {0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99};
    double theta = 0.9;        // CVaR level
    double explore_prob = 0.1; // probability of a uniform-random selection round
    double gamma = 2.0;        // relevance gain
    double lambda = 1.0;       // feedback weight on the gain
    double eps_max = 1.0;      // regret-bound scale
    double improvement_eps = 0.001;

    AggregateNorm aggregate_norm = AggregateNorm::participants;
    bool permanent_dropout = false;
    std::uint64_t seed = 1;
    Variant variant = Variant::alg1;

    ModelKind model = ModelKind::linear;
    int hidden = 64;

    double val_fraction = 0.2;        // per-device validation share
    double server_val_fraction = 0.1; // of the training pool
    double test_fraction = 0.2;       // carved from the dataset when no test files
    double accuracy_target = 0.8;

    int threads = 1;
};

// Flat "key = value" file, '#' comments, UTF-8. Unknown keys are an error.
// Values are applied on top of `base`.
ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base = {});
ExperimentConfig parse_config_text(const std::string& text, const ExperimentConfig& base = {},
                                   const std::string& origin = "<config>");

// Throws ConfigError on any invalid combination; called before round 0.
void validate(const ExperimentConfig& cfg);

} // namespace fedrisk
