#include "fedrisk/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fedrisk/errors.hpp"

namespace fedrisk {

const char* to_string(Variant v) {
    switch (v) {
    case Variant::alg1: return "alg1";
    case Variant::ucb: return "ucb";
    case Variant::fedsgd_full: return "fedsgd_full";
    case Variant::fedsgd_partial: return "fedsgd_partial";
    case Variant::centralized: return "centralized";
    }
    return "?";
}

Variant variant_from_string(const std::string& name) {
    if (name == "alg1") return Variant::alg1;
    if (name == "ucb") return Variant::ucb;
    if (name == "fedsgd_full") return Variant::fedsgd_full;
    if (name == "fedsgd_partial") return Variant::fedsgd_partial;
    if (name == "centralized") return Variant::centralized;
    throw ConfigError("unknown variant '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double parse_double(const std::string& value, const std::string& key) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: bad numeric value '" + value + "' for key '" + key + "'");
    }
    return out;
}

long long parse_int(const std::string& value, const std::string& key) {
    long long out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: bad integer value '" + value + "' for key '" + key + "'");
    }
    return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    std::uint64_t out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: bad unsigned value '" + value + "' for key '" + key + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean value '" + value + "' for key '" + key + "'");
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(parse_double(item, key));
        }
    }
    if (out.empty()) {
        throw ConfigError("config: empty list for key '" + key + "'");
    }
    return out;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        if (value == "synthetic") cfg.dataset = DatasetKind::synthetic;
        else if (value == "mnist") cfg.dataset = DatasetKind::mnist;
        else throw ConfigError("config: dataset must be synthetic or mnist");
    } else if (key == "n") cfg.synth_n = static_cast<int>(parse_int(value, key));
    else if (key == "p") cfg.synth_p = static_cast<int>(parse_int(value, key));
    else if (key == "classes") cfg.synth_classes = static_cast<int>(parse_int(value, key));
    else if (key == "class_sep") cfg.synth_sep = parse_double(value, key);
    else if (key == "mnist_images") cfg.mnist_images = value;
    else if (key == "mnist_labels") cfg.mnist_labels = value;
    else if (key == "mnist_test_images") cfg.mnist_test_images = value;
    else if (key == "mnist_test_labels") cfg.mnist_test_labels = value;
    else if (key == "partition") {
        if (value == "iid") cfg.partition = PartitionKind::iid;
        else if (value == "shards") cfg.partition = PartitionKind::shards;
        else throw ConfigError("config: partition must be iid or shards");
    } else if (key == "shards_per_device") cfg.shards_per_device = static_cast<int>(parse_int(value, key));
    else if (key == "devices") cfg.devices = static_cast<int>(parse_int(value, key));
    else if (key == "budget") cfg.budget = static_cast<int>(parse_int(value, key));
    else if (key == "rounds") cfg.rounds = static_cast<int>(parse_int(value, key));
    else if (key == "eta") cfg.eta = parse_double(value, key);
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(value, key));
    else if (key == "local_epochs") cfg.local_epochs = static_cast<int>(parse_int(value, key));
    else if (key == "delta") cfg.delta = parse_double(value, key);
    else if (key == "delta_per_device") cfg.delta_per_device = parse_double_list(value, key);
    else if (key == "delta_sweep") cfg.delta_sweep = parse_double_list(value, key);
    else if (key == "theta") cfg.theta = parse_double(value, key);
    else if (key == "explore_prob") cfg.explore_prob = parse_double(value, key);
    else if (key == "gamma") cfg.gamma = parse_double(value, key);
    else if (key == "lambda") cfg.lambda = parse_double(value, key);
    else if (key == "eps_max") cfg.eps_max = parse_double(value, key);
    else if (key == "improvement_eps") cfg.improvement_eps = parse_double(value, key);
    else if (key == "aggregate_norm") {
        if (value == "participants") cfg.aggregate_norm = AggregateNorm::participants;
        else if (value == "global") cfg.aggregate_norm = AggregateNorm::global;
        else throw ConfigError("config: aggregate_norm must be participants or global");
    } else if (key == "permanent_dropout") cfg.permanent_dropout = parse_bool(value, key);
    else if (key == "seed") cfg.seed = parse_u64(value, key);
    else if (key == "variant") cfg.variant = variant_from_string(value);
    else if (key == "model") {
        if (value == "linear") cfg.model = ModelKind::linear;
        else if (value == "mlp") cfg.model = ModelKind::mlp;
        else throw ConfigError("config: model must be linear or mlp");
    } else if (key == "hidden") cfg.hidden = static_cast<int>(parse_int(value, key));
    else if (key == "val_fraction") cfg.val_fraction = parse_double(value, key);
    else if (key == "server_val_fraction") cfg.server_val_fraction = parse_double(value, key);
    else if (key == "test_fraction") cfg.test_fraction = parse_double(value, key);
    else if (key == "accuracy_target") cfg.accuracy_target = parse_double(value, key);
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(value, key));
    else throw ConfigError("config: unknown key '" + key + "'");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const ExperimentConfig& base, const std::string& origin) {
    ExperimentConfig cfg = base;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        try {
            apply(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base, path);
}

void validate(const ExperimentConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError("config: " + what);
        }
    };
    require(cfg.devices >= 1, "devices must be >= 1");
    require(cfg.budget >= 1 && cfg.budget <= cfg.devices, "budget must be in [1, devices]");
    require(cfg.rounds >= 1, "rounds must be >= 1");
    require(cfg.eta >= 0.0, "eta must be >= 0");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");
    require(cfg.local_epochs >= 1, "local_epochs must be >= 1");
    require(cfg.delta >= 0.0 && cfg.delta <= 1.0, "delta must be in [0, 1]");
    if (!cfg.delta_per_device.empty()) {
        require(static_cast<int>(cfg.delta_per_device.size()) == cfg.devices,
                "delta_per_device must list one value per device");
        for (const double d : cfg.delta_per_device) {
            require(d >= 0.0 && d <= 1.0, "delta_per_device values must be in [0, 1]");
        }
    }
    require(!cfg.delta_sweep.empty(), "delta_sweep must be nonempty");
    for (const double d : cfg.delta_sweep) {
        require(d >= 0.0 && d <= 1.0, "delta_sweep values must be in [0, 1]");
    }
    require(cfg.theta > 0.0 && cfg.theta <= 1.0, "theta must be in (0, 1]");
    require(cfg.explore_prob >= 0.0 && cfg.explore_prob <= 1.0, "explore_prob must be in [0, 1]");
    require(cfg.gamma > 0.0, "gamma must be > 0");
    require(cfg.lambda >= 0.0, "lambda must be >= 0");
    require(cfg.eps_max > 0.0, "eps_max must be > 0");
    require(cfg.improvement_eps >= 0.0, "improvement_eps must be >= 0");
    require(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0, "val_fraction must be in (0, 1)");
    require(cfg.server_val_fraction > 0.0 && cfg.server_val_fraction < 1.0, "server_val_fraction must be in (0, 1)");
    require(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0, "test_fraction must be in (0, 1)");
    require(cfg.accuracy_target > 0.0 && cfg.accuracy_target < 1.0, "accuracy_target must be in (0, 1)");
    require(cfg.threads >= 1, "threads must be >= 1");
    if (cfg.dataset == DatasetKind::synthetic) {
        require(cfg.synth_classes >= 2, "classes must be >= 2");
        require(cfg.synth_p >= 2, "p must be >= 2");
        require(cfg.synth_n >= cfg.synth_classes, "n must be >= classes");
        require(cfg.synth_sep > 0.0, "class_sep must be > 0");
    } else {
        require(!cfg.mnist_images.empty() && !cfg.mnist_labels.empty(),
                "mnist_images and mnist_labels are required for dataset = mnist");
        require(cfg.mnist_test_images.empty() == cfg.mnist_test_labels.empty(),
                "mnist test images and labels must be given together");
    }
    if (cfg.model == ModelKind::mlp) {
        require(cfg.hidden >= 1, "hidden must be >= 1");
    }
    if (cfg.partition == PartitionKind::shards) {
        require(cfg.shards_per_device >= 1, "shards_per_device must be >= 1");
    }
}

} // namespace fedrisk
