#include "fedrisk/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "fedrisk/errors.hpp"
#include "fedrisk/rng.hpp"

namespace fedrisk {

Dataset synth_gaussian_mixture(int n, int p, int classes, double class_sep, std::uint64_t seed) {
    if (classes < 2 || p < 2 || n < classes || !(class_sep > 0.0)) {
        throw ConfigError("synth_gaussian_mixture: need classes >= 2, p >= 2, n >= classes, class_sep > 0");
    }
    Dataset ds;
    ds.n = n;
    ds.p = p;
    ds.classes = classes;
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.features.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));

    // Class c sits at class_sep * (1 + c/p) along axis c mod p; distinct for
    // every c, spacing grows as classes wrap around the axes.
    SplitRng rng(stream_seed(seed, -2, 0));
    for (int i = 0; i < n; ++i) {
        const int label = i % classes;
        ds.labels[static_cast<std::size_t>(i)] = label;
        const int axis = label % p;
        const double scale = class_sep * (1.0 + static_cast<double>(label / p));
        double* out = &ds.features[static_cast<std::size_t>(i) * static_cast<std::size_t>(p)];
        for (int j = 0; j < p; ++j) {
            out[j] = (j == axis ? scale : 0.0) + rng.next_normal();
        }
    }

    // Min-max normalize each column into [0, 1].
    for (int j = 0; j < p; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double v = ds.features[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        for (int i = 0; i < n; ++i) {
            double& v = ds.features[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) + j];
            v = range > 1e-300 ? (v - lo) / range : 0.5;
        }
    }
    return ds;
}

namespace {

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& buf, std::size_t offset, const std::string& path) {
    if (offset + 4 > buf.size()) {
        throw ParseError(path + ": truncated at byte offset " + std::to_string(buf.size()) +
                         " (need 4 bytes at offset " + std::to_string(offset) + ")");
    }
    return (static_cast<std::uint32_t>(buf[offset]) << 24) | (static_cast<std::uint32_t>(buf[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(buf[offset + 2]) << 8) | static_cast<std::uint32_t>(buf[offset + 3]);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file_bytes(images_path);
    const auto lab = read_file_bytes(labels_path);

    const std::uint32_t img_magic = read_u32_be(img, 0, images_path);
    if (img_magic != 0x00000803u) {
        char msg[160];
        std::snprintf(msg, sizeof(msg), "%s: bad image magic 0x%08x at byte offset 0 (want 0x00000803)",
                      images_path.c_str(), img_magic);
        throw ParseError(msg);
    }
    const std::uint32_t count = read_u32_be(img, 4, images_path);
    const std::uint32_t rows = read_u32_be(img, 8, images_path);
    const std::uint32_t cols = read_u32_be(img, 12, images_path);
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    const std::size_t want_img = 16 + static_cast<std::size_t>(count) * pixels;
    if (img.size() < want_img) {
        throw ParseError(images_path + ": truncated at byte offset " + std::to_string(img.size()) + " (expected " +
                         std::to_string(want_img) + " bytes)");
    }

    const std::uint32_t lab_magic = read_u32_be(lab, 0, labels_path);
    if (lab_magic != 0x00000801u) {
        char msg[160];
        std::snprintf(msg, sizeof(msg), "%s: bad label magic 0x%08x at byte offset 0 (want 0x00000801)",
                      labels_path.c_str(), lab_magic);
        throw ParseError(msg);
    }
    const std::uint32_t lab_count = read_u32_be(lab, 4, labels_path);
    if (lab_count != count) {
        throw ParseError(labels_path + ": label count " + std::to_string(lab_count) + " at byte offset 4 != image count " +
                         std::to_string(count));
    }
    const std::size_t want_lab = 8 + static_cast<std::size_t>(lab_count);
    if (lab.size() < want_lab) {
        throw ParseError(labels_path + ": truncated at byte offset " + std::to_string(lab.size()) + " (expected " +
                         std::to_string(want_lab) + " bytes)");
    }

    Dataset ds;
    ds.n = static_cast<int>(count);
    ds.p = static_cast<int>(pixels);
    ds.features.resize(static_cast<std::size_t>(count) * pixels);
    ds.labels.resize(count);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * pixels; ++i) {
        ds.features[i] = static_cast<double>(img[16 + i]) / 255.0;
    }
    int max_label = 0;
    for (std::uint32_t i = 0; i < lab_count; ++i) {
        ds.labels[i] = static_cast<int>(lab[8 + i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.classes = std::max(2, max_label + 1);
    return ds;
}

Partition partition_iid_indices(std::span<const int> pool, int devices, std::uint64_t seed) {
    const int n = static_cast<int>(pool.size());
    if (devices < 1 || devices > n) {
        throw ConfigError("partition_iid: need 1 <= devices <= samples (" + std::to_string(devices) + " vs " +
                          std::to_string(n) + ")");
    }
    std::vector<int> order(pool.begin(), pool.end());
    SplitRng rng(stream_seed(seed, -2, 1));
    rng.shuffle(order);

    Partition part;
    part.device_indices.resize(static_cast<std::size_t>(devices));
    const int base = n / devices;
    const int extra = n % devices;
    std::size_t pos = 0;
    for (int k = 0; k < devices; ++k) {
        const int take = base + (k < extra ? 1 : 0);
        auto& list = part.device_indices[static_cast<std::size_t>(k)];
        list.assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + take));
        std::sort(list.begin(), list.end());
        pos += static_cast<std::size_t>(take);
    }
    return part;
}

Partition partition_iid(const Dataset& ds, int devices, std::uint64_t seed) {
    std::vector<int> all(static_cast<std::size_t>(ds.n));
    std::iota(all.begin(), all.end(), 0);
    return partition_iid_indices(all, devices, seed);
}

Partition partition_noniid_shards_indices(std::span<const int> pool, std::span<const int> labels, int devices,
                                          int shards_per_device, std::uint64_t seed) {
    const int n = static_cast<int>(pool.size());
    if (devices < 1 || shards_per_device < 1) {
        throw ConfigError("partition_noniid_shards: devices and shards_per_device must be >= 1");
    }
    const long long shard_count = static_cast<long long>(devices) * shards_per_device;
    if (shard_count > n) {
        throw ConfigError("partition_noniid_shards: devices * shards_per_device (" + std::to_string(shard_count) +
                          ") exceeds sample count " + std::to_string(n));
    }
    const int shard_size = static_cast<int>(n / shard_count); // remainder discarded

    // Stable label order so identical inputs give identical shards.
    std::vector<int> order(pool.begin(), pool.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (labels[static_cast<std::size_t>(a)] != labels[static_cast<std::size_t>(b)]) {
            return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
        }
        return a < b;
    });

    std::vector<int> shard_ids(static_cast<std::size_t>(shard_count));
    std::iota(shard_ids.begin(), shard_ids.end(), 0);
    SplitRng rng(stream_seed(seed, -2, 2));
    rng.shuffle(shard_ids);

    Partition part;
    part.device_indices.resize(static_cast<std::size_t>(devices));
    for (int k = 0; k < devices; ++k) {
        auto& list = part.device_indices[static_cast<std::size_t>(k)];
        list.reserve(static_cast<std::size_t>(shards_per_device) * static_cast<std::size_t>(shard_size));
        for (int s = 0; s < shards_per_device; ++s) {
            const int shard = shard_ids[static_cast<std::size_t>(k) * static_cast<std::size_t>(shards_per_device) +
                                        static_cast<std::size_t>(s)];
            const auto begin = order.begin() + static_cast<std::ptrdiff_t>(shard) * shard_size;
            list.insert(list.end(), begin, begin + shard_size);
        }
        std::sort(list.begin(), list.end());
    }
    return part;
}

Partition partition_noniid_shards(const Dataset& ds, int devices, int shards_per_device, std::uint64_t seed) {
    std::vector<int> all(static_cast<std::size_t>(ds.n));
    std::iota(all.begin(), all.end(), 0);
    return partition_noniid_shards_indices(all, ds.labels, devices, shards_per_device, seed);
}

std::pair<std::vector<int>, std::vector<int>> split_train_val(std::span<const int> indices, double val_fraction,
                                                              std::uint64_t seed) {
    const int n = static_cast<int>(indices.size());
    if (n < 2) {
        throw ConfigError("split_train_val: need at least 2 indices");
    }
    if (!(val_fraction > 0.0) || !(val_fraction < 1.0)) {
        throw ConfigError("split_train_val: val_fraction must be in (0, 1)");
    }
    std::vector<int> order(indices.begin(), indices.end());
    SplitRng rng(stream_seed(seed, -2, 3));
    rng.shuffle(order);

    int val_n = static_cast<int>(std::llround(val_fraction * n));
    val_n = std::clamp(val_n, 1, n - 1);

    std::vector<int> val(order.begin(), order.begin() + val_n);
    std::vector<int> train(order.begin() + val_n, order.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    return {std::move(train), std::move(val)};
}

} // namespace fedrisk
