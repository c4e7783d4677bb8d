#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fedrisk {

// Supervised dataset with features normalized into [0, 1].
struct Dataset {
    int n = 0;       // samples
    int p = 0;       // features per sample
    int classes = 0; // label range [0, classes)

    std::vector<double> features; // row-major, n * p
    std::vector<int> labels;      // n entries

    std::span<const double> row(int i) const {
        return std::span<const double>(features).subspan(
            static_cast<std::size_t>(i) * static_cast<std::size_t>(p),
            static_cast<std::size_t>(p));
    }
};

// Per-device index lists into one Dataset. Lists are pairwise disjoint and
// may cover less than the full dataset (shard partitioning drops remainders).
struct Partition {
    std::vector<std::vector<int>> device_indices;

    int devices() const { return static_cast<int>(device_indices.size()); }
    int size_of(int k) const { return static_cast<int>(device_indices[static_cast<std::size_t>(k)].size()); }
};

// n samples from `classes` Gaussian blobs with means on a scaled simplex-like
// arrangement, min-max normalized per feature column. Labels are assigned
// round-robin so class counts differ by at most one.
Dataset synth_gaussian_mixture(int n, int p, int classes, double class_sep, std::uint64_t seed);

// IDX image/label file pair (big-endian magic 0x803 / 0x801). Byte features
// are scaled by 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Random near-equal split of {0..n-1}: sizes differ by at most one, the first
// n % devices lists take the extra sample.
Partition partition_iid(const Dataset& ds, int devices, std::uint64_t seed);
Partition partition_iid_indices(std::span<const int> pool, int devices, std::uint64_t seed);

// Label-sorted shard assignment: the pool is sorted by label, cut into
// devices * shards_per_device contiguous shards (remainder discarded), and
// each device draws shards_per_device shards uniformly without replacement.
Partition partition_noniid_shards(const Dataset& ds, int devices, int shards_per_device, std::uint64_t seed);
Partition partition_noniid_shards_indices(std::span<const int> pool, std::span<const int> labels, int devices,
                                          int shards_per_device, std::uint64_t seed);

// Disjoint (train, val) split; val size = clamp(round(val_fraction * n), 1, n - 1).
std::pair<std::vector<int>, std::vector<int>> split_train_val(std::span<const int> indices, double val_fraction,
                                                              std::uint64_t seed);

} // namespace fedrisk
