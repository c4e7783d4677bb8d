#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "fedrisk/data.hpp"
#include "fedrisk/errors.hpp"
#include "fedrisk/rng.hpp"

using namespace fedrisk;

TEST_CASE("synthetic mixture balances labels and normalizes features") {
    const auto ds = synth_gaussian_mixture(10, 2, 2, 3.0, 1);
    REQUIRE(ds.n == 10);
    REQUIRE(ds.p == 2);
    std::map<int, int> counts;
    for (const int label : ds.labels) {
        ++counts[label];
    }
    CHECK(counts[0] == 5);
    CHECK(counts[1] == 5);
    for (const double v : ds.features) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("synthetic mixture: 100 samples over 10 classes gives 10 each") {
    const auto ds = synth_gaussian_mixture(100, 5, 10, 2.0, 3);
    std::map<int, int> counts;
    for (const int label : ds.labels) {
        ++counts[label];
    }
    for (int c = 0; c < 10; ++c) {
        CHECK(counts[c] == 10);
    }
}

TEST_CASE("synthetic mixture is bit-identical per seed") {
    const auto a = synth_gaussian_mixture(64, 4, 4, 2.5, 99);
    const auto b = synth_gaussian_mixture(64, 4, 4, 2.5, 99);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    const auto c = synth_gaussian_mixture(64, 4, 4, 2.5, 100);
    CHECK(a.features != c.features);
}

TEST_CASE("synthetic mixture rejects bad dimensions") {
    CHECK_THROWS_AS(synth_gaussian_mixture(1, 2, 2, 1.0, 0), ConfigError);
    CHECK_THROWS_AS(synth_gaussian_mixture(10, 1, 2, 1.0, 0), ConfigError);
    CHECK_THROWS_AS(synth_gaussian_mixture(10, 2, 1, 1.0, 0), ConfigError);
    CHECK_THROWS_AS(synth_gaussian_mixture(10, 2, 2, 0.0, 0), ConfigError);
}

namespace {

// Test-only IDX writer; the loader is checked against these exact bytes.
void write_idx_pair(const std::string& img_path, const std::string& lab_path, int count, int rows, int cols,
                    const std::vector<unsigned char>& pixels, const std::vector<unsigned char>& labels) {
    auto put_u32 = [](std::ofstream& out, std::uint32_t v) {
        const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    };
    std::ofstream img(img_path, std::ios::binary);
    put_u32(img, 0x00000803u);
    put_u32(img, static_cast<std::uint32_t>(count));
    put_u32(img, static_cast<std::uint32_t>(rows));
    put_u32(img, static_cast<std::uint32_t>(cols));
    img.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    std::ofstream lab(lab_path, std::ios::binary);
    put_u32(lab, 0x00000801u);
    put_u32(lab, static_cast<std::uint32_t>(count));
    lab.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("idx loader round-trips an in-memory fixture") {
    const int count = 3, rows = 2, cols = 2;
    std::vector<unsigned char> pixels = {0, 255, 128, 64, 10, 20, 30, 40, 0, 0, 0, 0};
    std::vector<unsigned char> labels = {1, 0, 2};
    const auto img = temp_file("fedrisk_test_images.idx");
    const auto lab = temp_file("fedrisk_test_labels.idx");
    write_idx_pair(img, lab, count, rows, cols, pixels, labels);

    const auto ds = load_idx(img, lab);
    REQUIRE(ds.n == 3);
    REQUIRE(ds.p == 4);
    CHECK(ds.classes == 3);
    for (int i = 0; i < ds.n * ds.p; ++i) {
        CHECK(ds.features[static_cast<std::size_t>(i)] ==
              doctest::Approx(pixels[static_cast<std::size_t>(i)] / 255.0));
    }
    CHECK(ds.labels == std::vector<int>{1, 0, 2});
    // All-zero image row maps to all-zero features.
    for (int j = 0; j < 4; ++j) {
        CHECK(ds.features[static_cast<std::size_t>(2 * 4 + j)] == 0.0);
    }
    std::remove(img.c_str());
    std::remove(lab.c_str());
}

TEST_CASE("idx loader names the byte offset on malformed input") {
    const auto img = temp_file("fedrisk_bad_images.idx");
    const auto lab = temp_file("fedrisk_bad_labels.idx");

    SUBCASE("bad image magic") {
        {
            std::ofstream out(img, std::ios::binary);
            const unsigned char bytes[17] = {0, 0, 9, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0};
            out.write(reinterpret_cast<const char*>(bytes), 17);
            std::ofstream lout(lab, std::ios::binary);
            const unsigned char lbytes[9] = {0, 0, 8, 1, 0, 0, 0, 1, 0};
            lout.write(reinterpret_cast<const char*>(lbytes), 9);
        }
        try {
            load_idx(img, lab);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("bad image magic") != std::string::npos);
            CHECK(std::string(e.what()).find("byte offset 0") != std::string::npos);
        }
    }
    SUBCASE("truncated image payload") {
        write_idx_pair(img, lab, 2, 2, 2, {1, 2, 3}, {0, 1}); // 3 of 8 pixel bytes
        try {
            load_idx(img, lab);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
        }
    }
    SUBCASE("label count mismatch") {
        write_idx_pair(img, lab, 2, 1, 1, {5, 6}, {0, 1});
        // Rewrite labels with a different count.
        std::ofstream out(lab, std::ios::binary);
        const unsigned char bytes[9] = {0, 0, 8, 1, 0, 0, 0, 1, 0};
        out.write(reinterpret_cast<const char*>(bytes), 9);
        out.close();
        CHECK_THROWS_AS(load_idx(img, lab), ParseError);
    }
    std::remove(img.c_str());
    std::remove(lab.c_str());
}

TEST_CASE("iid partition sizes differ by at most one") {
    const auto ds = synth_gaussian_mixture(100, 2, 2, 2.0, 7);
    const auto part = partition_iid(ds, 50, 17);
    REQUIRE(part.devices() == 50);
    for (int k = 0; k < 50; ++k) {
        CHECK(part.size_of(k) == 2);
    }

    const auto ds2 = synth_gaussian_mixture(101, 2, 2, 2.0, 7);
    const auto part2 = partition_iid(ds2, 50, 17);
    int threes = 0;
    for (int k = 0; k < 50; ++k) {
        CHECK(part2.size_of(k) >= 2);
        CHECK(part2.size_of(k) <= 3);
        threes += part2.size_of(k) == 3;
    }
    CHECK(threes == 1);
}

TEST_CASE("iid partition covers the whole dataset") {
    const auto ds = synth_gaussian_mixture(120, 2, 3, 2.0, 5);
    const auto part = partition_iid(ds, 8, 3);
    std::set<int> all;
    for (int k = 0; k < part.devices(); ++k) {
        for (const int idx : part.device_indices[static_cast<std::size_t>(k)]) {
            CHECK(all.insert(idx).second); // disjoint
        }
    }
    CHECK(all.size() == 120);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 119);
}

TEST_CASE("shard partition: 10 label-pure shards over 5 devices") {
    // 100 samples, 10 classes, 10 samples each; shard size 10 equals the
    // class size, so every shard is label-pure.
    const auto ds = synth_gaussian_mixture(100, 5, 10, 2.0, 23);
    const auto part = partition_noniid_shards(ds, 5, 2, 11);
    REQUIRE(part.devices() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(part.size_of(k) == 20);
        std::set<int> device_labels;
        for (const int idx : part.device_indices[static_cast<std::size_t>(k)]) {
            device_labels.insert(ds.labels[static_cast<std::size_t>(idx)]);
        }
        CHECK(device_labels.size() <= 2);
    }
}

TEST_CASE("shard partition: single device single shard holds all retained samples") {
    const auto ds = synth_gaussian_mixture(30, 2, 3, 2.0, 4);
    const auto part = partition_noniid_shards(ds, 1, 1, 9);
    REQUIRE(part.devices() == 1);
    CHECK(part.size_of(0) == 30);
}

TEST_CASE("shard partition rejects an oversubscribed pool") {
    const auto ds = synth_gaussian_mixture(10, 2, 2, 2.0, 4);
    CHECK_THROWS_AS(partition_noniid_shards(ds, 6, 2, 1), ConfigError);
}

TEST_CASE("split_train_val obeys the rounding and floor rules") {
    std::vector<int> ten(10);
    std::iota(ten.begin(), ten.end(), 0);
    const auto [train, val] = split_train_val(ten, 0.2, 5);
    CHECK(train.size() == 8);
    CHECK(val.size() == 2);

    std::vector<int> two = {4, 9};
    const auto [t2, v2] = split_train_val(two, 0.01, 5);
    CHECK(t2.size() == 1);
    CHECK(v2.size() == 1);

    std::vector<int> one = {3};
    CHECK_THROWS_AS(split_train_val(one, 0.5, 5), ConfigError);
}

TEST_CASE("split_train_val always produces disjoint sets") {
    SplitRng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(40));
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 100);
        const double frac = 0.05 + 0.9 * rng.next_double();
        const auto [train, val] = split_train_val(idx, frac, rng.next_u64());
        REQUIRE(!train.empty());
        REQUIRE(!val.empty());
        std::set<int> seen(train.begin(), train.end());
        for (const int v : val) {
            CHECK(seen.insert(v).second);
        }
        CHECK(seen.size() == static_cast<std::size_t>(n));
    }
}

TEST_CASE("partition property sweep: disjointness and size accounting") {
    SplitRng rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 20 + static_cast<int>(rng.next_below(200));
        const int K = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto ds = synth_gaussian_mixture(n, 3, 2, 2.0, rng.next_u64());
        const auto part = partition_iid(ds, K, rng.next_u64());
        std::set<int> seen;
        long total = 0;
        for (int k = 0; k < K; ++k) {
            total += part.size_of(k);
            for (const int idx : part.device_indices[static_cast<std::size_t>(k)]) {
                CHECK(idx >= 0);
                CHECK(idx < n);
                CHECK(seen.insert(idx).second);
            }
        }
        CHECK(total == n);
    }
}

TEST_CASE("shard partition label-count property when shards divide classes") {
    SplitRng rng(321);
    for (int trial = 0; trial < 20; ++trial) {
        const int classes = 2 + static_cast<int>(rng.next_below(6));
        const int per_class = 6 + static_cast<int>(rng.next_below(10));
        const int n = classes * per_class;
        const auto ds = synth_gaussian_mixture(n, 3, classes, 2.0, rng.next_u64());
        // Pick device/shard counts so the shard size divides the class size.
        const int shards_per_device = 1 + static_cast<int>(rng.next_below(2));
        for (int devices = 1; devices <= classes; ++devices) {
            const int shard_count = devices * shards_per_device;
            if (n % shard_count != 0 || per_class % (n / shard_count) != 0) {
                continue;
            }
            const auto part = partition_noniid_shards(ds, devices, shards_per_device, rng.next_u64());
            for (int k = 0; k < devices; ++k) {
                std::set<int> device_labels;
                for (const int idx : part.device_indices[static_cast<std::size_t>(k)]) {
                    device_labels.insert(ds.labels[static_cast<std::size_t>(idx)]);
                }
                CHECK(static_cast<int>(device_labels.size()) <= shards_per_device);
            }
        }
    }
}

TEST_CASE("partitioners are pure functions of inputs and seed") {
    const auto ds = synth_gaussian_mixture(90, 3, 3, 2.0, 8);
    const auto a = partition_iid(ds, 7, 42);
    const auto b = partition_iid(ds, 7, 42);
    CHECK(a.device_indices == b.device_indices);
    const auto c = partition_noniid_shards(ds, 3, 2, 42);
    const auto d = partition_noniid_shards(ds, 3, 2, 42);
    CHECK(c.device_indices == d.device_indices);
}
