#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "fedrisk/data.hpp"
#include "fedrisk/errors.hpp"
#include "fedrisk/rng.hpp"
#include "fedrisk/valuation.hpp"

using namespace fedrisk;

namespace {

// Random game with values on a dyadic grid (multiples of 2^-20), so exact
// Shapley sums are exact in double arithmetic.
std::vector<double> dyadic_game(int players, SplitRng& rng) {
    std::vector<double> u(std::size_t{1} << players);
    for (auto& v : u) {
        v = static_cast<double>(rng.next_below(std::uint64_t{1} << 20)) * 0x1.0p-20;
    }
    return u;
}

UtilityFn table_fn(const std::vector<double>& table) {
    return [&table](std::uint64_t mask) { return table[mask]; };
}

// Near-additive bounded game: per-player worth plus small coalition noise.
// This is the shape coalition accuracies take in the simulator.
std::vector<double> near_additive_game(int players, SplitRng& rng) {
    std::vector<double> worth(static_cast<std::size_t>(players));
    for (auto& v : worth) {
        v = 0.15 * rng.next_double();
    }
    std::vector<double> u(std::size_t{1} << players);
    for (std::uint64_t mask = 0; mask < u.size(); ++mask) {
        double total = 0.2;
        for (int k = 0; k < players; ++k) {
            if (mask & (std::uint64_t{1} << k)) {
                total += worth[static_cast<std::size_t>(k)];
            }
        }
        total += 0.04 * rng.next_double() - 0.02;
        u[mask] = std::clamp(total, 0.0, 1.0);
    }
    return u;
}

} // namespace

TEST_CASE("two-player worked example") {
    // Oracle: enumerate both orderings by hand.
    //   order (0,1): marginals 0.3, 0.2;  order (1,0): marginals 0.4, 0.1.
    std::vector<double> u = {0.0, 0.3, 0.1, 0.5};
    const auto phi = shapley_exact(2, table_fn(u));
    CHECK(phi[0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(phi[1] == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("dummy player gets exactly zero") {
    SplitRng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 3 + static_cast<int>(rng.next_below(4)); // 3..6
        auto base = dyadic_game(m - 1, rng);
        const int dummy = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
        // Insert a player whose marginal contribution is zero everywhere.
        auto u = [&](std::uint64_t mask) {
            const std::uint64_t low = mask & ((std::uint64_t{1} << dummy) - 1);
            const std::uint64_t high = (mask >> (dummy + 1)) << dummy;
            return base[low | high];
        };
        const auto phi = shapley_exact(m, u);
        CHECK(phi[static_cast<std::size_t>(dummy)] == 0.0);
    }
}

TEST_CASE("symmetric players get exactly equal values") {
    SplitRng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 3 + static_cast<int>(rng.next_below(4));
        auto raw = dyadic_game(m, rng);
        const int i = 0;
        const int j = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m - 1)));
        // Symmetrize by assigning each orbit its canonical member's value.
        auto swap_mask = [&](std::uint64_t mask) {
            const std::uint64_t bi = (mask >> i) & 1;
            const std::uint64_t bj = (mask >> j) & 1;
            std::uint64_t out = mask & ~((std::uint64_t{1} << i) | (std::uint64_t{1} << j));
            out |= bi << j;
            out |= bj << i;
            return out;
        };
        auto u = [&](std::uint64_t mask) { return raw[std::min(mask, swap_mask(mask))]; };
        const auto phi = shapley_exact(m, u);
        CHECK(phi[static_cast<std::size_t>(i)] == phi[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("efficiency holds to 1e-9 on random bounded games") {
    SplitRng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng.next_below(7)); // 2..8
        const auto u = dyadic_game(m, rng);
        const auto phi = shapley_exact(m, table_fn(u));
        const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
        const double expected = u.back() - u.front();
        CHECK(std::abs(total - expected) < 1e-9);
    }
}

TEST_CASE("constant shift of the utility leaves exact values unchanged") {
    SplitRng rng(4);
    const int m = 5;
    const auto u = dyadic_game(m, rng);
    std::vector<double> shifted = u;
    for (auto& v : shifted) {
        v += 0.25;
    }
    const auto a = shapley_exact(m, table_fn(u));
    const auto b = shapley_exact(m, table_fn(shifted));
    for (int k = 0; k < m; ++k) {
        CHECK(a[static_cast<std::size_t>(k)] == doctest::Approx(b[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("shapley_exact rejects more than 12 players") {
    CHECK_THROWS_AS(shapley_exact(13, [](std::uint64_t) { return 0.0; }), ContractError);
}

TEST_CASE("feeding all permutations reproduces the exact value") {
    SplitRng rng(5);
    const auto u = dyadic_game(3, rng);
    const auto exact = shapley_exact(3, table_fn(u));
    std::vector<std::vector<int>> perms;
    std::vector<int> p = {0, 1, 2};
    std::sort(p.begin(), p.end());
    do {
        perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    REQUIRE(perms.size() == 6);
    const auto mc = shapley_from_permutations(3, table_fn(u), perms);
    for (int k = 0; k < 3; ++k) {
        CHECK(mc[static_cast<std::size_t>(k)] == doctest::Approx(exact[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo stays within 0.02 of exact on utility-shaped games") {
    SplitRng rng(6);
    double worst = 0.0;
    for (int game = 0; game < 20; ++game) {
        const auto u = near_additive_game(6, rng);
        const auto exact = shapley_exact(6, table_fn(u));
        const auto mc = shapley_mc(6, table_fn(u), 2000, 1000 + static_cast<std::uint64_t>(game));
        for (int k = 0; k < 6; ++k) {
            worst = std::max(worst,
                             std::abs(mc[static_cast<std::size_t>(k)] - exact[static_cast<std::size_t>(k)]));
        }
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("monte carlo preserves efficiency across seeds") {
    SplitRng rng(7);
    const auto u = near_additive_game(5, rng);
    double mean_total = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto mc = shapley_mc(5, table_fn(u), 40, seed);
        mean_total += std::accumulate(mc.begin(), mc.end(), 0.0) / 50.0;
    }
    CHECK(std::abs(mean_total - (u.back() - u.front())) < 0.01);
}

TEST_CASE("monte carlo error shrinks as permutations grow") {
    SplitRng rng(8);
    const auto u = dyadic_game(5, rng);
    const auto exact = shapley_exact(5, table_fn(u));
    auto mean_linf = [&](int perms) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto mc = shapley_mc(5, table_fn(u), perms, 500 + seed);
            double linf = 0.0;
            for (int k = 0; k < 5; ++k) {
                linf = std::max(linf,
                                std::abs(mc[static_cast<std::size_t>(k)] - exact[static_cast<std::size_t>(k)]));
            }
            total += linf / 20.0;
        }
        return total;
    };
    const double e1 = mean_linf(10);
    const double e2 = mean_linf(100);
    const double e3 = mean_linf(1000);
    CHECK(e2 <= e1);
    CHECK(e3 <= e2);
}

TEST_CASE("coalition utility cache memoizes and matches conventions") {
    const auto ds = synth_gaussian_mixture(120, 4, 3, 6.0, 33);
    std::vector<int> val(40);
    std::iota(val.begin(), val.end(), 80);

    const auto layout = ModelLayout::make_linear(ds.p, ds.classes);
    ModelParams w = init_params(layout, 3);

    std::vector<ClientUpdate> updates;
    SplitRng rng(9);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> g(static_cast<std::size_t>(layout.dim()));
        for (auto& v : g) {
            v = 2.0 * rng.next_double() - 1.0;
        }
        updates.push_back({k, 1, std::move(g), 10});
    }

    CoalitionUtilityCache cache(w, updates, 0.05, val, &ds);
    REQUIRE(cache.players() == 3);

    // Empty coalition is the pre-round accuracy.
    CHECK(cache.utility(0) == accuracy(w, val, ds));

    const double u5 = cache.utility(5);
    const long evals = cache.evaluations();
    CHECK(cache.utility(5) == u5); // second query served from the cache
    CHECK(cache.evaluations() == evals);

    // Identical updates with equal mass give identical singleton utilities.
    std::vector<ClientUpdate> twins;
    twins.push_back({0, 1, updates[0].grad_equivalent, 10});
    twins.push_back({1, 1, updates[0].grad_equivalent, 10});
    CoalitionUtilityCache twin_cache(w, twins, 0.05, val, &ds);
    CHECK(twin_cache.utility(0b01) == twin_cache.utility(0b10));
}

TEST_CASE("precompute_all fills the table identically for any thread count") {
    const auto ds = synth_gaussian_mixture(60, 3, 2, 5.0, 17);
    std::vector<int> val(20);
    std::iota(val.begin(), val.end(), 40);
    const auto layout = ModelLayout::make_linear(ds.p, ds.classes);
    ModelParams w = init_params(layout, 3);
    std::vector<ClientUpdate> updates;
    SplitRng rng(10);
    for (int k = 0; k < 4; ++k) {
        std::vector<double> g(static_cast<std::size_t>(layout.dim()));
        for (auto& v : g) {
            v = rng.next_double();
        }
        updates.push_back({k, 1, std::move(g), 5});
    }
    CoalitionUtilityCache seq(w, updates, 0.1, val, &ds);
    seq.precompute_all(1);
    CoalitionUtilityCache par(w, updates, 0.1, val, &ds);
    par.precompute_all(4);
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
        CHECK(seq.utility(mask) == par.utility(mask));
    }
}

TEST_CASE("contribution history records, averages, and rejects duplicates") {
    ContributionHistory hist(3);
    CHECK(hist.mean(0) == 0.0);
    CHECK(hist.count(0) == 0);

    hist.record(0, 1, 0.2);
    hist.record(0, 2, 0.4);
    CHECK(hist.mean(0) == doctest::Approx(0.3));
    CHECK(hist.count(0) == 2);
    CHECK(hist.values(0) == std::vector<double>{0.2, 0.4});

    CHECK_THROWS_AS(hist.record(0, 2, 0.5), ContractError);
    CHECK_THROWS_AS(hist.record(0, 1, 0.5), ContractError);

    hist.record(1, 5, -0.1); // raw values may be negative
    CHECK(hist.mean(1) == doctest::Approx(-0.1));
}
