#include <doctest.h>

#include <algorithm>
#include <set>

#include "botkit/common.hpp"

using namespace botkit;

TEST_SUITE_BEGIN("common");

TEST_CASE("fnv1a64 matches reference values") {
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hash_hex(fnv1a64("")) == "cbf29ce484222325");
}

TEST_CASE("derive_seed separates components and is stable") {
    uint64_t master = 42;
    CHECK(derive_seed(master, "tree/0") == derive_seed(master, "tree/0"));
    CHECK(derive_seed(master, "tree/0") != derive_seed(master, "tree/1"));
    CHECK(derive_seed(master, "tree/0") != derive_seed(master + 1, "tree/0"));
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(derive_seed(master, "x/" + std::to_string(i)));
    CHECK(seen.size() == 1000);
}

TEST_CASE("rng streams are reproducible and in range") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.uniform_int(10) < 10);
    }
}

TEST_CASE("rng permutation covers every index") {
    Rng r(5);
    auto p = r.permutation(64);
    std::set<uint32_t> seen(p.begin(), p.end());
    CHECK(seen.size() == 64);
    CHECK(*seen.rbegin() == 63);
}

TEST_CASE("rng lognormal median is near scale") {
    Rng r(11);
    std::vector<double> draws;
    for (int i = 0; i < 4001; ++i) draws.push_back(r.lognormal(10.0, 0.5));
    std::sort(draws.begin(), draws.end());
    double median = draws[draws.size() / 2];
    CHECK(median > 8.5);
    CHECK(median < 11.5);
}

TEST_CASE("parallel_for fills every slot regardless of thread count") {
    std::vector<int> one(257, 0), four(257, 0);
    parallel_for(one.size(), 1, [&](size_t i) { one[i] = static_cast<int>(i) * 3; });
    parallel_for(four.size(), 4, [&](size_t i) { four[i] = static_cast<int>(i) * 3; });
    CHECK(one == four);
}

TEST_CASE("parallel_for propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(16, 4,
                                 [&](size_t i) {
                                     if (i == 9) throw data_error("boom");
                                 }),
                    data_error);
}

TEST_SUITE_END();
