#include <doctest.h>

#include <algorithm>
#include <vector>

#include "stresskit/rng.hpp"
#include "stresskit/stats.hpp"

using namespace stresskit;

namespace {

// Brute-force percentile: sort, then direct linear interpolation.
double percentile_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double h = (static_cast<double>(v.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - (h - static_cast<double>(lo))) +
           v[lo + 1] * (h - static_cast<double>(lo));
}

}  // namespace

TEST_CASE("mean/std/skewness basics") {
    const std::vector<double> v = {60.0, 70.0, 80.0, 90.0};
    CHECK(stats::mean(v) == doctest::Approx(75.0));
    CHECK(stats::pop_std(v) == doctest::Approx(11.180339887498949));
    CHECK(stats::skewness(v) == doctest::Approx(0.0).epsilon(1e-9));

    const std::vector<double> flat = {5.0, 5.0, 5.0};
    CHECK(stats::pop_std(flat) == 0.0);
    CHECK(stats::skewness(flat) == 0.0);  // zero-variance convention

    const std::vector<double> skewed = {1.0, 1.0, 1.0, 10.0};
    CHECK(stats::skewness(skewed) > 0.0);
}

TEST_CASE("percentile convention") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    CHECK(stats::percentile(v, 50.0) == doctest::Approx(2.5));
    CHECK(stats::percentile(v, 25.0) == doctest::Approx(1.75));
    CHECK(stats::percentile(v, 75.0) == doctest::Approx(3.25));
    CHECK(stats::percentile(v, 0.0) == doctest::Approx(1.0));
    CHECK(stats::percentile(v, 100.0) == doctest::Approx(4.0));
}

TEST_CASE("percentile matches brute-force oracle on random inputs") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(1000);
        std::vector<double> v(n);
        for (double& x : v) x = rng.uniform(-50.0, 50.0);
        for (double p : {5.0, 25.0, 50.0, 75.0, 95.0}) {
            CHECK(stats::percentile(v, p) ==
                  doctest::Approx(percentile_oracle(v, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("median and MAD") {
    const std::vector<double> v = {10.0, 12.0, 11.0, 13.0, 50.0};
    CHECK(stats::median(v) == doctest::Approx(12.0));
    CHECK(stats::mad(v) == doctest::Approx(1.0));

    const std::vector<double> two = {72.0, 74.0};
    CHECK(stats::median(two) == doctest::Approx(73.0));
}

TEST_CASE("quartile bounds property") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(40);
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal(0.0, 3.0);
        const auto q = stats::quartiles(v);
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        CHECK(q.q1 <= q.median);
        CHECK(q.median <= q.q3);
        CHECK(q.q1 >= lo);
        CHECK(q.q3 <= hi);
    }
}

TEST_CASE("trapezoid on constants is exact") {
    std::vector<double> t(241), v(241, 0.5);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * 0.25;
    CHECK(stats::trapezoid(t, v) == doctest::Approx(30.0));
}
