#include <cmath>
#include <random>

#include <doctest.h>

#include "cocotree/model_ops.hpp"
#include "cocotree/search.hpp"
#include "cocotree/tree.hpp"

using namespace cocotree;

TEST_CASE("composite score is the convex mix of both parts") {
    CHECK(composite_score(1.0, 0.0, 1.0) == 1.0);
    CHECK(composite_score(1.0, 0.0, 0.0) == 0.0);
    CHECK(composite_score(0.5, 0.5, 0.3) == 0.5);
    CHECK(composite_score(0.8, 0.4, 0.5) == doctest::Approx(0.6));
}

TEST_CASE("composite score endpoints are exact") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double l = unit(rng);
        double v = unit(rng);
        CHECK(composite_score(l, v, 1.0) == l);
        CHECK(composite_score(l, v, 0.0) == v);
        CHECK(composite_score(l, l, unit(rng)) == l);
    }
}

TEST_CASE("composite score stays inside [min, max] of the inputs") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double l = unit(rng);
        double v = unit(rng);
        double alpha = unit(rng);
        double c = composite_score(l, v, alpha);
        CHECK(c >= std::min(l, v));
        CHECK(c <= std::max(l, v));
    }
}

TEST_CASE("composite score validates its ranges") {
    CHECK_THROWS_AS(composite_score(1.2, 0.5, 0.5), Error);
    CHECK_THROWS_AS(composite_score(0.5, -0.1, 0.5), Error);
    CHECK_THROWS_AS(composite_score(0.5, 0.5, 1.5), Error);
    CHECK_THROWS_AS(composite_score(std::nan(""), 0.5, 0.5), Error);
}

TEST_CASE("yes/no probability matches the direct softmax") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> logit(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
        double yes = logit(rng);
        double no = logit(rng);
        double expected = std::exp(yes) / (std::exp(yes) + std::exp(no));
        CHECK(yes_no_probability({yes, no}) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("yes/no probability survives extreme logits") {
    CHECK(yes_no_probability({1e4, -1e4}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(yes_no_probability({-1e4, 1e4}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::isfinite(yes_no_probability({8e307, 8e307})));
    CHECK(yes_no_probability({5000.0, 5000.0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("fuse endpoints are exact and the mix is clamped") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        double base = unit(rng);
        double weight = unit(rng);
        double beta = unit(rng);
        CHECK(fuse(base, weight, 1.0) == base);
        CHECK(fuse(base, weight, 0.0) == weight);
        CHECK(fuse(base, base, beta) == base);
        double fused = fuse(base, weight, beta);
        CHECK(fused >= std::min(base, weight));
        CHECK(fused <= std::max(base, weight));
    }
    CHECK_THROWS_AS(fuse(0.5, 0.5, -0.2), Error);
    CHECK_THROWS_AS(fuse(2.0, 0.5, 0.5), Error);
}
