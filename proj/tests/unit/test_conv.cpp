#include <doctest.h>

#include <thread>

#include "nublur/conv.hpp"
#include "support.hpp"

using namespace nublur;
using namespace testsupport;

namespace {

std::vector<double> delta_kernel(int side) {
    std::vector<double> k(static_cast<std::size_t>(side) * side, 0.0);
    k[k.size() / 2] = 1.0;
    return k;
}

}  // namespace

TEST_CASE("delta kernel is the identity for convolution and correlation") {
    std::mt19937_64 rng(1);
    const auto x = random_values(rng, 12 * 9);
    const auto k = delta_kernel(5);
    CHECK(max_abs_diff(conv::convolve_circular({x, 12, 9}, {k, 5}), x) < 1e-14);
    CHECK(max_abs_diff(conv::correlate_circular({x, 12, 9}, {k, 5}), x) < 1e-14);
}

TEST_CASE("constant plane stays constant under unit-mass kernels") {
    std::mt19937_64 rng(2);
    const std::vector<double> x(20 * 16, 0.37);
    const auto k = random_kernel(rng, 7);
    for (double y : conv::convolve_circular({x, 20, 16}, {k, 7})) CHECK(y == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("convolution matches the direct spatial sum") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 8 + trial % 5, h = 8 + trial % 3;
        const auto x = random_values(rng, static_cast<std::size_t>(w) * h);
        const int side = 3 + 2 * (trial % 3);
        const auto k = random_kernel(rng, side);
        CHECK(max_abs_diff(conv::convolve_circular({x, w, h}, {k, side}), brute_convolve(x, w, h, k, side)) < 1e-12);
    }
}

TEST_CASE("offset kernel shifts in the convolution direction") {
    // k has its mass at offset (+1 row, +2 col): out(r, c) = x(r - 1, c - 2).
    std::vector<double> k(25, 0.0);
    k[(2 + 1) * 5 + (2 + 2)] = 1.0;
    std::mt19937_64 rng(4);
    const int w = 9, h = 7;
    const auto x = random_values(rng, w * h);
    const auto y = conv::convolve_circular({x, w, h}, {k, 5});
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) CHECK(y[r * w + c] == doctest::Approx(x[((r - 1 + h) % h) * w + (c - 2 + w) % w]));
}

TEST_CASE("correlation is the adjoint of convolution") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 16 + trial % 4, h = 16;
        const auto x = random_values(rng, w * h, -1, 1);
        const auto y = random_values(rng, w * h, -1, 1);
        const int side = 5;
        const auto k = random_values(rng, 25);  // asymmetric, not normalized
        const double lhs = inner(conv::convolve_circular({x, w, h}, {k, side}), y);
        const double rhs = inner(x, conv::correlate_circular({y, w, h}, {k, side}));
        CHECK(std::abs(lhs - rhs) / (norm2(x) * norm2(y)) < 1e-10);
    }
}

TEST_CASE("symmetric kernel makes correlation equal convolution") {
    std::vector<double> k = {1, 2, 1, 2, 4, 2, 1, 2, 1};
    for (double& v : k) v /= 16.0;
    std::mt19937_64 rng(6);
    const auto x = random_values(rng, 10 * 10);
    CHECK(max_abs_diff(conv::convolve_circular({x, 10, 10}, {k, 3}), conv::correlate_circular({x, 10, 10}, {k, 3})) <
          1e-14);
}

TEST_CASE("convolution is linear") {
    std::mt19937_64 rng(7);
    const auto x = random_values(rng, 14 * 11);
    const auto y = random_values(rng, 14 * 11);
    const auto k = random_kernel(rng, 5);
    const double a = 0.7, b = -1.3;
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto cx = conv::convolve_circular({x, 14, 11}, {k, 5});
    const auto cy = conv::convolve_circular({y, 14, 11}, {k, 5});
    const auto cm = conv::convolve_circular({mix, 14, 11}, {k, 5});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(cm[i] - (a * cx[i] + b * cy[i])) < 1e-12);
}

TEST_CASE("kernel larger than the plane or even-sided is rejected") {
    const std::vector<double> x(4 * 4, 1.0);
    const std::vector<double> k5(25, 0.04);
    CHECK_THROWS_AS(conv::convolve_circular({x, 4, 4}, {k5, 5}), std::invalid_argument);
    const std::vector<double> k2(4, 0.25);
    CHECK_THROWS_AS(conv::convolve_circular({x, 4, 4}, {k2, 2}), std::invalid_argument);
}

TEST_CASE("pad and crop") {
    const Image img(2, 2, 1, {1, 2, 3, 4});
    const Image same = conv::pad_edge(img, 0);
    CHECK(std::equal(same.data().begin(), same.data().end(), img.data().begin()));

    const Image p = conv::pad_edge(img, 1);
    const std::vector<double> expected = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    REQUIRE(p.width() == 4);
    REQUIRE(p.height() == 4);
    CHECK(std::equal(p.data().begin(), p.data().end(), expected.begin()));

    std::mt19937_64 rng(8);
    for (int m : {0, 1, 3, 7}) {
        const Image r = random_image(rng, 9, 5, 3);
        const Image back = conv::crop(conv::pad_edge(r, m), m);
        CHECK(std::equal(back.data().begin(), back.data().end(), r.data().begin(), r.data().end()));
    }
    CHECK_THROWS(conv::crop(img, 1));
}

TEST_CASE("results do not depend on calling thread") {
    std::mt19937_64 rng(9);
    const auto x = random_values(rng, 40 * 30);
    const auto k = random_kernel(rng, 9);
    const auto ref = conv::convolve_circular({x, 40, 30}, {k, 9});
    std::vector<std::vector<double>> outs(8);
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) pool.emplace_back([&, t] { outs[t] = conv::convolve_circular({x, 40, 30}, {k, 9}); });
    for (auto& t : pool) t.join();
    for (const auto& o : outs) CHECK(o == ref);
}
