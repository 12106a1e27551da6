#include <doctest.h>

#include <cmath>
#include <limits>

#include "nublur/image.hpp"
#include "nublur/types.hpp"
#include "support.hpp"

using namespace nublur;

TEST_CASE("image rejects wrong length and non-finite samples") {
    CHECK_THROWS_AS(Image(2, 2, 1, std::vector<double>(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(Image(0, 2, 1), std::invalid_argument);
    std::vector<double> d(4, 0.5);
    d[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Image(2, 2, 1, d), std::invalid_argument);
    d[2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Image(2, 2, 1, d), std::invalid_argument);

    Image img(3, 2, 3);
    CHECK(img.size() == 18);
    img.at(2, 1, 2) = 0.7;
    CHECK(img.data()[2 * 6 + 1 * 3 + 2] == 0.7);
    CHECK(img.plane(2)[5] == 0.7);
}

TEST_CASE("identity field validates") {
    const BlurField f = BlurField::identity(4, 3);
    CHECK(validate(f).ok);
    CHECK(f.count() == 1);
    CHECK(f.side() == 1);
}

TEST_CASE("negative kernel entry is reported") {
    RawBlurField raw{1, 3, 4, 4, std::vector<double>(9, 0.0), std::vector<double>(16, 1.0)};
    raw.kernels[4] = 1.5;
    raw.kernels[7] = -0.5;
    const auto rep = validate(raw);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message == "negative kernel entry");
    CHECK(rep.kernel == 0);
    CHECK(rep.row == 2);
    CHECK(rep.col == 1);
    CHECK_THROWS_AS(BlurField::from_raw(raw), InvariantError);
}

TEST_CASE("unnormalized mixing is reported with its pixel") {
    RawBlurField raw{1, 1, 5, 4, {1.0}, std::vector<double>(20, 1.0)};
    raw.mixing[2 * 5 + 3] = 0.9;
    const auto rep = validate(raw);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message == "mixing not normalized");
    CHECK(rep.row == 2);
    CHECK(rep.col == 3);
}

TEST_CASE("other invariant violations") {
    CHECK(validate(RawBlurField{1, 3, 4, 4, std::vector<double>(9, 0.1), std::vector<double>(16, 1.0)}).message ==
          "kernel not unit mass");
    CHECK_FALSE(validate(RawBlurField{1, 2, 4, 4, std::vector<double>(4, 0.25), std::vector<double>(16, 1.0)}).ok);
    RawBlurField neg{2, 1, 2, 2, {1.0, 1.0}, {1.5, 1, 1, 1, -0.5, 0, 0, 0}};
    CHECK(validate(neg).message == "negative mixing coefficient");
    RawBlurField mismatch{1, 1, 2, 2, {1.0}, std::vector<double>(8, 0.5)};
    CHECK_FALSE(validate(mismatch).ok);
}

TEST_CASE("validate reproduces constructor decisions") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int count = 1 + trial % 3;
        RawBlurField raw = testsupport::random_field(rng, 6, 5, count, 3).to_raw();
        std::uniform_int_distribution<int> pick(0, 3);
        switch (pick(rng)) {
            case 0: raw.kernels[trial % raw.kernels.size()] -= 0.3; break;
            case 1: raw.mixing[trial % raw.mixing.size()] += 1e-5; break;
            case 2: raw.mixing[trial % raw.mixing.size()] += 1e-8; break;
            default: break;
        }
        const bool valid = validate(raw).ok;
        bool constructed = true;
        try {
            (void)BlurField::from_raw(raw);
        } catch (const InvariantError&) {
            constructed = false;
        }
        CHECK(valid == constructed);
    }
}

TEST_CASE("renormalize option repairs sums") {
    RawBlurField raw{2, 1, 2, 1, {2.0, 0.5}, {1.0, 3.0, 1.0, 1.0}};
    CHECK_FALSE(validate(raw).ok);
    const BlurField f = BlurField::from_raw(raw, {1e-6, true});
    CHECK(f.basis().kernel(0)[0] == doctest::Approx(1.0));
    CHECK(f.mixing().at(0, 0, 0) == doctest::Approx(0.5));
    CHECK(f.mixing().at(1, 0, 1) == doctest::Approx(0.25));
    CHECK(validate(f).ok);
}

TEST_CASE("storage arithmetic of the low-rank form") {
    std::mt19937_64 rng(3);
    const BlurField small = testsupport::random_field(rng, 8, 8, 2, 3);
    CHECK(small.storage_scalars() == 2 * (9 + 64));
    CHECK(small.dense_storage_scalars() == 9 * 64);

    // B = 25, K = 33: low rank is cheaper iff HW > 25 * 1089 / 1064 = 25.59...
    const std::vector<double> k(33 * 33, 1.0 / (33 * 33));
    auto field_of = [&](int w, int h) {
        std::vector<double> kernels;
        for (int b = 0; b < 25; ++b) kernels.insert(kernels.end(), k.begin(), k.end());
        return BlurField(KernelBasis(25, 33, kernels),
                         MixingField(25, w, h, std::vector<double>(25 * static_cast<std::size_t>(w) * h, 1.0 / 25)));
    };
    const BlurField at25 = field_of(5, 5);
    CHECK(at25.storage_scalars() == 25u * (1089 + 25));
    CHECK(at25.storage_scalars() >= at25.dense_storage_scalars());
    const BlurField at26 = field_of(13, 2);
    CHECK(at26.storage_scalars() < at26.dense_storage_scalars());
}

TEST_CASE("segment labels and config validation") {
    CHECK_THROWS(SegmentLabels(2, 2, {0, 1, 2}));
    CHECK(SegmentLabels::single(3, 3).at(2, 2) == 0);
    ResponseParams rp;
    CHECK_NOTHROW(rp.validate());
    rp.gamma = 0.5;
    CHECK_THROWS(rp.validate());
    RLConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.max_iters = 0;
    CHECK_THROWS(cfg.validate());
    cfg = RLConfig{};
    cfg.tv_epsilon = 0.0;
    CHECK_THROWS(cfg.validate());
}
