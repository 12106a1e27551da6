#include <doctest.h>

#include <cstring>

#include "nublur/simd/kernels.hpp"
#include "support.hpp"

using namespace nublur;
using namespace testsupport;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels compute their definitions") {
    const auto& s = simd::scalar_table();
    const std::vector<double> a = {1, 2, 3, 4, 5}, b = {2, 0.5, -1, 0, 3};
    std::vector<double> out(5);
    s.mul(a.data(), b.data(), out.data(), 5);
    CHECK(out == std::vector<double>{2, 1, -3, 0, 15});
    s.mul_acc(a.data(), b.data(), out.data(), 5);
    CHECK(out == std::vector<double>{4, 2, -6, 0, 30});
    s.div_floor(a.data(), b.data(), 0.25, out.data(), 5);
    CHECK(out == std::vector<double>{0.5, 4, 12, 16, 5.0 / 3});
    s.tv_combine(a.data(), b.data(), 0.5, 0.1, out.data(), 5);
    CHECK(out == std::vector<double>{0.5, 2 / 1.25, 3 / 0.5, 4, 5 / 2.5});
    CHECK(s.dot(a.data(), b.data(), 5) == 2 + 1 - 3 + 0 + 15);
    CHECK(s.sum_sq_diff(a.data(), b.data(), 5) == 1 + 2.25 + 16 + 16 + 4);

    const std::vector<double> v = {0.5, 0.8}, rp = {0.9, 0.1}, r = {0.4, 0.0}, z = {1.0, 0.0};
    std::vector<double> o(2);
    s.sat_ratio(v.data(), rp.data(), r.data(), z.data(), 1e-12, o.data(), 2);
    CHECK(o[0] == doctest::Approx(0.5 * 0.9 / 0.4 + 1 - 0.9));
    CHECK(o[1] == 1.0);
    s.sat_ratio(v.data(), rp.data(), r.data(), nullptr, 1e-12, o.data(), 2);
    CHECK(o[1] == doctest::Approx(0.8 * 0.1 / 1e-12 + 1 - 0.1));

    const std::vector<double> x = {1, 2, 3, -1}, y = {0.5, -1, 2, 4};  // (1+2i), (3-i) times (0.5-i), (2+4i)
    std::vector<double> c(4), acc(4, 1.0);
    s.cmul(x.data(), y.data(), c.data(), 2);
    CHECK(c == std::vector<double>{0.5 + 2, -1 + 1, 6 + 4, 12 - 2});
    s.cmul_conj_acc(x.data(), y.data(), acc.data(), 2);
    CHECK(acc == std::vector<double>{1 + 0.5 - 2, 1 + 1 + 1, 1 + 6 - 4, 1 - 12 - 2});
}

TEST_CASE("active table honors availability") {
    const auto& act = simd::active();
    CHECK(simd::table_for(act.isa) == &act);
    CHECK(simd::table_for(simd::Isa::scalar) == &simd::scalar_table());
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
    const simd::KernelTable* vec = simd::table_for(simd::Isa::avx2);
    if (!vec) {
        MESSAGE("AVX2 not available; equivalence not exercised");
        return;
    }
    const auto& ref = simd::scalar_table();
    std::mt19937_64 rng(1);
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 101, 1000, 4099}) {
        const auto a = random_values(rng, 2 * n + 1, -2, 2), b = random_values(rng, 2 * n + 1, -2, 2);
        auto pos = random_values(rng, n + 1, 0.0, 1.0);
        pos[0] = 0.0;  // exercise the floor
        auto z = random_values(rng, n + 1);
        for (auto& x : z) x = x < 0.5 ? 0.0 : 1.0;
        std::vector<double> o1(2 * n + 1, 0.25), o2 = o1;

        ref.mul(a.data(), b.data(), o1.data(), n);
        vec->mul(a.data(), b.data(), o2.data(), n);
        CHECK(same_bits(o1, o2));
        ref.mul_acc(a.data(), b.data(), o1.data(), n);
        vec->mul_acc(a.data(), b.data(), o2.data(), n);
        CHECK(same_bits(o1, o2));
        ref.div_floor(a.data(), pos.data(), 1e-3, o1.data(), n);
        vec->div_floor(a.data(), pos.data(), 1e-3, o2.data(), n);
        CHECK(same_bits(o1, o2));
        for (const double* zp : {static_cast<const double*>(z.data()), static_cast<const double*>(nullptr)}) {
            ref.sat_ratio(a.data(), b.data(), pos.data(), zp, 1e-12, o1.data(), n);
            vec->sat_ratio(a.data(), b.data(), pos.data(), zp, 1e-12, o2.data(), n);
            CHECK(same_bits(o1, o2));
        }
        ref.tv_combine(a.data(), b.data(), 0.7, 1e-3, o1.data(), n);
        vec->tv_combine(a.data(), b.data(), 0.7, 1e-3, o2.data(), n);
        CHECK(same_bits(o1, o2));
        ref.cmul(a.data(), b.data(), o1.data(), n);
        vec->cmul(a.data(), b.data(), o2.data(), n);
        CHECK(same_bits(o1, o2));
        ref.cmul_conj_acc(a.data(), b.data(), o1.data(), n);
        vec->cmul_conj_acc(a.data(), b.data(), o2.data(), n);
        CHECK(same_bits(o1, o2));

        const double d1 = ref.dot(a.data(), b.data(), n), d2 = vec->dot(a.data(), b.data(), n);
        CHECK(std::memcmp(&d1, &d2, sizeof d1) == 0);
        const double s1 = ref.sum_sq_diff(a.data(), b.data(), n), s2 = vec->sum_sq_diff(a.data(), b.data(), n);
        CHECK(std::memcmp(&s1, &s2, sizeof s1) == 0);
    }
}
