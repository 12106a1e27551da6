// Compiled with -mavx2. Only reached after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>

#include "nublur/simd/kernels.hpp"

namespace nublur::simd {

namespace {

void mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double* a, const double* b, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), p));
    }
    for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void div_floor(const double* num, const double* den, double floor, double* out, std::size_t n) {
    const __m256d f = _mm256_set1_pd(floor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_max_pd(_mm256_loadu_pd(den + i), f);
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(num + i), d));
    }
    for (; i < n; ++i) out[i] = num[i] / std::max(den[i], floor);
}

void sat_ratio(const double* v, const double* rp, const double* r, const double* z, double floor, double* out,
               std::size_t n) {
    const __m256d f = _mm256_set1_pd(floor);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gate = _mm256_loadu_pd(rp + i);
        if (z) gate = _mm256_mul_pd(gate, _mm256_loadu_pd(z + i));
        const __m256d num = _mm256_mul_pd(_mm256_loadu_pd(v + i), gate);
        const __m256d q = _mm256_div_pd(num, _mm256_max_pd(_mm256_loadu_pd(r + i), f));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_add_pd(q, one), gate));
    }
    for (; i < n; ++i) {
        const double gate = z ? rp[i] * z[i] : rp[i];
        out[i] = (v[i] * gate) / std::max(r[i], floor) + 1.0 - gate;
    }
}

void tv_combine(const double* u, const double* g, double lambda, double floor, double* out, std::size_t n) {
    const __m256d f = _mm256_set1_pd(floor);
    const __m256d l = _mm256_set1_pd(lambda);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d den = _mm256_add_pd(one, _mm256_mul_pd(l, _mm256_loadu_pd(g + i)));
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(u + i), _mm256_max_pd(den, f)));
    }
    for (; i < n; ++i) out[i] = u[i] / std::max(1.0 + lambda * g[i], floor);
}

// Two complex values per register: [re0 im0 re1 im1].
inline __m256d complex_product(__m256d x, __m256d y) {
    const __m256d yr = _mm256_movedup_pd(y);          // yr0 yr0 yr1 yr1
    const __m256d yi = _mm256_permute_pd(y, 0b1111);  // yi0 yi0 yi1 yi1
    const __m256d xs = _mm256_permute_pd(x, 0b0101);  // xi0 xr0 xi1 xr1
    // [xr*yr - xi*yi, xi*yr + xr*yi]
    return _mm256_addsub_pd(_mm256_mul_pd(x, yr), _mm256_mul_pd(xs, yi));
}

inline __m256d complex_product_conj(__m256d x, __m256d y) {
    const __m256d yr = _mm256_movedup_pd(y);
    const __m256d yi = _mm256_permute_pd(y, 0b1111);
    const __m256d xs = _mm256_permute_pd(x, 0b0101);
    const __m256d neg = _mm256_xor_pd(_mm256_mul_pd(xs, yi), _mm256_set1_pd(-0.0));
    // [xr*yr + xi*yi, xi*yr - xr*yi]
    return _mm256_addsub_pd(_mm256_mul_pd(x, yr), neg);
}

void cmul(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        _mm256_storeu_pd(out + 2 * k, complex_product(_mm256_loadu_pd(x + 2 * k), _mm256_loadu_pd(y + 2 * k)));
    }
    for (; k < n; ++k) {
        const double xr = x[2 * k], xi = x[2 * k + 1];
        const double yr = y[2 * k], yi = y[2 * k + 1];
        out[2 * k] = xr * yr - xi * yi;
        out[2 * k + 1] = xi * yr + xr * yi;
    }
}

void cmul_conj_acc(const double* x, const double* y, double* acc, std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const __m256d p = complex_product_conj(_mm256_loadu_pd(x + 2 * k), _mm256_loadu_pd(y + 2 * k));
        _mm256_storeu_pd(acc + 2 * k, _mm256_add_pd(_mm256_loadu_pd(acc + 2 * k), p));
    }
    for (; k < n; ++k) {
        const double xr = x[2 * k], xi = x[2 * k + 1];
        const double yr = y[2 * k], yi = y[2 * k + 1];
        acc[2 * k] += xr * yr + xi * yi;
        acc[2 * k + 1] += xi * yr - xr * yi;
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (int l = 0; i < n; ++i, ++l) lane[l] += a[i] * b[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (int l = 0; i < n; ++i, ++l) {
        const double d = a[i] - b[i];
        lane[l] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{Isa::avx2, "avx2", mul,  mul_acc,       div_floor, sat_ratio,
                                   tv_combine, cmul,  cmul_conj_acc, dot,       sum_sq_diff};
    return table;
}

}  // namespace nublur::simd
