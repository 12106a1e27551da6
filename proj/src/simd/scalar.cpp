#include "nublur/simd/kernels.hpp"

#include <algorithm>

namespace nublur::simd {

namespace {

void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double* a, const double* b, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void div_floor(const double* num, const double* den, double floor, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = num[i] / std::max(den[i], floor);
}

void sat_ratio(const double* v, const double* rp, const double* r, const double* z, double floor, double* out,
               std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gate = z ? rp[i] * z[i] : rp[i];
        out[i] = (v[i] * gate) / std::max(r[i], floor) + 1.0 - gate;
    }
}

void tv_combine(const double* u, const double* g, double lambda, double floor, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] / std::max(1.0 + lambda * g[i], floor);
}

void cmul(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double xr = x[2 * k], xi = x[2 * k + 1];
        const double yr = y[2 * k], yi = y[2 * k + 1];
        out[2 * k] = xr * yr - xi * yi;
        out[2 * k + 1] = xi * yr + xr * yi;
    }
}

void cmul_conj_acc(const double* x, const double* y, double* acc, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double xr = x[2 * k], xi = x[2 * k + 1];
        const double yr = y[2 * k], yi = y[2 * k + 1];
        acc[2 * k] += xr * yr + xi * yi;
        acc[2 * k + 1] += xi * yr - xr * yi;
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int l = 0; l < 4; ++l) lane[l] += a[i + l] * b[i + l];
    }
    for (int l = 0; i < n; ++i, ++l) lane[l] += a[i] * b[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int l = 0; l < 4; ++l) {
            const double d = a[i + l] - b[i + l];
            lane[l] += d * d;
        }
    }
    for (int l = 0; i < n; ++i, ++l) {
        const double d = a[i] - b[i];
        lane[l] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::scalar, "scalar", mul,  mul_acc,       div_floor, sat_ratio,
                                   tv_combine,  cmul,     cmul_conj_acc, dot,       sum_sq_diff};
    return table;
}

}  // namespace nublur::simd
