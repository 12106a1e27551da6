#pragma once

// Elementwise arithmetic used by the blur operator and the RL solver.
//
// Every routine exists as a scalar reference and, on x86-64, as an AVX2
// variant. The active table is chosen once at first use from CPUID; setting
// NUBLUR_SIMD=scalar in the environment forces the reference path.
//
// Elementwise routines use only IEEE add/sub/mul/div/max without contraction,
// so both variants are bit-identical. The two reductions accumulate in four
// interleaved lanes in both variants, summed as (l0+l1)+(l2+l3), which keeps
// them bit-identical as well.
//
// Complex arrays are interleaved (re, im) pairs; `n` counts complex values.

#include <cstddef>

namespace nublur::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    // out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // acc[i] += a[i] * b[i]
    void (*mul_acc)(const double* a, const double* b, double* acc, std::size_t n);
    // out[i] = num[i] / max(den[i], floor)
    void (*div_floor)(const double* num, const double* den, double floor, double* out, std::size_t n);
    // out[i] = v[i]*rp[i]*z[i] / max(r[i], floor) + 1 - rp[i]*z[i]; z == nullptr means z = 1
    void (*sat_ratio)(const double* v, const double* rp, const double* r, const double* z, double floor, double* out,
                      std::size_t n);
    // out[i] = u[i] / max(1 + lambda*g[i], floor)
    void (*tv_combine)(const double* u, const double* g, double lambda, double floor, double* out, std::size_t n);
    // out[k] = x[k] * y[k]  (complex)
    void (*cmul)(const double* x, const double* y, double* out, std::size_t n);
    // acc[k] += x[k] * conj(y[k])  (complex)
    void (*cmul_conj_acc)(const double* x, const double* y, double* acc, std::size_t n);
    // sum a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum (a[i]-b[i])^2
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
};

/// Reference implementation; always available.
const KernelTable& scalar_table();

/// Table for `isa`, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* table_for(Isa isa);

/// The table selected for this process.
const KernelTable& active();

}  // namespace nublur::simd
