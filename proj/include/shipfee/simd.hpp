#pragma once

// Data-parallel inner loops used by the chain solvers. Every kernel has a
// scalar reference and an AVX2 variant; the variant is picked once at
// startup from CPUID and can be overridden with SHIPFEE_SIMD=scalar|avx2.
//
// axpy is bit-identical across variants (no FMA, element-wise rounding).
// Reductions (dot, sum, l1_distance) use a different summation order in the
// vector path and agree to a few ulps.

#include <cstddef>
#include <span>
#include <string_view>

namespace shipfee::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

// Currently selected instruction set.
Isa active_isa();

// Overrides the selection (tests, benchmarks). Throws ParameterError when the
// host cannot run `isa`.
void force_isa(Isa isa);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double l1_distance(std::span<const double> x, std::span<const double> y);

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double l1_distance(const double* x, const double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double l1_distance(const double* x, const double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace shipfee::simd
