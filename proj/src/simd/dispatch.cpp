#include <atomic>
#include <cstdlib>
#include <string>

#include "shipfee/errors.hpp"
#include "shipfee/simd.hpp"

namespace shipfee::simd {
namespace {

struct KernelTable {
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*l1_distance)(const double*, const double*, std::size_t);
};

constexpr KernelTable kScalarTable{scalar::axpy, scalar::dot, scalar::sum, scalar::l1_distance};
#if defined(SHIPFEE_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::axpy, avx2::dot, avx2::sum, avx2::l1_distance};
#endif

const KernelTable& table_for(Isa isa) {
#if defined(SHIPFEE_HAVE_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  (void)isa;
  return kScalarTable;
}

Isa detect() {
  if (const char* env = std::getenv("SHIPFEE_SIMD")) {
    const std::string value(env);
    if (value == "scalar") return Isa::kScalar;
    if (value == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const KernelTable& active() { return table_for(selected().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SHIPFEE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ParameterError("instruction set '" + std::string(isa_name(isa)) +
                         "' is not available on this host");
  }
  selected().store(isa, std::memory_order_relaxed);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ParameterError("axpy: length mismatch");
  active().axpy(a, x.data(), y.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("dot: length mismatch");
  return active().dot(x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

double l1_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("l1_distance: length mismatch");
  return active().l1_distance(x.data(), y.data(), x.size());
}

}  // namespace shipfee::simd
