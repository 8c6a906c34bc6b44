#include "confsets/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "confsets/errors.hpp"

namespace confsets::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum_squares)(std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*project_out)(std::span<const double>, std::span<double>);
  void (*gemv_cols)(const double*, std::size_t, std::size_t, std::size_t,
                    std::span<const double>, std::span<double>);
};

constexpr Table kScalar{Isa::scalar, scalar::dot, scalar::sum_squares, scalar::axpy,
                        scalar::project_out, scalar::gemv_cols};
#ifdef CONFSETS_HAVE_AVX2
constexpr Table kAvx2{Isa::avx2, avx2::dot, avx2::sum_squares, avx2::axpy, avx2::project_out,
                      avx2::gemv_cols};
#endif

const Table* detect() {
  // CONFSETS_ISA=scalar forces the reference path for a whole process.
  if (const char* env = std::getenv("CONFSETS_ISA"); env && std::strcmp(env, "scalar") == 0)
    return &kScalar;
#ifdef CONFSETS_HAVE_AVX2
  if (isa_supported(Isa::avx2)) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const Table*>& table() {
  static std::atomic<const Table*> t{detect()};
  return t;
}

inline const Table& active() { return *table().load(std::memory_order_relaxed); }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(CONFSETS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return active().isa; }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw DomainError("kernel variant '" + std::string(isa_name(isa)) + "' not available");
#ifdef CONFSETS_HAVE_AVX2
  table().store(isa == Isa::avx2 ? &kAvx2 : &kScalar);
#else
  table().store(&kScalar);
#endif
}

double dot(std::span<const double> a, std::span<const double> b) { return active().dot(a, b); }
double sum_squares(std::span<const double> a) { return active().sum_squares(a); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x, y);
}
double project_out(std::span<const double> q, std::span<double> r) {
  return active().project_out(q, r);
}
void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out) {
  active().gemv_cols(a, rows, count, ld, w, out);
}

}  // namespace confsets::kernels
