#pragma once

// Dense double-precision inner-loop kernels. Each operation has a portable
// scalar reference in kernels::scalar and, on x86-64, an AVX2+FMA variant in
// kernels::avx2. The unqualified entry points dispatch to the best variant the
// running CPU supports; set_isa() pins a variant (tests use it to compare).
//
// Variants differ only in summation order, so results agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace confsets::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Throws DomainError when the CPU (or build) lacks the requested variant.
void set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// r -= (q.r) q; returns q.r. q is expected to have unit norm.
double project_out(std::span<const double> q, std::span<double> r);
/// out[i] = sum_j a_j[i] * w_j over `count` columns of a column-major block
/// with leading dimension `ld`.
void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double project_out(std::span<const double> q, std::span<double> r);
void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double project_out(std::span<const double> q, std::span<double> r);
void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out);
}  // namespace avx2

}  // namespace confsets::kernels
