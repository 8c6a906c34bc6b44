#include "confsets/kernels.hpp"

namespace confsets::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double project_out(std::span<const double> q, std::span<double> r) {
  const double c = dot(q, r);
  axpy(-c, q, r);
  return c;
}

void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double* col = a + j * ld;
    const double wj = w[j];
    for (std::size_t i = 0; i < rows; ++i) out[i] += col[i] * wj;
  }
}

}  // namespace confsets::kernels::scalar
