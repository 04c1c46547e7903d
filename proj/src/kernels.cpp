#include "qlab/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "qlab/error.hpp"

namespace qlab {

int configured_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("QUENCH_LAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (const std::exception&) {
      // Ignore malformed values and keep the OpenMP default.
    }
  }
  return n < 1 ? 1 : n;
}

void quintic_response(std::span<const double> h, std::span<const double> u, double gamma,
                      std::span<double> out, Exec exec) {
  const long n = static_cast<long>(u.size());
  if (h.size() != u.size() || out.size() != u.size())
    throw InvalidArgument("quintic_response: size mismatch");
  const double* hp = h.data();
  const double* up = u.data();
  double* op = out.data();
  if (exec == Exec::serial) {
    for (long i = 0; i < n; ++i) {
      const double v = up[i], v2 = v * v;
      op[i] = hp[i] * v + gamma * v2 * v - v2 * v2 * v;
    }
    return;
  }
#pragma omp parallel for schedule(static) num_threads(configured_threads())
  for (long i = 0; i < n; ++i) {
    const double v = up[i], v2 = v * v;
    op[i] = hp[i] * v + gamma * v2 * v - v2 * v2 * v;
  }
}

void assemble_columns(int n, const ColumnFn& column, Eigen::MatrixXd& out, Exec exec) {
  out.resize(n, n);
  if (exec == Exec::serial) {
    for (int j = 0; j < n; ++j) column(j, std::span<double>(out.col(j).data(), n));
    return;
  }
  // Column-major storage: each column is contiguous and owned by one thread.
#pragma omp parallel for schedule(dynamic, 8) num_threads(configured_threads())
  for (int j = 0; j < n; ++j) column(j, std::span<double>(out.col(j).data(), n));
}

void dense_matvec(const Eigen::MatrixXd& A, const Eigen::VectorXcd& x, Eigen::VectorXcd& y,
                  Exec exec) {
  const long n = A.rows();
  y.resize(n);
  const Eigen::VectorXd xr = x.real(), xi = x.imag();
  if (exec == Exec::serial) {
    y.real().noalias() = A * xr;
    y.imag().noalias() = A * xi;
    return;
  }
  // Row blocks keep the column-major inner products streaming.
  const int blocks = 4 * configured_threads();
#pragma omp parallel for schedule(static) num_threads(configured_threads())
  for (int b = 0; b < blocks; ++b) {
    const long r0 = n * b / blocks, r1 = n * (b + 1) / blocks;
    if (r1 <= r0) continue;
    const auto rows = A.middleRows(r0, r1 - r0);
    y.segment(r0, r1 - r0).real().noalias() = rows * xr;
    y.segment(r0, r1 - r0).imag().noalias() = rows * xi;
  }
}

}  // namespace qlab
