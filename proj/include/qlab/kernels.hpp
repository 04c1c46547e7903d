#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace qlab {

// Every parallel kernel has a serial twin; the serial path is the reference
// used by the equivalence tests and the benchmark baseline.
enum class Exec { serial, parallel };

// Worker count: OpenMP default capped by QUENCH_LAB_THREADS when set.
int configured_threads();

// h u + gamma u^3 - u^5, pointwise.
void quintic_response(std::span<const double> h, std::span<const double> u, double gamma,
                      std::span<double> out, Exec exec);

// Fills out(:, j) = column(j) for j in [0, n). The callback receives the
// column index and a writable span of length n; it must be re-entrant.
using ColumnFn = std::function<void(int, std::span<double>)>;
void assemble_columns(int n, const ColumnFn& column, Eigen::MatrixXd& out, Exec exec);

// y = A x for a real dense matrix and complex vector, row-parallel.
void dense_matvec(const Eigen::MatrixXd& A, const Eigen::VectorXcd& x, Eigen::VectorXcd& y,
                  Exec exec);

}  // namespace qlab
