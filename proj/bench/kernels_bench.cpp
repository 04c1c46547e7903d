#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "qlab/kernels.hpp"

namespace {

using qlab::Exec;

Exec exec_of(const benchmark::State& s) { return s.range(1) == 0 ? Exec::serial : Exec::parallel; }

void BM_QuinticResponse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> h(n), u(n), out(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = U(rng), u[i] = U(rng);
  const Exec e = exec_of(state);
  for (auto _ : state) {
    qlab::quintic_response(h, u, -1.0, out, e);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_AssembleColumns(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  qlab::ColumnFn col = [](int j, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sin(0.01 * j + 0.3 * static_cast<double>(i));
  };
  Eigen::MatrixXd A;
  const Exec e = exec_of(state);
  for (auto _ : state) {
    qlab::assemble_columns(n, col, A, e);
    benchmark::DoNotOptimize(A.data());
  }
}

void BM_DenseMatvec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd A = Eigen::MatrixXd::Random(n, n);
  const Eigen::VectorXcd x = Eigen::VectorXcd::Random(n);
  Eigen::VectorXcd y;
  const Exec e = exec_of(state);
  for (auto _ : state) {
    qlab::dense_matvec(A, x, y, e);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

// Second argument: 0 serial, 1 OpenMP.
BENCHMARK(BM_QuinticResponse)->ArgsProduct({{1 << 14, 1 << 18}, {0, 1}});
BENCHMARK(BM_AssembleColumns)->ArgsProduct({{256, 1024}, {0, 1}});
BENCHMARK(BM_DenseMatvec)->ArgsProduct({{512, 2048}, {0, 1}});

BENCHMARK_MAIN();
