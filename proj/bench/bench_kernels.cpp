// Serial vs OpenMP kernels. On a single core the omp numbers show the
// parallel-region overhead only.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "powertail/kernels.hpp"
#include "powertail/oscint.hpp"

using namespace powertail;
using kernels::cplx;

namespace {

struct StepData {
  std::vector<cplx> amps, phase;
  std::vector<double> c;
  explicit StepData(std::size_t n) : amps(n), phase(n), c(n) {
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = 1.0 / std::sqrt(double(n));
      phase[j] = std::polar(1.0, -0.01 * double(j));
      amps[j] = cplx(1e-3 * std::cos(double(j)), 1e-3 * std::sin(double(j)));
    }
  }
};

template <kernels::Backend B>
void BM_strang_step(benchmark::State& state) {
  StepData d(std::size_t(state.range(0)));
  cplx bound = 1.0;
  for (auto _ : state) {
    kernels::strang_step(B, bound, d.amps, d.phase, d.c, 1e-4);
    benchmark::DoNotOptimize(bound);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Backend B>
void BM_strang_columns(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  StepData d{std::size_t(n)};
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(n + 1, n + 1);
  for (auto _ : state) {
    kernels::strang_step_columns(B, x, d.phase, d.c, 1e-4);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * (n + 1) * (n + 1));
}

template <kernels::Backend B>
void BM_filon(benchmark::State& state) {
  const auto& table = oscint::unit_gdot_table();
  std::vector<double> om(std::size_t(state.range(0)));
  for (std::size_t j = 0; j < om.size(); ++j) om[j] = 1e-2 * double(j + 1);
  std::vector<cplx> out(om.size());
  for (auto _ : state) {
    kernels::filon_integrals(B, table, om, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_strang_step<kernels::Backend::serial>)->Arg(320)->Arg(4096)->Arg(65536);
BENCHMARK(BM_strang_step<kernels::Backend::omp>)->Arg(320)->Arg(4096)->Arg(65536);
BENCHMARK(BM_strang_columns<kernels::Backend::serial>)->Arg(64)->Arg(256);
BENCHMARK(BM_strang_columns<kernels::Backend::omp>)->Arg(64)->Arg(256);
BENCHMARK(BM_filon<kernels::Backend::serial>)->Arg(320);
BENCHMARK(BM_filon<kernels::Backend::omp>)->Arg(320);

BENCHMARK_MAIN();
