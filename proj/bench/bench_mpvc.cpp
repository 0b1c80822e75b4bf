#include "mpvc/batch.hpp"
#include "mpvc/convex.hpp"
#include "mpvc/problems.hpp"
#include "mpvc/sqp.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace mpvc;

namespace {

QuadProgram make_qp(int m, int q, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  QuadProgram qp;
  Matrix M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = nd(rng);
  qp.H = M.transpose() * M + Matrix::Identity(m, m);
  qp.c = Vector::NullaryExpr(m, [&](Eigen::Index) { return 3 * nd(rng); });
  qp.Aeq.resize(0, m);
  qp.beq.resize(0);
  qp.Ain = Matrix::NullaryExpr(q, m, [&](Eigen::Index, Eigen::Index) { return nd(rng); });
  qp.bin = Vector::Constant(q, 0.5);
  return qp;
}

LinProgram make_lp(int n, int q, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  LinProgram lp;
  lp.c = Vector::NullaryExpr(n, [&](Eigen::Index) { return nd(rng); });
  lp.Aeq.resize(0, n);
  lp.beq.resize(0);
  lp.Ain = Matrix::NullaryExpr(q, n, [&](Eigen::Index, Eigen::Index) { return nd(rng); });
  lp.bin = Vector::Constant(q, 0.1);
  lp.lower = Vector::Constant(n, -1);
  lp.upper = Vector::Constant(n, 1);
  return lp;
}

void BM_SolveQp(benchmark::State& state) {
  const auto m = static_cast<int>(state.range(0));
  const auto qp = make_qp(m, 2 * m, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(qp));
}
BENCHMARK(BM_SolveQp)->Arg(6)->Arg(20)->Arg(60);

void BM_SolveLp(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto lp = make_lp(n, 2 * n, 11);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(6)->Arg(40)->Arg(150);

const std::vector<Vector>& grid_starts() {
  static const auto starts = grid_points({academic_axis(), academic_axis()});
  return starts;
}

void BM_AcademicGridSerial(benchmark::State& state) {
  const auto prob = academic_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch_serial(prob, grid_starts(), Algorithm::Basic));
  }
}
BENCHMARK(BM_AcademicGridSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_AcademicGridParallel(benchmark::State& state) {
  const auto prob = academic_problem();
  const auto threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch(prob, grid_starts(), Algorithm::Basic, {}, threads));
  }
}
BENCHMARK(BM_AcademicGridParallel)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_TenBar(benchmark::State& state) {
  auto model = std::make_shared<TrussModel>(ten_bar_ground_structure());
  const auto prob = truss_mpvc(model);
  const Vector x0 = truss_start_point(*model);
  for (auto _ : state) benchmark::DoNotOptimize(run_basic_sqp(prob, x0));
}
BENCHMARK(BM_TenBar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
