#include "lrca/inference.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/models/error_components.hpp"
#include "lrca/montecarlo.hpp"
#include "lrca/rng.hpp"

#include <benchmark/benchmark.h>

using namespace lrca;

namespace {

void BM_Chi2Quantile(benchmark::State& state) {
  const int df = static_cast<int>(state.range(0));
  double p = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_quantile(df, p));
    p = p > 0.98 ? 0.01 : p + 0.0137;
  }
}
BENCHMARK(BM_Chi2Quantile)->Arg(1)->Arg(5)->Arg(10);

void BM_ArchCriterion(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const models::ArchParams p{1.0, Vector::Constant(4, 0.1)};
  const auto series = models::arch_simulate(p, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(models::arch_criterion(p, series).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ArchCriterion)->Arg(250)->Arg(1000)->Arg(4000)->Complexity();

void BM_EcCriterion(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t t = 6;
  Matrix x(static_cast<Eigen::Index>(n * t), 4);
  RngStream rng(5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << 1.0, rng.normal(), rng.normal(), rng.uniform();
  const models::EcParams p{Vector(Eigen::Vector4d(5.0, 0.2, 0.2, 0.5)), 0.09, 0.02, 0.03};
  const models::PanelData panel = models::ec_simulate(p, x, n, t, 6);
  for (auto _ : state) benchmark::DoNotOptimize(models::ec_criterion(p, panel).value);
}
BENCHMARK(BM_EcCriterion)->Arg(171)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_EcLoglik(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t t = 6;
  Matrix x(static_cast<Eigen::Index>(n * t), 2);
  RngStream rng(7);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << 1.0, rng.normal();
  const models::EcParams p{Vector(Eigen::Vector2d(1.0, 0.5)), 0.1, 0.03, 0.04};
  const models::PanelData panel = models::ec_simulate(p, x, n, t, 8);
  const Vector theta = p.to_vector();
  for (auto _ : state) benchmark::DoNotOptimize(models::ec_loglik(theta, panel));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EcLoglik)->Arg(100)->Arg(1000)->Arg(10000)->Complexity();

void BM_LrcAlpha(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  RngStream rng(9);
  auto make = [&] {
    auto vec = [&](double scale) { return Vector(Vector::NullaryExpr(d, [&] { return scale * rng.normal(); })); };
    const Matrix a = Matrix::NullaryExpr(d, d, [&] { return rng.normal(); });
    const SymMatrix h(a * a.transpose() + Matrix::Identity(d, d) * static_cast<double>(d));
    return CriterionEvaluation{vec(1.0), -1.0, vec(0.01), h, h, 500};
  };
  const CriterionEvaluation u = make();
  CriterionEvaluation r = make();
  r.value = u.value - 0.02;
  const Restriction res = Restriction::subvector(d, r.point.head(1));
  for (auto _ : state) benchmark::DoNotOptimize(lrc_alpha(u, r, res, 0.05).raw_statistic);
}
BENCHMARK(BM_LrcAlpha)->Arg(3)->Arg(6)->Arg(12);

void BM_Replication(benchmark::State& state) {
  ExperimentConfig c;
  c.dgp = state.range(0) == 0 ? "DGP1" : "weibull-size";
  c.n = 250;
  c.replications = 1;
  c.workers = 1;
  c.tests = {TestKind::LRCa, TestKind::Ca};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_statistics(c).statistics.sum());
    ++c.master_seed;
  }
  state.SetLabel(c.dgp);
}
BENCHMARK(BM_Replication)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
