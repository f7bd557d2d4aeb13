#include <random>

#include <benchmark/benchmark.h>

#include "rpkf/rpkf.hpp"

namespace {

rpkf::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return rpkf::Matrix::NullaryExpr(rows, cols, [&] { return u(gen); });
}

rpkf::MatrixDist random_dist(Eigen::Index rows, Eigen::Index cols, int samples, std::mt19937_64& gen) {
  std::vector<rpkf::MatrixDist::Sample> out;
  for (int i = 0; i < samples; ++i) out.push_back({random_matrix(rows, cols, gen), 1.0 / samples});
  return rpkf::MatrixDist(std::move(out));
}

rpkf::NahiModel tracking_model() {
  rpkf::Matrix h(2, 2);
  h << 1, 1, 1, -1;
  return {h, rpkf::constant_probability(0.95), rpkf::rotation_matrix(300),
          2.0 * rpkf::Matrix::Identity(2, 2), rpkf::Matrix::Identity(2, 2)};
}

rpkf::InitialCondition tracking_initial() {
  return {(rpkf::Vector(2) << 50.0, 0.0).finished(), 0.5 * rpkf::Matrix::Identity(2, 2)};
}

}  // namespace

static void BM_QuadFormTensor(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 gen(1);
  const auto spec = rpkf::moments_from_dist(random_dist(n, n, 4, gen));
  const rpkf::Matrix a = random_matrix(n, n, gen);
  const rpkf::Matrix x = a * a.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(rpkf::quad_form(spec, x));
}
BENCHMARK(BM_QuadFormTensor)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_QuadFormMixture(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 gen(1);
  const auto dist = random_dist(n, n, 4, gen);
  const rpkf::Matrix a = random_matrix(n, n, gen);
  const rpkf::Matrix x = a * a.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(rpkf::quad_form_discrete(dist, x));
}
BENCHMARK(BM_QuadFormMixture)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_FilterStep(benchmark::State& state) {
  const auto m = rpkf::build_nahi(tracking_model(), 1);
  auto s = rpkf::init(tracking_initial());
  const rpkf::Vector y = (rpkf::Vector(2) << 50.0, 50.0).finished();
  for (auto _ : state) {
    s = rpkf::step(s, y, m);
    benchmark::DoNotOptimize(s.mean.data());
  }
}
BENCHMARK(BM_FilterStep);

static void BM_MonteCarlo(benchmark::State& state) {
  const rpkf::Experiment exp{rpkf::make_provider(tracking_model(), &rpkf::build_nahi),
                             tracking_initial(), 300, {}};
  for (auto _ : state) benchmark::DoNotOptimize(rpkf::monte_carlo(exp, 10, 7));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
