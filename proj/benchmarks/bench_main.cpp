#include "factm/ctm_engine.hpp"
#include "factm/evaluation.hpp"
#include "factm/inference.hpp"
#include "factm/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace factm;

void BM_Sweep(benchmark::State& st) {
  sim::ScenarioSpec spec;
  spec.n_samples = static_cast<int>(st.range(0));
  spec.sentences_per_doc = 20;
  const auto s = sim::generate(spec, 1);
  Hyperparams hp;
  hp.n_factors = 5;
  hp.n_topics = {10};
  FitConfig cfg;
  VariationalState state = initialize(s.data, hp, 1);
  for (auto _ : st) {
    for (Phase p : cfg.update_schedule) run_phase(state, s.data, hp, cfg, p);
  }
  st.SetItemsProcessed(st.iterations() * spec.n_samples);
}
BENCHMARK(BM_Sweep)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EtaObjective(benchmark::State& st) {
  const int l = static_cast<int>(st.range(0));
  ctm::EtaInputs in;
  in.link_mean = Vector::Zero(l);
  in.mu0 = Vector::Zero(l);
  in.sigma0_inv = Matrix::Identity(l, l);
  in.phi_sum = Vector::Constant(l, 3.0);
  in.n_sentences = 3.0 * l;
  const Vector mean = Vector::LinSpaced(l, -1.0, 1.0);
  const Vector var = Vector::Ones(l);
  const double zeta = ctm::optimal_zeta(mean, var);
  for (auto _ : st) benchmark::DoNotOptimize(ctm::eta_objective(mean, var, zeta, in));
}
BENCHMARK(BM_EtaObjective)->Arg(5)->Arg(10)->Arg(20);

void BM_Hungarian(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix cost(n, n);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
  for (auto _ : st) benchmark::DoNotOptimize(eval::hungarian_match(cost));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(50);

}  // namespace
BENCHMARK_MAIN();
