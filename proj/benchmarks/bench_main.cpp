#include <benchmark/benchmark.h>

#include <random>

#include "clusterfdr/clustering.hpp"
#include "clusterfdr/fdr.hpp"
#include "clusterfdr/permnull.hpp"
#include "clusterfdr/rng.hpp"
#include "clusterfdr/stats.hpp"
#include "clusterfdr/synth.hpp"
#include "clusterfdr/tdist.hpp"

using namespace clusterfdr;

namespace {

SubjectStack stack_of(std::size_t side, std::size_t n) {
  SynthConfig cfg;
  cfg.dims = Dims{side, side, side};
  cfg.n_subjects = n;
  cfg.fwhm_vox = 2.0;
  cfg.master_seed = 1;
  return generate_stack(cfg);
}

}  // namespace

static void BM_Tmap(benchmark::State& state) {
  const auto stack = stack_of(static_cast<std::size_t>(state.range(0)), 20);
  std::uint64_t r = 1;
  for (auto _ : state) {
    const auto signs = sign_vector(7, r++, stack.n());
    benchmark::DoNotOptimize(one_sample_tmap(stack, signs));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stack.dims().size()));
}
BENCHMARK(BM_Tmap)->Arg(20)->Arg(40);

static void BM_Clusters(benchmark::State& state) {
  const auto stack = stack_of(static_cast<std::size_t>(state.range(0)), 20);
  const TMap t = one_sample_tmap(stack);
  const double thr = t_upper_quantile(0.01, 19);
  const auto conn = *connectivity_from_count(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_clusters(t, stack.mask(), thr, conn));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stack.dims().size()));
}
BENCHMARK(BM_Clusters)->Args({20, 6})->Args({20, 26})->Args({40, 26});

static void BM_BuildNull(benchmark::State& state) {
  const auto stack = stack_of(20, 20);
  PermutationConfig cfg;
  cfg.realizations = static_cast<std::size_t>(state.range(0));
  cfg.cdt_p = 0.01;
  cfg.master_seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(build_null(stack, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildNull)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_Bh(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  for (auto& x : p) x = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(bh_step_up(p, 0.05));
}
BENCHMARK(BM_Bh)->Arg(100)->Arg(10000);

BENCHMARK_MAIN();
