#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "cnf/canonical.hpp"
#include "cnf/enumerate.hpp"
#include "cnf/featurize.hpp"
#include "cnf/model.hpp"
#include "cnf/smiles.hpp"

namespace {

const std::string kAspirin = "CC(=O)Oc1ccccc1C(=O)O";

void BM_ParseSmiles(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cnf::parse_smiles(kAspirin));
}
BENCHMARK(BM_ParseSmiles);

void BM_CanonicalSmiles(benchmark::State& state) {
  const auto g = cnf::parse_smiles(kAspirin);
  for (auto _ : state) benchmark::DoNotOptimize(cnf::canonical_smiles(g));
}
BENCHMARK(BM_CanonicalSmiles);

void BM_RandomSmiles(benchmark::State& state) {
  const auto g = cnf::parse_smiles(kAspirin);
  cnf::Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(cnf::random_smiles(g, rng));
}
BENCHMARK(BM_RandomSmiles);

cnf::ModelConfig bench_config(cnf::Architecture arch) {
  cnf::ModelConfig c;
  c.arch = arch;
  return c;
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto config = bench_config(static_cast<cnf::Architecture>(state.range(0)));
  const auto vocab = cnf::Vocab::build({kAspirin, "ClBr[NH4+]#N"});
  const auto params = cnf::init_params(config, vocab.size());
  const auto x = cnf::encode_onehot(kAspirin, vocab);
  for (auto _ : state) {
    const auto r = cnf::forward(x, params, config);
    benchmark::DoNotOptimize(cnf::backward(r.cache, 1.0, params, config));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Arg(2);

void BM_Predict(benchmark::State& state) {
  const auto config = bench_config(cnf::Architecture::Flat);
  const auto vocab = cnf::Vocab::build({kAspirin});
  const auto params = cnf::init_params(config, vocab.size());
  const auto x = cnf::encode_onehot(kAspirin, vocab);
  for (auto _ : state) benchmark::DoNotOptimize(cnf::predict(x, params, config));
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
