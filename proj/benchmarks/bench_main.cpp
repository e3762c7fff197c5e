#include <benchmark/benchmark.h>

#include "tnss/congruence.hpp"
#include "tnss/cvp_model.hpp"
#include "tnss/lattice.hpp"
#include "tnss/rng.hpp"
#include "tnss/ttn.hpp"

using namespace tnss;

namespace {

struct Prepared {
  CvpInstance instance;
  ReducedBasis reduced;
  DiagonalCvpHamiltonian hamiltonian;
};

Prepared prepare(std::size_t ell, std::size_t n) {
  Prepared p;
  const RsaKey key = generate_rsa_key(ell, 7);
  p.instance = build_cvp_instance(key, PrimeBasis::first(n, false), 1.5, 3);
  p.reduced = lll_reduce(p.instance.basis);
  p.hamiltonian = build_hamiltonian(p.instance, p.reduced, babai_nearest_plane(p.reduced, p.instance.target));
  return p;
}

void BM_Lll(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = build_cvp_instance(generate_rsa_key(70, 1), PrimeBasis::first(n, false), 1.5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lll_reduce(inst.basis));
}
BENCHMARK(BM_Lll)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Babai(benchmark::State& state) {
  const auto p = prepare(70, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(babai_nearest_plane(p.reduced, p.instance.target));
}
BENCHMARK(BM_Babai)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ExactEnum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = prepare(40, n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_low_energy_enum(p.hamiltonian, std::size_t{1} << n));
}
BENCHMARK(BM_ExactEnum)->Arg(10)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_TtnSweep(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto p = prepare(70, 32);
  const auto op = perturb(p.hamiltonian, make_perturbation(p.hamiltonian.qubo, 0.1, 1));
  for (auto _ : state) {
    TtnState s = init_ttn(32, m, 5);
    benchmark::DoNotOptimize(ground_state_search(op, s));
  }
}
BENCHMARK(BM_TtnSweep)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Sampling(benchmark::State& state) {
  TtnState s = init_ttn(32, 8, 2);
  SamplingOptions o;
  o.k = static_cast<std::size_t>(state.range(0));
  o.p_stop = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_distinct(s, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sampling)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Gf2Kernel(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(3);
  ParityMatrix m(d, d + 16);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d + 16; ++c) m.set(r, c, rng.below(8) == 0);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_basis(m));
}
BENCHMARK(BM_Gf2Kernel)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
