#include <benchmark/benchmark.h>

#include <map>

#include "diffreg/diffops.hpp"
#include "diffreg/kkt.hpp"
#include "diffreg/preconditioner.hpp"
#include "diffreg/synth.hpp"
#include "diffreg/transport.hpp"

using namespace diffreg;

namespace {

const SynthProblem<double>& problem(int n) {
  static std::map<int, SynthProblem<double>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, synth_case<double>(SynthCase::swirl, n, 1)).first;
  return it->second;
}

void BM_SpectralGradient(benchmark::State& st) {
  const auto& p = problem(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(spectral_gradient(p.m0));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(p.m0.size()));
}

void BM_Fd8Gradient(benchmark::State& st) {
  const auto& p = problem(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fd8_gradient(p.m0));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(p.m0.size()));
}

void BM_StateSolve(benchmark::State& st) {
  const auto& p = problem(static_cast<int>(st.range(0)));
  const TransportPlan<double> plan(p.v_true, InterpMethod::cubic, DiffScheme::fd8);
  for (auto _ : st) benchmark::DoNotOptimize(solve_state(p.m0, plan));
}

void BM_HessianMatvec(benchmark::State& st) {
  const auto& p = problem(static_cast<int>(st.range(0)));
  KktProblem<double> kkt(p.m0, p.m1, RegConfig{}, {});
  kkt.set_velocity(p.v_true);
  const auto dir = kkt.gradient();
  for (auto _ : st) benchmark::DoNotOptimize(kkt.hessian_matvec(dir));
}

void BM_Preconditioner(benchmark::State& st) {
  const auto& p = problem(64);
  KktProblem<double> kkt(p.m0, p.m1, RegConfig{}, {});
  kkt.set_velocity(p.v_true);
  const auto r = kkt.gradient();
  Preconditioner<double> pre(kkt, {static_cast<PrecondKind>(st.range(0))});
  for (auto _ : st) benchmark::DoNotOptimize(pre.apply(r, 0.1));
}

}  // namespace

BENCHMARK(BM_SpectralGradient)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Fd8Gradient)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_StateSolve)->Arg(64)->Arg(128);
BENCHMARK(BM_HessianMatvec)->Arg(64)->Arg(128);
BENCHMARK(BM_Preconditioner)
    ->Arg(static_cast<int>(PrecondKind::reg))
    ->Arg(static_cast<int>(PrecondKind::h0))
    ->Arg(static_cast<int>(PrecondKind::two_level));
BENCHMARK_MAIN();
