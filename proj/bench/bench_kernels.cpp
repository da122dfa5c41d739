// Serial references vs OpenMP kernels. Thread count from OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>

#include "cpafdm/cpim.hpp"
#include "cpafdm/detection.hpp"
#include "cpafdm/metrics.hpp"

using namespace cpafdm;

namespace {

struct Link {
  std::size_t n = 64;
  double c1 = optimal_c1(2, 0, 64).c1;
  double c2 = default_c2(64);
  Waveform w;
  ChannelFamily family;
  QamConstellation m{4};
  std::vector<double> grid{0, 10, 20, 30};

  Link() : w(make()) {
    family.n = n;
  }
  Waveform make() {
    std::mt19937_64 rng(1);
    return Waveform::cpafdm_one_sided(n, c1, c2, Permutation::random(n, rng));
  }
};

const Link& link() {
  static const Link l;
  return l;
}

template <bool Parallel>
void ber(benchmark::State& st) {
  const Link& l = link();
  for (auto _ : st) {
    auto r = Parallel ? run_ber(l.w, l.family, l.m, l.grid, 64, 1)
                      : serial::run_ber(l.w, l.family, l.m, l.grid, 64, 1);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void papr(benchmark::State& st) {
  const Link& l = link();
  for (auto _ : st) {
    auto r = Parallel ? papr_samples(l.w, l.m, 2000, 1) : serial::papr_samples(l.w, l.m, 2000, 1);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void af(benchmark::State& st) {
  const CVec s = all_ones_frame(link().w).data();
  for (auto _ : st) {
    auto r = Parallel ? ambiguity(s, 8) : serial::ambiguity(s, 8);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void ensemble(benchmark::State& st) {
  const Link& l = link();
  EnsembleSetup setup;
  setup.n = l.n;
  setup.c1 = l.c1;
  setup.c2 = l.c2;
  const auto perms = random_permutations(l.n, 16, 1);
  for (auto _ : st) {
    auto r = Parallel ? permutation_ensemble(setup, perms) : serial::permutation_ensemble(setup, perms);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void cpim(benchmark::State& st) {
  const Link& l = link();
  const CpimScheme s(build_codebook(l.n, 2, 1), l.c1, l.c2, l.m);
  for (auto _ : st) {
    auto r = Parallel ? run_cpim(s, l.family, l.grid, 32, 1) : serial::run_cpim(s, l.family, l.grid, 32, 1);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK(ber<false>)->Name("ber/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(ber<true>)->Name("ber/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(papr<false>)->Name("papr/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(papr<true>)->Name("papr/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(af<false>)->Name("ambiguity/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(af<true>)->Name("ambiguity/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(ensemble<false>)->Name("ensemble/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(ensemble<true>)->Name("ensemble/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(cpim<false>)->Name("cpim/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(cpim<true>)->Name("cpim/openmp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
