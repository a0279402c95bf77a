// Serial vs OpenMP block kernels on tensors shaped like two-site DMRG and
// TEBD workloads. Thread count follows OMP_NUM_THREADS / ADAPTMPS_THREADS.

#include <benchmark/benchmark.h>

#include "adaptmps/cli.hpp"
#include "adaptmps/dense_reference.hpp"
#include "adaptmps/kernels.hpp"

using namespace adaptmps;

namespace {

// Bond leg with `sectors` charges centred on `mid`, each of dimension `dim`.
Leg bond(Dir dir, int mid, int sectors, int dim) {
  std::vector<Sector> s;
  for (int c = mid - sectors / 2; c < mid - sectors / 2 + sectors; ++c) s.push_back({c, dim});
  return Leg(dir, s);
}

const Leg kSpin(Dir::Out, {{0, 1}, {1, 1}});

// theta (a_l In, s Out, s Out, a_{l+2} Out) and an environment-like
// tensor contracted over the left bond.
struct Workload {
  SymTensor theta, env;
  explicit Workload(int dim) {
    std::mt19937_64 rng(1);
    theta = oracle::random_tensor(rng, {bond(Dir::In, 8, 9, dim), kSpin, kSpin, bond(Dir::Out, 7, 9, dim)});
    env = oracle::random_tensor(rng, {bond(Dir::In, 8, 9, dim), bond(Dir::Out, 8, 9, dim)});
  }
};

void run_contract(benchmark::State& state, kernels::Execution exec) {
  Workload w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = exec == kernels::Execution::Serial
                 ? kernels::contract_serial(w.env, w.theta, {{1, 0}}, SectorPolicy::Exact)
                 : kernels::contract_parallel(w.env, w.theta, {{1, 0}}, SectorPolicy::Exact);
    benchmark::DoNotOptimize(r);
  }
}

void run_svd(benchmark::State& state, kernels::Execution exec) {
  Workload w(static_cast<int>(state.range(0)));
  const auto saved = kernels::execution();
  kernels::set_execution(exec);
  for (auto _ : state) {
    auto r = block_svd(w.theta, {0, 1}, {2, 3}, {256, 1e-12});
    benchmark::DoNotOptimize(r);
  }
  kernels::set_execution(saved);
}

void BM_ContractSerial(benchmark::State& s) { run_contract(s, kernels::Execution::Serial); }
void BM_ContractParallel(benchmark::State& s) { run_contract(s, kernels::Execution::Parallel); }
void BM_SvdSerial(benchmark::State& s) { run_svd(s, kernels::Execution::Serial); }
void BM_SvdParallel(benchmark::State& s) { run_svd(s, kernels::Execution::Parallel); }

BENCHMARK(BM_ContractSerial)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContractParallel)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvdSerial)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvdParallel)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  cli::configure_threads(0);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
