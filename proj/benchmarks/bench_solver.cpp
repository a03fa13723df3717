#include <benchmark/benchmark.h>

#include <hdivmg/driver.hpp>
#include <hdivmg/multigrid.hpp>

using namespace hdivmg;

namespace
{

std::vector<double>
inclusions(Index n)
{
  ProblemSpec s;
  s.field_spec = {"inclusions", 1e4, 1, {}};
  return make_field(s, {n, n, 1}).values;
}

void
assembly(benchmark::State &state)
{
  const auto n = static_cast<Index>(state.range(0));
  const int degree = static_cast<int>(state.range(1));
  const CartesianLevel level(2, {n, n, 1}, Box::unit());
  const std::vector<double> kappa = inclusions(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_operator(level, kappa, 1e-2, degree));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(assembly)->Args({64, 0})->Args({128, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

void
smoother_sweep(benchmark::State &state)
{
  const auto n = static_cast<Index>(state.range(0));
  const int degree = static_cast<int>(state.range(1));
  const CartesianLevel level(2, {n, n, 1}, Box::unit());
  const SystemOperator op = assemble_operator(level, inclusions(n), 1e-2, degree);
  const PatchSmoother smoother(op, vertex_patches(level));
  const Vector b = Vector::Ones(op.size());
  Vector x = Vector::Zero(op.size());
  for (auto _ : state)
  {
    smoother.smooth(b, x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * smoother.num_patches());
}
BENCHMARK(smoother_sweep)->Args({64, 0})->Args({128, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

void
vcycle(benchmark::State &state)
{
  const auto n = static_cast<Index>(state.range(0));
  const auto [coarse, J] = choose_hierarchy(2, {n, n, 1});
  const MeshHierarchy hierarchy(2, coarse, J);
  ProblemSpec s;
  s.field_spec = {"inclusions", 1e4, 1, {}};
  const std::vector<std::vector<double>> kappa = coarsen_levels(make_field(s, {n, n, 1}), hierarchy);
  const VCycle cycle(hierarchy, kappa, 1e-2, 0);
  const Vector b = Vector::Ones(cycle.finest_op().size());
  for (auto _ : state)
    benchmark::DoNotOptimize(cycle.apply(b));
}
BENCHMARK(vcycle)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void
full_solve(benchmark::State &state)
{
  ProblemSpec s;
  s.model = Model::brinkman;
  s.mu = 1e-2;
  const auto n = static_cast<Index>(state.range(0));
  s.grid = {n, n, 1};
  s.field_spec = {"inclusions", 1e4, 1, {}};
  int iterations = 0;
  for (auto _ : state)
    iterations = solve_problem(s).report.iterations;
  state.counters["gmres_iterations"] = iterations;
}
BENCHMARK(full_solve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
