#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "autores/averaging.hpp"
#include "autores/integrator.hpp"
#include "autores/phase_model.hpp"
#include "autores/solution.hpp"
#include "autores/stability.hpp"

using namespace autores;

namespace {

phase_model::PhaseRoot root_of(const ModelParams& p, phase_model::StabilityClass c) {
    for (const auto& r : phase_model::find_roots(p))
        if (r.stability_class == c) return r;
    return {};
}

const ModelParams& case1() {
    static const ModelParams p = params_for_delta(1.0, 0.0, 0.2);
    return p;
}

const ModelParams& case2() {
    static const ModelParams p = params_for_delta(1.0, 1.0, phase_model::bifurcation_delta(1.0, -1));
    return p;
}

}  // namespace

static void BM_RhsMs(benchmark::State& state) {
    const auto p = ModelParams::regularized(1.0, 0.0, -0.5, 1.0);
    double tau = 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrator::rhs_ms(tau, 3.0, 0.4, p));
        tau += 1e-3;
    }
}
BENCHMARK(BM_RhsMs);

static void BM_FindRoots(benchmark::State& state) {
    double nu = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phase_model::find_roots(-0.7, nu));
        nu = nu > 3.0 ? 0.1 : nu + 0.01;
    }
}
BENCHMARK(BM_FindRoots);

static void BM_SweepPartition(benchmark::State& state) {
    std::vector<double> nu(16), delta(61);
    for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = M_PI * static_cast<double>(i) / 16.0;
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = -1.5 + 0.05 * static_cast<double>(i);
    for (auto _ : state) benchmark::DoNotOptimize(phase_model::sweep_partition(1.0, nu, delta));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(nu.size() * delta.size()));
}
BENCHMARK(BM_SweepPartition)->Unit(benchmark::kMillisecond);

static void BM_BuildSolution(benchmark::State& state) {
    const auto& p = state.range(0) == 1 ? case1() : case2();
    const auto root =
        root_of(p, state.range(0) == 1 ? phase_model::StabilityClass::StableCaseI : phase_model::StabilityClass::CaseII);
    const int branch = state.range(0) == 1 ? 1 : -1;
    for (auto _ : state) benchmark::DoNotOptimize(series::build_solution(p, root, branch));
}
BENCHMARK(BM_BuildSolution)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_EvalSolution(benchmark::State& state) {
    const auto sol = series::build_solution(case1(), root_of(case1(), phase_model::StabilityClass::StableCaseI));
    double tau = 100.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(series::eval_solution(sol, tau));
        tau += 0.5;
    }
}
BENCHMARK(BM_EvalSolution);

static void BM_IntegrateCaptured(benchmark::State& state) {
    const auto p = ModelParams::regularized(1.0, 0.0, -0.5, 1.0);
    const double tau_end = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto traj = integrator::integrate(p, {0.0, 1.0, 0.0}, tau_end);
        benchmark::DoNotOptimize(traj.samples.data());
        state.counters["steps"] = static_cast<double>(traj.solver_stats.steps);
    }
}
BENCHMARK(BM_IntegrateCaptured)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_LyapunovTraceV1(benchmark::State& state) {
    const auto sol = series::build_solution(case1(), root_of(case1(), phase_model::StabilityClass::StableCaseI));
    for (auto _ : state) {
        auto tr = stability::lyapunov_trace(stability::LyapunovKind::V1, case1(), sol, 0.003, 0.02, 100.0, 1000.0);
        benchmark::DoNotOptimize(tr.fitted_exponent);
    }
}
BENCHMARK(BM_LyapunovTraceV1)->Unit(benchmark::kMillisecond);

static void BM_ActionAngleTable(benchmark::State& state) {
    const auto root = root_of(case2(), phase_model::StabilityClass::CaseII);
    for (auto _ : state)
        benchmark::DoNotOptimize(averaging::action_angle_table(root, case2(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ActionAngleTable)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_EnvelopeFitSignal(benchmark::State& state) {
    std::vector<double> tau, d;
    for (double t = 10.0; t < 2000.0; t += 0.05) {
        tau.push_back(t);
        d.push_back(std::pow(t, -0.375) * std::cos(std::pow(t, 1.25)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(averaging::envelope_fit_signal(tau, d));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(tau.size()));
}
BENCHMARK(BM_EnvelopeFitSignal)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
