#include "apfv/aniso_elliptic.hpp"
#include "apfv/euler_lorentz.hpp"
#include "apfv/euler_maxwell.hpp"
#include "apfv/euler_poisson.hpp"
#include "apfv/stability.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace apfv;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> wave(std::size_t N, double base, double a) {
    std::vector<double> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = base + a * std::sin(kTwoPi * double(k) / double(N));
    return v;
}

void BM_EpStepAp(benchmark::State& st) {
    const auto N = std::size_t(st.range(0));
    const auto g = make_grid1d(N, 1.0 / double(N), Boundary::periodic);
    EpParams p;
    p.lambda = 1e-6;
    p.delta = 0.2 / double(N);
    auto s = init_well_prepared(wave(N, 1.0, 1e-12), wave(N, 0.3, 0.1), p, g, true);
    for (auto _ : st) benchmark::DoNotOptimize(s = step_ap(s, p, g));
    st.SetItemsProcessed(st.iterations() * std::int64_t(N));
}
BENCHMARK(BM_EpStepAp)->RangeMultiplier(4)->Range(128, 8192);

void BM_EpStepClassical(benchmark::State& st) {
    const auto N = std::size_t(st.range(0));
    const auto g = make_grid1d(N, 1.0 / double(N), Boundary::periodic);
    EpParams p;
    p.lambda = 1.0;
    p.delta = 0.2 / double(N);
    auto s = init_well_prepared(wave(N, 1.0, 0.01), wave(N, 0.3, 0.1), p, g);
    for (auto _ : st) benchmark::DoNotOptimize(s = step_classical(s, p, g));
    st.SetItemsProcessed(st.iterations() * std::int64_t(N));
}
BENCHMARK(BM_EpStepClassical)->RangeMultiplier(4)->Range(128, 8192);

void BM_EmStepAp(benchmark::State& st) {
    const auto N = std::size_t(st.range(0));
    const auto g = make_grid1d(N, 1.0 / double(N), Boundary::periodic);
    EmParams p;
    p.lambda = 1e-6;
    p.delta = 0.2 / double(N);
    auto s = init_well_prepared_em(wave(N, 1.0, 1e-12), wave(N, 0.3, 0.1), wave(N, 0.0, 0.05), 0.7, p, g, true);
    for (auto _ : st) benchmark::DoNotOptimize(s = step_ap_em(s, p, g));
    st.SetItemsProcessed(st.iterations() * std::int64_t(N));
}
BENCHMARK(BM_EmStepAp)->RangeMultiplier(4)->Range(128, 8192);

void lorentz_setup(std::size_t n, LorentzState& s, LorentzFields& f, Grid3D& g) {
    const double h = 1.0 / double(n);
    g = make_grid3d({n, n, n}, {h, h, h}, true);
    f.B.assign(g.size(), Vec3{0.5, -0.3, 1.2});
    f.E.assign(g.size(), Vec3{0.0, 0.0, 0.0});
    s.n.resize(g.size());
    s.q.assign(g.size(), Vec3{0.0, 0.0, 0.0});
    for (std::size_t id = 0; id < g.size(); ++id) {
        const auto m = g.multi(id);
        s.n[id] = 1.0 + 0.05 * std::sin(kTwoPi * (double(m[0]) + double(m[2])) * h);
    }
}

void BM_Fdap2Step(benchmark::State& st) {
    LorentzState s;
    LorentzFields f;
    Grid3D g;
    lorentz_setup(std::size_t(st.range(0)), s, f, g);
    LorentzParams p;
    p.tau = double(st.range(1) == 0 ? 1e-10 : 1.0);
    p.delta = 0.01;
    for (auto _ : st) benchmark::DoNotOptimize(step_fdap2(s, f, p, g));
    st.SetItemsProcessed(st.iterations() * std::int64_t(g.size()));
}
// Second argument: 0 for tau = 1e-10 (micro-macro path), 1 for tau = 1.
BENCHMARK(BM_Fdap2Step)->ArgsProduct({{6, 10, 14}, {0, 1}})->Unit(benchmark::kMillisecond);

AnisoProblem1D aniso(std::size_t M, double tau) {
    const std::size_t N = 2 * M + 1;
    const double h = 1.0 / double(N - 1);
    std::vector<double> E(N), F(N);
    for (std::size_t k = 0; k < N; ++k) {
        E[k] = std::sin(kTwoPi * double(k) * h);
        F[k] = 1.0 + double(k) * h;
    }
    return make_aniso_problem_1d(M, h, tau, E, F);
}

void BM_AnisoNaive1D(benchmark::State& st) {
    const auto prob = aniso(std::size_t(st.range(0)), 1e-6);
    for (auto _ : st) benchmark::DoNotOptimize(solve_naive_1d(prob, false));
}
BENCHMARK(BM_AnisoNaive1D)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMicrosecond);

void BM_AnisoMicroMacro1D(benchmark::State& st) {
    const auto prob = aniso(std::size_t(st.range(0)), 1e-6);
    for (auto _ : st) benchmark::DoNotOptimize(solve_micromacro_1d(prob, false));
}
BENCHMARK(BM_AnisoMicroMacro1D)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMicrosecond);

void BM_StabilityVerdict(benchmark::State& st) {
    StabilityQuery q;
    q.scheme = st.range(0) == 0 ? Scheme::classical : Scheme::ap;
    q.delta = 1e-3;
    q.lambda = 1e-4;
    q.h = 0.01;
    q.xi_samples = std::size_t(st.range(1));
    for (auto _ : st) benchmark::DoNotOptimize(verdict(q));
}
BENCHMARK(BM_StabilityVerdict)->ArgsProduct({{0, 1}, {512, 4096}});

void BM_StabilityMap(benchmark::State& st) {
    std::vector<double> deltas, lambdas;
    for (int i = 0; i < 64; ++i) deltas.push_back(1e-10 * std::pow(10.0, i * 10.0 / 63));
    for (int i = 0; i < 8; ++i) lambdas.push_back(1e-8 * std::pow(10.0, i * 4.0 / 7));
    for (auto _ : st)
        benchmark::DoNotOptimize(stability_map(Scheme::classical, deltas, lambdas, 0.01, 1.0, 1.0, 512,
                                               unsigned(st.range(0))));
}
BENCHMARK(BM_StabilityMap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
