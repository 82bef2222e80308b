#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <pnshape/channel.hpp>
#include <pnshape/cpe.hpp>
#include <pnshape/demapper.hpp>
#include <pnshape/fec.hpp>
#include <pnshape/metrics.hpp>
#include <pnshape/objective.hpp>

using namespace pnshape;

namespace {

std::vector<cd> noisy(std::size_t n) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd(0.0, 0.7);
    std::vector<cd> y(n);
    for (auto& v : y)
        v = {nd(gen), nd(gen)};
    return y;
}

void BM_Llr(benchmark::State& st) {
    const auto c = make_qam_gray(static_cast<std::size_t>(st.range(0)));
    const auto y = noisy(1 << 14);
    const auto model = st.range(1) ? DemapperModel::pcawgn(0.05, 4e-4) : DemapperModel::gaussian(0.05);
    for (auto _ : st)
        benchmark::DoNotOptimize(bitwise_llrs(y, c, model, 1));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(y.size()));
}
BENCHMARK(BM_Llr)->Args({16, 0})->Args({16, 1})->Args({64, 0})->Args({64, 1});

void BM_GaussHermiteGmi(benchmark::State& st) {
    const auto c = make_qam_gray(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(gmi_gauss_hermite(c, 12.0, 16));
}
BENCHMARK(BM_GaussHermiteGmi)->Arg(8)->Arg(16)->Arg(64);

void BM_MonteCarloObjective(benchmark::State& st) {
    ChannelSpec spec;
    spec.snr_db = 15.0;
    spec.linewidth_hz = 2e6;
    spec.mode = ChannelMode::GaussianRpn;
    const auto M = static_cast<std::size_t>(st.range(0));
    MonteCarloObjective obj(M, spec, matched_model(spec), 1 << 16, 1, 1);
    obj.refresh(0);
    const auto c = make_qam_gray(M);
    for (auto _ : st)
        benchmark::DoNotOptimize(obj.value(c));
}
BENCHMARK(BM_MonteCarloObjective)->Arg(16)->Arg(64);

void BM_Chase3(benchmark::State& st) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd(0.0, 0.5);
    std::vector<std::vector<double>> words(256, std::vector<double>(kCodeN));
    for (auto& w : words)
        for (auto& l : w)
            l = 8.0 * (1.0 + nd(gen));
    std::size_t i = 0;
    for (auto _ : st)
        benchmark::DoNotOptimize(chase3_decode(words[i++ % words.size()]));
}
BENCHMARK(BM_Chase3);

void BM_CpeChain(benchmark::State& st) {
    ChannelSpec spec;
    spec.snr_db = 15.0;
    spec.linewidth_hz = 2e6;
    spec.mode = ChannelMode::RandomWalk;
    const auto cfg = cpe_config_for(spec);
    for (auto _ : st)
        benchmark::DoNotOptimize(measure_residual_variance(spec, cfg, 32, 1 << 16, 1, 1));
}
BENCHMARK(BM_CpeChain);

} // namespace

BENCHMARK_MAIN();
