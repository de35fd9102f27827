#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "moire/frame.hpp"
#include "moire/homography.hpp"
#include "moire/layers.hpp"
#include "moire/metrics.hpp"
#include "moire/network.hpp"
#include "moire/synth.hpp"

using namespace moire;

namespace {

template <typename T>
nn::Tensor4<T> filled(nn::Dims d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    nn::Tensor4<T> t(d);
    for (T& v : t.data()) v = static_cast<T>(u(rng));
    return t;
}

void BM_Conv3x3(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    auto p = nn::make_conv<float>(64, 64, 3, 1, 1);
    p.kernel = filled<float>(p.kernel.dims(), 1);
    const auto x = filled<float>({1, 64, size, size}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_forward(x, p));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size * size));
}
BENCHMARK(BM_Conv3x3)->Arg(32)->Arg(64)->Arg(128);

void BM_Conv3x3Backward(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    auto p = nn::make_conv<float>(64, 64, 3, 1, 1);
    p.kernel = filled<float>(p.kernel.dims(), 3);
    const auto x = filled<float>({1, 64, size, size}, 4);
    const auto g = filled<float>({1, 64, size, size}, 5);
    for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_backward(x, p, g));
}
BENCHMARK(BM_Conv3x3Backward)->Arg(32)->Arg(64);

void BM_Deconv4x4(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    auto p = nn::make_deconv<float>(64, 64);
    p.kernel = filled<float>(p.kernel.dims(), 6);
    const auto x = filled<float>({1, 64, size, size}, 7);
    for (auto _ : state) benchmark::DoNotOptimize(nn::deconv2d_forward(x, p));
}
BENCHMARK(BM_Deconv4x4)->Arg(16)->Arg(32)->Arg(64);

void BM_NetworkInfer(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto net = nn::build_network<float>(nn::NetworkConfig{}, 8);
    const auto x = filled<float>({1, 3, size, size}, 9);
    for (auto _ : state) benchmark::DoNotOptimize(nn::infer(net, x));
}
BENCHMARK(BM_NetworkInfer)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EstimateHomography(benchmark::State& state) {
    const auto frame = align::synthesize_frame(Image(3, 64, 64, 0.5), align::FrameSpec{});
    Eigen::Matrix3d m;
    m << 1.05, 0.08, 3.0, -0.06, 0.97, -2.0, 1e-4, -2e-4, 1.0;
    const align::Homography h(m);
    std::vector<align::Point2> dst;
    for (const auto& p : frame.corners.points) dst.push_back(h.apply(p));
    for (auto _ : state) benchmark::DoNotOptimize(align::estimate_homography(frame.corners.span(), dst));
}
BENCHMARK(BM_EstimateHomography);

void BM_Warp(benchmark::State& state) {
    const Image img(3, 128, 128, 0.5);
    const auto h = align::Homography::translation(1.5, -2.25);
    for (auto _ : state) benchmark::DoNotOptimize(align::warp(img, h, 128, 128));
}
BENCHMARK(BM_Warp);

void BM_SimulateCapture(benchmark::State& state) {
    std::mt19937_64 rng(10);
    const auto ref = synth::procedural_reference(64, 64, rng);
    synth::MoireParams p;
    p.camera_sample_rate = 1.1;
    for (auto _ : state) benchmark::DoNotOptimize(synth::simulate_capture(ref, p));
}
BENCHMARK(BM_SimulateCapture);

void BM_Ssim(benchmark::State& state) {
    const Image a(3, 128, 128, 0.4), b(3, 128, 128, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim);

}  // namespace
BENCHMARK_MAIN();
