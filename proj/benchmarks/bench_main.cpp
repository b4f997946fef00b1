#include <benchmark/benchmark.h>

#include <random>

#include "winterscan/analysis.hpp"
#include "winterscan/dem.hpp"
#include "winterscan/lidarimg.hpp"
#include "winterscan/record.hpp"
#include "winterscan/synthgen.hpp"

namespace {

winterscan::SyntheticRoadSpec bench_spec(double density) {
    winterscan::SyntheticRoadSpec spec;
    spec.roadway_width_m = 8.0;
    spec.length_m = 50.0;
    spec.margin_m = 2.0;
    spec.point_density = density;
    spec.seed = 7;
    winterscan::BankSpec banks;
    banks.gap_m = 5.6;
    spec.banks = banks;
    return spec;
}

void bm_generate_cloud(benchmark::State& state) {
    const auto spec = bench_spec(static_cast<double>(state.range(0)));
    for (auto _ : state) {
        auto synth = winterscan::generate_cloud(spec, winterscan::Epoch::Winter);
        benchmark::DoNotOptimize(synth.cloud.z.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 600);
}
BENCHMARK(bm_generate_cloud)->Arg(100)->Arg(400);

void bm_rasterize(benchmark::State& state) {
    const auto spec = bench_spec(static_cast<double>(state.range(0)));
    const auto synth = winterscan::generate_cloud(spec, winterscan::Epoch::Winter);
    for (auto _ : state) {
        auto grid = winterscan::rasterize(synth.cloud, 0.1);
        benchmark::DoNotOptimize(grid.elevations.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.cloud.size()));
}
BENCHMARK(bm_rasterize)->Arg(100)->Arg(400);

void bm_extract_profile(benchmark::State& state) {
    const auto spec = bench_spec(400);
    const auto synth = winterscan::generate_cloud(spec, winterscan::Epoch::Winter);
    const auto grid = winterscan::rasterize(synth.cloud, 0.1);
    const auto t = winterscan::make_transect("b", 25.0, -2.0, 0.0, 1.0, 12.0);
    for (auto _ : state) {
        auto profile = winterscan::extract_profile(grid, t, 0.05);
        benchmark::DoNotOptimize(profile.elevations.data());
    }
}
BENCHMARK(bm_extract_profile);

void bm_segment_road(benchmark::State& state) {
    const auto spec = bench_spec(100);
    const auto synth = winterscan::generate_cloud(spec, winterscan::Epoch::Bare);
    winterscan::SegmentParams params;
    for (auto _ : state) {
        auto seg = winterscan::segment_road(synth.cloud, 25.0, 4.0, 0.08, params);
        benchmark::DoNotOptimize(seg.member_indices.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.cloud.size()));
}
BENCHMARK(bm_segment_road);

void bm_destagger(benchmark::State& state) {
    winterscan::RawLidarFrame frame;
    frame.n_beams = 128;
    frame.n_cols = 1024;
    frame.intensities.resize(frame.n_beams * frame.n_cols);
    std::mt19937_64 eng(11);
    for (auto& v : frame.intensities) {
        v = static_cast<double>(eng() % 4096);
    }
    frame.pixel_shift.resize(frame.n_beams);
    for (std::size_t r = 0; r < frame.n_beams; ++r) {
        frame.pixel_shift[r] = static_cast<std::int32_t>(eng() % 64) - 32;
    }
    for (auto _ : state) {
        auto out = winterscan::destagger(frame);
        benchmark::DoNotOptimize(out.intensities.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(frame.intensities.size()));
}
BENCHMARK(bm_destagger);

void bm_encode_record(benchmark::State& state) {
    winterscan::SensorRecord rec;
    rec.timestamp_ns = 1700000000000000000;
    rec.sensor_id = "imu-0";
    std::vector<double> samples(256);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = 0.001 * static_cast<double>(i);
    }
    rec.payload["accel"] = samples;
    rec.payload["temp"] = 21.5;
    for (auto _ : state) {
        auto bytes = winterscan::encode_record(rec);
        benchmark::DoNotOptimize(bytes.data());
    }
    state.SetBytesProcessed(state.iterations() * 2100);
}
BENCHMARK(bm_encode_record);

}  // namespace

BENCHMARK_MAIN();
