// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "dawmr/encoding_kernels.hpp"
#include "dawmr/iteration.hpp"
#include "fixtures.hpp"

using namespace dawmr;

namespace {

struct Scene {
  ExtractorSpec spec = fixtures::ss_fv_spec(64);
  FeatureExtractor extractor;
  Volume image;
  std::vector<Coord> locations;

  Scene() {
    Rng rng(1);
    extractor = fixtures::random_extractor(spec, rng);
    image = fixtures::random_volume(Dims{40, 40, 40}, 1, rng, 0, 255);
    const Box support = support_region(spec, image.dims());
    for (int i = 0; i < 2000; ++i) {
      Coord c;
      for (int a = 0; a < 3; ++a)
        c[a] = support.lo[a] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(support.extent(a))));
      locations.push_back(c);
    }
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

const Box kRegion{{4, 4, 4}, {28, 28, 28}};

void BM_EncodeRegionSerial(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state)
    benchmark::DoNotOptimize(encode_region_serial(s.extractor.dictionary(0, 0), s.spec.encoder, s.image, kRegion));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRegion.voxels()));
}
BENCHMARK(BM_EncodeRegionSerial)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_EncodeRegion(benchmark::State& state) {
  const auto& s = scene();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(encode_region(s.extractor.dictionary(0, 0), s.spec.encoder, s.image, kRegion, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRegion.voxels()));
}
BENCHMARK(BM_EncodeRegion)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ExtractReference(benchmark::State& state) {
  const auto& s = scene();
  const ScaledInputs inputs(s.spec, {&s.image, nullptr});
  std::vector<float> row(s.extractor.dims());
  const std::size_t n = 200;
  for (auto _ : state)
    for (std::size_t i = 0; i < n; ++i) {
      s.extractor.extract_reference(inputs, s.locations[i], row);
      benchmark::DoNotOptimize(row.data());
    }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ExtractReference)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ExtractBatch(benchmark::State& state) {
  const auto& s = scene();
  const ScaledInputs inputs(s.spec, {&s.image, nullptr});
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(s.extractor.extract_batch(inputs, s.locations, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.locations.size()));
}
BENCHMARK(BM_ExtractBatch)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
  Rng rng(2);
  const auto model = fixtures::random_iteration(fixtures::ss_fv_spec(16), 1, rng, 50);
  const auto image = fixtures::random_volume(Dims{32, 32, 32}, 1, rng, 0, 255);
  const InferenceOptions options{static_cast<int>(state.range(0)), 16};
  for (auto _ : state) benchmark::DoNotOptimize(infer_iteration(model, image, nullptr, options));
}
BENCHMARK(BM_Inference)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
