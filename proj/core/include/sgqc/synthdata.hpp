#ifndef SGQC_SYNTHDATA_HPP
#define SGQC_SYNTHDATA_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgqc/dataset.hpp"
#include "sgqc/labels.hpp"
#include "sgqc/tensor.hpp"

namespace sgqc {

// One hyperbolic reflection: arrival time at trace x is
// sqrt(t0^2 + (x / velocity)^2) samples, rendered with a Ricker wavelet.
struct ReflectionEvent {
    double t0 = 100.0;        // zero-offset time, in samples
    double velocity = 3.0;    // moveout scale, traces per sample
    double amplitude = 1.0;
    double frequency = 0.08;  // wavelet peak frequency, cycles per sample
};

// Marine noise families. Amplitudes scale unit-RMS fields, so family
// energies are amplitude^2 * (pixel count); all other members shape the
// field but not its energy.
struct NoiseRecipe {
    int swell_channels = 0;
    double swell_amplitude = 0.0;
    double pressure_amplitude = 0.0;
    double pressure_cutoff = 0.01;       // low-pass cutoff, cycles per sample
    int tugging_channels = 0;
    double tugging_amplitude = 0.0;
    double interference_slope = 0.5;     // dip, samples per trace
    double interference_amplitude = 0.0;
    double cavitation_amplitude = 0.0;
    double cavitation_band = 0.25;       // burst carrier frequency
};

struct GatherParams {
    int n_receivers = 299;  // width:  sensor position axis
    int n_samples = 299;    // height: recording time axis
    std::vector<ReflectionEvent> events;
    NoiseRecipe noise;
    std::uint64_t seed = 0;
};

struct LabeledGather {
    Tensor<float> image;  // n_samples x n_receivers x 1, in [0,1]
    int label = 0;
    double nsr = 0.0;  // noise-to-signal energy ratio
    GatherParams provenance;
};

// nsr < 0.25 -> good; 0.25 <= nsr <= 1.0 -> bad; nsr > 1.0 -> ugly.
int assign_label(double nsr);

// Deterministic in params.seed: same params give bitwise-identical images.
LabeledGather synthesize_gather(const GatherParams& params);

// ---------------------------------------------------------------------------
// dataset generation, manifests and splits

struct ManifestEntry {
    std::string filename;  // relative to the dataset directory
    int label = 0;
    double nsr = 0.0;
    std::uint64_t seed = 0;
};

using Manifest = std::vector<ManifestEntry>;

// Draws per-gather parameters so realized labels match the requested
// proportions exactly (largest-remainder apportionment, ties toward good).
// The sink is called once per gather, possibly from worker threads, with
// distinct indices in [0, count).
void generate_gathers(long long count, const std::array<double, kClassCount>& proportions,
                      std::uint64_t seed, int threads,
                      const std::function<void(long long, const LabeledGather&)>& sink);

// Writes <out_dir>/images/gather_NNNNNN.pgm plus <out_dir>/manifest.csv.
Manifest generate_dataset(const std::string& out_dir, long long count,
                          const std::array<double, kClassCount>& proportions,
                          std::uint64_t seed, int threads = 0);

// Stratified random split into (train, test); disjoint and exhaustive.
std::pair<Manifest, Manifest> split_train_test(const Manifest& manifest, double test_fraction,
                                               std::uint64_t seed);

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

// Loads the images listed in a manifest (paths relative to dataset_dir).
Dataset<float> load_dataset(const std::string& dataset_dir, const Manifest& manifest,
                            int threads = 0);
// Convenience: reads <dataset_dir>/manifest.csv first.
Dataset<float> load_dataset(const std::string& dataset_dir, int threads = 0);

}  // namespace sgqc

#endif
