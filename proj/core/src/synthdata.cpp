#include "sgqc/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "sgqc/parallel.hpp"
#include "sgqc/pgm.hpp"
#include "sgqc/rng.hpp"
#include "sgqc/sampling.hpp"

namespace sgqc {

namespace {

constexpr double kPi = std::numbers::pi;

// Label thresholds on the noise-to-signal energy ratio.
constexpr double kGoodBelow = 0.25;
constexpr double kUglyAbove = 1.0;

// Seed salts: families get fixed small salts, per-gather seeds live above
// 2^32 so the two spaces never collide.
constexpr std::uint64_t kSaltSwell = 1;
constexpr std::uint64_t kSaltPressure = 2;
constexpr std::uint64_t kSaltTugging = 3;
constexpr std::uint64_t kSaltInterference = 4;
constexpr std::uint64_t kSaltCavitation = 5;
constexpr std::uint64_t kSaltEvents = 6;
constexpr std::uint64_t kSaltOrder = 7;
constexpr std::uint64_t kSaltGatherBase = 1ULL << 32;

using Field = std::vector<double>;  // n_samples rows x n_receivers cols

double ricker(double dt, double freq) {
    const double a = kPi * freq * dt;
    const double a2 = a * a;
    return (1.0 - 2.0 * a2) * std::exp(-a2);
}

void render_event(const ReflectionEvent& e, int h, int w, Field& field) {
    // evaluate only where the wavelet is non-negligible
    const double half = std::sqrt(18.0) / (kPi * e.frequency);
    for (int x = 0; x < w; ++x) {
        const double dx = static_cast<double>(x) / e.velocity;
        const double tau = std::sqrt(e.t0 * e.t0 + dx * dx);
        const int t_lo = std::max(0, static_cast<int>(std::ceil(tau - half)));
        const int t_hi = std::min(h - 1, static_cast<int>(std::floor(tau + half)));
        for (int t = t_lo; t <= t_hi; ++t)
            field[static_cast<std::size_t>(t) * w + x] +=
                e.amplitude * ricker(static_cast<double>(t) - tau, e.frequency);
    }
}

Field render_signal(const GatherParams& p) {
    Field field(static_cast<std::size_t>(p.n_samples) * p.n_receivers, 0.0);
    for (const auto& e : p.events) render_event(e, p.n_samples, p.n_receivers, field);
    return field;
}

double sum_squares(const Field& f) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return s;
}

// Scales to unit RMS; returns false for an all-zero field.
bool normalize_rms(Field& f) {
    const double ss = sum_squares(f);
    if (ss <= 0.0) return false;
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(f.size()));
    for (double& v : f) v *= inv;
    return true;
}

std::vector<int> pick_channels(std::mt19937_64& rng, int count, int w) {
    std::vector<int> all(static_cast<std::size_t>(w));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(std::min(count, w)));
    return all;
}

// Low-frequency, high-amplitude oscillation on a few whole channels: the
// classic vertical-stripe appearance.
Field render_swell(const GatherParams& p, std::uint64_t seed) {
    Field field(static_cast<std::size_t>(p.n_samples) * p.n_receivers, 0.0);
    if (p.noise.swell_channels < 1) return field;
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int h = p.n_samples, w = p.n_receivers;
    for (int ch : pick_channels(rng, p.noise.swell_channels, w)) {
        const double gain = 0.5 + std::abs(std::normal_distribution<double>(0.0, 1.0)(rng));
        const double f1 = 0.004 + 0.016 * unit(rng);
        const double f2 = 0.004 + 0.016 * unit(rng);
        const double p1 = 2.0 * kPi * unit(rng), p2 = 2.0 * kPi * unit(rng);
        for (int t = 0; t < h; ++t)
            field[static_cast<std::size_t>(t) * w + ch] +=
                gain * (std::sin(2.0 * kPi * f1 * t + p1) +
                        0.5 * std::sin(2.0 * kPi * f2 * t + p2));
    }
    return field;
}

// Smooth low-frequency wander: white noise low-passed along time (both
// directions) and lightly across channels.
Field render_pressure(const GatherParams& p, std::uint64_t seed) {
    const int h = p.n_samples, w = p.n_receivers;
    Field field(static_cast<std::size_t>(h) * w);
    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : field) v = gauss(rng);

    const double fc = std::clamp(p.noise.pressure_cutoff, 1e-4, 0.5);
    const double a = 2.0 * kPi * fc / (2.0 * kPi * fc + 1.0);
    for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int t = 0; t < h; ++t) {
            double& v = field[static_cast<std::size_t>(t) * w + x];
            s += a * (v - s);
            v = s;
        }
        s = 0.0;
        for (int t = h - 1; t >= 0; --t) {
            double& v = field[static_cast<std::size_t>(t) * w + x];
            s += a * (v - s);
            v = s;
        }
    }
    const double ax = 0.35;
    for (int t = 0; t < h; ++t) {
        double s = 0.0;
        for (int x = 0; x < w; ++x) {
            double& v = field[static_cast<std::size_t>(t) * w + x];
            s += ax * (v - s);
            v = s;
        }
    }
    return field;
}

// Short damped oscillations on a channel, bleeding into its neighbors.
Field render_tugging(const GatherParams& p, std::uint64_t seed) {
    const int h = p.n_samples, w = p.n_receivers;
    Field field(static_cast<std::size_t>(h) * w, 0.0);
    if (p.noise.tugging_channels < 1) return field;
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int ch : pick_channels(rng, p.noise.tugging_channels, w)) {
        const int bursts = 1 + static_cast<int>(unit(rng) * 3.0);
        for (int b = 0; b < bursts; ++b) {
            const double t0 = unit(rng) * h;
            const double len = 20.0 + 40.0 * unit(rng);
            const double f = 0.03 + 0.05 * unit(rng);
            const double phase = 2.0 * kPi * unit(rng);
            for (int d = -2; d <= 2; ++d) {
                const int x = ch + d;
                if (x < 0 || x >= w) continue;
                const double wd = std::pow(0.5, std::abs(d));
                const int lo = std::max(0, static_cast<int>(t0 - 2.0 * len));
                const int hi = std::min(h - 1, static_cast<int>(t0 + 2.0 * len));
                for (int t = lo; t <= hi; ++t) {
                    const double u = (t - t0) / (len / 2.0);
                    field[static_cast<std::size_t>(t) * w + x] +=
                        wd * std::exp(-u * u) *
                        std::sin(2.0 * kPi * f * (t - t0) + phase);
                }
            }
        }
    }
    return field;
}

// Coherent dipping linear events crossing the whole gather.
Field render_interference(const GatherParams& p, std::uint64_t seed) {
    const int h = p.n_samples, w = p.n_receivers;
    Field field(static_cast<std::size_t>(h) * w, 0.0);
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int events = 1 + static_cast<int>(unit(rng) * 3.0);
    const double slope = std::abs(p.noise.interference_slope);
    for (int e = 0; e < events; ++e) {
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        const double s = sign * slope * (0.8 + 0.4 * unit(rng));
        // intercept range that keeps the line inside the window somewhere
        const double lo_t0 = s > 0.0 ? -s * w : 0.0;
        const double hi_t0 = s > 0.0 ? static_cast<double>(h) : h - s * w;
        const double t0 = lo_t0 + unit(rng) * (hi_t0 - lo_t0);
        const double f = 0.04 + 0.06 * unit(rng);
        const double half = std::sqrt(18.0) / (kPi * f);
        for (int x = 0; x < w; ++x) {
            const double tau = t0 + s * x;
            const int lo = std::max(0, static_cast<int>(std::ceil(tau - half)));
            const int hi = std::min(h - 1, static_cast<int>(std::floor(tau + half)));
            for (int t = lo; t <= hi; ++t)
                field[static_cast<std::size_t>(t) * w + x] += ricker(t - tau, f);
        }
    }
    return field;
}

// Localized band-limited bursts around random (time, channel) centers.
Field render_cavitation(const GatherParams& p, std::uint64_t seed) {
    const int h = p.n_samples, w = p.n_receivers;
    Field field(static_cast<std::size_t>(h) * w, 0.0);
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int bursts = 4 + static_cast<int>(unit(rng) * 7.0);
    const double band = std::clamp(p.noise.cavitation_band, 0.02, 0.45);
    for (int b = 0; b < bursts; ++b) {
        const int x0 = static_cast<int>(unit(rng) * w);
        const double t0 = unit(rng) * h;
        const double sigma = 4.0 + 8.0 * unit(rng);
        const double f = band * (0.9 + 0.2 * unit(rng));
        const double phase = 2.0 * kPi * unit(rng);
        for (int d = 0; d <= 1; ++d) {
            const int x = x0 + d;
            if (x >= w) continue;
            const int lo = std::max(0, static_cast<int>(t0 - 4.0 * sigma));
            const int hi = std::min(h - 1, static_cast<int>(t0 + 4.0 * sigma));
            for (int t = lo; t <= hi; ++t) {
                const double u = (t - t0) / sigma;
                field[static_cast<std::size_t>(t) * w + x] +=
                    std::exp(-0.5 * u * u) * std::sin(2.0 * kPi * f * t + phase);
            }
        }
    }
    return field;
}

struct FamilyRef {
    double amplitude;
    std::uint64_t salt;
    Field (*render)(const GatherParams&, std::uint64_t);
};

std::array<FamilyRef, 5> noise_families(const GatherParams& p) {
    return {{{p.noise.swell_amplitude, kSaltSwell, render_swell},
             {p.noise.pressure_amplitude, kSaltPressure, render_pressure},
             {p.noise.tugging_amplitude, kSaltTugging, render_tugging},
             {p.noise.interference_amplitude, kSaltInterference, render_interference},
             {p.noise.cavitation_amplitude, kSaltCavitation, render_cavitation}}};
}

}  // namespace

int assign_label(double nsr) {
    if (nsr < 0.0 || !std::isfinite(nsr))
        throw Error("nsr must be a finite non-negative number, got " + std::to_string(nsr));
    if (nsr < kGoodBelow) return static_cast<int>(Label::Good);
    if (nsr <= kUglyAbove) return static_cast<int>(Label::Bad);
    return static_cast<int>(Label::Ugly);
}

LabeledGather synthesize_gather(const GatherParams& params) {
    if (params.n_receivers < 8 || params.n_samples < 8)
        throw Error("gather extents must be at least 8 samples");
    if (params.events.empty())
        throw Error("a gather needs at least one reflection event");
    for (const auto& e : params.events)
        if (e.amplitude < 0.0 || e.frequency <= 0.0 || e.velocity <= 0.0 || e.t0 < 0.0)
            throw Error("invalid reflection event parameters");

    const int h = params.n_samples, w = params.n_receivers;
    const double grid = static_cast<double>(h) * w;

    Field z = render_signal(params);
    const double signal_energy = sum_squares(z);
    if (signal_energy <= 0.0)
        throw Error("zero-energy signal: all event amplitudes are zero");

    // Noise energy is the sum of per-family energies (unit-RMS fields times
    // squared amplitude), which makes nsr exactly monotone in each amplitude.
    double noise_energy = 0.0;
    for (const auto& fam : noise_families(params)) {
        if (fam.amplitude < 0.0) throw Error("noise amplitudes must be non-negative");
        if (fam.amplitude == 0.0) continue;
        Field u = fam.render(params, derive_seed(params.seed, fam.salt));
        if (!normalize_rms(u)) continue;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += fam.amplitude * u[i];
        noise_energy += fam.amplitude * fam.amplitude * grid;
    }
    const double nsr = noise_energy / signal_energy;

    double lo = z[0], hi = z[0];
    for (double v : z) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi - lo > 0.0))
        throw NumericError("degenerate gather: constant image");

    LabeledGather out;
    out.image = Tensor<float>({h, w, 1});
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < z.size(); ++i)
        out.image[i] = static_cast<float>((z[i] - lo) * inv);
    out.nsr = nsr;
    out.label = assign_label(nsr);
    out.provenance = params;
    return out;
}

namespace {

// Draws events, noise structure and relative family weights, then rescales
// all amplitudes so the realized nsr hits a target drawn from the class's
// band. Bands keep a margin from the label thresholds.
GatherParams draw_gather_params(int wanted_label, std::uint64_t gather_seed) {
    GatherParams p;
    p.seed = gather_seed;
    std::mt19937_64 rng = make_rng(derive_seed(gather_seed, kSaltEvents));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n_events = 2 + static_cast<int>(unit(rng) * 4.0);
    for (int e = 0; e < n_events; ++e) {
        ReflectionEvent ev;
        ev.t0 = 30.0 + 230.0 * unit(rng);
        ev.velocity = 1.5 + 4.5 * unit(rng);
        ev.amplitude = 0.5 + 1.0 * unit(rng);
        ev.frequency = 0.06 + 0.09 * unit(rng);
        p.events.push_back(ev);
    }

    NoiseRecipe& n = p.noise;
    n.swell_channels = 3 + static_cast<int>(unit(rng) * 18.0);
    n.pressure_cutoff = 0.005 + 0.025 * unit(rng);
    n.tugging_channels = 2 + static_cast<int>(unit(rng) * 9.0);
    n.interference_slope = 0.2 + 1.0 * unit(rng);
    n.cavitation_band = 0.15 + 0.2 * unit(rng);

    // swell is always present; the other families join at random
    std::array<double, 5> weight{};
    weight[0] = 0.5 + 0.5 * unit(rng);
    for (std::size_t k = 1; k < 5; ++k) {
        const bool active = unit(rng) < 0.6;
        const double wk = 0.3 + 0.7 * unit(rng);
        weight[k] = active ? wk : 0.0;
    }

    double target = 0.0;
    switch (wanted_label) {
        case 0: target = 0.02 + 0.18 * unit(rng); break;
        case 1: target = 0.30 + 0.65 * unit(rng); break;
        default: target = 1.10 + 1.90 * unit(rng); break;
    }

    const double grid = static_cast<double>(p.n_samples) * p.n_receivers;
    const double signal_energy = sum_squares(render_signal(p));
    double wsq = 0.0;
    for (double wk : weight) wsq += wk * wk;
    const double scale = std::sqrt(target * signal_energy / (grid * wsq));

    n.swell_amplitude = scale * weight[0];
    n.pressure_amplitude = scale * weight[1];
    n.tugging_amplitude = scale * weight[2];
    n.interference_amplitude = scale * weight[3];
    n.cavitation_amplitude = scale * weight[4];
    return p;
}

}  // namespace

void generate_gathers(long long count, const std::array<double, kClassCount>& proportions,
                      std::uint64_t seed, int threads,
                      const std::function<void(long long, const LabeledGather&)>& sink) {
    double psum = 0.0;
    for (double p : proportions) {
        if (p < 0.0) throw Error("class proportions must be non-negative");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-6)
        throw Error("class proportions must sum to 1, got " + std::to_string(psum));
    long long with_mass = 0;
    for (double p : proportions)
        if (p > 0.0) ++with_mass;
    if (count < with_mass)
        throw Error("count " + std::to_string(count) + " is below the " +
                    std::to_string(with_mass) + " classes with nonzero proportion");

    const std::vector<long long> counts =
        apportion(count, std::span<const double>(proportions.data(), proportions.size()));
    std::vector<int> wanted;
    wanted.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < kClassCount; ++c)
        wanted.insert(wanted.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]), c);
    std::mt19937_64 order_rng = make_rng(derive_seed(seed, kSaltOrder));
    std::shuffle(wanted.begin(), wanted.end(), order_rng);

    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        const std::uint64_t gather_seed =
            derive_seed(seed, kSaltGatherBase + static_cast<std::uint64_t>(i));
        const GatherParams params = draw_gather_params(wanted[i], gather_seed);
        const LabeledGather gather = synthesize_gather(params);
        if (gather.label != wanted[i])
            throw Error("generated gather missed its class band (internal error)");
        sink(static_cast<long long>(i), gather);
    });
}

Manifest generate_dataset(const std::string& out_dir, long long count,
                          const std::array<double, kClassCount>& proportions,
                          std::uint64_t seed, int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "images");
    Manifest manifest(static_cast<std::size_t>(count));
    generate_gathers(count, proportions, seed, threads,
                     [&](long long i, const LabeledGather& g) {
                         char name[64];
                         std::snprintf(name, sizeof(name), "images/gather_%06lld.pgm", i);
                         write_pgm((fs::path(out_dir) / name).string(), g.image);
                         manifest[static_cast<std::size_t>(i)] =
                             ManifestEntry{name, g.label, g.nsr, g.provenance.seed};
                     });
    write_manifest((fs::path(out_dir) / "manifest.csv").string(), manifest);
    return manifest;
}

std::pair<Manifest, Manifest> split_train_test(const Manifest& manifest, double test_fraction,
                                               std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error("test fraction must lie strictly between 0 and 1");
    std::vector<int> labels(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) labels[i] = manifest[i].label;
    const std::vector<bool> held = stratified_holdout(labels, test_fraction, seed);

    Manifest train, test;
    for (std::size_t i = 0; i < manifest.size(); ++i)
        (held[i] ? test : train).push_back(manifest[i]);

    std::array<long long, kClassCount> in_total{}, in_train{}, in_test{};
    for (const auto& e : manifest) ++in_total[static_cast<std::size_t>(e.label)];
    for (const auto& e : train) ++in_train[static_cast<std::size_t>(e.label)];
    for (const auto& e : test) ++in_test[static_cast<std::size_t>(e.label)];
    for (int c = 0; c < kClassCount; ++c) {
        if (in_total[static_cast<std::size_t>(c)] == 0) continue;
        if (in_train[static_cast<std::size_t>(c)] == 0)
            throw Error(std::string("split leaves class '") + label_name(c) +
                        "' empty in the training part");
        if (in_test[static_cast<std::size_t>(c)] == 0)
            warn(std::string("class '") + label_name(c) + "' has no samples in the test part");
    }
    return {std::move(train), std::move(test)};
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open manifest for writing: " + path);
    os << "filename,label,nsr,seed\n";
    for (const auto& e : manifest) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%llu\n", e.filename.c_str(),
                      label_name(e.label), e.nsr,
                      static_cast<unsigned long long>(e.seed));
        os << buf;
    }
    if (!os) throw IoError("failed writing manifest: " + path);
}

Dataset<float> load_dataset(const std::string& dataset_dir, const Manifest& manifest,
                            int threads) {
    namespace fs = std::filesystem;
    Dataset<float> data(manifest.size());
    parallel_for(manifest.size(), threads, [&](std::size_t i) {
        data[i].image = read_pgm((fs::path(dataset_dir) / manifest[i].filename).string());
        data[i].label = manifest[i].label;
    });
    return data;
}

Dataset<float> load_dataset(const std::string& dataset_dir, int threads) {
    namespace fs = std::filesystem;
    return load_dataset(dataset_dir,
                        read_manifest((fs::path(dataset_dir) / "manifest.csv").string()), threads);
}

Manifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("filename,label,nsr,seed", 0) != 0)
        throw IoError("malformed manifest header in " + path);
    Manifest manifest;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> cols;
        std::size_t start = 0;
        for (int c = 0; c < 3; ++c) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos)
                throw IoError("malformed manifest row in " + path + ": " + line);
            cols[static_cast<std::size_t>(c)] = line.substr(start, comma - start);
            start = comma + 1;
        }
        cols[3] = line.substr(start);
        ManifestEntry e;
        e.filename = cols[0];
        e.label = label_from_name(cols[1]);
        e.nsr = std::stod(cols[2]);
        e.seed = std::stoull(cols[3]);
        manifest.push_back(std::move(e));
    }
    return manifest;
}

}  // namespace sgqc
