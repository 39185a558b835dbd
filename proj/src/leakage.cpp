// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include "mcpa/leakage.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace mcpa {

namespace detail {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t trace_index,
                          std::uint64_t lane) noexcept {
    return mix64(mix64(seed ^ mix64(trace_index)) ^ lane);
}

}  // namespace detail

namespace {

// Box-Muller on top of mt19937_64, so traces are bit-reproducible across
// standard library implementations (std::normal_distribution is not
// pinned by the standard).
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        const double u1 =
            (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 rng_;
};

}  // namespace

void LeakageConfig::validate() const {
    if (noise_sigma < 0.0)
        throw std::invalid_argument("noise_sigma must be >= 0");
    if (samples_per_trace < 1)
        throw std::invalid_argument("samples_per_trace must be >= 1");
    if (poi_offset < 0) throw std::invalid_argument("poi_offset must be >= 0");
    if (poi_stride < 1) throw std::invalid_argument("poi_stride must be >= 1");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    const long long last_poi =
        static_cast<long long>(poi_offset) + 31LL * poi_stride;
    if (last_poi >= samples_per_trace)
        throw std::invalid_argument(
            "POI window does not fit: poi_offset + 31*poi_stride = " +
            std::to_string(last_poi) + " but samples_per_trace = " +
            std::to_string(samples_per_trace));
}

double leak_value(Nibble v) noexcept {
    return static_cast<double>(std::popcount(static_cast<unsigned>(v & 0xF)));
}

Trace simulate_trace(std::uint64_t plaintext, const MasterKey& key,
                     const LeakageConfig& cfg, std::uint64_t trace_index) {
    cfg.validate();

    Trace t;
    t.plaintext = plaintext;
    RoundIntermediates ri;
    t.ciphertext = encrypt(plaintext, key, &ri);

    // Averaging `repeats` measurements scales the noise deviation by
    // 1/sqrt(repeats); the deterministic signal part is unchanged, so the
    // stored trace is drawn directly at the reduced deviation.
    const double sigma =
        cfg.noise_sigma / std::sqrt(static_cast<double>(cfg.repeats));

    GaussianStream noise(detail::stream_seed(cfg.seed, trace_index, 1));
    t.samples.resize(static_cast<std::size_t>(cfg.samples_per_trace));
    for (double& s : t.samples) s = cfg.baseline + sigma * noise.next();

    for (int k = 0; k < 32; ++k) {
        const int cell = k & 15;
        const State& layer = ri.sub_out[k < 16 ? 0 : 1];
        t.samples[static_cast<std::size_t>(cfg.poi_offset + k * cfg.poi_stride)] +=
            leak_value(layer.cells[cell]);
    }
    return t;
}

TraceSet simulate_campaign(std::size_t num_traces, const MasterKey& key,
                           const LeakageConfig& cfg) {
    if (num_traces < 1)
        throw std::invalid_argument("campaign needs at least one trace");
    cfg.validate();

    TraceSet ts;
    ts.config = cfg;
    ts.key_known = key;
    ts.traces.reserve(num_traces);
    for (std::size_t d = 0; d < num_traces; ++d) {
        const std::uint64_t p = detail::mix64(detail::stream_seed(cfg.seed, d, 0));
        ts.traces.push_back(simulate_trace(p, key, cfg, d));
    }
    return ts;
}

}  // namespace mcpa
