// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcpa/cipher.hpp"

namespace mcpa {

/// Parameters of the simulated acquisition rig.
///
/// A trace has samples_per_trace points. Thirty-two of them are informative:
/// point-of-interest k sits at sample poi_offset + k * poi_stride, where
/// POIs 0..15 carry the first-round S-box outputs of cells 0..15 and POIs
/// 16..31 the second-round ones. Everything else is baseline plus noise.
///
/// `repeats` models on-scope averaging of repeated measurements: the noise
/// standard deviation seen in the stored trace is noise_sigma / sqrt(repeats).
struct LeakageConfig {
    double noise_sigma = 1.0;
    int samples_per_trace = 256;
    int poi_offset = 8;
    int poi_stride = 7;
    int repeats = 1;
    double baseline = 0.0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument if any invariant is violated:
    /// noise_sigma >= 0, repeats >= 1, positive sizes, and the full POI
    /// window poi_offset + 31 * poi_stride < samples_per_trace.
    void validate() const;
};

/// One simulated (or imported) acquisition: a known plaintext, the
/// ciphertext the device produced for it, and the power samples.
struct Trace {
    std::uint64_t plaintext = 0;
    std::uint64_t ciphertext = 0;
    std::vector<double> samples;
};

/// An attack campaign's worth of traces. `config` and `key_known` are
/// present for simulated sets and absent for imported ones.
struct TraceSet {
    std::vector<Trace> traces;
    std::optional<LeakageConfig> config;
    std::optional<MasterKey> key_known;

    std::size_t num_traces() const { return traces.size(); }
    std::size_t samples_per_trace() const {
        return traces.empty() ? 0 : traces.front().samples.size();
    }
};

/// Model power contribution of one S-box output: its Hamming weight.
double leak_value(Nibble v) noexcept;

/// Simulates one trace. Deterministic given (cfg.seed, trace_index); the
/// noise stream is independent of the plaintext stream so leakage is the
/// only plaintext-dependent part of a sample.
Trace simulate_trace(std::uint64_t plaintext, const MasterKey& key,
                     const LeakageConfig& cfg, std::uint64_t trace_index);

/// Simulates a campaign of `num_traces` traces with independently uniform
/// random plaintexts. Reproducible: equal (num_traces, key, cfg) gives a
/// bit-identical TraceSet, and per-trace generation is order-independent.
TraceSet simulate_campaign(std::size_t num_traces, const MasterKey& key,
                           const LeakageConfig& cfg);

namespace detail {
/// splitmix64 finalizer; bijective on 64-bit values.
std::uint64_t mix64(std::uint64_t x) noexcept;
/// Seed of the per-trace random substream `lane` (0 = plaintext, 1 = noise).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t trace_index,
                          std::uint64_t lane) noexcept;
}  // namespace detail

}  // namespace mcpa
