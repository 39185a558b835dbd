// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "mcpa/leakage.hpp"

namespace mcpa {

/// Why an interchange file was rejected.
enum class IoErrorKind {
    kMissingFile,
    kBadHeader,    // header malformed, or declared counts disagree with rows
    kBadHex,       // plaintext/ciphertext/key field not fixed-width hex
    kRaggedRow,    // row sample count differs from the declared width
    kBadSample,    // sample field is not a finite decimal number
    kUnknownKey,   // config/manifest key not in the documented set
    kBadValue,     // config/manifest value unparsable or out of range
    kBadInvariant, // parsed values violate a LeakageConfig invariant
};

const char* to_string(IoErrorKind kind) noexcept;

class IoError : public std::runtime_error {
  public:
    IoError(IoErrorKind kind, const std::string& message, std::size_t line = 0);

    IoErrorKind kind() const noexcept { return kind_; }
    /// 1-based line number when the error is tied to one, else 0.
    std::size_t line() const noexcept { return line_; }

  private:
    IoErrorKind kind_;
    std::size_t line_;
};

/// Metadata block at the top of a trace file.
struct TraceFileHeader {
    std::string format_version;
    std::size_t num_traces = 0;
    std::size_t samples_per_trace = 0;
    std::string sampling_note;
    bool key_known_flag = false;
};

/// A simulation config plus the campaign size it requests.
struct SimSettings {
    LeakageConfig config;
    std::size_t num_traces = 300;
};

/// Companion file of a simulated campaign: where the traces live, how they
/// were produced, and (for simulations) the ground-truth key.
struct CampaignManifest {
    SimSettings settings;
    std::string trace_file;  // resolved to an absolute path on read
    std::optional<MasterKey> true_key;
};

// Trace file format "midori-cpa/1" (documented byte-exactly in README.md):
// '#'-prefixed key=value header lines (format, traces, samples, key_known,
// note), then one CSV row per trace:
//   <16 hex plaintext>,<16 hex ciphertext>,<sample 0>,...,<sample T-1>
// Samples are serialized in shortest round-trip decimal form, so
// write -> read reproduces every double bit-exactly and equal trace sets
// produce byte-identical files.

/// Writes `ts` to `path`. Throws IoError on I/O failure (message carries
/// the path) and std::invalid_argument on an empty set or non-finite
/// samples.
void write_traceset(const TraceSet& ts, const std::string& path);

/// Parses a trace file. Any malformed input raises an IoError of the
/// matching kind; errors tied to a row name its 1-based line number.
/// Imported sets come back with config and key_known absent; the file's
/// header block is copied to `header_out` when given.
TraceSet read_traceset(const std::string& path,
                       TraceFileHeader* header_out = nullptr);

/// Parses a flat key=value config file. Recognized keys (all optional, with
/// these defaults): noise_sigma=1.0, samples_per_trace=256, poi_offset=8,
/// poi_stride=7, repeats=1, baseline=0.0, seed=1, num_traces=300.
/// '#' lines and blank lines are ignored; later duplicates win; unknown
/// keys are an error.
SimSettings load_config(const std::string& path);

void write_manifest(const CampaignManifest& manifest, const std::string& path);

/// Parses a manifest; requires trace_file, accepts true_key plus every
/// config key. The referenced trace file is resolved relative to the
/// manifest's directory and must exist.
CampaignManifest read_manifest(const std::string& path);

}  // namespace mcpa
