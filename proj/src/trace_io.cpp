// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include "mcpa/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

namespace mcpa {

namespace {

constexpr std::string_view kFormatVersion = "midori-cpa/1";
constexpr std::string_view kDefaultNote = "midori64 power traces";

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

bool parse_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_u64(std::string_view text, std::uint64_t& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// "key=value" (or "key = value") -> pair; empty optional if no '='.
std::optional<std::pair<std::string_view, std::string_view>> split_kv(
    std::string_view line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    return std::pair{trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

std::uint64_t parse_hex_field(std::string_view text, const char* what,
                              std::size_t line_no) {
    try {
        return parse_block(text);
    } catch (const std::invalid_argument& e) {
        throw IoError(IoErrorKind::kBadHex,
                      std::string(what) + " on line " + std::to_string(line_no) +
                          ": " + e.what(),
                      line_no);
    }
}

// Applies one config key. Returns false if the key is not recognized.
bool apply_config_key(SimSettings& out, std::string_view key,
                      std::string_view value, std::size_t line_no) {
    auto bad = [&](const char* why) -> IoError {
        return IoError(IoErrorKind::kBadValue,
                       "line " + std::to_string(line_no) + ": " +
                           std::string(key) + ": " + why,
                       line_no);
    };
    auto as_double = [&]() {
        double v;
        if (!parse_double(value, v) || !std::isfinite(v))
            throw bad("expected a finite number");
        return v;
    };
    auto as_count = [&](long long min) {
        std::uint64_t v;
        if (!parse_u64(value, v) ||
            v > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) ||
            static_cast<long long>(v) < min)
            throw bad("expected an integer in range");
        return static_cast<int>(v);
    };

    if (key == "noise_sigma") {
        const double v = as_double();
        if (v < 0) throw bad("must be >= 0");
        out.config.noise_sigma = v;
    } else if (key == "samples_per_trace") {
        out.config.samples_per_trace = as_count(1);
    } else if (key == "poi_offset") {
        out.config.poi_offset = as_count(0);
    } else if (key == "poi_stride") {
        out.config.poi_stride = as_count(1);
    } else if (key == "repeats") {
        out.config.repeats = as_count(1);
    } else if (key == "baseline") {
        out.config.baseline = as_double();
    } else if (key == "seed") {
        std::uint64_t v;
        if (!parse_u64(value, v)) throw bad("expected an unsigned integer");
        out.config.seed = v;
    } else if (key == "num_traces") {
        out.num_traces = static_cast<std::size_t>(as_count(1));
    } else {
        return false;
    }
    return true;
}

void write_config_keys(std::ostream& os, const SimSettings& s) {
    os << "noise_sigma=" << format_double(s.config.noise_sigma) << '\n'
       << "samples_per_trace=" << s.config.samples_per_trace << '\n'
       << "poi_offset=" << s.config.poi_offset << '\n'
       << "poi_stride=" << s.config.poi_stride << '\n'
       << "repeats=" << s.config.repeats << '\n'
       << "baseline=" << format_double(s.config.baseline) << '\n'
       << "seed=" << s.config.seed << '\n'
       << "num_traces=" << s.num_traces << '\n';
}

void check_config_invariants(const LeakageConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(IoErrorKind::kBadInvariant, e.what());
    }
}

}  // namespace

const char* to_string(IoErrorKind kind) noexcept {
    switch (kind) {
        case IoErrorKind::kMissingFile: return "missing file";
        case IoErrorKind::kBadHeader: return "bad header";
        case IoErrorKind::kBadHex: return "bad hex";
        case IoErrorKind::kRaggedRow: return "ragged row";
        case IoErrorKind::kBadSample: return "bad sample";
        case IoErrorKind::kUnknownKey: return "unknown key";
        case IoErrorKind::kBadValue: return "bad value";
        case IoErrorKind::kBadInvariant: return "invariant violation";
    }
    return "unknown";
}

IoError::IoError(IoErrorKind kind, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      line_(line) {}

void write_traceset(const TraceSet& ts, const std::string& path) {
    if (ts.traces.empty())
        throw std::invalid_argument("refusing to write an empty trace set");
    const std::size_t width = ts.samples_per_trace();
    for (const Trace& tr : ts.traces) {
        if (tr.samples.size() != width)
            throw std::invalid_argument("trace set has ragged sample rows");
        for (double s : tr.samples)
            if (!std::isfinite(s))
                throw std::invalid_argument("trace set contains a non-finite sample");
    }

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "cannot open for writing: " + path);

    os << "# format=" << kFormatVersion << '\n'
       << "# traces=" << ts.traces.size() << '\n'
       << "# samples=" << width << '\n'
       << "# key_known=" << (ts.key_known ? 1 : 0) << '\n'
       << "# note=" << kDefaultNote << '\n';
    std::string line;
    for (const Trace& tr : ts.traces) {
        line.clear();
        line += block_hex(tr.plaintext);
        line += ',';
        line += block_hex(tr.ciphertext);
        for (double s : tr.samples) {
            line += ',';
            line += format_double(s);
        }
        line += '\n';
        os << line;
    }
    os.flush();
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "write failed: " + path);
}

TraceSet read_traceset(const std::string& path, TraceFileHeader* header_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoErrorKind::kMissingFile, path);

    TraceFileHeader header;
    bool saw_format = false, saw_traces = false, saw_samples = false;

    TraceSet ts;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '#') {
            if (!ts.traces.empty())
                throw IoError(IoErrorKind::kBadHeader,
                              "header line after data rows (line " +
                                  std::to_string(line_no) + ")",
                              line_no);
            const auto kv = split_kv(trim(line.substr(1)));
            if (!kv)
                throw IoError(IoErrorKind::kBadHeader,
                              "malformed header line " + std::to_string(line_no),
                              line_no);
            const auto [key, value] = *kv;
            if (key == "format") {
                header.format_version = std::string(value);
                saw_format = true;
                if (value != kFormatVersion)
                    throw IoError(IoErrorKind::kBadHeader,
                                  "unsupported format '" + std::string(value) + "'",
                                  line_no);
            } else if (key == "traces") {
                std::uint64_t v;
                if (!parse_u64(value, v) || v == 0)
                    throw IoError(IoErrorKind::kBadHeader,
                                  "traces must be a positive integer", line_no);
                header.num_traces = static_cast<std::size_t>(v);
                saw_traces = true;
            } else if (key == "samples") {
                std::uint64_t v;
                if (!parse_u64(value, v) || v == 0)
                    throw IoError(IoErrorKind::kBadHeader,
                                  "samples must be a positive integer", line_no);
                header.samples_per_trace = static_cast<std::size_t>(v);
                saw_samples = true;
            } else if (key == "key_known") {
                if (value != "0" && value != "1")
                    throw IoError(IoErrorKind::kBadHeader,
                                  "key_known must be 0 or 1", line_no);
                header.key_known_flag = value == "1";
            } else if (key == "note") {
                header.sampling_note = std::string(value);
            } else {
                throw IoError(IoErrorKind::kBadHeader,
                              "unknown header key '" + std::string(key) + "'",
                              line_no);
            }
            continue;
        }

        if (!(saw_format && saw_traces && saw_samples))
            throw IoError(IoErrorKind::kBadHeader,
                          "data row before a complete header (line " +
                              std::to_string(line_no) + ")",
                          line_no);

        Trace tr;
        std::size_t field = 0;
        std::size_t start = 0;
        const std::string_view row = line;
        tr.samples.reserve(header.samples_per_trace);
        while (true) {
            const std::size_t comma = row.find(',', start);
            const std::string_view tok =
                row.substr(start, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - start);
            if (field == 0) {
                tr.plaintext = parse_hex_field(tok, "plaintext", line_no);
            } else if (field == 1) {
                tr.ciphertext = parse_hex_field(tok, "ciphertext", line_no);
            } else {
                double v;
                if (!parse_double(tok, v) || !std::isfinite(v))
                    throw IoError(IoErrorKind::kBadSample,
                                  "non-numeric sample on line " +
                                      std::to_string(line_no),
                                  line_no);
                tr.samples.push_back(v);
            }
            ++field;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (tr.samples.size() != header.samples_per_trace)
            throw IoError(IoErrorKind::kRaggedRow,
                          "line " + std::to_string(line_no) + " has " +
                              std::to_string(tr.samples.size()) +
                              " samples, expected " +
                              std::to_string(header.samples_per_trace),
                          line_no);
        ts.traces.push_back(std::move(tr));
    }

    if (!(saw_format && saw_traces && saw_samples))
        throw IoError(IoErrorKind::kBadHeader, "missing header in " + path);
    if (ts.traces.size() != header.num_traces)
        throw IoError(IoErrorKind::kBadHeader,
                      "header declares " + std::to_string(header.num_traces) +
                          " traces but file has " +
                          std::to_string(ts.traces.size()));
    if (header_out) *header_out = header;
    return ts;
}

SimSettings load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoErrorKind::kMissingFile, path);

    SimSettings settings;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto kv = split_kv(line);
        if (!kv)
            throw IoError(IoErrorKind::kBadValue,
                          "line " + std::to_string(line_no) +
                              ": expected key=value",
                          line_no);
        const auto [key, value] = *kv;
        if (!apply_config_key(settings, key, value, line_no))
            throw IoError(IoErrorKind::kUnknownKey,
                          "line " + std::to_string(line_no) + ": '" +
                              std::string(key) + "'",
                          line_no);
    }
    check_config_invariants(settings.config);
    return settings;
}

void write_manifest(const CampaignManifest& manifest, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "cannot open for writing: " + path);
    os << "# midori-cpa manifest\n";
    os << "trace_file=" << manifest.trace_file << '\n';
    if (manifest.true_key) os << "true_key=" << key_hex(*manifest.true_key) << '\n';
    write_config_keys(os, manifest.settings);
    os.flush();
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "write failed: " + path);
}

CampaignManifest read_manifest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoErrorKind::kMissingFile, path);

    CampaignManifest manifest;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto kv = split_kv(line);
        if (!kv)
            throw IoError(IoErrorKind::kBadValue,
                          "line " + std::to_string(line_no) +
                              ": expected key=value",
                          line_no);
        const auto [key, value] = *kv;
        if (key == "trace_file") {
            manifest.trace_file = std::string(value);
        } else if (key == "true_key") {
            try {
                manifest.true_key = parse_key(value);
            } catch (const std::invalid_argument& e) {
                throw IoError(IoErrorKind::kBadHex,
                              "true_key on line " + std::to_string(line_no) +
                                  ": " + e.what(),
                              line_no);
            }
        } else if (!apply_config_key(manifest.settings, key, value, line_no)) {
            throw IoError(IoErrorKind::kUnknownKey,
                          "line " + std::to_string(line_no) + ": '" +
                              std::string(key) + "'",
                          line_no);
        }
    }
    if (manifest.trace_file.empty())
        throw IoError(IoErrorKind::kBadHeader, "manifest lacks trace_file");
    check_config_invariants(manifest.settings.config);

    namespace fs = std::filesystem;
    fs::path trace_path(manifest.trace_file);
    if (trace_path.is_relative())
        trace_path = fs::path(path).parent_path() / trace_path;
    if (!fs::exists(trace_path))
        throw IoError(IoErrorKind::kMissingFile,
                      "manifest references missing trace file " +
                          trace_path.string());
    manifest.trace_file = trace_path.string();
    return manifest;
}

}  // namespace mcpa
