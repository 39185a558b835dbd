// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mcpa/cipher.hpp"
#include "mcpa/cpa.hpp"
#include "mcpa/leakage.hpp"
#include "mcpa/trace_io.hpp"

namespace fs = std::filesystem;

namespace mcpa::cli {

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::uint64_t sweep_seed(std::uint64_t base, std::size_t d, int trial) {
    return detail::mix64(detail::mix64(base ^ detail::mix64(d)) ^
                         static_cast<std::uint64_t>(trial + 1));
}

void print_cell_table(const std::vector<CellResult>& cells, std::ostream& out) {
    out << "round cell nibble  peak_abs_corr  peak_sample  flags\n";
    for (const CellResult& cr : cells) {
        char line[96];
        std::snprintf(line, sizeof(line), "%5d %4d %3u (%X)       %.6f %12zu  %s\n",
                      cr.round, cr.cell, static_cast<unsigned>(cr.recovered_nibble),
                      static_cast<unsigned>(cr.recovered_nibble),
                      cr.peak_abs_correlation, cr.peak_sample,
                      cr.low_confidence ? "low-confidence" : "-");
        out << line;
    }
}

TraceSet load_traces_for_attack(const std::string& path) {
    TraceSet ts = read_traceset(path);
    if (ts.traces.size() < 2)
        throw std::runtime_error(
            "trace file holds " + std::to_string(ts.traces.size()) +
            " trace(s); the attack's correlation statistic needs D >= 2");
    return ts;
}

std::optional<CampaignManifest> find_manifest(const AttackArgs& args) {
    if (!args.manifest_path.empty())
        return read_manifest(args.manifest_path);  // explicit: errors propagate
    const std::string sidecar = args.traces_path + ".manifest";
    if (!fs::exists(sidecar)) return std::nullopt;
    try {
        return read_manifest(sidecar);
    } catch (const IoError& e) {
        std::cerr << "note: ignoring unreadable sidecar manifest " << sidecar
                  << " (" << e.what() << ")\n";
        return std::nullopt;
    }
}

void write_corr_csv(const CorrelationMatrix& corr, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "cannot open for writing: " + path);
    const CellResult res = recover_cell(corr);
    os << "guess,peak_abs_correlation\n";
    for (int i = 0; i < 16; ++i)
        os << i << ',' << fixed6(res.guess_scores[i]) << '\n';
    os.flush();
    if (!os) throw IoError(IoErrorKind::kMissingFile, "write failed: " + path);
}

}  // namespace

int cmd_encrypt(const std::string& key_hex, const std::string& pt_hex,
                std::ostream& out) {
    out << block_hex(encrypt(parse_block(pt_hex), parse_key(key_hex))) << '\n';
    return 0;
}

int cmd_decrypt(const std::string& key_hex, const std::string& ct_hex,
                std::ostream& out) {
    out << block_hex(decrypt(parse_block(ct_hex), parse_key(key_hex))) << '\n';
    return 0;
}

int cmd_keysched(const std::string& key_hex, std::ostream& out) {
    const KeySchedule ks = key_schedule(parse_key(key_hex));
    out << "WK   " << block_hex(ks.wk.to_block()) << '\n';
    for (int r = 0; r < 15; ++r) {
        char line[64];
        std::snprintf(line, sizeof(line), "RK%02d %s  alpha%02d %s\n", r,
                      block_hex(ks.round_keys[r].to_block()).c_str(), r,
                      block_hex(ks.alphas[r].to_block()).c_str());
        out << line;
    }
    return 0;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const SimSettings settings = load_config(args.config_path);
    const MasterKey key = parse_key(args.key_hex);

    const TraceSet ts = simulate_campaign(settings.num_traces, key, settings.config);
    write_traceset(ts, args.out_path);

    const std::string manifest_path =
        args.manifest_path.empty() ? args.out_path + ".manifest"
                                   : args.manifest_path;
    CampaignManifest manifest;
    manifest.settings = settings;
    manifest.true_key = key;
    // Keep the manifest relocatable when it sits next to the trace file.
    const fs::path trace_abs = fs::absolute(args.out_path);
    const fs::path manifest_abs = fs::absolute(manifest_path);
    manifest.trace_file = trace_abs.parent_path() == manifest_abs.parent_path()
                              ? trace_abs.filename().string()
                              : trace_abs.string();
    write_manifest(manifest, manifest_path);

    out << "wrote " << ts.traces.size() << " traces ("
        << ts.samples_per_trace() << " samples each) to " << args.out_path
        << '\n';
    out << "manifest: " << manifest_path << '\n';
    return 0;
}

int cmd_attack(const AttackArgs& args, std::ostream& out) {
    const TraceSet ts = load_traces_for_attack(args.traces_path);
    const std::optional<CampaignManifest> manifest = find_manifest(args);

    const State alpha0 = args.alpha0_hex.empty()
                             ? round_constants()[0]
                             : State::from_block(parse_block(args.alpha0_hex));

    const AttackResult res = attack_full(ts, alpha0);

    out << "traces: " << args.traces_path << " (D=" << ts.traces.size()
        << ", T=" << ts.samples_per_trace() << ")\n";
    out << "alpha0: " << block_hex(alpha0.to_block()) << '\n';
    print_cell_table(res.per_cell, out);
    out << "wk  = " << block_hex(res.wk.to_block()) << '\n';
    out << "rk0 = " << block_hex(res.rk0.to_block()) << '\n';
    out << "k0  = " << block_hex(res.k0) << '\n';
    out << "k1  = " << block_hex(res.k1) << '\n';
    out << "key = " << key_hex(MasterKey{res.k0, res.k1}) << '\n';
    out << "ciphertext check: "
        << (res.ciphertext_verified ? "PASSED" : "FAILED") << '\n';

    if (manifest && manifest->true_key) {
        const bool hit = res.k0 == manifest->true_key->k0 &&
                         res.k1 == manifest->true_key->k1;
        out << "verdict: " << (hit ? "SUCCESS" : "FAILURE")
            << " (recovered key " << (hit ? "matches" : "differs from")
            << " the manifest's true key)\n";
    }

    if (!args.corr_csv_dir.empty()) {
        fs::create_directories(args.corr_csv_dir);
        for (int round = 1; round <= 2; ++round)
            for (int cell = 0; cell < 16; ++cell) {
                const HypothesisMatrix h =
                    round == 1 ? build_hypotheses_round1(ts, cell)
                               : build_hypotheses_round2(ts, res.wk, cell);
                char name[48];
                std::snprintf(name, sizeof(name), "corr_r%d_cell%02d.csv",
                              round, cell);
                write_corr_csv(pearson(h, ts),
                               (fs::path(args.corr_csv_dir) / name).string());
            }
        out << "correlation tables: " << args.corr_csv_dir << '\n';
    }
    return 0;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
    const SimSettings settings = load_config(args.config_path);
    const MasterKey key = parse_key(args.key_hex);
    const State alpha0 = round_constants()[0];

    std::ofstream os(args.out_path, std::ios::binary);
    if (!os)
        throw IoError(IoErrorKind::kMissingFile,
                      "cannot open for writing: " + args.out_path);
    os << "D,success_rate,mean_rank\n";

    for (std::size_t d : args.d_grid) {
        std::vector<AttackResult> runs;
        runs.reserve(static_cast<std::size_t>(args.trials));
        for (int trial = 0; trial < args.trials; ++trial) {
            LeakageConfig cfg = settings.config;
            cfg.seed = sweep_seed(settings.config.seed, d, trial);
            runs.push_back(attack_full(simulate_campaign(d, key, cfg), alpha0));
        }
        const SuccessReport rep = success_metrics(runs, key);
        os << d << ',' << fixed6(rep.full_key_success_rate) << ','
           << fixed6(rep.mean_rank) << '\n';
        out << "D=" << d << ": success_rate=" << fixed6(rep.full_key_success_rate)
            << " mean_rank=" << fixed6(rep.mean_rank) << '\n';
    }
    os.flush();
    if (!os)
        throw IoError(IoErrorKind::kMissingFile, "write failed: " + args.out_path);
    out << "sweep written to " << args.out_path << '\n';
    return 0;
}

int cmd_export_corr(const ExportCorrArgs& args, std::ostream& out) {
    const TraceSet ts = load_traces_for_attack(args.traces_path);

    HypothesisMatrix h;
    if (args.round == 1) {
        h = build_hypotheses_round1(ts, args.cell);
    } else {
        // The second-round model needs the whitening key; recover it from
        // the same traces first.
        const Round1Result stage1 = attack_round1(ts);
        h = build_hypotheses_round2(ts, stage1.wk, args.cell);
    }
    const CorrelationMatrix corr = pearson(h, ts);
    write_corr_csv(corr, args.out_path);

    const CellResult res = recover_cell(corr);
    out << "round " << args.round << " cell " << args.cell
        << ": best guess " << static_cast<unsigned>(res.recovered_nibble)
        << " (0x" << "0123456789ABCDEF"[res.recovered_nibble & 0xF]
        << "), peak |r| " << fixed6(res.peak_abs_correlation) << '\n';
    out << "table written to " << args.out_path << '\n';
    return 0;
}

}  // namespace mcpa::cli
