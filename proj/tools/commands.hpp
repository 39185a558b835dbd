// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mcpa::cli {

// Command implementations behind the argument parser. Each prints its
// report to `out`, throws on runtime failure, and returns the process exit
// code on success. Flag validation (widths, ranges) happens in the parser.

int cmd_encrypt(const std::string& key_hex, const std::string& pt_hex,
                std::ostream& out);
int cmd_decrypt(const std::string& key_hex, const std::string& ct_hex,
                std::ostream& out);
int cmd_keysched(const std::string& key_hex, std::ostream& out);

struct SimulateArgs {
    std::string config_path;
    std::string key_hex;
    std::string out_path;
    std::string manifest_path;  // empty -> out_path + ".manifest"
};
int cmd_simulate(const SimulateArgs& args, std::ostream& out);

struct AttackArgs {
    std::string traces_path;
    std::string manifest_path;  // empty -> try traces_path + ".manifest"
    std::string alpha0_hex;     // empty -> built-in round constant 0
    std::string corr_csv_dir;   // empty -> no per-cell correlation export
};
int cmd_attack(const AttackArgs& args, std::ostream& out);

struct SweepArgs {
    std::string config_path;
    std::string key_hex;
    std::vector<std::size_t> d_grid;
    int trials = 1;
    std::string out_path;
};
int cmd_sweep(const SweepArgs& args, std::ostream& out);

struct ExportCorrArgs {
    std::string traces_path;
    int cell = 0;
    int round = 1;
    std::string out_path;
};
int cmd_export_corr(const ExportCorrArgs& args, std::ostream& out);

}  // namespace mcpa::cli
