// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"

namespace {

// Exit codes: 0 command completed, 2 usage error, 1 runtime/I-O error.
constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

CLI::Validator hex_width(std::size_t width) {
    return CLI::Validator(
        [width](std::string& s) -> std::string {
            if (s.size() != width)
                return "expected exactly " + std::to_string(width) +
                       " hex chars, got " + std::to_string(s.size());
            for (char c : s)
                if (!std::isxdigit(static_cast<unsigned char>(c)))
                    return std::string("invalid hex char '") + c + "'";
            return {};
        },
        "HEX" + std::to_string(width));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Midori64 encryption, leakage simulation and correlation "
                 "power analysis"};
    app.require_subcommand(1);

    std::string key_hex, pt_hex, ct_hex;

    auto* enc = app.add_subcommand("encrypt", "Encrypt one 64-bit block");
    enc->add_option("--key", key_hex, "128-bit key, 32 hex chars")
        ->required()
        ->check(hex_width(32));
    enc->add_option("--pt", pt_hex, "64-bit plaintext, 16 hex chars")
        ->required()
        ->check(hex_width(16));

    auto* dec = app.add_subcommand("decrypt", "Decrypt one 64-bit block");
    dec->add_option("--key", key_hex, "128-bit key, 32 hex chars")
        ->required()
        ->check(hex_width(32));
    dec->add_option("--ct", ct_hex, "64-bit ciphertext, 16 hex chars")
        ->required()
        ->check(hex_width(16));

    auto* ksc = app.add_subcommand("keysched",
                                   "Print whitening and round keys");
    ksc->add_option("--key", key_hex, "128-bit key, 32 hex chars")
        ->required()
        ->check(hex_width(32));

    mcpa::cli::SimulateArgs sim;
    auto* simc = app.add_subcommand(
        "simulate", "Generate a simulated power-trace campaign");
    simc->add_option("--config", sim.config_path, "Simulation config file")
        ->required();
    simc->add_option("--key", sim.key_hex, "128-bit key, 32 hex chars")
        ->required()
        ->check(hex_width(32));
    simc->add_option("--out", sim.out_path, "Trace file to write")->required();
    simc->add_option("--manifest", sim.manifest_path,
                     "Manifest path (default: <out>.manifest)");

    mcpa::cli::AttackArgs atk;
    auto* atkc = app.add_subcommand(
        "attack", "Recover the master key from a trace file");
    atkc->add_option("--traces", atk.traces_path, "Trace file")->required();
    atkc->add_option("--manifest", atk.manifest_path,
                     "Manifest with the true key (default: sidecar file)");
    atkc->add_option("--alpha0", atk.alpha0_hex,
                     "Round constant 0 as 16 hex chars (default: built-in)")
        ->check(hex_width(16));
    atkc->add_option("--corr-dir", atk.corr_csv_dir,
                     "Directory for per-cell correlation CSV tables");

    mcpa::cli::SweepArgs swp;
    auto* swpc = app.add_subcommand(
        "sweep", "Success rate vs. trace count over repeated campaigns");
    swpc->add_option("--config", swp.config_path, "Simulation config file")
        ->required();
    swpc->add_option("--key", swp.key_hex, "128-bit key, 32 hex chars")
        ->required()
        ->check(hex_width(32));
    swpc->add_option("--d-grid", swp.d_grid, "Trace counts, e.g. 50,100,300")
        ->required()
        ->delimiter(',')
        ->check(CLI::Range(static_cast<std::size_t>(2),
                           std::numeric_limits<std::size_t>::max()));
    swpc->add_option("--trials", swp.trials, "Campaigns per grid point")
        ->required()
        ->check(CLI::Range(1, 1000000));
    swpc->add_option("--out", swp.out_path, "CSV file to write")->required();

    mcpa::cli::ExportCorrArgs exp;
    auto* expc = app.add_subcommand(
        "export-corr", "Per-guess peak correlation table for one cell");
    expc->add_option("--traces", exp.traces_path, "Trace file")->required();
    expc->add_option("--cell", exp.cell, "Target cell 0..15")
        ->required()
        ->check(CLI::Range(0, 15));
    expc->add_option("--round", exp.round, "Attacked round, 1 or 2")
        ->required()
        ->check(CLI::Range(1, 2));
    expc->add_option("--out", exp.out_path, "CSV file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*enc) return mcpa::cli::cmd_encrypt(key_hex, pt_hex, std::cout);
        if (*dec) return mcpa::cli::cmd_decrypt(key_hex, ct_hex, std::cout);
        if (*ksc) return mcpa::cli::cmd_keysched(key_hex, std::cout);
        if (*simc) return mcpa::cli::cmd_simulate(sim, std::cout);
        if (*atkc) return mcpa::cli::cmd_attack(atk, std::cout);
        if (*swpc) return mcpa::cli::cmd_sweep(swp, std::cout);
        if (*expc) return mcpa::cli::cmd_export_corr(exp, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kRuntimeError;
}
