// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mcpa/cipher.hpp"
#include "mcpa/leakage.hpp"

namespace mcpa {

/// Predicted leakage per trace and key guess: entry (d, i) is the Hamming
/// weight of the probed S-box output of trace d if the target nibble were i.
/// Always 16 columns, one per nibble guess.
struct HypothesisMatrix {
    std::vector<double> values;  // row-major, num_traces() x 16
    int target_cell = 0;
    int target_round = 1;

    std::size_t rows() const { return values.size() / 16; }
    double at(std::size_t d, int guess) const {
        return values[d * 16 + static_cast<std::size_t>(guess)];
    }
};

/// Sample Pearson correlation of every guess column against every trace
/// sample column: entry (i, j) in [-1, 1], with 0 substituted where either
/// column is constant (see pearson()).
struct CorrelationMatrix {
    std::vector<double> values;  // row-major, 16 x num_samples
    std::size_t num_samples = 0;
    int target_cell = 0;
    int target_round = 1;
    bool zero_variance_hypothesis = false;  // some guess column was constant
    bool zero_variance_samples = false;     // some sample column was constant

    double r(int guess, std::size_t sample) const {
        return values[static_cast<std::size_t>(guess) * num_samples + sample];
    }
};

/// Outcome of attacking one key nibble.
///
/// ranking orders all 16 guesses by descending score (score = peak |r|
/// over all samples), ties broken towards the smaller guess value.
/// low_confidence is set when the winner is not strictly separated: its
/// score is zero or the runner-up matches it within 1e-12 (a ghost peak).
struct CellResult {
    int cell = 0;
    int round = 1;
    Nibble recovered_nibble = 0;
    double peak_abs_correlation = 0.0;
    std::size_t peak_sample = 0;
    std::array<Nibble, 16> ranking{};
    std::array<double, 16> guess_scores{};
    bool low_confidence = false;
};

/// First attack stage: the whitening key and its 16 per-cell results.
struct Round1Result {
    std::array<CellResult, 16> cells;
    State wk;
    std::size_t hypotheses_enumerated = 0;  // (cell, guess) pairs built
};

/// Full two-stage recovery. per_cell holds the 16 round-1 results followed
/// by the 16 round-2 results. ciphertext_verified records whether the
/// reconstructed key re-encrypts the first trace's plaintext to its stored
/// ciphertext; a failed check is reported here, never thrown.
struct AttackResult {
    State wk;
    State rk0;
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;
    std::vector<CellResult> per_cell;
    bool ciphertext_verified = false;
    std::size_t hypotheses_stage1 = 0;
    std::size_t hypotheses_stage2 = 0;
};

/// Aggregate quality of repeated attacks against a known key. Cell indices
/// 0..15 are the round-1 (whitening key) nibbles, 16..31 the round-2 ones.
struct SuccessReport {
    std::size_t num_experiments = 0;
    double full_key_success_rate = 0.0;
    std::array<double, 32> cell_success_rate{};
    std::array<double, 32> cell_mean_rank{};  // 1 = correct guess ranked first
    double mean_rank = 0.0;
};

/// Whether the per-cell work of an attack stage may be spread over threads.
/// Cells are computed independently either way, so results are identical.
enum class Parallelism { kAuto, kSerial };

/// h(d, i) = HW(sbox(p_cell ^ i)). Throws on an empty trace set or a cell
/// outside 0..15.
HypothesisMatrix build_hypotheses_round1(const TraceSet& ts, int cell);

/// Second-stage hypotheses given a recovered (or known) whitening key:
/// per trace, u = mix_column(shuffle_cell(sub_cells(p ^ wk))), and
/// h(d, i) = HW(sbox(u_cell ^ i)). The guess i targets round key 0.
HypothesisMatrix build_hypotheses_round2(const TraceSet& ts, const State& wk,
                                         int cell);

/// Sample Pearson correlation, computed in two passes (means first, then
/// centered products) for stability:
///
///   r(i,j) = sum_d (h(d,i) - hbar_i) (t(d,j) - tbar_j)
///            / sqrt( sum_d (h(d,i) - hbar_i)^2 * sum_d (t(d,j) - tbar_j)^2 )
///
/// A column counts as constant when its centered sum of squares is at most
/// (1e-12 * D * (1 + |mean|))^2; every entry involving such a column is 0
/// and the corresponding flag is set on the result. Outputs are clamped to
/// [-1, 1]. Requires D >= 2 and matching trace counts.
CorrelationMatrix pearson(const HypothesisMatrix& h, const TraceSet& ts);

/// Picks the key guess with the largest peak |r| over all samples.
CellResult recover_cell(const CorrelationMatrix& corr);

/// Attacks all 16 first-round S-boxes and assembles the whitening key.
/// Enumerates exactly 16 cells x 16 guesses = 256 hypothesis columns.
Round1Result attack_round1(const TraceSet& ts,
                           Parallelism par = Parallelism::kAuto);

/// Two-stage master-key recovery: round 1 yields wk, round 2 yields rk0,
/// then k0 = rk0 ^ alpha0 and k1 = wk ^ k0.
AttackResult attack_full(const TraceSet& ts, const State& alpha0,
                         Parallelism par = Parallelism::kAuto);

/// Success rate and mean correct-guess rank over repeated experiments
/// against the known true key. Throws on an empty experiment list.
SuccessReport success_metrics(const std::vector<AttackResult>& experiments,
                              const MasterKey& true_key);

}  // namespace mcpa
