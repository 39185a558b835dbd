// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace mcpa {

/// A 4-bit value. Stored in the low nibble of a byte; the high nibble is
/// always zero for values produced by this module.
using Nibble = std::uint8_t;

/// The 4x4 cell matrix the cipher operates on, kept in column-major cell
/// order: cells 0..3 form column 0, cells 4..7 column 1, and so on.
///
/// A 64-bit block maps to a State by hex digits: writing the block as 16
/// hex digits (most significant first), cell i holds digit i.
struct State {
    std::array<Nibble, 16> cells{};

    static State from_block(std::uint64_t block) noexcept;
    std::uint64_t to_block() const noexcept;

    Nibble& operator[](std::size_t i) noexcept { return cells[i]; }
    Nibble operator[](std::size_t i) const noexcept { return cells[i]; }

    bool operator==(const State&) const = default;
};

State operator^(const State& a, const State& b) noexcept;

/// 128-bit master key, split into the two 64-bit halves the key schedule
/// alternates between.
struct MasterKey {
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;

    bool operator==(const MasterKey&) const = default;
};

/// Whitening key, round keys and the public round constants they embed.
///
/// Invariants: wk = k0 ^ k1 cell-wise, and round_keys[r] equals
/// (r even ? k0 : k1) XOR alphas[r] for r in 0..14.
struct KeySchedule {
    State wk;
    std::array<State, 15> round_keys;
    std::array<State, 15> alphas;
};

/// Names one S-box evaluation inside the first two rounds; the unit the
/// leakage simulator emits and the attack predicts.
struct ProbePoint {
    int round = 1;  // 1 or 2
    int cell = 0;   // 0..15
};

/// S-box outputs of every SubCell layer of one encryption, in execution
/// order: sub_out[0] is the first-round layer, sub_out[15] the final one.
struct RoundIntermediates {
    std::array<State, 16> sub_out;
};

/// The 4-bit S-box. Involutive: sbox(sbox(x)) == x.
Nibble sbox(Nibble x) noexcept;

/// Applies the S-box to every cell.
State sub_cells(const State& s) noexcept;

/// Cell permutation: input cell i moves to output position shuffle_map()[i].
State shuffle_cell(const State& s) noexcept;
State inv_shuffle_cell(const State& s) noexcept;

/// Destination table of shuffle_cell.
const std::array<int, 16>& shuffle_map() noexcept;

/// Column mixing: within each column (cells 4c..4c+3) every output cell is
/// the XOR of the other three input cells. Involutive.
State mix_column(const State& s) noexcept;

/// The fifteen public round constants, one bit per cell.
const std::array<State, 15>& round_constants() noexcept;

/// Expands a master key into whitening and round keys.
KeySchedule key_schedule(const MasterKey& key) noexcept;

/// Midori64 encryption: whiten, fifteen rounds of
/// SubCell/ShuffleCell/MixColumn/key add, a final SubCell, and the closing
/// whitening. When `intermediates` is non-null, every SubCell layer output
/// is recorded there.
std::uint64_t encrypt(std::uint64_t plaintext, const KeySchedule& ks,
                      RoundIntermediates* intermediates = nullptr) noexcept;
std::uint64_t encrypt(std::uint64_t plaintext, const MasterKey& key,
                      RoundIntermediates* intermediates = nullptr) noexcept;

/// Exact inverse of encrypt.
std::uint64_t decrypt(std::uint64_t ciphertext, const KeySchedule& ks) noexcept;
std::uint64_t decrypt(std::uint64_t ciphertext, const MasterKey& key) noexcept;

/// Value of the probed S-box output, computed directly from its defining
/// formula rather than by running the full cipher:
///   round 1: sbox(p_cell ^ wk_cell)
///   round 2: sbox(u_cell ^ rk0_cell),
///            u = mix_column(shuffle_cell(sub_cells(p ^ wk)))
/// Throws std::invalid_argument for a probe outside round {1,2} / cell 0..15.
Nibble intermediate(std::uint64_t plaintext, const MasterKey& key,
                    ProbePoint probe);

// Hex wire format: blocks are fixed-width 16 hex chars, keys 32, emitted
// uppercase. Parsers accept either case but require the exact width.
// Throw std::invalid_argument on malformed input.
std::uint64_t parse_block(std::string_view hex);
MasterKey parse_key(std::string_view hex);
std::string block_hex(std::uint64_t block);
std::string key_hex(const MasterKey& key);

}  // namespace mcpa
