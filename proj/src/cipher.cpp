// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include "mcpa/cipher.hpp"

#include <stdexcept>

namespace mcpa {

namespace {

constexpr std::array<Nibble, 16> kSbox = {0xC, 0xA, 0xD, 0x3, 0xE, 0xB, 0xF, 0x7,
                                          0x8, 0x9, 0x1, 0x5, 0x0, 0x2, 0x4, 0x6};

// Destination map: cell i of the input lands at position kShuffle[i].
constexpr std::array<int, 16> kShuffle = {0, 7, 14, 9, 5,  2, 11, 12,
                                          15, 8, 1, 6, 10, 13, 4,  3};

constexpr std::array<int, 16> invert_perm(const std::array<int, 16>& p) {
    std::array<int, 16> inv{};
    for (int i = 0; i < 16; ++i) inv[p[i]] = i;
    return inv;
}

constexpr std::array<int, 16> kInvShuffle = invert_perm(kShuffle);

// Round constants, one bit per cell. Verified against the published
// Midori64 test vectors (see tests).
constexpr std::uint8_t kAlphaBits[15][16] = {
    {0, 0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 0, 1, 1},
    {0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0},
    {1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 1, 0, 1},
    {0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 1},
    {0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1},
    {1, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0},
    {0, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0},
    {1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1},
    {0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0},
    {0, 1, 1, 1, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1},
    {0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0},
    {0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0, 0},
    {1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0},
    {1, 1, 0, 1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0, 0},
};

std::array<State, 15> build_round_constants() {
    std::array<State, 15> a{};
    for (int r = 0; r < 15; ++r)
        for (int j = 0; j < 16; ++j) a[r].cells[j] = kAlphaBits[r][j];
    return a;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::uint64_t parse_hex64(std::string_view hex, const char* what) {
    if (hex.size() != 16)
        throw std::invalid_argument(std::string(what) +
                                    ": expected 16 hex chars, got " +
                                    std::to_string(hex.size()));
    std::uint64_t v = 0;
    for (char c : hex) {
        int d = hex_digit(c);
        if (d < 0)
            throw std::invalid_argument(std::string(what) +
                                        ": invalid hex char '" + c + "'");
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

char hex_char(int v) { return "0123456789ABCDEF"[v & 0xF]; }

}  // namespace

State State::from_block(std::uint64_t block) noexcept {
    State s;
    for (int i = 0; i < 16; ++i)
        s.cells[i] = static_cast<Nibble>((block >> (60 - 4 * i)) & 0xF);
    return s;
}

std::uint64_t State::to_block() const noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 16; ++i)
        v |= static_cast<std::uint64_t>(cells[i] & 0xF) << (60 - 4 * i);
    return v;
}

State operator^(const State& a, const State& b) noexcept {
    State r;
    for (int i = 0; i < 16; ++i) r.cells[i] = (a.cells[i] ^ b.cells[i]) & 0xF;
    return r;
}

Nibble sbox(Nibble x) noexcept { return kSbox[x & 0xF]; }

State sub_cells(const State& s) noexcept {
    State r;
    for (int i = 0; i < 16; ++i) r.cells[i] = kSbox[s.cells[i] & 0xF];
    return r;
}

State shuffle_cell(const State& s) noexcept {
    State r;
    for (int i = 0; i < 16; ++i) r.cells[kShuffle[i]] = s.cells[i];
    return r;
}

State inv_shuffle_cell(const State& s) noexcept {
    State r;
    for (int i = 0; i < 16; ++i) r.cells[kInvShuffle[i]] = s.cells[i];
    return r;
}

const std::array<int, 16>& shuffle_map() noexcept { return kShuffle; }

State mix_column(const State& s) noexcept {
    State r;
    for (int b = 0; b < 16; b += 4) {
        Nibble c0 = s.cells[b], c1 = s.cells[b + 1];
        Nibble c2 = s.cells[b + 2], c3 = s.cells[b + 3];
        r.cells[b] = c1 ^ c2 ^ c3;
        r.cells[b + 1] = c0 ^ c2 ^ c3;
        r.cells[b + 2] = c0 ^ c1 ^ c3;
        r.cells[b + 3] = c0 ^ c1 ^ c2;
    }
    return r;
}

const std::array<State, 15>& round_constants() noexcept {
    static const std::array<State, 15> alphas = build_round_constants();
    return alphas;
}

KeySchedule key_schedule(const MasterKey& key) noexcept {
    KeySchedule ks;
    const State k0 = State::from_block(key.k0);
    const State k1 = State::from_block(key.k1);
    ks.alphas = round_constants();
    ks.wk = k0 ^ k1;
    for (int r = 0; r < 15; ++r)
        ks.round_keys[r] = ((r % 2 == 0) ? k0 : k1) ^ ks.alphas[r];
    return ks;
}

std::uint64_t encrypt(std::uint64_t plaintext, const KeySchedule& ks,
                      RoundIntermediates* intermediates) noexcept {
    State s = State::from_block(plaintext) ^ ks.wk;
    for (int r = 0; r < 15; ++r) {
        s = sub_cells(s);
        if (intermediates) intermediates->sub_out[r] = s;
        s = shuffle_cell(s);
        s = mix_column(s);
        s = s ^ ks.round_keys[r];
    }
    s = sub_cells(s);
    if (intermediates) intermediates->sub_out[15] = s;
    s = s ^ ks.wk;
    return s.to_block();
}

std::uint64_t encrypt(std::uint64_t plaintext, const MasterKey& key,
                      RoundIntermediates* intermediates) noexcept {
    return encrypt(plaintext, key_schedule(key), intermediates);
}

std::uint64_t decrypt(std::uint64_t ciphertext, const KeySchedule& ks) noexcept {
    State s = State::from_block(ciphertext) ^ ks.wk;
    s = sub_cells(s);
    for (int r = 14; r >= 0; --r) {
        s = s ^ ks.round_keys[r];
        s = mix_column(s);
        s = inv_shuffle_cell(s);
        s = sub_cells(s);
    }
    s = s ^ ks.wk;
    return s.to_block();
}

std::uint64_t decrypt(std::uint64_t ciphertext, const MasterKey& key) noexcept {
    return decrypt(ciphertext, key_schedule(key));
}

Nibble intermediate(std::uint64_t plaintext, const MasterKey& key,
                    ProbePoint probe) {
    if (probe.cell < 0 || probe.cell > 15)
        throw std::invalid_argument("probe cell must be in 0..15");
    const KeySchedule ks = key_schedule(key);
    const State p = State::from_block(plaintext);
    if (probe.round == 1)
        return sbox((p.cells[probe.cell] ^ ks.wk.cells[probe.cell]) & 0xF);
    if (probe.round == 2) {
        const State u = mix_column(shuffle_cell(sub_cells(p ^ ks.wk)));
        return sbox((u.cells[probe.cell] ^ ks.round_keys[0].cells[probe.cell]) & 0xF);
    }
    throw std::invalid_argument("probe round must be 1 or 2");
}

std::uint64_t parse_block(std::string_view hex) {
    return parse_hex64(hex, "block");
}

MasterKey parse_key(std::string_view hex) {
    if (hex.size() != 32)
        throw std::invalid_argument("key: expected 32 hex chars, got " +
                                    std::to_string(hex.size()));
    MasterKey k;
    k.k0 = parse_hex64(hex.substr(0, 16), "key");
    k.k1 = parse_hex64(hex.substr(16, 16), "key");
    return k;
}

std::string block_hex(std::uint64_t block) {
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) s[i] = hex_char((block >> (60 - 4 * i)) & 0xF);
    return s;
}

std::string key_hex(const MasterKey& key) {
    return block_hex(key.k0) + block_hex(key.k1);
}

}  // namespace mcpa
