// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include <doctest.h>

#include <bitset>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mcpa/cipher.hpp"
#include "mcpa/cpa.hpp"
#include "mcpa/leakage.hpp"

using namespace mcpa;

namespace {

// Test-local model oracle: published S-box table plus a bit count, coded
// without touching the library's lookup path.
constexpr int kOracleSbox[16] = {0xC, 0xA, 0xD, 0x3, 0xE, 0xB, 0xF, 0x7,
                                 0x8, 0x9, 0x1, 0x5, 0x0, 0x2, 0x4, 0x6};
double oracle_model(int input, int guess) {
    return static_cast<double>(
        std::bitset<4>(static_cast<unsigned>(kOracleSbox[input ^ guess])).count());
}

// Straight-from-the-formula Pearson correlation of one (hypothesis column,
// sample column) pair, with the same documented constant-column rule.
double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t d = 0; d < n; ++d) {
        mx += x[d];
        my += y[d];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0, sx = 0, sy = 0;
    for (std::size_t d = 0; d < n; ++d) {
        num += (x[d] - mx) * (y[d] - my);
        sx += (x[d] - mx) * (x[d] - mx);
        sy += (y[d] - my) * (y[d] - my);
    }
    auto floor_of = [n](double mean) {
        const double eps = 1e-12 * static_cast<double>(n) * (1.0 + std::fabs(mean));
        return eps * eps;
    };
    if (sx <= floor_of(mx) || sy <= floor_of(my)) return 0.0;
    return num / std::sqrt(sx * sy);
}

TraceSet plain_set(const std::vector<std::uint64_t>& plaintexts,
                   std::size_t samples = 4) {
    TraceSet ts;
    for (std::uint64_t p : plaintexts) {
        Trace tr;
        tr.plaintext = p;
        tr.samples.assign(samples, 0.0);
        ts.traces.push_back(tr);
    }
    return ts;
}

LeakageConfig small_noiseless(std::uint64_t seed) {
    LeakageConfig cfg;
    cfg.samples_per_trace = 64;
    cfg.poi_offset = 1;
    cfg.poi_stride = 2;
    cfg.noise_sigma = 0.0;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("round-1 hypotheses match the model oracle") {
    // One trace per plaintext nibble value in cell 3 covers all 256
    // (input, guess) pairs.
    std::vector<std::uint64_t> pts;
    for (std::uint64_t v = 0; v < 16; ++v) pts.push_back(v << (60 - 4 * 3));
    const TraceSet ts = plain_set(pts);

    const HypothesisMatrix h = build_hypotheses_round1(ts, 3);
    CHECK(h.rows() == 16);
    CHECK(h.target_cell == 3);
    CHECK(h.target_round == 1);
    for (std::size_t d = 0; d < 16; ++d)
        for (int i = 0; i < 16; ++i) {
            CHECK(h.at(d, i) == oracle_model(static_cast<int>(d), i));
            CHECK(h.at(d, i) >= 0.0);
            CHECK(h.at(d, i) <= 4.0);
        }

    // Diagonal constancy: guess equal to the nibble always yields HW(sbox(0)).
    for (std::size_t d = 0; d < 16; ++d)
        CHECK(h.at(d, static_cast<int>(d)) == 2.0);
}

TEST_CASE("round-2 hypotheses chase the definition") {
    std::mt19937_64 rng(40);
    const MasterKey key{rng(), rng()};
    const KeySchedule ks = key_schedule(key);

    std::vector<std::uint64_t> pts;
    for (int d = 0; d < 40; ++d) pts.push_back(rng());
    const TraceSet ts = plain_set(pts);

    for (int cell : {0, 6, 15}) {
        const HypothesisMatrix h = build_hypotheses_round2(ts, ks.wk, cell);
        CHECK(h.target_round == 2);
        for (std::size_t d = 0; d < pts.size(); ++d) {
            // With the true whitening key and the true round-key guess, the
            // prediction is the actual probed leakage.
            const int truth = ks.round_keys[0].cells[cell];
            CHECK(h.at(d, truth) ==
                  leak_value(intermediate(pts[d], key, ProbePoint{2, cell})));

            // And for every guess, against u recomputed from the
            // instrumented cipher's first SubCell layer.
            RoundIntermediates ri;
            encrypt(pts[d], key, &ri);
            const State u = mix_column(shuffle_cell(ri.sub_out[0]));
            for (int i = 0; i < 16; ++i)
                CHECK(h.at(d, i) == oracle_model(u.cells[cell], i));
        }
    }

    // Zero whitening key reduces u to mix_column(shuffle_cell(sub_cells(p))).
    const HypothesisMatrix h0 = build_hypotheses_round2(ts, State{}, 5);
    for (std::size_t d = 0; d < pts.size(); ++d) {
        const State u =
            mix_column(shuffle_cell(sub_cells(State::from_block(pts[d]))));
        for (int i = 0; i < 16; ++i)
            CHECK(h0.at(d, i) == oracle_model(u.cells[5], i));
    }
}

TEST_CASE("hypothesis builders reject bad input") {
    const TraceSet empty;
    CHECK_THROWS_AS(build_hypotheses_round1(empty, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_hypotheses_round2(empty, State{}, 0),
                    std::invalid_argument);
    const TraceSet one = plain_set({0x1234});
    CHECK_THROWS_AS(build_hypotheses_round1(one, 16), std::invalid_argument);
}

TEST_CASE("pearson: perfect correlation and anticorrelation") {
    std::mt19937_64 rng(41);
    std::vector<std::uint64_t> pts;
    for (int d = 0; d < 50; ++d) pts.push_back(rng());
    TraceSet ts = plain_set(pts, 3);

    const HypothesisMatrix h = build_hypotheses_round1(ts, 2);
    for (std::size_t d = 0; d < pts.size(); ++d) {
        ts.traces[d].samples[0] = h.at(d, 9);            // copy of column 9
        ts.traces[d].samples[1] = -h.at(d, 9) + 11.5;    // negated plus offset
        ts.traces[d].samples[2] = 0.25;                  // constant
    }

    const CorrelationMatrix corr = pearson(h, ts);
    CHECK(corr.r(9, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(corr.r(9, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(corr.r(9, 2) == 0.0);
    CHECK(corr.zero_variance_samples);
    CHECK_FALSE(corr.zero_variance_hypothesis);
    for (int i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(corr.r(i, j) <= 1.0);
            CHECK(corr.r(i, j) >= -1.0);
        }
}

TEST_CASE("pearson matches the naive oracle to 1e-12") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-3.0, 7.0);

    // Random 50 x 200 samples and a random 50 x 16 hypothesis matrix.
    TraceSet ts = plain_set(std::vector<std::uint64_t>(50, 0), 200);
    for (Trace& tr : ts.traces)
        for (double& s : tr.samples) s = unif(rng);

    HypothesisMatrix h;
    h.values.resize(50 * 16);
    for (double& v : h.values)
        v = static_cast<double>(rng() % 5);  // model values 0..4

    // Degenerate columns on both sides.
    for (std::size_t d = 0; d < 50; ++d) {
        ts.traces[d].samples[17] = 0.1;  // constant sample column
        h.values[d * 16 + 4] = 3.0;      // constant hypothesis column
    }

    const CorrelationMatrix corr = pearson(h, ts);
    CHECK(corr.zero_variance_samples);
    CHECK(corr.zero_variance_hypothesis);

    std::vector<double> hcol(50), tcol(50);
    for (int i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 200; ++j) {
            for (std::size_t d = 0; d < 50; ++d) {
                hcol[d] = h.values[d * 16 + static_cast<std::size_t>(i)];
                tcol[d] = ts.traces[d].samples[j];
            }
            const double expect = oracle_pearson(hcol, tcol);
            CHECK(std::fabs(corr.r(i, j) - expect) <= 1e-12);
        }
}

TEST_CASE("pearson rejects mismatched or tiny inputs") {
    const TraceSet two = plain_set({1, 2}, 3);
    const TraceSet one = plain_set({1}, 3);
    const HypothesisMatrix h = build_hypotheses_round1(two, 0);
    CHECK_THROWS_AS(pearson(h, one), std::invalid_argument);
    CHECK_THROWS_AS(pearson(build_hypotheses_round1(one, 0), one),
                    std::invalid_argument);

    TraceSet ragged = two;
    ragged.traces[1].samples.pop_back();
    CHECK_THROWS_AS(pearson(h, ragged), std::invalid_argument);
}

TEST_CASE("recover_cell picks the peak and keeps a full ranking") {
    CorrelationMatrix corr;
    corr.num_samples = 6;
    corr.target_cell = 4;
    corr.values.assign(16 * 6, 0.0);
    corr.values[5 * 6 + 3] = -0.75;  // guess 5 peaks (in magnitude) at sample 3

    const CellResult res = recover_cell(corr);
    CHECK(res.cell == 4);
    CHECK(res.recovered_nibble == 5);
    CHECK(res.peak_abs_correlation == 0.75);
    CHECK(res.peak_sample == 3);
    CHECK(res.ranking[0] == 5);

    // Ranking is a permutation of 0..15.
    std::array<bool, 16> seen{};
    for (Nibble g : res.ranking) seen[g] = true;
    for (bool b : seen) CHECK(b);
}

TEST_CASE("recover_cell tie rule and degenerate flag") {
    CorrelationMatrix corr;
    corr.num_samples = 4;
    corr.values.assign(16 * 4, 0.0);
    const CellResult res = recover_cell(corr);
    CHECK(res.recovered_nibble == 0);  // documented tie-break: smaller guess
    CHECK(res.low_confidence);
    for (int g = 0; g < 16; ++g) CHECK(res.ranking[g] == g);
}

TEST_CASE("ranking is invariant under affine trace rescaling") {
    const MasterKey key{0xA5A5A5A5A5A5A5A5ULL, 0x0F0F0F0F0F0F0F0FULL};
    LeakageConfig cfg = small_noiseless(61);
    cfg.noise_sigma = 0.7;
    const TraceSet base = simulate_campaign(60, key, cfg);

    TraceSet scaled = base;
    TraceSet negated = base;
    for (std::size_t d = 0; d < scaled.traces.size(); ++d)
        for (std::size_t j = 0; j < scaled.traces[d].samples.size(); ++j) {
            scaled.traces[d].samples[j] = 2.5 * base.traces[d].samples[j] - 40.0;
            negated.traces[d].samples[j] = -base.traces[d].samples[j];
        }

    for (int cell : {0, 7, 13}) {
        const HypothesisMatrix h = build_hypotheses_round1(base, cell);
        const CorrelationMatrix ra = pearson(h, base);
        const CorrelationMatrix rb = pearson(h, scaled);
        const CorrelationMatrix rc = pearson(h, negated);

        // Entry level: positive affine rescaling leaves r unchanged,
        // negation flips its sign.
        for (int g = 0; g < 16; ++g)
            for (std::size_t j = 0; j < ra.num_samples; ++j) {
                CHECK(std::fabs(ra.r(g, j) - rb.r(g, j)) <= 1e-12);
                CHECK(std::fabs(ra.r(g, j) + rc.r(g, j)) <= 1e-12);
            }

        const CellResult a = recover_cell(ra);
        const CellResult b = recover_cell(rb);
        const CellResult c = recover_cell(rc);
        CHECK(a.ranking == b.ranking);
        CHECK(a.ranking == c.ranking);
        for (int g = 0; g < 16; ++g) {
            CHECK(std::fabs(a.guess_scores[g] - b.guess_scores[g]) <= 1e-12);
            CHECK(std::fabs(a.guess_scores[g] - c.guess_scores[g]) <= 1e-12);
        }
    }
}

TEST_CASE("noiseless round-1 attack recovers the whitening key") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 5; ++rep) {
        const MasterKey key{rng(), rng()};
        const TraceSet ts = simulate_campaign(32, key, small_noiseless(100 + rep));
        const Round1Result res = attack_round1(ts);
        CHECK(res.hypotheses_enumerated == 256);
        const State true_wk = key_schedule(key).wk;
        for (int cell = 0; cell < 16; ++cell) {
            CHECK(res.cells[cell].recovered_nibble == true_wk.cells[cell]);
            CHECK(res.cells[cell].ranking[0] == true_wk.cells[cell]);
            CHECK(res.cells[cell].peak_abs_correlation ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
        CHECK(res.wk == true_wk);
    }
}

TEST_CASE("degenerate campaign with identical plaintexts completes flagged") {
    TraceSet ts = plain_set({0x1111222233334444ULL, 0x1111222233334444ULL}, 5);
    const Round1Result res = attack_round1(ts);
    for (const CellResult& cr : res.cells) {
        CHECK(cr.low_confidence);
        CHECK(cr.recovered_nibble == 0);
        CHECK(cr.peak_abs_correlation == 0.0);
    }
}

TEST_CASE("attack_full recovers the master key noiselessly") {
    std::mt19937_64 rng(44);
    for (int rep = 0; rep < 5; ++rep) {
        const MasterKey key{rng(), rng()};
        const TraceSet ts = simulate_campaign(32, key, small_noiseless(200 + rep));
        const AttackResult res = attack_full(ts, round_constants()[0]);
        CHECK(res.k0 == key.k0);
        CHECK(res.k1 == key.k1);
        CHECK(res.ciphertext_verified);
        CHECK(res.hypotheses_stage1 == 256);
        CHECK(res.hypotheses_stage2 == 256);
        REQUIRE(res.per_cell.size() == 32);
        const KeySchedule ks = key_schedule(key);
        CHECK(res.wk == ks.wk);
        CHECK(res.rk0 == ks.round_keys[0]);
    }
}

TEST_CASE("attack_full with a wrong round constant fails verification") {
    const MasterKey key{0x123456789ABCDEF0ULL, 0x0FEDCBA987654321ULL};
    const TraceSet ts = simulate_campaign(32, key, small_noiseless(300));
    State bad_alpha = round_constants()[0];
    bad_alpha.cells[0] ^= 1;
    const AttackResult res = attack_full(ts, bad_alpha);
    CHECK_FALSE(res.ciphertext_verified);
    CHECK(res.k0 != key.k0);
}

TEST_CASE("attack results do not depend on execution policy") {
    const MasterKey key{0xCAFEF00DDEADBEEFULL, 0x0123456789ABCDEFULL};
    LeakageConfig cfg = small_noiseless(71);
    cfg.noise_sigma = 1.5;
    const TraceSet ts = simulate_campaign(40, key, cfg);

    const AttackResult a = attack_full(ts, round_constants()[0], Parallelism::kAuto);
    const AttackResult b = attack_full(ts, round_constants()[0], Parallelism::kSerial);
    CHECK(a.k0 == b.k0);
    CHECK(a.k1 == b.k1);
    REQUIRE(a.per_cell.size() == b.per_cell.size());
    for (std::size_t i = 0; i < a.per_cell.size(); ++i) {
        CHECK(a.per_cell[i].guess_scores == b.per_cell[i].guess_scores);
        CHECK(a.per_cell[i].ranking == b.per_cell[i].ranking);
    }
}

TEST_CASE("success_metrics aggregates hits and ranks") {
    const MasterKey key{0xAAAAAAAAAAAAAAAAULL, 0x5555555555555555ULL};
    const TraceSet ts = simulate_campaign(32, key, small_noiseless(400));
    const AttackResult good = attack_full(ts, round_constants()[0]);
    REQUIRE(good.k0 == key.k0);

    SUBCASE("all correct") {
        const SuccessReport rep = success_metrics({good, good, good}, key);
        CHECK(rep.full_key_success_rate == 1.0);
        for (double r : rep.cell_success_rate) CHECK(r == 1.0);
        for (double r : rep.cell_mean_rank) CHECK(r == 1.0);
        CHECK(rep.mean_rank == 1.0);
    }

    SUBCASE("none correct") {
        const MasterKey other{~key.k0, ~key.k1};
        const SuccessReport rep = success_metrics({good, good}, other);
        CHECK(rep.full_key_success_rate == 0.0);
    }

    SUBCASE("hand-computed ranks on forged results") {
        // Three synthetic experiments that rank the true nibble of slot 0
        // at positions 1, 2 and 4: mean rank (1+2+4)/3.
        const KeySchedule ks = key_schedule(key);
        const Nibble truth = ks.wk.cells[0];
        std::vector<AttackResult> fixtures;
        for (int rank_pos : {0, 1, 3}) {
            AttackResult ar = good;
            CellResult& cr = ar.per_cell[0];
            std::array<Nibble, 16> order{};
            std::size_t fill = 0;
            for (int g = 0; g < 16; ++g)
                if (g != truth) {
                    if (static_cast<int>(fill) == rank_pos) ++fill;
                    order[fill++] = static_cast<Nibble>(g);
                }
            order[static_cast<std::size_t>(rank_pos)] = truth;
            cr.ranking = order;
            cr.recovered_nibble = order[0];
            fixtures.push_back(ar);
        }
        const SuccessReport rep = success_metrics(fixtures, key);
        CHECK(rep.cell_mean_rank[0] == doctest::Approx((1.0 + 2.0 + 4.0) / 3.0));
        CHECK(rep.cell_success_rate[0] == doctest::Approx(1.0 / 3.0));
    }

    CHECK_THROWS_AS(success_metrics({}, key), std::invalid_argument);
}
