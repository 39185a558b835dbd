// SPDX-License-Identifier: Apache-2.0
//
// Part of midori-cpa, a power-analysis toolkit for the Midori64 block cipher.

#include "mcpa/cpa.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace mcpa {

namespace {

constexpr double kTieTolerance = 1e-12;

double column_floor(std::size_t n, double mean) {
    const double eps = 1e-12 * static_cast<double>(n) * (1.0 + std::fabs(mean));
    return eps * eps;
}

void check_cell(int cell) {
    if (cell < 0 || cell > 15)
        throw std::invalid_argument("cell must be in 0..15");
}

void check_attackable(const TraceSet& ts) {
    if (ts.traces.size() < 2)
        throw std::invalid_argument(
            "correlation needs at least 2 traces (the Pearson statistic is "
            "undefined for D < 2)");
}

// Runs fn(cell) for cell 0..15, possibly on several threads. Each call
// only touches its own output slot, so scheduling cannot change results.
template <typename Fn>
void for_each_cell(Parallelism par, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (par == Parallelism::kSerial || hw <= 1) {
        for (int cell = 0; cell < 16; ++cell) fn(cell);
        return;
    }
    std::vector<std::future<void>> tasks;
    tasks.reserve(16);
    for (int cell = 0; cell < 16; ++cell)
        tasks.push_back(std::async(std::launch::async, fn, cell));
    for (auto& t : tasks) t.get();
}

HypothesisMatrix hypotheses_from_inputs(const std::vector<Nibble>& inputs,
                                        int cell, int round) {
    HypothesisMatrix h;
    h.target_cell = cell;
    h.target_round = round;
    h.values.resize(inputs.size() * 16);
    // All 256 (input, guess) pairs reduce to a 16x16 lookup.
    double model[16][16];
    for (int x = 0; x < 16; ++x)
        for (int i = 0; i < 16; ++i)
            model[x][i] = leak_value(sbox(static_cast<Nibble>(x ^ i)));
    for (std::size_t d = 0; d < inputs.size(); ++d)
        for (int i = 0; i < 16; ++i)
            h.values[d * 16 + static_cast<std::size_t>(i)] =
                model[inputs[d]][i];
    return h;
}

}  // namespace

HypothesisMatrix build_hypotheses_round1(const TraceSet& ts, int cell) {
    check_cell(cell);
    if (ts.traces.empty())
        throw std::invalid_argument("empty trace set");
    std::vector<Nibble> inputs(ts.traces.size());
    for (std::size_t d = 0; d < inputs.size(); ++d)
        inputs[d] = State::from_block(ts.traces[d].plaintext).cells[cell];
    return hypotheses_from_inputs(inputs, cell, 1);
}

HypothesisMatrix build_hypotheses_round2(const TraceSet& ts, const State& wk,
                                         int cell) {
    check_cell(cell);
    if (ts.traces.empty())
        throw std::invalid_argument("empty trace set");
    std::vector<Nibble> inputs(ts.traces.size());
    for (std::size_t d = 0; d < inputs.size(); ++d) {
        const State p = State::from_block(ts.traces[d].plaintext);
        const State u = mix_column(shuffle_cell(sub_cells(p ^ wk)));
        inputs[d] = u.cells[cell];
    }
    return hypotheses_from_inputs(inputs, cell, 2);
}

CorrelationMatrix pearson(const HypothesisMatrix& h, const TraceSet& ts) {
    check_attackable(ts);
    const std::size_t num_traces = ts.traces.size();
    if (h.rows() != num_traces)
        throw std::invalid_argument(
            "hypothesis and trace sets disagree on trace count");
    const std::size_t num_samples = ts.samples_per_trace();
    for (const Trace& tr : ts.traces)
        if (tr.samples.size() != num_samples)
            throw std::invalid_argument("trace set has ragged sample rows");

    CorrelationMatrix corr;
    corr.num_samples = num_samples;
    corr.target_cell = h.target_cell;
    corr.target_round = h.target_round;
    corr.values.assign(16 * num_samples, 0.0);

    // Pass 1: column means.
    std::array<double, 16> hmean{};
    std::vector<double> tmean(num_samples, 0.0);
    for (std::size_t d = 0; d < num_traces; ++d) {
        const double* hrow = &h.values[d * 16];
        for (int i = 0; i < 16; ++i) hmean[i] += hrow[i];
        const double* trow = ts.traces[d].samples.data();
        for (std::size_t j = 0; j < num_samples; ++j) tmean[j] += trow[j];
    }
    const double inv_d = 1.0 / static_cast<double>(num_traces);
    for (double& m : hmean) m *= inv_d;
    for (double& m : tmean) m *= inv_d;

    // Pass 2: centered cross products and sums of squares. The accumulator
    // keeps the 16 guesses contiguous per sample so the inner loop
    // vectorizes.
    std::array<double, 16> hss{};
    std::vector<double> tss(num_samples, 0.0);
    std::vector<double> num(num_samples * 16, 0.0);
    for (std::size_t d = 0; d < num_traces; ++d) {
        double hc[16];
        const double* hrow = &h.values[d * 16];
        for (int i = 0; i < 16; ++i) {
            hc[i] = hrow[i] - hmean[i];
            hss[i] += hc[i] * hc[i];
        }
        const double* trow = ts.traces[d].samples.data();
        for (std::size_t j = 0; j < num_samples; ++j) {
            const double tc = trow[j] - tmean[j];
            tss[j] += tc * tc;
            double* acc = &num[j * 16];
            for (int i = 0; i < 16; ++i) acc[i] += hc[i] * tc;
        }
    }

    bool hdeg[16];
    for (int i = 0; i < 16; ++i) {
        hdeg[i] = hss[i] <= column_floor(num_traces, hmean[i]);
        corr.zero_variance_hypothesis |= hdeg[i];
    }
    for (std::size_t j = 0; j < num_samples; ++j) {
        const bool tdeg = tss[j] <= column_floor(num_traces, tmean[j]);
        corr.zero_variance_samples |= tdeg;
        for (int i = 0; i < 16; ++i) {
            double r = 0.0;
            if (!tdeg && !hdeg[i])
                r = std::clamp(num[j * 16 + i] / std::sqrt(hss[i] * tss[j]),
                               -1.0, 1.0);
            corr.values[static_cast<std::size_t>(i) * num_samples + j] = r;
        }
    }
    return corr;
}

CellResult recover_cell(const CorrelationMatrix& corr) {
    CellResult res;
    res.cell = corr.target_cell;
    res.round = corr.target_round;

    std::array<std::size_t, 16> peak_at{};
    for (int i = 0; i < 16; ++i) {
        double best = -1.0;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < corr.num_samples; ++j) {
            const double a = std::fabs(corr.r(i, j));
            if (a > best) {
                best = a;
                best_j = j;
            }
        }
        res.guess_scores[i] = corr.num_samples == 0 ? 0.0 : best;
        peak_at[i] = best_j;
    }

    std::array<Nibble, 16> order;
    std::iota(order.begin(), order.end(), Nibble{0});
    std::sort(order.begin(), order.end(), [&](Nibble a, Nibble b) {
        if (res.guess_scores[a] != res.guess_scores[b])
            return res.guess_scores[a] > res.guess_scores[b];
        return a < b;
    });
    res.ranking = order;
    res.recovered_nibble = order[0];
    res.peak_abs_correlation = res.guess_scores[order[0]];
    res.peak_sample = peak_at[order[0]];
    res.low_confidence =
        res.peak_abs_correlation == 0.0 ||
        res.guess_scores[order[1]] >= res.peak_abs_correlation - kTieTolerance;
    return res;
}

Round1Result attack_round1(const TraceSet& ts, Parallelism par) {
    check_attackable(ts);
    Round1Result res;
    for_each_cell(par, [&](int cell) {
        const HypothesisMatrix h = build_hypotheses_round1(ts, cell);
        res.cells[static_cast<std::size_t>(cell)] = recover_cell(pearson(h, ts));
    });
    for (int cell = 0; cell < 16; ++cell)
        res.wk.cells[cell] = res.cells[static_cast<std::size_t>(cell)].recovered_nibble;
    res.hypotheses_enumerated = 16 * 16;
    return res;
}

AttackResult attack_full(const TraceSet& ts, const State& alpha0,
                         Parallelism par) {
    check_attackable(ts);
    AttackResult res;

    Round1Result stage1 = attack_round1(ts, par);
    res.wk = stage1.wk;
    res.hypotheses_stage1 = stage1.hypotheses_enumerated;
    res.per_cell.assign(stage1.cells.begin(), stage1.cells.end());

    std::array<CellResult, 16> stage2;
    for_each_cell(par, [&](int cell) {
        const HypothesisMatrix h = build_hypotheses_round2(ts, res.wk, cell);
        stage2[static_cast<std::size_t>(cell)] = recover_cell(pearson(h, ts));
    });
    for (int cell = 0; cell < 16; ++cell)
        res.rk0.cells[cell] = stage2[static_cast<std::size_t>(cell)].recovered_nibble;
    res.per_cell.insert(res.per_cell.end(), stage2.begin(), stage2.end());
    res.hypotheses_stage2 = 16 * 16;

    const State k0_state = res.rk0 ^ alpha0;
    const State k1_state = res.wk ^ k0_state;
    res.k0 = k0_state.to_block();
    res.k1 = k1_state.to_block();

    const Trace& probe = ts.traces.front();
    res.ciphertext_verified =
        encrypt(probe.plaintext, MasterKey{res.k0, res.k1}) == probe.ciphertext;
    return res;
}

SuccessReport success_metrics(const std::vector<AttackResult>& experiments,
                              const MasterKey& true_key) {
    if (experiments.empty())
        throw std::invalid_argument("success_metrics needs at least one experiment");

    const KeySchedule ks = key_schedule(true_key);
    const State& true_wk = ks.wk;
    const State& true_rk0 = ks.round_keys[0];

    SuccessReport rep;
    rep.num_experiments = experiments.size();
    std::array<double, 32> rank_sum{};
    std::array<double, 32> hit_sum{};
    std::size_t full_hits = 0;

    for (const AttackResult& ar : experiments) {
        if (ar.per_cell.size() != 32)
            throw std::invalid_argument("experiment lacks the 32 per-cell results");
        if (ar.k0 == true_key.k0 && ar.k1 == true_key.k1) ++full_hits;
        for (std::size_t slot = 0; slot < 32; ++slot) {
            const CellResult& cr = ar.per_cell[slot];
            const Nibble truth = slot < 16 ? true_wk.cells[cr.cell]
                                           : true_rk0.cells[cr.cell];
            if (cr.recovered_nibble == truth) hit_sum[slot] += 1.0;
            const auto pos = std::find(cr.ranking.begin(), cr.ranking.end(), truth);
            rank_sum[slot] +=
                static_cast<double>(std::distance(cr.ranking.begin(), pos)) + 1.0;
        }
    }

    const double inv_n = 1.0 / static_cast<double>(rep.num_experiments);
    double rank_total = 0.0;
    for (std::size_t slot = 0; slot < 32; ++slot) {
        rep.cell_success_rate[slot] = hit_sum[slot] * inv_n;
        rep.cell_mean_rank[slot] = rank_sum[slot] * inv_n;
        rank_total += rep.cell_mean_rank[slot];
    }
    rep.full_key_success_rate = static_cast<double>(full_hits) * inv_n;
    rep.mean_rank = rank_total / 32.0;
    return rep;
}

}  // namespace mcpa
