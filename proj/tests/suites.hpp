#pragma once
// Seeded property suites shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "confaudit/confidence.hpp"
#include "confaudit/mining.hpp"
#include "confaudit/stats.hpp"
#include "oracles.hpp"

namespace suites {

struct Outcome {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

// Entries on a 2^-40 grid with |z| <= 700 so z + c is exact in binary64.
inline std::vector<double> grid_logits(oracle::Rng& rng, std::size_t k, double bound) {
    std::vector<double> z(k);
    for (auto& v : z) v = std::ldexp(std::round(std::ldexp(rng.uniform(-bound, bound), 40)), -40);
    return z;
}

inline std::size_t first_max(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline Outcome softmax_properties(std::uint64_t seed, std::size_t vectors = 1000) {
    Outcome out;
    oracle::Rng rng(seed);
    for (std::size_t n = 0; n < vectors && out.ok; ++n) {
        const std::size_t k = 2 + rng.below(49);
        // mix wide and narrow ranges so both underflow and near-ties appear
        const double bound = rng.uniform() < 0.5 ? 350.0 : rng.uniform(1.0, 30.0);
        auto z = grid_logits(rng, k, bound);
        if (rng.uniform() < 0.1) z[rng.below(k)] = z[rng.below(k)];   // plant an exact tie
        const auto p = confaudit::softmax(z);
        double sum = 0;
        for (double v : p) sum += v;
        if (std::abs(sum - 1.0) > 1e-12) out.fail("normalization off by " + std::to_string(sum - 1.0));

        const double c = grid_logits(rng, 1, 350.0)[0];
        std::vector<double> zc(z);
        for (auto& v : zc) v += c;
        const auto pc = confaudit::softmax(zc);
        for (std::size_t i = 0; i < k; ++i)
            if (std::abs(pc[i] - p[i]) > 1e-15) out.fail("shift invariance broken at vector " + std::to_string(n));

        if (confaudit::argmax(p) != first_max(z) || confaudit::argmax(z) != first_max(z))
            out.fail("argmax not preserved at vector " + std::to_string(n));

        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                if (!(z[i] > z[j])) continue;
                if (p[i] < p[j]) out.fail("monotonicity broken at vector " + std::to_string(n));
                if (p[j] >= DBL_MIN && !(p[i] > p[j])) out.fail("strict monotonicity broken at vector " + std::to_string(n));
            }
    }
    return out;
}

inline Outcome gradient_check(std::uint64_t seed, std::size_t cases = 100) {
    Outcome out;
    oracle::Rng rng(seed);
    const double h = 1e-5;
    for (std::size_t n = 0; n < cases && out.ok; ++n) {
        const std::size_t k = 2 + rng.below(19);
        std::vector<double> z(k);
        for (auto& v : z) v = rng.uniform(-10.0, 10.0);
        const std::size_t gold = rng.below(k);
        const auto g = confaudit::xent_grad(z, gold);
        for (std::size_t i = 0; i < k; ++i) {
            auto zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            const double fd = (-confaudit::log_softmax(zp)[gold] + confaudit::log_softmax(zm)[gold]) / (2 * h);
            const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-3});
            if (rel > 1e-5) {
                std::ostringstream os;
                os << "case " << n << " entry " << i << ": analytic " << g[i] << " vs fd " << fd;
                out.fail(os.str());
            }
        }
    }
    return out;
}

inline Outcome bin_partition(std::uint64_t seed, std::size_t draws = 10000) {
    Outcome out;
    const auto spec = confaudit::BinSpec::standard();
    const auto& e = spec.edges();
    oracle::Rng rng(seed);
    confaudit::PredictionLog log;
    for (std::size_t n = 0; n < draws; ++n) {
        double c = rng.uniform();
        if (n % 10 == 0) c = e[rng.below(e.size())];          // exact edges
        if (n % 10 == 1) c = 1.0 - rng.uniform() * 1e-4;   // the crowded top
        std::size_t hits = 0, where = 0;
        for (std::size_t b = 0; b + 1 < e.size(); ++b) {
            const bool last = b + 2 == e.size();
            if (e[b] <= c && (c < e[b + 1] || (last && c <= e[b + 1]))) {
                ++hits;
                where = b;
            }
        }
        if (hits != 1) out.fail("confidence " + std::to_string(c) + " lands in " + std::to_string(hits) + " bins");
        if (spec.index(c) != where) out.fail("index disagrees with interval scan at " + std::to_string(c));
        const confaudit::Label a("a"), b("b");
        log.add(confaudit::PredictionRecord{"r" + std::to_string(n), rng.uniform() < 0.5 ? a : b, {{a, c}}, {}, {}});
    }
    confaudit::StatsAccumulator acc;
    acc.add(log);
    const auto rep = confaudit::report_bins(acc);
    std::int64_t scaled = 0;
    std::uint64_t counted = 0;
    for (const auto& r : rep.rows) {
        scaled += r.samples_pct.scaled;
        counted += r.count;
    }
    if (counted != draws) out.fail("bin counts do not sum to the record count");
    if (std::abs(scaled - 10000) > 1) out.fail("Samples(%) column sums to " + std::to_string(scaled / 100.0));
    return out;
}

inline Outcome merge_equivalence(std::uint64_t seed, std::size_t records = 10000, std::size_t shards = 8) {
    Outcome out;
    oracle::Rng rng(seed);
    const auto log = oracle::random_log(rng, {.classes = 30, .records = records});
    confaudit::StatsAccumulator single;
    for (const auto& r : log.records()) single.add(r);
    std::vector<confaudit::StatsAccumulator> parts(shards);
    for (const auto& r : log.records()) parts[rng.below(shards)].add(r);
    confaudit::StatsAccumulator merged;
    for (const auto& p : parts) merged.merge(p);

    if (merged.bins() != single.bins()) out.fail("bin counts differ");
    if (merged.topk() != single.topk()) out.fail("top-k counts differ");
    if (merged.topk_by_dataset() != single.topk_by_dataset()) out.fail("per-dataset top-k differ");
    if (merged.classes().size() != single.classes().size()) out.fail("class sets differ");
    for (const auto& [label, s] : single.classes()) {
        auto it = merged.classes().find(label);
        if (it == merged.classes().end()) {
            out.fail("class missing after merge");
            continue;
        }
        const auto& m = it->second;
        if (m.count != s.count || m.correct != s.correct || m.stroke_n != s.stroke_n) out.fail("class counts differ");
        if (std::abs(m.conf_sum - s.conf_sum) > 1e-9 || std::abs(m.stroke_sum - s.stroke_sum) > 1e-9)
            out.fail("class sums differ beyond 1e-9");
    }
    return out;
}

inline std::vector<oracle::Flag> as_flags(const std::vector<confaudit::FlaggedSample>& v) {
    std::vector<oracle::Flag> out;
    for (const auto& f : v) out.push_back({f.id, f.gold.str(), f.predicted.str(), f.confidence});
    return out;
}

inline Outcome miner_oracles(std::uint64_t seed, std::size_t logs = 50) {
    Outcome out;
    oracle::Rng rng(seed);
    for (std::size_t n = 0; n < logs; ++n) {
        const std::size_t k = 2 + rng.below(9);
        const std::size_t records = 1 + rng.below(1000);
        const auto log = oracle::random_log(rng, {.classes = k, .records = records, .logit_scale = 25.0});
        const std::string at = " (log " + std::to_string(n) + ")";
        for (double tau : {0.0, 0.2, 0.5, 0.9, 0.99, 0.9999, 1.0, rng.uniform()}) {
            if (as_flags(confaudit::detect_mislabels(log, tau)) != oracle::mislabels(log, tau))
                out.fail("detect_mislabels differs from oracle at tau " + std::to_string(tau) + at);
            if (as_flags(confaudit::extract_low_confidence(log, tau)) != oracle::lowconf(log, tau))
                out.fail("extract_low_confidence differs from oracle at tau " + std::to_string(tau) + at);
            const auto a = confaudit::simulate_autolabel(log, tau);
            const auto o = oracle::autolabel(log, tau);
            if (a.total != o.total || a.accepted != o.accepted || a.accepted_errors != o.errors ||
                a.coverage_pct != confaudit::percent_of(o.accepted, o.total) ||
                a.residual_error_pct != confaudit::percent_of(o.errors, o.accepted) || a.none_accepted != (o.accepted == 0))
                out.fail("simulate_autolabel differs from oracle at tau " + std::to_string(tau) + at);
        }
        for (std::uint64_t support : {1u, 3u, 10u}) {
            for (std::size_t depth : {2u, 5u, 10u}) {
                for (bool by_gold : {false, true}) {
                    confaudit::PairOptions opts;
                    opts.min_support = support;
                    opts.depth = depth;
                    opts.grouping = by_gold ? confaudit::PairGrouping::by_gold : confaudit::PairGrouping::by_top1;
                    const auto mined = confaudit::mine_similar_pairs(log, opts).pairs;
                    const auto want = oracle::similar_pairs(log, support, depth, by_gold);
                    bool same = mined.size() == want.size();
                    for (std::size_t i = 0; same && i < mined.size(); ++i) {
                        const auto& m = mined[i];
                        const auto& w = want[i];
                        same = m.category.str() == w.category && m.similar.str() == w.similar &&
                               m.support == w.support && std::abs(m.score - w.score) <= 1e-9;
                    }
                    if (!same)
                        out.fail("mine_similar_pairs differs from oracle (support " + std::to_string(support) +
                                 ", depth " + std::to_string(depth) + (by_gold ? ", by gold" : "") + ")" + at);
                }
            }
        }
    }
    return out;
}

inline confaudit::PredictionLog worked_pair_example() {
    using confaudit::Label;
    const Label A("A"), B("B"), C("C");
    confaudit::PredictionLog log;
    log.add({"1", A, {{A, .6}, {B, .3}, {C, .1}}, {}, {}});
    log.add({"2", A, {{A, .7}, {B, .2}, {C, .1}}, {}, {}});
    log.add({"3", A, {{A, .9}, {C, .06}, {B, .04}}, {}, {}});
    return log;
}

}  // namespace suites
