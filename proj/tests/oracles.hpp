#pragma once
// Test-only generators and brute-force reference implementations. Nothing in
// here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "confaudit/log_model.hpp"

namespace oracle {

using confaudit::CandidateScore;
using confaudit::Label;
using confaudit::PredictionLog;
using confaudit::PredictionRecord;

// mpmath, 40 digits.
inline constexpr double kSoftmax123[3] = {0.0900305731703804579980221, 0.2447284710547976524729596,
                                          0.6652409557748218895290183};
inline constexpr double kLogSoftmax123[3] = {-2.40760596444438030448292, -1.40760596444438030448292,
                                             -0.4076059644443803044829199};

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng); }
};

inline std::vector<double> naive_softmax(const std::vector<double>& z) {
    // long double, shifted: reference only
    long double m = *std::max_element(z.begin(), z.end());
    long double s = 0;
    for (double v : z) s += std::exp(static_cast<long double>(v) - m);
    std::vector<double> p;
    for (double v : z) p.push_back(static_cast<double>(std::exp(static_cast<long double>(v) - m) / s));
    return p;
}

struct LogShape {
    std::size_t classes = 10;
    std::size_t records = 1000;
    double logit_scale = 12.0;
    bool coarse_ties = true;     // occasionally round confidences down to 0.01 steps
    bool short_lists = true;     // candidate lists shorter than 10
};

inline std::vector<Label> class_labels(std::size_t k) {
    std::vector<Label> out;
    for (std::size_t i = 0; i < k; ++i) out.emplace_back("c" + std::to_string(i));
    return out;
}

inline PredictionLog random_log(Rng& rng, const LogShape& shape) {
    const auto labels = class_labels(shape.classes);
    PredictionLog log;
    for (std::size_t r = 0; r < shape.records; ++r) {
        std::vector<double> z(shape.classes);
        const double scale = rng.uniform(0.0, shape.logit_scale);
        for (auto& v : z) v = rng.uniform(-1.0, 1.0) * scale;
        auto p = naive_softmax(z);
        std::vector<std::size_t> order(shape.classes);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] > p[b]; });
        std::size_t n = std::min<std::size_t>(shape.classes, 10);
        if (shape.short_lists && rng.uniform() < 0.3) n = 1 + rng.below(n);
        const bool coarse = shape.coarse_ties && rng.uniform() < 0.2;
        PredictionRecord rec;
        rec.id = "r" + std::to_string(r);
        for (std::size_t i = 0; i < n; ++i) {
            double c = p[order[i]];
            if (coarse) c = std::floor(c * 100.0) / 100.0;
            rec.cands.push_back(CandidateScore{labels[order[i]], c});
        }
        // gold: mostly the generating argmax, sometimes elsewhere
        const double u = rng.uniform();
        rec.gold = u < 0.7 ? labels[order[0]] : labels[rng.below(shape.classes)];
        if (rng.uniform() < 0.5) rec.strokes = static_cast<std::int64_t>(rng.below(30));
        if (rng.uniform() < 0.7) rec.dataset = rng.uniform() < 0.5 ? "alpha" : "beta";
        log.add(std::move(rec));
    }
    return log;
}

struct Flag {
    std::string id;
    std::string gold;
    std::string predicted;
    double confidence;
    bool operator==(const Flag&) const = default;
};

inline std::vector<Flag> mislabels(const PredictionLog& log, double tau) {
    std::vector<Flag> out;
    for (const auto& r : log.records())
        if (r.cands[0].label.str() != r.gold.str() && r.cands[0].confidence >= tau)
            out.push_back({r.id, r.gold.str(), r.cands[0].label.str(), r.cands[0].confidence});
    std::sort(out.begin(), out.end(), [](const Flag& a, const Flag& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.id < b.id;
    });
    return out;
}

inline std::vector<Flag> lowconf(const PredictionLog& log, double tau) {
    std::vector<Flag> out;
    for (const auto& r : log.records())
        if (r.cands[0].confidence < tau)
            out.push_back({r.id, r.gold.str(), r.cands[0].label.str(), r.cands[0].confidence});
    std::sort(out.begin(), out.end(), [](const Flag& a, const Flag& b) {
        if (a.confidence != b.confidence) return a.confidence < b.confidence;
        return a.id < b.id;
    });
    return out;
}

struct AutoLabel {
    std::uint64_t total = 0, accepted = 0, errors = 0;
};

inline AutoLabel autolabel(const PredictionLog& log, double tau) {
    AutoLabel a;
    for (const auto& r : log.records()) {
        ++a.total;
        if (r.cands[0].confidence >= tau) {
            ++a.accepted;
            if (r.cands[0].label.str() != r.gold.str()) ++a.errors;
        }
    }
    return a;
}

struct Pair {
    std::string category, similar;
    double score;
    std::uint64_t support;
};

// Exhaustive accumulation: one full scan of the log per category.
inline std::vector<Pair> similar_pairs(const PredictionLog& log, std::uint64_t min_support, std::size_t depth,
                                       bool by_gold = false) {
    std::set<std::string> cats;
    for (const auto& r : log.records()) cats.insert(by_gold ? r.gold.str() : r.cands[0].label.str());
    std::vector<Pair> out;
    for (const auto& c : cats) {
        std::map<std::string, double> acc;
        std::uint64_t support = 0;
        for (const auto& r : log.records()) {
            const std::string key = by_gold ? r.gold.str() : r.cands[0].label.str();
            if (key != c) continue;
            ++support;
            for (std::size_t i = 0; i < r.cands.size() && i < depth; ++i) acc[r.cands[i].label.str()] += r.cands[i].confidence;
        }
        if (support < min_support) continue;
        const Pair* best = nullptr;
        Pair cand{};
        for (const auto& [label, score] : acc) {
            if (label == c || score <= 0.0) continue;   // a pair needs positive mass
            if (!best || score > cand.score) {   // map order gives label ascending on ties
                cand = Pair{c, label, score, support};
                best = &cand;
            }
        }
        if (best) out.push_back(cand);
    }
    std::sort(out.begin(), out.end(), [](const Pair& a, const Pair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.category != b.category) return a.category < b.category;
        return a.similar < b.similar;
    });
    return out;
}

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = (static_cast<double>(i + j) / 2.0) + 1.0;
        i = j + 1;
    }
    return rank;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i], my += ry[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
