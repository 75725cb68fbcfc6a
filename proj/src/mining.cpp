#include "confaudit/mining.hpp"

#include <algorithm>
#include <istream>
#include <stdexcept>

#include "confaudit/csv.hpp"

namespace confaudit {

namespace {

void require_tau(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("threshold " + std::to_string(tau) + " outside [0,1]");
}

FlaggedSample flag(const PredictionRecord& r) {
    return FlaggedSample{r.id, r.gold, r.top1().label, r.top1().confidence};
}

}  // namespace

std::vector<MislabelCandidate> detect_mislabels(const PredictionLog& log, double tau) {
    require_tau(tau);
    std::vector<MislabelCandidate> out;
    for (const auto& r : log.records()) {
        if (!r.top1_correct() && r.top1().confidence >= tau) out.push_back(flag(r));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.id < b.id;
    });
    return out;
}

std::vector<FlaggedSample> extract_low_confidence(const PredictionLog& log, double tau) {
    require_tau(tau);
    std::vector<FlaggedSample> out;
    for (const auto& r : log.records()) {
        if (r.top1().confidence < tau) out.push_back(flag(r));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.confidence != b.confidence) return a.confidence < b.confidence;
        return a.id < b.id;
    });
    return out;
}

void CorrectionMap::set(std::string id, Label corrected) {
    entries_.insert_or_assign(std::move(id), std::move(corrected));
}

void CorrectionMap::validate_against(const PredictionLog& log) const {
    for (const auto& [id, label] : entries_) {
        const PredictionRecord* r = log.find(id);
        if (!r) throw std::invalid_argument("correction for unknown id \"" + id + "\"");
        if (r->gold == label)
            throw std::invalid_argument("correction for \"" + id + "\" equals its current gold label \"" +
                                        label.str() + "\"");
    }
}

CorrectionMap read_corrections_csv(std::istream& in) {
    CorrectionMap map;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto where = "corrections line " + std::to_string(lineno) + ": ";
        std::vector<std::string> f;
        try {
            f = csv::split_line(line);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(where + e.what());
        }
        if (header) {
            header = false;
            if (f.size() != 2 || f[0] != "id" || f[1] != "corrected_label")
                throw std::runtime_error(where + "expected header \"id,corrected_label\"");
            continue;
        }
        if (f.size() != 2) throw std::runtime_error(where + "expected 2 fields");
        if (map.entries().count(f[0])) throw std::runtime_error(where + "duplicate id \"" + f[0] + "\"");
        if (auto why = Label::check(f[1])) throw std::runtime_error(where + "corrected label " + *why);
        map.set(f[0], Label(f[1]));
    }
    if (header) throw std::runtime_error("corrections file is empty (missing header)");
    return map;
}

CorrectionMap corrections_from(const std::vector<MislabelCandidate>& flagged) {
    CorrectionMap map;
    for (const auto& f : flagged) map.set(f.id, f.predicted);
    return map;
}

ReplayReport replay_corrections(const PredictionLog& log, const CorrectionMap& corrections,
                                const BinSpec& spec) {
    corrections.validate_against(log);
    ReplayReport rep;
    rep.rows.resize(spec.bins());
    for (std::size_t i = 0; i < spec.bins(); ++i) rep.rows[i].interval = spec.interval(i);

    for (const auto& r : log.records()) {
        ReplayRow& row = rep.rows[spec.index(r.top1().confidence)];
        ++row.count;
        const Label* gold = &r.gold;
        if (auto it = corrections.entries().find(r.id); it != corrections.entries().end()) {
            ++row.corrected_count;
            gold = &it->second;
        }
        if (r.top1().label != r.gold) ++row.errors_before;
        if (r.top1().label != *gold) ++row.errors_after;
    }
    for (auto& row : rep.rows) {
        row.accuracy_before = percent_of(row.count - row.errors_before, row.count);
        row.accuracy_after = percent_of(row.count - row.errors_after, row.count);
    }
    return rep;
}

AutoLabelResult simulate_autolabel(const PredictionLog& log, double tau) {
    require_tau(tau);
    if (log.empty()) throw std::invalid_argument("auto-label simulation needs a non-empty log");
    AutoLabelResult res;
    res.tau = tau;
    res.total = log.size();
    for (const auto& r : log.records()) {
        if (r.top1().confidence >= tau) {
            ++res.accepted;
            if (!r.top1_correct()) ++res.accepted_errors;
        }
    }
    res.coverage_pct = percent_of(res.accepted, res.total);
    res.residual_error_pct = percent_of(res.accepted_errors, res.accepted);
    res.none_accepted = res.accepted == 0;
    return res;
}

PairMiningResult mine_similar_pairs(const PredictionLog& log, const PairOptions& opts) {
    if (opts.depth < 2) throw std::invalid_argument("pair mining depth must be at least 2");
    if (opts.min_support < 1) throw std::invalid_argument("min_support must be at least 1");
    if (opts.runners_up < 1) throw std::invalid_argument("runners_up must be at least 1");

    struct Group {
        std::uint64_t support = 0;
        std::map<Label, double> mass;
    };
    std::map<Label, Group> groups;
    PairMiningResult res;

    for (const auto& r : log.records()) {
        const Label& key = opts.grouping == PairGrouping::by_top1 ? r.top1().label : r.gold;
        Group& g = groups[key];
        ++g.support;
        if (r.cands.size() < opts.depth) ++res.truncated;
        const std::size_t n = std::min(opts.depth, r.cands.size());
        for (std::size_t i = 0; i < n; ++i) g.mass[r.cands[i].label] += r.cands[i].confidence;
    }

    for (const auto& [category, g] : groups) {
        if (g.support < opts.min_support) continue;
        std::vector<std::pair<Label, double>> ranked;
        for (const auto& [label, score] : g.mass) {
            if (label != category && score > 0.0) ranked.emplace_back(label, score);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        const std::size_t n = std::min(opts.runners_up, ranked.size());
        for (std::size_t i = 0; i < n; ++i)
            res.pairs.push_back(SimilarPair{category, ranked[i].first, ranked[i].second, g.support});
    }

    std::sort(res.pairs.begin(), res.pairs.end(), [](const SimilarPair& a, const SimilarPair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.category != b.category) return a.category < b.category;
        return a.similar < b.similar;
    });
    return res;
}

std::vector<SimilarPair> symmetrize(const std::vector<SimilarPair>& pairs) {
    std::map<std::pair<Label, Label>, SimilarPair> best;
    for (const auto& p : pairs) {
        auto key = p.category < p.similar ? std::make_pair(p.category, p.similar)
                                          : std::make_pair(p.similar, p.category);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(std::move(key), p);
        } else if (p.score > it->second.score ||
                   (p.score == it->second.score && p.category < it->second.category)) {
            it->second = p;
        }
    }
    std::vector<SimilarPair> out;
    for (auto& [_, p] : best) out.push_back(p);
    std::sort(out.begin(), out.end(), [](const SimilarPair& a, const SimilarPair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.category != b.category) return a.category < b.category;
        return a.similar < b.similar;
    });
    return out;
}

}  // namespace confaudit
