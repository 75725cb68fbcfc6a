#include "confaudit/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace confaudit {

namespace {

__extension__ using u128 = unsigned __int128;

std::int64_t pow10i(int d) {
    std::int64_t p = 1;
    while (d-- > 0) p *= 10;
    return p;
}

std::string edge_text(double e) {
    if (e == 0.0) return "0.0";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, e);
    return std::string(buf, res.ptr);
}

// -1 / 0 / +1 comparing correct_a/count_a with correct_b/count_b exactly.
int compare_ratio(std::uint64_t ca, std::uint64_t na, std::uint64_t cb, std::uint64_t nb) {
    const u128 lhs = static_cast<u128>(ca) * nb;
    const u128 rhs = static_cast<u128>(cb) * na;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

void add_topk(TopKStat& t, const std::vector<int>& depths, const PredictionRecord& rec) {
    ++t.total;
    std::size_t gold_rank = 0;  // 1-based, 0 = absent
    for (std::size_t r = 0; r < rec.cands.size(); ++r) {
        if (rec.cands[r].label == rec.gold) {
            gold_rank = r + 1;
            break;
        }
    }
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const auto d = static_cast<std::size_t>(depths[i]);
        if (gold_rank != 0 && gold_rank <= d) {
            ++t.hits[i];
        } else if (rec.cands.size() < d && gold_rank == 0) {
            ++t.skipped[i];
        }
    }
}

void merge_topk(TopKStat& into, const TopKStat& from) {
    into.total += from.total;
    for (std::size_t i = 0; i < into.hits.size(); ++i) {
        into.hits[i] += from.hits[i];
        into.skipped[i] += from.skipped[i];
    }
}

TopKRow topk_row(std::string name, const TopKStat& t) {
    TopKRow row;
    row.dataset = std::move(name);
    row.total = t.total;
    for (std::size_t i = 0; i < t.hits.size(); ++i) {
        row.rate_pct.push_back(percent_of(t.hits[i], t.considered(i)));
        row.skipped.push_back(t.skipped[i]);
    }
    return row;
}

}  // namespace

double Fixed::value() const noexcept {
    return static_cast<double>(scaled) / static_cast<double>(pow10i(decimals));
}

std::string Fixed::str() const {
    const std::int64_t p = pow10i(decimals);
    const std::uint64_t mag = scaled < 0 ? static_cast<std::uint64_t>(-(scaled + 1)) + 1
                                         : static_cast<std::uint64_t>(scaled);
    std::string s = scaled < 0 ? "-" : "";
    s += std::to_string(mag / static_cast<std::uint64_t>(p));
    if (decimals > 0) {
        std::string frac = std::to_string(mag % static_cast<std::uint64_t>(p));
        s += '.';
        s += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0');
        s += frac;
    }
    return s;
}

Fixed percent_of(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return Fixed{0, 2};
    // round(10000 * num / den), half up; all quantities are non-negative.
    const u128 n = static_cast<u128>(num) * 20000 + den;
    const u128 q = n / (static_cast<u128>(den) * 2);
    return Fixed{static_cast<std::int64_t>(q), 2};
}

Fixed round_fixed(double value, int decimals) {
    return Fixed{std::llround(value * static_cast<double>(pow10i(decimals))), decimals};
}

BinSpec::BinSpec(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw std::invalid_argument("bin spec needs at least two edges");
    if (edges_.front() != 0.0) throw std::invalid_argument("bin spec must start at 0.0");
    if (edges_.back() != 1.0) throw std::invalid_argument("bin spec must end at 1.0");
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (!(edges_[i] > edges_[i - 1]))
            throw std::invalid_argument("bin edges must be strictly increasing");
    }
}

BinSpec BinSpec::standard() {
    return BinSpec({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.98, 0.99,
                    0.999, 0.9999, 1.0});
}

std::size_t BinSpec::index(double conf) const {
    if (!(conf >= 0.0 && conf <= 1.0))
        throw std::out_of_range("confidence " + std::to_string(conf) + " outside [0,1]");
    if (conf == 1.0) return bins() - 1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), conf);
    return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

std::string BinSpec::interval(std::size_t bin) const {
    if (bin >= bins()) throw std::out_of_range("bin index out of range");
    const char close = bin + 1 == bins() ? ']' : ')';
    return "[" + edge_text(edges_[bin]) + "," + edge_text(edges_[bin + 1]) + close;
}

std::size_t bin_index(double conf, const BinSpec& spec) { return spec.index(conf); }

StatsAccumulator::StatsAccumulator(BinSpec spec, std::vector<int> depths)
    : spec_(std::move(spec)), depths_(std::move(depths)), bins_(spec_.bins()) {
    if (depths_.empty()) throw std::invalid_argument("depth set is empty");
    for (std::size_t i = 0; i < depths_.size(); ++i) {
        if (depths_[i] < 1 || depths_[i] > static_cast<int>(kMaxCandidates))
            throw std::invalid_argument("depths must lie in 1..10");
        if (i > 0 && depths_[i] <= depths_[i - 1])
            throw std::invalid_argument("depths must be strictly increasing");
    }
    topk_ = empty_topk();
}

TopKStat StatsAccumulator::empty_topk() const {
    TopKStat t;
    t.hits.assign(depths_.size(), 0);
    t.skipped.assign(depths_.size(), 0);
    return t;
}

void StatsAccumulator::add(const PredictionRecord& rec) {
    const CandidateScore& top = rec.top1();
    const bool correct = top.label == rec.gold;

    BinStat& b = bins_[spec_.index(top.confidence)];
    ++b.count;
    b.correct += correct ? 1 : 0;

    add_topk(topk_, depths_, rec);
    const std::string& tag = rec.dataset ? *rec.dataset : kUntaggedDataset;
    auto [it, inserted] = by_dataset_.try_emplace(tag);
    if (inserted) it->second = empty_topk();
    add_topk(it->second, depths_, rec);

    ClassStat& c = classes_[rec.gold];
    ++c.count;
    c.correct += correct ? 1 : 0;
    c.conf_sum += top.confidence;
    if (rec.strokes) {
        c.stroke_sum += static_cast<double>(*rec.strokes);
        ++c.stroke_n;
    }
}

void StatsAccumulator::add(const PredictionLog& log) {
    for (const auto& r : log.records()) add(r);
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    if (!(spec_ == other.spec_)) throw std::invalid_argument("merge: bin specs differ");
    if (depths_ != other.depths_) throw std::invalid_argument("merge: depth sets differ");
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        bins_[i].count += other.bins_[i].count;
        bins_[i].correct += other.bins_[i].correct;
    }
    merge_topk(topk_, other.topk_);
    for (const auto& [tag, t] : other.by_dataset_) {
        auto [it, inserted] = by_dataset_.try_emplace(tag);
        if (inserted) it->second = empty_topk();
        merge_topk(it->second, t);
    }
    for (const auto& [label, s] : other.classes_) {
        ClassStat& c = classes_[label];
        c.count += s.count;
        c.correct += s.correct;
        c.conf_sum += s.conf_sum;
        c.stroke_sum += s.stroke_sum;
        c.stroke_n += s.stroke_n;
    }
}

StatsAccumulator merge(StatsAccumulator a, const StatsAccumulator& b) {
    a.merge(b);
    return a;
}

BinReport report_bins(const StatsAccumulator& acc) {
    BinReport rep;
    rep.total = acc.total();
    rep.no_data = rep.total == 0;
    for (std::size_t i = 0; i < acc.bins().size(); ++i) {
        const BinStat& b = acc.bins()[i];
        BinRow row;
        row.interval = acc.spec().interval(i);
        row.count = b.count;
        row.correct = b.correct;
        row.samples_pct = percent_of(b.count, rep.total);
        row.accuracy_pct = percent_of(b.correct, b.count);
        row.empty = b.count == 0;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

TopKReport report_topk(const StatsAccumulator& acc) {
    TopKReport rep;
    rep.depths = acc.depths();
    for (const auto& [tag, t] : acc.topk_by_dataset()) rep.rows.push_back(topk_row(tag, t));
    rep.rows.push_back(topk_row(kPooledAverageRow, acc.topk()));
    return rep;
}

std::vector<ClassRow> report_classes(const StatsAccumulator& acc, ClassOrder order, std::size_t limit,
                                     std::uint64_t min_count) {
    std::vector<ClassRow> rows;
    for (const auto& [label, c] : acc.classes()) {
        if (c.count < min_count || c.count == 0) continue;
        ClassRow row;
        row.label = label;
        row.count = c.count;
        row.correct = c.correct;
        row.accuracy_pct = percent_of(c.correct, c.count);
        row.mean_confidence = round_fixed(c.conf_sum / static_cast<double>(c.count), 4);
        if (c.stroke_n > 0)
            row.mean_strokes = round_fixed(c.stroke_sum / static_cast<double>(c.stroke_n), 1);
        rows.push_back(std::move(row));
    }

    const auto& classes = acc.classes();
    auto mean_conf = [&](const ClassRow& r) {
        const ClassStat& c = classes.at(r.label);
        return c.conf_sum / static_cast<double>(c.count);
    };
    const int dir = order == ClassOrder::descending ? -1 : 1;
    std::sort(rows.begin(), rows.end(), [&](const ClassRow& a, const ClassRow& b) {
        const int acc_cmp = compare_ratio(a.correct, a.count, b.correct, b.count);
        if (acc_cmp != 0) return acc_cmp == -dir;
        const double ma = mean_conf(a), mb = mean_conf(b);
        if (ma != mb) return dir < 0 ? ma > mb : ma < mb;
        return a.label < b.label;
    });
    if (limit > 0 && rows.size() > limit) rows.resize(limit);
    return rows;
}

}  // namespace confaudit
