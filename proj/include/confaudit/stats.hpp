#pragma once
// Mergeable single-pass statistics over prediction logs:
//   - confidence histogram with per-bin top-1 accuracy,
//   - top-k recognition rates, pooled and per dataset tag,
//   - per-class accuracy / mean confidence / mean stroke count.
//
// Accumulators are plain values. Shard records across several accumulators and
// merge() them; the result equals a single pass (counts exactly, sums up to
// floating-point reassociation).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "confaudit/log_model.hpp"

namespace confaudit {

// Fixed-point decimal produced by the report rounding rule
// (half away from zero). `scaled` is the value times 10^decimals.
struct Fixed {
    std::int64_t scaled = 0;
    int decimals = 2;

    double value() const noexcept;
    std::string str() const;

    friend bool operator==(const Fixed&, const Fixed&) = default;
};

// 100 * num / den rounded to two decimals using exact integer arithmetic.
Fixed percent_of(std::uint64_t num, std::uint64_t den);
Fixed round_fixed(double value, int decimals);

// Left-closed, right-open confidence intervals; the last interval is closed.
class BinSpec {
public:
    // Throws std::invalid_argument unless edges are strictly increasing from
    // 0.0 to 1.0 with at least one interval.
    explicit BinSpec(std::vector<double> edges);

    // 0, .1, .2, .3, .4, .5, .6, .7, .8, .9, .95, .97, .98, .99, .999, .9999, 1
    static BinSpec standard();

    std::size_t bins() const noexcept { return edges_.size() - 1; }
    const std::vector<double>& edges() const noexcept { return edges_; }

    // Throws std::out_of_range if conf is outside [0,1] (or NaN).
    std::size_t index(double conf) const;

    // "[0.95,0.97)", "[0.9999,1]", "[0.0,0.1)".
    std::string interval(std::size_t bin) const;

    friend bool operator==(const BinSpec&, const BinSpec&) = default;

private:
    std::vector<double> edges_;
};

std::size_t bin_index(double conf, const BinSpec& spec);

struct BinStat {
    std::uint64_t count = 0;
    std::uint64_t correct = 0;

    friend bool operator==(const BinStat&, const BinStat&) = default;
};

inline const std::vector<int> kStandardDepths = {1, 2, 3, 5, 10};

// hits[i] counts records whose gold label occurs within the first depths[i]
// candidates. A record listing fewer than depths[i] candidates without the
// gold among them cannot be decided at that depth and goes to skipped[i]
// instead. Rates use total - skipped[i] as denominator.
struct TopKStat {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> hits;
    std::vector<std::uint64_t> skipped;

    std::uint64_t considered(std::size_t i) const { return total - skipped[i]; }

    friend bool operator==(const TopKStat&, const TopKStat&) = default;
};

struct ClassStat {
    std::uint64_t count = 0;
    std::uint64_t correct = 0;
    double conf_sum = 0.0;    // sum of top-1 confidences
    double stroke_sum = 0.0;
    std::uint64_t stroke_n = 0;

    friend bool operator==(const ClassStat&, const ClassStat&) = default;
};

class StatsAccumulator {
public:
    explicit StatsAccumulator(BinSpec spec = BinSpec::standard(),
                              std::vector<int> depths = kStandardDepths);

    void add(const PredictionRecord& rec);
    void add(const PredictionLog& log);

    // Field-wise sum. Throws std::invalid_argument if the bin spec or depth
    // set differs.
    void merge(const StatsAccumulator& other);

    const BinSpec& spec() const noexcept { return spec_; }
    const std::vector<int>& depths() const noexcept { return depths_; }
    std::uint64_t total() const noexcept { return topk_.total; }
    const std::vector<BinStat>& bins() const noexcept { return bins_; }
    const TopKStat& topk() const noexcept { return topk_; }
    const std::map<std::string, TopKStat>& topk_by_dataset() const noexcept { return by_dataset_; }
    const std::map<Label, ClassStat>& classes() const noexcept { return classes_; }

    friend bool operator==(const StatsAccumulator&, const StatsAccumulator&) = default;

private:
    TopKStat empty_topk() const;

    BinSpec spec_;
    std::vector<int> depths_;
    std::vector<BinStat> bins_;
    TopKStat topk_;
    std::map<std::string, TopKStat> by_dataset_;
    std::map<Label, ClassStat> classes_;
};

StatsAccumulator merge(StatsAccumulator a, const StatsAccumulator& b);

inline const std::string kUntaggedDataset = "(untagged)";
inline const std::string kPooledAverageRow = "Average(pooled)";

struct BinRow {
    std::string interval;
    std::uint64_t count = 0;
    std::uint64_t correct = 0;
    Fixed samples_pct;
    Fixed accuracy_pct;
    bool empty = false;   // count == 0; accuracy reported as 0.00
};

struct BinReport {
    bool no_data = true;  // accumulator saw no records
    std::uint64_t total = 0;
    std::vector<BinRow> rows;
};

BinReport report_bins(const StatsAccumulator& acc);

struct TopKRow {
    std::string dataset;
    std::uint64_t total = 0;
    std::vector<Fixed> rate_pct;          // one per depth
    std::vector<std::uint64_t> skipped;   // one per depth
};

struct TopKReport {
    std::vector<int> depths;
    std::vector<TopKRow> rows;   // per dataset tag (sorted), then the pooled row
    std::string average_weighting = "pooled over all records";
};

TopKReport report_topk(const StatsAccumulator& acc);

enum class ClassOrder { ascending, descending };

struct ClassRow {
    Label label;
    std::uint64_t count = 0;
    std::uint64_t correct = 0;
    Fixed accuracy_pct;
    Fixed mean_confidence;               // 4 decimals
    std::optional<Fixed> mean_strokes;   // 1 decimal, absent without stroke data
};

// Classes with count >= min_count, ordered by accuracy (ties: mean confidence
// in the same direction, then label ascending). limit == 0 keeps all rows.
std::vector<ClassRow> report_classes(const StatsAccumulator& acc, ClassOrder order,
                                     std::size_t limit = 0, std::uint64_t min_count = 1);

}  // namespace confaudit
