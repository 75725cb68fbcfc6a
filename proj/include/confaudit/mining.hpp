#pragma once
// Knowledge mining over a prediction log: high-confidence disagreements
// (likely label errors), correction replay, low-confidence triage, auto-label
// policy simulation and confusable-pair discovery.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "confaudit/log_model.hpp"
#include "confaudit/stats.hpp"

namespace confaudit {

inline constexpr double kDefaultMislabelTau = 0.99;
inline constexpr double kDefaultLowConfTau = 0.2;
inline constexpr double kDefaultAutoLabelTau = 0.9999;
inline constexpr std::uint64_t kDefaultMinSupport = 3;

// One record surfaced by a confidence filter.
struct FlaggedSample {
    std::string id;
    Label gold;
    Label predicted;   // top-1
    double confidence = 0.0;

    friend bool operator==(const FlaggedSample&, const FlaggedSample&) = default;
};

using MislabelCandidate = FlaggedSample;

// Records with top-1 != gold and top-1 confidence >= tau, sorted by
// confidence descending then id ascending. Throws if tau is outside [0,1].
std::vector<MislabelCandidate> detect_mislabels(const PredictionLog& log, double tau);

// Records with top-1 confidence < tau, sorted ascending by confidence then id.
std::vector<FlaggedSample> extract_low_confidence(const PredictionLog& log, double tau);

// Externally adjudicated gold labels keyed by record id.
class CorrectionMap {
public:
    void set(std::string id, Label corrected);
    const std::map<std::string, Label>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    // Throws std::invalid_argument on an unknown id or a label equal to the
    // record's current gold.
    void validate_against(const PredictionLog& log) const;

private:
    std::map<std::string, Label> entries_;
};

// CSV with header `id,corrected_label`. Throws std::runtime_error naming the
// offending line.
CorrectionMap read_corrections_csv(std::istream& in);

// Maps each flagged id to its top-1 prediction.
CorrectionMap corrections_from(const std::vector<MislabelCandidate>& flagged);

struct ReplayRow {
    std::string interval;
    std::uint64_t count = 0;
    std::uint64_t errors_before = 0;
    std::uint64_t corrected_count = 0;   // records of this bin with a correction
    std::uint64_t errors_after = 0;
    Fixed accuracy_before;
    Fixed accuracy_after;
};

struct ReplayReport {
    std::vector<ReplayRow> rows;   // one per bin
};

ReplayReport replay_corrections(const PredictionLog& log, const CorrectionMap& corrections,
                                const BinSpec& spec = BinSpec::standard());

struct AutoLabelResult {
    double tau = 0.0;
    std::uint64_t total = 0;
    std::uint64_t accepted = 0;
    std::uint64_t accepted_errors = 0;
    Fixed coverage_pct;
    Fixed residual_error_pct;
    bool none_accepted = false;   // residual error reported as 0.00
};

// Accept every record whose top-1 confidence >= tau. Throws
// std::invalid_argument on an empty log.
AutoLabelResult simulate_autolabel(const PredictionLog& log, double tau);

enum class PairGrouping {
    by_top1,   // samples whose top-1 candidate is the category
    by_gold,   // samples whose gold label is the category
};

struct PairOptions {
    std::uint64_t min_support = kDefaultMinSupport;
    std::size_t depth = kMaxCandidates;   // candidates accumulated per record, >= 2
    std::size_t runners_up = 1;           // similar labels emitted per category
    PairGrouping grouping = PairGrouping::by_top1;
};

struct SimilarPair {
    Label category;
    Label similar;
    double score = 0.0;          // accumulated confidence of `similar`
    std::uint64_t support = 0;   // records grouped under `category`

    friend bool operator==(const SimilarPair&, const SimilarPair&) = default;
};

struct PairMiningResult {
    std::vector<SimilarPair> pairs;   // score descending, then category, similar
    std::uint64_t truncated = 0;      // grouped records listing fewer than depth candidates
};

// For each category with >= min_support grouped records, accumulates the
// confidences of the first `depth` candidates of every grouped record, ranks
// labels by accumulated confidence, and emits the best `runners_up` labels
// other than the category itself. Throws std::invalid_argument if depth < 2,
// min_support < 1 or runners_up < 1.
PairMiningResult mine_similar_pairs(const PredictionLog& log, const PairOptions& opts = {});

// Collapses (A,B)/(B,A) into one entry keeping the higher score.
std::vector<SimilarPair> symmetrize(const std::vector<SimilarPair>& pairs);

}  // namespace confaudit
