#pragma once
// Prediction-log data model: one record per classified sample, carrying the
// gold label and the ranked top-k candidates with their softmax confidences.
//
// Logs are stored as JSON lines (one record per line). Parsing validates every
// record invariant and reports violations with their 1-based line number.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace confaudit {

inline constexpr std::size_t kMaxCandidates = 10;
inline constexpr double kMassTolerance = 1e-6;

// Class label: a non-empty UTF-8 token without control characters or line
// breaks. Construction validates; a default-constructed Label is not valid and
// only exists so containers can hold values before assignment.
class Label {
public:
    Label() = default;
    explicit Label(std::string value);

    // Returns a description of what is wrong with `value`, or nullopt.
    static std::optional<std::string> check(std::string_view value);

    const std::string& str() const noexcept { return value_; }

    friend auto operator<=>(const Label&, const Label&) = default;
    friend bool operator==(const Label&, const Label&) = default;

private:
    std::string value_;
};

struct CandidateScore {
    Label label;
    double confidence = 0.0;

    friend bool operator==(const CandidateScore&, const CandidateScore&) = default;
};

struct PredictionRecord {
    std::string id;
    Label gold;
    std::vector<CandidateScore> cands;   // ranked, cands[0] is top-1
    std::optional<std::int64_t> strokes;
    std::optional<std::string> dataset;

    const CandidateScore& top1() const { return cands.front(); }
    bool top1_correct() const { return cands.front().label == gold; }

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// Every rule a record or log line can violate.
enum class Rule {
    malformed_json,
    missing_field,
    wrong_type,
    invalid_id,
    invalid_label,
    no_candidates,
    too_many_candidates,
    confidence_out_of_range,
    unsorted_candidates,
    duplicate_candidate,
    mass_exceeds_one,
    negative_strokes,
    duplicate_id,
};

std::string_view rule_name(Rule rule) noexcept;

struct Violation {
    Rule rule;
    std::string detail;
};

// Checks all per-record invariants (not id uniqueness, which is a log property).
std::optional<Violation> validate_record(const PredictionRecord& rec);

class PredictionLog {
public:
    PredictionLog() = default;

    // Throws std::invalid_argument naming the violated rule.
    void add(PredictionRecord rec);

    const std::vector<PredictionRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    bool contains_id(const std::string& id) const { return ids_.count(id) != 0; }
    const PredictionRecord* find(const std::string& id) const;

    // Labels that occur as gold or as any candidate, sorted.
    std::set<Label> classes() const;

    friend bool operator==(const PredictionLog& a, const PredictionLog& b) {
        return a.records_ == b.records_;
    }

private:
    std::vector<PredictionRecord> records_;
    std::unordered_map<std::string, std::size_t> ids_;  // id -> index
};

struct LineError {
    std::size_t line = 0;   // 1-based
    Rule rule = Rule::malformed_json;
    std::string message;
};

std::string format_line_error(const LineError& err);

struct ParseResult {
    PredictionLog log;               // empty when a strict parse failed
    std::vector<LineError> errors;   // at most one entry in strict mode
    std::size_t lines_read = 0;      // non-blank lines seen
    std::size_t unknown_fields = 0;  // ignored fields, counted as warnings

    bool ok() const noexcept { return errors.empty(); }
};

// Strict mode stops at the first violation and returns no records. Lenient
// mode skips violating lines and reports each one. Blank lines are ignored.
ParseResult parse_log(std::istream& source, bool strict);
ParseResult parse_log_string(std::string_view text, bool strict);

// Writes one JSON line per record, confidences at 17 significant digits so
// they parse back bit-exactly. Returns bytes written; throws
// std::runtime_error if the sink fails.
std::size_t write_log(const PredictionLog& log, std::ostream& sink);
std::string write_log_string(const PredictionLog& log);

// Single-record serialization shared by write_log.
std::string record_to_json_line(const PredictionRecord& rec);

}  // namespace confaudit

template <>
struct std::hash<confaudit::Label> {
    std::size_t operator()(const confaudit::Label& l) const noexcept {
        return std::hash<std::string>{}(l.str());
    }
};
