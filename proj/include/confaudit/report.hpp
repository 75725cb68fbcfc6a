#pragma once
// CSV and JSON renderings of every report. Output is a pure function of the
// report value: no timestamps, fixed column order, `\n` line endings.

#include <string>
#include <vector>

#include "confaudit/mining.hpp"
#include "confaudit/stats.hpp"

namespace confaudit::report {

enum class Format { csv, json };

// Shortest decimal that parses back to the same double.
std::string shortest(double v);

std::string bins(const BinReport& rep, Format fmt);
std::string topk(const TopKReport& rep, Format fmt);
std::string classes(const std::vector<ClassRow>& rows, Format fmt);
std::string flagged(const std::vector<FlaggedSample>& rows, Format fmt);
std::string pairs(const std::vector<SimilarPair>& rows, Format fmt);
std::string autolabel(const std::vector<AutoLabelResult>& rows, Format fmt);
std::string replay(const ReplayReport& rep, Format fmt);

// Header rows, exposed for schema checks.
inline constexpr const char* kBinsHeader = "interval,samples_pct,accuracy_pct,count,correct";
inline constexpr const char* kClassesHeader = "label,count,accuracy_pct,mean_confidence,mean_strokes";
inline constexpr const char* kFlaggedHeader = "id,gold,predicted,confidence";
inline constexpr const char* kPairsHeader = "category,similar,score,support";
inline constexpr const char* kAutoLabelHeader = "tau,coverage_pct,residual_error_pct,accepted";
inline constexpr const char* kReplayHeader =
    "interval,count,errors_before,corrected_count,errors_after,accuracy_before,accuracy_after";
std::string topk_header(const std::vector<int>& depths);

}  // namespace confaudit::report
