#include "confaudit/report.hpp"

#include <charconv>
#include <stdexcept>

#include "confaudit/csv.hpp"
#include "json.hpp"

namespace confaudit {

namespace csv {

std::string quote(std::string_view field) {
    std::string s = "\"";
    for (char ch : field) {
        if (ch == '"') s += '"';
        s += ch;
    }
    s += '"';
    return s;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted) throw std::runtime_error("unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace csv

namespace report {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

double num(const Fixed& f) { return f.value(); }

}  // namespace

std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string topk_header(const std::vector<int>& depths) {
    std::string h = "dataset";
    for (int d : depths) h += ",top" + std::to_string(d);
    h += ",total";
    for (int d : depths) h += ",skipped_top" + std::to_string(d);
    return h;
}

std::string bins(const BinReport& rep, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j;
        j["no_data"] = rep.no_data;
        j["total"] = rep.total;
        j["rows"] = ordered_json::array();
        for (const auto& r : rep.rows) {
            j["rows"].push_back({{"interval", r.interval},
                                 {"samples_pct", num(r.samples_pct)},
                                 {"accuracy_pct", num(r.accuracy_pct)},
                                 {"count", r.count},
                                 {"correct", r.correct},
                                 {"empty", r.empty}});
        }
        return dump(j);
    }
    std::string s = std::string(kBinsHeader) + "\n";
    for (const auto& r : rep.rows) {
        s += csv::quote(r.interval) + "," + r.samples_pct.str() + "," + r.accuracy_pct.str() + "," +
             std::to_string(r.count) + "," + std::to_string(r.correct) + "\n";
    }
    return s;
}

std::string topk(const TopKReport& rep, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j;
        j["depths"] = rep.depths;
        j["average_weighting"] = rep.average_weighting;
        j["rows"] = ordered_json::array();
        for (const auto& r : rep.rows) {
            ordered_json row;
            row["dataset"] = r.dataset;
            for (std::size_t i = 0; i < rep.depths.size(); ++i)
                row["top" + std::to_string(rep.depths[i])] = num(r.rate_pct[i]);
            row["total"] = r.total;
            for (std::size_t i = 0; i < rep.depths.size(); ++i)
                row["skipped_top" + std::to_string(rep.depths[i])] = r.skipped[i];
            j["rows"].push_back(std::move(row));
        }
        return dump(j);
    }
    std::string s = topk_header(rep.depths) + "\n";
    for (const auto& r : rep.rows) {
        s += csv::quote(r.dataset);
        for (const auto& f : r.rate_pct) s += "," + f.str();
        s += "," + std::to_string(r.total);
        for (auto k : r.skipped) s += "," + std::to_string(k);
        s += "\n";
    }
    return s;
}

std::string classes(const std::vector<ClassRow>& rows, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json row{{"label", r.label.str()},
                             {"count", r.count},
                             {"accuracy_pct", num(r.accuracy_pct)},
                             {"mean_confidence", num(r.mean_confidence)}};
            row["mean_strokes"] = r.mean_strokes ? ordered_json(num(*r.mean_strokes)) : ordered_json(nullptr);
            j.push_back(std::move(row));
        }
        return dump(j);
    }
    std::string s = std::string(kClassesHeader) + "\n";
    for (const auto& r : rows) {
        s += csv::quote(r.label.str()) + "," + std::to_string(r.count) + "," + r.accuracy_pct.str() + "," +
             r.mean_confidence.str() + "," + (r.mean_strokes ? r.mean_strokes->str() : "") + "\n";
    }
    return s;
}

std::string flagged(const std::vector<FlaggedSample>& rows, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) {
            j.push_back({{"id", r.id},
                         {"gold", r.gold.str()},
                         {"predicted", r.predicted.str()},
                         {"confidence", r.confidence}});
        }
        return dump(j);
    }
    std::string s = std::string(kFlaggedHeader) + "\n";
    for (const auto& r : rows) {
        s += csv::quote(r.id) + "," + csv::quote(r.gold.str()) + "," + csv::quote(r.predicted.str()) + "," +
             shortest(r.confidence) + "\n";
    }
    return s;
}

std::string pairs(const std::vector<SimilarPair>& rows, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) {
            j.push_back({{"category", r.category.str()},
                         {"similar", r.similar.str()},
                         {"score", r.score},
                         {"support", r.support}});
        }
        return dump(j);
    }
    std::string s = std::string(kPairsHeader) + "\n";
    for (const auto& r : rows) {
        s += csv::quote(r.category.str()) + "," + csv::quote(r.similar.str()) + "," + shortest(r.score) + "," +
             std::to_string(r.support) + "\n";
    }
    return s;
}

std::string autolabel(const std::vector<AutoLabelResult>& rows, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) {
            j.push_back({{"tau", r.tau},
                         {"coverage_pct", num(r.coverage_pct)},
                         {"residual_error_pct", num(r.residual_error_pct)},
                         {"accepted", r.accepted},
                         {"none_accepted", r.none_accepted}});
        }
        return dump(j);
    }
    std::string s = std::string(kAutoLabelHeader) + "\n";
    for (const auto& r : rows) {
        s += shortest(r.tau) + "," + r.coverage_pct.str() + "," + r.residual_error_pct.str() + "," +
             std::to_string(r.accepted) + "\n";
    }
    return s;
}

std::string replay(const ReplayReport& rep, Format fmt) {
    if (fmt == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rep.rows) {
            j.push_back({{"interval", r.interval},
                         {"count", r.count},
                         {"errors_before", r.errors_before},
                         {"corrected_count", r.corrected_count},
                         {"errors_after", r.errors_after},
                         {"accuracy_before", num(r.accuracy_before)},
                         {"accuracy_after", num(r.accuracy_after)}});
        }
        return dump(j);
    }
    std::string s = std::string(kReplayHeader) + "\n";
    for (const auto& r : rep.rows) {
        s += csv::quote(r.interval) + "," + std::to_string(r.count) + "," + std::to_string(r.errors_before) + "," +
             std::to_string(r.corrected_count) + "," + std::to_string(r.errors_after) + "," +
             r.accuracy_before.str() + "," + r.accuracy_after.str() + "\n";
    }
    return s;
}

}  // namespace report
}  // namespace confaudit
