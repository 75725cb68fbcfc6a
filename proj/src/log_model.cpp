#include "confaudit/log_model.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace confaudit {

namespace {

using nlohmann::json;

// Decodes one UTF-8 code point starting at s[i]; advances i. Returns -1 on a
// malformed sequence.
long next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    long cp = 0;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return -1;
    }
    if (i + len > s.size()) return -1;
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return -1;
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr long kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return -1;
    i += len;
    return cp;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::optional<Violation> check_text_token(std::string_view v, Rule rule, std::string_view what) {
    if (auto why = Label::check(v)) return Violation{rule, std::string(what) + " " + *why};
    return std::nullopt;
}

struct LineOutcome {
    std::optional<PredictionRecord> record;
    std::optional<Violation> violation;
    std::size_t unknown_fields = 0;
};

LineOutcome parse_line(std::string_view line) {
    LineOutcome out;
    json j;
    try {
        j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
        out.violation = Violation{Rule::malformed_json, std::string("malformed JSON: ") + e.what()};
        return out;
    }
    if (!j.is_object()) {
        out.violation = Violation{Rule::malformed_json, "record is not a JSON object"};
        return out;
    }
    auto fail = [&](Rule r, std::string msg) {
        out.violation = Violation{r, std::move(msg)};
        return out;
    };

    for (const auto& [key, _] : j.items()) {
        if (key != "id" && key != "gold" && key != "cands" && key != "strokes" && key != "dataset")
            ++out.unknown_fields;
    }

    PredictionRecord rec;
    for (const char* field : {"id", "gold", "cands"}) {
        if (!j.contains(field)) return fail(Rule::missing_field, std::string("missing field \"") + field + "\"");
    }
    if (!j["id"].is_string()) return fail(Rule::wrong_type, "\"id\" must be a string");
    rec.id = j["id"].get<std::string>();
    if (auto v = check_text_token(rec.id, Rule::invalid_id, "id")) return fail(v->rule, v->detail);

    if (!j["gold"].is_string()) return fail(Rule::wrong_type, "\"gold\" must be a string");
    {
        auto g = j["gold"].get<std::string>();
        if (auto why = Label::check(g)) return fail(Rule::invalid_label, "gold label " + *why);
        rec.gold = Label(std::move(g));
    }

    const json& cands = j["cands"];
    if (!cands.is_array()) return fail(Rule::wrong_type, "\"cands\" must be an array");
    for (const json& c : cands) {
        if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_number())
            return fail(Rule::wrong_type, "each candidate must be [<string>, <number>]");
        auto l = c[0].get<std::string>();
        if (auto why = Label::check(l)) return fail(Rule::invalid_label, "candidate label " + *why);
        rec.cands.push_back(CandidateScore{Label(std::move(l)), c[1].get<double>()});
    }

    if (j.contains("strokes")) {
        const json& s = j["strokes"];
        if (s.is_number_unsigned()) {
            if (s.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
                return fail(Rule::wrong_type, "\"strokes\" out of range");
            rec.strokes = static_cast<std::int64_t>(s.get<std::uint64_t>());
        } else if (s.is_number_integer()) {
            rec.strokes = s.get<std::int64_t>();
        } else {
            return fail(Rule::wrong_type, "\"strokes\" must be an integer");
        }
    }
    if (j.contains("dataset")) {
        if (!j["dataset"].is_string()) return fail(Rule::wrong_type, "\"dataset\" must be a string");
        rec.dataset = j["dataset"].get<std::string>();
    }

    if (auto v = validate_record(rec)) {
        out.violation = std::move(v);
        return out;
    }
    out.record = std::move(rec);
    return out;
}

}  // namespace

Label::Label(std::string value) : value_(std::move(value)) {
    if (auto why = check(value_)) throw std::invalid_argument("invalid label: " + *why);
}

std::optional<std::string> Label::check(std::string_view value) {
    if (value.empty()) return "is empty";
    std::size_t i = 0;
    while (i < value.size()) {
        const long cp = next_code_point(value, i);
        if (cp < 0) return "is not valid UTF-8";
        if (cp < 0x20 || (cp >= 0x7F && cp <= 0x9F) || cp == 0x2028 || cp == 0x2029)
            return "contains a control character or line break";
    }
    return std::nullopt;
}

std::string_view rule_name(Rule rule) noexcept {
    switch (rule) {
        case Rule::malformed_json: return "malformed_json";
        case Rule::missing_field: return "missing_field";
        case Rule::wrong_type: return "wrong_type";
        case Rule::invalid_id: return "invalid_id";
        case Rule::invalid_label: return "invalid_label";
        case Rule::no_candidates: return "no_candidates";
        case Rule::too_many_candidates: return "too_many_candidates";
        case Rule::confidence_out_of_range: return "confidence_out_of_range";
        case Rule::unsorted_candidates: return "unsorted_candidates";
        case Rule::duplicate_candidate: return "duplicate_candidate";
        case Rule::mass_exceeds_one: return "mass_exceeds_one";
        case Rule::negative_strokes: return "negative_strokes";
        case Rule::duplicate_id: return "duplicate_id";
    }
    return "unknown";
}

std::optional<Violation> validate_record(const PredictionRecord& rec) {
    if (auto v = check_text_token(rec.id, Rule::invalid_id, "id")) return v;
    if (auto why = Label::check(rec.gold.str())) return Violation{Rule::invalid_label, "gold label " + *why};
    if (rec.cands.empty()) return Violation{Rule::no_candidates, "candidate list is empty"};
    if (rec.cands.size() > kMaxCandidates)
        return Violation{Rule::too_many_candidates,
                         "more than 10 candidates (" + std::to_string(rec.cands.size()) + ")"};
    double mass = 0.0;
    for (std::size_t i = 0; i < rec.cands.size(); ++i) {
        const auto& c = rec.cands[i];
        if (auto why = Label::check(c.label.str()))
            return Violation{Rule::invalid_label, "candidate label " + *why};
        if (!(c.confidence >= 0.0 && c.confidence <= 1.0))
            return Violation{Rule::confidence_out_of_range,
                             "confidence " + short_number(c.confidence) + " outside [0,1]"};
        if (i > 0 && c.confidence > rec.cands[i - 1].confidence)
            return Violation{Rule::unsorted_candidates, "candidates not sorted non-increasing"};
        for (std::size_t k = 0; k < i; ++k) {
            if (rec.cands[k].label == c.label)
                return Violation{Rule::duplicate_candidate, "duplicate candidate label \"" + c.label.str() + "\""};
        }
        mass += c.confidence;
    }
    if (mass > 1.0 + kMassTolerance)
        return Violation{Rule::mass_exceeds_one, "confidence mass exceeds 1 (sum " + short_number(mass) + ")"};
    if (rec.strokes && *rec.strokes < 0)
        return Violation{Rule::negative_strokes, "stroke count is negative"};
    if (rec.dataset) {
        if (auto why = Label::check(*rec.dataset))
            return Violation{Rule::wrong_type, "dataset tag " + *why};
    }
    return std::nullopt;
}

void PredictionLog::add(PredictionRecord rec) {
    if (auto v = validate_record(rec))
        throw std::invalid_argument(std::string(rule_name(v->rule)) + ": " + v->detail);
    if (ids_.count(rec.id))
        throw std::invalid_argument("duplicate_id: duplicate id \"" + rec.id + "\"");
    ids_.emplace(rec.id, records_.size());
    records_.push_back(std::move(rec));
}

const PredictionRecord* PredictionLog::find(const std::string& id) const {
    const auto it = ids_.find(id);
    return it == ids_.end() ? nullptr : &records_[it->second];
}

std::set<Label> PredictionLog::classes() const {
    std::set<Label> out;
    for (const auto& r : records_) {
        out.insert(r.gold);
        for (const auto& c : r.cands) out.insert(c.label);
    }
    return out;
}

std::string format_line_error(const LineError& err) {
    return "line " + std::to_string(err.line) + ": " + err.message + " [" + std::string(rule_name(err.rule)) + "]";
}

ParseResult parse_log(std::istream& source, bool strict) {
    ParseResult result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++result.lines_read;

        LineOutcome o = parse_line(line);
        result.unknown_fields += o.unknown_fields;
        if (o.record && result.log.contains_id(o.record->id)) {
            o.violation = Violation{Rule::duplicate_id, "duplicate id \"" + o.record->id + "\""};
            o.record.reset();
        }
        if (o.violation) {
            result.errors.push_back(LineError{lineno, o.violation->rule, o.violation->detail});
            if (strict) {
                result.log = PredictionLog{};
                return result;
            }
            continue;
        }
        result.log.add(std::move(*o.record));
    }
    return result;
}

ParseResult parse_log_string(std::string_view text, bool strict) {
    std::istringstream in{std::string(text)};
    return parse_log(in, strict);
}

std::string record_to_json_line(const PredictionRecord& rec) {
    std::string s;
    s.reserve(64 + rec.cands.size() * 32);
    s += "{\"id\":";
    s += json(rec.id).dump();
    s += ",\"gold\":";
    s += json(rec.gold.str()).dump();
    s += ",\"cands\":[";
    for (std::size_t i = 0; i < rec.cands.size(); ++i) {
        if (i) s += ',';
        s += '[';
        s += json(rec.cands[i].label.str()).dump();
        s += ',';
        s += format_number(rec.cands[i].confidence);
        s += ']';
    }
    s += ']';
    if (rec.strokes) {
        s += ",\"strokes\":";
        s += std::to_string(*rec.strokes);
    }
    if (rec.dataset) {
        s += ",\"dataset\":";
        s += json(*rec.dataset).dump();
    }
    s += "}\n";
    return s;
}

std::size_t write_log(const PredictionLog& log, std::ostream& sink) {
    std::size_t bytes = 0;
    for (const auto& rec : log.records()) {
        const std::string line = record_to_json_line(rec);
        sink.write(line.data(), static_cast<std::streamsize>(line.size()));
        if (!sink) throw std::runtime_error("write_log: sink write failed");
        bytes += line.size();
    }
    sink.flush();
    if (!sink) throw std::runtime_error("write_log: sink flush failed");
    return bytes;
}

std::string write_log_string(const PredictionLog& log) {
    std::ostringstream out;
    write_log(log, out);
    return out.str();
}

}  // namespace confaudit
