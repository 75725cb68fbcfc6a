#include "confaudit/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "confaudit/csv.hpp"
#include "confaudit/log_model.hpp"
#include "confaudit/mining.hpp"
#include "confaudit/report.hpp"
#include "confaudit/stats.hpp"
#include "confaudit/synth.hpp"
#include "json.hpp"

#ifndef CONFAUDIT_VERSION
#define CONFAUDIT_VERSION "dev"
#endif

namespace confaudit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    std::vector<double> bins;   // empty: standard spec
    double tau_mislabel = kDefaultMislabelTau;
    double tau_lowconf = kDefaultLowConfTau;
    double tau_autolabel = kDefaultAutoLabelTau;
    std::vector<double> sweep;
    std::size_t depth = kMaxCandidates;
    std::uint64_t min_support = kDefaultMinSupport;
    bool strict = false;
    std::string format = "csv";

    std::size_t jobs = 1;
    std::string class_order = "desc";
    std::size_t class_limit = 0;
    std::uint64_t min_count = 1;

    std::size_t runners_up = 1;
    std::string group_by = "top1";
    bool symmetric = false;

    std::string corrections;

    synth::DemoConfig demo;
};

bool use_color(std::ostream& err) {
    if (std::getenv("CONFAUDIT_NO_COLOR") != nullptr) return false;
    return &err == &std::cerr && ::isatty(STDERR_FILENO);
}

void diag(std::ostream& err, const char* level, const std::string& msg) {
    const bool color = use_color(err);
    const bool is_error = std::string_view(level) == "error";
    if (color) err << (is_error ? "\033[31m" : "\033[33m");
    err << level << ":";
    if (color) err << "\033[0m";
    err << " " << msg << "\n";
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 0xF];
    }
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open input \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct FileDigest {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
};

// Writes report files into the output directory and remembers their digests.
class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw UsageError("cannot create output directory \"" + dir_.string() + "\": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) throw std::runtime_error("failed to write \"" + p.string() + "\"");
        written_.push_back(FileDigest{name, sha256_hex(content), content.size()});
    }

    const std::vector<FileDigest>& written() const noexcept { return written_; }
    const fs::path& path() const noexcept { return dir_; }

private:
    fs::path dir_;
    std::vector<FileDigest> written_;
};

struct Loaded {
    PredictionLog log;
    std::vector<FileDigest> inputs;
    std::size_t records = 0;
    std::size_t bad_lines = 0;
    std::size_t unknown_fields = 0;
};

Loaded load_inputs(const RunConfig& cfg, std::ostream& err) {
    if (cfg.inputs.empty()) throw UsageError("no input log given");
    Loaded out;
    const bool qualify_ids = cfg.inputs.size() > 1;
    for (const auto& path : cfg.inputs) {
        const std::string text = read_file(path);
        out.inputs.push_back(FileDigest{path, sha256_hex(text), text.size()});
        ParseResult pr = parse_log_string(text, cfg.strict);
        out.unknown_fields += pr.unknown_fields;
        if (!pr.ok()) {
            out.bad_lines += pr.errors.size();
            std::size_t shown = 0;
            for (const auto& e : pr.errors) {
                if (shown++ == 20) {
                    diag(err, "warning", path + ": " + std::to_string(pr.errors.size() - 20) + " more bad lines");
                    break;
                }
                diag(err, cfg.strict ? "error" : "warning", path + ": " + format_line_error(e));
            }
            if (cfg.strict) throw ValidationError(path + ": strict validation failed");
        }
        const std::string stem = fs::path(path).stem().string();
        for (const auto& r : pr.log.records()) {
            PredictionRecord rec = r;
            if (!rec.dataset) rec.dataset = stem;
            if (qualify_ids) rec.id = stem + ":" + rec.id;
            if (out.log.contains_id(rec.id))
                throw ValidationError("duplicate record id \"" + rec.id + "\" while pooling inputs");
            out.log.add(std::move(rec));
        }
    }
    if (out.unknown_fields > 0)
        diag(err, "warning", std::to_string(out.unknown_fields) + " unknown field(s) ignored");
    out.records = out.log.size();
    return out;
}

report::Format format_of(const RunConfig& cfg) {
    return cfg.format == "json" ? report::Format::json : report::Format::csv;
}

std::string ext(const RunConfig& cfg) { return cfg.format == "json" ? ".json" : ".csv"; }

BinSpec bin_spec(const RunConfig& cfg) {
    if (cfg.bins.empty()) return BinSpec::standard();
    try {
        return BinSpec(cfg.bins);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--bins: ") + e.what());
    }
}

void check_tau(const char* flag, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError(std::string(flag) + " must be in [0,1]");
}

ordered_json config_json(const RunConfig& cfg) {
    ordered_json j;
    j["command"] = cfg.command;
    j["inputs"] = cfg.inputs;
    j["out_dir"] = cfg.out_dir;
    j["format"] = cfg.format;
    j["strict"] = cfg.strict;
    j["bins"] = cfg.bins.empty() ? BinSpec::standard().edges() : cfg.bins;
    j["tau_mislabel"] = cfg.tau_mislabel;
    j["tau_lowconf"] = cfg.tau_lowconf;
    j["tau_autolabel"] = cfg.tau_autolabel;
    j["sweep"] = cfg.sweep;
    j["depth"] = cfg.depth;
    j["min_support"] = cfg.min_support;
    j["jobs"] = cfg.jobs;
    j["class_order"] = cfg.class_order;
    j["class_limit"] = cfg.class_limit;
    j["min_count"] = cfg.min_count;
    j["runners_up"] = cfg.runners_up;
    j["group_by"] = cfg.group_by;
    j["symmetric"] = cfg.symmetric;
    if (!cfg.corrections.empty()) j["corrections"] = cfg.corrections;
    if (cfg.command == "demo") {
        const auto& s = cfg.demo.spec;
        j["demo"] = {{"seed", s.seed},
                     {"classes", s.classes},
                     {"side", s.side},
                     {"samples_per_class", s.samples_per_class},
                     {"noise", s.noise},
                     {"flip_fraction", s.flip_fraction},
                     {"epochs", cfg.demo.train.epochs},
                     {"learning_rate", cfg.demo.train.learning_rate},
                     {"train_multiplier", cfg.demo.train_multiplier},
                     {"depth", cfg.demo.depth}};
    }
    return j;
}

void write_manifest(OutputDir& out, const RunConfig& cfg, const std::vector<std::string>& args,
                    const std::vector<FileDigest>& inputs, const ordered_json& extra) {
    ordered_json j;
    j["tool"] = "confaudit";
    j["version"] = CONFAUDIT_VERSION;
    j["argv"] = args;
    j["config"] = config_json(cfg);
    j["inputs"] = ordered_json::array();
    for (const auto& d : inputs) j["inputs"].push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
    j["outputs"] = ordered_json::array();
    for (const auto& d : out.written())
        j["outputs"].push_back({{"file", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
    if (!extra.is_null()) j["summary"] = extra;
    const std::string text = j.dump(2) + "\n";
    std::ofstream f(out.path() / "manifest.json", std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("failed to write manifest");
}

ordered_json parse_summary(const Loaded& in) {
    return {{"records", in.records}, {"bad_lines", in.bad_lines}, {"unknown_fields", in.unknown_fields}};
}

StatsAccumulator accumulate_sharded(const PredictionLog& log, const BinSpec& spec, std::size_t jobs) {
    const auto& recs = log.records();
    jobs = std::max<std::size_t>(1, std::min(jobs, std::max<std::size_t>(1, recs.size())));
    std::vector<StatsAccumulator> shards(jobs, StatsAccumulator(spec));
    std::vector<std::thread> workers;
    const std::size_t chunk = (recs.size() + jobs - 1) / jobs;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            const std::size_t lo = std::min(recs.size(), w * chunk), hi = std::min(recs.size(), lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) shards[w].add(recs[i]);
        });
    }
    for (auto& t : workers) t.join();
    StatsAccumulator acc = std::move(shards[0]);
    for (std::size_t w = 1; w < jobs; ++w) acc.merge(shards[w]);
    return acc;
}

int cmd_validate(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    OutputDir dir(cfg.out_dir);
    std::vector<FileDigest> inputs;
    std::string csv = "file,line,rule,message\n";
    std::size_t bad = 0, good = 0;
    for (const auto& path : cfg.inputs) {
        const std::string text = read_file(path);
        inputs.push_back(FileDigest{path, sha256_hex(text), text.size()});
        const ParseResult pr = parse_log_string(text, cfg.strict);
        good += pr.log.size();
        for (const auto& e : pr.errors) {
            ++bad;
            diag(err, "error", path + ": " + format_line_error(e));
            csv += confaudit::csv::quote(path) + "," + std::to_string(e.line) + "," +
                   std::string(rule_name(e.rule)) + "," + confaudit::csv::quote(e.message) + "\n";
        }
        if (pr.unknown_fields)
            diag(err, "warning", path + ": " + std::to_string(pr.unknown_fields) + " unknown field(s) ignored");
    }
    dir.write("validation.csv", csv);
    write_manifest(dir, cfg, args, inputs, {{"valid_records", good}, {"bad_lines", bad}});
    out << "validated " << good << " record(s), " << bad << " bad line(s)\n";
    return bad == 0 ? kOk : kValidationFailure;
}

int cmd_stats(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const BinSpec spec = bin_spec(cfg);
    const Loaded in = load_inputs(cfg, err);
    OutputDir dir(cfg.out_dir);
    const StatsAccumulator acc = accumulate_sharded(in.log, spec, cfg.jobs);
    const BinReport bins = report_bins(acc);
    if (bins.no_data) diag(err, "warning", "no data: the pooled log has no records");
    const auto order = cfg.class_order == "asc" ? ClassOrder::ascending : ClassOrder::descending;
    const auto fmt = format_of(cfg);
    dir.write("bins" + ext(cfg), report::bins(bins, fmt));
    dir.write("topk" + ext(cfg), report::topk(report_topk(acc), fmt));
    dir.write("classes" + ext(cfg), report::classes(report_classes(acc, order, cfg.class_limit, cfg.min_count), fmt));
    write_manifest(dir, cfg, args, in.inputs, parse_summary(in));
    out << "stats over " << acc.total() << " record(s) written to " << cfg.out_dir << "\n";
    return kOk;
}

int cmd_flag(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             bool mislabels) {
    const double tau = mislabels ? cfg.tau_mislabel : cfg.tau_lowconf;
    check_tau("--tau", tau);
    const Loaded in = load_inputs(cfg, err);
    OutputDir dir(cfg.out_dir);
    const auto rows = mislabels ? detect_mislabels(in.log, tau) : extract_low_confidence(in.log, tau);
    const std::string name = mislabels ? "mislabels" : "lowconf";
    dir.write(name + ext(cfg), report::flagged(rows, format_of(cfg)));
    write_manifest(dir, cfg, args, in.inputs, parse_summary(in));
    out << rows.size() << " record(s) flagged (" << name << ", tau " << report::shortest(tau) << ")\n";
    return kOk;
}

int cmd_autolabel(const RunConfig& cfg, bool tau_given, const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
    std::vector<double> taus = cfg.sweep;
    if (taus.empty() || tau_given) taus.push_back(cfg.tau_autolabel);
    for (double t : taus) check_tau("--tau/--sweep", t);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    const Loaded in = load_inputs(cfg, err);
    if (in.log.empty()) throw ValidationError("auto-label simulation needs a non-empty log");
    OutputDir dir(cfg.out_dir);
    std::vector<AutoLabelResult> rows;
    for (double t : taus) rows.push_back(simulate_autolabel(in.log, t));
    dir.write("autolabel" + ext(cfg), report::autolabel(rows, format_of(cfg)));
    write_manifest(dir, cfg, args, in.inputs, parse_summary(in));
    for (const auto& r : rows)
        out << "tau " << report::shortest(r.tau) << ": coverage " << r.coverage_pct.str() << "%, residual error "
            << (r.none_accepted ? std::string("n/a (nothing accepted)") : r.residual_error_pct.str() + "%") << "\n";
    return kOk;
}

int cmd_pairs(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (cfg.depth < 2 || cfg.depth > kMaxCandidates) throw UsageError("--depth must be in 2..10");
    if (cfg.min_support < 1) throw UsageError("--min-support must be >= 1");
    if (cfg.runners_up < 1 || cfg.runners_up >= cfg.depth)
        throw UsageError("--runners-up conflicts with --depth: need 1 <= runners-up < depth");
    const Loaded in = load_inputs(cfg, err);
    OutputDir dir(cfg.out_dir);
    PairOptions opts;
    opts.min_support = cfg.min_support;
    opts.depth = cfg.depth;
    opts.runners_up = cfg.runners_up;
    opts.grouping = cfg.group_by == "gold" ? PairGrouping::by_gold : PairGrouping::by_top1;
    PairMiningResult res = mine_similar_pairs(in.log, opts);
    if (res.truncated) diag(err, "warning", std::to_string(res.truncated) + " record(s) list fewer than --depth candidates");
    const auto rows = cfg.symmetric ? symmetrize(res.pairs) : res.pairs;
    dir.write("pairs" + ext(cfg), report::pairs(rows, format_of(cfg)));
    ordered_json summary = parse_summary(in);
    summary["truncated_records"] = res.truncated;
    write_manifest(dir, cfg, args, in.inputs, summary);
    out << rows.size() << " similar pair(s)\n";
    return kOk;
}

int cmd_replay(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const BinSpec spec = bin_spec(cfg);
    const Loaded in = load_inputs(cfg, err);
    const std::string text = read_file(cfg.corrections);
    std::istringstream cs(text);
    CorrectionMap map;
    try {
        map = read_corrections_csv(cs);
        map.validate_against(in.log);
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
    OutputDir dir(cfg.out_dir);
    dir.write("replay" + ext(cfg), report::replay(replay_corrections(in.log, map, spec), format_of(cfg)));
    std::vector<FileDigest> inputs = in.inputs;
    inputs.push_back(FileDigest{cfg.corrections, sha256_hex(text), text.size()});
    write_manifest(dir, cfg, args, inputs, parse_summary(in));
    out << "replayed " << map.size() << " correction(s)\n";
    return kOk;
}

int cmd_demo(const RunConfig& cfg, const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
    try {
        cfg.demo.spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!(cfg.demo.train.learning_rate > 0.0)) throw UsageError("--lr must be > 0");
    if (cfg.demo.depth < 1 || cfg.demo.depth > kMaxCandidates) throw UsageError("--depth must be in 1..10");
    if (cfg.demo.train_multiplier < 1) throw UsageError("--train-multiplier must be >= 1");

    OutputDir dir(cfg.out_dir);
    const synth::DemoResult res = synth::run_demo(cfg.demo);

    dir.write("demo_log.jsonl", write_log_string(res.log));
    dir.write("dataset.json", synth::dataset_to_json(res.audit));
    dir.write("model.json", synth::model_to_json(res.trained.model));
    std::string trace = "epoch,loss\n";
    for (std::size_t i = 0; i < res.trained.loss_trace.size(); ++i)
        trace += std::to_string(i) + "," + report::shortest(res.trained.loss_trace[i]) + "\n";
    dir.write("loss_trace.csv", trace);
    std::string flips = "id,gold,true\n";
    for (const auto& s : res.audit.samples) {
        if (!s.flipped()) continue;
        flips += csv::quote(s.id) + "," + csv::quote(res.audit.prototypes[s.gold].label.str()) + "," +
                 csv::quote(res.audit.prototypes[s.truth].label.str()) + "\n";
    }
    dir.write("flips.csv", flips);

    ordered_json summary{{"records", res.log.size()},
                         {"flipped", res.audit.flipped_count()},
                         {"train_accuracy", res.train_accuracy},
                         {"final_loss", res.trained.loss_trace.back()},
                         {"halvings", res.trained.halvings},
                         {"stalled", res.trained.stalled}};
    write_manifest(dir, cfg, args, {}, summary);
    out << "demo: " << res.log.size() << " records, " << res.audit.flipped_count() << " injected flips, "
        << "train top-1 " << report::shortest(res.train_accuracy * 100.0) << "%, final loss "
        << report::shortest(res.trained.loss_trace.back()) << "\n";
    return kOk;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_inputs = true) {
    if (needs_inputs) sub->add_option("inputs", cfg.inputs, "Prediction log files (JSONL)")->required();
    sub->add_option("-o,--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    if (needs_inputs) sub->add_flag("--strict", cfg.strict, "Abort on the first invalid line");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"confaudit: classifier confidence audit toolkit", "confaudit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CONFAUDIT_VERSION);

    auto* validate = app.add_subcommand("validate", "Check prediction logs against the record schema");
    add_common(validate, cfg);

    auto* stats = app.add_subcommand("stats", "Confidence histogram, top-k rates and per-class profiles");
    add_common(stats, cfg);
    stats->add_option("--bins", cfg.bins, "Bin edges, comma separated, 0 .. 1")->delimiter(',');
    stats->add_option("--jobs", cfg.jobs, "Accumulator shards")->check(CLI::PositiveNumber)->capture_default_str();
    stats->add_option("--class-order", cfg.class_order, "Per-class sort by accuracy")
        ->check(CLI::IsMember({"asc", "desc"}))->capture_default_str();
    stats->add_option("--class-limit", cfg.class_limit, "Keep the first N classes (0 = all)")->capture_default_str();
    stats->add_option("--min-count", cfg.min_count, "Minimum samples per reported class")->capture_default_str();

    auto* mislabels = app.add_subcommand("mislabels", "High-confidence disagreements with the gold label");
    add_common(mislabels, cfg);
    mislabels->add_option("--tau", cfg.tau_mislabel, "Confidence threshold")->capture_default_str();

    auto* lowconf = app.add_subcommand("lowconf", "Records whose top-1 confidence is below a threshold");
    add_common(lowconf, cfg);
    lowconf->add_option("--tau", cfg.tau_lowconf, "Confidence threshold")->capture_default_str();

    auto* autolabel = app.add_subcommand("autolabel", "Coverage and residual error of confidence-gated auto-labeling");
    add_common(autolabel, cfg);
    auto* tau_opt = autolabel->add_option("--tau", cfg.tau_autolabel, "Acceptance threshold")->capture_default_str();
    autolabel->add_option("--sweep", cfg.sweep, "Comma-separated thresholds")->delimiter(',');

    auto* pairs = app.add_subcommand("pairs", "Similar class pairs from accumulated candidate confidence");
    add_common(pairs, cfg);
    pairs->add_option("--min-support", cfg.min_support, "Minimum records per category")->capture_default_str();
    pairs->add_option("--depth", cfg.depth, "Candidates accumulated per record")->capture_default_str();
    pairs->add_option("--runners-up", cfg.runners_up, "Similar labels emitted per category")->capture_default_str();
    pairs->add_option("--group-by", cfg.group_by, "Group records by top-1 prediction or by gold label")
        ->check(CLI::IsMember({"top1", "gold"}))->capture_default_str();
    pairs->add_flag("--symmetric", cfg.symmetric, "Merge (A,B) and (B,A), keeping the higher score");

    auto* replay = app.add_subcommand("replay", "Recompute bin accuracy after applying label corrections");
    add_common(replay, cfg);
    replay->add_option("--corrections", cfg.corrections, "CSV with header id,corrected_label")->required();
    replay->add_option("--bins", cfg.bins, "Bin edges, comma separated, 0 .. 1")->delimiter(',');

    auto* demo = app.add_subcommand("demo", "Generate synthetic glyphs, train softmax regression, emit a log");
    add_common(demo, cfg, false);
    auto& d = cfg.demo;
    demo->add_option("--seed", d.spec.seed, "RNG seed")->capture_default_str();
    demo->add_option("--classes", d.spec.classes, "Number of classes")->capture_default_str();
    demo->add_option("--side", d.spec.side, "Bitmap side length")->capture_default_str();
    demo->add_option("--samples-per-class", d.spec.samples_per_class, "Audited samples per class")->capture_default_str();
    demo->add_option("--noise", d.spec.noise, "Per-pixel flip probability")->capture_default_str();
    demo->add_option("--flips", d.spec.flip_fraction, "Fraction of mislabeled samples")->capture_default_str();
    demo->add_option("--epochs", d.train.epochs, "Gradient-descent epochs")->capture_default_str();
    demo->add_option("--lr", d.train.learning_rate, "Initial learning rate")->capture_default_str();
    demo->add_option("--train-multiplier", d.train_multiplier, "Training split size relative to the audited set")
        ->capture_default_str();
    demo->add_option("--depth", d.depth, "Candidates per emitted record")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (validate->parsed()) {
            cfg.command = "validate";
            return cmd_validate(cfg, args, out, err);
        }
        if (stats->parsed()) {
            cfg.command = "stats";
            return cmd_stats(cfg, args, out, err);
        }
        if (mislabels->parsed()) {
            cfg.command = "mislabels";
            return cmd_flag(cfg, args, out, err, true);
        }
        if (lowconf->parsed()) {
            cfg.command = "lowconf";
            return cmd_flag(cfg, args, out, err, false);
        }
        if (autolabel->parsed()) {
            cfg.command = "autolabel";
            return cmd_autolabel(cfg, tau_opt->count() > 0, args, out, err);
        }
        if (pairs->parsed()) {
            cfg.command = "pairs";
            return cmd_pairs(cfg, args, out, err);
        }
        if (replay->parsed()) {
            cfg.command = "replay";
            return cmd_replay(cfg, args, out, err);
        }
        if (demo->parsed()) {
            cfg.command = "demo";
            return cmd_demo(cfg, args, out, err);
        }
    } catch (const UsageError& e) {
        diag(err, "error", e.what());
        return kUsageError;
    } catch (const ValidationError& e) {
        diag(err, "error", e.what());
        return kValidationFailure;
    } catch (const std::exception& e) {
        diag(err, "error", e.what());
        return kValidationFailure;
    }
    return kUsageError;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace confaudit::cli
