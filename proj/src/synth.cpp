#include "confaudit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "confaudit/confidence.hpp"
#include "json.hpp"

namespace confaudit::synth {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Raw 64-bit draws only; distributions are implemented here so datasets are
// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % n;
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Segment endpoints on a 16x16 design grid: (row0, col0, row1, col1).
using Stroke = std::array<double, 4>;

struct GlyphDesign {
    const char* label;
    std::vector<Stroke> strokes;
};

// The first two differ only in the length of the upper stroke.
const std::vector<GlyphDesign>& builtin_designs() {
    static const std::vector<GlyphDesign> designs = {
        {"土", {{2, 7, 13, 7}, {6, 4, 6, 10}, {13, 3, 13, 11}}},
        {"士", {{2, 7, 13, 7}, {6, 3, 6, 11}, {13, 3, 13, 11}}},
        {"口", {{3, 3, 12, 3}, {3, 3, 3, 12}, {3, 12, 12, 12}, {12, 3, 12, 12}}},
        {"人", {{2, 7, 13, 2}, {5, 8, 13, 13}}},
        {"川", {{2, 3, 13, 2}, {3, 7, 12, 7}, {2, 12, 13, 12}}},
        {"三", {{3, 4, 3, 11}, {8, 5, 8, 10}, {13, 2, 13, 13}}},
        {"丫", {{2, 2, 7, 7}, {2, 13, 7, 8}, {7, 8, 13, 8}}},
        {"小", {{2, 9, 13, 9}, {6, 6, 10, 4}, {6, 12, 10, 14}}},
        {"乙", {{2, 3, 2, 12}, {2, 12, 13, 3}, {13, 3, 13, 12}}},
        {"彡", {{3, 10, 5, 5}, {7, 11, 9, 4}, {11, 12, 13, 3}}},
    };
    return designs;
}

double segment_distance(double r, double c, const Stroke& s) {
    const double dr = s[2] - s[0], dc = s[3] - s[1];
    const double len2 = dr * dr + dc * dc;
    double t = len2 > 0 ? ((r - s[0]) * dr + (c - s[1]) * dc) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double pr = s[0] + t * dr - r, pc = s[1] + t * dc - c;
    return std::sqrt(pr * pr + pc * pc);
}

// A pixel is ink when its center, mapped to design units, lies within half a
// design pixel of some stroke.
std::vector<double> rasterize(const std::vector<Stroke>& strokes, std::size_t side) {
    std::vector<double> img(side * side, 0.0);
    const double scale = 16.0 / static_cast<double>(side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double u = (static_cast<double>(r) + 0.5) * scale - 0.5;
            const double v = (static_cast<double>(c) + 0.5) * scale - 0.5;
            for (const auto& s : strokes) {
                if (segment_distance(u, v, s) <= 0.5 + 1e-9) {
                    img[r * side + c] = 1.0;
                    break;
                }
            }
        }
    }
    return img;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

RowMatrix feature_matrix(const std::vector<Sample>& data, std::size_t n) {
    RowMatrix x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].features.size() != n)
            throw std::invalid_argument("sample " + data[i].id + " has the wrong feature count");
        for (std::size_t j = 0; j < n; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i].features[j];
    }
    return x;
}

// Working copy of the model parameters as Eigen matrices.
struct Params {
    RowMatrix w;           // k x n
    Eigen::RowVectorXd b;  // 1 x k
};

Params to_params(const SoftmaxModel& m) {
    Params p;
    const auto k = static_cast<Eigen::Index>(m.classes());
    const auto n = static_cast<Eigen::Index>(m.features());
    p.w = Eigen::Map<const RowMatrix>(m.weights().data(), k, n);
    p.b = Eigen::Map<const Eigen::RowVectorXd>(m.bias().data(), k);
    return p;
}

void store_params(const Params& p, SoftmaxModel& m) {
    std::copy(p.w.data(), p.w.data() + p.w.size(), m.weights().begin());
    std::copy(p.b.data(), p.b.data() + p.b.size(), m.bias().begin());
}

struct Batch {
    RowMatrix x;                     // N x n
    std::vector<std::size_t> gold;   // N
};

// Mean cross-entropy; fills `probs` (N x k) with the softmax of each row.
double forward(const Params& p, const Batch& batch, RowMatrix& probs) {
    RowMatrix z = batch.x * p.w.transpose();
    z.rowwise() += p.b;
    probs.resize(z.rows(), z.cols());
    double total = 0.0;
    const auto k = static_cast<std::size_t>(z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        std::span<const double> row(z.row(i).data(), k);
        std::span<double> out(probs.row(i).data(), k);
        const double log_norm = softmax_into(row, out);
        total += log_norm - row[batch.gold[static_cast<std::size_t>(i)]];
    }
    return total / static_cast<double>(z.rows());
}

void backward(const Batch& batch, const RowMatrix& probs, Params& grad) {
    RowMatrix g = probs;
    for (std::size_t i = 0; i < batch.gold.size(); ++i) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(batch.gold[i])) -= 1.0;
    g /= static_cast<double>(batch.gold.size());
    grad.w = g.transpose() * batch.x;
    grad.b = g.colwise().sum();
}

Batch make_batch(const SoftmaxModel& model, const std::vector<Sample>& data) {
    if (data.empty()) throw std::invalid_argument("training data is empty");
    Batch b;
    b.x = feature_matrix(data, model.features());
    for (const auto& s : data) {
        if (s.gold >= model.classes()) throw std::invalid_argument("sample " + s.id + " has an out-of-range gold index");
        b.gold.push_back(s.gold);
    }
    return b;
}

}  // namespace

void SynthSpec::validate() const {
    if (classes < 2 || classes > kMaxClasses)
        throw std::invalid_argument("synth spec: classes must be in 2.." + std::to_string(kMaxClasses));
    if (side < kMinSide || side > kMaxSide)
        throw std::invalid_argument("synth spec: side must be in " + std::to_string(kMinSide) + ".." +
                                    std::to_string(kMaxSide));
    if (samples_per_class < 1) throw std::invalid_argument("synth spec: samples_per_class must be >= 1");
    if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("synth spec: noise must be in [0,1)");
    if (!(flip_fraction >= 0.0 && flip_fraction < 1.0))
        throw std::invalid_argument("synth spec: flip_fraction must be in [0,1)");
}

std::vector<Label> Dataset::labels() const {
    std::vector<Label> out;
    for (const auto& g : prototypes) out.push_back(g.label);
    return out;
}

std::size_t Dataset::flipped_count() const {
    return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(),
                                                  [](const Sample& s) { return s.flipped(); }));
}

std::size_t pixel_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pixel_difference: size mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
    return d;
}

std::vector<Glyph> make_prototypes(const SynthSpec& spec) {
    spec.validate();
    const auto& designs = builtin_designs();
    const std::size_t pixels = spec.side * spec.side;
    const double confusable_limit = 0.10 * static_cast<double>(pixels);

    std::vector<Glyph> out;
    auto separated = [&](const std::vector<double>& img) {
        return std::all_of(out.begin(), out.end(), [&](const Glyph& g) {
            return static_cast<double>(pixel_difference(g.bitmap, img)) > confusable_limit;
        });
    };

    for (std::size_t i = 0; i < std::min(spec.classes, designs.size()); ++i) {
        Glyph g{Label(designs[i].label), static_cast<int>(designs[i].strokes.size()),
                rasterize(designs[i].strokes, spec.side)};
        if (i >= 2 && !separated(g.bitmap))
            throw std::invalid_argument("synth spec: side " + std::to_string(spec.side) +
                                        " cannot keep glyph " + designs[i].label + " separated");
        out.push_back(std::move(g));
    }
    const std::size_t pair_diff = pixel_difference(out[0].bitmap, out[1].bitmap);
    if (pair_diff == 0 || static_cast<double>(pair_diff) > confusable_limit)
        throw std::invalid_argument("synth spec: side " + std::to_string(spec.side) +
                                    " does not render a confusable pair");

    // Extra classes: random 2-4 stroke glyphs, rejected until well separated.
    Rng rng(splitmix64(spec.seed ^ 0x676c797068ull));
    for (std::size_t attempts = 0; out.size() < spec.classes; ++attempts) {
        if (attempts > 100000) throw std::invalid_argument("synth spec: cannot draw enough separated glyphs");
        const int n = 2 + static_cast<int>(rng.below(3));
        std::vector<Stroke> strokes;
        for (int s = 0; s < n; ++s) {
            Stroke st;
            for (double& v : st) v = 1.0 + static_cast<double>(rng.below(14));
            strokes.push_back(st);
        }
        auto img = rasterize(strokes, spec.side);
        if (!separated(img)) continue;
        out.push_back(Glyph{Label("g" + std::to_string(out.size())), n, std::move(img)});
    }
    return out;
}

Dataset generate_dataset(const SynthSpec& spec) {
    Dataset ds;
    ds.spec = spec;
    ds.prototypes = make_prototypes(spec);
    ds.confusable_pair = {0, 1};

    Rng rng(spec.seed);
    const std::size_t k = spec.classes;
    const std::size_t total = k * spec.samples_per_class;
    ds.samples.reserve(total);
    char id[32];
    for (std::size_t c = 0; c < k; ++c) {
        const Glyph& proto = ds.prototypes[c];
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            Sample smp;
            std::snprintf(id, sizeof id, "synth-%06zu", ds.samples.size());
            smp.id = id;
            smp.features = proto.bitmap;
            for (double& px : smp.features) {
                if (rng.uniform() < spec.noise) px = 1.0 - px;
            }
            smp.gold = smp.truth = c;
            smp.strokes = proto.strokes;
            ds.samples.push_back(std::move(smp));
        }
    }

    // floor(flip_fraction * total), guarded against products like 0.29*100
    // landing just below an integer.
    const auto flips = static_cast<std::size_t>(
        std::floor(spec.flip_fraction * static_cast<double>(total) * (1.0 + 1e-12)));
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < flips; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(order[i], order[j]);
        Sample& smp = ds.samples[order[i]];
        smp.gold = (smp.truth + 1 + static_cast<std::size_t>(rng.below(k - 1))) % k;
    }
    return ds;
}

SynthSpec training_spec(const SynthSpec& spec, std::size_t multiplier) {
    if (multiplier < 1) throw std::invalid_argument("training multiplier must be >= 1");
    SynthSpec t = spec;
    t.seed = splitmix64(spec.seed ^ 0x747261696eull);
    t.samples_per_class = spec.samples_per_class * multiplier;
    t.flip_fraction = 0.0;
    return t;
}

SoftmaxModel::SoftmaxModel(std::vector<Label> classes, std::size_t features)
    : labels_(std::move(classes)), features_(features),
      weights_(labels_.size() * features, 0.0), bias_(labels_.size(), 0.0) {
    if (labels_.size() < 2) throw std::invalid_argument("softmax model needs at least 2 classes");
    if (features_ == 0) throw std::invalid_argument("softmax model needs at least 1 feature");
}

std::vector<double> SoftmaxModel::logits(const std::vector<double>& x) const {
    if (x.size() != features_)
        throw std::invalid_argument("dimension mismatch: model expects " + std::to_string(features_) +
                                    " features, got " + std::to_string(x.size()));
    std::vector<double> z(bias_);
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double* w = &weights_[j * features_];
        double acc = 0.0;
        for (std::size_t i = 0; i < features_; ++i) acc += w[i] * x[i];
        z[j] += acc;
    }
    return z;
}

bool SoftmaxModel::finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(weights_.begin(), weights_.end(), ok) && std::all_of(bias_.begin(), bias_.end(), ok);
}

LossGradient loss_and_gradient(const SoftmaxModel& model, const std::vector<Sample>& data) {
    const Batch batch = make_batch(model, data);
    const Params p = to_params(model);
    RowMatrix probs;
    LossGradient out;
    out.loss = forward(p, batch, probs);
    Params g;
    backward(batch, probs, g);
    out.weights.assign(g.w.data(), g.w.data() + g.w.size());
    out.bias.assign(g.b.data(), g.b.data() + g.b.size());
    return out;
}

double mean_loss(const SoftmaxModel& model, const std::vector<Sample>& data) {
    RowMatrix probs;
    return forward(to_params(model), make_batch(model, data), probs);
}

TrainResult train(SoftmaxModel initial, const std::vector<Sample>& data, const TrainOptions& opts) {
    if (!(opts.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
    const Batch batch = make_batch(initial, data);

    TrainResult res;
    res.final_learning_rate = opts.learning_rate;
    Params cur = to_params(initial);
    RowMatrix probs, cand_probs;
    double loss = forward(cur, batch, probs);
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss at step 0");
    res.loss_trace.push_back(loss);

    double lr = opts.learning_rate;
    Params grad, cand;
    for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        backward(batch, probs, grad);
        bool accepted = false;
        double cand_loss = 0.0;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            cand.w = cur.w - lr * grad.w;
            cand.b = cur.b - lr * grad.b;
            cand_loss = forward(cand, batch, cand_probs);
            if (std::isfinite(cand_loss) && cand_loss <= loss) {
                accepted = true;
                break;
            }
            if (h < opts.max_halvings) {
                lr *= 0.5;
                ++res.halvings;
            }
        }
        if (!accepted) {
            if (!std::isfinite(cand_loss))
                throw std::runtime_error("non-finite loss at step " + std::to_string(epoch));
            res.stalled = true;
            break;
        }
        std::swap(cur, cand);
        std::swap(probs, cand_probs);
        loss = cand_loss;
        res.loss_trace.push_back(loss);
    }
    res.final_learning_rate = lr;
    store_params(cur, initial);
    res.model = std::move(initial);
    return res;
}

double top1_accuracy(const SoftmaxModel& model, const std::vector<Sample>& data, bool against_truth) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& s : data) {
        const std::size_t pred = argmax(model.logits(s.features));
        hits += pred == (against_truth ? s.truth : s.gold) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

PredictionLog emit_log(const SoftmaxModel& model, const Dataset& data, std::size_t depth,
                       const std::string& dataset_tag) {
    if (depth < 1) throw std::invalid_argument("emit_log: depth must be >= 1");
    if (data.prototypes.size() != model.classes())
        throw std::invalid_argument("dimension mismatch: dataset has " + std::to_string(data.prototypes.size()) +
                                    " classes, model has " + std::to_string(model.classes()));
    const std::size_t keep = std::min({depth, model.classes(), kMaxCandidates});
    PredictionLog log;
    std::vector<std::size_t> order(model.classes());
    for (const auto& s : data.samples) {
        const std::vector<double> probs = softmax(model.logits(s.features));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
        PredictionRecord rec;
        rec.id = s.id;
        rec.gold = model.labels()[s.gold];
        for (std::size_t r = 0; r < keep; ++r)
            rec.cands.push_back(CandidateScore{model.labels()[order[r]], probs[order[r]]});
        rec.strokes = s.strokes;
        rec.dataset = dataset_tag;
        log.add(std::move(rec));
    }
    return log;
}

std::string dataset_to_json(const Dataset& data) {
    const SynthSpec& sp = data.spec;
    std::string s = "{\"spec\":{";
    s += "\"classes\":" + std::to_string(sp.classes);
    s += ",\"side\":" + std::to_string(sp.side);
    s += ",\"samples_per_class\":" + std::to_string(sp.samples_per_class);
    s += ",\"noise\":" + number(sp.noise);
    s += ",\"flip_fraction\":" + number(sp.flip_fraction);
    s += ",\"seed\":" + std::to_string(sp.seed);
    s += "},\"confusable_pair\":[" + quoted(data.prototypes[data.confusable_pair.first].label.str()) + "," +
         quoted(data.prototypes[data.confusable_pair.second].label.str()) + "]";
    s += ",\"prototypes\":[";
    for (std::size_t i = 0; i < data.prototypes.size(); ++i) {
        const Glyph& g = data.prototypes[i];
        if (i) s += ',';
        s += "\n{\"label\":" + quoted(g.label.str()) + ",\"strokes\":" + std::to_string(g.strokes) + ",\"bitmap\":[";
        for (std::size_t p = 0; p < g.bitmap.size(); ++p) {
            if (p) s += ',';
            s += g.bitmap[p] != 0.0 ? '1' : '0';
        }
        s += "]}";
    }
    s += "],\"samples\":[";
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const Sample& smp = data.samples[i];
        if (i) s += ',';
        s += "\n{\"id\":" + quoted(smp.id) + ",\"gold\":" + quoted(data.prototypes[smp.gold].label.str()) +
             ",\"true\":" + quoted(data.prototypes[smp.truth].label.str()) +
             ",\"strokes\":" + std::to_string(smp.strokes) + ",\"flipped\":" + (smp.flipped() ? "true" : "false") + "}";
    }
    s += "]}\n";
    return s;
}

std::string model_to_json(const SoftmaxModel& model) {
    std::string s = "{\"classes\":[";
    for (std::size_t j = 0; j < model.classes(); ++j) {
        if (j) s += ',';
        s += quoted(model.labels()[j].str());
    }
    s += "],\"features\":" + std::to_string(model.features()) + ",\"bias\":[";
    for (std::size_t j = 0; j < model.classes(); ++j) {
        if (j) s += ',';
        s += number(model.bias()[j]);
    }
    s += "],\"weights\":[";
    for (std::size_t j = 0; j < model.classes(); ++j) {
        if (j) s += ',';
        s += "\n[";
        for (std::size_t i = 0; i < model.features(); ++i) {
            if (i) s += ',';
            s += number(model.weights()[j * model.features() + i]);
        }
        s += ']';
    }
    s += "]}\n";
    return s;
}

SoftmaxModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("model JSON: ") + e.what());
    }
    try {
        std::vector<Label> labels;
        for (const auto& l : j.at("classes")) labels.emplace_back(l.get<std::string>());
        const auto n = j.at("features").get<std::size_t>();
        SoftmaxModel m(std::move(labels), n);
        const auto& bias = j.at("bias");
        const auto& w = j.at("weights");
        if (bias.size() != m.classes() || w.size() != m.classes())
            throw std::invalid_argument("model JSON: class count mismatch");
        for (std::size_t r = 0; r < m.classes(); ++r) {
            m.bias()[r] = bias[r].get<double>();
            if (w[r].size() != n) throw std::invalid_argument("model JSON: feature count mismatch");
            for (std::size_t i = 0; i < n; ++i) m.weights()[r * n + i] = w[r][i].get<double>();
        }
        if (!m.finite()) throw std::invalid_argument("model JSON: non-finite parameter");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model JSON: ") + e.what());
    }
}

DemoResult run_demo(const DemoConfig& cfg) {
    DemoResult res;
    res.audit = generate_dataset(cfg.spec);
    res.training = generate_dataset(training_spec(cfg.spec, cfg.train_multiplier));
    SoftmaxModel init(res.audit.labels(), cfg.spec.side * cfg.spec.side);
    res.trained = train(std::move(init), res.training.samples, cfg.train);

    std::vector<Sample> unflipped;
    for (const auto& s : res.training.samples)
        if (!s.flipped()) unflipped.push_back(s);
    res.train_accuracy = top1_accuracy(res.trained.model, unflipped, true);
    res.log = emit_log(res.trained.model, res.audit, cfg.depth);
    return res;
}

}  // namespace confaudit::synth
