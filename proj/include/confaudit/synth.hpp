#pragma once
// Desk-scale log producer. Procedural stroke glyphs (with one deliberately
// confusable prototype pair) are rendered on a small grid, corrupted with
// per-pixel flip noise, optionally mislabeled, classified by a softmax
// regression model trained with full-batch gradient descent, and emitted as a
// prediction log with ranked candidates.
//
// Everything is a deterministic function of the spec and its seed.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "confaudit/log_model.hpp"

namespace confaudit::synth {

struct SynthSpec {
    std::size_t classes = 10;
    std::size_t side = 16;               // bitmap is side x side
    std::size_t samples_per_class = 200;
    double noise = 0.15;                 // per-pixel flip probability, [0,1)
    double flip_fraction = 0.02;         // share of samples with gold != truth, [0,1)
    std::uint64_t seed = 42;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

inline constexpr std::size_t kMaxClasses = 64;
inline constexpr std::size_t kMinSide = 12;
inline constexpr std::size_t kMaxSide = 64;

struct Glyph {
    Label label;
    int strokes = 0;               // strokes the generator drew
    std::vector<double> bitmap;    // side*side entries in {0,1}, row-major
};

struct Sample {
    std::string id;
    std::vector<double> features;  // entries in [0,1]
    std::size_t gold = 0;          // class index as labeled
    std::size_t truth = 0;         // class index of the generating prototype
    int strokes = 0;

    bool flipped() const noexcept { return gold != truth; }
};

struct Dataset {
    SynthSpec spec;
    std::vector<Glyph> prototypes;
    std::vector<Sample> samples;
    std::pair<std::size_t, std::size_t> confusable_pair{0, 1};

    std::vector<Label> labels() const;
    std::size_t flipped_count() const;
};

// Number of pixels in which two bitmaps differ.
std::size_t pixel_difference(const std::vector<double>& a, const std::vector<double>& b);

// Prototypes only (no samples). Prototypes 0 and 1 form the confusable pair
// (differ in at most 10% of pixels); every other pair differs in more.
std::vector<Glyph> make_prototypes(const SynthSpec& spec);

Dataset generate_dataset(const SynthSpec& spec);

// Spec of the clean training split used by the demo: same prototypes, a
// derived seed, `multiplier` times the samples, no label flips.
SynthSpec training_spec(const SynthSpec& spec, std::size_t multiplier);

class SoftmaxModel {
public:
    SoftmaxModel() = default;
    // Zero-initialized weights. Throws if fewer than 2 classes or no features.
    SoftmaxModel(std::vector<Label> classes, std::size_t features);

    std::size_t classes() const noexcept { return labels_.size(); }
    std::size_t features() const noexcept { return features_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }

    // Row-major classes x features.
    std::vector<double>& weights() noexcept { return weights_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::vector<double>& bias() noexcept { return bias_; }
    const std::vector<double>& bias() const noexcept { return bias_; }

    // W x + b. Throws std::invalid_argument on a dimension mismatch.
    std::vector<double> logits(const std::vector<double>& x) const;

    bool finite() const;

    friend bool operator==(const SoftmaxModel&, const SoftmaxModel&) = default;

private:
    std::vector<Label> labels_;
    std::size_t features_ = 0;
    std::vector<double> weights_;
    std::vector<double> bias_;
};

struct LossGradient {
    double loss = 0.0;             // mean cross-entropy against gold
    std::vector<double> weights;   // same layout as SoftmaxModel::weights
    std::vector<double> bias;
};

LossGradient loss_and_gradient(const SoftmaxModel& model, const std::vector<Sample>& data);
double mean_loss(const SoftmaxModel& model, const std::vector<Sample>& data);

inline constexpr double kDefaultLearningRate = 1.0;
inline constexpr std::size_t kDefaultEpochs = 800;

struct TrainOptions {
    std::size_t epochs = kDefaultEpochs;
    double learning_rate = kDefaultLearningRate;
    int max_halvings = 20;
};

struct TrainResult {
    SoftmaxModel model;
    std::vector<double> loss_trace;   // initial loss, then one entry per epoch run
    std::size_t halvings = 0;
    double final_learning_rate = 0.0;
    bool stalled = false;             // a step failed after max_halvings; training stopped
};

// Full-batch gradient descent on mean cross-entropy. A step that would raise
// the loss is retried with half the rate (the halved rate is kept), so the
// trace never increases. Throws std::runtime_error on a non-finite loss,
// naming the step.
TrainResult train(SoftmaxModel initial, const std::vector<Sample>& data,
                  const TrainOptions& opts = {});

// Fraction of samples whose argmax matches the class index; with
// `against_truth` the generating prototype is the reference, else gold.
double top1_accuracy(const SoftmaxModel& model, const std::vector<Sample>& data,
                     bool against_truth);

inline const std::string kSynthDatasetTag = "synth";

// One record per sample: the top min(depth, classes) candidates by softmax
// confidence (ties keep the lower class index first).
PredictionLog emit_log(const SoftmaxModel& model, const Dataset& data, std::size_t depth = 10,
                       const std::string& dataset_tag = kSynthDatasetTag);

// JSON with 17-significant-digit decimals.
std::string dataset_to_json(const Dataset& data);
std::string model_to_json(const SoftmaxModel& model);
SoftmaxModel model_from_json(const std::string& text);

struct DemoConfig {
    SynthSpec spec;
    TrainOptions train;
    std::size_t train_multiplier = 3;
    std::size_t depth = 10;
};

struct DemoResult {
    Dataset audit;        // labeled set with injected flips; the log is emitted on it
    Dataset training;     // clean split the model is fit on
    TrainResult trained;
    PredictionLog log;
    double train_accuracy = 0.0;   // top-1 on training samples whose gold is their truth
};

DemoResult run_demo(const DemoConfig& cfg);

}  // namespace confaudit::synth
