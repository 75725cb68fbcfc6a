#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "confaudit/confidence.hpp"
#include "confaudit/mining.hpp"
#include "confaudit/synth.hpp"
#include "oracles.hpp"

using namespace confaudit;
using namespace confaudit::synth;

namespace {

SynthSpec small_spec() {
    SynthSpec s;
    s.samples_per_class = 30;
    return s;
}

// Perceptron on augmented inputs: converging within the budget proves the
// data linearly separable.
bool perceptron_separates(const std::vector<Sample>& data, std::size_t budget = 1000) {
    const std::size_t n = data[0].features.size();
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t pass = 0; pass < budget; ++pass) {
        bool clean = true;
        for (const auto& s : data) {
            const double y = s.gold == 0 ? 1.0 : -1.0;
            double a = w[n];
            for (std::size_t i = 0; i < n; ++i) a += w[i] * s.features[i];
            if (y * a <= 0) {
                clean = false;
                for (std::size_t i = 0; i < n; ++i) w[i] += y * s.features[i];
                w[n] += y;
            }
        }
        if (clean) return true;
    }
    return false;
}

std::vector<Sample> toy_two_class(oracle::Rng& rng) {
    std::vector<Sample> data;
    for (std::size_t i = 0; i < 40; ++i) {
        Sample s;
        s.id = "t" + std::to_string(i);
        s.gold = s.truth = i % 2;
        const double shift = s.gold == 0 ? 0.7 : 0.3;
        s.features = {std::clamp(shift + rng.uniform(-0.15, 0.15), 0.0, 1.0), rng.uniform()};
        data.push_back(s);
    }
    return data;
}

}  // namespace

TEST_CASE("spec validation") {
    SynthSpec s;
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.classes = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.noise = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.flip_fraction = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.side = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.samples_per_class = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(bad), std::invalid_argument);
}

TEST_CASE("prototypes: one confusable pair, the rest well separated") {
    for (std::size_t k : {2u, 10u, 16u, 40u}) {
        SynthSpec s;
        s.classes = k;
        const auto protos = make_prototypes(s);
        REQUIRE(protos.size() == k);
        const std::size_t n = s.side * s.side;
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(protos[i].strokes > 0);
            for (std::size_t j = i + 1; j < k; ++j) {
                const auto d = pixel_difference(protos[i].bitmap, protos[j].bitmap);
                if (i == 0 && j == 1) {
                    CHECK(d > 0);
                    CHECK(d * 10 <= n);
                } else {
                    CHECK(d * 10 > n);
                }
            }
        }
    }
}

TEST_CASE("degenerate spec reproduces prototypes exactly") {
    SynthSpec s = small_spec();
    s.noise = 0.0;
    s.flip_fraction = 0.0;
    const auto d = generate_dataset(s);
    CHECK(d.samples.size() == s.classes * s.samples_per_class);
    for (const auto& x : d.samples) {
        CHECK(x.gold == x.truth);
        CHECK(x.features == d.prototypes[x.truth].bitmap);
        CHECK(x.strokes == d.prototypes[x.truth].strokes);
    }
}

TEST_CASE("flip count follows the floor rule") {
    SynthSpec s;
    s.samples_per_class = 100;
    CHECK(generate_dataset(s).flipped_count() == 20);
    s.flip_fraction = 0.013;   // 13.000000000000002 in binary
    CHECK(generate_dataset(s).flipped_count() == 13);
    s.flip_fraction = 0.0;
    CHECK(generate_dataset(s).flipped_count() == 0);
}

TEST_CASE("noise flips about the requested share of pixels") {
    SynthSpec s = small_spec();
    s.flip_fraction = 0.0;
    const auto d = generate_dataset(s);
    std::size_t diff = 0, total = 0;
    for (const auto& x : d.samples) {
        diff += pixel_difference(x.features, d.prototypes[x.truth].bitmap);
        total += x.features.size();
    }
    const double rate = static_cast<double>(diff) / static_cast<double>(total);
    CHECK(rate == doctest::Approx(s.noise).epsilon(0.05));
}

TEST_CASE("determinism") {
    const auto s = small_spec();
    CHECK(dataset_to_json(generate_dataset(s)) == dataset_to_json(generate_dataset(s)));
    auto other = s;
    other.seed = 43;
    CHECK(dataset_to_json(generate_dataset(s)) != dataset_to_json(generate_dataset(other)));
    const auto t = training_spec(s, 3);
    CHECK(t.samples_per_class == 90);
    CHECK(t.flip_fraction == 0.0);
    CHECK(t.seed != s.seed);
}

TEST_CASE("zero epochs return the initial model") {
    const auto d = generate_dataset(small_spec());
    SoftmaxModel m(d.labels(), 256);
    m.weights()[3] = 0.25;
    TrainOptions opts;
    opts.epochs = 0;
    const auto r = train(m, d.samples, opts);
    CHECK(r.model == m);
    CHECK(r.loss_trace.size() == 1);
}

TEST_CASE("separable toy data trains to 100%") {
    oracle::Rng rng(1);
    const auto data = toy_two_class(rng);
    REQUIRE(perceptron_separates(data));
    SoftmaxModel m({Label("a"), Label("b")}, 2);
    TrainOptions opts;
    opts.epochs = 200;
    const auto r = train(m, data, opts);
    CHECK(top1_accuracy(r.model, data, false) == 1.0);
}

TEST_CASE("loss trace is non-increasing at the default rate") {
    const auto d = generate_dataset(small_spec());
    TrainOptions opts;
    opts.epochs = 60;
    const auto r = train(SoftmaxModel(d.labels(), 256), d.samples, opts);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) CHECK(r.loss_trace[i] <= r.loss_trace[i - 1]);
    CHECK(r.loss_trace.back() < r.loss_trace.front());
    CHECK(r.model.finite());
}

TEST_CASE("an oversized learning rate is tamed by halving") {
    const auto d = generate_dataset(small_spec());
    TrainOptions opts;
    opts.epochs = 20;
    opts.learning_rate = 1e4;
    const auto r = train(SoftmaxModel(d.labels(), 256), d.samples, opts);
    CHECK(r.halvings > 0);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) CHECK(r.loss_trace[i] <= r.loss_trace[i - 1]);
    opts.learning_rate = 0.0;
    CHECK_THROWS_AS(train(SoftmaxModel(d.labels(), 256), d.samples, opts), std::invalid_argument);
}

TEST_CASE("batch gradient matches finite differences") {
    SynthSpec s = small_spec();
    s.classes = 4;
    s.samples_per_class = 5;
    const auto d = generate_dataset(s);
    SoftmaxModel m(d.labels(), 256);
    oracle::Rng rng(17);
    for (auto& w : m.weights()) w = rng.uniform(-0.3, 0.3);
    for (auto& b : m.bias()) b = rng.uniform(-1, 1);
    const auto g = loss_and_gradient(m, d.samples);
    CHECK(g.loss == doctest::Approx(mean_loss(m, d.samples)).epsilon(1e-14));
    const double h = 1e-5;
    for (int t = 0; t < 60; ++t) {
        const bool bias = t % 6 == 0;
        const std::size_t idx = bias ? rng.below(m.bias().size()) : rng.below(m.weights().size());
        auto& ref = bias ? m.bias()[idx] : m.weights()[idx];
        const double keep = ref;
        ref = keep + h;
        const double up = mean_loss(m, d.samples);
        ref = keep - h;
        const double down = mean_loss(m, d.samples);
        ref = keep;
        const double fd = (up - down) / (2 * h);
        const double an = bias ? g.bias[idx] : g.weights[idx];
        CHECK(std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3}) <= 1e-5);
    }
}

TEST_CASE("emitted log") {
    SynthSpec s = small_spec();
    s.classes = 2;
    const auto d = generate_dataset(s);
    TrainOptions opts;
    opts.epochs = 30;
    const auto r = train(SoftmaxModel(d.labels(), 256), d.samples, opts);
    const auto log = emit_log(r.model, d);
    REQUIRE(log.size() == d.samples.size());
    for (const auto& rec : log.records()) {
        CHECK(rec.cands.size() == 2);
        double sum = 0;
        for (const auto& c : rec.cands) sum += c.confidence;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        CHECK(*rec.dataset == "synth");
        CHECK(rec.strokes.has_value());
    }
    const auto parsed = parse_log_string(write_log_string(log), true);
    CHECK(parsed.ok());
    CHECK(parsed.log == log);

    // candidates follow the model's softmax with lowest-index ties
    const auto& x = d.samples[0];
    const auto p = softmax(r.model.logits(x.features));
    CHECK(log.records()[0].top1().label == r.model.labels()[argmax(p)]);
    CHECK(log.records()[0].top1().confidence == p[argmax(p)]);

    SoftmaxModel wrong(d.labels(), 10);
    CHECK_THROWS_AS(emit_log(wrong, d), std::invalid_argument);
}

TEST_CASE("model JSON round trip is exact") {
    const auto d = generate_dataset(small_spec());
    TrainOptions opts;
    opts.epochs = 5;
    const auto r = train(SoftmaxModel(d.labels(), 256), d.samples, opts);
    const auto back = model_from_json(model_to_json(r.model));
    CHECK(back == r.model);
    CHECK_THROWS(model_from_json("{\"classes\":[]}"));
}

TEST_CASE("confident flips are always flagged") {
    DemoConfig cfg;
    cfg.spec.samples_per_class = 60;
    cfg.spec.flip_fraction = 0.05;
    cfg.train.epochs = 150;
    const auto res = run_demo(cfg);
    const auto flagged = detect_mislabels(res.log, 0.99);
    std::set<std::string> ids;
    for (const auto& f : flagged) ids.insert(f.id);
    const auto labels = res.audit.labels();
    std::size_t checked = 0;
    for (std::size_t i = 0; i < res.audit.samples.size(); ++i) {
        const auto& s = res.audit.samples[i];
        const auto& r = res.log.records()[i];
        REQUIRE(r.id == s.id);
        if (s.flipped() && r.top1().label == labels[s.truth] && r.top1().confidence >= 0.99) {
            CHECK(ids.count(s.id) == 1);
            ++checked;
        }
    }
    CHECK(checked > 0);
}
