#include "confaudit/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confaudit {

namespace {

void require_finite(std::span<const double> z) {
    if (z.empty()) throw std::invalid_argument("logit vector is empty");
    for (double v : z)
        if (!std::isfinite(v)) throw std::domain_error("logit vector has a non-finite entry");
}

double max_entry(std::span<const double> z) {
    return *std::max_element(z.begin(), z.end());
}

}  // namespace

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double softmax_into(std::span<const double> logits, std::span<double> out) {
    require_finite(logits);
    if (out.size() != logits.size()) throw std::invalid_argument("softmax_into: size mismatch");
    const double m = max_entry(logits);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        out[j] = std::exp(logits[j] - m);
        sum += out[j];
    }
    for (double& p : out) p /= sum;
    return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> probs(logits.size());
    softmax_into(logits, probs);
    return probs;
}

std::vector<double> log_softmax(std::span<const double> logits) {
    require_finite(logits);
    const double m = max_entry(logits);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    const double log_sum = std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) out[j] = (logits[j] - m) - log_sum;
    return out;
}

std::vector<double> xent_grad(std::span<const double> logits, std::size_t gold_index) {
    if (gold_index >= logits.size())
        throw std::out_of_range("xent_grad: gold index " + std::to_string(gold_index) +
                                " out of range for " + std::to_string(logits.size()) + " classes");
    std::vector<double> g = softmax(logits);
    g[gold_index] -= 1.0;
    return g;
}

}  // namespace confaudit
