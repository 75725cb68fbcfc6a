#pragma once
// Softmax confidence over a logit vector, computed with the max-shift so that
// logits up to +-700 cannot overflow. All arithmetic is float64.

#include <cstddef>
#include <span>
#include <vector>

namespace confaudit {

// Index of the largest entry; ties resolve to the lowest index.
// Throws std::invalid_argument on empty input.
std::size_t argmax(std::span<const double> values);

// probs[j] = exp(z[j] - max z) / sum_l exp(z[l] - max z).
// Throws std::invalid_argument if z is empty, std::domain_error if any entry
// is not finite.
std::vector<double> softmax(std::span<const double> logits);

// z[j] - max z - log sum_l exp(z[l] - max z); every entry <= 0.
std::vector<double> log_softmax(std::span<const double> logits);

// Gradient of -log softmax(z)[gold] with respect to z: softmax(z) - onehot.
// Throws std::out_of_range if gold_index >= size.
std::vector<double> xent_grad(std::span<const double> logits, std::size_t gold_index);

// In-place variant used by the trainer's batch loop; `out` must have the
// same size as `logits`. Returns log sum_l exp(z[l] - max z) + max z.
double softmax_into(std::span<const double> logits, std::span<double> out);

}  // namespace confaudit
