#pragma once

#include <span>
#include <vector>

#include "amga/numerics/autograd.hpp"
#include "amga/zoo/model.hpp"

namespace amga::engine {

using ModelList = std::span<const zoo::ModelRecord* const>;

/// softmax over free logits, computed in double.
std::vector<double> simplex_weights(std::span<const double> logits);

/// sum_i w_i * softmax(model_i(x)), w = softmax(beta_logits).
Tensor ensemble_predict(const Tensor& x, ModelList models, std::span<const double> beta_logits);

/// Cross-entropy of the ensemble mixture, without a tape.
double ensemble_loss_value(const Tensor& x, std::span<const std::size_t> labels, ModelList models,
                           std::span<const double> beta_logits);

/// Record the ensemble loss on `tape`; differentiable w.r.t. x and beta_logits.
Var ensemble_loss(Tape& tape, Var x, std::span<const std::size_t> labels, ModelList models, Var beta_logits);

} // namespace amga::engine
