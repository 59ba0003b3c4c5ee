#include "amga/engine/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace amga::engine {

namespace {

void check_models(ModelList models, std::size_t n_logits)
{
    if (models.empty()) throw ConfigError("ensemble: no models");
    if (models.size() != n_logits) {
        throw DimensionError("ensemble: " + std::to_string(models.size()) + " models but " +
                             std::to_string(n_logits) + " weight logits");
    }
}

} // namespace

std::vector<double> simplex_weights(std::span<const double> logits)
{
    std::vector<double> w(logits.begin(), logits.end());
    if (w.empty()) return w;
    const double top = *std::max_element(w.begin(), w.end());
    double total = 0.0;
    for (auto& v : w) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : w) v /= total;
    return w;
}

Tensor ensemble_predict(const Tensor& x, ModelList models, std::span<const double> beta_logits)
{
    check_models(models, beta_logits.size());
    const auto w = simplex_weights(beta_logits);
    std::vector<double> acc;
    Shape shape;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const Tensor p = zoo::predict_proba(*models[i], x);
        if (i == 0) {
            shape = p.shape();
            acc.assign(p.numel(), 0.0);
        } else if (p.shape() != shape) {
            throw DimensionError("ensemble: model '" + models[i]->name() + "' output " + shape_str(p.shape()) +
                                 " vs " + shape_str(shape));
        }
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w[i] * p[k];
    }
    return Tensor(shape, std::vector<float>(acc.begin(), acc.end()));
}

double ensemble_loss_value(const Tensor& x, std::span<const std::size_t> labels, ModelList models,
                           std::span<const double> beta_logits)
{
    return kernels::cross_entropy_value(ensemble_predict(x, models, beta_logits), labels);
}

Var ensemble_loss(Tape& tape, Var x, std::span<const std::size_t> labels, ModelList models, Var beta_logits)
{
    check_models(models, tape.value(beta_logits).numel());
    std::vector<Var> parts;
    parts.reserve(models.size());
    for (const auto* m : models) parts.push_back(ag::softmax(tape, zoo::forward_constant(tape, *m, x)));
    const Var mix = ag::softmax_mix(tape, std::move(parts), beta_logits);
    return ag::cross_entropy(tape, mix, std::vector<std::size_t>(labels.begin(), labels.end()));
}

} // namespace amga::engine
