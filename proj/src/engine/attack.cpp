#include "amga/engine/attack.hpp"

#include <algorithm>
#include <cmath>

#include "amga/engine/diversity.hpp"
#include "amga/util/tensor_file.hpp"

namespace amga::engine {

namespace {

float sign_of(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

// x + delta on the tape; a batch-1 delta is tiled across the batch.
Var perturbed_input(Tape& tape, Var x, Var delta)
{
    const Shape& xs = tape.value(x).shape();
    const Shape& ds = tape.value(delta).shape();
    if (xs == ds) return ag::add(tape, x, delta);
    if (ds.size() != xs.size() || ds[0] != 1 || !std::equal(ds.begin() + 1, ds.end(), xs.begin() + 1)) {
        throw DimensionError("perturbation " + shape_str(ds) + " does not fit input " + shape_str(xs));
    }
    const std::size_t per = shape_numel(ds);
    std::vector<long long> idx(shape_numel(xs));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<long long>(i % per);
    return ag::add(tape, x, ag::gather(tape, delta, std::move(idx), xs));
}

struct LossAndGrad {
    double loss = 0.0;
    Tensor grad;
};

// Single-model cross-entropy at x + delta and its gradient w.r.t. delta.
LossAndGrad model_gradient(const Tensor& x, std::span<const std::size_t> labels, const zoo::ModelRecord& model,
                           const Tensor& delta)
{
    Tape tape;
    const Var xv = tape.constant(x);
    const Var dv = tape.variable(delta);
    const Var probs = ag::softmax(tape, zoo::forward_constant(tape, model, perturbed_input(tape, xv, dv)));
    const Var loss = ag::cross_entropy(tape, probs, std::vector<std::size_t>(labels.begin(), labels.end()));
    return {tape.value(loss)[0], tape.backward(loss).of(dv)};
}

double sign_cosine_distance(const Tensor& a, const Tensor& b)
{
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double sa = sign_of(a[i]), sb = sign_of(b[i]);
        dot += sa * sb;
        na += sa * sa;
        nb += sb * sb;
    }
    if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
    return 1.0 - dot / std::sqrt(na * nb);
}

Shape perturbation_shape(const Tensor& x, const AttackConfig& config)
{
    if (x.rank() != 4) throw DimensionError("attack input must be [N,C,H,W], got " + shape_str(x.shape()));
    Shape s = x.shape();
    if (config.shared_perturbation) s[0] = 1;
    return s;
}

struct RefineResult {
    Tensor delta;
    double loss = 0.0;
};

RefineResult refine(const Tensor& x, std::span<const std::size_t> labels, const Tensor& delta_train,
                    const zoo::ModelRecord& test_model, const AttackConfig& config)
{
    auto [loss, grad] = model_gradient(x, labels, test_model, delta_train);
    if (!std::isfinite(loss) || !grad.all_finite()) throw AttackError("meta-test: non-finite loss or gradient");
    Tensor out = delta_train;
    const float e = budget_bound(config.epsilon);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        const double v = static_cast<double>(out[i]) + config.alpha * sign_of(grad[i]);
        out[i] = std::clamp(static_cast<float>(v), -e, e);
    }
    return {std::move(out), loss};
}

} // namespace

PerturbationState PerturbationState::zeros(const Shape& shape, std::size_t n_models)
{
    return PerturbationState{Tensor(shape), Tensor(shape), 0, std::vector<double>(n_models, 0.0)};
}

PerturbationState momentum_update(PerturbationState state, const Tensor& gradient, double mu)
{
    require_same_shape(state.momentum, gradient, "momentum_update");
    double norm = 0.0;
    for (float g : gradient.data()) norm += std::abs(static_cast<double>(g));
    const double inv = norm < 1e-12 ? 0.0 : 1.0 / norm;
    for (std::size_t i = 0; i < gradient.numel(); ++i) {
        state.momentum[i] = static_cast<float>(mu * state.momentum[i] + inv * gradient[i]);
    }
    return state;
}

PerturbationState perturbation_step(PerturbationState state, double step, double epsilon)
{
    const float e = budget_bound(epsilon);
    for (std::size_t i = 0; i < state.delta.numel(); ++i) {
        const double v = static_cast<double>(state.delta[i]) + step * sign_of(state.momentum[i]);
        state.delta[i] = std::clamp(static_cast<float>(v), -e, e);
    }
    ++state.iteration;
    return state;
}

MetaTrainResult meta_train(const Tensor& x, std::span<const std::size_t> labels, ModelList train_models,
                           const AttackConfig& config, Rng& rng)
{
    config.validate();
    if (train_models.empty()) throw ConfigError("meta_train: no training models");
    const Shape dshape = perturbation_shape(x, config);
    auto state = PerturbationState::zeros(dshape, train_models.size());
    std::optional<GaussianKernel> kernel;
    if (config.smoothing_mode == SmoothingMode::every_iteration) kernel = build_gaussian_kernel(config.sigma);

    MetaTrainResult r;
    Tensor previous_momentum;
    for (std::size_t k = 0; k < config.K; ++k) {
        const auto dp = draw_diversity(config, x.dim(2), x.dim(3), rng);
        Tape tape;
        const Var xv = tape.constant(x);
        const Var dv = tape.variable(state.delta);
        Var input = perturbed_input(tape, xv, dv);
        if (dp.applied) input = ag::gather(tape, input, diversity_index(x.shape(), dp), x.shape());
        Tensor beta(Shape{state.beta_logits.size()},
                    std::vector<float>(state.beta_logits.begin(), state.beta_logits.end()));
        const Var bv = config.learn_beta ? tape.variable(std::move(beta)) : tape.constant(std::move(beta));
        const Var loss = ensemble_loss(tape, input, labels, train_models, bv);
        const double lv = tape.value(loss)[0];
        if (!std::isfinite(lv)) throw AttackError("meta-train: non-finite loss at iteration " + std::to_string(k));
        const auto grads = tape.backward(loss);
        const Tensor g = grads.of(dv);
        if (!g.all_finite()) throw AttackError("meta-train: non-finite gradient at iteration " + std::to_string(k));
        r.loss_trace.push_back(lv);

        state = momentum_update(std::move(state), g, config.mu);
        if (k > 0) r.direction_changes.push_back(sign_cosine_distance(previous_momentum, state.momentum));
        previous_momentum = state.momentum;
        state = perturbation_step(std::move(state), config.step_size(k), config.epsilon);
        if (kernel) state.delta = smooth_perturbation(state.delta, *kernel, config.epsilon);

        if (config.learn_beta) {
            const Tensor gb = grads.of(bv);
            for (std::size_t i = 0; i < state.beta_logits.size(); ++i) state.beta_logits[i] += config.beta_rate * gb[i];
        }
        r.beta_weights.push_back(simplex_weights(state.beta_logits));
    }
    r.delta_train = std::move(state.delta);
    r.beta_logits = std::move(state.beta_logits);
    return r;
}

Tensor meta_test_refine(const Tensor& x, std::span<const std::size_t> labels, const Tensor& delta_train,
                        const zoo::ModelRecord& test_model, const AttackConfig& config)
{
    return refine(x, labels, delta_train, test_model, config).delta;
}

Tensor apply_perturbation(const Tensor& x, const Tensor& delta)
{
    if (x.rank() != 4 || delta.rank() != 4) throw DimensionError("apply_perturbation: expected [N,C,H,W] tensors");
    const bool tiled = delta.shape() != x.shape();
    if (tiled && (delta.dim(0) != 1 || delta.numel() * x.dim(0) != x.numel())) {
        throw DimensionError("perturbation " + shape_str(delta.shape()) + " does not fit input " + shape_str(x.shape()));
    }
    Tensor out(x.shape());
    const std::size_t per = delta.numel();
    for (std::size_t i = 0; i < x.numel(); ++i) {
        out[i] = std::clamp(x[i] + delta[tiled ? i % per : i], 0.0f, 1.0f);
    }
    return out;
}

AttackResult compose_adversarial(const Tensor& x, const Tensor& delta_test, const AttackConfig& config)
{
    AttackResult r;
    r.delta_test = delta_test;
    if (config.smoothing_mode == SmoothingMode::none) {
        r.delta_smoothed = delta_test;
        project_budget(r.delta_smoothed, config.epsilon);
    } else {
        r.delta_smoothed = smooth_perturbation(delta_test, build_gaussian_kernel(config.sigma), config.epsilon);
    }
    r.adversarial_example = apply_perturbation(x, r.delta_smoothed);
    r.config_echo = config;
    return r;
}

AttackResult run_amga(const Tensor& x, std::span<const std::size_t> labels, const std::vector<zoo::ModelRecord>& repo,
                      const AttackConfig& config)
{
    config.validate();
    Rng rng(config.seed);
    const auto split = zoo::sample_task(repo.size(), config.n, rng);
    const auto train = zoo::resolve(repo, split.train_models);
    auto mt = meta_train(x, labels, train, config, rng);
    Tensor delta_test = mt.delta_train;
    if (config.meta_test) {
        auto rr = refine(x, labels, mt.delta_train, repo[split.test_model], config);
        delta_test = std::move(rr.delta);
        mt.loss_trace.push_back(rr.loss);
    }
    AttackResult r = compose_adversarial(x, delta_test, config);
    r.delta_train = std::move(mt.delta_train);
    r.loss_trace = std::move(mt.loss_trace);
    r.beta_weights = simplex_weights(mt.beta_logits);
    r.direction_changes = std::move(mt.direction_changes);
    r.split = split;
    return r;
}

std::string to_string(BaselineKind k)
{
    switch (k) {
    case BaselineKind::random_noise: return "random_noise";
    case BaselineKind::fgsm: return "fgsm";
    case BaselineKind::ifgsm: return "ifgsm";
    case BaselineKind::mim: return "mim";
    }
    return "?";
}

BaselineKind baseline_from_string(const std::string& s)
{
    for (auto k : {BaselineKind::random_noise, BaselineKind::fgsm, BaselineKind::ifgsm, BaselineKind::mim}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown baseline attack '" + s + "'");
}

Tensor baseline_attack(BaselineKind kind, const Tensor& x, std::span<const std::size_t> labels,
                       const zoo::ModelRecord& model, const AttackConfig& config)
{
    config.validate();
    if (x.rank() != 4) throw DimensionError("baseline_attack: expected [N,C,H,W], got " + shape_str(x.shape()));
    if (kind == BaselineKind::random_noise) {
        Rng rng(config.seed);
        std::vector<double> noise(x.numel());
        double peak = 0.0;
        for (auto& v : noise) {
            v = rng.normal();
            peak = std::max(peak, std::abs(v));
        }
        Tensor delta(x.shape());
        const float e = budget_bound(config.epsilon);
        for (std::size_t i = 0; i < noise.size(); ++i) {
            delta[i] = std::clamp(static_cast<float>(config.epsilon * noise[i] / peak), -e, e);
        }
        return apply_perturbation(x, delta);
    }
    const std::size_t iterations = kind == BaselineKind::fgsm ? 1 : config.K;
    const double mu = kind == BaselineKind::mim ? config.mu : 0.0;
    auto state = PerturbationState::zeros(x.shape(), 1);
    for (std::size_t k = 0; k < iterations; ++k) {
        const auto lg = model_gradient(x, labels, model, state.delta);
        if (!std::isfinite(lg.loss)) throw AttackError(to_string(kind) + ": non-finite loss at iteration " + std::to_string(k));
        if (kind == BaselineKind::mim) {
            state = momentum_update(std::move(state), lg.grad, mu);
        } else {
            state.momentum = lg.grad;
        }
        state = perturbation_step(std::move(state), config.alpha, config.epsilon);
    }
    return apply_perturbation(x, state.delta);
}

void save_perturbation(const std::filesystem::path& path, const Tensor& delta, const nlohmann::json& header)
{
    util::write_tensor_file(path, kPerturbationMagic, header, {delta});
}

Tensor load_perturbation(const std::filesystem::path& path)
{
    auto f = util::read_tensor_file(path, kPerturbationMagic);
    if (f.tensors.size() != 1) throw ParseError(path.string() + ": expected exactly one tensor");
    return std::move(f.tensors[0]);
}

} // namespace amga::engine
