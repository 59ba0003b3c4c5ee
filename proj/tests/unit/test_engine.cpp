#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "amga/engine/attack.hpp"
#include "amga/engine/diversity.hpp"
#include "amga/engine/ensemble.hpp"
#include "amga/engine/gaussian.hpp"
#include "amga/numerics/errors.hpp"
#include "amga/util/tensor_file.hpp"
#include "amga/zoo/task.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace amga;
using namespace amga::engine;

namespace {

Tensor validation_batch(std::size_t first, std::size_t count, std::vector<std::size_t>& labels)
{
    const auto& d = testing::shared_dataset();
    std::vector<std::size_t> idx;
    labels.clear();
    for (std::size_t i = first; i < first + count; ++i) {
        idx.push_back(d.validation_indices[i]);
        labels.push_back(d.labels[d.validation_indices[i]]);
    }
    return zoo::gather_images(d.images, idx);
}

AttackConfig fgsm_config(std::uint64_t seed)
{
    AttackConfig c;
    c.n = 1;
    c.K = 1;
    c.mu = 0.0;
    c.diversity_prob = 0.0;
    c.smoothing_mode = SmoothingMode::none;
    c.meta_test = false;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("attack config defaults")
{
    const AttackConfig c;
    CHECK(c.alpha == 0.01);
    CHECK(c.mu == 0.9);
    CHECK(c.epsilon == 8.0 / 255.0);
    CHECK(c.K == 10);
    CHECK(c.n == 3);
    CHECK(c.sigma == 1.0);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("attack config validation names the field")
{
    auto expect = [](AttackConfig c, const char* field) {
        try {
            c.validate();
            FAIL("expected ConfigError for " << field);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    AttackConfig c;
    c.alpha = 0;
    expect(c, "alpha");
    c = {};
    c.epsilon = -1e-3;
    expect(c, "epsilon");
    c = {};
    c.mu = 1.0;
    expect(c, "mu");
    c = {};
    c.sigma = 0.0;
    expect(c, "sigma");
    c = {};
    c.K = 0;
    expect(c, "K");
    c = {};
    c.diversity_prob = 1.5;
    expect(c, "diversity_prob");
    c = {};
    c.epsilon = 0.0;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("attack config JSON round-trip and unknown keys")
{
    AttackConfig c;
    c.sigma = 2.0;
    c.smoothing_mode = SmoothingMode::every_iteration;
    c.step_schedule = StepSchedule::constant;
    c.seed = 77;
    const nlohmann::json j = c;
    AttackConfig back;
    merge_json(j, back);
    CHECK(back == c);
    CHECK_THROWS_AS(merge_json(nlohmann::json{{"alpah", 0.1}}, back), ConfigError);
    CHECK_THROWS_AS(smoothing_mode_from_string("blur"), ConfigError);
    CHECK(smoothing_mode_from_string(to_string(SmoothingMode::none)) == SmoothingMode::none);
    CHECK(step_schedule_from_string("constant") == StepSchedule::constant);
}

TEST_CASE("cosine schedule starts at alpha and decays towards alpha/4")
{
    AttackConfig c;
    CHECK(c.step_size(0) == c.alpha);
    double prev = c.step_size(0);
    for (std::size_t k = 1; k < c.K; ++k) {
        const double s = c.step_size(k);
        CHECK(s < prev);
        CHECK(s > c.alpha / 4.0);
        prev = s;
    }
    CHECK(c.step_size(c.K / 2) == doctest::Approx(c.alpha * 0.625));
    c.step_schedule = StepSchedule::constant;
    for (std::size_t k = 0; k < c.K; ++k) CHECK(c.step_size(k) == c.alpha);
}

TEST_CASE("gaussian kernel")
{
    CHECK(std::abs(gaussian_density(0, 0, 1.0) - 1.0 / (2.0 * std::numbers::pi)) < 1e-12);
    CHECK(gaussian_density(1, 0, 1.0) == doctest::Approx(std::exp(-0.5) / (2 * std::numbers::pi)));
    for (double s : {0.5, 1.0, 2.0}) {
        const auto k = build_gaussian_kernel(s);
        CHECK(k.radius == static_cast<std::size_t>(std::ceil(3 * s)));
        double total = 0.0;
        for (double v : k.values) total += v;
        CHECK(std::abs(total - 1.0) < 1e-12);
        const long r = static_cast<long>(k.radius);
        CHECK(k.at(0, 0) > k.at(0, 1));
        CHECK(k.at(-1, 2) == k.at(2, -1));
        CHECK(k.at(-r, -r) == k.at(r, r));
    }
    CHECK_THROWS_AS(build_gaussian_kernel(0.0), ConfigError);
    CHECK_THROWS_AS(build_gaussian_kernel(-1.0), ConfigError);
}

TEST_CASE("mirror reflection without edge repeat")
{
    CHECK(reflect_index(-1, 5) == 1);
    CHECK(reflect_index(-4, 5) == 4);
    CHECK(reflect_index(5, 5) == 3);
    CHECK(reflect_index(8, 5) == 0);
    CHECK(reflect_index(3, 1) == 0);
    for (long i = -20; i < 20; ++i) CHECK(static_cast<long>(reflect_index(i, 6)) == testing::mirror(i, 6));
}

TEST_CASE("smoothing matches the nested-loop oracle")
{
    Rng rng(8);
    for (double sigma : {0.5, 1.0, 2.0}) {
        const Tensor d = testing::random_tensor({2, 3, 12, 9}, rng, -0.05, 0.05);
        const Tensor ours = smooth_perturbation(d, build_gaussian_kernel(sigma), 0.02);
        const Tensor ref = testing::smooth_oracle(d, sigma, 0.02);
        CHECK(max_abs_diff(ours, ref) < 1e-6);
    }
    Tensor flat({3, 8, 8});
    flat.fill(0.01f);
    const Tensor f = gaussian_filter(flat, build_gaussian_kernel(1.0));
    for (float v : f.data()) CHECK(v == doctest::Approx(0.01).epsilon(1e-5));
}

TEST_CASE("budget bound is the largest float not above epsilon")
{
    for (double e : {8.0 / 255.0, 0.1, 1.0 / 3.0, 0.0}) {
        const float b = budget_bound(e);
        CHECK(static_cast<double>(b) <= e);
        CHECK(static_cast<double>(std::nextafter(b, 1.0f)) > e);
    }
    Tensor d = Tensor::from({4}, {0.5f, -0.5f, 0.01f, -0.2f});
    project_budget(d, 0.1);
    CHECK(d.storage() == std::vector<float>{budget_bound(0.1), -budget_bound(0.1), 0.01f, -budget_bound(0.1)});
}

TEST_CASE("input diversity")
{
    Rng rng(3);
    const Tensor x = testing::random_tensor({1, 3, 32, 32}, rng);
    AttackConfig c;
    c.diversity_prob = 0.0;
    for (int i = 0; i < 10; ++i) CHECK(input_diversity(x, c, rng).storage() == x.storage());

    c.diversity_prob = 1.0;
    for (int i = 0; i < 50; ++i) {
        const auto p = draw_diversity(c, 32, 32, rng);
        REQUIRE(p.applied);
        CHECK(p.new_height >= 28);
        CHECK(p.new_height <= 32);
        CHECK(p.offset_y + p.new_height <= 32);
        CHECK(p.offset_x + p.new_width <= 32);
        const Tensor y = apply_diversity(x, p);
        const auto idx = diversity_index(x.shape(), p);
        for (std::size_t i = 0; i < idx.size(); ++i) CHECK(y[i] == (idx[i] < 0 ? 0.0f : x[static_cast<std::size_t>(idx[i])]));
    }
    const auto p = diversity_with_scale(0.5, 32, 32, 3, 5);
    CHECK(p.new_height == 16);
    const Tensor y = apply_diversity(x, p);
    CHECK(y.at4(0, 0, 0, 0) == 0.0f);
    CHECK(y.at4(0, 1, 3, 5) == x.at4(0, 1, 0, 0));
    CHECK(y.at4(0, 2, 4, 6) == x.at4(0, 2, 2, 2));
    CHECK(apply_diversity(x, diversity_with_scale(1.0, 32, 32, 0, 0)).storage() == x.storage());
}

TEST_CASE("ensemble prediction and loss")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 4, y);
    const auto models = zoo::resolve(zoo, {0, 1, 2});
    const std::vector<double> uniform(3, 0.0);
    const auto w = simplex_weights(uniform);
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 3.0));

    const Tensor p = ensemble_predict(x, models, uniform);
    const Tensor p0 = zoo::predict_proba(zoo[0], x), p1 = zoo::predict_proba(zoo[1], x), p2 = zoo::predict_proba(zoo[2], x);
    double ce = 0.0;
    for (std::size_t i = 0; i < p.numel(); ++i) CHECK(p[i] == doctest::Approx((p0[i] + p1[i] + p2[i]) / 3.0).epsilon(1e-5));
    for (std::size_t b = 0; b < 4; ++b) ce -= std::log(static_cast<double>(p[b * 5 + y[b]]) + 1e-12);
    CHECK(ensemble_loss_value(x, y, models, uniform) == doctest::Approx(ce / 4.0).epsilon(1e-5));

    Tape tape;
    const Var xv = tape.variable(x);
    const Var bl = tape.variable(Tensor({3}));
    const Var loss = ensemble_loss(tape, xv, y, models, bl);
    CHECK(tape.value(loss)[0] == doctest::Approx(ce / 4.0).epsilon(1e-5));
    // Gradient with respect to the weights: w_i (a_i - sum_j w_j a_j) with a_i = -mean(p_i[y] / p[y]).
    const Tensor gb = tape.backward(loss).of(bl);
    const Tensor* parts[3] = {&p0, &p1, &p2};
    double a[3] = {0, 0, 0}, mean = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t b = 0; b < 4; ++b) a[i] -= (*parts[i])[b * 5 + y[b]] / (p[b * 5 + y[b]] + 1e-12) / 4.0;
        mean += a[i] / 3.0;
    }
    for (int i = 0; i < 3; ++i) CHECK(gb[i] == doctest::Approx((a[i] - mean) / 3.0).epsilon(1e-3));
}

TEST_CASE("momentum recurrence equals the unrolled closed form")
{
    Rng rng(12);
    for (double mu : {0.0, 0.5, 0.9}) {
        auto state = PerturbationState::zeros({1, 2, 3, 3}, 1);
        std::vector<std::vector<double>> history;
        for (int k = 0; k < 6; ++k) {
            const Tensor g = testing::random_tensor({1, 2, 3, 3}, rng, -1, 1);
            history.emplace_back(g.data().begin(), g.data().end());
            state = momentum_update(std::move(state), g, mu);
            const auto ref = testing::momentum_closed_form(history, mu);
            for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(state.momentum[i] - ref[i]) < 1e-7);
        }
    }
    auto s = PerturbationState::zeros({4}, 1);
    s.momentum = Tensor::from({4}, {1, 2, 3, 4});
    s = momentum_update(std::move(s), Tensor({4}), 0.5);
    CHECK(s.momentum.storage() == std::vector<float>{0.5f, 1.0f, 1.5f, 2.0f});
}

TEST_CASE("perturbation step uses sign(0) = 0 and projects")
{
    auto s = PerturbationState::zeros({4}, 1);
    s.delta = Tensor::from({4}, {0.0f, 0.03f, -0.03f, 0.0f});
    s.momentum = Tensor::from({4}, {1.0f, 1.0f, -1.0f, 0.0f});
    s = perturbation_step(std::move(s), 0.01, 0.031);
    CHECK(s.delta[0] == doctest::Approx(0.01));
    CHECK(s.delta[1] == budget_bound(0.031));
    CHECK(s.delta[2] == -budget_bound(0.031));
    CHECK(s.delta[3] == 0.0f);
    CHECK(s.iteration == 1);
}

TEST_CASE("run_amga reduces to FGSM")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Tensor x = validation_batch(seed * 3, 3, y);
        const auto c = fgsm_config(seed);
        const auto r = run_amga(x, y, zoo, c);
        REQUIRE(r.split.n() == 1);
        const Tensor ref = testing::fgsm(zoo[r.split.train_models[0]], x, y, c.alpha, c.epsilon);
        CHECK(max_abs_diff(r.adversarial_example, ref) <= 1e-7);
    }
}

TEST_CASE("MIM with zero momentum equals I-FGSM; FGSM baseline equals the oracle")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(10, 4, y);
    AttackConfig c;
    c.mu = 0.0;
    const Tensor mim = baseline_attack(BaselineKind::mim, x, y, zoo[1], c);
    const Tensor ifgsm = baseline_attack(BaselineKind::ifgsm, x, y, zoo[1], c);
    CHECK(max_abs_diff(mim, ifgsm) <= 1e-7);
    const Tensor fgsm = baseline_attack(BaselineKind::fgsm, x, y, zoo[1], c);
    CHECK(max_abs_diff(fgsm, testing::fgsm(zoo[1], x, y, c.alpha, c.epsilon)) <= 1e-7);
    CHECK(baseline_from_string("mim") == BaselineKind::mim);
    CHECK_THROWS_AS(baseline_from_string("pgd"), ConfigError);
}

TEST_CASE("random-noise baseline spends exactly the budget")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 2, y);
    AttackConfig c;
    const Tensor n = baseline_attack(BaselineKind::random_noise, x, y, zoo[0], c);
    double peak = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) peak = std::max(peak, std::abs(static_cast<double>(n[i]) - x[i]));
    CHECK(peak <= c.epsilon + 1e-7);
    CHECK(peak > 0.5 * c.epsilon);
    CHECK(baseline_attack(BaselineKind::random_noise, x, y, zoo[0], c).storage() == n.storage());
}

TEST_CASE("run_amga: determinism, budget and episode bookkeeping")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(20, 2, y);
    AttackConfig c;
    c.seed = 5;
    const auto a = run_amga(x, y, zoo, c), b = run_amga(x, y, zoo, c);
    CHECK(a.adversarial_example.storage() == b.adversarial_example.storage());
    CHECK(a.split.train_models == b.split.train_models);
    c.seed = 6;
    CHECK(run_amga(x, y, zoo, c).adversarial_example.storage() != a.adversarial_example.storage());

    CHECK(a.loss_trace.size() == c.K + 1);
    for (double l : a.loss_trace) CHECK(std::isfinite(l));
    double wsum = 0.0;
    for (double w : a.beta_weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0));
    for (const Tensor* d : {&a.delta_train, &a.delta_test, &a.delta_smoothed}) CHECK(max_abs(*d) <= c.epsilon);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        CHECK(a.adversarial_example[i] >= 0.0f);
        CHECK(a.adversarial_example[i] <= 1.0f);
    }
    CHECK(max_abs_diff(a.adversarial_example, apply_perturbation(x, a.delta_smoothed)) == 0.0);
}

TEST_CASE("zero budget leaves the input untouched")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 2, y);
    AttackConfig c;
    c.epsilon = 0.0;
    CHECK(run_amga(x, y, zoo, c).adversarial_example.storage() == x.storage());
}

TEST_CASE("shared perturbation mode yields one delta for the batch")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 3, y);
    AttackConfig c;
    c.shared_perturbation = true;
    const auto r = run_amga(x, y, zoo, c);
    CHECK(r.delta_smoothed.dim(0) == 1);
    CHECK(r.adversarial_example.shape() == x.shape());
}

TEST_CASE("every-iteration smoothing keeps the budget")
{
    const auto& zoo = testing::shared_zoo();
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 1, y);
    AttackConfig c;
    c.smoothing_mode = SmoothingMode::every_iteration;
    const auto r = run_amga(x, y, zoo, c);
    CHECK(max_abs(r.delta_smoothed) <= c.epsilon);
}

TEST_CASE("a non-finite loss raises an attack error naming the iteration")
{
    auto repo = testing::shared_zoo();
    for (auto& m : repo) m.weights.back().fill(std::numeric_limits<float>::quiet_NaN());
    std::vector<std::size_t> y;
    const Tensor x = validation_batch(0, 1, y);
    try {
        run_amga(x, y, repo, AttackConfig{});
        FAIL("expected AttackError");
    } catch (const AttackError& e) {
        CHECK(std::string(e.what()).find("iteration") != std::string::npos);
    }
}

TEST_CASE("perturbation files round-trip")
{
    const auto dir = testing::scratch_dir("perturbation");
    Rng rng(2);
    const Tensor d = testing::random_tensor({1, 3, 32, 32}, rng, -0.03, 0.03);
    save_perturbation(dir / "d.amd", d, {{"seed", 1}});
    CHECK(load_perturbation(dir / "d.amd").storage() == d.storage());
    util::write_tensor_file(dir / "w.amz", "AMGAZOO1", {}, {d});
    CHECK_THROWS_AS(load_perturbation(dir / "w.amz"), ParseError);
}
