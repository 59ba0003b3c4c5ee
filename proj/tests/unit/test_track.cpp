#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "amga/engine/ensemble.hpp"
#include "amga/numerics/errors.hpp"
#include "amga/track/benchmark.hpp"
#include "amga/track/tracker.hpp"
#include "amga/zoo/task.hpp"
#include "support/fixtures.hpp"

using namespace amga;
using namespace amga::track;

namespace {

std::size_t count_lines(const std::string& text)
{
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

const zoo::ModelRecord& model_named(const std::string& name)
{
    for (const auto& m : testing::shared_zoo())
        if (m.name() == name) return m;
    throw std::runtime_error("no model " + name);
}

} // namespace

TEST_CASE("IoU arithmetic oracles")
{
    CHECK(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 10, 10}, {10, 0, 10, 10}) == 0.0);
    CHECK(iou({0, 0, 10, 10}, {2, 2, 5, 5}) == doctest::Approx(0.25));
    CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
    CHECK(center_error({0, 0, 10, 10}, {3, 4, 10, 10}) == doctest::Approx(5.0));
    CHECK(Box{0, 0, 3, 4}.diagonal() == doctest::Approx(5.0));
}

TEST_CASE("IoU equals pixel counting on integer boxes")
{
    Rng rng(6);
    for (int t = 0; t < 300; ++t) {
        const Box a{double(rng.below(20)), double(rng.below(20)), double(1 + rng.below(15)), double(1 + rng.below(15))};
        const Box b{double(rng.below(20)), double(rng.below(20)), double(1 + rng.below(15)), double(1 + rng.below(15))};
        std::size_t inter = 0, uni = 0;
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x) {
                const bool ia = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
                const bool ib = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
                inter += ia && ib;
                uni += ia || ib;
            }
        CHECK(iou(a, b) == doctest::Approx(static_cast<double>(inter) / uni).epsilon(1e-12));
    }
}

TEST_CASE("metrics on a hand-built run")
{
    const Box gt{0, 0, 10, 10};
    // IoUs: 1, 1/3, 0.5 (exactly at threshold), 0; centre errors 0, 5, 3.33.., 30.
    std::vector<Box> pred{{0, 0, 10, 10}, {5, 0, 10, 10}, {0, 0, 10, 5}, {30, 0, 10, 10}};
    const auto run = TrackRun::from_boxes(pred, std::vector<Box>(4, gt));
    CHECK(run.iou[2] == doctest::Approx(0.5));
    const auto m = compute_metrics(run);
    CHECK(m.ao == doctest::Approx((1.0 + 1.0 / 3.0 + 0.5 + 0.0) / 4.0));
    CHECK(m.sr_050 == doctest::Approx(0.25)); // 0.5 is not above 0.5
    CHECK(m.sr_075 == doctest::Approx(0.25));
    CHECK(m.precision_at_20 == doctest::Approx(0.75));

    // Brute force: success AUC over 21 thresholds with IoU >= t.
    double auc = 0.0;
    for (int k = 0; k <= 20; ++k) {
        int hit = 0;
        for (double v : run.iou) hit += v >= k / 20.0;
        auc += hit / 4.0;
    }
    CHECK(m.success_auc == doctest::Approx(auc / 21.0));
    double np = 0.0;
    for (int k = 0; k <= 20; ++k) {
        int hit = 0;
        for (double e : run.center_error) hit += e / gt.diagonal() <= 0.025 * k;
        np += hit / 4.0;
    }
    CHECK(m.norm_precision_auc == doctest::Approx(np / 21.0));
}

TEST_CASE("success curve grid and endpoints")
{
    const auto t = success_thresholds();
    REQUIRE(t.size() == 21);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(0.05 * i));
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    const std::vector<double> ious{0.2, 0.9, 1e-9};
    const auto c = success_curve(ious);
    CHECK(c.front() == 1.0);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] <= c[i - 1]);
    CHECK_THROWS_AS(compute_metrics(TrackRun{}), ContractError);
    CHECK(metric_names().size() == 6);
    CHECK_THROWS_AS(metric_value({}, "eao"), ConfigError);
}

TEST_CASE("sequences are deterministic and well formed")
{
    for (const auto& spec : default_suite(1)) {
        const auto a = generate_sequence(spec);
        const auto b = generate_sequence(spec);
        REQUIRE(a.frames.size() == spec.length);
        CHECK(frame_checksum(a.frames[0]) == frame_checksum(b.frames[0]));
        CHECK(frame_checksum(a.frames.back()) == frame_checksum(b.frames.back()));
        CHECK(a.boxes == b.boxes);
        const Box& b0 = a.boxes[0];
        CHECK(b0.w == 32.0);
        CHECK(b0.h == 32.0);
        CHECK(b0.x == std::floor(b0.x));
        CHECK(b0.y == std::floor(b0.y));
        CHECK_FALSE(a.occluded[0]);
        for (const auto& f : a.frames) {
            REQUIRE(f.shape() == Shape{3, 96, 96});
            const auto [lo, hi] = std::minmax_element(f.data().begin(), f.data().end());
            CHECK(*lo >= 0.0f);
            CHECK(*hi <= 1.0f);
        }
        const auto clear = generate_sequence_without_occlusion(spec);
        CHECK(clear.boxes == a.boxes);
        for (bool o : clear.occluded) CHECK_FALSE(o);
    }
}

TEST_CASE("default suite covers motions, classes, occlusion and drift")
{
    const auto suite = default_suite(1);
    REQUIRE(suite.size() == 20);
    std::set<std::string> names;
    std::set<std::size_t> classes;
    std::set<Motion> motions;
    std::size_t occluding = 0, drifting = 0;
    for (const auto& s : suite) {
        names.insert(s.name);
        classes.insert(s.target_class);
        motions.insert(s.motion);
        occluding += s.occlusion_prob > 0;
        drifting += s.scale_drift != 0;
    }
    CHECK(names.size() == 20);
    CHECK(classes.size() == 5);
    CHECK(motions.size() == 3);
    CHECK(occluding == 5);
    CHECK(drifting == 8);
    std::size_t occluded_frames = 0;
    for (const auto& s : suite) {
        const auto seq = generate_sequence(s);
        for (bool o : seq.occluded) occluded_frames += o;
    }
    CHECK(occluded_frames > 0);
}

TEST_CASE("sequence spec validation and JSON overlay")
{
    SequenceSpec s;
    s.length = 1;
    CHECK_THROWS_AS(generate_sequence(s), ConfigError);
    s = {};
    s.target_class = 5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    merge_json({{"name", "x"}, {"motion", "sinusoidal"}, {"length", 10}}, s);
    CHECK(s.name == "x");
    CHECK(s.motion == Motion::sinusoidal);
    CHECK(s.length == 10);
    CHECK_THROWS_AS(merge_json({{"lenght", 3}}, s), ConfigError);
    const nlohmann::json j = s;
    SequenceSpec back;
    merge_json(j, back);
    CHECK(back == s);
}

TEST_CASE("patch sampling at unit scale copies pixels")
{
    Rng rng(1);
    const Tensor frame = testing::random_tensor({3, 40, 40}, rng);
    const Tensor p = sample_patch(frame, 20.0, 18.0, 1.0, 1.0, 8);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < 8; ++y)
            for (std::size_t x = 0; x < 8; ++x) CHECK(p[(c * 8 + y) * 8 + x] == doctest::Approx(frame[(c * 40 + 14 + y) * 40 + 16 + x]));
    const Tensor crop = crop_box(frame, {4, 5, 32, 32});
    CHECK(crop.shape() == Shape{1, 3, 32, 32});
    CHECK(crop.at4(0, 1, 0, 0) == doctest::Approx(frame[(40 + 5) * 40 + 4]));
}

TEST_CASE("tracker follows an easy target and rejects bad setups")
{
    const auto& model = model_named("conv3x3");
    const auto seq = generate_sequence(easy_sequence(3));
    const auto run = track_sequence(seq, model);
    const auto m = compute_metrics(run);
    CHECK(m.ao > 0.9);
    CHECK(m.precision_at_20 == 1.0);

    const Tensor& f0 = seq.frames[0];
    CHECK_THROWS_AS(Tracker(model, f0, {0, 0, 2, 2}), ConfigError);
    CHECK_THROWS_AS(Tracker(model, f0, {80, 80, 32, 32}), ConfigError);
    CHECK_THROWS_AS(Tracker(model_named("mlp_wide"), f0, seq.boxes[0]), ConfigError);
    auto odd = model;
    odd.arch.layers.front().stride = 3;
    CHECK_THROWS_AS(Tracker(odd, f0, seq.boxes[0]), ConfigError);
    CHECK_NOTHROW(Tracker(model_named("strided"), f0, seq.boxes[0]));

    Tracker t(model, f0, seq.boxes[0]);
    const Box b = t.step(f0);
    CHECK(iou(b, seq.boxes[0]) > 0.9);
    CHECK(t.last_score() > 0.9);
    CHECK_FALSE(t.low_confidence());
}

TEST_CASE("repository split and seeds")
{
    const auto setup = split_repository(testing::shared_zoo(), "conv3x3");
    CHECK(setup.feature_model->name() == "conv3x3");
    CHECK(setup.attack_repo.size() == 5);
    for (const auto& m : setup.attack_repo) CHECK(m.name() != "conv3x3");
    CHECK_THROWS_AS(split_repository(testing::shared_zoo(), "vgg"), ConfigError);
    const auto suite = default_suite(1);
    CHECK(sequence_attack_seed(0, suite[0]) != sequence_attack_seed(0, suite[1]));
    CHECK(sequence_attack_seed(0, suite[0]) == sequence_attack_seed(0, suite[0]));
}

TEST_CASE("initial-frame attack touches only the template region of frame 0")
{
    const auto setup = split_repository(testing::shared_zoo(), "conv3x3");
    const auto seq = generate_sequence(default_suite(1)[4]);
    engine::AttackConfig config;
    const auto clean = attack_initial_frame(seq, setup.attack_repo, config, Condition::clean);
    CHECK(std::isinf(clean.psnr));
    CHECK(clean.sequence.frames[0].storage() == seq.frames[0].storage());

    const Tensor crop = crop_box(seq.frames[0], seq.boxes[0]);
    std::vector<const zoo::ModelRecord*> all;
    for (const auto& m : setup.attack_repo) all.push_back(&m);
    const std::vector<double> uniform(all.size(), 0.0);
    CHECK(pseudo_label(crop, setup.attack_repo) == kernels::argmax_rows(engine::ensemble_predict(crop, all, uniform))[0]);

    for (Condition c : {Condition::random_noise, Condition::amga}) {
        const auto att = attack_initial_frame(seq, setup.attack_repo, config, c);
        CHECK(std::isfinite(att.psnr));
        CHECK(att.ssim < 1.0);
        const Tensor& f = att.sequence.frames[0];
        const Box& b = seq.boxes[0];
        double outside = 0.0, inside = 0.0;
        for (std::size_t ch = 0; ch < 3; ++ch)
            for (std::size_t y = 0; y < 96; ++y)
                for (std::size_t x = 0; x < 96; ++x) {
                    const std::size_t i = (ch * 96 + y) * 96 + x;
                    const double d = std::abs(static_cast<double>(f[i]) - seq.frames[0][i]);
                    const bool in = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
                    (in ? inside : outside) = std::max(in ? inside : outside, d);
                }
        CHECK(outside == 0.0);
        CHECK(inside > 0.0);
        CHECK(inside <= config.epsilon + 1e-6);
        for (std::size_t t = 1; t < seq.frames.size(); ++t) CHECK(att.sequence.frames[t].storage() == seq.frames[t].storage());
    }
}

TEST_CASE("single easy sequence benchmark emits six metric rows")
{
    const auto setup = split_repository(testing::shared_zoo(), "conv3x3");
    auto spec = easy_sequence(2);
    spec.name = "easy";
    const auto report = run_benchmark({spec}, setup, engine::AttackConfig{}, {Condition::clean});
    const std::string csv = benchmark_csv(report);
    CHECK(count_lines(csv) == 1 + 6);
    CHECK(csv.rfind("sequence,condition,metric,value\n", 0) == 0);
    CHECK(count_lines(per_frame_csv(report)) == 1 + spec.length);
    const auto summary = benchmark_summary(report);
    CHECK(summary["conditions"]["clean"]["drop_vs_clean"]["success_auc"].get<double>() == 0.0);
    CHECK_THROWS_AS(report.summary(Condition::amga), ConfigError);
}

TEST_CASE("benchmark output is independent of the worker count")
{
    const auto setup = split_repository(testing::shared_zoo(), "conv3x3");
    auto suite = default_suite(1);
    suite.resize(3);
    for (auto& s : suite) s.length = 12;
    const auto a = run_benchmark(suite, setup, engine::AttackConfig{}, all_conditions());
    setenv("AMGA_THREADS", "1", 1);
    const auto b = run_benchmark(suite, setup, engine::AttackConfig{}, all_conditions());
    unsetenv("AMGA_THREADS");
    CHECK(benchmark_csv(a) == benchmark_csv(b));
    CHECK(per_frame_csv(a) == per_frame_csv(b));
}
