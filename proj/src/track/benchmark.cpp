#include "amga/track/benchmark.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "amga/quality/metrics.hpp"
#include "amga/util/parallel.hpp"

namespace amga::track {

std::string to_string(Condition c)
{
    switch (c) {
    case Condition::clean: return "clean";
    case Condition::random_noise: return "random_noise";
    case Condition::amga: return "amga";
    }
    return "?";
}

Condition condition_from_string(const std::string& s)
{
    for (auto c : all_conditions()) {
        if (to_string(c) == s) return c;
    }
    throw ConfigError("unknown condition '" + s + "'");
}

std::vector<Condition> all_conditions() { return {Condition::clean, Condition::random_noise, Condition::amga}; }

std::size_t pseudo_label(const Tensor& crop, const std::vector<zoo::ModelRecord>& attack_repo)
{
    std::vector<const zoo::ModelRecord*> models;
    for (const auto& m : attack_repo) models.push_back(&m);
    const std::vector<double> uniform(models.size(), 0.0);
    return kernels::argmax_rows(engine::ensemble_predict(crop, models, uniform))[0];
}

namespace {

void paste_crop(Tensor& frame, const Box& box, const Tensor& crop)
{
    const auto x0 = static_cast<std::size_t>(box.x), y0 = static_cast<std::size_t>(box.y);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < kTemplateSize; ++y) {
            for (std::size_t x = 0; x < kTemplateSize; ++x) {
                frame[(c * frame.dim(1) + y0 + y) * frame.dim(2) + x0 + x] = crop.at4(0, c, y, x);
            }
        }
    }
}

} // namespace

AttackedSequence attack_initial_frame(const Sequence& seq, const std::vector<zoo::ModelRecord>& attack_repo,
                                      const engine::AttackConfig& config, Condition condition)
{
    if (seq.frames.empty()) throw ConfigError("attack_initial_frame: empty sequence");
    AttackedSequence out;
    out.sequence = seq;
    out.psnr = std::numeric_limits<double>::infinity();
    if (condition == Condition::clean) return out;

    const Box& b = seq.boxes[0];
    if (b.w != kTemplateSize || b.h != kTemplateSize || b.x != std::floor(b.x) || b.y != std::floor(b.y)) {
        throw ConfigError("attack_initial_frame: initial box must be 32x32 at integer coordinates");
    }
    const Tensor crop = crop_box(seq.frames[0], b);
    out.pseudo_label = pseudo_label(crop, attack_repo);
    const std::vector<std::size_t> y{out.pseudo_label};
    Tensor adversarial;
    if (condition == Condition::amga) {
        auto r = engine::run_amga(crop, y, attack_repo, config);
        adversarial = std::move(r.adversarial_example);
        out.split = r.split;
    } else {
        adversarial = engine::baseline_attack(engine::BaselineKind::random_noise, crop, y, attack_repo.front(), config);
    }
    paste_crop(out.sequence.frames[0], b, adversarial);
    out.psnr = quality::psnr(crop, adversarial);
    out.ssim = quality::ssim(crop, adversarial);
    return out;
}

TrackRun track_sequence(const Sequence& seq, const zoo::ModelRecord& feature_model)
{
    return track_sequence(seq, feature_model, seq.frames.at(0));
}

TrackRun track_sequence(const Sequence& seq, const zoo::ModelRecord& feature_model, const Tensor& init_frame)
{
    Tracker tracker(feature_model, init_frame, seq.boxes.at(0));
    std::vector<Box> predicted{seq.boxes[0]};
    std::vector<bool> low{false};
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        predicted.push_back(tracker.step(seq.frames[t]));
        low.push_back(tracker.low_confidence());
    }
    TrackRun run = TrackRun::from_boxes(std::move(predicted), seq.boxes);
    run.low_confidence = std::move(low);
    return run;
}

const ConditionSummary& BenchmarkReport::summary(Condition c) const
{
    for (const auto& s : summaries) {
        if (s.condition == c) return s;
    }
    throw ConfigError("benchmark report has no '" + to_string(c) + "' condition");
}

BenchmarkSetup split_repository(const std::vector<zoo::ModelRecord>& repo, const std::string& tracker_model)
{
    BenchmarkSetup setup;
    for (const auto& m : repo) {
        if (m.name() == tracker_model) {
            setup.feature_model = &m;
        } else {
            setup.attack_repo.push_back(m);
        }
    }
    if (!setup.feature_model) throw ConfigError("tracker model '" + tracker_model + "' is not in the zoo");
    if (!zoo::has_conv_features(setup.feature_model->arch)) {
        throw ConfigError("tracker model '" + tracker_model + "' has no convolutional features");
    }
    return setup;
}

std::uint64_t sequence_attack_seed(std::uint64_t base_seed, const SequenceSpec& spec)
{
    return Rng::derive(base_seed, spec.seed);
}

BenchmarkReport run_benchmark(const std::vector<SequenceSpec>& specs, const BenchmarkSetup& setup,
                              const engine::AttackConfig& config, const std::vector<Condition>& conditions)
{
    if (specs.empty()) throw ConfigError("run_benchmark: no sequences");
    if (conditions.empty()) throw ConfigError("run_benchmark: no conditions");
    if (!setup.feature_model) throw ConfigError("run_benchmark: no tracker model");
    config.validate();

    std::vector<std::vector<EpisodeRow>> per_seq(specs.size());
    util::parallel_for(specs.size(), [&](std::size_t i) {
        const Sequence seq = generate_sequence(specs[i]);
        auto cfg = config;
        cfg.seed = sequence_attack_seed(config.seed, specs[i]);
        for (Condition c : conditions) {
            AttackedSequence a = attack_initial_frame(seq, setup.attack_repo, cfg, c);
            EpisodeRow row;
            row.sequence = specs[i].name;
            row.condition = c;
            row.run = track_sequence(a.sequence, *setup.feature_model);
            row.metrics = compute_metrics(row.run);
            row.psnr = a.psnr;
            row.ssim = a.ssim;
            row.pseudo_label = a.pseudo_label;
            per_seq[i].push_back(std::move(row));
        }
    });

    BenchmarkReport report;
    report.tracker_model = setup.feature_model->name();
    for (const auto& m : setup.attack_repo) report.attack_models.push_back(m.name());
    for (auto& rows : per_seq) {
        for (auto& r : rows) report.rows.push_back(std::move(r));
    }
    for (Condition c : conditions) {
        ConditionSummary s;
        s.condition = c;
        std::size_t n = 0, finite = 0;
        double psnr_sum = 0.0, ssim_sum = 0.0;
        std::vector<double> sums(metric_names().size(), 0.0);
        for (const auto& r : report.rows) {
            if (r.condition != c) continue;
            ++n;
            for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += metric_value(r.metrics, metric_names()[k]);
            if (std::isfinite(r.psnr)) {
                psnr_sum += r.psnr;
                ++finite;
            }
            ssim_sum += r.ssim;
        }
        const double N = static_cast<double>(n);
        s.mean.precision_at_20 = sums[0] / N;
        s.mean.norm_precision_auc = sums[1] / N;
        s.mean.success_auc = sums[2] / N;
        s.mean.ao = sums[3] / N;
        s.mean.sr_050 = sums[4] / N;
        s.mean.sr_075 = sums[5] / N;
        s.mean_psnr = finite ? psnr_sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
        s.mean_ssim = ssim_sum / N;
        report.summaries.push_back(s);
    }
    return report;
}

namespace {

std::string fmt(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

} // namespace

std::string benchmark_csv(const BenchmarkReport& report)
{
    std::ostringstream os;
    os << "sequence,condition,metric,value\n";
    for (const auto& r : report.rows) {
        for (const auto& name : metric_names()) {
            os << r.sequence << ',' << to_string(r.condition) << ',' << name << ',' << fmt(metric_value(r.metrics, name))
               << '\n';
        }
    }
    return os.str();
}

std::string per_frame_csv(const BenchmarkReport& report)
{
    std::ostringstream os;
    os << "sequence,condition,frame,iou,center_error,low_confidence\n";
    for (const auto& r : report.rows) {
        for (std::size_t t = 0; t < r.run.iou.size(); ++t) {
            os << r.sequence << ',' << to_string(r.condition) << ',' << t << ',' << fmt(r.run.iou[t]) << ','
               << fmt(r.run.center_error[t]) << ',' << (r.run.low_confidence[t] ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

nlohmann::json benchmark_summary(const BenchmarkReport& report)
{
    nlohmann::json j;
    j["tracker_model"] = report.tracker_model;
    j["attack_models"] = report.attack_models;
    j["sequences"] = report.rows.size() / std::max<std::size_t>(1, report.summaries.size());
    const ConditionSummary* clean = nullptr;
    for (const auto& s : report.summaries) {
        if (s.condition == Condition::clean) clean = &s;
    }
    nlohmann::json conds = nlohmann::json::object();
    for (const auto& s : report.summaries) {
        nlohmann::json c;
        c["mean"] = s.mean;
        c["mean_psnr"] = quality::format_db(s.mean_psnr);
        c["mean_ssim"] = s.mean_ssim;
        if (clean) {
            nlohmann::json drops = nlohmann::json::object();
            for (const auto& name : metric_names()) drops[name] = metric_value(clean->mean, name) - metric_value(s.mean, name);
            c["drop_vs_clean"] = drops;
        }
        conds[to_string(s.condition)] = c;
    }
    j["conditions"] = conds;
    return j;
}

} // namespace amga::track
