#include "amga/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "amga/quality/metrics.hpp"
#include "amga/util/image_io.hpp"
#include "amga/util/parallel.hpp"
#include "amga/util/tensor_file.hpp"

namespace amga::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve(const fs::path& workdir, const fs::path& p) { return p.is_absolute() ? p : workdir / p; }

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const NumericError*>(&e)) return 4;
    return 1;
}

namespace {

std::string num(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

void write_json(const fs::path& path, const json& j) { util::write_file(path, j.dump(2) + "\n"); }

void write_echo(const fs::path& dir, const RunConfig& config) { write_json(dir / "config.json", to_json(config)); }

// Wall-clock goes to stderr so files stay byte-identical across runs.
class Timer {
public:
    explicit Timer(std::string what) : what_(std::move(what)), start_(std::chrono::steady_clock::now()) { }
    ~Timer()
    {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::cerr << "[amga] " << what_ << ": " << std::fixed << std::setprecision(1) << s << " s\n";
    }

private:
    std::string what_;
    std::chrono::steady_clock::time_point start_;
};

std::vector<zoo::ModelRecord> load_repo(const RunConfig& config, const fs::path& workdir)
{
    return zoo::load_zoo(resolve(workdir, config.zoo.dir));
}

std::string padded(std::size_t i)
{
    std::ostringstream os;
    os << std::setw(5) << std::setfill('0') << i;
    return os.str();
}

AccuracyDrop make_drop(double clean_hits, double attacked_hits, double n)
{
    AccuracyDrop d;
    d.clean = clean_hits / n;
    d.attacked = attacked_hits / n;
    d.drop = d.clean - d.attacked;
    return d;
}

json to_json(const AccuracyDrop& d) { return {{"clean", d.clean}, {"attacked", d.attacked}, {"drop", d.drop}}; }

json to_json(const AblationRow& r)
{
    return {{"row", r.name},
            {"success_rate", r.success_rate},
            {"success_drop", r.success_drop},
            {"precision", r.precision},
            {"precision_drop", r.precision_drop},
            {"psnr", quality::format_db(r.psnr)},
            {"ssim", r.ssim}};
}

} // namespace

// ---------------------------------------------------------------- attack

AttackEvaluation evaluate_attack(const std::vector<zoo::ModelRecord>& repo, const zoo::Dataset& dataset,
                                 const engine::AttackConfig& config, std::size_t images)
{
    config.validate();
    if (images > dataset.validation_indices.size()) {
        throw ConfigError("attack_eval.images: only " + std::to_string(dataset.validation_indices.size()) +
                          " validation images available");
    }
    AttackEvaluation ev;
    ev.episodes.resize(images);
    util::parallel_for(images, [&](std::size_t i) {
        AttackEpisode& ep = ev.episodes[i];
        ep.image = dataset.validation_indices[i];
        ep.label = dataset.labels[ep.image];
        ep.seed = Rng::derive(config.seed, i);
        const std::vector<std::size_t> idx{ep.image}, y{ep.label};
        const Tensor x = zoo::gather_images(dataset.images, idx);
        auto cfg = config;
        cfg.seed = ep.seed;
        ep.result = engine::run_amga(x, y, repo, cfg);
        ep.split = ep.result.split;
        const Tensor& adv = ep.result.adversarial_example;

        const auto train = zoo::resolve(repo, ep.split.train_models);
        const std::vector<double> uniform(train.size(), 0.0);
        ep.held_in_clean = kernels::argmax_rows(engine::ensemble_predict(x, train, uniform))[0] == ep.label;
        ep.held_in_attacked = kernels::argmax_rows(engine::ensemble_predict(adv, train, uniform))[0] == ep.label;
        const auto& test = repo[ep.split.test_model];
        ep.held_out_clean = zoo::predict(test, x)[0] == ep.label;
        ep.held_out_attacked = zoo::predict(test, adv)[0] == ep.label;
        const Tensor noisy = engine::baseline_attack(engine::BaselineKind::random_noise, x, y, test, cfg);
        ep.held_out_noise = zoo::predict(test, noisy)[0] == ep.label;
        ep.psnr = quality::psnr(x, adv);
        ep.ssim = quality::ssim(x, adv);
    });

    const double n = static_cast<double>(images);
    double hic = 0, hia = 0, hoc = 0, hoa = 0, hon = 0, psnr = 0, ssim = 0;
    std::size_t finite = 0;
    for (const auto& ep : ev.episodes) {
        hic += ep.held_in_clean;
        hia += ep.held_in_attacked;
        hoc += ep.held_out_clean;
        hoa += ep.held_out_attacked;
        hon += ep.held_out_noise;
        if (std::isfinite(ep.psnr)) {
            psnr += ep.psnr;
            ++finite;
        }
        ssim += ep.ssim;
    }
    ev.held_in = make_drop(hic, hia, n);
    ev.held_out = make_drop(hoc, hoa, n);
    ev.held_out_noise = make_drop(hoc, hon, n);
    ev.mean_psnr = finite ? psnr / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    ev.mean_ssim = ssim / n;

    // Every model on the full clean and adversarial batches.
    std::vector<std::size_t> idx, labels;
    for (const auto& ep : ev.episodes) {
        idx.push_back(ep.image);
        labels.push_back(ep.label);
    }
    const Tensor clean = zoo::gather_images(dataset.images, idx);
    Tensor adv(clean.shape());
    const std::size_t per = clean.numel() / images;
    for (std::size_t i = 0; i < images; ++i) {
        std::copy_n(ev.episodes[i].result.adversarial_example.data().begin(), per, adv.data().begin() + i * per);
    }
    for (std::size_t m = 0; m < repo.size(); ++m) {
        ModelAccuracy acc;
        acc.name = repo[m].name();
        acc.clean = zoo::evaluate_accuracy(repo[m], clean, labels).accuracy;
        acc.attacked = zoo::evaluate_accuracy(repo[m], adv, labels).accuracy;
        acc.drop = acc.clean - acc.attacked;
        for (const auto& ep : ev.episodes) {
            acc.held_out += ep.split.test_model == m;
            for (auto t : ep.split.train_models) acc.held_in += t == m;
        }
        ev.per_model.push_back(acc);
    }
    return ev;
}

json to_json(const AttackEvaluation& e)
{
    json models = json::array();
    for (const auto& m : e.per_model) {
        models.push_back({{"name", m.name},
                          {"clean_accuracy", m.clean},
                          {"attacked_accuracy", m.attacked},
                          {"drop", m.drop},
                          {"held_in_episodes", m.held_in},
                          {"held_out_episodes", m.held_out}});
    }
    json episodes = json::array();
    for (const auto& ep : e.episodes) {
        episodes.push_back({{"image", ep.image},
                            {"label", ep.label},
                            {"seed", ep.seed},
                            {"train_models", ep.split.train_models},
                            {"test_model", ep.split.test_model},
                            {"held_in_correct", {ep.held_in_clean, ep.held_in_attacked}},
                            {"held_out_correct", {ep.held_out_clean, ep.held_out_attacked}},
                            {"held_out_noise_correct", ep.held_out_noise},
                            {"psnr", quality::format_db(ep.psnr)},
                            {"ssim", ep.ssim},
                            {"loss_trace", ep.result.loss_trace},
                            {"ensemble_weights", ep.result.beta_weights}});
    }
    return {{"images", e.episodes.size()},
            {"per_model", models},
            {"held_in", to_json(e.held_in)},
            {"held_out", to_json(e.held_out)},
            {"held_out_random_noise", to_json(e.held_out_noise)},
            {"mean_psnr", quality::format_db(e.mean_psnr)},
            {"mean_ssim", e.mean_ssim},
            {"episodes", episodes}};
}

// ---------------------------------------------------------------- ablation

const std::vector<std::string>& ablation_rows()
{
    static const std::vector<std::string> rows{"no-attack", "random-noise", "+meta-gradient", "+diversity",
                                               "full",      "-momentum",    "-smoothing"};
    return rows;
}

engine::AttackConfig ablation_variant(const std::string& row, const engine::AttackConfig& base)
{
    auto c = base;
    if (row == "+meta-gradient") {
        c.mu = 0.0;
        c.diversity_prob = 0.0;
        c.smoothing_mode = engine::SmoothingMode::none;
    } else if (row == "+diversity") {
        c.mu = 0.0;
        c.meta_test = false;
        c.smoothing_mode = engine::SmoothingMode::none;
    } else if (row == "-momentum") {
        c.mu = 0.0;
    } else if (row == "-smoothing") {
        c.smoothing_mode = engine::SmoothingMode::none;
    } else if (row != "full" && row != "no-attack" && row != "random-noise") {
        throw ConfigError("unknown ablation row '" + row + "'");
    }
    return c;
}

AblationTable run_ablation(const std::vector<track::SequenceSpec>& specs, const track::BenchmarkSetup& setup,
                           const engine::AttackConfig& base, const std::vector<double>& sigmas)
{
    using track::Condition;
    const auto baseline = track::run_benchmark(specs, setup, base, {Condition::clean, Condition::random_noise});
    const auto& clean = baseline.summary(Condition::clean);
    auto row_from = [&](const std::string& name, const track::ConditionSummary& s) {
        AblationRow r;
        r.name = name;
        r.success_rate = s.mean.success_auc;
        r.success_drop = clean.mean.success_auc - s.mean.success_auc;
        r.precision = s.mean.precision_at_20;
        r.precision_drop = clean.mean.precision_at_20 - s.mean.precision_at_20;
        r.psnr = s.mean_psnr;
        r.ssim = s.mean_ssim;
        return r;
    };
    AblationTable t;
    t.sigma_values = sigmas;
    for (const auto& name : ablation_rows()) {
        if (name == "no-attack") {
            t.components.push_back(row_from(name, clean));
        } else if (name == "random-noise") {
            t.components.push_back(row_from(name, baseline.summary(Condition::random_noise)));
        } else {
            const auto rep = track::run_benchmark(specs, setup, ablation_variant(name, base), {Condition::amga});
            t.components.push_back(row_from(name, rep.summary(Condition::amga)));
        }
    }
    for (double s : sigmas) {
        auto c = base;
        c.sigma = s;
        const auto rep = track::run_benchmark(specs, setup, c, {Condition::amga});
        t.sigmas.push_back(row_from("sigma=" + num(s), rep.summary(Condition::amga)));
    }
    return t;
}

std::string ablation_csv(const AblationTable& t)
{
    std::ostringstream os;
    os << "row,success_rate,success_drop,precision,precision_drop,psnr,ssim\n";
    for (const auto& r : t.components) {
        os << r.name << ',' << num(r.success_rate) << ',' << num(r.success_drop) << ',' << num(r.precision) << ','
           << num(r.precision_drop) << ',' << num(r.psnr) << ',' << num(r.ssim) << '\n';
    }
    return os.str();
}

std::string sigma_csv(const AblationTable& t)
{
    std::ostringstream os;
    os << "sigma,success_drop,precision_drop,psnr,ssim\n";
    for (std::size_t i = 0; i < t.sigmas.size(); ++i) {
        const auto& r = t.sigmas[i];
        os << num(t.sigma_values[i]) << ',' << num(r.success_drop) << ',' << num(r.precision_drop) << ',' << num(r.psnr)
           << ',' << num(r.ssim) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- report

namespace {

struct FrameRow {
    std::string sequence, condition;
    double iou = 0.0, center_error = 0.0;
};

std::vector<FrameRow> parse_per_frame(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("sequence,condition,frame,iou,center_error", 0) != 0) {
        throw ParseError("per-frame CSV: unexpected header");
    }
    std::vector<FrameRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < 5) throw ParseError("per-frame CSV line " + std::to_string(lineno) + ": too few fields");
        try {
            rows.push_back({f[0], f[1], std::stod(f[3]), std::stod(f[4])});
        } catch (const std::exception&) {
            throw ParseError("per-frame CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

template <typename Hit>
Curves curves(const std::string& text, std::vector<double> thresholds, Hit hit)
{
    const auto rows = parse_per_frame(text);
    Curves c;
    c.thresholds = std::move(thresholds);
    // condition -> sequence -> per-frame rows, in first-appearance order.
    std::vector<std::string> seq_order;
    std::map<std::string, std::map<std::string, std::vector<const FrameRow*>>> grouped;
    for (const auto& r : rows) {
        if (std::find(c.conditions.begin(), c.conditions.end(), r.condition) == c.conditions.end()) {
            c.conditions.push_back(r.condition);
        }
        grouped[r.condition][r.sequence].push_back(&r);
    }
    for (const auto& cond : c.conditions) {
        const auto& seqs = grouped[cond];
        std::vector<double> values(c.thresholds.size(), 0.0);
        for (const auto& [name, frames] : seqs) {
            for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
                std::size_t n = 0;
                for (const auto* f : frames) n += hit(*f, c.thresholds[k]);
                values[k] += static_cast<double>(n) / static_cast<double>(frames.size());
            }
        }
        for (auto& v : values) v /= static_cast<double>(seqs.size());
        c.values.push_back(std::move(values));
    }
    return c;
}

} // namespace

Curves success_curves_from_csv(const std::string& text)
{
    return curves(text, track::success_thresholds(), [](const FrameRow& f, double t) { return f.iou >= t; });
}

Curves precision_curves_from_csv(const std::string& text)
{
    std::vector<double> t;
    for (int i = 0; i <= 50; ++i) t.push_back(i);
    return curves(text, t, [](const FrameRow& f, double th) { return f.center_error <= th; });
}

std::string curves_csv(const Curves& c)
{
    std::ostringstream os;
    os << "threshold";
    for (const auto& name : c.conditions) os << ',' << name;
    os << '\n';
    for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
        os << num(c.thresholds[k]);
        for (const auto& v : c.values) os << ',' << num(v[k]);
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- commands

void cmd_zoo_train(const RunConfig& config, const fs::path& workdir)
{
    Timer timer("zoo-train");
    const fs::path dir = resolve(workdir, config.zoo.dir);
    const zoo::Dataset dataset = zoo::generate_dataset(config.zoo.config.dataset);
    const auto models = zoo::train_zoo(dataset, config.zoo.config);
    zoo::write_zoo(dir, models, config.zoo.config.dataset);
    util::write_file(dir / "zoo_config.json", zoo::zoo_config_json(config.zoo.config).dump());
    write_echo(dir, config);
    for (const auto& m : models) std::cerr << "[amga] " << m.name() << " validation accuracy " << m.clean_accuracy << '\n';
}

void cmd_attack(const RunConfig& config, const fs::path& workdir)
{
    Timer timer("attack");
    const auto repo = load_repo(config, workdir);
    const zoo::Dataset dataset = zoo::generate_dataset(config.zoo.config.dataset);
    const auto ev = evaluate_attack(repo, dataset, config.attack, config.attack_eval.images);
    const fs::path out = resolve(workdir, config.attack_eval.output_dir);

    json report = to_json(ev);
    report["config"] = to_json(config);
    report["seed"] = config.attack.seed;
    write_json(out / "report.json", report);
    write_echo(out, config);

    const std::size_t S = config.zoo.config.dataset.image_size;
    const std::size_t n_export = std::min(config.attack_eval.export_examples, ev.episodes.size());
    for (std::size_t i = 0; i < n_export; ++i) {
        const auto& ep = ev.episodes[i];
        const std::string stem = "img_" + padded(ep.image);
        util::write_ppm(out / "adversarial" / (stem + ".ppm"), ep.result.adversarial_example.data(), S, S);
        json header{{"image", ep.image},
                    {"label", ep.label},
                    {"seed", ep.seed},
                    {"train_models", ep.split.train_models},
                    {"test_model", ep.split.test_model}};
        engine::save_perturbation(out / "perturbations" / (stem + ".amd"), ep.result.delta_smoothed, header);
    }
}

void cmd_track_eval(const RunConfig& config, const fs::path& workdir)
{
    Timer timer("track-eval");
    const auto repo = load_repo(config, workdir);
    const auto setup = track::split_repository(repo, config.track.tracker_model);
    const auto specs = config.track.resolved_sequences();
    const auto report = track::run_benchmark(specs, setup, config.attack, config.track.conditions);
    const fs::path out = resolve(workdir, config.track.output_dir);
    util::write_file(out / "benchmark.csv", track::benchmark_csv(report));
    util::write_file(out / "per_frame.csv", track::per_frame_csv(report));
    json summary = track::benchmark_summary(report);
    summary["config"] = to_json(config);
    write_json(out / "summary.json", summary);
    write_echo(out, config);
    if (config.track.export_sequences) {
        for (const auto& s : specs) track::export_sequence(track::generate_sequence(s), out / "sequences" / s.name);
    }
}

void cmd_ablate(const RunConfig& config, const fs::path& workdir)
{
    Timer timer("ablate");
    const auto repo = load_repo(config, workdir);
    const auto setup = track::split_repository(repo, config.track.tracker_model);
    const auto table = run_ablation(config.track.resolved_sequences(), setup, config.attack, config.ablate.sigmas);
    const fs::path out = resolve(workdir, config.ablate.output_dir);
    util::write_file(out / "ablation.csv", ablation_csv(table));
    util::write_file(out / "sigma_sweep.csv", sigma_csv(table));
    json j{{"components", json::array()}, {"sigma_sweep", json::array()}, {"config", to_json(config)}};
    for (const auto& r : table.components) j["components"].push_back(to_json(r));
    for (const auto& r : table.sigmas) j["sigma_sweep"].push_back(to_json(r));
    write_json(out / "ablation.json", j);
    write_echo(out, config);
}

void cmd_report(const fs::path& in, const fs::path& out)
{
    const fs::path src = in / "per_frame.csv";
    if (!fs::exists(src)) throw IoError("report: missing " + src.string());
    const std::string text = util::read_file(src);
    util::write_file(out / "success_curves.csv", curves_csv(success_curves_from_csv(text)));
    util::write_file(out / "precision_curves.csv", curves_csv(precision_curves_from_csv(text)));
}

} // namespace amga::cli
