#include "amga/track/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "amga/numerics/rng.hpp"
#include "amga/util/image_io.hpp"
#include "amga/zoo/shapes.hpp"

namespace amga::track {

namespace {

constexpr double kSpriteRadius = 0.35;   // shape half-extent as a fraction of the box side
constexpr double kMinSide = 20.0, kMaxSide = 44.0;
constexpr double kMaxOcclusion = 0.6;
// Minimum distractor distance from the initial target centre, in box sides.
// Close enough to fall inside the tracker's search window.
constexpr double kDistractorSpacing = 1.1;

enum Stream : std::uint64_t { motion_stream = 1, render_stream = 2, occlusion_stream = 3, noise_stream = 1000 };

std::vector<Box> trajectory(const SequenceSpec& spec)
{
    const double S = static_cast<double>(spec.frame_size);
    const double t0 = static_cast<double>(kTemplateSize);
    std::vector<double> side(spec.length);
    double half_max = t0 / 2.0;
    for (std::size_t t = 0; t < spec.length; ++t) {
        side[t] = std::clamp(t0 * std::pow(1.0 + spec.scale_drift, static_cast<double>(t)), kMinSide, kMaxSide);
        half_max = std::max(half_max, side[t] / 2.0);
    }
    const double lo = half_max, hi = S - half_max;

    Rng rng(Rng::derive(spec.seed, motion_stream));
    const long base = static_cast<long>(spec.frame_size / 2) - static_cast<long>(kTemplateSize / 2);
    auto start = [&](std::int64_t jitter) {
        const double c = static_cast<double>(base + jitter) + t0 / 2.0;
        return std::clamp(c, std::ceil(lo), std::floor(hi));
    };
    const double cx0 = start(rng.between(-8, 8));
    const double cy0 = start(rng.between(-8, 8));

    std::vector<double> cx(spec.length, cx0), cy(spec.length, cy0);
    const double steps = static_cast<double>(spec.length - 1);
    switch (spec.motion) {
    case Motion::linear: {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        double vx = spec.speed * std::cos(theta), vy = spec.speed * std::sin(theta);
        // Shrink the speed so the whole straight path stays inside the frame.
        double k = 1.0;
        if (vx > 0) k = std::min(k, (hi - cx0) / (vx * steps));
        if (vx < 0) k = std::min(k, (cx0 - lo) / (-vx * steps));
        if (vy > 0) k = std::min(k, (hi - cy0) / (vy * steps));
        if (vy < 0) k = std::min(k, (cy0 - lo) / (-vy * steps));
        k = std::max(k, 0.0);
        for (std::size_t t = 1; t < spec.length; ++t) {
            cx[t] = cx0 + k * vx * static_cast<double>(t);
            cy[t] = cy0 + k * vy * static_cast<double>(t);
        }
        break;
    }
    case Motion::sinusoidal: {
        const double px = rng.uniform(20.0, 40.0), py = rng.uniform(20.0, 40.0);
        const double phx = rng.uniform(0.0, 2.0 * std::numbers::pi), phy = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t t = 1; t < spec.length; ++t) {
            const double tt = static_cast<double>(t);
            cx[t] = std::clamp(cx0 + spec.amplitude * (std::sin(2 * std::numbers::pi * tt / px + phx) - std::sin(phx)), lo, hi);
            cy[t] = std::clamp(cy0 + spec.amplitude * (std::sin(2 * std::numbers::pi * tt / py + phy) - std::sin(phy)), lo, hi);
        }
        break;
    }
    case Motion::random_walk:
        for (std::size_t t = 1; t < spec.length; ++t) {
            cx[t] = std::clamp(cx[t - 1] + spec.speed * rng.normal(), lo, hi);
            cy[t] = std::clamp(cy[t - 1] + spec.speed * rng.normal(), lo, hi);
        }
        break;
    }
    std::vector<Box> boxes(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) boxes[t] = Box::centered(cx[t], cy[t], side[t], side[t]);
    return boxes;
}

zoo::ImageView view(Tensor& frame)
{
    return zoo::ImageView{frame.data(), frame.dim(1), frame.dim(2)};
}

Sequence render(const SequenceSpec& spec, double occlusion_prob)
{
    spec.validate();
    Sequence seq;
    seq.spec = spec;
    seq.boxes = trajectory(spec);
    const std::size_t S = spec.frame_size;

    Rng rng(Rng::derive(spec.seed, render_stream));
    Tensor background({3, S, S});
    const zoo::Color base = zoo::draw_background(view(background), rng);
    const double radius = kSpriteRadius * static_cast<double>(kTemplateSize);
    const Box& b0 = seq.boxes[0];
    for (std::size_t k = 0; k < spec.distractors; ++k) {
        const std::size_t cls = (spec.target_class + 1 + rng.below(spec.n_classes - 1)) % spec.n_classes;
        double dx = 0, dy = 0;
        for (int attempt = 0; attempt < 32; ++attempt) {
            dx = rng.uniform(radius, static_cast<double>(S) - radius);
            dy = rng.uniform(radius, static_cast<double>(S) - radius);
            if (std::hypot(dx - b0.cx(), dy - b0.cy()) >= kDistractorSpacing * static_cast<double>(kTemplateSize)) break;
        }
        zoo::draw_shape(view(background), cls, dx, dy, radius, zoo::random_foreground(rng, base, zoo::kContrastLo, zoo::kContrastHi));
    }
    const zoo::Color target_color = zoo::random_foreground(rng, base, zoo::kContrastLo, zoo::kContrastHi);

    Rng occ(Rng::derive(spec.seed, occlusion_stream));
    for (std::size_t t = 0; t < spec.length; ++t) {
        Tensor frame = background;
        const Box& b = seq.boxes[t];
        zoo::draw_shape(view(frame), spec.target_class, b.cx(), b.cy(), kSpriteRadius * std::min(b.w, b.h), target_color);

        // Draws happen on every frame so the stream does not depend on the probability.
        const double coin = occ.uniform();
        const double fraction = occ.uniform(0.3, kMaxOcclusion);
        const auto side = occ.below(4);
        const double grey = occ.uniform(0.3, 0.6);
        const bool occluded = t >= 1 && coin < occlusion_prob;
        if (occluded) {
            double x0 = b.x, x1 = b.x + b.w, y0 = b.y, y1 = b.y + b.h;
            switch (side) {
            case 0: x1 = b.x + fraction * b.w; break;
            case 1: x0 = b.x + b.w - fraction * b.w; break;
            case 2: y1 = b.y + fraction * b.h; break;
            default: y0 = b.y + b.h - fraction * b.h; break;
            }
            auto img = view(frame);
            for (std::size_t y = 0; y < S; ++y) {
                const double pyc = static_cast<double>(y) + 0.5;
                if (pyc < y0 || pyc >= y1) continue;
                for (std::size_t x = 0; x < S; ++x) {
                    const double pxc = static_cast<double>(x) + 0.5;
                    if (pxc < x0 || pxc >= x1) continue;
                    for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>(grey);
                }
            }
        }
        Rng noise(Rng::derive(spec.seed, noise_stream + t));
        zoo::add_noise_and_clip(view(frame), noise, spec.noise_level);
        seq.frames.push_back(std::move(frame));
        seq.occluded.push_back(occluded);
    }
    return seq;
}

} // namespace

std::string to_string(Motion m)
{
    switch (m) {
    case Motion::linear: return "linear";
    case Motion::sinusoidal: return "sinusoidal";
    case Motion::random_walk: return "random_walk";
    }
    return "?";
}

Motion motion_from_string(const std::string& s)
{
    for (auto m : {Motion::linear, Motion::sinusoidal, Motion::random_walk}) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("sequence.motion: unknown value '" + s + "'");
}

void SequenceSpec::validate() const
{
    if (length < 2) throw ConfigError("sequence '" + name + "': length must be at least 2");
    if (frame_size < static_cast<std::size_t>(kMaxSide) + 4) {
        throw ConfigError("sequence '" + name + "': sprite of " + std::to_string(kTemplateSize) +
                          " px does not fit a " + std::to_string(frame_size) + " px frame");
    }
    if (n_classes < 2 || n_classes > zoo::kMaxShapeClasses) throw ConfigError("sequence '" + name + "': bad n_classes");
    if (target_class >= n_classes) throw ConfigError("sequence '" + name + "': target_class out of range");
    if (!(occlusion_prob >= 0.0 && occlusion_prob <= 1.0)) throw ConfigError("sequence '" + name + "': occlusion_prob must lie in [0, 1]");
    if (!(speed >= 0.0) || !(amplitude >= 0.0)) throw ConfigError("sequence '" + name + "': speed and amplitude must be non-negative");
    if (!(scale_drift > -0.5 && scale_drift < 0.5)) throw ConfigError("sequence '" + name + "': scale_drift out of range");
    if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ConfigError("sequence '" + name + "': noise_level must lie in [0, 1]");
}

void to_json(nlohmann::json& j, const SequenceSpec& s)
{
    j = nlohmann::json{{"name", s.name},
                       {"seed", s.seed},
                       {"length", s.length},
                       {"frame_size", s.frame_size},
                       {"target_class", s.target_class},
                       {"n_classes", s.n_classes},
                       {"motion", to_string(s.motion)},
                       {"speed", s.speed},
                       {"amplitude", s.amplitude},
                       {"occlusion_prob", s.occlusion_prob},
                       {"scale_drift", s.scale_drift},
                       {"distractors", s.distractors},
                       {"noise_level", s.noise_level}};
}

void merge_json(const nlohmann::json& j, SequenceSpec& s)
{
    if (!j.is_object()) throw ConfigError("sequence: expected an object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "name") s.name = v.get<std::string>();
            else if (key == "seed") s.seed = v.get<std::uint64_t>();
            else if (key == "length") s.length = v.get<std::size_t>();
            else if (key == "frame_size") s.frame_size = v.get<std::size_t>();
            else if (key == "target_class") s.target_class = v.get<std::size_t>();
            else if (key == "n_classes") s.n_classes = v.get<std::size_t>();
            else if (key == "motion") s.motion = motion_from_string(v.get<std::string>());
            else if (key == "speed") s.speed = v.get<double>();
            else if (key == "amplitude") s.amplitude = v.get<double>();
            else if (key == "occlusion_prob") s.occlusion_prob = v.get<double>();
            else if (key == "scale_drift") s.scale_drift = v.get<double>();
            else if (key == "distractors") s.distractors = v.get<std::size_t>();
            else if (key == "noise_level") s.noise_level = v.get<double>();
            else throw ConfigError("sequence: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sequence: ") + e.what());
    }
}

Sequence generate_sequence(const SequenceSpec& spec) { return render(spec, spec.occlusion_prob); }

Sequence generate_sequence_without_occlusion(const SequenceSpec& spec) { return render(spec, 0.0); }

std::uint64_t frame_checksum(const Tensor& frame) { return checksum(frame); }

SequenceSpec easy_sequence(std::uint64_t seed)
{
    SequenceSpec s;
    s.name = "easy";
    s.seed = seed;
    s.speed = 0.0;
    s.distractors = 0;
    return s;
}

std::vector<SequenceSpec> default_suite(std::uint64_t base_seed)
{
    std::vector<SequenceSpec> out;
    for (std::size_t i = 0; i < 20; ++i) {
        SequenceSpec s;
        std::ostringstream name;
        name << "seq_" << std::setw(2) << std::setfill('0') << i;
        s.name = name.str();
        s.seed = Rng::derive(base_seed, i);
        s.target_class = i % 5;
        s.motion = static_cast<Motion>(i % 3);
        s.occlusion_prob = i % 4 == 3 ? 0.15 : 0.0;
        s.scale_drift = i % 5 == 4 ? 0.004 : (i % 5 == 2 ? -0.003 : 0.0);
        out.push_back(s);
    }
    return out;
}

void export_sequence(const Sequence& seq, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir / "frames", ec);
    if (ec) throw IoError("cannot create " + (dir / "frames").string() + ": " + ec.message());
    std::ofstream csv(dir / "groundtruth.csv");
    if (!csv) throw IoError("cannot write " + (dir / "groundtruth.csv").string());
    csv << "frame,x,y,w,h\n" << std::setprecision(10);
    const std::size_t S = seq.spec.frame_size;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << t << ".ppm";
        util::write_ppm(dir / "frames" / name.str(), seq.frames[t].data(), S, S);
        const Box& b = seq.boxes[t];
        csv << t << ',' << b.x << ',' << b.y << ',' << b.w << ',' << b.h << '\n';
    }
}

} // namespace amga::track
