#include "amga/zoo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "amga/numerics/rng.hpp"
#include "amga/util/image_io.hpp"
#include "amga/zoo/model.hpp"
#include "amga/zoo/shapes.hpp"

namespace amga::zoo {

namespace {
// Maximum shape-centre offset from the image centre, as a fraction of the side.
constexpr double kPositionJitter = 0.12;
} // namespace

void DatasetSpec::validate() const
{
    if (n_classes < 2) throw ConfigError("dataset: n_classes must be at least 2");
    if (n_classes > kMaxShapeClasses) {
        throw ConfigError("dataset: at most " + std::to_string(kMaxShapeClasses) + " shape classes are available");
    }
    if (image_size < 8) throw ConfigError("dataset: image_size must be at least 8");
    if (samples_per_class == 0) throw ConfigError("dataset: samples_per_class must be positive");
    if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ConfigError("dataset: noise_level must lie in [0, 1]");
}

void to_json(nlohmann::json& j, const DatasetSpec& s)
{
    j = nlohmann::json{{"seed", s.seed},
                       {"n_classes", s.n_classes},
                       {"samples_per_class", s.samples_per_class},
                       {"image_size", s.image_size},
                       {"noise_level", s.noise_level}};
}

Dataset generate_dataset(const DatasetSpec& spec)
{
    spec.validate();
    const std::size_t S = spec.image_size;
    const std::size_t N = spec.n_classes * spec.samples_per_class;
    Dataset d;
    d.spec = spec;
    d.images = Tensor({N, 3, S, S});
    d.labels.resize(N);
    const std::size_t per = 3 * S * S;
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t cls = i / spec.samples_per_class;
        d.labels[i] = cls;
        Rng rng(Rng::derive(spec.seed, i));
        ImageView img{d.images.data().subspan(i * per, per), S, S};
        const Color base = draw_background(img, rng);
        const double radius = rng.uniform(0.28, 0.42) * static_cast<double>(S);
        const double half = static_cast<double>(S) / 2.0;
        const double jitter = std::min(half - radius, kPositionJitter * static_cast<double>(S));
        const double cx = half + rng.uniform(-jitter, jitter);
        const double cy = half + rng.uniform(-jitter, jitter);
        draw_shape(img, cls, cx, cy, radius, random_foreground(rng, base, kContrastLo, kContrastHi));
        add_noise_and_clip(img, rng, spec.noise_level);
        (i % 5 == 0 ? d.validation_indices : d.train_indices).push_back(i);
    }
    return d;
}

Tensor Dataset::train_images() const { return gather_images(images, train_indices); }
Tensor Dataset::validation_images() const { return gather_images(images, validation_indices); }

std::vector<std::size_t> Dataset::train_labels() const
{
    std::vector<std::size_t> out;
    for (auto i : train_indices) out.push_back(labels[i]);
    return out;
}

std::vector<std::size_t> Dataset::validation_labels() const
{
    std::vector<std::size_t> out;
    for (auto i : validation_indices) out.push_back(labels[i]);
    return out;
}

std::uint64_t dataset_checksum(const Dataset& d)
{
    std::uint64_t h = checksum(d.images);
    for (auto l : d.labels) {
        h ^= l + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return h;
}

void export_dataset(const Dataset& d, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());
    std::ofstream csv(dir / "labels.csv");
    if (!csv) throw IoError("cannot write " + (dir / "labels.csv").string());
    csv << "filename,label\n";
    const std::size_t S = d.spec.image_size, per = 3 * S * S;
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::ostringstream name;
        name << "img_" << std::setw(5) << std::setfill('0') << i << ".ppm";
        util::write_ppm(dir / name.str(), d.images.data().subspan(i * per, per), S, S);
        csv << name.str() << ',' << d.labels[i] << '\n';
    }
}

} // namespace amga::zoo
