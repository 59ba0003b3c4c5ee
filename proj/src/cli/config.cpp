#include "amga/cli/config.hpp"

#include "amga/util/tensor_file.hpp"

namespace amga::cli {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

[[noreturn]] void unknown(const std::string& where, const std::string& key)
{
    throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& v, const std::string& where)
{
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

void parse_dataset(const json& j, zoo::DatasetSpec& d)
{
    require_object(j, "zoo.dataset");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "zoo.dataset." + k;
        if (k == "seed") d.seed = get<std::uint64_t>(v, w);
        else if (k == "n_classes") d.n_classes = get<std::size_t>(v, w);
        else if (k == "samples_per_class") d.samples_per_class = get<std::size_t>(v, w);
        else if (k == "image_size") d.image_size = get<std::size_t>(v, w);
        else if (k == "noise_level") d.noise_level = get<double>(v, w);
        else unknown("zoo.dataset", k);
    }
}

void parse_train(const json& j, zoo::TrainOptions& t)
{
    require_object(j, "zoo.train");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "zoo.train." + k;
        if (k == "epochs") t.epochs = get<std::size_t>(v, w);
        else if (k == "batch_size") t.batch_size = get<std::size_t>(v, w);
        else if (k == "learning_rate") t.learning_rate = get<double>(v, w);
        else unknown("zoo.train", k);
    }
}

void parse_zoo(const json& j, ZooSection& z)
{
    require_object(j, "zoo");
    for (const auto& [k, v] : j.items()) {
        if (k == "dir") z.dir = get<std::string>(v, "zoo.dir");
        else if (k == "dataset") parse_dataset(v, z.config.dataset);
        else if (k == "train") parse_train(v, z.config.train);
        else if (k == "base_seed") z.config.base_seed = get<std::uint64_t>(v, "zoo.base_seed");
        else if (k == "architectures") z.config.architectures = get<std::vector<std::string>>(v, "zoo.architectures");
        else unknown("zoo", k);
    }
}

void parse_attack_eval(const json& j, AttackEvalSection& a)
{
    require_object(j, "attack_eval");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "attack_eval." + k;
        if (k == "images") a.images = get<std::size_t>(v, w);
        else if (k == "export_examples") a.export_examples = get<std::size_t>(v, w);
        else if (k == "output_dir") a.output_dir = get<std::string>(v, w);
        else unknown("attack_eval", k);
    }
}

void parse_track(const json& j, TrackSection& t)
{
    require_object(j, "track");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "track." + k;
        if (k == "tracker_model") t.tracker_model = get<std::string>(v, w);
        else if (k == "suite_seed") t.suite_seed = get<std::uint64_t>(v, w);
        else if (k == "output_dir") t.output_dir = get<std::string>(v, w);
        else if (k == "export_sequences") t.export_sequences = get<bool>(v, w);
        else if (k == "conditions") {
            t.conditions.clear();
            for (const auto& c : get<std::vector<std::string>>(v, w)) t.conditions.push_back(track::condition_from_string(c));
        } else if (k == "sequences") {
            if (!v.is_array()) throw ConfigError(w + ": expected an array");
            t.sequences.clear();
            for (const auto& item : v) {
                track::SequenceSpec s;
                track::merge_json(item, s);
                t.sequences.push_back(s);
            }
        } else unknown("track", k);
    }
}

void parse_ablate(const json& j, AblateSection& a)
{
    require_object(j, "ablate");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "ablate." + k;
        if (k == "output_dir") a.output_dir = get<std::string>(v, w);
        else if (k == "sigmas") a.sigmas = get<std::vector<double>>(v, w);
        else unknown("ablate", k);
    }
}

} // namespace

std::vector<track::SequenceSpec> TrackSection::resolved_sequences() const
{
    return sequences.empty() ? track::default_suite(suite_seed) : sequences;
}

void RunConfig::validate() const
{
    zoo.config.dataset.validate();
    if (zoo.config.train.epochs == 0 || zoo.config.train.batch_size == 0 || !(zoo.config.train.learning_rate > 0.0)) {
        throw ConfigError("zoo.train: epochs, batch_size and learning_rate must be positive");
    }
    if (zoo.dir.empty()) throw ConfigError("zoo.dir must not be empty");
    attack.validate();
    if (attack_eval.images == 0) throw ConfigError("attack_eval.images must be positive");
    if (track.conditions.empty()) throw ConfigError("track.conditions must not be empty");
    for (const auto& s : track.sequences) s.validate();
    for (double s : ablate.sigmas) {
        if (!(s > 0.0)) throw ConfigError("ablate.sigmas must be positive");
    }
}

RunConfig parse_run_config(const json& j)
{
    RunConfig c;
    require_object(j, "config");
    for (const auto& [k, v] : j.items()) {
        if (k == "zoo") parse_zoo(v, c.zoo);
        else if (k == "attack") engine::merge_json(v, c.attack);
        else if (k == "attack_eval") parse_attack_eval(v, c.attack_eval);
        else if (k == "track") parse_track(v, c.track);
        else if (k == "ablate") parse_ablate(v, c.ablate);
        else unknown("config", k);
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    const std::string text = util::read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& c)
{
    json zoo = zoo::zoo_config_json(c.zoo.config);
    zoo["dir"] = c.zoo.dir;
    json track_sequences = json::array();
    for (const auto& s : c.track.sequences) track_sequences.push_back(s);
    std::vector<std::string> conditions;
    for (auto cond : c.track.conditions) conditions.push_back(track::to_string(cond));
    return json{{"zoo", zoo},
                {"attack", c.attack},
                {"attack_eval",
                 {{"images", c.attack_eval.images},
                  {"export_examples", c.attack_eval.export_examples},
                  {"output_dir", c.attack_eval.output_dir}}},
                {"track",
                 {{"tracker_model", c.track.tracker_model},
                  {"suite_seed", c.track.suite_seed},
                  {"sequences", track_sequences},
                  {"conditions", conditions},
                  {"output_dir", c.track.output_dir},
                  {"export_sequences", c.track.export_sequences}}},
                {"ablate", {{"output_dir", c.ablate.output_dir}, {"sigmas", c.ablate.sigmas}}}};
}

} // namespace amga::cli
