#include "amga/engine/config.hpp"

#include <cmath>
#include <numbers>

#include "amga/numerics/errors.hpp"

namespace amga::engine {

std::string to_string(SmoothingMode m)
{
    switch (m) {
    case SmoothingMode::none: return "none";
    case SmoothingMode::final_only: return "final_only";
    case SmoothingMode::every_iteration: return "every_iteration";
    }
    return "?";
}

std::string to_string(StepSchedule s) { return s == StepSchedule::cosine ? "cosine" : "constant"; }

SmoothingMode smoothing_mode_from_string(const std::string& s)
{
    for (auto m : {SmoothingMode::none, SmoothingMode::final_only, SmoothingMode::every_iteration}) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("attack.smoothing_mode: unknown value '" + s + "'");
}

StepSchedule step_schedule_from_string(const std::string& s)
{
    if (s == "cosine") return StepSchedule::cosine;
    if (s == "constant") return StepSchedule::constant;
    throw ConfigError("attack.step_schedule: unknown value '" + s + "'");
}

void AttackConfig::validate() const
{
    // epsilon == 0 is accepted: a zero budget is a supported no-op attack.
    if (!(alpha > 0.0)) throw ConfigError("attack.alpha must be positive");
    if (!(epsilon >= 0.0)) throw ConfigError("attack.epsilon must be non-negative");
    if (!(mu >= 0.0 && mu < 1.0)) throw ConfigError("attack.mu must lie in [0, 1)");
    if (!(sigma > 0.0)) throw ConfigError("attack.sigma must be positive");
    if (K < 1) throw ConfigError("attack.K must be at least 1");
    if (n < 1) throw ConfigError("attack.n must be at least 1");
    if (!(diversity_prob >= 0.0 && diversity_prob <= 1.0)) throw ConfigError("attack.diversity_prob must lie in [0, 1]");
    if (!(diversity_scale_min > 0.0 && diversity_scale_min <= 1.0)) {
        throw ConfigError("attack.diversity_scale_min must lie in (0, 1]");
    }
    if (!(beta_rate >= 0.0)) throw ConfigError("attack.beta_rate must be non-negative");
}

double AttackConfig::step_size(std::size_t k) const
{
    if (step_schedule == StepSchedule::constant) return alpha;
    const double floor = alpha / 4.0;
    const double t = static_cast<double>(k) / static_cast<double>(K);
    return alpha - (alpha - floor) * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
}

void to_json(nlohmann::json& j, const AttackConfig& c)
{
    j = nlohmann::json{{"alpha", c.alpha},
                       {"mu", c.mu},
                       {"sigma", c.sigma},
                       {"epsilon", c.epsilon},
                       {"K", c.K},
                       {"n", c.n},
                       {"diversity_prob", c.diversity_prob},
                       {"diversity_scale_min", c.diversity_scale_min},
                       {"smoothing_mode", to_string(c.smoothing_mode)},
                       {"step_schedule", to_string(c.step_schedule)},
                       {"meta_test", c.meta_test},
                       {"learn_beta", c.learn_beta},
                       {"beta_rate", c.beta_rate},
                       {"shared_perturbation", c.shared_perturbation},
                       {"seed", c.seed}};
}

void merge_json(const nlohmann::json& j, AttackConfig& c)
{
    if (!j.is_object()) throw ConfigError("attack: expected an object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "mu") c.mu = v.get<double>();
            else if (key == "sigma") c.sigma = v.get<double>();
            else if (key == "epsilon") c.epsilon = v.get<double>();
            else if (key == "K") c.K = v.get<std::size_t>();
            else if (key == "n") c.n = v.get<std::size_t>();
            else if (key == "diversity_prob") c.diversity_prob = v.get<double>();
            else if (key == "diversity_scale_min") c.diversity_scale_min = v.get<double>();
            else if (key == "smoothing_mode") c.smoothing_mode = smoothing_mode_from_string(v.get<std::string>());
            else if (key == "step_schedule") c.step_schedule = step_schedule_from_string(v.get<std::string>());
            else if (key == "meta_test") c.meta_test = v.get<bool>();
            else if (key == "learn_beta") c.learn_beta = v.get<bool>();
            else if (key == "beta_rate") c.beta_rate = v.get<double>();
            else if (key == "shared_perturbation") c.shared_perturbation = v.get<bool>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else throw ConfigError("attack: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("attack: ") + e.what());
    }
}

} // namespace amga::engine
