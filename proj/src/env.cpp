#include "rrmab/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rrmab/rng.hpp"

namespace rrmab {

double mean(const LinearArm& arm, std::int64_t n) {
    if (n < 1) throw std::domain_error("pull index must be >= 1");
    return arm.slope * static_cast<double>(n) + arm.intercept;
}

double prefix_total(const LinearArm& arm, std::int64_t v) {
    if (v < 0) throw std::domain_error("pull count must be >= 0");
    const auto triangle = static_cast<double>(v * (v + 1) / 2);
    return arm.slope * triangle + arm.intercept * static_cast<double>(v);
}

double cumulative_mean(const LinearArm& arm, std::int64_t n1, std::int64_t n2) {
    if (n2 < n1) return 0.0;
    const double count = static_cast<double>(n2 - n1 + 1);
    const double mid = 0.5 * static_cast<double>(n1 + n2);
    return count * (arm.slope * mid + arm.intercept);
}

double BanditInstance::max_final_mean() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& arm : arms) best = std::max(best, mean(arm, horizon));
    return best;
}

BanditInstance BanditInstance::make(std::int64_t horizon, std::vector<LinearArm> arms,
                                    NoiseSpec noise, std::optional<double> phi_override) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (arms.empty()) throw std::invalid_argument("instance needs at least one arm");
    BanditInstance inst;
    inst.num_arms = static_cast<std::int64_t>(arms.size());
    inst.horizon = horizon;
    inst.arms = std::move(arms);
    inst.noise = noise;
    inst.phi = phi_override ? *phi_override : inst.max_final_mean();
    inst.phi_explicit = phi_override.has_value();
    if (auto problems = validate_instance(inst); !problems.empty()) {
        std::string msg = "invalid instance:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw std::invalid_argument(msg);
    }
    return inst;
}

BanditInstance BanditInstance::with_horizon(std::int64_t new_horizon) const {
    return make(new_horizon, arms, noise, phi_explicit ? std::optional<double>(phi) : std::nullopt);
}

std::vector<std::string> validate_instance(const BanditInstance& instance) {
    std::vector<std::string> out;
    if (instance.num_arms < 1) out.emplace_back("no arms");
    if (instance.horizon < 1) out.emplace_back("horizon below 1");
    if (static_cast<std::int64_t>(instance.arms.size()) != instance.num_arms) {
        out.emplace_back("arm list length differs from K");
    }
    for (std::size_t i = 0; i < instance.arms.size(); ++i) {
        const auto& a = instance.arms[i];
        if (!std::isfinite(a.slope) || !std::isfinite(a.intercept)) {
            out.push_back("non-finite parameter at arm " + std::to_string(i + 1));
        } else if (a.slope < 0.0) {
            out.push_back("negative slope at arm " + std::to_string(i + 1));
        }
    }
    if (!instance.arms.empty() && instance.horizon >= 1) {
        if (!(instance.phi >= instance.max_final_mean())) out.emplace_back("phi below max mean");
    }
    return out;
}

EnvState::EnvState(const BanditInstance& instance, std::uint64_t seed)
    : instance_(&instance), seed_(seed), counts_(instance.arms.size(), 0) {}

double EnvState::pull(std::size_t arm) {
    if (arm >= counts_.size()) throw std::out_of_range("arm index out of range");
    if (step_ > instance_->horizon) throw std::logic_error("pull past the horizon");
    const std::int64_t n = ++counts_[arm];
    ++step_;
    last_mean_ = mean(instance_->arms[arm], n);
    return sample_reward(*instance_, seed_, arm, n);
}

double sample_reward(const BanditInstance& instance, std::uint64_t seed, std::size_t arm,
                     std::int64_t n) {
    const double mu = mean(instance.arms.at(arm), n);
    if (instance.noise.kind == NoiseKind::none) return mu;
    return mu + gaussian_at(seed, arm, static_cast<std::uint64_t>(n));
}

namespace {

double k_three_fifths(std::int64_t k) { return std::pow(static_cast<double>(k), 0.6); }

}  // namespace

double ProfileFamily::strong_slope() const { return 1.0 / static_cast<double>(horizon); }

double ProfileFamily::weak_slope() const {
    const double t = static_cast<double>(horizon);
    return 1.0 / t - k_three_fifths(num_arms) / std::pow(t, 1.2);
}

BanditInstance make_profile_instance(const ProfileFamily& family) {
    if (family.num_arms < 1 || family.horizon < 1) {
        throw std::invalid_argument("profile family needs K >= 1 and T >= 1");
    }
    // K^3 must stay below T; at K^3 == T every weak arm is flat and the
    // boundary is rejected.
    const auto k = static_cast<long double>(family.num_arms);
    if (k * k * k >= static_cast<long double>(family.horizon)) {
        throw std::invalid_argument("profile family requires K < T^(1/3)");
    }
    if (family.profile_index < 0 || family.profile_index > family.num_arms) {
        throw std::invalid_argument("profile index must be in [0, K]");
    }
    std::vector<LinearArm> arms(static_cast<std::size_t>(family.num_arms),
                                LinearArm{family.weak_slope(), 0.0});
    if (family.profile_index >= 1) {
        arms[static_cast<std::size_t>(family.profile_index - 1)].slope = family.strong_slope();
    }
    return BanditInstance::make(family.horizon, std::move(arms), NoiseSpec{NoiseKind::gaussian_unit},
                                1.0);
}

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::none ? "none" : "gaussian";
}

NoiseKind noise_from_string(const std::string& name) {
    if (name == "none") return NoiseKind::none;
    if (name == "gaussian" || name == "gaussian-unit") return NoiseKind::gaussian_unit;
    throw std::invalid_argument("unknown noise kind: " + name);
}

BanditInstance instance_from_json(const nlohmann::json& j) {
    if (!j.contains("T") || !j.contains("arms")) {
        throw std::invalid_argument("instance needs fields T and arms");
    }
    std::vector<LinearArm> arms;
    for (const auto& a : j.at("arms")) {
        arms.push_back(LinearArm{a.at("L").get<double>(), a.at("b").get<double>()});
    }
    if (j.contains("K") && j.at("K").get<std::int64_t>() != static_cast<std::int64_t>(arms.size())) {
        throw std::invalid_argument("K does not match the number of arms");
    }
    NoiseSpec noise;
    if (j.contains("noise")) noise.kind = noise_from_string(j.at("noise").get<std::string>());
    std::optional<double> phi;
    if (j.contains("phi") && !j.at("phi").is_null()) phi = j.at("phi").get<double>();
    return BanditInstance::make(j.at("T").get<std::int64_t>(), std::move(arms), noise, phi);
}

nlohmann::json instance_to_json(const BanditInstance& instance) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& a : instance.arms) arms.push_back({{"L", a.slope}, {"b", a.intercept}});
    return {{"K", instance.num_arms},
            {"T", instance.horizon},
            {"phi", instance.phi},
            {"noise", to_string(instance.noise.kind)},
            {"arms", arms}};
}

}  // namespace rrmab
