#pragma once

// Rising rested bandit environments with linear drift.
//
// Arm i has mean reward mu_i(n) = slope_i * n + intercept_i when it is pulled
// for the n-th time (n is 1-based and counts pulls of that arm only).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rrmab {

struct LinearArm {
    double slope = 0.0;
    double intercept = 0.0;
};

enum class NoiseKind { none, gaussian_unit };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian_unit;
};

/// Mean reward of `arm` at its n-th pull. Throws std::domain_error for n < 1.
double mean(const LinearArm& arm, std::int64_t n);

/// Sum of the first v means, L * v(v+1)/2 + b * v (0 for v = 0).
double prefix_total(const LinearArm& arm, std::int64_t v);

/// Sum of means over pulls [n1, n2] in closed form (0 when n2 < n1).
double cumulative_mean(const LinearArm& arm, std::int64_t n1, std::int64_t n2);

struct BanditInstance {
    std::int64_t num_arms = 0;
    std::int64_t horizon = 0;
    std::vector<LinearArm> arms;
    NoiseSpec noise;
    double phi = 0.0;
    bool phi_explicit = false;

    /// Builds an instance with phi = max_i mean_i(T), or `phi_override` when
    /// given. Throws std::invalid_argument when the result is not a valid
    /// rising instance.
    static BanditInstance make(std::int64_t horizon, std::vector<LinearArm> arms,
                               NoiseSpec noise = {},
                               std::optional<double> phi_override = std::nullopt);

    /// Same arms, new horizon. A computed phi is recomputed; an explicit one
    /// is kept and must still dominate max mean(T).
    BanditInstance with_horizon(std::int64_t new_horizon) const;

    double max_final_mean() const;
};

/// Empty when valid; otherwise one message per violation ("negative slope at
/// arm 1", "phi below max mean", ...). Arm numbers in messages are 1-based.
std::vector<std::string> validate_instance(const BanditInstance& instance);

/// Observed reward for the n-th pull of `arm` under stream `seed`: the mean
/// plus the counter-keyed noise draw. EnvState::pull uses the same stream.
double sample_reward(const BanditInstance& instance, std::uint64_t seed, std::size_t arm,
                     std::int64_t n);

/// Mutable per-run state: pull counters and the reward stream.
class EnvState {
public:
    EnvState(const BanditInstance& instance, std::uint64_t seed);

    /// Pulls `arm` (0-based) and returns the observed reward. Throws
    /// std::out_of_range for a bad arm and std::logic_error past the horizon.
    double pull(std::size_t arm);

    /// Expected reward of the most recent pull.
    double last_mean() const noexcept { return last_mean_; }

    const std::vector<std::int64_t>& pull_counts() const noexcept { return counts_; }
    std::int64_t pull_count(std::size_t arm) const { return counts_.at(arm); }
    /// 1-based index of the next step.
    std::int64_t step() const noexcept { return step_; }
    std::int64_t remaining() const noexcept { return instance_->horizon - step_ + 1; }
    std::uint64_t seed() const noexcept { return seed_; }
    const BanditInstance& instance() const noexcept { return *instance_; }

private:
    const BanditInstance* instance_;
    std::uint64_t seed_;
    std::vector<std::int64_t> counts_;
    std::int64_t step_ = 1;
    double last_mean_ = 0.0;
};

/// Lower-bound profile family: profile 0 has every arm weak, profile j >= 1
/// makes arm j (1-based) strong.
struct ProfileFamily {
    std::int64_t num_arms = 0;
    std::int64_t horizon = 0;
    std::int64_t profile_index = 0;

    double strong_slope() const;
    double weak_slope() const;
};

/// Throws std::invalid_argument unless K^3 < T and the profile index is in
/// [0, K].
BanditInstance make_profile_instance(const ProfileFamily& family);

// Instance files: {"K", "T", "phi"?, "noise": "none"|"gaussian", "arms": [{"L","b"}]}
BanditInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const BanditInstance& instance);

std::string to_string(NoiseKind kind);
NoiseKind noise_from_string(const std::string& name);

}  // namespace rrmab
