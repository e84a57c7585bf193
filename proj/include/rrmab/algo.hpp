#pragma once

// Policies for rising rested bandits with linear drift.
//
//   red_ee    explore every arm 2M times, then commit to the best forecast.
//   red_ae    round-based elimination: four pulls per surviving arm per round,
//             drop arms whose forecast total trails a survivor by > 2 Gamma.
//   hr_ed_ae  red_ae on a budget of K*M pulls, then commit to a survivor.
//
// Arm indices are 0-based throughout the library. All "arbitrary" or argmax
// choices resolve to the lowest index.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrmab/env.hpp"

namespace rrmab {

enum class Algorithm { red_ee, red_ae, hr_ed_ae, oracle, round_robin };

std::string to_string(Algorithm algo);
/// Accepts "red-ee", "red-ae", "hr-ed-ae", "oracle", "round-robin".
/// Throws std::invalid_argument otherwise.
Algorithm algorithm_from_string(const std::string& name);

struct AlgoParams {
    std::int64_t half_window = 0;  // M
    double delta = 0.0;
    double phi = 0.0;
};

struct Step {
    std::int64_t t = 0;
    std::size_t arm = 0;
    std::int64_t pull_index = 0;
    double reward = 0.0;
};

struct PolicyTrace {
    std::vector<Step> choices;
    /// Surviving arms after elimination (elimination policies only).
    std::vector<std::size_t> survivors;
    /// Per arm: pull count when it was eliminated, or nullopt.
    std::vector<std::optional<std::int64_t>> eliminated_at;
    std::optional<std::size_t> committed_arm;
    /// True when every forecast total the policy acted on was within its
    /// Gamma width of the true total (checked against the known instance).
    bool good_event_flag = true;

    std::vector<std::int64_t> pull_counts(std::size_t num_arms) const;
    bool eliminated(std::size_t arm) const {
        return arm < eliminated_at.size() && eliminated_at[arm].has_value();
    }
};

/// M = T^(4/5) ln(4 phi K T)^(1/5) / (phi K)^(2/5), rounded to the nearest
/// even integer and clamped to >= 2. Throws std::invalid_argument when
/// 4 phi K T <= 1 or an argument is out of range.
std::int64_t theorem5_window(std::int64_t horizon, std::int64_t num_arms, double phi);

/// M = T^(4/5) ln(phi K T^2)^(1/5) / (phi K)^(2/5), same rounding and errors.
std::int64_t theorem12_window(std::int64_t horizon, std::int64_t num_arms, double phi);

/// delta = 1 / (2 phi K T), the confidence level behind the red_ee window.
double theorem5_delta(std::int64_t horizon, std::int64_t num_arms, double phi);

/// delta = 1 / (2 phi K T^2).
double theorem11_delta(std::int64_t horizon, std::int64_t num_arms, double phi);

struct BestArm {
    std::size_t arm = 0;
    double value = 0.0;
};

/// Best single arm over the whole horizon: argmax_i L_i T(T+1)/2 + b_i T.
BestArm oracle_single_best(const BanditInstance& instance);

/// Explore-then-commit. When 2KM >= T the exploration cannot fit and the
/// policy plays round-robin for the whole horizon.
PolicyTrace red_ee(const BanditInstance& instance, std::int64_t half_window, std::uint64_t seed);

/// Arm elimination with a pull budget of `horizon` (<= T). Forecast totals and
/// widths always cover the instance's full horizon [1, T].
PolicyTrace red_ae(const BanditInstance& instance, std::int64_t horizon, double delta,
                   std::uint64_t seed);

/// Throws std::invalid_argument when K*M > T.
PolicyTrace hr_ed_ae(const BanditInstance& instance, std::int64_t half_window, double delta,
                     std::uint64_t seed);

PolicyTrace round_robin(const BanditInstance& instance, std::uint64_t seed);

/// Plays one arm for the whole horizon.
PolicyTrace play_single_arm(const BanditInstance& instance, std::size_t arm, std::uint64_t seed);

/// Dispatches by algorithm id. `oracle` plays the true best arm.
PolicyTrace run_policy(Algorithm algo, const BanditInstance& instance, const AlgoParams& params,
                       std::uint64_t seed);

}  // namespace rrmab
