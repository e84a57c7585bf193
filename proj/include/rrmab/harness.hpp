#pragma once

// Monte Carlo experiment runner.
//
// Replication r of an experiment uses seed replication_seed(base, r), so a
// sweep produces the same rows whether replications run on one thread or
// many. Aggregates are summed in replication order.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrmab/algo.hpp"
#include "rrmab/env.hpp"

namespace rrmab {

enum class InstanceSource { explicit_instance, profile, uniform_profile };

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::red_ee;
    InstanceSource source = InstanceSource::uniform_profile;
    std::optional<BanditInstance> instance;  // explicit_instance only; T is replaced per grid point
    std::int64_t profile_index = 0;          // profile only
    std::vector<std::int64_t> horizons;
    std::int64_t num_arms = 0;
    std::int64_t replications = 1;
    std::uint64_t base_seed = 0;
    std::optional<std::int64_t> half_window;
    std::optional<double> delta;
    std::optional<NoiseKind> noise;  // overrides the instance / profile noise
    unsigned threads = 1;
    bool record_wallclock = false;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate_config(const ExperimentConfig& config);

struct ReplicationRow {
    std::string algo;
    std::int64_t num_arms = 0;
    std::int64_t horizon = 0;
    std::int64_t half_window = 0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::int64_t rep = 0;
    std::int64_t profile = 0;  // 1-based strong arm for profile sources, else 0
    double pseudo_regret = 0.0;
    double realized_regret = 0.0;
    std::int64_t pulls_best = 0;
    bool best_eliminated = false;
    bool good_event = true;
    double wallclock_ms = 0.0;
};

struct SweepRow {
    std::string algo;
    std::int64_t num_arms = 0;
    std::int64_t horizon = 0;
    std::int64_t half_window = 0;
    double delta = 0.0;
    std::int64_t replications = 0;
    double mean_pseudo_regret = 0.0;
    double stderr_pseudo_regret = 0.0;
    double mean_realized_regret = 0.0;
    double best_eliminated_freq = 0.0;
    double mean_wallclock_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<ReplicationRow> replications;
};

/// M and delta for `algo` on `instance`, honouring overrides. red-ee uses
/// theorem5_window; hr-ed-ae uses theorem12_window capped at the
/// largest even value with K*M <= T; elimination policies default to
/// delta = 1/(2 phi K T^2).
AlgoParams resolve_params(Algorithm algo, const BanditInstance& instance,
                          std::optional<std::int64_t> half_window, std::optional<double> delta);

/// Instance for replication `rep` at horizon T.
BanditInstance replication_instance(const ExperimentConfig& config, std::int64_t horizon,
                                    std::uint64_t rep_seed, std::int64_t* profile_out = nullptr);

SweepResult run_replications(const ExperimentConfig& config);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of ln(y) on ln(x). Throws std::invalid_argument for fewer
/// than three points or a non-positive value.
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

/// Exponent of mean pseudo-regret in T across the sweep rows.
PowerLawFit scaling_exponent(const SweepResult& sweep);

struct AdversarialResult {
    double mean_regret = 0.0;
    double stderr_regret = 0.0;
    double lower_reference = 0.0;  // K^(3/5) T^(4/5) / 64
    double tau = 0.0;              // T^(4/5) / (12 K^(2/5))
    std::int64_t half_window = 0;
    double delta = 0.0;
    SweepResult sweep;
};

double adversarial_lower_reference(std::int64_t num_arms, std::int64_t horizon);
double adversarial_tau(std::int64_t num_arms, std::int64_t horizon);

/// Each replication draws the strong arm uniformly from 1..K, builds that
/// profile and runs `algo`. Throws std::invalid_argument unless K >= 2 and
/// K^3 < T.
AdversarialResult adversarial_eval(std::int64_t num_arms, std::int64_t horizon, Algorithm algo,
                                   std::int64_t replications, std::uint64_t base_seed,
                                   std::optional<std::int64_t> half_window = std::nullopt,
                                   std::optional<double> delta = std::nullopt,
                                   unsigned threads = 1);

struct CoverageRate {
    std::string name;
    double ceiling = 0.0;
    std::int64_t violations = 0;
    std::int64_t trials = 0;

    double rate() const { return trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0; }
    /// Three binomial standard errors at the ceiling.
    double slack() const;
    bool within_ceiling() const { return rate() <= ceiling + slack(); }
};

struct CoverageReport {
    std::vector<CoverageRate> rates;
    const CoverageRate& at(const std::string& name) const;
};

/// Simulates the exploration phase `trials` times and counts how often each
/// confidence inequality fails.
///
/// With 2M samples per arm: each half window against sqrt(ln(2/delta)/2M)
/// (ceiling delta), the slope against sqrt(2 ln(2/delta))/M^1.5 (2 delta),
/// all three jointly (2 delta), forecasts for n in [1, 4M] against gamma_n
/// (2 delta) and the union over arms of both half windows (2 delta K).
///
/// For the elimination variant (m_cap > 0), every m = 4, 8, ..., m_cap is
/// checked with halves of m/2 samples and the widths at M = m/2: both halves
/// together (2 delta), the slope (2 delta) and the union over arms and m
/// (2 delta K (m_cap / 4)).
///
/// Per-arm rates pool all arms, so their trial count is trials * K.
CoverageReport good_event_coverage(const BanditInstance& instance, std::int64_t half_window,
                                   double delta, std::int64_t trials, std::uint64_t seed,
                                   std::int64_t m_cap = 0);

struct BruteCheckResult {
    std::int64_t instances = 0;
    std::int64_t single_arm_optimal = 0;
    std::int64_t value_matches = 0;
};

/// Random rising instances with dyadic slopes/intercepts (so every value is
/// exact in double), each certified by exhaustive enumeration.
BruteCheckResult brute_check(std::int64_t num_arms, std::int64_t horizon, std::int64_t count,
                             std::uint64_t seed, NoiseKind noise = NoiseKind::none);

BanditInstance random_dyadic_instance(std::int64_t num_arms, std::int64_t horizon,
                                      std::uint64_t seed, NoiseKind noise = NoiseKind::none);

// Output helpers. Numbers use a fixed round-trip format so repeated runs are
// byte-identical.
std::string format_number(double value);
void write_replications_csv(std::ostream& out, const std::vector<ReplicationRow>& rows);
void write_aggregate_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_plot_data_csv(std::ostream& out, const SweepResult& sweep);
nlohmann::json sweep_to_json(const SweepResult& sweep);
nlohmann::json coverage_to_json(const CoverageReport& report);

}  // namespace rrmab
