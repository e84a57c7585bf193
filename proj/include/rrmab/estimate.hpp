#pragma once

// Two-window line estimates for one arm and the matching confidence widths.
//
// Given 2M rewards r(1..2M), the first half averages pulls 1..M and the second
// half pulls M+1..2M. For linear means the window averages equal the true mean
// at the window centres (M+1)/2 and (3M+1)/2, so the slope estimate is their
// difference over M and the line passes through the midpoint anchor M + 1/2.

#include <cstdint>
#include <span>
#include <vector>

namespace rrmab {

/// Append-only record of one arm's observed rewards, in pull order.
class ArmHistory {
public:
    ArmHistory() { prefix_.push_back(0.0L); }
    explicit ArmHistory(std::span<const double> rewards) : ArmHistory() {
        for (double r : rewards) push(r);
    }

    void push(double reward) {
        rewards_.push_back(reward);
        prefix_.push_back(prefix_.back() + static_cast<long double>(reward));
    }

    std::int64_t size() const noexcept { return static_cast<std::int64_t>(rewards_.size()); }
    const std::vector<double>& rewards() const noexcept { return rewards_; }

    /// Sum of rewards at 1-based pull indices [first, last].
    long double range_sum(std::int64_t first, std::int64_t last) const {
        return prefix_[static_cast<std::size_t>(last)] - prefix_[static_cast<std::size_t>(first - 1)];
    }

private:
    std::vector<double> rewards_;
    std::vector<long double> prefix_;
};

struct LineEstimate {
    double first_half_mean = 0.0;
    double second_half_mean = 0.0;
    double slope_hat = 0.0;
    std::int64_t half_window = 0;
    double anchor = 0.0;

    double level() const noexcept { return 0.5 * (first_half_mean + second_half_mean); }
};

struct ConfidenceParams {
    std::int64_t half_window = 0;
    double delta = 0.0;
};

/// Mean of `length` rewards starting at 1-based pull index `start`.
/// Throws std::out_of_range when the window leaves the history.
double window_mean(const ArmHistory& history, std::int64_t start, std::int64_t length);

/// Fits the line from the first `total_samples` (= 2M, even) rewards.
/// Throws std::invalid_argument for odd or non-positive sizes and
/// std::out_of_range when the history is too short.
LineEstimate line_fit(const ArmHistory& history, std::int64_t total_samples);

/// Builds an estimate directly from two half means.
LineEstimate line_from_halves(double first_half_mean, double second_half_mean,
                              std::int64_t half_window);

/// Predicted mean reward at pull index n.
double forecast(const LineEstimate& est, std::int64_t n);

/// Sum of forecasts over [n1, n2] in closed form. Throws std::invalid_argument
/// when n1 > n2 or n1 < 1.
double cum_forecast(const LineEstimate& est, std::int64_t n1, std::int64_t n2);

/// Per-pull confidence width gamma_n for forecasts built from 2M samples:
///   sqrt(ln(2/delta) / 2M) + |n - M| * sqrt(2 ln(2/delta)) / M^1.5
/// The |n - M| offset is kept as published even though forecasts anchor at
/// M + 1/2; the width is conservative by at most half a step.
double gamma(std::int64_t n, const ConfidenceParams& params);

/// Sum of gamma_n over [n1, n2]. Uses the closed form
///   Gamma = sqrt(2 ln(2/delta)) / M^1.5 * (M * count + 2 * sum |n - M|) / 2
/// with the bracket evaluated exactly in integers, so comparisons between
/// ranges that share (M, delta) are monotone in floating point.
double big_gamma(std::int64_t n1, std::int64_t n2, const ConfidenceParams& params);

/// T^2 sqrt(ln(2/delta)) / (sqrt(2) M^1.5), an upper bound on big_gamma(1, T)
/// whenever 2M <= T. Throws std::invalid_argument when 2M > T.
double gamma_bound(std::int64_t horizon, const ConfidenceParams& params);

/// Throws std::invalid_argument unless M >= 1 and 0 < delta <= 2.
void check_params(const ConfidenceParams& params);

/// Half-width used for a single M-sample window mean: sqrt(ln(2/delta) / 2M).
double window_width(std::int64_t window, double delta);

/// Slope half-width from 2M samples: sqrt(2 ln(2/delta)) / M^1.5.
double slope_width(std::int64_t half_window, double delta);

}  // namespace rrmab
