#include "rrmab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrmab {

namespace {

double log_two_over(double delta) { return std::log(2.0 / delta); }

double m_pow_1_5(std::int64_t m) {
    const auto md = static_cast<double>(m);
    return md * std::sqrt(md);
}

// sum_{n=lo}^{hi} |n - m| for lo <= hi, exact.
std::int64_t abs_offset_sum(std::int64_t lo, std::int64_t hi, std::int64_t m) {
    auto run = [](std::int64_t a, std::int64_t b) {  // sum of a..b, a <= b
        return (a + b) * (b - a + 1) / 2;
    };
    std::int64_t total = 0;
    if (lo < m) {
        const std::int64_t top = std::min(hi, m);
        total += run(m - top, m - lo);
    }
    if (hi > m) {
        const std::int64_t bottom = std::max(lo, m);
        total += run(bottom - m, hi - m);
    }
    return total;
}

}  // namespace

void check_params(const ConfidenceParams& params) {
    if (params.half_window < 1) throw std::invalid_argument("half window M must be >= 1");
    if (!(params.delta > 0.0) || params.delta > 2.0) {
        throw std::invalid_argument("delta must lie in (0, 2]");
    }
}

double window_mean(const ArmHistory& history, std::int64_t start, std::int64_t length) {
    if (start < 1 || length < 1 || start + length - 1 > history.size()) {
        throw std::out_of_range("window exceeds history");
    }
    return static_cast<double>(history.range_sum(start, start + length - 1) /
                               static_cast<long double>(length));
}

LineEstimate line_from_halves(double first_half_mean, double second_half_mean,
                              std::int64_t half_window) {
    if (half_window < 1) throw std::invalid_argument("half window must be >= 1");
    LineEstimate est;
    est.first_half_mean = first_half_mean;
    est.second_half_mean = second_half_mean;
    est.half_window = half_window;
    est.slope_hat = (second_half_mean - first_half_mean) / static_cast<double>(half_window);
    est.anchor = static_cast<double>(half_window) + 0.5;
    return est;
}

LineEstimate line_fit(const ArmHistory& history, std::int64_t total_samples) {
    if (total_samples < 2 || total_samples % 2 != 0) {
        throw std::invalid_argument("line fit needs an even sample count >= 2");
    }
    if (total_samples > history.size()) throw std::out_of_range("line fit exceeds history");
    const std::int64_t m = total_samples / 2;
    return line_from_halves(window_mean(history, 1, m), window_mean(history, m + 1, m), m);
}

double forecast(const LineEstimate& est, std::int64_t n) {
    return est.level() + (static_cast<double>(n) - est.anchor) * est.slope_hat;
}

double cum_forecast(const LineEstimate& est, std::int64_t n1, std::int64_t n2) {
    if (n1 < 1 || n1 > n2) throw std::invalid_argument("cum_forecast needs 1 <= n1 <= n2");
    const double count = static_cast<double>(n2 - n1 + 1);
    const double mid = 0.5 * static_cast<double>(n1 + n2);
    return count * (est.level() + (mid - est.anchor) * est.slope_hat);
}

double window_width(std::int64_t window, double delta) {
    return std::sqrt(log_two_over(delta) / (2.0 * static_cast<double>(window)));
}

double slope_width(std::int64_t half_window, double delta) {
    return std::sqrt(2.0 * log_two_over(delta)) / m_pow_1_5(half_window);
}

double gamma(std::int64_t n, const ConfidenceParams& params) {
    check_params(params);
    if (n < 1) throw std::invalid_argument("gamma needs n >= 1");
    const auto offset = static_cast<double>(n > params.half_window ? n - params.half_window
                                                                   : params.half_window - n);
    return window_width(params.half_window, params.delta) +
           offset * slope_width(params.half_window, params.delta);
}

double big_gamma(std::int64_t n1, std::int64_t n2, const ConfidenceParams& params) {
    check_params(params);
    if (n1 < 1 || n1 > n2) throw std::invalid_argument("big_gamma needs 1 <= n1 <= n2");
    // sqrt(ln/2M) = (M/2) * sqrt(2 ln)/M^1.5, so every term shares one factor
    const std::int64_t m = params.half_window;
    const std::int64_t bracket = m * (n2 - n1 + 1) + 2 * abs_offset_sum(n1, n2, m);
    return slope_width(m, params.delta) * static_cast<double>(bracket) / 2.0;
}

double gamma_bound(std::int64_t horizon, const ConfidenceParams& params) {
    check_params(params);
    if (2 * params.half_window > horizon) throw std::invalid_argument("gamma_bound needs 2M <= T");
    return slope_width(params.half_window, params.delta) * static_cast<double>(horizon * horizon) /
           2.0;
}

}  // namespace rrmab
