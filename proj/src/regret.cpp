#include "rrmab/regret.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rrmab {

std::int64_t AllocationVector::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

bool AllocationVector::single_arm() const {
    int nonzero = 0;
    for (auto c : counts) nonzero += (c != 0);
    return nonzero <= 1;
}

double regret_benchmark(const BanditInstance& instance) {
    return oracle_single_best(instance).value;
}

double allocation_value(const AllocationVector& v, const BanditInstance& instance) {
    if (v.counts.size() != instance.arms.size()) {
        throw std::invalid_argument("allocation needs one count per arm");
    }
    for (auto c : v.counts) {
        if (c < 0) throw std::invalid_argument("allocation counts must be non-negative");
    }
    if (v.total() != instance.horizon) throw std::invalid_argument("allocation must sum to T");
    double value = 0.0;
    for (std::size_t i = 0; i < v.counts.size(); ++i) {
        value += prefix_total(instance.arms[i], v.counts[i]);
    }
    return value;
}

RegretReport static_regret(const PolicyTrace& trace, const BanditInstance& instance) {
    if (static_cast<std::int64_t>(trace.choices.size()) != instance.horizon) {
        throw std::invalid_argument("trace length differs from T");
    }
    RegretReport report;
    report.pulls.assign(instance.arms.size(), 0);
    long double observed = 0.0L;
    for (std::size_t idx = 0; idx < trace.choices.size(); ++idx) {
        const Step& s = trace.choices[idx];
        if (s.t != static_cast<std::int64_t>(idx) + 1) throw std::invalid_argument("trace steps out of order");
        if (s.arm >= instance.arms.size()) throw std::invalid_argument("trace arm out of range");
        if (s.pull_index != ++report.pulls[s.arm]) {
            throw std::invalid_argument("trace pull indices are not consecutive");
        }
        observed += s.reward;
    }
    report.benchmark = regret_benchmark(instance);
    // A rested trajectory's expected value depends only on its pull counts.
    report.achieved = allocation_value(AllocationVector{report.pulls}, instance);
    report.pseudo_regret = report.benchmark - report.achieved;
    report.realized_regret = report.benchmark - static_cast<double>(observed);
    return report;
}

std::int64_t allocation_count(std::int64_t horizon, std::int64_t num_arms, std::int64_t cap) {
    if (horizon < 0 || num_arms < 1) throw std::invalid_argument("bad allocation shape");
    // C(T + K - 1, K - 1) built incrementally; every prefix is itself a binomial
    long double c = 1.0L;
    for (std::int64_t i = 1; i <= num_arms - 1; ++i) {
        c = c * static_cast<long double>(horizon + i) / static_cast<long double>(i);
        if (c > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::int64_t>(std::llround(c));
}

BruteForceResult brute_force_optimal(const BanditInstance& instance, std::int64_t cap) {
    const std::int64_t k = instance.num_arms;
    const std::int64_t t = instance.horizon;
    if (allocation_count(t, k, cap) > cap) {
        throw std::length_error("allocation enumeration exceeds the configured cap");
    }
    const auto ku = static_cast<std::size_t>(k);
    const double single_best = oracle_single_best(instance).value;

    BruteForceResult result;
    result.value = -std::numeric_limits<double>::infinity();
    AllocationVector alloc{std::vector<std::int64_t>(ku, 0)};
    // Lexicographic over counts: coordinate `pos` runs 0..remaining and the
    // last coordinate takes whatever is left.
    auto walk = [&](auto&& self, std::size_t pos, std::int64_t remaining) -> void {
        if (pos + 1 == ku) {
            alloc.counts[pos] = remaining;
            const double value = allocation_value(alloc, instance);
            ++result.vectors_checked;
            if (value > result.value) {
                result.value = value;
                result.best = alloc;
            }
            if (alloc.single_arm() && value >= single_best) result.single_arm_attains = true;
            return;
        }
        for (std::int64_t c = 0; c <= remaining; ++c) {
            alloc.counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    walk(walk, 0, t);
    return result;
}

GapPair gaps(const BanditInstance& instance, std::size_t i, std::size_t j) {
    const auto& a = instance.arms.at(i);
    const auto& b = instance.arms.at(j);
    GapPair g;
    g.intercept_gap = a.intercept - b.intercept;
    g.normalized_gap = g.intercept_gap / static_cast<double>(instance.horizon + 1);
    g.slope_gap = a.slope - b.slope;
    return g;
}

double lemma10_bound(const BanditInstance& instance, std::size_t j, double delta) {
    const std::size_t best = oracle_single_best(instance).arm;
    const GapPair g = gaps(instance, best, j);
    const double denom = 2.0 * g.normalized_gap + g.slope_gap;
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(16.0 * std::sqrt(std::log(2.0 / delta)) / denom, 2.0 / 3.0);
}

double lemma10_round_limit(const BanditInstance& instance, std::size_t j, double delta) {
    const double bound = lemma10_bound(instance, j, delta);
    if (!std::isfinite(bound)) return bound;
    return 4.0 * std::ceil(bound / 4.0);
}

double theorem11_bound(const BanditInstance& instance, double delta) {
    const std::size_t best = oracle_single_best(instance).arm;
    double total = 0.0;
    for (std::size_t j = 0; j < instance.arms.size(); ++j) {
        if (j == best) continue;
        const double b = lemma10_bound(instance, j, delta);
        if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
        total += std::ceil(b) * instance.phi;
    }
    return total + 1.0;
}

double theorem11_bound(const BanditInstance& instance) {
    return theorem11_bound(instance,
                           theorem11_delta(instance.horizon, instance.num_arms, instance.phi));
}

}  // namespace rrmab
