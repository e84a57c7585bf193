#include "rrmab/algo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rrmab/estimate.hpp"

namespace rrmab {

namespace {

// One run: environment, per-arm histories and the trace being recorded.
class Session {
public:
    Session(const BanditInstance& instance, std::uint64_t seed)
        : env_(instance, seed), histories_(instance.arms.size()) {
        trace_.choices.reserve(static_cast<std::size_t>(instance.horizon));
        trace_.eliminated_at.assign(instance.arms.size(), std::nullopt);
    }

    void play(std::size_t arm) {
        const std::int64_t t = env_.step();
        const double reward = env_.pull(arm);
        histories_[arm].push(reward);
        trace_.choices.push_back(Step{t, arm, env_.pull_count(arm), reward});
    }

    void play_until_end(std::size_t arm) {
        while (env_.remaining() > 0) play(arm);
    }

    // Records whether the forecast total over [n1, n2] stayed within Gamma.
    void check_estimate(std::size_t arm, const LineEstimate& est, double estimated_total,
                        std::int64_t n1, std::int64_t n2, double delta) {
        const auto& lin = instance().arms[arm];
        const double truth = cumulative_mean(lin, n1, n2);
        const double width = big_gamma(n1, n2, ConfidenceParams{est.half_window, delta});
        if (std::abs(estimated_total - truth) > width) trace_.good_event_flag = false;
    }

    const BanditInstance& instance() const { return env_.instance(); }
    EnvState& env() { return env_; }
    const ArmHistory& history(std::size_t arm) const { return histories_[arm]; }
    PolicyTrace& trace() { return trace_; }
    PolicyTrace finish() { return std::move(trace_); }

private:
    EnvState env_;
    std::vector<ArmHistory> histories_;
    PolicyTrace trace_;
};

std::int64_t nearest_even_at_least_two(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("window formula is not finite");
    const double even = 2.0 * std::round(value / 2.0);
    if (even < 2.0) return 2;
    if (even > 9.0e15) throw std::invalid_argument("window formula overflows");
    return static_cast<std::int64_t>(even);
}

void check_formula_args(std::int64_t horizon, std::int64_t num_arms, double phi) {
    if (horizon < 1 || num_arms < 1) throw std::invalid_argument("T and K must be >= 1");
    if (!(phi > 0.0)) throw std::invalid_argument("phi must be > 0");
}

double window_formula(std::int64_t horizon, std::int64_t num_arms, double phi, double log_arg) {
    if (!(log_arg > 1.0)) throw std::invalid_argument("window formula needs a log argument > 1");
    const double t = static_cast<double>(horizon);
    const double pk = phi * static_cast<double>(num_arms);
    return std::pow(t, 0.8) * std::pow(std::log(log_arg), 0.2) / std::pow(pk, 0.4);
}

// Elimination rounds on an existing session with `budget` pulls.
void run_elimination(Session& s, std::int64_t budget, double delta) {
    const auto& inst = s.instance();
    const std::int64_t horizon = inst.horizon;
    const std::size_t k = inst.arms.size();
    std::vector<std::size_t> alive(k);
    for (std::size_t i = 0; i < k; ++i) alive[i] = i;
    std::vector<double> totals(k, -std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> pulls(k, 0);
    std::int64_t used = 0;

    while (used < budget) {
        const auto round_cost = static_cast<std::int64_t>(4 * alive.size());
        if (budget - used < round_cost) {
            // partial round: the rest goes to the current leader
            std::size_t leader = alive.front();
            for (std::size_t a : alive) {
                if (totals[a] > totals[leader]) leader = a;
            }
            while (used < budget) {
                s.play(leader);
                ++used;
            }
            break;
        }
        for (std::size_t a : alive) {
            for (int rep = 0; rep < 4; ++rep) s.play(a);
            pulls[a] += 4;
            const LineEstimate est = line_fit(s.history(a), pulls[a]);
            totals[a] = cum_forecast(est, 1, horizon);
            s.check_estimate(a, est, totals[a], 1, horizon, delta);
        }
        used += round_cost;

        // survivors are in lockstep, so one width serves the whole round
        const std::int64_t n = pulls[alive.front()];
        const double width = 2.0 * big_gamma(1, horizon, ConfidenceParams{n / 2, delta});
        double best_total = -std::numeric_limits<double>::infinity();
        for (std::size_t a : alive) best_total = std::max(best_total, totals[a]);
        std::vector<std::size_t> kept;
        kept.reserve(alive.size());
        for (std::size_t a : alive) {
            if (best_total - totals[a] > width) {
                s.trace().eliminated_at[a] = pulls[a];
            } else {
                kept.push_back(a);
            }
        }
        alive = std::move(kept);
    }
    s.trace().survivors = alive;
}

}  // namespace

std::string to_string(Algorithm algo) {
    switch (algo) {
        case Algorithm::red_ee: return "red-ee";
        case Algorithm::red_ae: return "red-ae";
        case Algorithm::hr_ed_ae: return "hr-ed-ae";
        case Algorithm::oracle: return "oracle";
        case Algorithm::round_robin: return "round-robin";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
    for (auto a : {Algorithm::red_ee, Algorithm::red_ae, Algorithm::hr_ed_ae, Algorithm::oracle,
                   Algorithm::round_robin}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::vector<std::int64_t> PolicyTrace::pull_counts(std::size_t num_arms) const {
    std::vector<std::int64_t> counts(num_arms, 0);
    for (const auto& step : choices) ++counts.at(step.arm);
    return counts;
}

std::int64_t theorem5_window(std::int64_t horizon, std::int64_t num_arms, double phi) {
    check_formula_args(horizon, num_arms, phi);
    const double arg = 4.0 * phi * static_cast<double>(num_arms) * static_cast<double>(horizon);
    return nearest_even_at_least_two(window_formula(horizon, num_arms, phi, arg));
}

std::int64_t theorem12_window(std::int64_t horizon, std::int64_t num_arms, double phi) {
    check_formula_args(horizon, num_arms, phi);
    const double t = static_cast<double>(horizon);
    const double arg = phi * static_cast<double>(num_arms) * t * t;
    return nearest_even_at_least_two(window_formula(horizon, num_arms, phi, arg));
}

double theorem5_delta(std::int64_t horizon, std::int64_t num_arms, double phi) {
    check_formula_args(horizon, num_arms, phi);
    return 1.0 / (2.0 * phi * static_cast<double>(num_arms) * static_cast<double>(horizon));
}

double theorem11_delta(std::int64_t horizon, std::int64_t num_arms, double phi) {
    check_formula_args(horizon, num_arms, phi);
    const double t = static_cast<double>(horizon);
    return 1.0 / (2.0 * phi * static_cast<double>(num_arms) * t * t);
}

BestArm oracle_single_best(const BanditInstance& instance) {
    BestArm best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < instance.arms.size(); ++i) {
        const double v = prefix_total(instance.arms[i], instance.horizon);
        if (v > best.value) best = BestArm{i, v};
    }
    return best;
}

PolicyTrace round_robin(const BanditInstance& instance, std::uint64_t seed) {
    Session s(instance, seed);
    const std::size_t k = instance.arms.size();
    for (std::size_t i = 0; s.env().remaining() > 0; i = (i + 1) % k) s.play(i);
    return s.finish();
}

PolicyTrace play_single_arm(const BanditInstance& instance, std::size_t arm, std::uint64_t seed) {
    if (arm >= instance.arms.size()) throw std::out_of_range("arm index out of range");
    Session s(instance, seed);
    s.play_until_end(arm);
    s.trace().committed_arm = arm;
    return s.finish();
}

PolicyTrace red_ee(const BanditInstance& instance, std::int64_t half_window, std::uint64_t seed) {
    if (half_window < 1) throw std::invalid_argument("red_ee needs M >= 1");
    const std::int64_t k = instance.num_arms;
    const std::int64_t horizon = instance.horizon;
    const std::int64_t per_arm = 2 * half_window;
    if (per_arm * k >= horizon) return round_robin(instance, seed);

    Session s(instance, seed);
    for (std::size_t a = 0; a < instance.arms.size(); ++a) {
        for (std::int64_t n = 0; n < per_arm; ++n) s.play(a);
    }
    // The committed arm is pulled at indices 2M+1 .. T - 2(K-1)M; rank the
    // arms by their forecast totals over exactly that range.
    const std::int64_t first = per_arm + 1;
    const std::int64_t last = horizon - per_arm * (k - 1);
    std::size_t best = 0;
    double best_total = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < instance.arms.size(); ++a) {
        const LineEstimate est = line_fit(s.history(a), per_arm);
        const double total = cum_forecast(est, first, last);
        s.check_estimate(a, est, total, first, last, std::min(2.0, theorem5_delta(horizon, k, instance.phi)));
        if (total > best_total) {
            best_total = total;
            best = a;
        }
    }
    s.trace().committed_arm = best;
    s.play_until_end(best);
    return s.finish();
}

PolicyTrace red_ae(const BanditInstance& instance, std::int64_t horizon, double delta,
                   std::uint64_t seed) {
    if (horizon < 0 || horizon > instance.horizon) {
        throw std::invalid_argument("red_ae budget must lie in [0, T]");
    }
    check_params(ConfidenceParams{1, delta});
    Session s(instance, seed);
    run_elimination(s, horizon, delta);
    return s.finish();
}

PolicyTrace hr_ed_ae(const BanditInstance& instance, std::int64_t half_window, double delta,
                     std::uint64_t seed) {
    if (half_window < 1) throw std::invalid_argument("hr_ed_ae needs M >= 1");
    if (instance.num_arms * half_window > instance.horizon) {
        throw std::invalid_argument("hr_ed_ae needs K*M <= T");
    }
    check_params(ConfidenceParams{1, delta});
    Session s(instance, seed);
    run_elimination(s, instance.num_arms * half_window, delta);
    const std::size_t chosen = s.trace().survivors.front();
    s.trace().committed_arm = chosen;
    s.play_until_end(chosen);
    return s.finish();
}

PolicyTrace run_policy(Algorithm algo, const BanditInstance& instance, const AlgoParams& params,
                       std::uint64_t seed) {
    switch (algo) {
        case Algorithm::red_ee: return red_ee(instance, params.half_window, seed);
        case Algorithm::red_ae: return red_ae(instance, instance.horizon, params.delta, seed);
        case Algorithm::hr_ed_ae: return hr_ed_ae(instance, params.half_window, params.delta, seed);
        case Algorithm::oracle:
            return play_single_arm(instance, oracle_single_best(instance).arm, seed);
        case Algorithm::round_robin: return round_robin(instance, seed);
    }
    throw std::invalid_argument("unknown algorithm");
}

}  // namespace rrmab
