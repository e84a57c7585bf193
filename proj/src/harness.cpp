#include "rrmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "rrmab/estimate.hpp"
#include "rrmab/regret.hpp"
#include "rrmab/rng.hpp"

namespace rrmab {

namespace {

constexpr std::uint64_t kProfileStream = 0x70726f66696c6531ULL;

struct Moments {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

// Sums in the given order so the result does not depend on scheduling.
Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    // shifted by the first value so identical samples give an exact mean
    const double shift = xs.front();
    double sum = 0.0;
    for (double x : xs) sum += x - shift;
    const auto n = static_cast<double>(xs.size());
    m.mean = shift + sum / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stderr_of_mean = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return m;
}

std::int64_t largest_even_at_most(std::int64_t value) { return value - (value % 2); }

// Runs job(i) for i in [0, count) on up to `threads` workers; rethrows the
// first failure after all workers have stopped.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double binomial_radius(double p, std::int64_t trials) {
    if (trials <= 0) return 0.0;
    const double q = std::clamp(p, 0.0, 1.0);
    return 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    if (config.replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (config.horizons.empty()) throw std::invalid_argument("T grid must not be empty");
    for (std::size_t i = 0; i < config.horizons.size(); ++i) {
        if (config.horizons[i] < 1) throw std::invalid_argument("horizons must be >= 1");
        if (i > 0 && config.horizons[i] <= config.horizons[i - 1]) {
            throw std::invalid_argument("T grid must be strictly increasing");
        }
    }
    switch (config.source) {
        case InstanceSource::explicit_instance:
            if (!config.instance) throw std::invalid_argument("explicit source needs an instance");
            break;
        case InstanceSource::profile:
            if (config.profile_index < 0 || config.profile_index > config.num_arms) {
                throw std::invalid_argument("profile index must be in [0, K]");
            }
            [[fallthrough]];
        case InstanceSource::uniform_profile:
            if (config.num_arms < 1) throw std::invalid_argument("K must be >= 1");
            break;
    }
    if (config.half_window && *config.half_window < 1) throw std::invalid_argument("M must be >= 1");
    if (config.delta && !(*config.delta > 0.0 && *config.delta <= 2.0)) {
        throw std::invalid_argument("delta must lie in (0, 2]");
    }
}

AlgoParams resolve_params(Algorithm algo, const BanditInstance& instance,
                          std::optional<std::int64_t> half_window, std::optional<double> delta) {
    AlgoParams p;
    p.phi = instance.phi;
    const std::int64_t t = instance.horizon;
    const std::int64_t k = instance.num_arms;
    switch (algo) {
        case Algorithm::red_ee:
            p.half_window = half_window ? *half_window : theorem5_window(t, k, p.phi);
            p.delta = delta ? *delta : theorem5_delta(t, k, p.phi);
            break;
        case Algorithm::hr_ed_ae:
            if (half_window) {
                p.half_window = *half_window;
            } else {
                const std::int64_t cap = std::max<std::int64_t>(largest_even_at_most(t / k), 1);
                p.half_window = std::min(theorem12_window(t, k, p.phi), cap);
            }
            p.delta = delta ? *delta : theorem11_delta(t, k, p.phi);
            break;
        case Algorithm::red_ae:
            p.half_window = half_window.value_or(0);
            p.delta = delta ? *delta : theorem11_delta(t, k, p.phi);
            break;
        case Algorithm::oracle:
        case Algorithm::round_robin:
            p.half_window = half_window.value_or(0);
            p.delta = delta.value_or(0.0);
            break;
    }
    return p;
}

BanditInstance replication_instance(const ExperimentConfig& config, std::int64_t horizon,
                                    std::uint64_t rep_seed, std::int64_t* profile_out) {
    BanditInstance inst;
    std::int64_t profile = 0;
    switch (config.source) {
        case InstanceSource::explicit_instance:
            inst = config.instance.value().with_horizon(horizon);
            break;
        case InstanceSource::profile:
            profile = config.profile_index;
            inst = make_profile_instance(ProfileFamily{config.num_arms, horizon, profile});
            break;
        case InstanceSource::uniform_profile: {
            SplitMix rng(hash_combine(rep_seed, kProfileStream));
            profile = rng.uniform_int(1, config.num_arms);
            inst = make_profile_instance(ProfileFamily{config.num_arms, horizon, profile});
            break;
        }
    }
    if (config.noise) inst.noise.kind = *config.noise;
    if (profile_out) *profile_out = profile;
    return inst;
}

SweepResult run_replications(const ExperimentConfig& config) {
    validate_config(config);
    const auto reps = static_cast<std::size_t>(config.replications);
    const std::size_t points = config.horizons.size();
    std::vector<ReplicationRow> rows(points * reps);

    parallel_for(rows.size(), config.threads, [&](std::size_t job) {
        const std::size_t point = job / reps;
        const std::size_t rep = job % reps;
        const std::int64_t horizon = config.horizons[point];
        const std::uint64_t seed = replication_seed(config.base_seed, rep);

        ReplicationRow row;
        const BanditInstance inst = replication_instance(config, horizon, seed, &row.profile);
        const AlgoParams params =
            resolve_params(config.algorithm, inst, config.half_window, config.delta);

        const auto start = std::chrono::steady_clock::now();
        const PolicyTrace trace = run_policy(config.algorithm, inst, params, seed);
        const auto stop = std::chrono::steady_clock::now();
        const RegretReport report = static_regret(trace, inst);
        const std::size_t best = oracle_single_best(inst).arm;

        row.algo = to_string(config.algorithm);
        row.num_arms = inst.num_arms;
        row.horizon = horizon;
        row.half_window = params.half_window;
        row.delta = params.delta;
        row.seed = seed;
        row.rep = static_cast<std::int64_t>(rep);
        row.pseudo_regret = report.pseudo_regret;
        row.realized_regret = report.realized_regret;
        row.pulls_best = report.pulls[best];
        row.best_eliminated = trace.eliminated(best);
        row.good_event = trace.good_event_flag;
        if (config.record_wallclock) {
            row.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        }
        rows[job] = std::move(row);
    });

    SweepResult result;
    for (std::size_t point = 0; point < points; ++point) {
        std::vector<double> pseudo, realized, wall;
        std::int64_t eliminated = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto& r = rows[point * reps + rep];
            pseudo.push_back(r.pseudo_regret);
            realized.push_back(r.realized_regret);
            wall.push_back(r.wallclock_ms);
            eliminated += r.best_eliminated ? 1 : 0;
        }
        const auto& first = rows[point * reps];
        SweepRow agg;
        agg.algo = first.algo;
        agg.num_arms = first.num_arms;
        agg.horizon = first.horizon;
        agg.half_window = first.half_window;
        agg.delta = first.delta;
        agg.replications = config.replications;
        const Moments mp = moments(pseudo);
        agg.mean_pseudo_regret = mp.mean;
        agg.stderr_pseudo_regret = mp.stderr_of_mean;
        agg.mean_realized_regret = moments(realized).mean;
        agg.best_eliminated_freq = static_cast<double>(eliminated) / static_cast<double>(reps);
        agg.mean_wallclock_ms = moments(wall).mean;
        result.rows.push_back(std::move(agg));
    }
    result.replications = std::move(rows);
    return result;
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("x and y lengths differ");
    if (xs.size() < 3) throw std::invalid_argument("power-law fit needs at least 3 points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw std::invalid_argument("power-law fit needs positive values");
        }
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("power-law fit needs distinct x values");
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

PowerLawFit scaling_exponent(const SweepResult& sweep) {
    std::vector<double> xs, ys;
    for (const auto& row : sweep.rows) {
        if (!(row.mean_pseudo_regret > 0.0)) {
            throw std::invalid_argument("scaling exponent needs positive mean regret at T=" +
                                        std::to_string(row.horizon));
        }
        xs.push_back(static_cast<double>(row.horizon));
        ys.push_back(row.mean_pseudo_regret);
    }
    return fit_power_law(xs, ys);
}

double adversarial_lower_reference(std::int64_t num_arms, std::int64_t horizon) {
    return std::pow(static_cast<double>(num_arms), 0.6) * std::pow(static_cast<double>(horizon), 0.8) /
           64.0;
}

double adversarial_tau(std::int64_t num_arms, std::int64_t horizon) {
    return std::pow(static_cast<double>(horizon), 0.8) /
           (12.0 * std::pow(static_cast<double>(num_arms), 0.4));
}

AdversarialResult adversarial_eval(std::int64_t num_arms, std::int64_t horizon, Algorithm algo,
                                   std::int64_t replications, std::uint64_t base_seed,
                                   std::optional<std::int64_t> half_window,
                                   std::optional<double> delta, unsigned threads) {
    if (num_arms < 2) throw std::invalid_argument("adversarial family needs K >= 2");
    const auto k = static_cast<long double>(num_arms);
    if (k * k * k >= static_cast<long double>(horizon)) {
        throw std::invalid_argument("adversarial family needs K^3 < T");
    }
    ExperimentConfig config;
    config.algorithm = algo;
    config.source = InstanceSource::uniform_profile;
    config.num_arms = num_arms;
    config.horizons = {horizon};
    config.replications = replications;
    config.base_seed = base_seed;
    config.half_window = half_window;
    config.delta = delta;
    config.threads = threads;

    AdversarialResult out;
    out.sweep = run_replications(config);
    const SweepRow& row = out.sweep.rows.front();
    out.mean_regret = row.mean_pseudo_regret;
    out.stderr_regret = row.stderr_pseudo_regret;
    out.half_window = row.half_window;
    out.delta = row.delta;
    out.lower_reference = adversarial_lower_reference(num_arms, horizon);
    out.tau = adversarial_tau(num_arms, horizon);
    return out;
}

double CoverageRate::slack() const { return binomial_radius(ceiling, trials); }

const CoverageRate& CoverageReport::at(const std::string& name) const {
    for (const auto& r : rates) {
        if (r.name == name) return r;
    }
    throw std::out_of_range("no coverage rate named " + name);
}

CoverageReport good_event_coverage(const BanditInstance& instance, std::int64_t half_window,
                                   double delta, std::int64_t trials, std::uint64_t seed,
                                   std::int64_t m_cap) {
    check_params(ConfidenceParams{half_window, delta});
    if (trials < 1) throw std::invalid_argument("coverage needs trials >= 1");
    if (m_cap < 0) throw std::invalid_argument("m cap must be >= 0");
    const std::int64_t m = half_window;
    const std::size_t k = instance.arms.size();
    const double kd = static_cast<double>(k);
    const ConfidenceParams params{m, delta};
    const double w = window_width(m, delta);
    const double sw = slope_width(m, delta);
    const std::int64_t forecast_span = 4 * m;
    const std::int64_t samples = std::max<std::int64_t>(2 * m, m_cap);
    const std::int64_t m_steps = m_cap / 4;

    std::vector<double> gammas(static_cast<std::size_t>(forecast_span));
    for (std::int64_t n = 1; n <= forecast_span; ++n) gammas[static_cast<std::size_t>(n - 1)] = gamma(n, params);

    std::int64_t first_bad = 0, second_bad = 0, slope_bad = 0, joint_bad = 0, forecast_bad = 0;
    std::int64_t union_bad = 0, elim_window_bad = 0, elim_slope_bad = 0, elim_union_bad = 0;

    for (std::int64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t stream = replication_seed(seed, static_cast<std::uint64_t>(trial));
        bool any_arm = false;
        bool any_elim = false;
        for (std::size_t a = 0; a < k; ++a) {
            const LinearArm& arm = instance.arms[a];
            ArmHistory h;
            for (std::int64_t n = 1; n <= samples; ++n) h.push(sample_reward(instance, stream, a, n));

            const LineEstimate est = line_fit(h, 2 * m);
            const double true_first = cumulative_mean(arm, 1, m) / static_cast<double>(m);
            const double true_second = cumulative_mean(arm, m + 1, 2 * m) / static_cast<double>(m);
            const bool f = std::abs(est.first_half_mean - true_first) > w;
            const bool s = std::abs(est.second_half_mean - true_second) > w;
            const bool sl = std::abs(est.slope_hat - arm.slope) > sw;
            first_bad += f;
            second_bad += s;
            slope_bad += sl;
            joint_bad += (f || s || sl);
            any_arm = any_arm || f || s;

            bool fc = false;
            for (std::int64_t n = 1; n <= forecast_span && !fc; ++n) {
                fc = std::abs(forecast(est, n) - mean(arm, n)) > gammas[static_cast<std::size_t>(n - 1)];
            }
            forecast_bad += fc;

            for (std::int64_t step = 1; step <= m_steps; ++step) {
                const std::int64_t half = 2 * step;  // m = 4 * step pulls, halves of m/2
                const LineEstimate e = line_fit(h, 2 * half);
                const double ww = window_width(half, delta);
                const double t1 = cumulative_mean(arm, 1, half) / static_cast<double>(half);
                const double t2 = cumulative_mean(arm, half + 1, 2 * half) / static_cast<double>(half);
                const bool wb = std::abs(e.first_half_mean - t1) > ww || std::abs(e.second_half_mean - t2) > ww;
                const bool sb = std::abs(e.slope_hat - arm.slope) > slope_width(half, delta);
                elim_window_bad += wb;
                elim_slope_bad += sb;
                any_elim = any_elim || wb || sb;
            }
        }
        union_bad += any_arm;
        elim_union_bad += any_elim;
    }

    const std::int64_t arm_trials = trials * static_cast<std::int64_t>(k);
    CoverageReport report;
    report.rates.push_back({"first_window", delta, first_bad, arm_trials});
    report.rates.push_back({"second_window", delta, second_bad, arm_trials});
    report.rates.push_back({"slope", 2.0 * delta, slope_bad, arm_trials});
    report.rates.push_back({"arm_joint", 2.0 * delta, joint_bad, arm_trials});
    report.rates.push_back({"forecast", 2.0 * delta, forecast_bad, arm_trials});
    report.rates.push_back({"union", std::min(1.0, 2.0 * delta * kd), union_bad, trials});
    if (m_steps > 0) {
        const std::int64_t checks = arm_trials * m_steps;
        report.rates.push_back({"elim_window", 2.0 * delta, elim_window_bad, checks});
        report.rates.push_back({"elim_slope", 2.0 * delta, elim_slope_bad, checks});
        report.rates.push_back({"elim_union",
                                std::min(1.0, 2.0 * delta * kd * static_cast<double>(m_steps)),
                                elim_union_bad, trials});
    }
    return report;
}

BanditInstance random_dyadic_instance(std::int64_t num_arms, std::int64_t horizon,
                                      std::uint64_t seed, NoiseKind noise) {
    if (num_arms < 1) throw std::invalid_argument("K must be >= 1");
    SplitMix rng(seed);
    std::vector<LinearArm> arms;
    for (std::int64_t i = 0; i < num_arms; ++i) {
        const double slope = static_cast<double>(rng.uniform_int(0, 8)) / 8.0;
        const double intercept = static_cast<double>(rng.uniform_int(-8, 8)) / 4.0;
        arms.push_back(LinearArm{slope, intercept});
    }
    return BanditInstance::make(horizon, std::move(arms), NoiseSpec{noise});
}

BruteCheckResult brute_check(std::int64_t num_arms, std::int64_t horizon, std::int64_t count,
                             std::uint64_t seed, NoiseKind noise) {
    if (count < 0) throw std::invalid_argument("instance count must be >= 0");
    BruteCheckResult out;
    for (std::int64_t i = 0; i < count; ++i) {
        const BanditInstance inst = random_dyadic_instance(
            num_arms, horizon, replication_seed(seed, static_cast<std::uint64_t>(i)), noise);
        const BruteForceResult bf = brute_force_optimal(inst);
        const BestArm best = oracle_single_best(inst);
        ++out.instances;
        out.single_arm_optimal += bf.single_arm_attains;
        out.value_matches += (bf.value == best.value);
    }
    return out;
}

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_replications_csv(std::ostream& out, const std::vector<ReplicationRow>& rows) {
    out << "algo,K,T,M,delta,seed,rep,pseudo_regret,realized_regret,pulls_best,best_eliminated,"
           "wallclock_ms\n";
    for (const auto& r : rows) {
        out << r.algo << ',' << r.num_arms << ',' << r.horizon << ',' << r.half_window << ','
            << format_number(r.delta) << ',' << r.seed << ',' << r.rep << ','
            << format_number(r.pseudo_regret) << ',' << format_number(r.realized_regret) << ','
            << r.pulls_best << ',' << (r.best_eliminated ? 1 : 0) << ','
            << format_number(r.wallclock_ms) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "algo,K,T,M,delta,reps,mean_pseudo_regret,stderr_pseudo_regret,mean_realized_regret,"
           "best_eliminated_freq,mean_wallclock_ms\n";
    for (const auto& r : rows) {
        out << r.algo << ',' << r.num_arms << ',' << r.horizon << ',' << r.half_window << ','
            << format_number(r.delta) << ',' << r.replications << ','
            << format_number(r.mean_pseudo_regret) << ',' << format_number(r.stderr_pseudo_regret)
            << ',' << format_number(r.mean_realized_regret) << ','
            << format_number(r.best_eliminated_freq) << ',' << format_number(r.mean_wallclock_ms)
            << '\n';
    }
}

void write_plot_data_csv(std::ostream& out, const SweepResult& sweep) {
    out << "kind,ln_T,ln_mean_regret\n";
    std::vector<double> xs, ys;
    for (const auto& r : sweep.rows) {
        if (!(r.mean_pseudo_regret > 0.0)) continue;
        xs.push_back(static_cast<double>(r.horizon));
        ys.push_back(r.mean_pseudo_regret);
        out << "point," << format_number(std::log(xs.back())) << ','
            << format_number(std::log(ys.back())) << '\n';
    }
    if (xs.size() >= 3) {
        const PowerLawFit fit = fit_power_law(xs, ys);
        for (double x : {xs.front(), xs.back()}) {
            const double lx = std::log(x);
            out << "fit," << format_number(lx) << ',' << format_number(fit.intercept + fit.slope * lx)
                << '\n';
        }
    }
}

nlohmann::json sweep_to_json(const SweepResult& sweep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"algo", r.algo},
                        {"K", r.num_arms},
                        {"T", r.horizon},
                        {"M", r.half_window},
                        {"delta", r.delta},
                        {"reps", r.replications},
                        {"mean_pseudo_regret", r.mean_pseudo_regret},
                        {"stderr_pseudo_regret", r.stderr_pseudo_regret},
                        {"mean_realized_regret", r.mean_realized_regret},
                        {"best_eliminated_freq", r.best_eliminated_freq},
                        {"mean_wallclock_ms", r.mean_wallclock_ms}});
    }
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : sweep.replications) {
        reps.push_back({{"algo", r.algo},
                        {"K", r.num_arms},
                        {"T", r.horizon},
                        {"M", r.half_window},
                        {"delta", r.delta},
                        {"seed", r.seed},
                        {"rep", r.rep},
                        {"profile", r.profile},
                        {"pseudo_regret", r.pseudo_regret},
                        {"realized_regret", r.realized_regret},
                        {"pulls_best", r.pulls_best},
                        {"best_eliminated", r.best_eliminated},
                        {"good_event", r.good_event},
                        {"wallclock_ms", r.wallclock_ms}});
    }
    nlohmann::json out = {{"aggregate", rows}, {"replications", reps}};
    if (sweep.rows.size() >= 3) {
        try {
            const PowerLawFit fit = scaling_exponent(sweep);
            out["scaling"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r_squared}};
        } catch (const std::invalid_argument&) {
            out["scaling"] = nullptr;
        }
    }
    return out;
}

nlohmann::json coverage_to_json(const CoverageReport& report) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : report.rates) {
        out.push_back({{"name", r.name},
                       {"violations", r.violations},
                       {"trials", r.trials},
                       {"rate", r.rate()},
                       {"ceiling", r.ceiling},
                       {"slack", r.slack()},
                       {"within_ceiling", r.within_ceiling()}});
    }
    return out;
}

}  // namespace rrmab
