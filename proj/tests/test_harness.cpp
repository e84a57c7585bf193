#include <doctest.h>

#include <cmath>
#include <sstream>
#include <set>
#include <stdexcept>

#include "rrmab/harness.hpp"

using namespace rrmab;

namespace {

ExperimentConfig explicit_config(BanditInstance inst, Algorithm algo, std::vector<std::int64_t> grid,
                                 std::int64_t reps) {
    ExperimentConfig c;
    c.algorithm = algo;
    c.source = InstanceSource::explicit_instance;
    c.num_arms = inst.num_arms;
    c.instance = std::move(inst);
    c.horizons = std::move(grid);
    c.replications = reps;
    c.base_seed = 12;
    return c;
}

std::string csv_of(const SweepResult& s) {
    std::ostringstream out;
    write_replications_csv(out, s.replications);
    write_aggregate_csv(out, s.rows);
    return out.str();
}

}  // namespace

TEST_CASE("config validation") {
    ExperimentConfig c = explicit_config(BanditInstance::make(10, {{0.1, 0.0}}), Algorithm::oracle, {10}, 1);
    CHECK_NOTHROW(validate_config(c));
    c.replications = 0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c.replications = 1;
    c.horizons = {};
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c.horizons = {10, 10};
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c.horizons = {20, 10};
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c.horizons = {10};
    c.delta = 3.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}

TEST_CASE("oracle replications have zero regret everywhere") {
    const auto c = explicit_config(BanditInstance::make(100, {{0.001, 0.0}, {0.0, 0.3}}), Algorithm::oracle,
                                   {100, 200, 400}, 5);
    const auto res = run_replications(c);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.replications.size() == 15);
    for (const auto& row : res.rows) {
        CHECK(row.mean_pseudo_regret == 0.0);
        CHECK(row.stderr_pseudo_regret == 0.0);
        CHECK(row.replications == 5);
    }
}

TEST_CASE("round robin on identical rising arms") {
    const auto inst = BanditInstance::make(4, {{1.0, 0.0}, {1.0, 0.0}}, NoiseSpec{NoiseKind::none});
    const auto res = run_replications(explicit_config(inst, Algorithm::round_robin, {4}, 1));
    CHECK(res.rows.front().mean_pseudo_regret == 4.0);
}

TEST_CASE("replications are reproducible and thread-count independent") {
    auto c = explicit_config(BanditInstance::make(3000, {{0.0002, 0.2}, {0.0, 0.5}, {0.0001, 0.1}}),
                             Algorithm::red_ae, {1000, 3000}, 12);
    const std::string serial = csv_of(run_replications(c));
    CHECK(serial == csv_of(run_replications(c)));
    for (unsigned threads : {2u, 3u, 8u}) {
        c.threads = threads;
        CHECK(serial == csv_of(run_replications(c)));
    }
    c.base_seed = 13;
    CHECK(serial != csv_of(run_replications(c)));
}

TEST_CASE("standard error is the sample sd over sqrt(reps)") {
    const auto c = explicit_config(BanditInstance::make(500, {{0.0, 0.5}, {0.001, 0.0}}), Algorithm::red_ee,
                                   {500}, 9);
    auto c2 = c;
    c2.half_window = 20;
    const auto res = run_replications(c2);
    double mean = 0.0;
    for (const auto& r : res.replications) mean += r.pseudo_regret;
    mean /= 9.0;
    double ss = 0.0;
    for (const auto& r : res.replications) ss += (r.pseudo_regret - mean) * (r.pseudo_regret - mean);
    CHECK(res.rows.front().mean_pseudo_regret == doctest::Approx(mean));
    CHECK(res.rows.front().stderr_pseudo_regret == doctest::Approx(std::sqrt(ss / 8.0) / 3.0));
    CHECK(res.rows.front().half_window == 20);
}

TEST_CASE("parameter defaults") {
    const auto inst = BanditInstance::make(100000, std::vector<LinearArm>(36, LinearArm{0.0, 0.5}));
    const auto hr = resolve_params(Algorithm::hr_ed_ae, inst, std::nullopt, std::nullopt);
    CHECK(hr.half_window == 2776);  // theorem12_window gives 4598 > T/K
    CHECK(hr.delta == 1.0 / (2.0 * 0.5 * 36.0 * 1e10));
    const auto small = BanditInstance::make(100000, std::vector<LinearArm>(10, LinearArm{0.0, 1.0}));
    CHECK(resolve_params(Algorithm::red_ee, small, std::nullopt, std::nullopt).half_window == 6860);
    CHECK(resolve_params(Algorithm::hr_ed_ae, small, std::nullopt, std::nullopt).half_window ==
          theorem12_window(100000, 10, 1.0));
    CHECK(resolve_params(Algorithm::red_ee, small, 64, 0.2).half_window == 64);
    CHECK(resolve_params(Algorithm::red_ae, small, std::nullopt, 0.2).delta == 0.2);
}

TEST_CASE("red-ee regret does not shrink with T") {
    ExperimentConfig c;
    c.algorithm = Algorithm::red_ee;
    c.source = InstanceSource::explicit_instance;
    c.instance = BanditInstance::make(4096, {{0.0, 1.0}, {0.0, 0.75}, {0.0, 0.5}, {0.0, 0.25}});
    c.num_arms = 4;
    c.horizons = {4096, 16384, 65536};
    c.replications = 10;
    const auto res = run_replications(c);
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& a = res.rows[i - 1];
        const auto& b = res.rows[i];
        CHECK(b.mean_pseudo_regret >= a.mean_pseudo_regret - 2.0 * (a.stderr_pseudo_regret + b.stderr_pseudo_regret));
    }
}

TEST_CASE("power-law fit") {
    std::vector<double> xs{1000, 2000, 4000, 8000}, exact, flat, linear;
    for (double x : xs) {
        exact.push_back(7.0 * std::pow(x, 0.8));
        flat.push_back(3.0);
        linear.push_back(x);
    }
    auto f = fit_power_law(xs, exact);
    CHECK(f.slope == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(fit_power_law(xs, flat).slope) < 1e-12);
    CHECK(fit_power_law(xs, linear).slope == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_power_law({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1, 2, 3}, {1, 0, 2}), std::invalid_argument);

    SweepResult sweep;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        SweepRow row;
        row.horizon = static_cast<std::int64_t>(xs[i]);
        row.mean_pseudo_regret = exact[i];
        sweep.rows.push_back(row);
    }
    CHECK(scaling_exponent(sweep).slope == doctest::Approx(0.8).epsilon(1e-12));
    sweep.rows[1].mean_pseudo_regret = 0.0;
    CHECK_THROWS_AS(scaling_exponent(sweep), std::invalid_argument);
}

TEST_CASE("adversarial family") {
    // 40-digit evaluations of T^(4/5)/(12 K^(2/5)) and K^(3/5) T^(4/5)/64 at K=36, T=1e5
    CHECK(adversarial_tau(36, 100000) == doctest::Approx(198.7457057090633).epsilon(1e-13));
    CHECK(adversarial_lower_reference(36, 100000) == doctest::Approx(1341.533513536177).epsilon(1e-13));

    const auto control = adversarial_eval(4, 1000, Algorithm::oracle, 20, 5);
    CHECK(control.mean_regret == 0.0);
    std::set<std::int64_t> profiles;
    for (const auto& r : control.sweep.replications) profiles.insert(r.profile);
    CHECK(profiles == std::set<std::int64_t>{1, 2, 3, 4});

    for (auto algo : {Algorithm::red_ee, Algorithm::hr_ed_ae, Algorithm::round_robin}) {
        CHECK(adversarial_eval(3, 1000, algo, 10, 5).mean_regret >= 0.0);
    }
    CHECK_THROWS_AS(adversarial_eval(1, 1000, Algorithm::oracle, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(adversarial_eval(10, 1000, Algorithm::oracle, 1, 0), std::invalid_argument);
}

TEST_CASE("coverage without noise is exactly zero") {
    const auto inst = BanditInstance::make(5000, {{0.001, 0.0}, {0.0003, 0.7}, {0.0, 0.2}},
                                           NoiseSpec{NoiseKind::none});
    const auto rep = good_event_coverage(inst, 64, 0.05, 50, 1, 256);
    CHECK(rep.rates.size() == 9);
    for (const auto& r : rep.rates) CHECK(r.violations == 0);
    CHECK_THROWS_AS(good_event_coverage(inst, 64, 0.05, 0, 1), std::invalid_argument);
}

TEST_CASE("coverage bookkeeping") {
    const auto inst = BanditInstance::make(5000, {{0.001, 0.0}, {0.0, 0.5}});
    const auto rep = good_event_coverage(inst, 16, 0.05, 200, 3, 64);
    CHECK(rep.at("first_window").trials == 400);
    CHECK(rep.at("union").trials == 200);
    CHECK(rep.at("union").ceiling == doctest::Approx(0.2));
    CHECK(rep.at("elim_window").trials == 400 * 16);
    CHECK(rep.at("elim_union").ceiling == 1.0);
    CHECK(rep.at("slope").slack() == doctest::Approx(3.0 * std::sqrt(0.1 * 0.9 / 400.0)));
    // 3 * sqrt(0.05 * 0.95 / 20000)
    CoverageRate r{"x", 0.05, 0, 20000};
    CHECK(r.slack() == doctest::Approx(0.004623310502226732).epsilon(1e-12));
    CHECK_THROWS_AS(rep.at("missing"), std::out_of_range);
    CHECK(rep.at("slope").within_ceiling());
    CHECK(rep.at("forecast").within_ceiling());
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("csv and json outputs") {
    const auto c = explicit_config(BanditInstance::make(50, {{0.01, 0.0}, {0.0, 0.2}}), Algorithm::red_ee,
                                   {50, 100, 200}, 2);
    auto c2 = c;
    c2.half_window = 4;
    const auto res = run_replications(c2);
    std::ostringstream reps, agg, plot;
    write_replications_csv(reps, res.replications);
    write_aggregate_csv(agg, res.rows);
    write_plot_data_csv(plot, res);
    CHECK(reps.str().rfind("algo,K,T,M,delta,seed,rep,pseudo_regret,realized_regret,pulls_best,"
                           "best_eliminated,wallclock_ms\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : reps.str()) lines += ch == '\n';
    CHECK(lines == 7);
    CHECK(plot.str().find("fit,") != std::string::npos);
    const auto j = sweep_to_json(res);
    CHECK(j.at("aggregate").size() == 3);
    CHECK(j.at("replications").size() == 6);
    CHECK(j.contains("scaling"));
}

TEST_CASE("random dyadic instances are valid and rising") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto inst = random_dyadic_instance(3, 10, s);
        CHECK(validate_instance(inst).empty());
        for (const auto& a : inst.arms) {
            CHECK(a.slope >= 0.0);
            CHECK(a.slope * 8.0 == std::floor(a.slope * 8.0));
            CHECK(a.intercept * 4.0 == std::floor(a.intercept * 4.0));
        }
    }
}
