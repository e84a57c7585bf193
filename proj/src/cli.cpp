#include "rrmab/cli.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrmab/harness.hpp"

#include <unistd.h>

namespace rrmab::cli {

namespace {

// Thrown for problems with the invocation itself (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::string algo;
    std::optional<std::int64_t> num_arms;
    std::optional<std::int64_t> horizon;
    std::string sweep_t;
    std::optional<std::int64_t> reps;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::string profile;
    std::optional<std::int64_t> half_window;
    std::optional<double> delta;
    std::string noise;
    bool emit_plot_data = false;
    std::int64_t random_instances = 100;
    std::int64_t m_cap = 0;
    unsigned threads = 1;
    bool timing = false;
};

// Everything the subcommands need, after merging flags over the config file.
struct Resolved {
    ExperimentConfig experiment;
    std::string format;
    std::string out;
    bool emit_plot_data = false;
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--config", o.config_path, "JSON instance / experiment file");
    app->add_option("--algo", o.algo, "red-ee | red-ae | hr-ed-ae | oracle | round-robin");
    app->add_option("--K", o.num_arms, "number of arms");
    app->add_option("--T", o.horizon, "horizon");
    app->add_option("--reps", o.reps, "replications (trials for coverage)");
    app->add_option("--seed", o.seed, "base seed (default: RRMAB_SEED, then 0)");
    app->add_option("--out", o.out, "output path");
    app->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--profile", o.profile, "profile index 0..K or 'uniform'");
    app->add_option("--M", o.half_window, "half window override");
    app->add_option("--delta", o.delta, "confidence override");
    app->add_option("--noise", o.noise, "none | gaussian")->check(CLI::IsMember({"none", "gaussian"}));
    app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    app->add_flag("--timing", o.timing, "record wall-clock time per replication");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
std::optional<T> json_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

Resolved resolve(const Options& o, bool want_grid) {
    nlohmann::json cfg = nlohmann::json::object();
    if (!o.config_path.empty()) {
        try {
            cfg = nlohmann::json::parse(read_file(o.config_path));
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(std::string("config file is not valid JSON: ") + e.what());
        }
    }
    const nlohmann::json exp = cfg.value("experiment", nlohmann::json::object());

    Resolved r;
    ExperimentConfig& c = r.experiment;
    try {
        const std::string algo = !o.algo.empty() ? o.algo : exp.value("algo", std::string("red-ee"));
        c.algorithm = algorithm_from_string(algo);

        if (cfg.contains("arms")) {
            c.source = InstanceSource::explicit_instance;
            c.instance = instance_from_json(cfg);
        }
        c.num_arms = o.num_arms.value_or(json_opt<std::int64_t>(exp, "K").value_or(
            c.instance ? c.instance->num_arms : 0));
        if (c.instance && c.num_arms != c.instance->num_arms) {
            throw UsageError("--K disagrees with the instance in the config file");
        }

        std::string profile = o.profile;
        if (profile.empty() && exp.contains("profile")) {
            profile = exp.at("profile").is_string() ? exp.at("profile").get<std::string>()
                                                    : std::to_string(exp.at("profile").get<std::int64_t>());
        }
        if (!c.instance) {
            if (profile.empty() || profile == "uniform") {
                c.source = InstanceSource::uniform_profile;
            } else {
                c.source = InstanceSource::profile;
                std::size_t used = 0;
                c.profile_index = std::stoll(profile, &used);
                if (used != profile.size()) throw UsageError("--profile must be an integer or 'uniform'");
            }
            if (c.num_arms < 1) throw UsageError("--K is required without an instance file");
        } else if (!profile.empty()) {
            throw UsageError("--profile cannot be combined with an instance file");
        }

        if (want_grid && !o.sweep_t.empty()) {
            c.horizons = parse_int_list(o.sweep_t);
        } else if (o.horizon) {
            c.horizons = {*o.horizon};
        } else if (want_grid && exp.contains("sweep_T")) {
            c.horizons = exp.at("sweep_T").get<std::vector<std::int64_t>>();
        } else if (auto t = json_opt<std::int64_t>(exp, "T")) {
            c.horizons = {*t};
        } else if (c.instance) {
            c.horizons = {c.instance->horizon};
        } else {
            throw UsageError(want_grid ? "--sweep-T or --T is required" : "--T is required");
        }

        c.replications = o.reps.value_or(json_opt<std::int64_t>(exp, "reps").value_or(1));
        c.base_seed = resolve_seed(o.seed, json_opt<std::uint64_t>(exp, "seed"));
        c.half_window = o.half_window ? o.half_window : json_opt<std::int64_t>(exp, "M");
        c.delta = o.delta ? o.delta : json_opt<double>(exp, "delta");
        const std::string noise = !o.noise.empty() ? o.noise : exp.value("noise", std::string());
        if (!noise.empty()) c.noise = noise_from_string(noise);
        c.threads = o.threads;
        c.record_wallclock = o.timing;
        validate_config(c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("bad config value: ") + e.what());
    }
    r.format = o.format;
    r.out = !o.out.empty() ? o.out : exp.value("out", std::string());
    r.emit_plot_data = o.emit_plot_data;
    return r;
}

std::string to_csv(const std::vector<ReplicationRow>& rows) {
    std::ostringstream ss;
    write_replications_csv(ss, rows);
    return ss.str();
}

std::string to_agg_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream ss;
    write_aggregate_csv(ss, rows);
    return ss.str();
}

void emit_sweep(const Resolved& r, const SweepResult& sweep, std::ostream& out) {
    if (r.format == "json") {
        const std::string text = sweep_to_json(sweep).dump(2) + "\n";
        if (r.out.empty()) {
            out << text;
        } else {
            write_file_atomic(r.out, text);
        }
    } else if (r.out.empty()) {
        out << to_agg_csv(sweep.rows);
    } else {
        write_file_atomic(r.out, to_csv(sweep.replications));
        write_file_atomic(with_suffix(r.out, "_agg"), to_agg_csv(sweep.rows));
    }
    if (r.emit_plot_data) {
        if (r.out.empty()) throw UsageError("--emit-plot-data needs --out");
        std::ostringstream ss;
        write_plot_data_csv(ss, sweep);
        std::filesystem::path plot = with_suffix(r.out, "_plot");
        plot.replace_extension(".csv");
        write_file_atomic(plot, ss.str());
    }
}

int cmd_sweep(const Options& o, bool grid, std::ostream& out) {
    const Resolved r = resolve(o, grid);
    const SweepResult sweep = run_replications(r.experiment);
    emit_sweep(r, sweep, out);
    if (!r.out.empty()) {
        for (const auto& row : sweep.rows) {
            out << row.algo << " K=" << row.num_arms << " T=" << row.horizon << " M=" << row.half_window
                << " mean_regret=" << format_number(row.mean_pseudo_regret)
                << " stderr=" << format_number(row.stderr_pseudo_regret) << "\n";
        }
    }
    return exit_ok;
}

int cmd_adversary(Options o, std::ostream& out) {
    if (o.algo.empty()) o.algo = "hr-ed-ae";
    if (!o.profile.empty() && o.profile != "uniform") {
        throw UsageError("adversary always draws the profile uniformly");
    }
    if (!o.config_path.empty()) throw UsageError("adversary builds its own instances; drop --config");
    const Resolved r = resolve(o, false);
    const ExperimentConfig& c = r.experiment;
    if (c.horizons.size() != 1) throw UsageError("adversary takes a single --T");
    AdversarialResult res;
    try {
        res = adversarial_eval(c.num_arms, c.horizons.front(), c.algorithm, c.replications, c.base_seed,
                               c.half_window, c.delta, c.threads);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    emit_sweep(r, res.sweep, out);
    if (!r.out.empty() || r.format == "csv") {
        out << "mean_regret=" << format_number(res.mean_regret)
            << " stderr=" << format_number(res.stderr_regret)
            << " lower_reference=" << format_number(res.lower_reference)
            << " tau=" << format_number(res.tau) << " M=" << res.half_window
            << " delta=" << format_number(res.delta) << "\n";
    }
    return exit_ok;
}

int cmd_coverage(Options o, std::ostream& out) {
    if (!o.sweep_t.empty()) throw UsageError("coverage takes a single instance");
    if (o.profile == "uniform") throw UsageError("coverage needs a fixed instance or profile index");
    if (o.config_path.empty() && o.profile.empty()) o.profile = "1";
    if (o.config_path.empty() && !o.num_arms) o.num_arms = 2;
    if (o.config_path.empty() && !o.horizon) o.horizon = 10000;
    const Resolved r = resolve(o, false);
    const ExperimentConfig& c = r.experiment;
    const BanditInstance inst = replication_instance(c, c.horizons.front(), c.base_seed);
    const std::int64_t m = c.half_window.value_or(128);
    const double delta = c.delta.value_or(0.05);
    CoverageReport report;
    try {
        report = good_event_coverage(inst, m, delta, c.replications, c.base_seed, o.m_cap);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::string text;
    if (r.format == "json") {
        text = coverage_to_json(report).dump(2) + "\n";
    } else {
        std::ostringstream ss;
        ss << "name,violations,trials,rate,ceiling,slack,within_ceiling\n";
        for (const auto& rate : report.rates) {
            ss << rate.name << ',' << rate.violations << ',' << rate.trials << ','
               << format_number(rate.rate()) << ',' << format_number(rate.ceiling) << ','
               << format_number(rate.slack()) << ',' << (rate.within_ceiling() ? 1 : 0) << '\n';
        }
        text = ss.str();
    }
    if (r.out.empty()) {
        out << text;
    } else {
        write_file_atomic(r.out, text);
    }
    return exit_ok;
}

int cmd_brute_check(const Options& o, std::ostream& out, std::ostream& err) {
    if (!o.num_arms || !o.horizon) throw UsageError("brute-check needs --K and --T");
    if (*o.num_arms < 1 || *o.horizon < 1) throw UsageError("--K and --T must be >= 1");
    if (o.random_instances < 0) throw UsageError("--random-instances must be >= 0");
    std::uint64_t seed = 0;
    try {
        seed = resolve_seed(o.seed, std::nullopt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    BruteCheckResult res;
    try {
        res = brute_check(*o.num_arms, *o.horizon, o.random_instances, seed);
    } catch (const std::length_error& e) {
        throw UsageError(e.what());
    }
    out << res.single_arm_optimal << "/" << res.instances << " single-arm optimal\n";
    if (res.value_matches != res.instances || res.single_arm_optimal != res.instances) {
        err << "brute-check: " << (res.instances - res.value_matches)
            << " instance(s) where the best single arm misses the enumerated optimum\n";
        return exit_runtime;
    }
    return exit_ok;
}

}  // namespace

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw std::invalid_argument("empty entry in integer list");
        item = item.substr(first, last - first + 1);
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("not an integer: " + item);
        }
        if (used != item.size()) throw std::invalid_argument("not an integer: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("integer list is empty");
    return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config) {
    if (flag) return *flag;
    if (config) return *config;
    if (const char* env = std::getenv("RRMAB_SEED"); env && *env) {
        const std::string s(env);
        if (s.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("RRMAB_SEED must be an unsigned integer");
        }
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno == ERANGE) throw std::invalid_argument("RRMAB_SEED is out of range");
        return static_cast<std::uint64_t>(v);
    }
    return 0;
}

std::filesystem::path with_suffix(const std::filesystem::path& path, const std::string& suffix) {
    std::filesystem::path out = path;
    out.replace_filename(path.stem().string() + suffix + path.extension().string());
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and checks for rising rested bandits with linear drift", "rrmab"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "replicated runs at one horizon");
    add_common(simulate, o);

    auto* sweep = app.add_subcommand("sweep", "replicated runs over a grid of horizons");
    add_common(sweep, o);
    sweep->add_option("--sweep-T", o.sweep_t, "comma-separated horizons");
    sweep->add_flag("--emit-plot-data", o.emit_plot_data, "write (ln T, ln regret) pairs and the fit");

    auto* adversary = app.add_subcommand("adversary", "uniformly drawn lower-bound profiles");
    add_common(adversary, o);
    adversary->add_flag("--emit-plot-data", o.emit_plot_data, "write (ln T, ln regret) pairs");

    auto* coverage = app.add_subcommand("coverage", "empirical violation rates of the confidence widths");
    add_common(coverage, o);
    coverage->add_option("--m-cap", o.m_cap, "check elimination-round estimates up to this pull count");

    auto* brute = app.add_subcommand("brute-check", "certify single-arm optimality by enumeration");
    brute->add_option("--K", o.num_arms, "number of arms")->required();
    brute->add_option("--T", o.horizon, "horizon")->required();
    brute->add_option("--random-instances", o.random_instances, "instances to check");
    brute->add_option("--seed", o.seed, "base seed (default: RRMAB_SEED, then 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "rrmab: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (*simulate) return cmd_sweep(o, false, out);
        if (*sweep) return cmd_sweep(o, true, out);
        if (*adversary) return cmd_adversary(o, out);
        if (*coverage) return cmd_coverage(o, out);
        if (*brute) return cmd_brute_check(o, out, err);
    } catch (const UsageError& e) {
        err << "rrmab: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "rrmab: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}

}  // namespace rrmab::cli
