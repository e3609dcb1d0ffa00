#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdsem/csv.hpp"
#include "sdsem/dynamics.hpp"
#include "sdsem/fit.hpp"
#include "sdsem/generator.hpp"
#include "sdsem/measurement.hpp"
#include "sdsem/sem.hpp"
#include "sdsem/spec_io.hpp"

#ifndef SDSEM_BUNDLED_SPEC_DIR
#define SDSEM_BUNDLED_SPEC_DIR "specs"
#endif

namespace sdsem::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

fs::path resolve_spec_path(const std::string& arg) {
    const fs::path direct(arg);
    if (fs::exists(direct)) return direct;
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("SDSEM_SPEC_DIR"); env && *env) dirs.emplace_back(env);
    dirs.emplace_back(SDSEM_BUNDLED_SPEC_DIR);
    const auto name = direct.filename();
    for (const auto& dir : dirs) {
        for (const auto& candidate : {dir / name, dir / fs::path(name.string() + ".json")}) {
            if (fs::exists(candidate)) return candidate;
        }
    }
    return direct;  // let the loader report the missing file
}

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Audit record written once per run that produces files.
class RunManifest {
public:
    explicit RunManifest(std::string command) : started_(utc_now()) {
        doc_["command"] = std::move(command);
        doc_["spec_paths"] = Json::array();
        doc_["config"] = Json::object();
        doc_["outputs"] = Json::array();
    }

    void spec(const fs::path& p) { doc_["spec_paths"].push_back(p.string()); }
    template <typename T>
    void config(const std::string& key, T value) { doc_["config"][key] = std::move(value); }
    void seed(std::uint64_t s) { doc_["seed"] = s; }
    void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

    void write(const fs::path& path) {
        doc_["started_at"] = started_;
        doc_["finished_at"] = utc_now();
        doc_["tool_version"] = kToolVersion;
        write_text_file(path, doc_.dump(2) + "\n");
    }

private:
    std::string started_;
    Json doc_ = Json::object();
};

struct CommonOptions {
    std::string out;
    std::string manifest;
    std::string plot_data;
};

/// Writes `text` to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out, RunManifest& man) {
    if (path.empty()) {
        out << text;
        return;
    }
    write_text_file(path, text);
    man.output(path);
}

void finish_manifest(RunManifest& man, const CommonOptions& opts, const std::string& fallback_dir = {}) {
    fs::path target;
    if (!opts.manifest.empty()) {
        target = opts.manifest;
    } else if (!opts.out.empty()) {
        target = opts.out + ".manifest.json";
    } else if (!fallback_dir.empty()) {
        target = fs::path(fallback_dir) / "run_manifest.json";
    } else {
        return;
    }
    man.write(target);
}

IntegrationMethod parse_method(const std::string& name) {
    return name == "euler" ? IntegrationMethod::Euler : IntegrationMethod::Rk4;
}

/// Latent trajectory for a spec: integrated when it has stocks, otherwise
/// the static subsystem evaluated at the observation times (or the grid).
Trajectory latent_trajectory(const ModelSpec& spec, const IntegratorConfig& config) {
    if (spec.dims.m > 0) return simulate(spec, config);
    if (!spec.horizon.observation_times.empty()) {
        return static_series(spec, spec.horizon.observation_times);
    }
    const auto grid = make_grid(spec.horizon.t_initial, spec.horizon.t_final,
                                effective_dt(spec, config));
    return static_series(spec, grid);
}

LatentRef parse_latent(const std::string& name) {
    if (name.size() > 2 && (name[0] == 'x' || name[0] == 'y') && name[1] == '_') {
        const auto index = std::stoul(name.substr(2));
        if (index >= 1) {
            return {name[0] == 'x' ? LatentRef::Kind::Stock : LatentRef::Kind::Static, index - 1};
        }
    }
    throw ParseError("latent selector must look like x_<i> or y_<i>, got '" + name + "'");
}

std::size_t parse_indicator(const std::string& name, const ObservationMatrix& obs) {
    for (std::size_t i = 0; i < obs.indicator_labels.size(); ++i) {
        if (obs.indicator_labels[i] == name) return i;
    }
    if (!name.empty() && name.find_first_not_of("0123456789") == std::string::npos) {
        const auto index = std::stoul(name);
        if (index >= 1 && index <= obs.values.rows()) return index - 1;
    }
    throw ParseError("no indicator column '" + name + "' in the observation file");
}

int cmd_validate(const std::string& spec_arg, const CommonOptions& opts, std::ostream& out) {
    const auto path = resolve_spec_path(spec_arg);
    RunManifest man("validate");
    man.spec(path);
    const auto spec = load_spec_unvalidated(path);
    const auto report = validate(spec);
    std::ostringstream text;
    if (report.empty()) {
        text << "valid (" << to_string(spec.mode) << ", m=" << spec.dims.m << ", n=" << spec.dims.n
             << ", p=" << spec.dims.p << ", q=" << spec.dims.q << ")\n";
    } else {
        for (const auto& v : report) {
            text << v.location << " [" << v.rule << "] " << v.message << '\n';
        }
    }
    emit(opts.out, text.str(), out, man);
    finish_manifest(man, opts);
    return report.empty() ? kOk : kDomainError;
}

int cmd_simulate(const std::string& spec_arg, const std::string& method,
                 std::optional<double> dt, const CommonOptions& opts, std::ostream& out) {
    const auto path = resolve_spec_path(spec_arg);
    RunManifest man("simulate");
    man.spec(path);
    const auto spec = load_spec(path);
    IntegratorConfig config;
    config.method = parse_method(method);
    config.dt = dt;
    const auto traj = latent_trajectory(spec, config);
    man.config("method", method);
    man.config("dt", effective_dt(spec, config));
    man.config("overflow_guard", config.overflow_guard);
    man.config("integrated", spec.dims.m > 0);
    emit(opts.out, trajectory_to_csv(traj), out, man);
    if (!opts.plot_data.empty()) {
        write_text_file(opts.plot_data, trajectory_plot_data(traj));
        man.output(opts.plot_data);
    }
    finish_manifest(man, opts);
    return kOk;
}

int cmd_observe(const std::string& spec_arg, const std::string& method, std::optional<double> dt,
                std::uint64_t seed, const CommonOptions& opts, std::ostream& out,
                std::ostream& err) {
    const auto path = resolve_spec_path(spec_arg);
    RunManifest man("observe");
    man.spec(path);
    const auto spec = load_spec(path);
    if (spec.dims.p == 0) {
        err << "error: spec has no indicators (p = 0); nothing to observe\n";
        return kDomainError;
    }
    IntegratorConfig config;
    config.method = parse_method(method);
    config.dt = dt;
    const auto traj = latent_trajectory(spec, config);
    const auto obs = observe(spec, traj, seed);
    man.config("method", method);
    man.config("dt", effective_dt(spec, config));
    man.seed(seed);
    emit(opts.out, observations_to_csv(obs), out, man);
    if (!opts.plot_data.empty()) {
        write_text_file(opts.plot_data, observation_plot_data(obs));
        man.output(opts.plot_data);
    }
    finish_manifest(man, opts);
    return kOk;
}

int cmd_fit(const std::string& sim_path, const std::string& obs_path, const std::string& indicator,
            const std::string& latent, const std::string& role, const std::string& format,
            const CommonOptions& opts, std::ostream& out) {
    RunManifest man("fit");
    man.spec(sim_path);
    man.spec(obs_path);
    const auto sim = trajectory_from_csv(read_text_file(sim_path));
    const auto obs = observations_from_csv(read_text_file(obs_path));
    const auto pair = align(sim, obs, parse_indicator(indicator, obs), parse_latent(latent),
                            role == "reference" ? SeriesRole::VsReference : SeriesRole::VsObserved);
    const auto report = basic_fit(pair);
    man.config("indicator", indicator);
    man.config("latent", latent);
    man.config("role", role);
    emit(opts.out, format == "csv" ? to_csv(report) : to_key_value(report), out, man);
    finish_manifest(man, opts);
    return kOk;
}

int cmd_implied_cov(const std::string& spec_arg, const CommonOptions& opts, std::ostream& out,
                    std::ostream& err) {
    const auto path = resolve_spec_path(spec_arg);
    RunManifest man("implied-cov");
    man.spec(path);
    const auto spec = load_spec(path);
    const auto bridge = to_lisrel(spec);
    for (const auto& w : bridge.mapping.warnings) err << "warning: " << w << '\n';
    const auto implied = implied_covariance(bridge.lisrel);
    const auto sigma = in_indicator_order(implied.sigma, bridge.mapping);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < spec.dims.p; ++i) {
        labels.push_back(i < spec.names.z.size() ? spec.names.z[i] : "z_" + std::to_string(i + 1));
    }
    man.config("exogenous", bridge.mapping.xi_statics.size());
    man.config("endogenous", bridge.mapping.eta_statics.size());
    emit(opts.out, covariance_to_csv(sigma, labels), out, man);
    finish_manifest(man, opts);
    return kOk;
}

int cmd_generate(const std::string& config_path, std::size_t count, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, unsigned threads, const CommonOptions& opts,
                 std::ostream& out) {
    RunManifest man("generate");
    man.spec(config_path);
    auto config = parse_generator_config(read_text_file(config_path));
    if (seed) config.seed = *seed;
    const auto result = batch(config, count, threads);
    const auto written = write_batch(result, out_dir);
    for (const auto& p : written) man.output(p);
    man.output(fs::path(out_dir) / "manifest.csv");
    man.seed(config.seed);
    man.config("count", count);
    man.config("generator", Json::parse(serialize_generator_config(config)));
    out << "generated " << result.accepted << "/" << count << " systems; acceptance rate "
        << format_double(result.acceptance_rate()) << '\n';
    for (const auto& [cause, n] : result.causes) out << "  rejected (" << cause << "): " << n << '\n';
    finish_manifest(man, opts, out_dir);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SD-SEM model engine: validate, simulate, observe, fit, and generate models"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions opts;
    std::string spec_arg;
    std::string method = "rk4";
    std::optional<double> dt;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", opts.out, "Output file (stdout when omitted)");
        sub->add_option("--manifest", opts.manifest, "Run manifest path (default <out>.manifest.json)");
    };
    auto add_integration = [&](CLI::App* sub) {
        sub->add_option("--method", method, "Integrator")
            ->check(CLI::IsMember({"euler", "rk4"}));
        sub->add_option("--dt", dt, "Integration step (overrides the spec)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--plot-data", opts.plot_data, "Long-format series,t,value CSV");
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a spec against every invariant");
    validate_cmd->add_option("spec", spec_arg, "Spec file or bundled spec name")->required();
    add_common(validate_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a spec and write its trajectory");
    simulate_cmd->add_option("spec", spec_arg, "Spec file or bundled spec name")->required();
    add_common(simulate_cmd);
    add_integration(simulate_cmd);

    auto* observe_cmd = app.add_subcommand("observe", "Simulate, then synthesize indicator data");
    observe_cmd->add_option("spec", spec_arg, "Spec file or bundled spec name")->required();
    observe_cmd->add_option("--seed", seed, "Measurement-noise seed");
    add_common(observe_cmd);
    add_integration(observe_cmd);

    std::string sim_csv, obs_csv, indicator = "1", latent = "x_1", role = "observed",
                                  format = "kv";
    auto* fit_cmd = app.add_subcommand("fit", "Compare a simulated series with observed data");
    fit_cmd->add_option("sim_csv", sim_csv, "Trajectory CSV from simulate")->required();
    fit_cmd->add_option("obs_csv", obs_csv, "Observation or reference-mode CSV")->required();
    fit_cmd->add_option("--indicator", indicator, "Observed column label or 1-based index");
    fit_cmd->add_option("--latent", latent, "Simulated column (x_<i> or y_<i>)");
    fit_cmd->add_option("--role", role, "Comparison series role")
        ->check(CLI::IsMember({"observed", "reference"}));
    fit_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"kv", "csv"}));
    add_common(fit_cmd);

    auto* cov_cmd = app.add_subcommand("implied-cov", "Model-implied indicator covariance");
    cov_cmd->add_option("spec", spec_arg, "Spec file or bundled spec name")->required();
    add_common(cov_cmd);

    std::string config_path, out_dir;
    std::size_t count = 1;
    std::optional<std::uint64_t> gen_seed;
    unsigned threads = 1;
    auto* gen_cmd = app.add_subcommand("generate", "Sample random specs from a generator config");
    gen_cmd->add_option("config", config_path, "Generator config JSON")->required();
    gen_cmd->add_option("--count", count, "Number of systems")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out-dir", out_dir, "Directory for specs and manifest.csv")->required();
    gen_cmd->add_option("--seed", gen_seed, "Override the config seed");
    gen_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--manifest", opts.manifest, "Run manifest path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::Success&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(spec_arg, opts, out);
        if (simulate_cmd->parsed()) return cmd_simulate(spec_arg, method, dt, opts, out);
        if (observe_cmd->parsed()) return cmd_observe(spec_arg, method, dt, seed, opts, out, err);
        if (fit_cmd->parsed())
            return cmd_fit(sim_csv, obs_csv, indicator, latent, role, format, opts, out);
        if (cov_cmd->parsed()) return cmd_implied_cov(spec_arg, opts, out, err);
        if (gen_cmd->parsed())
            return cmd_generate(config_path, count, out_dir, gen_seed, threads, opts, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kInputError;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kInputError;
    } catch (const ValidationError& e) {
        err << "validation error:\n";
        for (const auto& v : e.report()) {
            err << "  " << v.location << " [" << v.rule << "] " << v.message << '\n';
        }
        return kDomainError;
    } catch (const OverflowError& e) {
        err << "divergence at t = " << format_double(e.time()) << ": " << e.what() << '\n';
        return kDivergence;
    } catch (const PerfectFit&) {
        out << "flags=perfect_fit\n";
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
    return kInputError;
}

}  // namespace sdsem::cli
