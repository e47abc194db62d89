// jellium: command-line front end for the samplers, laws, equilibrium solvers
// and validation suites.
//
// Exit codes: 0 success, 1 failed acceptance criterion, 2 invalid input,
// 3 numerical or runtime failure.

#include <jellium/edge_laws.hpp>
#include <jellium/equilibrium.hpp>
#include <jellium/errors.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/io.hpp>
#include <jellium/mcmc.hpp>
#include <jellium/parallel.hpp>
#include <jellium/validation.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <limits>
#include <optional>

namespace {

using namespace jellium;
namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct GasOptions {
    int n = 0;
    double beta = 2.0;
    double alpha = kUnset;
    double R = 1.0;

    GasParams build() const {
        if (n < 1 || std::isnan(alpha))
            throw Error(ErrorCode::InvalidParams, "--n and --alpha are required");
        return GasParams(n, beta, alpha, R);
    }
    bool given() const { return n > 0 || !std::isnan(alpha); }
};

struct Common {
    std::uint64_t seed = 7;
    std::string output_dir = "jellium_out";
    std::string format = "csv";
    int threads = 0;
};

void add_gas_options(CLI::App* cmd, GasOptions& g) {
    cmd->add_option("--n", g.n, "number of particles")->check(CLI::PositiveNumber);
    cmd->add_option("--beta", g.beta, "inverse temperature")->capture_default_str();
    cmd->add_option("--alpha", g.alpha, "background charge");
    cmd->add_option("--R", g.R, "background disc radius")->capture_default_str();
}

void add_common_options(CLI::App* cmd, Common& c, bool with_format) {
    cmd->add_option("--seed", c.seed, "base seed")->capture_default_str();
    cmd->add_option("-o,--output-dir", c.output_dir, "output directory")->capture_default_str();
    if (with_format)
        cmd->add_option("--format", c.format, "payload format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
}

int resolve_threads(int flag) {
    if (flag > 0)
        return flag;
    if (const char* env = std::getenv("JELLIUM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<int>(v);
        std::cerr << "warning: ignoring JELLIUM_THREADS='" << env << "'\n";
    }
    return resolve_thread_count(0);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

/// Every option of the subcommand with its resolved value.
Json resolved_options(const CLI::App* cmd) {
    Json j = Json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name() == "--help")
            continue;
        std::string name = opt->get_single_name();
        const auto results = opt->reduced_results();
        std::string value;
        if (!results.empty())
            value = results.back();
        else
            value = opt->get_default_str();
        j[name] = value;
    }
    return j;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& argv,
                    const CLI::App* cmd, const std::string& config_file, int threads, Json extra) {
    Json m;
    m["command"] = command;
    m["version"] = library_version();
    m["argv"] = argv;
    m["config_file"] = config_file;
    m["threads"] = threads;
    m["resolved"] = resolved_options(cmd);
    for (auto it = extra.begin(); it != extra.end(); ++it)
        m[it.key()] = it.value();
    m["created_utc"] = utc_timestamp();
    write_json(dir / "manifest.json", m);
}

/// Writes columns either as CSV (`<stem>.csv`) or as a JSON object of arrays (`<stem>_data.json`).
void write_columns(const fs::path& dir, const std::string& stem, const std::string& format, const std::string& csv,
                   const std::vector<std::pair<std::string, const std::vector<double>*>>& cols) {
    if (format == "csv") {
        write_text(dir / (stem + ".csv"), csv);
        return;
    }
    Json j = Json::object();
    for (const auto& [name, v] : cols)
        j[name] = *v;
    write_json(dir / (stem + "_data.json"), j);
}

/// Splits `--config FILE` off argv and turns the file into flags placed ahead of the
/// user's own flags, so the command line wins (options keep their last value).
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app, std::string& config_file) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_file = args[i].substr(9);
    }
    if (config_file.empty())
        return args;

    std::size_t sub_pos = 0;
    CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size() && !sub; ++i) {
        for (CLI::App* s : app.get_subcommands({})) {
            if (s->get_name() == args[i]) {
                sub = s;
                sub_pos = i;
                break;
            }
        }
    }
    std::vector<std::string> global;
    std::vector<std::string> local;
    for (const auto& [key, value] : parse_flat_config(read_text(config_file))) {
        const auto dot = key.rfind('.');
        std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
        for (char& ch : leaf)
            if (ch == '_')
                ch = '-';
        const std::string flag = "--" + leaf;
        if (sub && sub->get_option_no_throw(flag)) {
            local.push_back(flag);
            local.push_back(value);
        } else if (app.get_option_no_throw(flag) && flag != "--config") {
            global.push_back(flag);
            global.push_back(value);
        } else if (leaf == "law" || leaf == "mode") {
            // positional arguments given in the file
            if (sub && sub->get_option_no_throw(leaf)) {
                local.push_back("--" + leaf);
                local.push_back(value);
            }
        } else {
            std::cerr << "warning: config key '" << key << "' does not apply to this command\n";
        }
    }
    std::vector<std::string> out{args.front()};
    if (!sub) {
        out.insert(out.end(), global.begin(), global.end());
        out.insert(out.end(), args.begin() + 1, args.end());
        return out;
    }
    out.insert(out.end(), global.begin(), global.end());
    out.insert(out.end(), args.begin() + 1, args.begin() + static_cast<long>(sub_pos) + 1);
    out.insert(out.end(), local.begin(), local.end());
    out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
    return out;
}

InitMode parse_init(const std::string& s) {
    return s == "uniform_disc" ? InitMode::UniformDisc : InitMode::EquilibriumRadial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jellium: planar Wigner jellium samplers, edge laws and equilibrium measures"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(library_version()));

    int threads_flag = 0;
    std::string config_flag;
    app.add_option("--threads", threads_flag, "worker threads (default: JELLIUM_THREADS, then all cores)");
    app.add_option("--config", config_flag, "flat TOML-style config file; flags override its values");

    // sample
    CLI::App* sample = app.add_subcommand("sample", "draw configurations or moduli");
    GasOptions sample_gas;
    Common sample_common;
    std::string method = "exact";
    int trials = 1000;
    Schedule schedule;
    schedule.thinning = 100;
    std::string init = "equilibrium_radial";
    int chains = 1;
    sample->add_option("--method", method, "exact (beta = 2 moduli) or mala")
        ->check(CLI::IsMember({"exact", "mala"}))
        ->capture_default_str();
    add_gas_options(sample, sample_gas);
    add_common_options(sample, sample_common, true);
    sample->add_option("--trials", trials, "exact sampler trials")->check(CLI::PositiveNumber)->capture_default_str();
    sample->add_option("--steps", schedule.steps, "MCMC steps per chain")->capture_default_str();
    sample->add_option("--burn-in-fraction", schedule.burn_in_fraction, "share of steps spent adapting dt")
        ->capture_default_str();
    sample->add_option("--thinning", schedule.thinning, "keep every k-th post-burn-in state")->capture_default_str();
    sample->add_option("--dt,--dt-init", schedule.dt_init, "initial step size")->capture_default_str();
    sample->add_option("--target-acceptance", schedule.target_acceptance)->capture_default_str();
    sample->add_option("--leapfrog-steps", schedule.leapfrog_steps, "1 = MALA, more = HMC")->capture_default_str();
    sample->add_option("--init", init, "initial configuration")
        ->check(CLI::IsMember({"uniform_disc", "equilibrium_radial"}))
        ->capture_default_str();
    sample->add_option("--chains", chains, "independent chains")->check(CLI::PositiveNumber)->capture_default_str();

    // law
    CLI::App* law = app.add_subcommand("law", "tabulate a limiting or exact edge law");
    std::string law_name;
    std::string grid_spec;
    double law_kappa = 1.0;
    double law_R = 1.0;
    double truncation_tol = 1e-12;
    GasOptions law_gas;
    Common law_common;
    law->add_option("law,--law", law_name, "L, F, gumbel or exact_max")
        ->required()
        ->check(CLI::IsMember({"L", "F", "gumbel", "exact_max"}));
    law->add_option("--grid", grid_spec, "start:stop:step")->required();
    law->add_option("--kappa", law_kappa, "L only")->capture_default_str();
    law->add_option("--truncation-tol", truncation_tol)->capture_default_str();
    law->add_option("--n", law_gas.n, "exact_max only");
    law->add_option("--beta", law_gas.beta)->capture_default_str();
    law->add_option("--alpha", law_gas.alpha, "exact_max only");
    law->add_option("--R", law_R, "disc radius")->capture_default_str();
    add_common_options(law, law_common, true);

    // equilibrium
    CLI::App* equilibrium = app.add_subcommand("equilibrium", "equilibrium density profiles");
    std::string mode;
    double eq_lambda = kUnset;
    double eq_R = 1.0;
    double eq_kappa = kUnset;
    CrossoverSpec solver;
    int lt_intervals = 1024;
    Common eq_common;
    equilibrium->add_option("mode,--mode", mode, "low_temp or crossover")
        ->required()
        ->check(CLI::IsMember({"low_temp", "crossover"}));
    equilibrium->add_option("--lambda", eq_lambda, "alpha / n")->required();
    equilibrium->add_option("--R", eq_R)->capture_default_str();
    equilibrium->add_option("--kappa", eq_kappa, "crossover only");
    equilibrium->add_option("--grid-size", solver.intervals, "crossover grid intervals")->capture_default_str();
    equilibrium->add_option("--r-max", solver.r_max, "crossover domain radius (0: 20 R)")->capture_default_str();
    equilibrium->add_option("--tolerance", solver.tolerance, "Newton tolerance (relative to kappa)")
        ->capture_default_str();
    equilibrium->add_option("--max-iterations", solver.max_iterations)->capture_default_str();
    equilibrium->add_option("--intervals", lt_intervals, "low_temp grid intervals")->capture_default_str();
    add_common_options(equilibrium, eq_common, true);

    // validate
    CLI::App* validate = app.add_subcommand("validate", "run acceptance experiments");
    std::string suite = "all";
    GasOptions val_gas;
    val_gas.beta = kUnset;
    val_gas.R = kUnset;
    Common val_common;
    ValidationOptions vopts;
    validate->add_option("--suite", suite)
        ->check(CLI::IsMember(validation_suite_names()))
        ->capture_default_str();
    validate->add_option("--n", val_gas.n, "override the suite's gas parameters");
    validate->add_option("--beta", val_gas.beta);
    validate->add_option("--alpha", val_gas.alpha);
    validate->add_option("--R", val_gas.R);
    validate->add_option("--bulk-steps", vopts.bulk_schedule.steps)->capture_default_str();
    validate->add_option("--cross-chains", vopts.cross_chains)->capture_default_str();
    add_common_options(validate, val_common, false);

    const std::vector<std::string> raw(argv, argv + argc);
    std::string config_file;
    std::vector<std::string> args;
    try {
        args = expand_config(raw, app, config_file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    const int threads = resolve_threads(threads_flag);
    try {
        if (sample->parsed()) {
            const GasParams p = sample_gas.build();
            const fs::path dir = sample_common.output_dir;
            if (method == "exact") {
                if (p.beta() != 2.0)
                    throw Error(ErrorCode::BetaNotTwo, "the exact sampler needs beta = 2");
                require_integrable(p);
                const std::vector<RadialSample> samples =
                    sample_radii_batch(p, trials, sample_common.seed, threads);
                TrialBatch batch{p, sample_common.seed, {}};
                for (const RadialSample& s : samples)
                    batch.values.push_back(s.max_modulus());
                std::vector<double> ids(batch.values.size());
                for (std::size_t i = 0; i < ids.size(); ++i)
                    ids[i] = static_cast<double>(i);
                write_columns(dir, "maxima", sample_common.format, trial_batch_csv(batch),
                              {{"trial_id", &ids}, {"max_modulus", &batch.values}});
                write_json(dir / "maxima.json", trial_batch_sidecar(batch));
                write_text(dir / "moduli.csv", radial_samples_csv(samples));
                write_manifest(dir, "sample", raw, sample, config_file, threads, Json{{"params", to_json(p)}});
                std::cout << "wrote " << batch.values.size() << " maxima to " << (dir / "maxima").string() << '\n';
            } else {
                schedule.init = parse_init(init);
                schedule.validate();
                require_integrable(p);
                const std::vector<ChainResult> results = run_chains(p, schedule, sample_common.seed, chains, threads);
                write_text(dir / "configs.csv", configs_csv(results));
                std::vector<RadialSample> samples;
                Json diag = Json::array();
                for (const ChainResult& r : results) {
                    samples.insert(samples.end(), r.samples.begin(), r.samples.end());
                    Json d = to_json(r.diagnostics);
                    d["chain_id"] = r.chain_id;
                    d["configs"] = r.configs.size();
                    diag.push_back(d);
                }
                write_text(dir / "moduli.csv", radial_samples_csv(samples));
                write_json(dir / "diagnostics.json", Json{{"params", to_json(p)},
                                                          {"schedule", to_json(schedule)},
                                                          {"seed", sample_common.seed},
                                                          {"version", library_version()},
                                                          {"chains", diag}});
                write_manifest(dir, "sample", raw, sample, config_file, threads,
                               Json{{"params", to_json(p)}, {"schedule", to_json(schedule)}});
                std::uint64_t overflow = 0;
                for (const ChainResult& r : results)
                    overflow += r.diagnostics.overflow_count;
                std::cout << "wrote " << samples.size() << " configurations to " << (dir / "configs.csv").string()
                          << " (acceptance " << results.front().diagnostics.acceptance_rate << ", final dt "
                          << results.front().diagnostics.final_dt << ")\n";
                if (overflow > 0)
                    std::cerr << "warning: " << overflow << " proposals rejected for non-finite energy differences\n";
            }
            return kExitPass;
        }

        if (law->parsed()) {
            const std::vector<double> t = parse_grid(grid_spec);
            LimitLawSpec spec;
            spec.R = law_R;
            spec.kappa = law_kappa;
            spec.truncation_tol = truncation_tol;
            if (law_name == "L") {
                spec.kind = LawKind::HeavyTailL;
            } else if (law_name == "F") {
                spec.kind = LawKind::SphericalF;
            } else if (law_name == "gumbel") {
                spec.kind = LawKind::Gumbel;
            } else {
                spec.kind = LawKind::ExactMax;
                GasOptions g = law_gas;
                g.R = law_R;
                spec.params = g.build();
            }
            const ContinuousLaw L = make_law(spec);
            std::vector<double> cdf;
            cdf.reserve(t.size());
            for (double x : t) {
                const double v = L.cdf(x);
                if (!std::isfinite(v))
                    throw Error(ErrorCode::NonFiniteValue, "cdf is not finite at t = " + format_real(x));
                cdf.push_back(v);
            }
            const fs::path dir = law_common.output_dir;
            write_columns(dir, "law", law_common.format, law_csv(t, cdf), {{"t", &t}, {"cdf", &cdf}});
            write_manifest(dir, "law", raw, law, config_file, threads, Json{{"law", L.name}, {"points", t.size()}});
            std::cout << "wrote " << t.size() << " points of " << L.name << '\n';
            return kExitPass;
        }

        if (equilibrium->parsed()) {
            EquilibriumProfile prof;
            Json info = Json{{"mode", mode}, {"lambda", eq_lambda}, {"R", eq_R}};
            if (mode == "low_temp") {
                prof = low_temperature_equilibrium(eq_lambda, eq_R, lt_intervals);
                const GasParams p(1, 2.0, eq_lambda, eq_R);
                const auto probes = default_probe_radii(prof, p);
                const EulerLagrangeResidual el = euler_lagrange_residual(prof, p, probes);
                info["support_edge"] = prof.support_radius;
                info["euler_lagrange"] = Json{{"constant", el.constant},
                                              {"on_support_deviation", el.on_support_deviation},
                                              {"off_support_min_margin", el.off_support_min_margin},
                                              {"flagged", el.flagged}};
                info["rate_functional"] = eval_rate_functional(prof, FunctionalSpec{FunctionalMode::LowTemp, eq_lambda, eq_R});
            } else {
                if (std::isnan(eq_kappa))
                    throw Error(ErrorCode::InvalidParams, "crossover needs --kappa");
                info["kappa"] = eq_kappa;
                prof = solve_crossover(eq_kappa, eq_lambda, eq_R, solver);
                info["expected_farfield_exponent"] = -eq_kappa * (eq_lambda - 1.0);
                info["rate_functional"] =
                    eval_rate_functional(prof, FunctionalSpec{FunctionalMode::Crossover, eq_lambda, eq_R, eq_kappa});
                info["step_profile_l1"] = step_profile_l1_distance(prof, eq_lambda, eq_R);
            }
            const fs::path dir = eq_common.output_dir;
            std::vector<double> phi(prof.density.size());
            for (std::size_t i = 0; i < phi.size(); ++i)
                phi[i] = prof.grid[i] > prof.support_radius ? 0.0 : prof.density[i];
            write_columns(dir, "profile", eq_common.format, profile_csv(prof), {{"r", &prof.grid}, {"phi", &phi}});
            Json diag = profile_diagnostics(prof);
            for (auto it = info.begin(); it != info.end(); ++it)
                diag[it.key()] = it.value();
            diag["version"] = library_version();
            write_json(dir / "profile.json", diag);
            write_manifest(dir, "equilibrium", raw, equilibrium, config_file, threads, info);
            std::cout << "mode " << mode << ": mass " << format_real(prof.mass) << ", residual "
                      << format_real(prof.residual);
            if (mode == "low_temp")
                std::cout << ", support edge " << format_real(prof.support_radius);
            else
                std::cout << ", far-field exponent " << format_real(prof.farfield_exponent);
            std::cout << '\n';
            return kExitPass;
        }

        if (validate->parsed()) {
            vopts.seed = val_common.seed;
            vopts.threads = threads;
            if (val_gas.given() || !std::isnan(val_gas.beta) || !std::isnan(val_gas.R)) {
                GasOptions g = val_gas;
                if (std::isnan(g.beta))
                    g.beta = 2.0;
                if (std::isnan(g.R))
                    g.R = 1.0;
                vopts.params_override = g.build();
            }
            const fs::path dir = val_common.output_dir;
            const std::vector<CriterionOutcome> outcomes = run_validation_suite(suite, vopts);
            bool all_passed = true;
            Json summary = Json::array();
            for (const CriterionOutcome& o : outcomes) {
                Json reports = Json::array();
                for (std::size_t k = 0; k < o.reports.size(); ++k) {
                    const Json r = to_json(o.reports[k]);
                    reports.push_back(r);
                    write_json(dir / ("report_" + o.id + "_" + std::to_string(k) + ".json"), r);
                }
                summary.push_back(Json{{"suite", o.id}, {"description", o.description}, {"passed", o.passed},
                                       {"reports", reports}});
                all_passed = all_passed && o.passed;
                std::cout << (o.passed ? "PASS " : "FAIL ") << o.id << ": " << o.description;
                for (const EcdfReport& r : o.reports)
                    std::cout << " [KS " << format_real(r.ks_distance) << " vs " << r.pass_threshold << "]";
                std::cout << '\n';
            }
            write_json(dir / "validation_summary.json",
                       Json{{"suite", suite}, {"seed", vopts.seed}, {"passed", all_passed}, {"criteria", summary}});
            write_manifest(dir, "validate", raw, validate, config_file, threads, Json{{"passed", all_passed}});
            return all_passed ? kExitPass : kExitFail;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_validation_error(e.code()) ? kExitInvalid : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitInvalid;
}
