#include "remitsim/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "remitsim/csv.hpp"
#include "remitsim/fixtures.hpp"
#include "remitsim/parallel.hpp"
#include "remitsim/reports.hpp"

namespace remitsim {

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    std::optional<std::string> data_dir;
    std::optional<std::string> params_path;
};

struct CalibrateOptions {
    std::optional<std::uint64_t> split_seed;
    std::optional<int> starts;
    std::optional<int> max_iter;
    std::optional<double> tolerance;
    std::optional<int> bootstrap_reps;
};

struct FixtureOptions {
    int origins = 10;
    int destinations = 5;
    int events_per_origin = 4;
    double noise = 0.0;
    bool no_disasters = false;
    bool no_panel = false;
};

/// Everything a command needs after option parsing.
struct Run {
    RunConfig config;
    fs::path config_path;
    fs::path params_path;
    int threads = 1;

    fs::path out(const std::string &name) const { return config.output_dir / name; }
};

Run make_run(const GlobalOptions &global) {
    Run run;
    if (!global.config_path.empty()) {
        run.config_path = global.config_path;
        run.config = RunConfig::load(run.config_path);
    }
    if (global.seed) {
        run.config.seed = *global.seed;
    }
    if (global.threads) {
        run.config.threads = *global.threads;
    }
    if (global.output_dir) {
        run.config.output_dir = *global.output_dir;
    }
    if (global.data_dir) {
        run.config.data_dir = *global.data_dir;
    }
    run.params_path = global.params_path ? fs::path(*global.params_path)
                                         : run.config.output_dir / "calibration.json";
    return run;
}

void finish_config(Run &run) {
    run.config.validate();
    run.threads = resolve_threads(run.config.threads);
}

std::map<std::string, fs::path> data_inputs(const Run &run) {
    std::map<std::string, fs::path> inputs;
    for (const auto &path : DataPaths::in_directory(run.config.data_dir).all()) {
        if (fs::exists(path)) {
            inputs[path.filename().string()] = path;
        }
    }
    if (!run.config_path.empty()) {
        inputs["config"] = run.config_path;
    }
    return inputs;
}

std::map<std::string, fs::path> model_inputs(const Run &run) {
    auto inputs = data_inputs(run);
    inputs["params"] = run.params_path;
    return inputs;
}

Dataset load(const Run &run) {
    return load_dataset(DataPaths::in_directory(run.config.data_dir));
}

RemittanceModel make_model(const Dataset &dataset, const Run &run) {
    return RemittanceModel(
        dataset, build_population(dataset, run.config.start_month, run.config.end_month),
        ModelOptions{run.config.delta_gdp_clamp});
}

int cmd_fixtures(const Run &run, const FixtureOptions &options) {
    FixtureSpec spec;
    spec.origins = options.origins;
    spec.destinations = options.destinations;
    spec.events_per_origin = options.events_per_origin;
    spec.panel_noise = options.noise;
    spec.with_disasters = !options.no_disasters;
    spec.with_panel = !options.no_panel;
    spec.seed = run.config.seed;
    const Tables tables = generate_fixture(spec);
    const fs::path dir = run.config.output_dir;
    write_tables(tables, dir);
    std::vector<std::string> outputs;
    for (const auto &path : DataPaths::in_directory(dir).all()) {
        if (fs::exists(path)) {
            outputs.push_back(path.filename().string());
        }
    }
    update_manifest(dir, "fixtures", {}, outputs, run.config.seed, run.config);
    fmt::print("fixture written to {}: {} countries, {} stock rows, {} events, {} panel rows\n",
               dir.string(), tables.economics.size() / 10, tables.stocks.size(),
               tables.disasters.size(), tables.panel.size());
    return exit_ok;
}

int cmd_build_population(const Run &run) {
    const Dataset dataset = load(run);
    const Population population =
        build_population(dataset, run.config.start_month, run.config.end_month);
    write_population_csv(run.out("population.csv"), population);
    write_demographics_csv(run.out("demographics.csv"), diaspora_demographics(population));
    update_manifest(run.config.output_dir, "build-population", data_inputs(run),
                    {"population.csv", "demographics.csv"}, run.config.seed, run.config);

    fmt::print("corridors: {}, months: {}\n", population.corridors().size(),
               population.month_count());
    for (int year : kAnchorYears) {
        double stock_total = 0.0;
        for (const auto &row : dataset.tables().stocks) {
            if (row.anchor_year == year) {
                stock_total += row.count;
            }
        }
        const int m = YearMonth(year, 1) - population.start();
        if (m >= 0 && m < population.month_count()) {
            double total = 0.0;
            for (const auto &corridor : population.corridors()) {
                total += corridor.months[m].total();
            }
            fmt::print("{}: migrants {} (stock file {})\n", year, csv::format_number(total),
                       csv::format_number(stock_total));
        } else {
            fmt::print("{}: stock file {} (outside the simulation window)\n", year,
                       csv::format_number(stock_total));
        }
    }
    return exit_ok;
}

int cmd_calibrate(Run &run, const CalibrateOptions &options) {
    if (options.split_seed) {
        run.config.split_seed = *options.split_seed;
    }
    if (options.starts) {
        run.config.optimizer.starts = *options.starts;
    }
    if (options.max_iter) {
        run.config.optimizer.max_iter = *options.max_iter;
    }
    if (options.tolerance) {
        run.config.optimizer.tolerance = *options.tolerance;
    }
    if (options.bootstrap_reps) {
        run.config.optimizer.bootstrap_reps = *options.bootstrap_reps;
    }
    finish_config(run);

    const Dataset dataset = load(run);
    if (dataset.tables().panel.empty()) {
        throw DataError("panel.csv is missing or empty; calibration needs observations");
    }
    const RemittanceModel model = make_model(dataset, run);
    const auto panel = split_panel(dataset.tables().panel, run.config.split_fraction,
                                   run.config.split_seed, run.config.split_mode);
    const CalibrationResult result = calibrate(model, panel, run.config.optimizer,
                                               run.config.seed, default_initial_params(),
                                               run.threads);
    write_text(run.out("calibration.json"), calibration_to_json(result, run.config).dump(2) + "\n");
    update_manifest(run.config.output_dir, "calibrate", data_inputs(run), {"calibration.json"},
                    run.config.seed, run.config);

    const auto values = result.params.to_array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        fmt::print("{:>7} {}\n", BehaviorParams::names()[i], csv::format_number(values[i]));
    }
    fmt::print("train SSE {}, test R2 {}, iterations {}, converged {}\n",
               csv::format_number(result.train_sse), csv::format_number(result.test_r2),
               result.iterations, result.converged);
    if (!result.converged) {
        std::cerr << "calibration did not converge within the iteration limit\n";
        return exit_calibration_failure;
    }
    return exit_ok;
}

int cmd_simulate(const Run &run) {
    const BehaviorParams params = load_params(run.params_path);
    const Dataset dataset = load(run);
    const RemittanceModel model = make_model(dataset, run);
    const auto weights = model.all_events();
    const auto flows = build_flow_matrices(model, params, weights, run.threads);
    const auto monthly =
        sample_monthly_totals(model, params, weights, run.config.seed, run.config.draws,
                              run.threads);

    std::vector<UncertaintyBand> bands;
    std::vector<double> total(static_cast<std::size_t>(run.config.draws), 0.0);
    for (int m = 0; m < model.month_count(); ++m) {
        bands.push_back(
            confidence_band(monthly[m], "total_" + model.population().month(m).str()));
        for (std::size_t d = 0; d < total.size(); ++d) {
            total[d] += monthly[m][d];
        }
    }
    bands.push_back(confidence_band(total, "total_all"));

    write_flows_csv(run.out("flows.csv"), {{"factual", &flows}});
    write_bands_csv(run.out("bands.csv"), bands);
    update_manifest(run.config.output_dir, "simulate", model_inputs(run),
                    {"flows.csv", "bands.csv"}, run.config.seed, run.config);

    double expected = 0.0;
    for (const auto &m : flows) {
        expected += m.total();
    }
    fmt::print("total expected flows {} USD (95% band {} .. {})\n",
               csv::format_number(expected), csv::format_number(bands.back().lower),
               csv::format_number(bands.back().upper));
    return exit_ok;
}

int cmd_counterfactual(const Run &run) {
    const BehaviorParams params = load_params(run.params_path);
    const Dataset dataset = load(run);
    const RemittanceModel model = make_model(dataset, run);
    const Scenario scenario = Scenario::no_disaster(model);
    const ScenarioResult result = run_counterfactual(model, params, scenario, run.threads);
    const UncertaintyBand band =
        induced_band(model, params, scenario, run.config.seed, run.config.draws, run.threads);

    write_induced_csv(run.out("induced.csv"), result);
    write_bands_csv(run.out("induced_bands.csv"), {band});
    write_summary_csv(run.out("summary_income_group.csv"),
                      summarize(result, dataset, Grouping::income_group));
    write_summary_csv(run.out("summary_country.csv"),
                      summarize(result, dataset, Grouping::country));
    write_summary_csv(run.out("summary_year.csv"), summarize(result, dataset, Grouping::year));
    update_manifest(run.config.output_dir, "counterfactual", model_inputs(run),
                    {"induced.csv", "induced_bands.csv", "summary_income_group.csv",
                     "summary_country.csv", "summary_year.csv"},
                    run.config.seed, run.config);

    const double factual = result.total_factual();
    fmt::print("disaster-induced flows {} USD ({} of {} USD total)\n",
               csv::format_number(result.total_induced()),
               factual > 0.0 ? fmt::format("{:.4f}%", 100.0 * result.total_induced() / factual)
                             : std::string("n/a"),
               csv::format_number(factual));
    return exit_ok;
}

int cmd_attribute(Run &run, const std::optional<std::string> &convention) {
    if (convention) {
        run.config.set("attribution_convention", *convention);
    }
    finish_config(run);
    const BehaviorParams params = load_params(run.params_path);
    const Dataset dataset = load(run);
    const RemittanceModel model = make_model(dataset, run);
    const AttributionReport report =
        attribute_by_hazard(model, params, run.config.attribution, run.threads);
    std::vector<EventAttribution> events;
    for (const auto &event : dataset.tables().disasters) {
        events.push_back(attribute_event(model, params, event.event_id));
    }
    write_attribution_csv(run.out("attribution.csv"), report);
    write_events_csv(run.out("events.csv"), events);
    update_manifest(run.config.output_dir, "attribute", model_inputs(run),
                    {"attribution.csv", "events.csv"}, run.config.seed, run.config);

    for (const auto &h : report.hazards) {
        fmt::print("{:>10} {} USD\n", to_string(h.hazard), csv::format_number(h.induced_usd));
    }
    fmt::print("interaction residual {} USD\n", csv::format_number(report.interaction_residual));
    return exit_ok;
}

nlohmann::ordered_json rows_to_json(const std::vector<ComparisonRow> &rows, bool structural) {
    auto out = nlohmann::ordered_json::array();
    for (const auto &r : rows) {
        const double estimate = structural ? r.estimate.structural : r.estimate.gravity;
        out.push_back({{"sender", r.estimate.sender},
                       {"recipient", r.estimate.recipient},
                       {"observed_usd", r.estimate.observed},
                       {"estimate_usd", estimate}});
    }
    return out;
}

int cmd_compare(const Run &run) {
    const BehaviorParams params = load_params(run.params_path);
    const Dataset dataset = load(run);
    if (dataset.tables().panel.empty()) {
        throw DataError("panel.csv is missing or empty; the comparison needs observations");
    }
    const RemittanceModel model = make_model(dataset, run);
    const auto &panel = dataset.tables().panel;
    const GravityFit fit = calibrate_gravity(panel, dataset);
    const auto gravity = gravity_flows(dataset, fit.beta_exp);
    const auto structural = build_flow_matrices(model, params, model.all_events(), run.threads);
    const ComparisonReport report = compare_models(structural, gravity, panel);

    write_comparison_csv(run.out("comparison.csv"), report);
    nlohmann::ordered_json j;
    j["gravity_beta"] = fit.beta_exp;
    j["gravity_sse"] = fit.sse;
    j["gravity_at_boundary"] = fit.at_boundary;
    j["gravity_warning"] = fit.warning;
    j["gravity_message"] = fit.message;
    j["mean_relative_error_structural"] = report.mean_relative_error_structural;
    j["mean_relative_error_gravity"] = report.mean_relative_error_gravity;
    j["error_ratio"] = report.error_ratio;
    j["excluded_corridors"] = report.excluded;
    j["largest_over_structural"] = rows_to_json(report.largest_over_structural, true);
    j["largest_under_structural"] = rows_to_json(report.largest_under_structural, true);
    j["largest_over_gravity"] = rows_to_json(report.largest_over_gravity, false);
    j["largest_under_gravity"] = rows_to_json(report.largest_under_gravity, false);
    write_text(run.out("baseline.json"), j.dump(2) + "\n");
    update_manifest(run.config.output_dir, "compare-baseline", model_inputs(run),
                    {"comparison.csv", "baseline.json"}, run.config.seed, run.config);

    fmt::print("gravity beta {}; mean relative error structural {} vs gravity {} (ratio {})\n",
               csv::format_number(fit.beta_exp),
               csv::format_number(report.mean_relative_error_structural),
               csv::format_number(report.mean_relative_error_gravity),
               csv::format_number(report.error_ratio));
    return exit_ok;
}

int cmd_report(const Run &run, const std::optional<std::string> &month_text) {
    const BehaviorParams params = load_params(run.params_path);
    const Dataset dataset = load(run);
    const RemittanceModel model = make_model(dataset, run);
    const YearMonth month = month_text ? YearMonth::parse(*month_text) : run.config.end_month;
    const int m = month - model.population().start();
    if (m < 0 || m >= model.month_count()) {
        throw DataError(fmt::format("report month {} outside the configured date range",
                                    month.str()));
    }
    write_profiles_csv(run.out("profiles.csv"), probability_profiles(model, params, m));
    const ModelProbabilities probabilities(model, params, model.all_events());
    write_senders_csv(run.out("senders.csv"),
                      sender_demographics(model.population(), probabilities, dataset));
    update_manifest(run.config.output_dir, "report", model_inputs(run),
                    {"profiles.csv", "senders.csv"}, run.config.seed, run.config);
    fmt::print("profiles for {} written\n", month.str());
    return exit_ok;
}

} // namespace

int run_cli(int argc, const char *const *argv) {
    auto logger = spdlog::get("remitsim");
    if (!logger) {
        logger = spdlog::stderr_logger_st("remitsim");
        logger->set_pattern("%l: %v");
    }
    spdlog::set_default_logger(logger);

    CLI::App app{"Cohort-based remittance simulation and calibration engine"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));

    GlobalOptions global;
    app.add_option("--config", global.config_path, "Run configuration file (key = value)");
    app.add_option("--seed", global.seed, "Random seed");
    app.add_option("--threads", global.threads, "Worker threads (0 = all cores)");
    app.add_option("--output-dir", global.output_dir, "Directory for outputs");
    app.add_option("--data-dir", global.data_dir, "Directory holding the input CSV files");
    app.add_option("--params", global.params_path,
                   "Calibrated parameter file (default <output-dir>/calibration.json)");

    auto *fixtures = app.add_subcommand("fixtures", "Synthetic dataset tools");
    fixtures->require_subcommand(1);
    auto *generate = fixtures->add_subcommand("generate", "Write a synthetic dataset");
    FixtureOptions fixture_options;
    generate->add_option("--origins", fixture_options.origins, "Origin countries")
        ->check(CLI::Range(1, 676));
    generate->add_option("--destinations", fixture_options.destinations, "Destination countries")
        ->check(CLI::Range(1, 676));
    generate->add_option("--events-per-origin", fixture_options.events_per_origin,
                         "Disasters per origin")
        ->check(CLI::NonNegativeNumber);
    generate->add_option("--noise", fixture_options.noise,
                         "Multiplicative panel noise standard deviation")
        ->check(CLI::NonNegativeNumber);
    generate->add_flag("--no-disasters", fixture_options.no_disasters, "Omit disasters");
    generate->add_flag("--no-panel", fixture_options.no_panel, "Omit the observed panel");

    auto *build = app.add_subcommand("build-population", "Write cohort population and demographics");

    auto *calibrate_cmd = app.add_subcommand("calibrate", "Fit behaviour parameters to the panel");
    CalibrateOptions calibrate_options;
    calibrate_cmd->add_option("--split-seed", calibrate_options.split_seed, "Train/test split seed");
    calibrate_cmd->add_option("--starts", calibrate_options.starts, "Optimizer starts");
    calibrate_cmd->add_option("--max-iter", calibrate_options.max_iter, "Iteration cap per start");
    calibrate_cmd->add_option("--tol", calibrate_options.tolerance, "Relative loss tolerance");
    calibrate_cmd->add_option("--bootstrap-reps", calibrate_options.bootstrap_reps,
                              "Bootstrap replicates for parameter intervals");

    auto *simulate = app.add_subcommand("simulate", "Expected flows and sampled bands");
    auto *counterfactual =
        app.add_subcommand("counterfactual", "Disaster-induced flows against a no-disaster world");
    auto *attribute = app.add_subcommand("attribute", "Per-hazard and per-event attribution");
    std::optional<std::string> convention;
    attribute->add_option("--convention", convention, "only_hazard or leave_one_out")
        ->check(CLI::IsMember({"only_hazard", "leave_one_out"}));
    auto *compare = app.add_subcommand("compare-baseline", "Compare against the gravity model");
    auto *report = app.add_subcommand("report", "Probability profiles and sender demographics");
    std::optional<std::string> report_month;
    report->add_option("--month", report_month, "Month for probability profiles (YYYY-MM)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        Run run = make_run(global);
        if (*fixtures) {
            finish_config(run);
            return cmd_fixtures(run, fixture_options);
        }
        if (*calibrate_cmd) {
            return cmd_calibrate(run, calibrate_options);
        }
        if (*attribute) {
            return cmd_attribute(run, convention);
        }
        finish_config(run);
        if (*build) {
            return cmd_build_population(run);
        }
        if (*simulate) {
            return cmd_simulate(run);
        }
        if (*counterfactual) {
            return cmd_counterfactual(run);
        }
        if (*compare) {
            return cmd_compare(run);
        }
        if (*report) {
            return cmd_report(run, report_month);
        }
    } catch (const MissingArtifact &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_missing_artifact;
    } catch (const CalibrationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_calibration_failure;
    } catch (const DataError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data_error;
    } catch (const DomainError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data_error;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data_error;
    }
    return exit_usage;
}

} // namespace remitsim
