// Acceptance gate: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "remitsim/baseline.hpp"
#include "remitsim/behavior.hpp"
#include "remitsim/calibration.hpp"
#include "remitsim/cli.hpp"
#include "remitsim/fixtures.hpp"
#include "remitsim/flows.hpp"
#include "remitsim/hashing.hpp"
#include "remitsim/reports.hpp"
#include "remitsim/scenarios.hpp"
#include "support.hpp"

using namespace remitsim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome kernel_shape() {
    const auto p = BehaviorParams::published();
    std::vector<double> k(12);
    bool ok = true;
    for (int offset = -6; offset < 18; ++offset) {
        const double v = disaster_kernel(offset, p);
        if (offset < 0 || offset > 11) {
            ok = ok && v == 0.0;
        } else {
            k[offset] = v;
        }
    }
    for (int offset = 0; offset <= 8; ++offset) {
        ok = ok && k[offset] > 0.0;
    }
    for (int offset = 9; offset <= 11; ++offset) {
        ok = ok && k[offset] < 0.0;
    }
    const int peak = static_cast<int>(std::max_element(k.begin(), k.end()) - k.begin());
    ok = ok && std::abs(peak - 4) <= 1;
    return {ok, fmt::format("peak offset {}, k(8)={:.4f}, k(9)={:.4f}", peak, k[8], k[9])};
}

Outcome theta_fixture() {
    const auto p = BehaviorParams::published();
    const double t = theta({1.2, 0.3, 0.8, 0.1, 0.0}, p);
    const double pr = probability(t);
    // Independent evaluation with the literal published coefficients.
    const double oracle_t = 0.02 + 1.08 * 1.2 - 4.65 * 0.3 + 2.83 * 0.8 - 3.67 * 0.1;
    const double oracle_p = 1.0 / (1.0 + std::exp(-oracle_t));
    const bool ok = std::abs(t - 1.818) <= 1e-3 && std::abs(pr - 0.860) <= 1e-3 &&
                    std::abs(t - oracle_t) <= 1e-12 && std::abs(pr - oracle_p) <= 1e-12;
    return {ok, fmt::format("theta={:.6f} P={:.6f} (oracle {:.6f}, {:.6f})", t, pr, oracle_t,
                            oracle_p)};
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

Outcome parameter_recovery() {
    FixtureSpec spec; // 10 origins x 5 destinations = 50 corridors, 120 months
    const Dataset dataset = Dataset::from_tables(generate_fixture(spec));
    const RemittanceModel model(dataset, build_population(dataset));
    const auto panel = split_panel(dataset.tables().panel, 0.8, 7);
    OptimizerConfig config;
    config.starts = 1;
    const auto result = calibrate(model, panel, config, 42);
    const auto truth = BehaviorParams::published();
    const auto &got = result.params;
    double worst_beta = 0.0;
    for (auto [g, t] : {std::pair{got.beta0, truth.beta0}, std::pair{got.beta1, truth.beta1},
                        std::pair{got.beta2, truth.beta2}, std::pair{got.beta3, truth.beta3}}) {
        worst_beta = std::max(worst_beta, rel_err(g, t));
    }
    const double rho = rel_err(got.rho, truth.rho);
    const bool ok = worst_beta < 0.05 && rho < 0.02 && result.test_r2 > 0.99;
    return {ok, fmt::format("corridors={} worst beta rel err={:.2e} rho rel err={:.2e} "
                            "test R2={:.6f} iterations={}",
                            model.corridor_count(), worst_beta, rho, result.test_r2,
                            result.iterations)};
}

Outcome noisy_fit() {
    FixtureSpec spec;
    spec.panel_noise = 0.10;
    const Dataset dataset = Dataset::from_tables(generate_fixture(spec));
    const RemittanceModel model(dataset, build_population(dataset));
    const auto panel = split_panel(dataset.tables().panel, 0.8, 7);
    const auto result = calibrate(model, panel, OptimizerConfig{}, 42);
    return {result.test_r2 >= 0.9,
            fmt::format("test R2={:.4f} over {} held-out observations ({} starts)",
                        result.test_r2, result.test_used, result.starts_run)};
}

/// Cohort counts and probabilities of one corridor-month, sexes merged per age.
struct CorridorMonth {
    std::vector<double> counts;
    std::vector<double> probabilities;
    double gdp_monthly = 0.0;
};

CorridorMonth corridor_month(const RemittanceModel &model, std::size_t c, int m,
                             const BehaviorParams &params) {
    CorridorMonth out;
    AgeArray p{};
    model.probabilities(c, m, params, model.all_events(), p);
    const auto &table = model.population().corridors()[c].months[m];
    for (int age = 0; age <= kMaxAge; ++age) {
        for (Sex sex : kSexes) {
            if (table.of(sex)[age] > 0.0) {
                out.counts.push_back(table.of(sex)[age]);
                out.probabilities.push_back(p[age]);
            }
        }
    }
    out.gdp_monthly = model.covariates(c, m).gdp_dest_monthly;
    return out;
}

Outcome sampler_oracle() {
    FixtureSpec spec;
    spec.origins = 5;
    spec.destinations = 2;
    spec.with_panel = false;
    const Dataset dataset = Dataset::from_tables(generate_fixture(spec));
    const RemittanceModel model(dataset, build_population(dataset));
    const auto params = BehaviorParams::published();
    constexpr int kDraws = 10000;
    const int month = 63;
    double worst_z = 0.0;
    double worst_var = 0.0;
    double worst_rounding = 0.0;
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        const auto cm = corridor_month(model, c, month, params);
        // The sampler consumes half-to-even rounded counts.
        std::vector<double> rounded;
        for (double n : cm.counts) {
            rounded.push_back(std::nearbyint(n));
        }
        const double scale = params.rho * cm.gdp_monthly;
        const double expected = expected_flow(rounded, cm.probabilities, params.rho,
                                              cm.gdp_monthly);
        const double exact = expected_flow(cm.counts, cm.probabilities, params.rho,
                                           cm.gdp_monthly);
        double var_senders = 0.0;
        for (std::size_t i = 0; i < rounded.size(); ++i) {
            var_senders += rounded[i] * cm.probabilities[i] * (1.0 - cm.probabilities[i]);
        }
        const auto samples =
            sample_flows(cm.counts, cm.probabilities, params.rho, cm.gdp_monthly,
                         mix_seed(2024, c), kDraws);
        double mean = 0.0;
        for (double s : samples) {
            mean += s;
        }
        mean /= kDraws;
        double var = 0.0;
        for (double s : samples) {
            var += (s - mean) * (s - mean);
        }
        var /= kDraws - 1;
        const double se = std::sqrt(var_senders) * scale / std::sqrt(double(kDraws));
        worst_z = std::max(worst_z, std::abs(mean - expected) / se);
        worst_var = std::max(worst_var, std::abs(var / (scale * scale) / var_senders - 1.0));
        worst_rounding = std::max(worst_rounding, std::abs(expected - exact) / exact);
    }
    const bool ok = worst_z < 3.0 && worst_var < 0.05;
    return {ok, fmt::format("{} corridors, worst |mean-E|/SE={:.2f}, worst variance rel "
                            "err={:.3f}, rounding effect on E <= {:.1e}",
                            model.corridor_count(), worst_z, worst_var, worst_rounding)};
}

Outcome ci_coverage() {
    FixtureSpec spec;
    spec.origins = 2;
    spec.destinations = 1;
    spec.with_panel = false;
    const Dataset dataset = Dataset::from_tables(generate_fixture(spec));
    const RemittanceModel model(dataset, build_population(dataset));
    const auto params = BehaviorParams::published();
    std::size_t best = 0;
    double best_flow = -1.0;
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        const double f = model.expected_flow(c, 100, params, model.all_events());
        if (f > best_flow) {
            best_flow = f;
            best = c;
        }
    }
    const auto cm = corridor_month(model, best, 100, params);
    std::vector<double> rounded;
    for (double n : cm.counts) {
        rounded.push_back(std::nearbyint(n));
    }
    const double truth = expected_flow(rounded, cm.probabilities, params.rho, cm.gdp_monthly);
    const auto band_samples =
        sample_flows(cm.counts, cm.probabilities, params.rho, cm.gdp_monthly, 11, 10000);
    const auto band = confidence_band(band_samples, "corridor");
    // Each replicate is an independent realized total x; its band is the
    // nominal band carried along with x, i.e. [x - (mean - lower), x + (upper - mean)].
    constexpr int kReplicates = 10000;
    const auto replicates =
        sample_flows(cm.counts, cm.probabilities, params.rho, cm.gdp_monthly, 12, kReplicates);
    int covered = 0;
    for (double x : replicates) {
        if (x - (band.mean - band.lower) <= truth && truth <= x + (band.upper - band.mean)) {
            ++covered;
        }
    }
    const double coverage = double(covered) / kReplicates;
    return {std::abs(coverage - 0.95) <= 0.02,
            fmt::format("coverage {:.4f} over {} replicates (band width {:.4g} USD)", coverage,
                        kReplicates, band.upper - band.lower)};
}

Outcome counterfactual_identities() {
    const auto params = BehaviorParams::published();
    std::vector<std::string> failures;

    FixtureSpec quiet;
    quiet.origins = 3;
    quiet.destinations = 2;
    quiet.with_disasters = false;
    quiet.with_panel = false;
    {
        const Dataset dataset = Dataset::from_tables(generate_fixture(quiet));
        const RemittanceModel model(dataset, build_population(dataset));
        const auto result = run_counterfactual(model, params, Scenario::no_disaster(model));
        for (const auto &m : result.induced) {
            for (const auto &[key, v] : m.entries) {
                if (v != 0.0) {
                    failures.push_back("zero-event induced nonzero");
                }
            }
        }
    }

    FixtureSpec spec; // 50 corridors, overlapping event pairs of different hazards
    spec.with_panel = false;
    const Dataset dataset = Dataset::from_tables(generate_fixture(spec));
    const RemittanceModel model(dataset, build_population(dataset));
    std::size_t checked = 0;
    for (std::size_t e = 0; e < model.event_count(); e += 7) {
        const auto &event = dataset.tables().disasters[e];
        const auto result = run_counterfactual(model, params, Scenario::no_disaster(model), 1,
                                               Scenario::only_event(model, e).weights);
        for (std::size_t m = 0; m < result.induced.size(); ++m) {
            const int offset = result.induced[m].month - event.onset;
            for (const auto &[key, v] : result.induced[m].entries) {
                const bool in_scope = key.second == event.country && offset >= 0 && offset < 12;
                if (!in_scope && v != 0.0) {
                    failures.push_back("event " + event.event_id + " leaks");
                }
            }
        }
        ++checked;
    }

    const auto full = attribute_by_hazard(model, params, AttributionConvention::only_hazard);
    const auto half = attribute_by_hazard(model, params, AttributionConvention::only_hazard, 1,
                                          EventWeights(model.event_count(), 0.5));
    const double ratio = full.interaction_residual / half.interaction_residual;
    const bool ratio_ok = std::abs(ratio - 4.0) <= 0.5;
    const bool ok = failures.empty() && ratio_ok;
    return {ok, fmt::format("{} single-event scenarios checked, {} violations; residual "
                            "{:.4g} -> {:.4g} USD, ratio {:.3f}",
                            checked, failures.size(), full.interaction_residual,
                            half.interaction_residual, ratio)};
}

Outcome gravity_fixture() {
    // Table 3 row in billions of USD.
    ComparisonReport report =
        compare_estimates({CorridorEstimate{"USA", "MEX", 27.46, 26.49, 123.28}});
    const auto &row = report.rows.front();
    const double oracle_s = (26.49 - 27.46) * (26.49 - 27.46);
    const double oracle_g = (123.28 - 27.46) * (123.28 - 27.46);
    const bool table_ok = std::abs(row.se_structural - oracle_s) < 1e-9 &&
                          std::abs(row.se_gravity - oracle_g) < 1e-9 &&
                          rel_err(row.se_structural, 0.95) <= 0.02 &&
                          rel_err(row.se_gravity, 9181.54) <= 0.02;

    FixtureSpec spec;
    spec.origins = 6;
    spec.destinations = 3;
    spec.with_panel = false;
    const Dataset base = Dataset::from_tables(generate_fixture(spec));
    const double planted = 0.75;
    std::vector<PanelObservation> panel;
    for (const auto &year : gravity_flows(base, planted)) {
        for (const auto &[key, v] : year.entries) {
            for (int month = 1; month <= 12; ++month) {
                panel.push_back({key.first, key.second, YearMonth(year.year, month), v / 12.0});
            }
        }
    }
    const auto fit = calibrate_gravity(panel, base);
    const bool beta_ok = std::abs(fit.beta_exp - planted) <= 0.01;
    return {table_ok && beta_ok,
            fmt::format("squared errors {:.4f} / {:.2f} vs table 0.95 / 9181.54; planted beta "
                        "{} recovered {:.5f}",
                        row.se_structural, row.se_gravity, planted, fit.beta_exp)};
}

Outcome activation_maximum() {
    bool ok = true;
    std::string detail;
    for (double delta : {0.1, 0.34, 1.0}) {
        double best_theta = 0.0;
        double best = -1.0;
        for (int i = -1000; i <= 1000; ++i) {
            const double t = i * 0.01;
            const double v = activation_capacity(t, delta);
            if (v > best) {
                best = v;
                best_theta = t;
            }
        }
        ok = ok && std::abs(best_theta + delta / 2.0) <= 0.01 + 1e-12;
        detail += fmt::format("delta {} argmax {:.2f}; ", delta, best_theta);
    }
    return {ok, detail};
}

int cli(std::vector<std::string> args) {
    std::vector<const char *> argv{"remitsim"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome end_to_end() {
    testing::TempDir root("acceptance");
    const auto data = root / "data";
    if (cli({"--seed", "5", "--output-dir", data.string(), "fixtures", "generate", "--origins",
             "3", "--destinations", "2"}) != exit_ok) {
        return {false, "fixture generation failed"};
    }
    CalibrationResult published;
    published.params = BehaviorParams::published();
    write_text(root / "params.json", calibration_to_json(published, RunConfig{}).dump(2));

    const std::vector<std::string> outputs = {
        "flows.csv",       "bands.csv",          "induced.csv", "induced_bands.csv",
        "summary_year.csv", "summary_country.csv", "summary_income_group.csv"};
    for (const char *run : {"run1", "run2"}) {
        for (const char *command : {"simulate", "counterfactual"}) {
            const int code = cli({"--seed", "99", "--data-dir", data.string(), "--params",
                                  (root / "params.json").string(), "--output-dir",
                                  (root / run).string(), command});
            if (code != exit_ok) {
                return {false, fmt::format("{} exited {}", command, code)};
            }
        }
    }
    std::size_t identical = 0;
    for (const auto &name : outputs) {
        const auto a = testing::slurp(root / "run1" / name);
        if (!a.empty() && a == testing::slurp(root / "run2" / name)) {
            ++identical;
        }
    }
    return {identical == outputs.size(),
            fmt::format("{}/{} CSV outputs byte-identical", identical, outputs.size())};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"disaster kernel shape", kernel_shape},
        {"logistic/theta unit fixture", theta_fixture},
        {"parameter recovery (noiseless 50x120)", parameter_recovery},
        {"held-out fit on 10% noise panel", noisy_fit},
        {"sampler-oracle equivalence", sampler_oracle},
        {"confidence band coverage", ci_coverage},
        {"counterfactual identities", counterfactual_identities},
        {"gravity baseline fixture", gravity_fixture},
        {"activation maximum at -delta/2", activation_maximum},
        {"end-to-end reproducibility", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception &e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += outcome.pass ? 0 : 1;
        fmt::print("{} [{}] {}: {} ({:.1f} s)\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                   criteria[i].first, outcome.detail, seconds);
        std::fflush(stdout);
    }
    fmt::print("{} of {} acceptance criteria passed\n", criteria.size() - failed,
               criteria.size());
    return failed == 0 ? 0 : 1;
}
