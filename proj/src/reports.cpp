#include "remitsim/reports.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "remitsim/csv.hpp"
#include "remitsim/hashing.hpp"

namespace remitsim {

namespace {

using csv::format_number;

class CsvFile {
  public:
    explicit CsvFile(const fs::path &path) : path_(path), writer_(buffer_) {}
    void row(const std::vector<std::string> &fields) { writer_.row(fields); }
    void save() const { write_text(path_, buffer_.str()); }

  private:
    fs::path path_;
    std::ostringstream buffer_;
    csv::Writer writer_;
};

std::string optional_number(const std::optional<double> &value) {
    return value ? format_number(*value) : std::string();
}

} // namespace

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError(fmt::format("cannot write {}", path.string()));
    }
    out << text;
    if (!out) {
        throw DataError(fmt::format("failed writing {}", path.string()));
    }
}

void write_flows_csv(const fs::path &path,
                     const std::vector<std::pair<std::string, const std::vector<FlowMatrix> *>>
                         &scenarios) {
    CsvFile out(path);
    out.row({"sender", "recipient", "month", "amount_usd", "scenario_id"});
    for (const auto &[id, matrices] : scenarios) {
        for (const auto &m : *matrices) {
            const std::string month = m.month.str();
            for (const auto &[key, value] : m.entries) {
                out.row({key.first, key.second, month, format_number(value), id});
            }
        }
    }
    out.save();
}

void write_bands_csv(const fs::path &path, const std::vector<UncertaintyBand> &bands) {
    CsvFile out(path);
    out.row({"aggregate_id", "level", "lower", "mean", "upper"});
    for (const auto &b : bands) {
        out.row({b.aggregate_id, format_number(b.level), format_number(b.lower),
                 format_number(b.mean), format_number(b.upper)});
    }
    out.save();
}

void write_induced_csv(const fs::path &path, const ScenarioResult &result) {
    CsvFile out(path);
    out.row({"scenario_id", "sender", "recipient", "month", "amount_usd"});
    for (const auto &m : result.induced) {
        const std::string month = m.month.str();
        for (const auto &[key, value] : m.entries) {
            out.row({result.scenario_id, key.first, key.second, month, format_number(value)});
        }
    }
    out.save();
}

void write_attribution_csv(const fs::path &path, const AttributionReport &report) {
    CsvFile out(path);
    out.row({"hazard", "induced_usd", "affected_persons", "usd_per_affected", "share_of_total"});
    double affected = 0.0;
    for (const auto &h : report.hazards) {
        out.row({std::string(to_string(h.hazard)), format_number(h.induced_usd),
                 format_number(h.affected_persons), optional_number(h.usd_per_affected),
                 format_number(h.share_of_total)});
        affected += h.affected_persons;
    }
    const double share = report.total_factual > 0.0 ? report.total_induced / report.total_factual
                                                    : 0.0;
    out.row({"all", format_number(report.total_induced), format_number(affected),
             affected > 0.0 ? format_number(report.total_induced / affected) : std::string(),
             format_number(share)});
    const double residual_share =
        report.total_factual > 0.0 ? report.interaction_residual / report.total_factual : 0.0;
    out.row({"interaction_residual", format_number(report.interaction_residual), "", "",
             format_number(residual_share)});
    out.save();
}

void write_events_csv(const fs::path &path, const std::vector<EventAttribution> &events) {
    CsvFile out(path);
    out.row({"event_id", "induced_usd_12m", "baseline_usd_12m", "relative_increase"});
    for (const auto &e : events) {
        out.row({e.event_id, format_number(e.induced_usd_12m), format_number(e.baseline_usd_12m),
                 format_number(e.relative_increase)});
    }
    out.save();
}

void write_comparison_csv(const fs::path &path, const ComparisonReport &report) {
    CsvFile out(path);
    out.row({"sender", "recipient", "observed_usd", "structural_usd", "gravity_usd",
             "se_structural", "se_gravity"});
    for (const auto &r : report.rows) {
        out.row({r.estimate.sender, r.estimate.recipient, format_number(r.estimate.observed),
                 format_number(r.estimate.structural), format_number(r.estimate.gravity),
                 format_number(r.se_structural), format_number(r.se_gravity)});
    }
    out.save();
}

void write_summary_csv(const fs::path &path, const std::vector<SummaryRow> &rows) {
    CsvFile out(path);
    out.row({"group", "factual_usd", "counterfactual_usd", "induced_usd", "share_of_induced",
             "induced_share_of_flows", "population", "induced_per_capita", "gdp_usd",
             "induced_per_gdp"});
    for (const auto &r : rows) {
        out.row({r.group, format_number(r.factual_usd), format_number(r.counterfactual_usd),
                 format_number(r.induced_usd), format_number(r.share_of_induced),
                 format_number(r.induced_share_of_flows), format_number(r.population),
                 format_number(r.induced_per_capita), format_number(r.gdp_usd),
                 format_number(r.induced_per_gdp)});
    }
    out.save();
}

void write_population_csv(const fs::path &path, const Population &population) {
    CsvFile out(path);
    out.row({"origin", "destination", "sex", "age", "month", "count"});
    for (const auto &corridor : population.corridors()) {
        for (int m = 0; m < population.month_count(); ++m) {
            const std::string month = population.month(m).str();
            const auto &table = corridor.months[m];
            for (Sex sex : kSexes) {
                const auto &counts = table.of(sex);
                for (int age = 0; age <= kMaxAge; ++age) {
                    if (counts[age] > 0.0) {
                        out.row({corridor.origin, corridor.destination,
                                 std::string(to_string(sex)), std::to_string(age), month,
                                 format_number(counts[age])});
                    }
                }
            }
        }
    }
    out.save();
}

void write_demographics_csv(const fs::path &path,
                            const std::vector<DiasporaDemographics> &demographics) {
    CsvFile out(path);
    out.row({"origin", "destination", "month", "age_symmetry", "sex_symmetry", "asymmetry",
             "family"});
    for (const auto &d : demographics) {
        out.row({d.origin, d.destination, d.month.str(), format_number(d.age_symmetry),
                 format_number(d.sex_symmetry), format_number(d.asymmetry),
                 format_number(d.family)});
    }
    out.save();
}

void write_profiles_csv(const fs::path &path, const std::vector<ProfileSeries> &series) {
    CsvFile out(path);
    out.row({"origin", "destination_scope", "month", "cum_population_fraction", "probability"});
    for (const auto &s : series) {
        const std::string month = s.month.str();
        for (const auto &p : s.points) {
            out.row({s.origin, s.destination_scope, month,
                     format_number(p.cum_population_fraction), format_number(p.probability)});
        }
    }
    out.save();
}

void write_senders_csv(const fs::path &path, const SenderDemographicsReport &report) {
    CsvFile out(path);
    std::vector<std::string> header = {"origin_income_group", "expected_senders", "male_share",
                                       "female_share", "mean_age"};
    for (const auto &band : report.bands) {
        header.push_back("share_" + band.label());
    }
    header.push_back("empty");
    out.row(header);
    auto emit = [&](const std::string &group, const SenderDemographicsRow &row) {
        std::vector<std::string> fields = {group, format_number(row.expected_senders),
                                           format_number(row.male_share),
                                           format_number(row.female_share),
                                           format_number(row.mean_age)};
        for (std::size_t b = 0; b < report.bands.size(); ++b) {
            fields.push_back(b < row.band_shares.size() ? format_number(row.band_shares[b])
                                                        : std::string("0"));
        }
        fields.push_back(row.empty ? "true" : "false");
        out.row(fields);
    };
    for (const auto &row : report.rows) {
        emit(std::string(to_string(row.origin_income_group)), row);
    }
    emit("all", report.overall);
    out.save();
}

std::vector<ProfileSeries> probability_profiles(const RemittanceModel &model,
                                                const BehaviorParams &params, int month) {
    if (month < 0 || month >= model.month_count()) {
        throw DomainError("profile month outside the model window");
    }
    const auto weights = model.all_events();
    const auto &population = model.population();
    std::map<CountryCode, std::vector<WeightedProbability>> by_origin;
    std::vector<ProfileSeries> out;
    AgeArray probs{};
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        const auto &corridor = population.corridors()[c];
        model.probabilities(c, month, params, weights, probs);
        std::vector<WeightedProbability> cohorts;
        for (Sex sex : kSexes) {
            const auto &counts = corridor.months[month].of(sex);
            for (int age = 0; age <= kMaxAge; ++age) {
                cohorts.push_back({probs[age], counts[age]});
            }
        }
        auto &all = by_origin[corridor.origin];
        all.insert(all.end(), cohorts.begin(), cohorts.end());
        out.push_back({corridor.origin, corridor.destination, population.month(month),
                       probability_profile(std::move(cohorts))});
    }
    for (auto &[origin, cohorts] : by_origin) {
        out.push_back({origin, "all", population.month(month),
                       probability_profile(std::move(cohorts))});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        return std::tie(a.origin, a.destination_scope) < std::tie(b.origin, b.destination_scope);
    });
    return out;
}

nlohmann::ordered_json calibration_to_json(const CalibrationResult &result,
                                           const RunConfig &config) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    const auto &names = BehaviorParams::names();
    const auto values = result.params.to_array();
    nlohmann::ordered_json params;
    nlohmann::ordered_json cis;
    for (std::size_t i = 0; i < names.size(); ++i) {
        params[names[i]] = values[i];
        cis[names[i]] = {result.param_cis[i].lower, result.param_cis[i].upper};
    }
    j["params"] = params;
    j["param_cis_95"] = cis;
    j["train_sse"] = result.train_sse;
    j["test_r2"] = result.test_r2;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["starts_run"] = result.starts_run;
    j["starts_diverged"] = result.starts_diverged;
    j["train_observations"] = result.train_used;
    j["test_observations"] = result.test_used;
    j["excluded_observations"] = result.excluded;
    j["bootstrap_used"] = result.bootstrap_used;
    j["bootstrap_dropped"] = result.bootstrap_dropped;
    j["seed"] = config.seed;
    j["split_seed"] = config.split_seed;
    nlohmann::ordered_json echo;
    for (const auto &[key, value] : config.echo()) {
        echo[key] = value;
    }
    j["config"] = echo;
    return j;
}

BehaviorParams load_params(const fs::path &path) {
    if (!fs::exists(path)) {
        throw MissingArtifact(fmt::format("parameter file {} not found; run calibrate first",
                                          path.string()));
    }
    std::ifstream in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
    if (!j.contains("params") || !j["params"].is_object()) {
        throw DataError(fmt::format("{}: missing \"params\" object", path.string()));
    }
    const auto &names = BehaviorParams::names();
    std::array<double, BehaviorParams::kCount> values{};
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto &p = j["params"];
        if (!p.contains(names[i]) || !p[names[i]].is_number()) {
            throw DataError(
                fmt::format("{}: parameter '{}' missing or not a number", path.string(), names[i]));
        }
        values[i] = p[names[i]].get<double>();
    }
    auto params = BehaviorParams::from_array(values);
    try {
        params.validate();
    } catch (const DomainError &e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return params;
}

void update_manifest(const fs::path &output_dir, const std::string &command,
                     const std::map<std::string, fs::path> &inputs,
                     const std::vector<std::string> &outputs, std::uint64_t seed,
                     const RunConfig &config) {
    const fs::path path = output_dir / "manifest.json";
    nlohmann::json manifest = nlohmann::json::object();
    if (fs::exists(path)) {
        std::ifstream in(path);
        manifest = nlohmann::json::parse(in, nullptr, false);
        if (manifest.is_discarded() || !manifest.is_object()) {
            manifest = nlohmann::json::object();
        }
    }
    manifest["version"] = kVersion;
    nlohmann::json entry;
    entry["seed"] = seed;
    for (const auto &[key, value] : config.echo()) {
        entry["config"][key] = value;
    }
    entry["inputs"] = nlohmann::json::object();
    for (const auto &[role, file] : inputs) {
        entry["inputs"][role] = sha256_file(file);
    }
    entry["outputs"] = nlohmann::json::object();
    for (const auto &name : outputs) {
        entry["outputs"][name] = sha256_file(output_dir / name);
    }
    manifest["commands"][command] = entry;
    write_text(path, manifest.dump(2) + "\n");
}

} // namespace remitsim
