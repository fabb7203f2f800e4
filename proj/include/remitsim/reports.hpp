#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "remitsim/baseline.hpp"
#include "remitsim/calibration.hpp"
#include "remitsim/config.hpp"
#include "remitsim/scenarios.hpp"

namespace remitsim {

inline constexpr std::string_view kVersion = "0.1.0";

namespace fs = std::filesystem;

/// flows.csv: sender,recipient,month,amount_usd,scenario_id
void write_flows_csv(const fs::path &path,
                     const std::vector<std::pair<std::string, const std::vector<FlowMatrix> *>>
                         &scenarios);

/// bands.csv: aggregate_id,level,lower,mean,upper
void write_bands_csv(const fs::path &path, const std::vector<UncertaintyBand> &bands);

/// induced.csv: scenario_id,sender,recipient,month,amount_usd
void write_induced_csv(const fs::path &path, const ScenarioResult &result);

/// attribution.csv: per-hazard rows, then "all" (total induced) and
/// "interaction_residual" rows. Undefined ratios are left empty.
void write_attribution_csv(const fs::path &path, const AttributionReport &report);

/// events.csv: event_id,induced_usd_12m,baseline_usd_12m,relative_increase
void write_events_csv(const fs::path &path, const std::vector<EventAttribution> &events);

/// comparison.csv: sender,recipient,observed_usd,structural_usd,gravity_usd,se_structural,se_gravity
void write_comparison_csv(const fs::path &path, const ComparisonReport &report);

/// Summary by group: group,factual_usd,counterfactual_usd,induced_usd,...
void write_summary_csv(const fs::path &path, const std::vector<SummaryRow> &rows);

/// population.csv: origin,destination,sex,age,month,count (non-zero cohorts only).
void write_population_csv(const fs::path &path, const Population &population);

/// demographics.csv: origin,destination,month,age_symmetry,sex_symmetry,asymmetry,family
void write_demographics_csv(const fs::path &path,
                            const std::vector<DiasporaDemographics> &demographics);

struct ProfileSeries {
    CountryCode origin;
    std::string destination_scope; // destination code or "all"
    YearMonth month;
    std::vector<ProfilePoint> points;
};

/// profiles.csv: origin,destination_scope,month,cum_population_fraction,probability
void write_profiles_csv(const fs::path &path, const std::vector<ProfileSeries> &series);

/// senders.csv: one row per origin income group plus "all".
void write_senders_csv(const fs::path &path, const SenderDemographicsReport &report);

/// Probability profiles of every origin at one month: the whole diaspora and
/// each destination separately.
std::vector<ProfileSeries> probability_profiles(const RemittanceModel &model,
                                                const BehaviorParams &params, int month);

nlohmann::ordered_json calibration_to_json(const CalibrationResult &result,
                                           const RunConfig &config);

/// Reads the "params" object of a calibration.json file. Throws
/// MissingArtifact when the file does not exist.
BehaviorParams load_params(const fs::path &path);

class MissingArtifact : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path &path, const std::string &text);

/// Records one command in <output_dir>/manifest.json: SHA-256 of every input
/// and output file, the seed and the version. Entries of other commands
/// already in the manifest are kept.
void update_manifest(const fs::path &output_dir, const std::string &command,
                     const std::map<std::string, fs::path> &inputs,
                     const std::vector<std::string> &outputs, std::uint64_t seed,
                     const RunConfig &config);

} // namespace remitsim
