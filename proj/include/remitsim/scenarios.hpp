#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "remitsim/config.hpp"
#include "remitsim/flows.hpp"

namespace remitsim {

/// A named set of per-event magnitude weights.
struct Scenario {
    std::string id;
    EventWeights weights;

    static Scenario factual(const RemittanceModel &model);
    static Scenario no_disaster(const RemittanceModel &model);
    static Scenario only_hazard(const RemittanceModel &model, Hazard hazard);
    static Scenario all_but_hazard(const RemittanceModel &model, Hazard hazard);
    static Scenario only_event(const RemittanceModel &model, std::size_t event_index);
};

struct ScenarioResult {
    std::string scenario_id;
    std::vector<FlowMatrix> factual;
    std::vector<FlowMatrix> counterfactual;
    /// factual - counterfactual, entrywise.
    std::vector<FlowMatrix> induced;

    double total_factual() const;
    double total_counterfactual() const;
    double total_induced() const;
};

/// Factual run with `factual_weights` (all events when empty) against the
/// counterfactual scenario.
ScenarioResult run_counterfactual(const RemittanceModel &model, const BehaviorParams &params,
                                  const Scenario &counterfactual, int threads = 1,
                                  EventWeights factual_weights = {});

struct HazardAttribution {
    Hazard hazard = Hazard::flood;
    double induced_usd = 0.0;
    double affected_persons = 0.0;
    /// Empty when no persons were affected by this hazard.
    std::optional<double> usd_per_affected;
    double share_of_total = 0.0;
};

struct AttributionReport {
    AttributionConvention convention = AttributionConvention::only_hazard;
    double total_factual = 0.0;
    double total_induced = 0.0;
    std::vector<HazardAttribution> hazards; // kHazards order
    /// total_induced - sum of per-hazard induced; reported, never forced to 0.
    double interaction_residual = 0.0;
};

/// Per-hazard induced flows. only_hazard: flows(only h) - flows(none);
/// leave_one_out: flows(all) - flows(all but h). Affected persons count events
/// whose response window overlaps the model window. `base_weights` scales
/// every event (defaults to all events at weight 1).
AttributionReport attribute_by_hazard(const RemittanceModel &model, const BehaviorParams &params,
                                      AttributionConvention convention, int threads = 1,
                                      EventWeights base_weights = {});

struct EventAttribution {
    std::string event_id;
    std::map<FlowKey, double> induced_by_corridor;
    double induced_usd_12m = 0.0;
    double baseline_usd_12m = 0.0;
    double relative_increase = 0.0;
};

/// flows(only this event) - flows(none) over the onset month and the 11
/// following months, per corridor and total. Baseline is the no-disaster
/// flow over the same corridor-months. Throws DataError for unknown ids.
EventAttribution attribute_event(const RemittanceModel &model, const BehaviorParams &params,
                                 const std::string &event_id);

/// Band for total induced flows: factual and counterfactual totals drawn
/// with common random numbers, differenced per draw.
UncertaintyBand induced_band(const RemittanceModel &model, const BehaviorParams &params,
                             const Scenario &counterfactual, std::uint64_t seed, int draws,
                             int threads = 1);

enum class Grouping { income_group, country, year };

std::string_view to_string(Grouping grouping);

struct SummaryRow {
    std::string group;
    double factual_usd = 0.0;
    double counterfactual_usd = 0.0;
    double induced_usd = 0.0;
    /// Share of all induced flows falling into this group.
    double share_of_induced = 0.0;
    /// induced / factual within the group.
    double induced_share_of_flows = 0.0;
    /// Recipient population (mean over the years covered).
    double population = 0.0;
    double induced_per_capita = 0.0;
    /// Recipient GDP in USD (mean annual, gdp_per_capita x population).
    double gdp_usd = 0.0;
    double induced_per_gdp = 0.0;
};

/// Groups flows by recipient income group, recipient country, or calendar year.
std::vector<SummaryRow> summarize(const ScenarioResult &result, const Dataset &dataset,
                                  Grouping grouping);

} // namespace remitsim
