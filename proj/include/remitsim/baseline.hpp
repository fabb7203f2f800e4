#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "remitsim/flows.hpp"

namespace remitsim {

/// Gravity-model remittance per migrant: y_origin when the destination is
/// poorer, else y_origin + (y_dest - y_origin)^beta.
double gravity_per_migrant(double y_dest, double y_origin, double beta_exp);

struct AnnualFlowMatrix {
    int year = 0;
    std::map<FlowKey, double> entries;
};

/// Annual gravity flows per corridor: per-migrant amount x mean monthly stock
/// of the year (both sexes), with that year's GDP per capita.
std::vector<AnnualFlowMatrix> gravity_flows(const Dataset &dataset, double beta_exp,
                                            int first_year = kWindowStart.year(),
                                            int last_year = kWindowEnd.year());

/// Row sums by recipient.
std::map<CountryCode, double> recipient_totals(const AnnualFlowMatrix &matrix);

struct GravityFit {
    double beta_exp = 0.0;
    double sse = 0.0;
    /// Optimum sits on the (widened) search boundary.
    bool at_boundary = false;
    /// Loss flat or not unimodal: beta is the best grid point.
    bool warning = false;
    std::string message;
};

/// Golden-section minimisation of the SSE between monthly observations and
/// annual gravity flows / 12. Starts on [0.01, 2]; widens once to
/// [0.001, 4] when the optimum hits an edge.
GravityFit calibrate_gravity(std::span<const PanelObservation> panel, const Dataset &dataset);

/// One corridor's yearly-average observed and estimated flows.
struct CorridorEstimate {
    CountryCode sender;
    CountryCode recipient;
    double observed = 0.0;
    double structural = 0.0;
    double gravity = 0.0;
};

struct ComparisonRow {
    CorridorEstimate estimate;
    double se_structural = 0.0;
    double se_gravity = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double mean_relative_error_structural = 0.0;
    double mean_relative_error_gravity = 0.0;
    /// structural / gravity mean relative error; 1 when both are 0.
    double error_ratio = 1.0;
    std::size_t excluded = 0;
    /// Largest signed errors (estimate - observed), up to five each.
    std::vector<ComparisonRow> largest_over_structural;
    std::vector<ComparisonRow> largest_under_structural;
    std::vector<ComparisonRow> largest_over_gravity;
    std::vector<ComparisonRow> largest_under_gravity;
};

/// Squared errors and relative-error summary. Corridors with zero observed
/// flow are kept in the squared errors but skipped in relative errors.
ComparisonReport compare_estimates(std::vector<CorridorEstimate> estimates,
                                   std::size_t excluded = 0);

/// Aggregates both models over the panel months of each corridor to yearly
/// averages (sum x 12 / months) and compares them. Corridors missing from
/// either estimate are excluded and counted.
ComparisonReport compare_models(const std::vector<FlowMatrix> &structural,
                                const std::vector<AnnualFlowMatrix> &gravity,
                                std::span<const PanelObservation> panel);

} // namespace remitsim
