#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "remitsim/model.hpp"

namespace remitsim {

/// (sender, recipient) pair. The sender is the migrants' country of residence.
using FlowKey = std::pair<CountryCode, CountryCode>;

struct FlowMatrix {
    YearMonth month;
    std::map<FlowKey, double> entries;

    double total() const;
    bool operator==(const FlowMatrix &) const = default;
};

struct UncertaintyBand {
    std::string aggregate_id;
    double level = 0.95;
    double lower = 0.0;
    double mean = 0.0;
    double upper = 0.0;
};

/// Sum over cohorts of count x P x rho x monthly GDP; the exact expectation of
/// the Bernoulli sum.
double expected_flow(std::span<const double> counts, std::span<const double> probabilities,
                     double rho, double gdp_dest_monthly);

/// One matrix per model month under the given event weights. Corridors with
/// zero flow are kept so every matrix has the same key set.
std::vector<FlowMatrix> build_flow_matrices(const RemittanceModel &model,
                                            const BehaviorParams &params,
                                            const EventWeights &weights, int threads = 1);

/// Sender counts per draw. Counts are rounded half-to-even and each cohort
/// contributes binomial(count, P) drawn from its own stream derived from
/// (seed, cohort index). Reproducible given the seed.
std::vector<long long> sample_senders(std::span<const double> counts,
                                      std::span<const double> probabilities, std::uint64_t seed,
                                      int draws);

/// Sampled USD totals: senders x rho x monthly GDP per draw.
std::vector<double> sample_flows(std::span<const double> counts,
                                 std::span<const double> probabilities, double rho,
                                 double gdp_dest_monthly, std::uint64_t seed, int draws);

/// Sampled totals per model month, indexed [month][draw]. Each corridor-month
/// uses its own stream derived from (seed, corridor, month), so runs with the
/// same seed but different weights share random numbers.
std::vector<std::vector<double>> sample_monthly_totals(const RemittanceModel &model,
                                                       const BehaviorParams &params,
                                                       const EventWeights &weights,
                                                       std::uint64_t seed, int draws,
                                                       int threads = 1);

/// Sampled totals summed over every corridor-month of the model.
std::vector<double> sample_model_totals(const RemittanceModel &model,
                                        const BehaviorParams &params,
                                        const EventWeights &weights, std::uint64_t seed,
                                        int draws, int threads = 1);

inline constexpr std::size_t kMinBandSamples = 1000;

/// Empirical 2.5 / 97.5 percentiles (linear interpolation between order
/// statistics) and the sample mean. Needs at least 1000 samples.
UncertaintyBand confidence_band(std::span<const double> samples, std::string aggregate_id = {});

/// Linear-interpolation quantile of unsorted samples, q in [0,1].
double empirical_quantile(std::vector<double> samples, double q);

} // namespace remitsim
