#pragma once

#include <cstdint>
#include <string>

#include "remitsim/behavior.hpp"
#include "remitsim/dataio.hpp"

namespace remitsim {

/// Synthetic desk-scale dataset description. Every origin is linked to every
/// destination, so the corridor count is origins x destinations.
struct FixtureSpec {
    int origins = 10;
    int destinations = 5;
    std::uint64_t seed = 1;
    bool with_disasters = true;
    int events_per_origin = 4;
    bool with_panel = true;
    /// Standard deviation of the multiplicative panel noise (0 = noiseless).
    double panel_noise = 0.0;
    /// Parameters that generate the panel.
    BehaviorParams params = BehaviorParams::published();
};

/// Country code for synthetic origin / destination number i ("OAA", "DAB", ...).
std::string origin_code(int index);
std::string destination_code(int index);

/// Economics, stocks, age and surplus profiles, disasters and (optionally) a
/// panel generated from the expected-value model under `spec.params`. Panel
/// noise is 1 + noise * z with z standard normal, floored at 0.
Tables generate_fixture(const FixtureSpec &spec);

/// Panel of every corridor-month generated from the model's expected flows.
std::vector<PanelObservation> generate_panel(const Dataset &dataset, const BehaviorParams &params,
                                             double noise, std::uint64_t seed);

/// One origin, one destination and a single earthquake affecting the whole
/// origin population, with covariates placing the diaspora at a low sending
/// probability.
Tables large_event_fixture();

/// Two origins sharing one destination. The earthquake origin has a large
/// diaspora relative to its population and few affected people; the drought
/// origin is populous with many affected people and the same diaspora.
Tables earthquake_drought_fixture();

} // namespace remitsim
