#pragma once

#include <span>
#include <vector>

#include "remitsim/behavior.hpp"
#include "remitsim/dataio.hpp"
#include "remitsim/population.hpp"

namespace remitsim {

/// Per-event multiplier on disaster magnitude, indexed like the dataset's
/// disaster table: 1 keeps the event as observed, 0 removes it.
using EventWeights = std::vector<double>;

struct ModelOptions {
    bool delta_gdp_clamp = false;
};

/// Parameter-independent covariates of one corridor-month.
struct CorridorMonthCovariates {
    double family = 0.0;
    double delta_gdp = 0.0;
    double gdp_norm = 0.0;
    /// Destination GDP per capita / 12.
    double gdp_dest_monthly = 0.0;
};

/// An event whose 12-month window covers a given month.
struct DisasterExposure {
    std::size_t event = 0;
    int offset = 0;
    double magnitude = 0.0;
};

/// Population plus every parameter-independent covariate, precomputed once.
/// Immutable after construction; safe to share across threads.
class RemittanceModel {
  public:
    RemittanceModel(const Dataset &dataset, Population population, ModelOptions options = {});

    const Dataset &dataset() const { return *dataset_; }
    const Population &population() const { return population_; }
    const ModelOptions &options() const { return options_; }

    std::size_t corridor_count() const { return population_.corridors().size(); }
    int month_count() const { return population_.month_count(); }
    std::size_t event_count() const { return dataset_->tables().disasters.size(); }

    const CorridorMonthCovariates &covariates(std::size_t corridor, int month) const {
        return covariates_[corridor * month_count() + month];
    }
    const AgeArray &surplus(std::size_t corridor) const { return *surplus_[corridor]; }
    std::span<const DisasterExposure> exposures(std::size_t corridor, int month) const;
    const GdpNormalizer &gdp_normalizer() const { return normalizer_; }

    EventWeights all_events() const { return EventWeights(event_count(), 1.0); }
    EventWeights no_events() const { return EventWeights(event_count(), 0.0); }

    double disaster_score(std::size_t corridor, int month, const BehaviorParams &params,
                          const EventWeights &weights) const;

    CovariateVector covariate_vector(std::size_t corridor, int month, int age,
                                     const BehaviorParams &params,
                                     const EventWeights &weights) const;

    /// Probability per age (identical for both sexes).
    void probabilities(std::size_t corridor, int month, const BehaviorParams &params,
                       const EventWeights &weights, AgeArray &out) const;

    /// Expected USD flow from the destination to the origin of the corridor in that month.
    double expected_flow(std::size_t corridor, int month, const BehaviorParams &params,
                         const EventWeights &weights) const;

  private:
    const Dataset *dataset_;
    Population population_;
    ModelOptions options_;
    GdpNormalizer normalizer_;
    std::vector<CorridorMonthCovariates> covariates_;
    std::vector<const AgeArray *> surplus_;
    std::vector<std::size_t> origin_slot_;
    // exposures_[origin_slot * months + month]
    std::vector<std::vector<DisasterExposure>> exposures_;
};

/// Adapts a model + parameter set to the cohort probability lookup used by reports.
class ModelProbabilities : public CohortProbabilities {
  public:
    ModelProbabilities(const RemittanceModel &model, BehaviorParams params, EventWeights weights);
    double probability(std::size_t corridor, int month, Sex sex, int age) const override;

  private:
    const RemittanceModel &model_;
    BehaviorParams params_;
    EventWeights weights_;
    std::vector<AgeArray> cache_;
};

} // namespace remitsim
