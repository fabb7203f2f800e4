#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "remitsim/dataio.hpp"

namespace remitsim {

/// Fractional head counts by sex and single year of age for one corridor-month.
struct CohortTable {
    std::array<AgeArray, 2> counts{};

    const AgeArray &of(Sex sex) const { return counts[static_cast<int>(sex)]; }
    AgeArray &of(Sex sex) { return counts[static_cast<int>(sex)]; }

    double total() const;
    double total(Sex sex) const;
    /// Ages below 25, both sexes.
    double young() const;
    /// Ages 25 to 50 inclusive, both sexes.
    double parenting() const;
};

/// One simulation unit: migrants sharing origin, destination, sex, age and month.
struct MigrantCohort {
    CountryCode origin;
    CountryCode destination;
    Sex sex = Sex::male;
    int age = 0;
    YearMonth month;
    double count = 0.0;
};

struct CorridorPopulation {
    CountryCode origin;
    CountryCode destination;
    std::vector<CohortTable> months; // one per window month
};

/// Synthetic migrant population over a month window, one entry per corridor.
class Population {
  public:
    Population(YearMonth start, int month_count, std::vector<CorridorPopulation> corridors)
        : start_(start), month_count_(month_count), corridors_(std::move(corridors)) {}

    YearMonth start() const { return start_; }
    int month_count() const { return month_count_; }
    YearMonth month(int index) const { return start_ + index; }

    const std::vector<CorridorPopulation> &corridors() const { return corridors_; }

    /// Index of the (origin, destination) corridor, if present.
    std::optional<std::size_t> find(std::string_view origin, std::string_view destination) const;

    /// Flattened cohort list; cohorts whose age share is zero are omitted.
    std::vector<MigrantCohort> cohorts() const;

  private:
    YearMonth start_;
    int month_count_ = 0;
    std::vector<CorridorPopulation> corridors_;
};

/// Allocates every interpolated corridor-sex-month stock across ages 0-100 in
/// proportion to the age profile of that sex. Counts stay fractional.
Population build_population(const Dataset &dataset, YearMonth start = kWindowStart,
                            YearMonth end = kWindowEnd);

/// min(a, b) / (0.5 (a + b)); 0 when a + b = 0.
double symmetry(double a, double b);

double age_symmetry(double young, double parenting);
double age_symmetry(const CohortTable &cohorts);
double sex_symmetry(double male, double female);
double sex_symmetry(const CohortTable &cohorts);

struct DiasporaDemographics {
    CountryCode origin;
    CountryCode destination;
    YearMonth month;
    double age_symmetry = 0.0;
    double sex_symmetry = 0.0;
    double asymmetry = 0.0;
    double family = 0.0;
};

/// Pyramid asymmetry of a corridor-month; empty when the corridor-month has no migrants.
std::optional<DiasporaDemographics> family_probability(const CohortTable &cohorts);

/// Demographics for every non-empty corridor-month of the population.
std::vector<DiasporaDemographics> diaspora_demographics(const Population &population);

/// Age bands used in the sender report: [lower, upper] inclusive.
struct AgeBand {
    int lower = 0;
    int upper = 0;
    std::string label() const;
};

std::vector<AgeBand> default_sender_age_bands();

/// Expected-sender composition of one origin income group.
struct SenderDemographicsRow {
    IncomeGroup origin_income_group = IncomeGroup::low;
    double expected_senders = 0.0;
    double male_share = 0.0;
    double female_share = 0.0;
    double mean_age = 0.0;
    std::vector<double> band_shares;
    bool empty = true;
};

struct SenderDemographicsReport {
    std::vector<AgeBand> bands;
    std::vector<SenderDemographicsRow> rows; // one per income group, fixed order
    SenderDemographicsRow overall;
};

/// Probability lookup for a cohort: corridor index, month index, sex, age.
class CohortProbabilities {
  public:
    virtual ~CohortProbabilities() = default;
    virtual double probability(std::size_t corridor, int month, Sex sex, int age) const = 0;
};

/// Senders weighted by count x probability, grouped by the origin's income
/// group in the cohort's year.
SenderDemographicsReport sender_demographics(const Population &population,
                                             const CohortProbabilities &probabilities,
                                             const Dataset &dataset,
                                             const std::vector<AgeBand> &bands =
                                                 default_sender_age_bands());

} // namespace remitsim
