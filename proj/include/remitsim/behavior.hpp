#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "remitsim/dataio.hpp"

namespace remitsim {

/// The nine calibrated behaviour parameters.
struct BehaviorParams {
    double alpha = 0.0;
    double beta0 = 0.0; // surplus
    double beta1 = 0.0; // family
    double beta2 = 0.0; // delta GDP
    double beta3 = 0.0; // normalised origin GDP
    double height = 0.1;
    double shape = 0.1;
    double shift = 0.0;
    double rho = 0.1;

    static constexpr std::size_t kCount = 9;
    static const std::array<const char *, kCount> &names();

    std::array<double, kCount> to_array() const;
    static BehaviorParams from_array(const std::array<double, kCount> &values);

    /// Throws DomainError unless rho is in (0,1) and every field is finite.
    void validate() const;

    /// Published point estimates used as generating values in fixtures.
    static BehaviorParams published();

    bool operator==(const BehaviorParams &) const = default;
};

struct CovariateVector {
    double surplus = 0.0;
    double family = 0.0;
    double delta_gdp = 0.0;
    double gdp_norm = 0.0;
    double disaster_score = 0.0;
};

/// Relative GDP-per-capita gap between destination and origin, following the
/// printed piecewise form. Antisymmetric under argument swap; not bounded to
/// [-1,1] unless `clamp` is set.
double delta_gdp(double gdp_dest, double gdp_origin, bool clamp = false);

/// Global min-max normaliser over a set of GDP values.
class GdpNormalizer {
  public:
    explicit GdpNormalizer(std::span<const double> values);

    double operator()(double gdp) const;
    double min() const { return min_; }
    double max() const { return max_; }
    /// True when all input values were identical (everything maps to 0).
    bool degenerate() const { return degenerate_; }

  private:
    double min_ = 0.0;
    double max_ = 0.0;
    bool degenerate_ = false;
};

/// Normalises each value of the set against the set's own min and max.
std::vector<double> gdp_norm(std::span<const double> values);

/// height + shape * sin(pi/6 * (offset + shift)) for offsets 0..11, else 0.
double disaster_kernel(int offset, const BehaviorParams &params);

/// Share of the population affected, clamped to 1.
double disaster_magnitude(double affected, double population);

/// Sum over events whose onset lies 0..11 months before `month`.
double disaster_score(std::span<const DisasterEvent> events, YearMonth month, double population,
                      const BehaviorParams &params);

/// Linear score when surplus > 0, -infinity (never remits) otherwise.
double theta(const CovariateVector &cov, const BehaviorParams &params);

/// Logistic transform. theta = -infinity maps to exactly 0.
double probability(double theta);

/// d/dtheta of the logistic, sigma (1 - sigma).
double probability_slope(double theta);

/// sigma(theta + delta) - sigma(theta). Maximised over theta at -delta/2.
double activation_capacity(double theta, double delta);

struct WeightedProbability {
    double probability = 0.0;
    double count = 0.0;
};

struct ProfilePoint {
    /// Cumulative population share up to and including this cohort.
    double cum_population_fraction = 0.0;
    double probability = 0.0;
};

/// Cohorts sorted by descending probability against the cumulative population
/// share. Zero-count cohorts are dropped; an empty or all-zero input gives an
/// empty profile.
std::vector<ProfilePoint> probability_profile(std::vector<WeightedProbability> cohorts);

} // namespace remitsim
