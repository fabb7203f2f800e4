#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "remitsim/config.hpp"
#include "remitsim/model.hpp"

namespace remitsim {

/// Tags each observation train or test. Observation mode shuffles rows; corridor
/// mode shuffles (sender, recipient) pairs so a corridor lands entirely in one
/// side. The train count is round(fraction * n) in observation mode.
std::vector<PanelObservation> split_panel(std::vector<PanelObservation> panel, double fraction,
                                          std::uint64_t seed,
                                          SplitMode mode = SplitMode::observation);

struct LossReport {
    double sse = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
};

/// Panel observations compiled against a model for fast repeated evaluation.
/// Observations whose corridor has no modelled population, or whose month is
/// outside the model window, are excluded and counted.
class PanelObjective {
  public:
    PanelObjective(const RemittanceModel &model, std::span<const PanelObservation> observations,
                   bool corridor_weighted = false, EventWeights weights = {});

    std::size_t size() const { return observed_.size(); }
    std::size_t excluded() const { return excluded_; }
    double observed(std::size_t i) const { return observed_[i]; }
    double weight(std::size_t i) const { return weight_[i]; }

    /// Expected-value simulated flow for observation i.
    double simulated(std::size_t i, const BehaviorParams &params) const;
    std::vector<double> simulated_all(const BehaviorParams &params) const;

    /// Weighted sum of squared residuals over the compiled observations.
    LossReport loss(const BehaviorParams &params) const;

    /// Same loss restricted to a multiset of observation indices (bootstrap).
    double loss(const BehaviorParams &params, std::span<const std::size_t> rows) const;

    /// Sum of weighted observed squares, the scale used for relative tolerances.
    double observed_scale() const { return observed_scale_; }

  private:
    struct Row {
        std::size_t age_begin = 0;
        std::size_t age_end = 0;
        std::size_t exposure_begin = 0;
        std::size_t exposure_end = 0;
        double family = 0.0;
        double delta_gdp = 0.0;
        double gdp_norm = 0.0;
        double gdp_monthly = 0.0;
    };
    static constexpr double kTiny = 1e-300;
    static constexpr double kHuge = 1e300;

    std::vector<double> surplus_factors(const BehaviorParams &params) const;
    double simulated_row(const Row &row, const BehaviorParams &params,
                         const std::array<double, kDisasterWindow> &kernel,
                         std::span<const double> factors) const;

    std::vector<Row> rows_;
    std::vector<double> observed_;
    std::vector<double> weight_;
    std::vector<double> age_count_;
    std::vector<std::uint32_t> age_surplus_index_;
    std::vector<double> surplus_values_;
    std::vector<double> exposure_magnitude_;
    std::vector<int> exposure_offset_;
    std::size_t excluded_ = 0;
    double observed_scale_ = 0.0;
};

/// Sum of squared (simulated - observed) over the train-tagged rows of `panel`.
LossReport loss(const BehaviorParams &params, std::span<const PanelObservation> panel,
                const RemittanceModel &model);

/// Maps parameters to the unconstrained optimisation space (rho through logit) and back.
std::array<double, BehaviorParams::kCount> to_unconstrained(const BehaviorParams &params);
BehaviorParams from_unconstrained(const std::array<double, BehaviorParams::kCount> &u);

using Vector9 = std::array<double, BehaviorParams::kCount>;
using Objective = std::function<double(const Vector9 &)>;

/// Central-difference gradient with per-coordinate step `relative_step * max(1, |u_i|)`.
Vector9 central_gradient(const Objective &f, const Vector9 &u, double relative_step = 1e-5);

struct DescentResult {
    Vector9 point{};
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> history; // loss after each accepted step, starting with the initial loss
};

/// Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.
/// Accepted steps never increase the loss. Stops when the relative loss change
/// falls below `tolerance`, when no descent step exists at machine precision,
/// or after `max_iter` iterations.
DescentResult gradient_descent(const Objective &f, Vector9 start, int max_iter, double tolerance);

struct ParamInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct CalibrationResult {
    BehaviorParams params;
    double train_sse = 0.0;
    double test_r2 = 0.0;
    std::array<ParamInterval, BehaviorParams::kCount> param_cis{};
    int iterations = 0;
    bool converged = false;
    int starts_run = 0;
    int starts_diverged = 0;
    std::size_t train_used = 0;
    std::size_t test_used = 0;
    std::size_t excluded = 0;
    int bootstrap_used = 0;
    int bootstrap_dropped = 0;
};

/// Raised when every start diverges.
class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 1 - SSE / SST over the test-tagged rows; SST is taken around the test mean.
double test_r_squared(const BehaviorParams &params, std::span<const PanelObservation> panel,
                      const RemittanceModel &model);

/// Default start: all betas and alpha 0, height 0.1, shape 0.1, shift 0, rho 0.1.
BehaviorParams default_initial_params();

/// Fits the parameters on the train-tagged rows of an already split panel.
/// Start 0 is `initial`; further starts perturb each value uniformly by up to
/// 50% of max(|value|, 1). The best non-diverged start wins. Parameter CIs
/// are filled by param_confidence when bootstrap_reps > 0, else collapse to
/// the point estimate.
CalibrationResult calibrate(const RemittanceModel &model, std::span<const PanelObservation> panel,
                            const OptimizerConfig &config, std::uint64_t seed,
                            BehaviorParams initial = default_initial_params(), int threads = 1);

/// Nonparametric bootstrap: resamples train rows with replacement, reruns a
/// short descent from the point estimate and takes the 2.5/97.5 percentiles.
/// Intervals are widened to contain the point estimate when needed.
void param_confidence(CalibrationResult &result, const RemittanceModel &model,
                      std::span<const PanelObservation> panel, int replicates, int max_iter,
                      double tolerance, std::uint64_t seed, bool corridor_weighted = false,
                      int threads = 1);

} // namespace remitsim
