#include "remitsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "remitsim/flows.hpp"
#include "remitsim/hashing.hpp"
#include "remitsim/parallel.hpp"

namespace remitsim {

std::vector<PanelObservation> split_panel(std::vector<PanelObservation> panel, double fraction,
                                          std::uint64_t seed, SplitMode mode) {
    if (panel.empty()) {
        throw DomainError("cannot split an empty panel");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DomainError("split fraction must lie in (0,1)");
    }
    std::mt19937_64 rng(seed);
    if (mode == SplitMode::observation) {
        std::vector<std::size_t> order(panel.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::shuffle(order.begin(), order.end(), rng);
        const auto train =
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(panel.size())));
        for (std::size_t k = 0; k < order.size(); ++k) {
            panel[order[k]].split = k < train ? SplitTag::train : SplitTag::test;
        }
        return panel;
    }

    std::set<FlowKey> keys;
    for (const auto &obs : panel) {
        keys.emplace(obs.sender, obs.recipient);
    }
    std::vector<FlowKey> corridors(keys.begin(), keys.end());
    std::shuffle(corridors.begin(), corridors.end(), rng);
    const auto train = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(corridors.size())));
    std::map<FlowKey, SplitTag> tag;
    for (std::size_t k = 0; k < corridors.size(); ++k) {
        tag[corridors[k]] = k < train ? SplitTag::train : SplitTag::test;
    }
    for (auto &obs : panel) {
        obs.split = tag.at({obs.sender, obs.recipient});
    }
    return panel;
}

PanelObjective::PanelObjective(const RemittanceModel &model,
                               std::span<const PanelObservation> observations,
                               bool corridor_weighted, EventWeights weights) {
    if (weights.empty()) {
        weights = model.all_events();
    }
    const auto &population = model.population();
    std::vector<FlowKey> corridor_of;
    std::map<const AgeArray *, std::size_t> surplus_slot;
    for (const auto &obs : observations) {
        // Flows run from the residence country (sender) to the origin (recipient).
        const auto corridor = population.find(obs.recipient, obs.sender);
        const int m = obs.month - population.start();
        if (!corridor || m < 0 || m >= population.month_count()) {
            ++excluded_;
            continue;
        }
        Row row;
        const auto &cov = model.covariates(*corridor, m);
        row.family = cov.family;
        row.delta_gdp = cov.delta_gdp;
        row.gdp_norm = cov.gdp_norm;
        row.gdp_monthly = cov.gdp_dest_monthly;

        row.age_begin = age_count_.size();
        const auto &table = population.corridors()[*corridor].months[m];
        const auto &surplus = model.surplus(*corridor);
        auto [slot, inserted] = surplus_slot.try_emplace(&surplus, surplus_values_.size());
        if (inserted) {
            surplus_values_.insert(surplus_values_.end(), surplus.begin(), surplus.end());
        }
        for (int age = 0; age <= kMaxAge; ++age) {
            const double count = table.counts[0][age] + table.counts[1][age];
            if (count > 0.0 && surplus[age] > 0.0) {
                age_count_.push_back(count);
                age_surplus_index_.push_back(static_cast<std::uint32_t>(slot->second + age));
            }
        }
        row.age_end = age_count_.size();

        row.exposure_begin = exposure_offset_.size();
        for (const auto &x : model.exposures(*corridor, m)) {
            const double w = weights[x.event];
            if (w != 0.0) {
                exposure_magnitude_.push_back(w * x.magnitude);
                exposure_offset_.push_back(x.offset);
            }
        }
        row.exposure_end = exposure_offset_.size();

        rows_.push_back(row);
        observed_.push_back(obs.amount_usd);
        corridor_of.emplace_back(obs.sender, obs.recipient);
    }
    if (excluded_ > 0) {
        spdlog::warn("{} panel observations have no modelled corridor-month and are excluded",
                     excluded_);
    }

    weight_.assign(rows_.size(), 1.0);
    if (corridor_weighted) {
        std::map<FlowKey, std::pair<double, std::size_t>> sums;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            auto &s = sums[corridor_of[i]];
            s.first += observed_[i];
            s.second += 1;
        }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto &s = sums[corridor_of[i]];
            const double mean = s.first / static_cast<double>(s.second);
            weight_[i] = mean > 0.0 ? 1.0 / (mean * mean) : 1.0;
        }
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        observed_scale_ += weight_[i] * observed_[i] * observed_[i];
    }
}

namespace {

std::array<double, kDisasterWindow> kernel_table(const BehaviorParams &params) {
    std::array<double, kDisasterWindow> k{};
    for (int offset = 0; offset < kDisasterWindow; ++offset) {
        k[offset] = disaster_kernel(offset, params);
    }
    return k;
}

} // namespace

std::vector<double> PanelObjective::surplus_factors(const BehaviorParams &params) const {
    std::vector<double> out(surplus_values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = std::clamp(std::exp(-params.beta0 * surplus_values_[k]), kTiny, kHuge);
    }
    return out;
}

// P = 1 / (1 + exp(-base) exp(-beta0 surplus)); both factors are kept inside
// [kTiny, kHuge] so their product is never 0 * inf.
double PanelObjective::simulated_row(const Row &row, const BehaviorParams &params,
                                     const std::array<double, kDisasterWindow> &kernel,
                                     std::span<const double> factors) const {
    double base = params.alpha + params.beta1 * row.family + params.beta2 * row.delta_gdp +
                  params.beta3 * row.gdp_norm;
    for (std::size_t e = row.exposure_begin; e < row.exposure_end; ++e) {
        base += exposure_magnitude_[e] * kernel[exposure_offset_[e]];
    }
    const double t = std::clamp(std::exp(-base), kTiny, kHuge);
    double senders = 0.0;
    for (std::size_t a = row.age_begin; a < row.age_end; ++a) {
        senders += age_count_[a] / (1.0 + factors[age_surplus_index_[a]] * t);
    }
    return senders * params.rho * row.gdp_monthly;
}

double PanelObjective::simulated(std::size_t i, const BehaviorParams &params) const {
    return simulated_row(rows_[i], params, kernel_table(params), surplus_factors(params));
}

std::vector<double> PanelObjective::simulated_all(const BehaviorParams &params) const {
    const auto kernel = kernel_table(params);
    const auto factors = surplus_factors(params);
    std::vector<double> out(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        out[i] = simulated_row(rows_[i], params, kernel, factors);
    }
    return out;
}

LossReport PanelObjective::loss(const BehaviorParams &params) const {
    const auto kernel = kernel_table(params);
    const auto factors = surplus_factors(params);
    LossReport report;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double r = simulated_row(rows_[i], params, kernel, factors) - observed_[i];
        report.sse += weight_[i] * r * r;
    }
    report.used = rows_.size();
    report.excluded = excluded_;
    return report;
}

double PanelObjective::loss(const BehaviorParams &params,
                            std::span<const std::size_t> rows) const {
    const auto kernel = kernel_table(params);
    const auto factors = surplus_factors(params);
    double sse = 0.0;
    for (std::size_t i : rows) {
        const double r = simulated_row(rows_[i], params, kernel, factors) - observed_[i];
        sse += weight_[i] * r * r;
    }
    return sse;
}

namespace {

std::vector<PanelObservation> tagged(std::span<const PanelObservation> panel, SplitTag tag) {
    std::vector<PanelObservation> out;
    for (const auto &obs : panel) {
        if (obs.split == tag) {
            out.push_back(obs);
        }
    }
    return out;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double inverse_logit(double x) { return probability(x); }

} // namespace

LossReport loss(const BehaviorParams &params, std::span<const PanelObservation> panel,
                const RemittanceModel &model) {
    const auto train = tagged(panel, SplitTag::train);
    return PanelObjective(model, train).loss(params);
}

Vector9 to_unconstrained(const BehaviorParams &params) {
    auto u = params.to_array();
    u[8] = logit(params.rho);
    return u;
}

BehaviorParams from_unconstrained(const Vector9 &u) {
    auto v = u;
    // Saturated logits would round to exactly 0 or 1; keep rho strictly inside.
    v[8] = std::clamp(inverse_logit(u[8]), std::numeric_limits<double>::min(),
                      std::nextafter(1.0, 0.0));
    return BehaviorParams::from_array(v);
}

namespace {

struct GradientProbe {
    Vector9 gradient{};
    /// Second central differences, the diagonal of the Hessian.
    Vector9 curvature{};
};

GradientProbe probe(const Objective &f, const Vector9 &u, double fu, double relative_step) {
    GradientProbe out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double h = relative_step * std::max(1.0, std::abs(u[i]));
        Vector9 up = u;
        Vector9 down = u;
        up[i] += h;
        down[i] -= h;
        const double f_up = f(up);
        const double f_down = f(down);
        out.gradient[i] = (f_up - f_down) / (2.0 * h);
        out.curvature[i] = (f_up - 2.0 * fu + f_down) / (h * h);
    }
    return out;
}

// Per-coordinate scale 1/sqrt(curvature), floored so that flat or concave
// directions do not get unbounded steps.
Vector9 diagonal_scale(const Vector9 &curvature) {
    double top = 0.0;
    for (double c : curvature) {
        if (std::isfinite(c)) {
            top = std::max(top, c);
        }
    }
    Vector9 scale{};
    for (std::size_t i = 0; i < scale.size(); ++i) {
        const double floor = top > 0.0 ? 1e-8 * top : 1.0;
        const double c = std::isfinite(curvature[i]) ? curvature[i] : floor;
        scale[i] = 1.0 / std::sqrt(std::max(c, floor));
    }
    return scale;
}

} // namespace

Vector9 central_gradient(const Objective &f, const Vector9 &u, double relative_step) {
    return probe(f, u, f(u), relative_step).gradient;
}

DescentResult gradient_descent(const Objective &f, Vector9 start, int max_iter,
                               double tolerance) {
    constexpr double kArmijo = 1e-4;
    constexpr int kMaxBacktracks = 60;
    constexpr int kRescaleEvery = 25;
    constexpr double kStep = 1e-5;

    DescentResult result;
    result.point = start;
    result.loss = f(start);
    result.history.push_back(result.loss);
    if (!std::isfinite(result.loss)) {
        result.diverged = true;
        return result;
    }
    if (result.loss == 0.0) {
        result.converged = true;
        return result;
    }

    GradientProbe current = probe(f, result.point, result.loss, kStep);
    Vector9 scale{};
    Vector9 prev_point{};
    Vector9 prev_grad{};
    double step = 1.0;
    bool have_memory = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        const Vector9 &grad = current.gradient;
        if (iter % kRescaleEvery == 0) {
            scale = diagonal_scale(current.curvature);
            have_memory = false;
        }
        // Work in z = u / scale: the scaled gradient is grad * scale.
        double grad_sq = 0.0;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double gz = grad[i] * scale[i];
            grad_sq += gz * gz;
        }
        if (!std::isfinite(grad_sq)) {
            result.diverged = true;
            return result;
        }
        if (grad_sq == 0.0) {
            result.converged = true;
            break;
        }

        if (have_memory) {
            double sy = 0.0;
            double ss = 0.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double sz = (result.point[i] - prev_point[i]) / scale[i];
                const double yz = (grad[i] - prev_grad[i]) * scale[i];
                sy += sz * yz;
                ss += sz * sz;
            }
            step = sy > 0.0 ? ss / sy : step * 2.0;
        } else {
            // Newton step along each coordinate of the diagonal model.
            step = 1.0;
        }

        bool accepted = false;
        Vector9 candidate{};
        double candidate_loss = 0.0;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                candidate[i] = result.point[i] - step * scale[i] * scale[i] * grad[i];
            }
            candidate_loss = f(candidate);
            if (std::isfinite(candidate_loss) &&
                candidate_loss <= result.loss - kArmijo * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent step at machine precision: stationary point reached.
            result.converged = true;
            break;
        }

        const double previous = result.loss;
        prev_point = result.point;
        prev_grad = grad;
        have_memory = true;
        result.point = candidate;
        result.loss = candidate_loss;
        result.history.push_back(candidate_loss);
        result.iterations = iter + 1;

        if (result.loss == 0.0 || (previous - result.loss) <= tolerance * previous) {
            result.converged = true;
            break;
        }
        current = probe(f, result.point, result.loss, kStep);
    }
    return result;
}

double test_r_squared(const BehaviorParams &params, std::span<const PanelObservation> panel,
                      const RemittanceModel &model) {
    const auto test = tagged(panel, SplitTag::test);
    const PanelObjective objective(model, test);
    if (objective.size() == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < objective.size(); ++i) {
        mean += objective.observed(i);
    }
    mean /= static_cast<double>(objective.size());
    const auto simulated = objective.simulated_all(params);
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < objective.size(); ++i) {
        const double r = simulated[i] - objective.observed(i);
        const double d = objective.observed(i) - mean;
        sse += r * r;
        sst += d * d;
    }
    if (!(sst > 0.0)) {
        return sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - sse / sst;
}

BehaviorParams default_initial_params() {
    return BehaviorParams{0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.1, 0.0, 0.1};
}

namespace {

Objective make_objective(const PanelObjective &objective) {
    const double scale = objective.observed_scale() > 0.0 ? objective.observed_scale() : 1.0;
    return [&objective, scale](const Vector9 &u) {
        return objective.loss(from_unconstrained(u)).sse / scale;
    };
}

Vector9 perturbed(const BehaviorParams &initial, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    auto v = initial.to_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == 8) {
            v[i] = std::clamp(v[i] * (1.0 + unit(rng)), 1e-6, 1.0 - 1e-6);
        } else {
            v[i] += unit(rng) * std::max(1.0, std::abs(v[i]));
        }
    }
    return to_unconstrained(BehaviorParams::from_array(v));
}

} // namespace

CalibrationResult calibrate(const RemittanceModel &model, std::span<const PanelObservation> panel,
                            const OptimizerConfig &config, std::uint64_t seed,
                            BehaviorParams initial, int threads) {
    initial.validate();
    const auto train_rows = tagged(panel, SplitTag::train);
    if (train_rows.empty()) {
        throw CalibrationError("no train-tagged observations; split the panel first");
    }
    const PanelObjective objective(model, train_rows, config.corridor_weighted_loss);
    if (objective.size() == 0) {
        throw CalibrationError("no train observation matches a modelled corridor-month");
    }
    const auto f = make_objective(objective);

    const int starts = std::max(1, config.starts);
    std::vector<DescentResult> runs(static_cast<std::size_t>(starts));
    parallel_for(runs.size(), threads, [&](std::size_t s) {
        const Vector9 start =
            s == 0 ? to_unconstrained(initial) : perturbed(initial, mix_seed(seed, s));
        runs[s] = gradient_descent(f, start, config.max_iter, config.tolerance);
    });

    CalibrationResult result;
    result.starts_run = starts;
    const DescentResult *best = nullptr;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        const auto &run = runs[s];
        if (run.diverged || !std::isfinite(run.loss)) {
            ++result.starts_diverged;
            spdlog::warn("calibration start {} diverged", s);
            continue;
        }
        if (best == nullptr || run.loss < best->loss) {
            best = &run;
        }
    }
    if (best == nullptr) {
        throw CalibrationError(fmt::format("all {} calibration starts diverged", starts));
    }

    // Start 0 left untouched reports `initial` exactly, not its logit round trip.
    result.params = best == &runs[0] && best->point == to_unconstrained(initial)
                        ? initial
                        : from_unconstrained(best->point);
    const LossReport train_loss = PanelObjective(model, train_rows).loss(result.params);
    result.train_sse = train_loss.sse;
    result.train_used = train_loss.used;
    result.excluded = train_loss.excluded;
    result.iterations = best->iterations;
    result.converged = best->converged;
    result.test_r2 = test_r_squared(result.params, panel, model);
    {
        const auto test_rows = tagged(panel, SplitTag::test);
        const PanelObjective test_objective(model, test_rows);
        result.test_used = test_objective.size();
        result.excluded += test_objective.excluded();
    }
    const auto point = result.params.to_array();
    for (std::size_t i = 0; i < point.size(); ++i) {
        result.param_cis[i] = {point[i], point[i]};
    }
    if (config.bootstrap_reps > 0) {
        param_confidence(result, model, panel, config.bootstrap_reps, config.bootstrap_max_iter,
                         config.tolerance, mix_seed(seed, 0xb007), config.corridor_weighted_loss,
                         threads);
    }
    return result;
}

void param_confidence(CalibrationResult &result, const RemittanceModel &model,
                      std::span<const PanelObservation> panel, int replicates, int max_iter,
                      double tolerance, std::uint64_t seed, bool corridor_weighted, int threads) {
    const auto train_rows = tagged(panel, SplitTag::train);
    const PanelObjective objective(model, train_rows, corridor_weighted);
    const std::size_t n = objective.size();
    const auto point = result.params.to_array();
    if (n == 0 || replicates <= 0) {
        for (std::size_t i = 0; i < point.size(); ++i) {
            result.param_cis[i] = {point[i], point[i]};
        }
        return;
    }

    std::vector<std::optional<Vector9>> estimates(static_cast<std::size_t>(replicates));
    parallel_for(estimates.size(), threads, [&](std::size_t r) {
        std::mt19937_64 rng(mix_seed(seed, r));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> rows(n);
        for (auto &row : rows) {
            row = pick(rng);
        }
        double scale = 0.0;
        for (std::size_t i : rows) {
            scale += objective.weight(i) * objective.observed(i) * objective.observed(i);
        }
        scale = scale > 0.0 ? scale : 1.0;
        const Objective f = [&](const Vector9 &u) {
            return objective.loss(from_unconstrained(u), rows) / scale;
        };
        const auto run =
            gradient_descent(f, to_unconstrained(result.params), max_iter, tolerance);
        if (!run.diverged && std::isfinite(run.loss)) {
            estimates[r] = from_unconstrained(run.point).to_array();
        }
    });

    std::array<std::vector<double>, BehaviorParams::kCount> samples;
    result.bootstrap_used = 0;
    result.bootstrap_dropped = 0;
    for (const auto &e : estimates) {
        if (!e) {
            ++result.bootstrap_dropped;
            continue;
        }
        ++result.bootstrap_used;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            samples[i].push_back((*e)[i]);
        }
    }
    if (result.bootstrap_dropped > 0) {
        spdlog::warn("{} bootstrap replicates diverged and were dropped",
                     result.bootstrap_dropped);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].empty()) {
            result.param_cis[i] = {point[i], point[i]};
            continue;
        }
        const double lo = empirical_quantile(samples[i], 0.025);
        const double hi = empirical_quantile(samples[i], 0.975);
        result.param_cis[i] = {std::min(lo, point[i]), std::max(hi, point[i])};
    }
}

} // namespace remitsim
