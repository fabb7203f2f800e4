#include "remitsim/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace remitsim {

const std::array<const char *, BehaviorParams::kCount> &BehaviorParams::names() {
    static const std::array<const char *, kCount> kNames = {
        "alpha", "beta0", "beta1", "beta2", "beta3", "height", "shape", "shift", "rho"};
    return kNames;
}

std::array<double, BehaviorParams::kCount> BehaviorParams::to_array() const {
    return {alpha, beta0, beta1, beta2, beta3, height, shape, shift, rho};
}

BehaviorParams BehaviorParams::from_array(const std::array<double, kCount> &v) {
    return BehaviorParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

void BehaviorParams::validate() const {
    for (double v : to_array()) {
        if (!std::isfinite(v)) {
            throw DomainError("behaviour parameters must be finite");
        }
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw DomainError(fmt::format("rho must lie in (0,1), got {}", rho));
    }
}

BehaviorParams BehaviorParams::published() {
    return BehaviorParams{0.02, 1.08, -4.65, 2.83, -3.67, 0.15, 0.19, -0.98, 0.18};
}

double delta_gdp(double gdp_dest, double gdp_origin, bool clamp) {
    if (!(gdp_dest > 0.0) || !(gdp_origin > 0.0)) {
        throw DomainError("GDP per capita must be positive");
    }
    double d = gdp_dest > gdp_origin ? (gdp_dest - gdp_origin) / gdp_origin
                                     : -(gdp_origin - gdp_dest) / gdp_dest;
    if (clamp) {
        d = std::clamp(d, -1.0, 1.0);
    }
    return d;
}

GdpNormalizer::GdpNormalizer(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("GDP normalisation needs at least one value");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    min_ = *lo;
    max_ = *hi;
    if (!(max_ > min_)) {
        degenerate_ = true;
        spdlog::warn("all origin GDP values are identical; normalised GDP set to 0");
    }
}

double GdpNormalizer::operator()(double gdp) const {
    if (degenerate_) {
        return 0.0;
    }
    return (gdp - min_) / (max_ - min_);
}

std::vector<double> gdp_norm(std::span<const double> values) {
    const GdpNormalizer norm(values);
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        out.push_back(norm(v));
    }
    return out;
}

double disaster_kernel(int offset, const BehaviorParams &params) {
    if (offset < 0 || offset >= kDisasterWindow) {
        return 0.0;
    }
    return params.height +
           params.shape * std::sin(std::numbers::pi / 6.0 * (offset + params.shift));
}

double disaster_magnitude(double affected, double population) {
    if (!(population > 0.0)) {
        throw DomainError("population must be positive");
    }
    const double m = affected / population;
    if (m > 1.0) {
        spdlog::warn("affected persons exceed population; magnitude clamped to 1");
        return 1.0;
    }
    return m;
}

double disaster_score(std::span<const DisasterEvent> events, YearMonth month, double population,
                      const BehaviorParams &params) {
    double score = 0.0;
    for (const auto &event : events) {
        const int offset = month - event.onset;
        if (offset < 0 || offset >= kDisasterWindow) {
            continue;
        }
        score += disaster_magnitude(event.affected, population) * disaster_kernel(offset, params);
    }
    return score;
}

double theta(const CovariateVector &cov, const BehaviorParams &params) {
    if (!(cov.surplus > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    return params.alpha + params.beta0 * cov.surplus + params.beta1 * cov.family +
           params.beta2 * cov.delta_gdp + params.beta3 * cov.gdp_norm + cov.disaster_score;
}

double probability(double theta) {
    if (theta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-theta));
    }
    // exp(theta) form avoids overflow for large negative scores; -inf gives 0.
    const double e = std::exp(theta);
    return e / (1.0 + e);
}

double probability_slope(double theta) {
    const double p = probability(theta);
    return p * (1.0 - p);
}

double activation_capacity(double theta, double delta) {
    if (delta < 0.0) {
        throw DomainError("activation shock must be non-negative");
    }
    return probability(theta + delta) - probability(theta);
}

std::vector<ProfilePoint> probability_profile(std::vector<WeightedProbability> cohorts) {
    std::erase_if(cohorts, [](const WeightedProbability &c) { return !(c.count > 0.0); });
    double total = 0.0;
    for (const auto &c : cohorts) {
        total += c.count;
    }
    if (cohorts.empty() || !(total > 0.0)) {
        return {};
    }
    std::stable_sort(cohorts.begin(), cohorts.end(),
                     [](const auto &a, const auto &b) { return a.probability > b.probability; });
    std::vector<ProfilePoint> out;
    out.reserve(cohorts.size());
    double cumulative = 0.0;
    for (const auto &c : cohorts) {
        cumulative += c.count;
        out.push_back({cumulative / total, c.probability});
    }
    out.back().cum_population_fraction = 1.0;
    return out;
}

} // namespace remitsim
