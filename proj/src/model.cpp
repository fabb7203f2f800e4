#include "remitsim/model.hpp"

#include <map>
#include <set>

namespace remitsim {

namespace {

GdpNormalizer origin_normalizer(const Dataset &dataset) {
    std::set<CountryCode> origins;
    for (const auto &[origin, destination] : dataset.corridors()) {
        origins.insert(origin);
    }
    std::vector<double> values;
    for (const auto &origin : origins) {
        for (int year = kWindowStart.year(); year <= kWindowEnd.year(); ++year) {
            values.push_back(dataset.economics(origin, year).gdp_per_capita);
        }
    }
    if (values.empty()) {
        values.push_back(1.0);
    }
    return GdpNormalizer(values);
}

} // namespace

RemittanceModel::RemittanceModel(const Dataset &dataset, Population population,
                                 ModelOptions options)
    : dataset_(&dataset), population_(std::move(population)), options_(options),
      normalizer_(origin_normalizer(dataset)) {
    const int months = population_.month_count();
    const auto &corridors = population_.corridors();
    covariates_.resize(corridors.size() * months);
    surplus_.reserve(corridors.size());

    std::map<CountryCode, std::size_t> origin_slots;
    for (const auto &corridor : corridors) {
        origin_slots.emplace(corridor.origin, origin_slots.size());
    }
    for (std::size_t c = 0; c < corridors.size(); ++c) {
        const auto &corridor = corridors[c];
        surplus_.push_back(&dataset.surplus_profile(corridor.destination));
        origin_slot_.push_back(origin_slots.at(corridor.origin));
        for (int m = 0; m < months; ++m) {
            const int year = population_.month(m).year();
            const double gdp_origin = dataset.economics(corridor.origin, year).gdp_per_capita;
            const double gdp_dest = dataset.economics(corridor.destination, year).gdp_per_capita;
            auto &cov = covariates_[c * months + m];
            const auto demo = family_probability(corridor.months[m]);
            cov.family = demo ? demo->family : 1.0;
            cov.delta_gdp = delta_gdp(gdp_dest, gdp_origin, options_.delta_gdp_clamp);
            cov.gdp_norm = normalizer_(gdp_origin);
            cov.gdp_dest_monthly = gdp_dest / 12.0;
        }
    }

    exposures_.resize(origin_slots.size() * months);
    const auto &events = dataset.tables().disasters;
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto &event = events[e];
        auto slot = origin_slots.find(event.country);
        if (slot == origin_slots.end()) {
            continue;
        }
        const double population_size =
            dataset.economics(event.country, event.onset.year()).population;
        const double magnitude = disaster_magnitude(event.affected, population_size);
        for (int offset = 0; offset < kDisasterWindow; ++offset) {
            const int m = (event.onset + offset) - population_.start();
            if (m < 0 || m >= months) {
                continue;
            }
            exposures_[slot->second * months + m].push_back({e, offset, magnitude});
        }
    }
}

std::span<const DisasterExposure> RemittanceModel::exposures(std::size_t corridor,
                                                             int month) const {
    return exposures_[origin_slot_[corridor] * month_count() + month];
}

double RemittanceModel::disaster_score(std::size_t corridor, int month,
                                       const BehaviorParams &params,
                                       const EventWeights &weights) const {
    double score = 0.0;
    for (const auto &x : exposures(corridor, month)) {
        const double w = weights[x.event];
        if (w != 0.0) {
            score += w * x.magnitude * disaster_kernel(x.offset, params);
        }
    }
    return score;
}

CovariateVector RemittanceModel::covariate_vector(std::size_t corridor, int month, int age,
                                                  const BehaviorParams &params,
                                                  const EventWeights &weights) const {
    const auto &cov = covariates(corridor, month);
    return CovariateVector{surplus(corridor)[age], cov.family, cov.delta_gdp, cov.gdp_norm,
                           disaster_score(corridor, month, params, weights)};
}

void RemittanceModel::probabilities(std::size_t corridor, int month,
                                    const BehaviorParams &params, const EventWeights &weights,
                                    AgeArray &out) const {
    const auto &cov = covariates(corridor, month);
    const auto &surplus_by_age = surplus(corridor);
    CovariateVector v{0.0, cov.family, cov.delta_gdp, cov.gdp_norm,
                      disaster_score(corridor, month, params, weights)};
    for (int age = 0; age <= kMaxAge; ++age) {
        v.surplus = surplus_by_age[age];
        out[age] = probability(theta(v, params));
    }
}

double RemittanceModel::expected_flow(std::size_t corridor, int month,
                                      const BehaviorParams &params,
                                      const EventWeights &weights) const {
    AgeArray p;
    probabilities(corridor, month, params, weights, p);
    const auto &table = population_.corridors()[corridor].months[month];
    double senders = 0.0;
    for (int age = 0; age <= kMaxAge; ++age) {
        senders += (table.counts[0][age] + table.counts[1][age]) * p[age];
    }
    return senders * params.rho * covariates(corridor, month).gdp_dest_monthly;
}

ModelProbabilities::ModelProbabilities(const RemittanceModel &model, BehaviorParams params,
                                       EventWeights weights)
    : model_(model), params_(params), weights_(std::move(weights)),
      cache_(model.corridor_count() * model.month_count()) {
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        for (int m = 0; m < model.month_count(); ++m) {
            model.probabilities(c, m, params_, weights_, cache_[c * model.month_count() + m]);
        }
    }
}

double ModelProbabilities::probability(std::size_t corridor, int month, Sex, int age) const {
    return cache_[corridor * model_.month_count() + month][age];
}

} // namespace remitsim
