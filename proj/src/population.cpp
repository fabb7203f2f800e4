#include "remitsim/population.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace remitsim {

namespace {

constexpr int kYoungUpper = 24;     // young: ages < 25
constexpr int kParentingUpper = 50; // parenting: 25..50 inclusive

double sum_range(const AgeArray &a, int lo, int hi) {
    double s = 0.0;
    for (int age = lo; age <= hi; ++age) {
        s += a[age];
    }
    return s;
}

} // namespace

double CohortTable::total(Sex sex) const { return sum_range(of(sex), 0, kMaxAge); }

double CohortTable::total() const { return total(Sex::male) + total(Sex::female); }

double CohortTable::young() const {
    return sum_range(counts[0], 0, kYoungUpper) + sum_range(counts[1], 0, kYoungUpper);
}

double CohortTable::parenting() const {
    return sum_range(counts[0], kYoungUpper + 1, kParentingUpper) +
           sum_range(counts[1], kYoungUpper + 1, kParentingUpper);
}

std::optional<std::size_t> Population::find(std::string_view origin,
                                             std::string_view destination) const {
    auto it = std::lower_bound(corridors_.begin(), corridors_.end(),
                               std::pair{origin, destination},
                               [](const CorridorPopulation &c, const auto &key) {
                                   return std::pair<std::string_view, std::string_view>{
                                              c.origin, c.destination} < key;
                               });
    if (it == corridors_.end() || it->origin != origin || it->destination != destination) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - corridors_.begin());
}

std::vector<MigrantCohort> Population::cohorts() const {
    std::vector<MigrantCohort> out;
    for (const auto &corridor : corridors_) {
        for (int m = 0; m < month_count_; ++m) {
            const auto &table = corridor.months[m];
            for (Sex sex : kSexes) {
                for (int age = 0; age <= kMaxAge; ++age) {
                    const double count = table.of(sex)[age];
                    if (count > 0.0) {
                        out.push_back({corridor.origin, corridor.destination, sex, age, month(m),
                                       count});
                    }
                }
            }
        }
    }
    return out;
}

Population build_population(const Dataset &dataset, YearMonth start, YearMonth end) {
    if (start > end || start < kWindowStart || end > kWindowEnd) {
        throw DomainError("population window must lie within 2010-01..2019-12");
    }
    const int month_count = end - start + 1;
    const int offset = start - kWindowStart;

    std::vector<CorridorPopulation> corridors;
    corridors.reserve(dataset.corridors().size());
    for (const auto &[origin, destination] : dataset.corridors()) {
        CorridorPopulation corridor{origin, destination,
                                    std::vector<CohortTable>(month_count)};
        for (Sex sex : kSexes) {
            auto it = dataset.monthly_stocks().find(StockKey{origin, destination, sex});
            if (it == dataset.monthly_stocks().end()) {
                continue;
            }
            const auto &profile = dataset.age_profile(sex);
            for (int m = 0; m < month_count; ++m) {
                const double stock = it->second[offset + m];
                auto &ages = corridor.months[m].of(sex);
                for (int age = 0; age <= kMaxAge; ++age) {
                    ages[age] = stock * profile[age];
                }
            }
        }
        corridors.push_back(std::move(corridor));
    }
    return Population(start, month_count, std::move(corridors));
}

double symmetry(double a, double b) {
    const double half_sum = 0.5 * (a + b);
    if (!(half_sum > 0.0)) {
        return 0.0;
    }
    return std::min(a, b) / half_sum;
}

double age_symmetry(double young, double parenting) { return symmetry(parenting, young); }

double age_symmetry(const CohortTable &cohorts) {
    return age_symmetry(cohorts.young(), cohorts.parenting());
}

double sex_symmetry(double male, double female) { return symmetry(male, female); }

double sex_symmetry(const CohortTable &cohorts) {
    return sex_symmetry(cohorts.total(Sex::male), cohorts.total(Sex::female));
}

std::optional<DiasporaDemographics> family_probability(const CohortTable &cohorts) {
    if (!(cohorts.total() > 0.0)) {
        return std::nullopt;
    }
    DiasporaDemographics d;
    d.age_symmetry = age_symmetry(cohorts);
    d.sex_symmetry = sex_symmetry(cohorts);
    d.asymmetry = 1.0 - d.sex_symmetry * d.age_symmetry;
    d.family = d.asymmetry;
    return d;
}

std::vector<DiasporaDemographics> diaspora_demographics(const Population &population) {
    std::vector<DiasporaDemographics> out;
    for (const auto &corridor : population.corridors()) {
        for (int m = 0; m < population.month_count(); ++m) {
            if (auto d = family_probability(corridor.months[m])) {
                d->origin = corridor.origin;
                d->destination = corridor.destination;
                d->month = population.month(m);
                out.push_back(std::move(*d));
            }
        }
    }
    return out;
}

std::string AgeBand::label() const {
    if (upper >= kMaxAge) {
        return fmt::format("{}+", lower);
    }
    return fmt::format("{}-{}", lower, upper);
}

std::vector<AgeBand> default_sender_age_bands() {
    return {{0, 15}, {16, 24}, {25, 34}, {35, 44}, {45, 54}, {55, 64}, {65, kMaxAge}};
}

SenderDemographicsReport sender_demographics(const Population &population,
                                             const CohortProbabilities &probabilities,
                                             const Dataset &dataset,
                                             const std::vector<AgeBand> &bands) {
    struct Accumulator {
        double senders = 0.0;
        double male = 0.0;
        double age_weighted = 0.0;
        std::vector<double> band;
    };
    std::array<Accumulator, 4> groups;
    Accumulator overall;
    for (auto &g : groups) {
        g.band.assign(bands.size(), 0.0);
    }
    overall.band.assign(bands.size(), 0.0);

    for (std::size_t c = 0; c < population.corridors().size(); ++c) {
        const auto &corridor = population.corridors()[c];
        for (int m = 0; m < population.month_count(); ++m) {
            const int year = population.month(m).year();
            const auto group = dataset.economics(corridor.origin, year).income_group;
            auto &acc = groups[static_cast<int>(group)];
            for (Sex sex : kSexes) {
                const auto &ages = corridor.months[m].of(sex);
                for (int age = 0; age <= kMaxAge; ++age) {
                    if (ages[age] <= 0.0) {
                        continue;
                    }
                    const double w = ages[age] * probabilities.probability(c, m, sex, age);
                    if (w == 0.0) {
                        continue;
                    }
                    for (Accumulator *a : {&acc, &overall}) {
                        a->senders += w;
                        if (sex == Sex::male) {
                            a->male += w;
                        }
                        a->age_weighted += w * age;
                        for (std::size_t b = 0; b < bands.size(); ++b) {
                            if (age >= bands[b].lower && age <= bands[b].upper) {
                                a->band[b] += w;
                            }
                        }
                    }
                }
            }
        }
    }

    auto finish = [&](const Accumulator &a, IncomeGroup group) {
        SenderDemographicsRow row;
        row.origin_income_group = group;
        row.expected_senders = a.senders;
        row.band_shares.assign(bands.size(), 0.0);
        if (a.senders > 0.0) {
            row.empty = false;
            row.male_share = a.male / a.senders;
            row.female_share = 1.0 - row.male_share;
            row.mean_age = a.age_weighted / a.senders;
            for (std::size_t b = 0; b < bands.size(); ++b) {
                row.band_shares[b] = a.band[b] / a.senders;
            }
        }
        return row;
    };

    SenderDemographicsReport report;
    report.bands = bands;
    for (IncomeGroup g : kIncomeGroups) {
        report.rows.push_back(finish(groups[static_cast<int>(g)], g));
    }
    report.overall = finish(overall, IncomeGroup::high);
    return report;
}

} // namespace remitsim
