#include "remitsim/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "remitsim/hashing.hpp"
#include "remitsim/model.hpp"

namespace remitsim {

namespace {

std::string synthetic_code(char prefix, int index) {
    if (index < 0 || index >= 26 * 26) {
        throw DomainError("fixture country index out of range");
    }
    return fmt::format("{}{}{}", prefix, static_cast<char>('A' + index / 26),
                       static_cast<char>('A' + index % 26));
}

IncomeGroup income_group_for(double gdp) {
    if (gdp < 10000.0) {
        return IncomeGroup::low;
    }
    if (gdp < 15000.0) {
        return IncomeGroup::lower_middle;
    }
    if (gdp < 22000.0) {
        return IncomeGroup::upper_middle;
    }
    return IncomeGroup::high;
}

void add_economics(Tables &tables, const std::string &country, double gdp_2010,
                   double gdp_growth, double pop_2010, double pop_growth) {
    for (int year = kWindowStart.year(); year <= kWindowEnd.year(); ++year) {
        const int t = year - kWindowStart.year();
        const double gdp = std::round(gdp_2010 * std::pow(1.0 + gdp_growth, t));
        const double pop = std::round(pop_2010 * std::pow(1.0 + pop_growth, t));
        tables.economics.push_back({country, year, gdp, pop, income_group_for(gdp)});
    }
}

double gauss(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z);
}

void add_age_profiles(Tables &tables) {
    for (Sex sex : kSexes) {
        const double hump = sex == Sex::male ? 35.0 : 30.0;
        AgeArray w{};
        double total = 0.0;
        for (int age = 0; age <= kMaxAge; ++age) {
            w[age] = 0.15 * gauss(age, 8.0, 5.0) + gauss(age, hump, 10.0) +
                     0.12 * gauss(age, 60.0, 12.0);
            total += w[age];
        }
        for (int age = 0; age <= kMaxAge; ++age) {
            tables.age_profiles.push_back({sex, age, w[age] / total});
        }
    }
}

double surplus_shape(int age) {
    if (age < 16) {
        return 0.0;
    }
    return 0.2 + 1.2 * gauss(age, 42.0, 11.0);
}

void add_surplus(Tables &tables, const std::string &country, double scale) {
    for (int age = 0; age <= kMaxAge; ++age) {
        tables.surplus_profiles.push_back({country, age, scale * surplus_shape(age)});
    }
}

void add_stock(Tables &tables, const std::string &origin, const std::string &destination,
               std::array<double, 3> totals, std::array<double, 3> male_shares) {
    for (std::size_t a = 0; a < kAnchorYears.size(); ++a) {
        const double male = std::round(totals[a] * male_shares[a]);
        tables.stocks.push_back({origin, destination, Sex::male, kAnchorYears[a], male});
        tables.stocks.push_back(
            {origin, destination, Sex::female, kAnchorYears[a], std::round(totals[a]) - male});
    }
}

double population_in(const Tables &tables, const std::string &country, int year) {
    for (const auto &e : tables.economics) {
        if (e.country == country && e.year == year) {
            return e.population;
        }
    }
    throw DomainError(fmt::format("no economics row for {} {}", country, year));
}

} // namespace

std::string origin_code(int index) { return synthetic_code('O', index); }
std::string destination_code(int index) { return synthetic_code('D', index); }

std::vector<PanelObservation> generate_panel(const Dataset &dataset, const BehaviorParams &params,
                                             double noise, std::uint64_t seed) {
    const RemittanceModel model(dataset, build_population(dataset));
    const auto weights = model.all_events();
    std::vector<PanelObservation> panel;
    panel.reserve(model.corridor_count() * static_cast<std::size_t>(model.month_count()));
    std::mt19937_64 rng(mix_seed(seed, 0x9a7e1));
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        const auto &corridor = model.population().corridors()[c];
        for (int m = 0; m < model.month_count(); ++m) {
            double amount = model.expected_flow(c, m, params, weights);
            if (noise > 0.0) {
                amount *= std::max(0.0, 1.0 + noise * z(rng));
            }
            panel.push_back({corridor.destination, corridor.origin, model.population().month(m),
                             amount, SplitTag::unassigned});
        }
    }
    return panel;
}

Tables generate_fixture(const FixtureSpec &spec) {
    if (spec.origins < 1 || spec.destinations < 1) {
        throw DomainError("fixture needs at least one origin and one destination");
    }
    std::mt19937_64 rng(mix_seed(spec.seed, 0xf1c7));
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    Tables tables;
    std::vector<std::string> origins;
    std::vector<std::string> destinations;
    for (int i = 0; i < spec.origins; ++i) {
        origins.push_back(origin_code(i));
        add_economics(tables, origins.back(), uniform(8000.0, 24000.0), uniform(0.01, 0.04),
                      uniform(2e6, 6e7), uniform(0.005, 0.02));
    }
    for (int j = 0; j < spec.destinations; ++j) {
        destinations.push_back(destination_code(j));
        add_economics(tables, destinations.back(), uniform(12000.0, 30000.0),
                      uniform(0.01, 0.03), uniform(2e7, 3e8), uniform(0.0, 0.01));
    }

    add_age_profiles(tables);
    add_surplus(tables, std::string(kGlobalDefault), 1.0);
    // The last destination relies on the global default profile.
    for (int j = 0; j + 1 < spec.destinations; ++j) {
        add_surplus(tables, destinations[j], uniform(0.75, 1.25));
    }

    for (const auto &origin : origins) {
        for (const auto &destination : destinations) {
            std::array<double, 3> totals{};
            std::array<double, 3> male{};
            totals[0] = uniform(2e4, 3e5);
            male[0] = uniform(0.35, 0.75);
            for (std::size_t a = 1; a < 3; ++a) {
                totals[a] = totals[a - 1] * uniform(0.95, 1.3);
                male[a] = std::clamp(male[a - 1] + uniform(-0.05, 0.05), 0.2, 0.8);
            }
            add_stock(tables, origin, destination, totals, male);
        }
    }

    if (spec.with_disasters) {
        int serial = 0;
        for (const auto &origin : origins) {
            YearMonth onset = kWindowStart;
            for (int e = 0; e < spec.events_per_origin; ++e) {
                // Events come in pairs of different hazards whose windows overlap.
                if (e % 2 == 0) {
                    onset = kWindowStart + static_cast<int>(uniform(0.0, kWindowMonths - 6));
                } else {
                    onset = onset + static_cast<int>(uniform(0.0, 6.0));
                }
                const Hazard hazard = kHazards[static_cast<std::size_t>(serial) % kHazards.size()];
                const double pop = population_in(tables, origin, onset.year());
                const double affected = std::round(uniform(0.02, 0.3) * pop);
                tables.disasters.push_back(
                    {fmt::format("EV{:04d}", ++serial), origin, onset, hazard, affected});
            }
        }
    }

    if (spec.with_panel) {
        const Dataset dataset = Dataset::from_tables(tables);
        tables.panel = generate_panel(dataset, spec.params, spec.panel_noise, spec.seed);
    }
    return tables;
}

Tables large_event_fixture() {
    Tables tables;
    const std::string origin = origin_code(0);
    const std::string destination = destination_code(0);
    add_economics(tables, origin, 10000.0, 0.02, 1.1e7, 0.01);
    add_economics(tables, destination, 10500.0, 0.02, 3.3e8, 0.007);
    add_age_profiles(tables);
    add_surplus(tables, std::string(kGlobalDefault), 1.0);
    // An all-male diaspora has sex symmetry 0, hence family 1.
    add_stock(tables, origin, destination, {6e5, 6.5e5, 7e5}, {1.0, 1.0, 1.0});
    const YearMonth onset{2015, 3};
    tables.disasters.push_back({"EQ-LARGE", origin, onset, Hazard::earthquake,
                                population_in(tables, origin, onset.year())});
    return tables;
}

Tables earthquake_drought_fixture() {
    Tables tables;
    const std::string quake_origin = origin_code(0);
    const std::string drought_origin = origin_code(1);
    const std::string destination = destination_code(0);
    add_economics(tables, quake_origin, 9000.0, 0.02, 1e6, 0.01);
    add_economics(tables, drought_origin, 9200.0, 0.02, 5e7, 0.01);
    add_economics(tables, destination, 20000.0, 0.02, 1e8, 0.005);
    add_age_profiles(tables);
    add_surplus(tables, std::string(kGlobalDefault), 1.0);
    add_stock(tables, quake_origin, destination, {2e5, 2.1e5, 2.2e5}, {0.55, 0.55, 0.55});
    add_stock(tables, drought_origin, destination, {2e5, 2.1e5, 2.2e5}, {0.55, 0.55, 0.55});
    const YearMonth quake{2012, 6};
    const YearMonth drought{2016, 2};
    tables.disasters.push_back({"EQ-1", quake_origin, quake, Hazard::earthquake,
                                0.1 * population_in(tables, quake_origin, quake.year())});
    tables.disasters.push_back({"DR-1", drought_origin, drought, Hazard::drought,
                                0.1 * population_in(tables, drought_origin, drought.year())});
    return tables;
}

} // namespace remitsim
