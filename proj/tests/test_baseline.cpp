#include <cmath>

#include <doctest.h>

#include "remitsim/baseline.hpp"
#include "remitsim/fixtures.hpp"
#include "support.hpp"

using namespace remitsim;

namespace {

/// Monthly panel equal to annual gravity flows / 12 for the given exponent.
std::vector<PanelObservation> gravity_panel(const Dataset &ds, double beta) {
    std::vector<PanelObservation> panel;
    for (const auto &year : gravity_flows(ds, beta)) {
        for (const auto &[key, v] : year.entries) {
            for (int month = 1; month <= 12; ++month) {
                panel.push_back({key.first, key.second, YearMonth(year.year, month), v / 12.0});
            }
        }
    }
    return panel;
}

Tables flat_stock_tables(double male, double female) {
    auto t = testing::two_country_tables(10000, 40000);
    for (auto &r : t.stocks) {
        r.count = r.sex == Sex::male ? male : female;
    }
    return t;
}

} // namespace

TEST_SUITE("baseline") {

TEST_CASE("per-migrant amount examples") {
    CHECK(gravity_per_migrant(8000, 10000, 0.75) == 10000.0);
    CHECK(gravity_per_migrant(40000, 10000, 0.75) == doctest::Approx(10000 + std::pow(30000.0, 0.75)));
    CHECK(gravity_per_migrant(40000, 10000, 0.75) == doctest::Approx(12279.5).epsilon(1e-5));
    CHECK(gravity_per_migrant(10000, 10000, 0.75) == 10000.0);
    CHECK_THROWS_AS(gravity_per_migrant(0, 10000, 0.75), DomainError);
    CHECK_THROWS_AS(gravity_per_migrant(10000, -1, 0.75), DomainError);
}

TEST_CASE("per-migrant amount is continuous at parity and increasing above it") {
    testing::Gen gen(2);
    for (int trial = 0; trial < 500; ++trial) {
        const double yo = gen.uniform(500, 50000);
        const double beta = gen.uniform(0.05, 1.5);
        CHECK(gravity_per_migrant(yo * (1 + 1e-12), yo, beta) ==
              doctest::Approx(gravity_per_migrant(yo * (1 - 1e-12), yo, beta)).epsilon(1e-3));
        const double a = yo + gen.uniform(1, 1e4);
        const double b = a + gen.uniform(1, 1e4);
        CHECK(gravity_per_migrant(b, yo, beta) > gravity_per_migrant(a, yo, beta));
    }
}

TEST_CASE("single corridor: stock 1000 at 12279.5 per migrant") {
    const Dataset ds = Dataset::from_tables(flat_stock_tables(1000, 0));
    const auto flows = gravity_flows(ds, 0.75);
    REQUIRE(flows.size() == 10);
    CHECK(flows.front().year == 2010);
    const double v = flows.front().entries.at({"BBB", "AAA"});
    CHECK(v == doctest::Approx(1000 * (10000 + std::pow(30000.0, 0.75))));
    CHECK(v == doctest::Approx(12.2795e6).epsilon(1e-5));
    CHECK(recipient_totals(flows.front()).at("AAA") == v);
}

TEST_CASE("zero stock gives zero flow") {
    const Dataset ds = Dataset::from_tables(flat_stock_tables(0, 0));
    for (const auto &year : gravity_flows(ds, 0.75)) {
        CHECK(year.entries.at({"BBB", "AAA"}) == 0.0);
    }
}

TEST_CASE("gravity flows are linear in the stocks and rows sum by recipient") {
    FixtureSpec spec;
    spec.origins = 3;
    spec.destinations = 3;
    auto tables = generate_fixture(spec);
    const Dataset ds = Dataset::from_tables(tables);
    for (auto &r : tables.stocks) {
        r.count *= 2;
    }
    const Dataset doubled = Dataset::from_tables(tables);
    const auto a = gravity_flows(ds, 0.6);
    const auto b = gravity_flows(doubled, 0.6);
    for (std::size_t y = 0; y < a.size(); ++y) {
        for (const auto &[key, v] : a[y].entries) {
            CHECK(b[y].entries.at(key) == doctest::Approx(2 * v).epsilon(1e-12));
        }
        std::map<CountryCode, double> sums;
        for (const auto &[key, v] : a[y].entries) {
            sums[key.second] += v;
        }
        const auto totals = recipient_totals(a[y]);
        CHECK(totals.size() == 3);
        for (const auto &[country, total] : totals) {
            CHECK(total == doctest::Approx(sums[country]));
        }
    }
}

TEST_CASE("annual stock is the mean of the year's monthly stocks") {
    const Dataset ds = Dataset::from_tables(testing::two_country_tables(10000, 40000));
    const auto flows = gravity_flows(ds, 0.5, 2013, 2013);
    REQUIRE(flows.size() == 1);
    double mean = 0;
    for (Sex sex : kSexes) {
        const auto &s = ds.monthly_stocks().at({"AAA", "BBB", sex});
        for (int m = 36; m < 48; ++m) {
            mean += s[m] / 12.0;
        }
    }
    CHECK(flows[0].entries.at({"BBB", "AAA"}) ==
          doctest::Approx(mean * gravity_per_migrant(40000, 10000, 0.5)));
}

TEST_CASE("golden-section search recovers planted exponents") {
    FixtureSpec spec;
    spec.origins = 5;
    spec.destinations = 3;
    spec.with_panel = false;
    const Dataset ds = Dataset::from_tables(generate_fixture(spec));
    for (double planted : {0.2, 0.75, 1.3}) {
        const auto fit = calibrate_gravity(gravity_panel(ds, planted), ds);
        CHECK(std::abs(fit.beta_exp - planted) <= 0.01);
        CHECK_FALSE(fit.at_boundary);
        CHECK_FALSE(fit.warning);
        CHECK(fit.sse <= 1e-12 * 1e20);
    }
}

TEST_CASE("flat loss takes the warning path") {
    const Dataset ds = Dataset::from_tables(flat_stock_tables(0, 0));
    std::vector<PanelObservation> panel;
    for (int m = 0; m < 24; ++m) {
        panel.push_back({"BBB", "AAA", kWindowStart + m, 0.0});
    }
    const auto fit = calibrate_gravity(panel, ds);
    CHECK(fit.warning);
    CHECK_FALSE(fit.message.empty());
}

TEST_CASE("boundary optimum is flagged") {
    const Dataset ds = Dataset::from_tables(flat_stock_tables(1000, 500));
    std::vector<PanelObservation> panel;
    for (int m = 0; m < 24; ++m) {
        panel.push_back({"BBB", "AAA", kWindowStart + m, 0.0});
    }
    const auto fit = calibrate_gravity(panel, ds);
    CHECK(fit.at_boundary);
    CHECK(fit.beta_exp == doctest::Approx(0.001));
}

TEST_CASE("identical estimates give an error ratio of one") {
    const auto report = compare_estimates({{"A", "B", 10, 12, 12}, {"A", "C", 20, 15, 15}});
    CHECK(report.error_ratio == 1.0);
    CHECK(report.mean_relative_error_structural == report.mean_relative_error_gravity);
}

TEST_CASE("Table-3-shaped corridor") {
    const auto report = compare_estimates({{"USA", "MEX", 27.46, 26.49, 123.28}});
    REQUIRE(report.rows.size() == 1);
    const auto &row = report.rows[0];
    CHECK(row.se_structural == doctest::Approx((26.49 - 27.46) * (26.49 - 27.46)));
    CHECK(row.se_gravity == doctest::Approx((123.28 - 27.46) * (123.28 - 27.46)));
    CHECK(row.se_structural == doctest::Approx(0.95).epsilon(0.02));
    CHECK(row.se_gravity == doctest::Approx(9181.54).epsilon(0.02));
}

TEST_CASE("relative error ratio on a constructed fixture") {
    // Structural misses by 9% and 4.5%, gravity by 20% and 10%.
    const auto report =
        compare_estimates({{"A", "B", 100, 109, 120}, {"A", "C", 200, 191, 180}, {"A", "D", 0, 5, 5}});
    CHECK(report.mean_relative_error_structural == doctest::Approx((0.09 + 0.045) / 2));
    CHECK(report.mean_relative_error_gravity == doctest::Approx((0.2 + 0.1) / 2));
    CHECK(report.error_ratio == doctest::Approx(0.45));
    CHECK(report.rows.size() == 3); // zero-observed corridor keeps its squared errors
    REQUIRE(report.largest_over_gravity.size() >= 1);
    CHECK(report.largest_over_gravity.front().estimate.recipient == "B");
    REQUIRE(report.largest_under_structural.size() >= 1);
    CHECK(report.largest_under_structural.front().estimate.recipient == "C");
}

TEST_CASE("comparison over the panel: yearly averages and excluded corridors") {
    std::vector<FlowMatrix> structural;
    for (int m = 0; m < 24; ++m) {
        FlowMatrix fm;
        fm.month = kWindowStart + m;
        fm.entries[{"BBB", "AAA"}] = 10.0;
        structural.push_back(fm);
    }
    std::vector<AnnualFlowMatrix> gravity = {{2010, {{{"BBB", "AAA"}, 240.0}}},
                                             {2011, {{{"BBB", "AAA"}, 240.0}}}};
    std::vector<PanelObservation> panel;
    for (int m = 0; m < 18; ++m) {
        panel.push_back({"BBB", "AAA", kWindowStart + m, 12.0});
    }
    panel.push_back({"ZZZ", "AAA", kWindowStart, 5.0});
    const auto report = compare_models(structural, gravity, panel);
    CHECK(report.excluded == 1);
    REQUIRE(report.rows.size() == 1);
    const auto &e = report.rows[0].estimate;
    CHECK(e.observed == doctest::Approx(144.0));
    CHECK(e.structural == doctest::Approx(120.0));
    CHECK(e.gravity == doctest::Approx(240.0));
    CHECK(report.rows[0].se_structural == doctest::Approx(24.0 * 24.0));
}

}
