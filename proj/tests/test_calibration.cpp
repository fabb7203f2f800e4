#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "remitsim/calibration.hpp"
#include "remitsim/fixtures.hpp"
#include "support.hpp"

using namespace remitsim;

namespace {

std::vector<PanelObservation> numbered_panel(int n) {
    std::vector<PanelObservation> panel;
    for (int i = 0; i < n; ++i) {
        panel.push_back({"BBB", "AAA", kWindowStart + (i % 120), double(i)});
        panel.back().sender = "S" + std::to_string(i / 120);
    }
    return panel;
}

std::size_t count_tag(const std::vector<PanelObservation> &panel, SplitTag tag) {
    return std::count_if(panel.begin(), panel.end(),
                         [&](const auto &o) { return o.split == tag; });
}

struct SmallWorld {
    Dataset dataset;
    RemittanceModel model;

    explicit SmallWorld(FixtureSpec spec)
        : dataset(Dataset::from_tables(generate_fixture(spec))),
          model(dataset, build_population(dataset)) {}
};

FixtureSpec small_spec(double noise = 0.0) {
    FixtureSpec spec;
    spec.origins = 3;
    spec.destinations = 2;
    spec.panel_noise = noise;
    return spec;
}

/// Five-point central difference, fourth-order accurate.
Vector9 five_point_gradient(const Objective &f, const Vector9 &u, double rel) {
    Vector9 g{};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double h = rel * std::max(1.0, std::abs(u[i]));
        auto at = [&](double k) {
            Vector9 v = u;
            v[i] += k * h;
            return f(v);
        };
        g[i] = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
    }
    return g;
}

} // namespace

TEST_SUITE("calibration") {

TEST_CASE("split sizes follow the fraction") {
    auto split = split_panel(numbered_panel(10), 0.8, 1);
    CHECK(count_tag(split, SplitTag::train) == 8);
    CHECK(count_tag(split, SplitTag::test) == 2);
    split = split_panel(numbered_panel(1000), 0.5, 1);
    CHECK(count_tag(split, SplitTag::train) == 500);
    CHECK(count_tag(split, SplitTag::test) == 500);
}

TEST_CASE("split is deterministic, disjoint and covers the panel") {
    testing::Gen gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen.integer(1, 700);
        const double fraction = gen.uniform(0.05, 0.95);
        const auto seed = gen.seed();
        const auto a = split_panel(numbered_panel(n), fraction, seed);
        const auto b = split_panel(numbered_panel(n), fraction, seed);
        CHECK(a == b);
        REQUIRE(a.size() == static_cast<std::size_t>(n));
        CHECK(count_tag(a, SplitTag::unassigned) == 0);
        const auto train = count_tag(a, SplitTag::train);
        CHECK(std::abs(double(train) - fraction * n) <= 1.0);
        // Rows keep their identity: the amount column numbers them.
        std::set<double> ids;
        for (const auto &o : a) {
            ids.insert(o.amount_usd);
        }
        CHECK(ids.size() == static_cast<std::size_t>(n));
    }
    CHECK(split_panel(numbered_panel(100), 0.8, 1) != split_panel(numbered_panel(100), 0.8, 2));
    CHECK_THROWS(split_panel(numbered_panel(10), 1.0, 1));
    CHECK_THROWS(split_panel({}, 0.8, 1));
}

TEST_CASE("corridor split keeps each corridor on one side") {
    const auto split = split_panel(numbered_panel(1200), 0.8, 4, SplitMode::corridor);
    std::map<std::string, std::set<SplitTag>> sides;
    for (const auto &o : split) {
        sides[o.sender].insert(o.split);
    }
    CHECK(sides.size() == 10);
    for (const auto &[corridor, tags] : sides) {
        CHECK(tags.size() == 1);
    }
}

TEST_CASE("loss is zero on the generating parameters") {
    SmallWorld w(small_spec());
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    const auto report = loss(BehaviorParams::published(), panel, w.model);
    CHECK(report.used == 576);
    CHECK(report.excluded == 0);
    const PanelObjective objective(w.model, panel);
    CHECK(report.sse <= 1e-20 * objective.observed_scale());
}

TEST_CASE("single observation loss in billions") {
    const Dataset ds = Dataset::from_tables(testing::two_country_tables());
    const RemittanceModel model(ds, build_population(ds));
    const auto p = BehaviorParams::published();
    const double simulated = model.expected_flow(0, 30, p, model.all_events());
    // Scale the observation so that, in units of simulated / 26.49, it reads 27.46.
    const double unit = simulated / 26.49;
    std::vector<PanelObservation> panel = {
        {"BBB", "AAA", kWindowStart + 30, 27.46 * unit, SplitTag::train}};
    const double sse = loss(p, panel, model).sse / (unit * unit);
    CHECK(sse == doctest::Approx(0.9409).epsilon(1e-6));
    CHECK(sse == doctest::Approx(0.95).epsilon(0.02));

    panel[0].amount_usd = simulated + 2 * (27.46 * unit - simulated);
    CHECK(loss(p, panel, model).sse / (unit * unit) == doctest::Approx(4 * 0.9409).epsilon(1e-6));
}

TEST_CASE("loss is non-negative and zero only at a perfect fit") {
    SmallWorld w(small_spec(0.1));
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    testing::Gen gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        BehaviorParams p = BehaviorParams::published();
        auto a = p.to_array();
        for (auto &v : a) {
            v += gen.uniform(-0.3, 0.3);
        }
        a[8] = std::clamp(a[8], 0.01, 0.99);
        CHECK(loss(BehaviorParams::from_array(a), panel, w.model).sse > 0.0);
    }
}

TEST_CASE("observations without modelled population are excluded and counted") {
    const Dataset ds = Dataset::from_tables(testing::two_country_tables());
    const RemittanceModel model(ds, build_population(ds));
    const std::vector<PanelObservation> panel = {
        {"BBB", "AAA", YearMonth(2012, 1), 10.0, SplitTag::train},
        {"AAA", "BBB", YearMonth(2012, 1), 10.0, SplitTag::train},
        {"BBB", "AAA", YearMonth(2012, 2), 10.0, SplitTag::test},
    };
    const auto report = loss(BehaviorParams::published(), panel, model);
    CHECK(report.used == 1);
    CHECK(report.excluded == 1);
}

TEST_CASE("zero-probability model fits a zero panel at any parameters") {
    auto t = testing::two_country_tables();
    for (auto &r : t.surplus_profiles) {
        r.surplus = 0.0;
    }
    for (int m = 0; m < 120; ++m) {
        t.panel.push_back({"BBB", "AAA", kWindowStart + m, 0.0});
    }
    const Dataset ds = Dataset::from_tables(t);
    const RemittanceModel model(ds, build_population(ds));
    const auto panel = split_panel(ds.tables().panel, 0.8, 1);
    testing::Gen gen(6);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = BehaviorParams::published().to_array();
        for (int i = 0; i < 8; ++i) {
            a[i] = gen.uniform(-10, 10);
        }
        CHECK(loss(BehaviorParams::from_array(a), panel, model).sse == 0.0);
    }
}

TEST_CASE("corridor-weighted loss divides by the corridor's mean observation squared") {
    SmallWorld w(small_spec(0.1));
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    std::vector<PanelObservation> train;
    for (const auto &o : panel) {
        if (o.split == SplitTag::train) {
            train.push_back(o);
        }
    }
    const PanelObjective weighted(w.model, train, true);
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> mean;
    for (const auto &o : train) {
        auto &m = mean[{o.sender, o.recipient}];
        m.first += o.amount_usd;
        m.second += 1;
    }
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto &m = mean[{train[i].sender, train[i].recipient}];
        const double mu = m.first / m.second;
        CHECK(weighted.weight(i) == doctest::Approx(1.0 / (mu * mu)).epsilon(1e-12));
    }
}

TEST_CASE("unconstrained mapping round-trips and keeps rho inside (0,1)") {
    testing::Gen gen(7);
    for (int trial = 0; trial < 500; ++trial) {
        auto a = BehaviorParams::published().to_array();
        for (auto &v : a) {
            v = gen.uniform(-5, 5);
        }
        a[8] = gen.uniform(1e-6, 1 - 1e-6);
        const auto p = BehaviorParams::from_array(a);
        const auto back = from_unconstrained(to_unconstrained(p));
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(back.to_array()[i] == doctest::Approx(a[i]).epsilon(1e-9));
        }
        Vector9 u{};
        for (auto &v : u) {
            v = gen.uniform(-40, 40);
        }
        const double rho = from_unconstrained(u).rho;
        CHECK(rho > 0.0);
        CHECK(rho < 1.0);
    }
}

TEST_CASE("finite-difference gradient matches a fourth-order oracle") {
    SmallWorld w(small_spec(0.1));
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    std::vector<PanelObservation> train;
    for (const auto &o : panel) {
        if (o.split == SplitTag::train) {
            train.push_back(o);
        }
    }
    const PanelObjective objective(w.model, train);
    const Objective f = [&](const Vector9 &u) {
        return objective.loss(from_unconstrained(u)).sse / objective.observed_scale();
    };
    testing::Gen gen(8);
    for (int trial = 0; trial < 6; ++trial) {
        auto u = to_unconstrained(BehaviorParams::published());
        for (auto &v : u) {
            v += gen.uniform(-0.2, 0.2);
        }
        const auto g = central_gradient(f, u);
        const auto oracle = five_point_gradient(f, u, 1e-3);
        double norm = 0;
        for (double v : oracle) {
            norm = std::max(norm, std::abs(v));
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(std::abs(g[i] - oracle[i]) <= 1e-4 * std::max(std::abs(oracle[i]), 1e-3 * norm));
        }
    }
}

TEST_CASE("descent accepts only non-increasing steps and finds a quadratic minimum") {
    const Vector9 target = {1, -2, 3, 0.5, -0.5, 2, -1, 0.25, 4};
    const Objective bowl = [&](const Vector9 &u) {
        double s = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += (i + 1.0) * (u[i] - target[i]) * (u[i] - target[i]);
        }
        return s;
    };
    const auto run = gradient_descent(bowl, Vector9{}, 500, 1e-14);
    CHECK(run.converged);
    for (std::size_t i = 0; i < target.size(); ++i) {
        CHECK(run.point[i] == doctest::Approx(target[i]).epsilon(1e-4));
    }
    for (std::size_t i = 1; i < run.history.size(); ++i) {
        CHECK(run.history[i] <= run.history[i - 1]);
    }

    const Objective rosen = [](const Vector9 &u) {
        double s = 0;
        for (std::size_t i = 0; i + 1 < u.size(); ++i) {
            s += 100 * std::pow(u[i + 1] - u[i] * u[i], 2) + std::pow(1 - u[i], 2);
        }
        return s;
    };
    const auto r = gradient_descent(rosen, Vector9{}, 300, 0.0);
    CHECK(r.history.back() < r.history.front());
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        CHECK(r.history[i] <= r.history[i - 1]);
    }
}

TEST_CASE("descent reports divergence on a non-finite objective") {
    const Objective bad = [](const Vector9 &) { return std::nan(""); };
    const auto run = gradient_descent(bad, Vector9{}, 10, 1e-9);
    CHECK(run.diverged);
    CHECK_FALSE(run.converged);
}

TEST_CASE("calibration reaches the recovery loss on a noiseless panel") {
    // Six corridors pin down the fit and the kernel, not every coefficient;
    // coefficient recovery is checked on the 50-corridor panel in the acceptance suite.
    SmallWorld w(small_spec());
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    OptimizerConfig config;
    config.starts = 1;
    const auto result = calibrate(w.model, panel, config, 1);
    const PanelObjective objective(w.model, panel);
    CHECK(result.train_sse < 1e-6 * objective.observed_scale());
    CHECK(result.test_r2 > 0.99);
    CHECK(result.test_r2 <= 1.0);
    const auto truth = BehaviorParams::published();
    for (int k = 0; k < 12; ++k) {
        CHECK(disaster_kernel(k, result.params) ==
              doctest::Approx(disaster_kernel(k, truth)).epsilon(0.10));
    }
    CHECK(result.params.rho > 0.0);
    CHECK(result.params.rho < 1.0);
}

TEST_CASE("zero iterations echo the initial parameters unconverged") {
    SmallWorld w(small_spec());
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    OptimizerConfig config;
    config.starts = 1;
    config.max_iter = 0;
    const auto result = calibrate(w.model, panel, config, 1);
    CHECK(result.params == default_initial_params());
    CHECK_FALSE(result.converged);
    CHECK(result.iterations == 0);
}

TEST_CASE("multi-start calibration is reproducible and independent of threads") {
    SmallWorld w(small_spec(0.05));
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    OptimizerConfig config;
    config.starts = 3;
    config.max_iter = 60;
    const auto a = calibrate(w.model, panel, config, 9, default_initial_params(), 1);
    const auto b = calibrate(w.model, panel, config, 9, default_initial_params(), 3);
    CHECK(a.params == b.params);
    CHECK(a.train_sse == b.train_sse);
    CHECK(a.starts_run == 3);
}

TEST_CASE("bootstrap intervals contain the point estimate") {
    SmallWorld w(small_spec(0.05));
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    OptimizerConfig config;
    config.starts = 1;
    auto result = calibrate(w.model, panel, config, 1, BehaviorParams::published());
    param_confidence(result, w.model, panel, 20, 60, 1e-12, 3);
    CHECK(result.bootstrap_used + result.bootstrap_dropped == 20);
    const auto point = result.params.to_array();
    for (std::size_t i = 0; i < point.size(); ++i) {
        CHECK(result.param_cis[i].lower <= point[i]);
        CHECK(point[i] <= result.param_cis[i].upper);
    }
}

TEST_CASE("bootstrap intervals collapse on a noiseless panel") {
    SmallWorld w(small_spec());
    const auto panel = split_panel(w.dataset.tables().panel, 0.8, 1);
    OptimizerConfig config;
    config.starts = 1;
    auto result = calibrate(w.model, panel, config, 1, BehaviorParams::published());
    param_confidence(result, w.model, panel, 20, 60, 1e-12, 3);
    const auto point = result.params.to_array();
    for (std::size_t i = 0; i < point.size(); ++i) {
        CHECK(result.param_cis[i].upper - result.param_cis[i].lower <=
              1e-4 * std::max(1.0, std::abs(point[i])));
    }
}

}
