#include "remitsim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace remitsim {

double gravity_per_migrant(double y_dest, double y_origin, double beta_exp) {
    if (!(y_dest > 0.0) || !(y_origin > 0.0)) {
        throw DomainError("incomes must be positive");
    }
    if (y_dest < y_origin) {
        return y_origin;
    }
    return y_origin + std::pow(y_dest - y_origin, beta_exp);
}

namespace {

double annual_stock(const Dataset &dataset, const CountryCode &origin,
                    const CountryCode &destination, int year) {
    const int first = YearMonth(year, 1) - kWindowStart;
    double total = 0.0;
    for (Sex sex : kSexes) {
        auto it = dataset.monthly_stocks().find(StockKey{origin, destination, sex});
        if (it == dataset.monthly_stocks().end()) {
            continue;
        }
        for (int m = first; m < first + 12; ++m) {
            total += it->second.at(m);
        }
    }
    return total / 12.0;
}

} // namespace

std::vector<AnnualFlowMatrix> gravity_flows(const Dataset &dataset, double beta_exp,
                                            int first_year, int last_year) {
    if (first_year < kWindowStart.year() || last_year > kWindowEnd.year() ||
        first_year > last_year) {
        throw DomainError("gravity years must lie within 2010-2019");
    }
    std::vector<AnnualFlowMatrix> out;
    for (int year = first_year; year <= last_year; ++year) {
        AnnualFlowMatrix matrix;
        matrix.year = year;
        for (const auto &[origin, destination] : dataset.corridors()) {
            const double y_origin = dataset.economics(origin, year).gdp_per_capita;
            const double y_dest = dataset.economics(destination, year).gdp_per_capita;
            const double stock = annual_stock(dataset, origin, destination, year);
            matrix.entries[{destination, origin}] =
                gravity_per_migrant(y_dest, y_origin, beta_exp) * stock;
        }
        out.push_back(std::move(matrix));
    }
    return out;
}

std::map<CountryCode, double> recipient_totals(const AnnualFlowMatrix &matrix) {
    std::map<CountryCode, double> totals;
    for (const auto &[key, value] : matrix.entries) {
        totals[key.second] += value;
    }
    return totals;
}

GravityFit calibrate_gravity(std::span<const PanelObservation> panel, const Dataset &dataset) {
    if (panel.empty()) {
        throw DomainError("gravity calibration needs a non-empty panel");
    }
    struct Obs {
        double y_dest;
        double y_origin;
        double stock;
        double observed;
    };
    std::vector<Obs> obs;
    std::size_t skipped = 0;
    for (const auto &o : panel) {
        const int year = o.month.year();
        if (o.month < kWindowStart || o.month > kWindowEnd) {
            ++skipped;
            continue;
        }
        const double stock = annual_stock(dataset, o.recipient, o.sender, year);
        obs.push_back({dataset.economics(o.sender, year).gdp_per_capita,
                       dataset.economics(o.recipient, year).gdp_per_capita, stock, o.amount_usd});
    }
    if (skipped > 0) {
        spdlog::warn("{} panel observations lie outside the gravity window", skipped);
    }
    auto sse = [&](double beta) {
        double s = 0.0;
        for (const auto &o : obs) {
            const double r = gravity_per_migrant(o.y_dest, o.y_origin, beta) * o.stock / 12.0 -
                             o.observed;
            s += r * r;
        }
        return s;
    };

    constexpr int kGrid = 64;
    auto search = [&](double lo, double hi) {
        std::vector<double> xs(kGrid + 1);
        std::vector<double> fs(kGrid + 1);
        for (int i = 0; i <= kGrid; ++i) {
            xs[i] = lo + (hi - lo) * i / kGrid;
            fs[i] = sse(xs[i]);
        }
        return std::pair{xs, fs};
    };

    GravityFit fit;
    double lo = 0.01;
    double hi = 2.0;
    auto [xs, fs] = search(lo, hi);
    auto best_index = [&] {
        return static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    };
    std::size_t best = best_index();
    if (best == 0 || best == fs.size() - 1) {
        lo = 0.001;
        hi = 4.0;
        std::tie(xs, fs) = search(lo, hi);
        best = best_index();
    }

    const auto [fmin_it, fmax_it] = std::minmax_element(fs.begin(), fs.end());
    if (*fmax_it - *fmin_it <= 1e-12 * std::max(1.0, std::abs(*fmin_it))) {
        fit.beta_exp = xs[best];
        fit.sse = fs[best];
        fit.warning = true;
        fit.message = "flat loss; returning best grid point";
        spdlog::warn("gravity calibration: {}", fit.message);
        return fit;
    }
    int local_minima = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const bool left = i == 0 || fs[i] < fs[i - 1];
        const bool right = i + 1 == fs.size() || fs[i] < fs[i + 1];
        if (left && right) {
            ++local_minima;
        }
    }
    if (local_minima > 1) {
        fit.beta_exp = xs[best];
        fit.sse = fs[best];
        fit.warning = true;
        fit.message = "loss is not unimodal; returning best grid point";
        spdlog::warn("gravity calibration: {}", fit.message);
        return fit;
    }
    if (best == 0 || best == fs.size() - 1) {
        fit.beta_exp = xs[best];
        fit.sse = fs[best];
        fit.at_boundary = true;
        fit.message = "optimum on search boundary";
        spdlog::warn("gravity calibration: {}", fit.message);
        return fit;
    }

    // Golden-section search on the bracket around the best grid point.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = xs[best - 1];
    double b = xs[best + 1];
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = sse(c);
    double fd = sse(d);
    while (b - a > 1e-9) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sse(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sse(d);
        }
    }
    fit.beta_exp = 0.5 * (a + b);
    fit.sse = sse(fit.beta_exp);
    return fit;
}

ComparisonReport compare_estimates(std::vector<CorridorEstimate> estimates, std::size_t excluded) {
    ComparisonReport report;
    report.excluded = excluded;
    double rel_structural = 0.0;
    double rel_gravity = 0.0;
    std::size_t rel_count = 0;
    for (auto &e : estimates) {
        ComparisonRow row;
        row.estimate = e;
        row.se_structural = (e.structural - e.observed) * (e.structural - e.observed);
        row.se_gravity = (e.gravity - e.observed) * (e.gravity - e.observed);
        if (e.observed > 0.0) {
            rel_structural += std::abs(e.structural - e.observed) / e.observed;
            rel_gravity += std::abs(e.gravity - e.observed) / e.observed;
            ++rel_count;
        }
        report.rows.push_back(std::move(row));
    }
    if (rel_count > 0) {
        report.mean_relative_error_structural = rel_structural / static_cast<double>(rel_count);
        report.mean_relative_error_gravity = rel_gravity / static_cast<double>(rel_count);
    }
    if (report.mean_relative_error_gravity > 0.0) {
        report.error_ratio =
            report.mean_relative_error_structural / report.mean_relative_error_gravity;
    } else {
        report.error_ratio = report.mean_relative_error_structural > 0.0
                                 ? std::numeric_limits<double>::infinity()
                                 : 1.0;
    }

    auto extremes = [&](auto error_of, bool over) {
        std::vector<ComparisonRow> rows;
        for (const auto &r : report.rows) {
            const double err = error_of(r);
            if (over ? err > 0.0 : err < 0.0) {
                rows.push_back(r);
            }
        }
        std::stable_sort(rows.begin(), rows.end(), [&](const auto &a, const auto &b) {
            return over ? error_of(a) > error_of(b) : error_of(a) < error_of(b);
        });
        if (rows.size() > 5) {
            rows.resize(5);
        }
        return rows;
    };
    auto structural_error = [](const ComparisonRow &r) {
        return r.estimate.structural - r.estimate.observed;
    };
    auto gravity_error = [](const ComparisonRow &r) {
        return r.estimate.gravity - r.estimate.observed;
    };
    report.largest_over_structural = extremes(structural_error, true);
    report.largest_under_structural = extremes(structural_error, false);
    report.largest_over_gravity = extremes(gravity_error, true);
    report.largest_under_gravity = extremes(gravity_error, false);
    return report;
}

ComparisonReport compare_models(const std::vector<FlowMatrix> &structural,
                                const std::vector<AnnualFlowMatrix> &gravity,
                                std::span<const PanelObservation> panel) {
    std::map<YearMonth, const FlowMatrix *> by_month;
    for (const auto &m : structural) {
        by_month[m.month] = &m;
    }
    std::map<int, const AnnualFlowMatrix *> by_year;
    for (const auto &g : gravity) {
        by_year[g.year] = &g;
    }

    struct Sums {
        double observed = 0.0;
        double structural = 0.0;
        double gravity = 0.0;
        int months = 0;
        bool missing = false;
    };
    std::map<FlowKey, Sums> corridors;
    for (const auto &obs : panel) {
        const FlowKey key{obs.sender, obs.recipient};
        auto &s = corridors[key];
        const auto month_it = by_month.find(obs.month);
        const auto year_it = by_year.find(obs.month.year());
        if (month_it == by_month.end() || year_it == by_year.end()) {
            s.missing = true;
            continue;
        }
        const auto st = month_it->second->entries.find(key);
        const auto gr = year_it->second->entries.find(key);
        if (st == month_it->second->entries.end() || gr == year_it->second->entries.end()) {
            s.missing = true;
            continue;
        }
        s.observed += obs.amount_usd;
        s.structural += st->second;
        s.gravity += gr->second / 12.0;
        s.months += 1;
    }

    std::vector<CorridorEstimate> estimates;
    std::size_t excluded = 0;
    for (const auto &[key, s] : corridors) {
        if (s.missing || s.months == 0) {
            ++excluded;
            continue;
        }
        const double scale = 12.0 / s.months;
        estimates.push_back({key.first, key.second, s.observed * scale, s.structural * scale,
                             s.gravity * scale});
    }
    if (excluded > 0) {
        spdlog::warn("{} corridors excluded from the model comparison", excluded);
    }
    return compare_estimates(std::move(estimates), excluded);
}

} // namespace remitsim
