#include "remitsim/scenarios.hpp"

#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace remitsim {

Scenario Scenario::factual(const RemittanceModel &model) {
    return {"factual", model.all_events()};
}

Scenario Scenario::no_disaster(const RemittanceModel &model) {
    return {"no_disaster", model.no_events()};
}

Scenario Scenario::only_hazard(const RemittanceModel &model, Hazard hazard) {
    Scenario s{fmt::format("only_{}", to_string(hazard)), model.no_events()};
    const auto &events = model.dataset().tables().disasters;
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (events[e].hazard == hazard) {
            s.weights[e] = 1.0;
        }
    }
    return s;
}

Scenario Scenario::all_but_hazard(const RemittanceModel &model, Hazard hazard) {
    Scenario s{fmt::format("without_{}", to_string(hazard)), model.all_events()};
    const auto &events = model.dataset().tables().disasters;
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (events[e].hazard == hazard) {
            s.weights[e] = 0.0;
        }
    }
    return s;
}

Scenario Scenario::only_event(const RemittanceModel &model, std::size_t event_index) {
    Scenario s{fmt::format("only_{}", model.dataset().tables().disasters.at(event_index).event_id),
               model.no_events()};
    s.weights[event_index] = 1.0;
    return s;
}

namespace {

double sum_matrices(const std::vector<FlowMatrix> &matrices) {
    double total = 0.0;
    for (const auto &m : matrices) {
        total += m.total();
    }
    return total;
}

EventWeights multiply(const EventWeights &a, const EventWeights &b) {
    EventWeights out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * b[i];
    }
    return out;
}

} // namespace

double ScenarioResult::total_factual() const { return sum_matrices(factual); }
double ScenarioResult::total_counterfactual() const { return sum_matrices(counterfactual); }
double ScenarioResult::total_induced() const { return sum_matrices(induced); }

ScenarioResult run_counterfactual(const RemittanceModel &model, const BehaviorParams &params,
                                  const Scenario &counterfactual, int threads,
                                  EventWeights factual_weights) {
    if (factual_weights.empty()) {
        factual_weights = model.all_events();
    }
    ScenarioResult result;
    result.scenario_id = counterfactual.id;
    result.factual = build_flow_matrices(model, params, factual_weights, threads);
    result.counterfactual = build_flow_matrices(model, params, counterfactual.weights, threads);
    result.induced = result.factual;
    for (std::size_t m = 0; m < result.induced.size(); ++m) {
        for (auto &[key, value] : result.induced[m].entries) {
            value = result.factual[m].entries.at(key) - result.counterfactual[m].entries.at(key);
        }
    }
    return result;
}

AttributionReport attribute_by_hazard(const RemittanceModel &model, const BehaviorParams &params,
                                      AttributionConvention convention, int threads,
                                      EventWeights base_weights) {
    if (base_weights.empty()) {
        base_weights = model.all_events();
    }
    const auto none = build_flow_matrices(model, params, model.no_events(), threads);
    const auto all = build_flow_matrices(model, params, base_weights, threads);
    const double total_none = sum_matrices(none);
    const double total_all = sum_matrices(all);

    AttributionReport report;
    report.convention = convention;
    report.total_factual = total_all;
    report.total_induced = total_all - total_none;

    const auto &events = model.dataset().tables().disasters;
    const YearMonth first = model.population().start();
    const YearMonth last = model.population().month(model.month_count() - 1);

    double attributed = 0.0;
    for (Hazard hazard : kHazards) {
        const Scenario scenario = convention == AttributionConvention::only_hazard
                                      ? Scenario::only_hazard(model, hazard)
                                      : Scenario::all_but_hazard(model, hazard);
        const auto flows =
            build_flow_matrices(model, params, multiply(scenario.weights, base_weights), threads);
        HazardAttribution h;
        h.hazard = hazard;
        h.induced_usd = convention == AttributionConvention::only_hazard
                            ? sum_matrices(flows) - total_none
                            : total_all - sum_matrices(flows);
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto &event = events[e];
            const bool overlaps = event.onset <= last && event.onset + (kDisasterWindow - 1) >= first;
            if (event.hazard == hazard && overlaps) {
                h.affected_persons += event.affected * base_weights[e];
            }
        }
        if (h.affected_persons > 0.0) {
            h.usd_per_affected = h.induced_usd / h.affected_persons;
        } else {
            spdlog::warn("hazard {} affected nobody; per-person ratio undefined", to_string(hazard));
        }
        h.share_of_total = total_all > 0.0 ? h.induced_usd / total_all : 0.0;
        attributed += h.induced_usd;
        report.hazards.push_back(h);
    }
    report.interaction_residual = report.total_induced - attributed;
    return report;
}

EventAttribution attribute_event(const RemittanceModel &model, const BehaviorParams &params,
                                 const std::string &event_id) {
    const auto &events = model.dataset().tables().disasters;
    std::optional<std::size_t> index;
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (events[e].event_id == event_id) {
            index = e;
            break;
        }
    }
    if (!index) {
        throw DataError(fmt::format("unknown event id '{}'", event_id));
    }
    const auto &event = events[*index];
    const auto only = Scenario::only_event(model, *index);
    const auto none = model.no_events();

    EventAttribution out;
    out.event_id = event_id;
    const auto &population = model.population();
    for (std::size_t c = 0; c < model.corridor_count(); ++c) {
        const auto &corridor = population.corridors()[c];
        if (corridor.origin != event.country) {
            continue;
        }
        double induced = 0.0;
        for (int offset = 0; offset < kDisasterWindow; ++offset) {
            const int m = (event.onset + offset) - population.start();
            if (m < 0 || m >= model.month_count()) {
                continue;
            }
            const double baseline = model.expected_flow(c, m, params, none);
            induced += model.expected_flow(c, m, params, only.weights) - baseline;
            out.baseline_usd_12m += baseline;
        }
        out.induced_by_corridor[{corridor.destination, corridor.origin}] = induced;
        out.induced_usd_12m += induced;
    }
    out.relative_increase =
        out.baseline_usd_12m > 0.0 ? out.induced_usd_12m / out.baseline_usd_12m : 0.0;
    return out;
}

UncertaintyBand induced_band(const RemittanceModel &model, const BehaviorParams &params,
                             const Scenario &counterfactual, std::uint64_t seed, int draws,
                             int threads) {
    const auto factual = sample_model_totals(model, params, model.all_events(), seed, draws,
                                             threads);
    const auto counter = sample_model_totals(model, params, counterfactual.weights, seed, draws,
                                             threads);
    std::vector<double> diff(factual.size());
    for (std::size_t d = 0; d < diff.size(); ++d) {
        diff[d] = factual[d] - counter[d];
    }
    return confidence_band(diff, fmt::format("induced_{}", counterfactual.id));
}

std::string_view to_string(Grouping grouping) {
    switch (grouping) {
    case Grouping::income_group:
        return "income_group";
    case Grouping::country:
        return "country";
    case Grouping::year:
        return "year";
    }
    return "unknown";
}

std::vector<SummaryRow> summarize(const ScenarioResult &result, const Dataset &dataset,
                                  Grouping grouping) {
    struct Acc {
        double factual = 0.0;
        double counterfactual = 0.0;
        double induced = 0.0;
        // (country, year) pairs contributing to denominators
        std::set<std::pair<CountryCode, int>> recipients;
        std::set<int> years;
    };
    std::map<std::string, Acc> groups;
    for (std::size_t m = 0; m < result.factual.size(); ++m) {
        const int year = result.factual[m].month.year();
        for (const auto &[key, value] : result.factual[m].entries) {
            const auto &recipient = key.second;
            std::string group;
            switch (grouping) {
            case Grouping::income_group:
                group = std::string(to_string(dataset.economics(recipient, year).income_group));
                break;
            case Grouping::country:
                group = recipient;
                break;
            case Grouping::year:
                group = std::to_string(year);
                break;
            }
            auto &acc = groups[group];
            acc.factual += value;
            acc.counterfactual += result.counterfactual[m].entries.at(key);
            acc.induced += result.induced[m].entries.at(key);
            acc.recipients.emplace(recipient, year);
            acc.years.insert(year);
        }
    }
    double total_induced = 0.0;
    for (const auto &[name, acc] : groups) {
        total_induced += acc.induced;
    }
    std::vector<SummaryRow> rows;
    for (const auto &[name, acc] : groups) {
        SummaryRow row;
        row.group = name;
        row.factual_usd = acc.factual;
        row.counterfactual_usd = acc.counterfactual;
        row.induced_usd = acc.induced;
        row.share_of_induced = total_induced != 0.0 ? acc.induced / total_induced : 0.0;
        row.induced_share_of_flows = acc.factual > 0.0 ? acc.induced / acc.factual : 0.0;
        double population = 0.0;
        double gdp = 0.0;
        for (const auto &[country, year] : acc.recipients) {
            const auto &econ = dataset.economics(country, year);
            population += econ.population;
            gdp += econ.population * econ.gdp_per_capita;
        }
        const auto years = static_cast<double>(std::max<std::size_t>(1, acc.years.size()));
        row.population = population / years;
        row.gdp_usd = gdp / years;
        row.induced_per_capita = row.population > 0.0 ? acc.induced / row.population : 0.0;
        row.induced_per_gdp = row.gdp_usd > 0.0 ? acc.induced / row.gdp_usd : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace remitsim
