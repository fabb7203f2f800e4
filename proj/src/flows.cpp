#include "remitsim/flows.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/random/binomial_distribution.hpp>
#include <fmt/format.h>

#include "remitsim/hashing.hpp"
#include "remitsim/parallel.hpp"

namespace remitsim {

double FlowMatrix::total() const {
    double sum = 0.0;
    for (const auto &[key, value] : entries) {
        sum += value;
    }
    return sum;
}

double expected_flow(std::span<const double> counts, std::span<const double> probabilities,
                     double rho, double gdp_dest_monthly) {
    if (counts.size() != probabilities.size()) {
        throw DomainError("counts and probabilities differ in length");
    }
    double senders = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        senders += counts[i] * probabilities[i];
    }
    return senders * rho * gdp_dest_monthly;
}

std::vector<FlowMatrix> build_flow_matrices(const RemittanceModel &model,
                                            const BehaviorParams &params,
                                            const EventWeights &weights, int threads) {
    const int months = model.month_count();
    const std::size_t corridors = model.corridor_count();
    std::vector<double> values(corridors * months);
    parallel_for(corridors, threads, [&](std::size_t c) {
        for (int m = 0; m < months; ++m) {
            values[c * months + m] = model.expected_flow(c, m, params, weights);
        }
    });

    std::vector<FlowMatrix> out(months);
    for (int m = 0; m < months; ++m) {
        out[m].month = model.population().month(m);
        for (std::size_t c = 0; c < corridors; ++c) {
            const auto &corridor = model.population().corridors()[c];
            out[m].entries.emplace(FlowKey{corridor.destination, corridor.origin},
                                   values[c * months + m]);
        }
    }
    return out;
}

namespace {

long long integer_count(double count) {
    // nearbyint honours the default round-half-to-even mode.
    return static_cast<long long>(std::nearbyint(count));
}

double quantile_sorted(const std::vector<double> &sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

std::vector<long long> sample_senders(std::span<const double> counts,
                                      std::span<const double> probabilities, std::uint64_t seed,
                                      int draws) {
    if (draws < 1) {
        throw DomainError("draws must be at least 1");
    }
    if (counts.size() != probabilities.size()) {
        throw DomainError("counts and probabilities differ in length");
    }
    std::vector<long long> senders(static_cast<std::size_t>(draws), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const long long n = integer_count(counts[i]);
        const double p = probabilities[i];
        if (n <= 0 || p <= 0.0) {
            continue;
        }
        // One stream per cohort keeps runs that differ only in some cohorts'
        // probabilities on common random numbers for every other cohort.
        std::mt19937_64 rng(mix_seed(seed, i));
        if (p >= 1.0) {
            for (auto &s : senders) {
                s += n;
            }
            continue;
        }
        boost::random::binomial_distribution<long long, double> binomial(n, p);
        for (auto &s : senders) {
            s += binomial(rng);
        }
    }
    return senders;
}

std::vector<double> sample_flows(std::span<const double> counts,
                                 std::span<const double> probabilities, double rho,
                                 double gdp_dest_monthly, std::uint64_t seed, int draws) {
    const auto senders = sample_senders(counts, probabilities, seed, draws);
    std::vector<double> totals(senders.size());
    for (std::size_t d = 0; d < senders.size(); ++d) {
        totals[d] = static_cast<double>(senders[d]) * rho * gdp_dest_monthly;
    }
    return totals;
}

std::vector<std::vector<double>> sample_monthly_totals(const RemittanceModel &model,
                                                       const BehaviorParams &params,
                                                       const EventWeights &weights,
                                                       std::uint64_t seed, int draws,
                                                       int threads) {
    if (draws < 1) {
        throw DomainError("draws must be at least 1");
    }
    const int months = model.month_count();
    const std::size_t corridors = model.corridor_count();
    // [corridor][month * draws + d]
    std::vector<std::vector<double>> per_corridor(corridors);
    parallel_for(corridors, threads, [&](std::size_t c) {
        auto &out = per_corridor[c];
        out.assign(static_cast<std::size_t>(months) * draws, 0.0);
        std::vector<double> counts;
        std::vector<double> probs;
        AgeArray p;
        for (int m = 0; m < months; ++m) {
            model.probabilities(c, m, params, weights, p);
            const auto &table = model.population().corridors()[c].months[m];
            counts.clear();
            probs.clear();
            for (int age = 0; age <= kMaxAge; ++age) {
                // Both sexes share P, so their binomials merge into one.
                counts.push_back(static_cast<double>(integer_count(table.counts[0][age]) +
                                                     integer_count(table.counts[1][age])));
                probs.push_back(p[age]);
            }
            const std::uint64_t stream = mix_seed(seed, c * static_cast<std::size_t>(months) + m);
            const auto totals = sample_flows(counts, probs, params.rho,
                                             model.covariates(c, m).gdp_dest_monthly, stream,
                                             draws);
            std::copy(totals.begin(), totals.end(), out.begin() + static_cast<long>(m) * draws);
        }
    });
    std::vector<std::vector<double>> result(months, std::vector<double>(draws, 0.0));
    for (const auto &row : per_corridor) {
        for (int m = 0; m < months; ++m) {
            for (int d = 0; d < draws; ++d) {
                result[m][d] += row[static_cast<std::size_t>(m) * draws + d];
            }
        }
    }
    return result;
}

std::vector<double> sample_model_totals(const RemittanceModel &model,
                                        const BehaviorParams &params,
                                        const EventWeights &weights, std::uint64_t seed,
                                        int draws, int threads) {
    const auto monthly = sample_monthly_totals(model, params, weights, seed, draws, threads);
    std::vector<double> out(draws, 0.0);
    for (const auto &month : monthly) {
        for (int d = 0; d < draws; ++d) {
            out[d] += month[d];
        }
    }
    return out;
}

double empirical_quantile(std::vector<double> samples, double q) {
    if (samples.empty()) {
        throw DomainError("quantile of empty sample");
    }
    std::sort(samples.begin(), samples.end());
    return quantile_sorted(samples, q);
}

UncertaintyBand confidence_band(std::span<const double> samples, std::string aggregate_id) {
    if (samples.size() < kMinBandSamples) {
        throw DomainError(fmt::format("confidence band needs at least {} samples, got {}",
                                      kMinBandSamples, samples.size()));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double s : samples) {
        sum += s;
    }
    UncertaintyBand band;
    band.aggregate_id = std::move(aggregate_id);
    band.level = 0.95;
    band.lower = quantile_sorted(sorted, 0.025);
    band.upper = quantile_sorted(sorted, 0.975);
    band.mean = std::clamp(sum / static_cast<double>(samples.size()), band.lower, band.upper);
    return band;
}

} // namespace remitsim
