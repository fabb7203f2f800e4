#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "remitsim/behavior.hpp"
#include "remitsim/dataio.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("remitsim-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const fs::path &path() const { return path_; }
    fs::path operator/(const std::string &name) const { return path_ / name; }

  private:
    fs::path path_;
};

inline std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void spit(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Small seeded generator for property tests.
class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::uint64_t seed() { return rng_(); }

  private:
    std::mt19937_64 rng_;
};

/// One origin "AAA" and one destination "BBB" with flat GDP, a profile that
/// spreads migrants over ages 0-79 and a step surplus profile.
inline remitsim::Tables two_country_tables(double origin_gdp = 8000.0,
                                           double dest_gdp = 36000.0) {
    using namespace remitsim;
    Tables t;
    for (int year = 2010; year <= 2019; ++year) {
        t.economics.push_back({"AAA", year, origin_gdp, 1e7, IncomeGroup::lower_middle});
        t.economics.push_back({"BBB", year, dest_gdp, 5e7, IncomeGroup::high});
    }
    for (Sex sex : kSexes) {
        const std::vector<double> anchors =
            sex == Sex::male ? std::vector<double>{1000, 1200, 1500}
                             : std::vector<double>{800, 900, 1000};
        for (int a = 0; a < 3; ++a) {
            t.stocks.push_back({"AAA", "BBB", sex, kAnchorYears[a], anchors[a]});
        }
        for (int age = 0; age <= kMaxAge; ++age) {
            t.age_profiles.push_back({sex, age, age < 80 ? 1.0 / 80.0 : 0.0});
        }
    }
    for (int age = 0; age <= kMaxAge; ++age) {
        t.surplus_profiles.push_back({std::string(kGlobalDefault), age, age < 16 ? 0.0 : 0.5});
    }
    return t;
}

/// Expected flow of one corridor-month recomputed directly from the raw tables,
/// sharing no code with the model.
inline double brute_force_flow(const remitsim::Dataset &ds, const std::string &origin,
                               const std::string &dest, int month_index,
                               const remitsim::BehaviorParams &p, bool with_events = true) {
    const remitsim::YearMonth month = remitsim::kWindowStart + month_index;
    const int year = month.year();
    std::vector<double> origin_gdp;
    std::set<remitsim::CountryCode> origins;
    for (const auto &[o, d] : ds.corridors()) {
        origins.insert(o);
    }
    for (const auto &r : ds.tables().economics) {
        if (origins.count(r.country)) {
            origin_gdp.push_back(r.gdp_per_capita);
        }
    }
    const double lo = *std::min_element(origin_gdp.begin(), origin_gdp.end());
    const double hi = *std::max_element(origin_gdp.begin(), origin_gdp.end());
    const double gi = ds.economics(origin, year).gdp_per_capita;
    const double gj = ds.economics(dest, year).gdp_per_capita;
    const double delta = gj > gi ? (gj - gi) / gi : -(gi - gj) / gj;
    const double norm = hi > lo ? (gi - lo) / (hi - lo) : 0.0;

    double male = 0, female = 0, young = 0, parenting = 0;
    std::array<std::array<double, remitsim::kAgeCount>, 2> n{};
    for (remitsim::Sex sex : remitsim::kSexes) {
        const double stock = ds.monthly_stocks().at({origin, dest, sex})[month_index];
        for (const auto &r : ds.tables().age_profiles) {
            if (r.sex != sex) {
                continue;
            }
            const double c = stock * r.share;
            n[static_cast<int>(sex)][r.age] = c;
            (sex == remitsim::Sex::male ? male : female) += c;
            if (r.age < 25) {
                young += c;
            } else if (r.age <= 50) {
                parenting += c;
            }
        }
    }
    auto sym = [](double a, double b) { return a + b == 0 ? 0.0 : std::min(a, b) / ((a + b) / 2); };
    const double family = 1.0 - sym(male, female) * sym(young, parenting);

    double score = 0.0;
    for (const auto &e : ds.tables().disasters) {
        const int k = month - e.onset;
        if (with_events && e.country == origin && k >= 0 && k < 12) {
            const double m =
                std::min(e.affected / ds.economics(origin, e.onset.year()).population, 1.0);
            score += m * (p.height + p.shape * std::sin(std::numbers::pi / 6 * (k + p.shift)));
        }
    }
    const remitsim::AgeArray &surplus = ds.surplus_profile(dest);
    double flow = 0.0;
    for (int age = 0; age <= remitsim::kMaxAge; ++age) {
        if (surplus[age] <= 0) {
            continue;
        }
        const double t = p.alpha + p.beta0 * surplus[age] + p.beta1 * family + p.beta2 * delta +
                         p.beta3 * norm + score;
        const double prob = 1.0 / (1.0 + std::exp(-t));
        flow += (n[0][age] + n[1][age]) * prob * p.rho * gj / 12.0;
    }
    return flow;
}

} // namespace testing
