#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "remitsim/types.hpp"

namespace remitsim {

struct CountryEconomics {
    CountryCode country;
    int year = 0;
    double gdp_per_capita = 0.0;
    double population = 0.0;
    IncomeGroup income_group = IncomeGroup::low;

    bool operator==(const CountryEconomics &) const = default;
};

struct MigrantStockRecord {
    CountryCode origin;
    CountryCode destination;
    Sex sex = Sex::male;
    int anchor_year = 0;
    double count = 0.0;

    bool operator==(const MigrantStockRecord &) const = default;
};

struct AgeProfileRecord {
    Sex sex = Sex::male;
    int age = 0;
    double share = 0.0;

    bool operator==(const AgeProfileRecord &) const = default;
};

struct SurplusRecord {
    CountryCode country; // or GLOBAL_DEFAULT
    int age = 0;
    double surplus = 0.0;

    bool operator==(const SurplusRecord &) const = default;
};

struct DisasterEvent {
    std::string event_id;
    CountryCode country;
    YearMonth onset;
    Hazard hazard = Hazard::flood;
    double affected = 0.0;

    bool operator==(const DisasterEvent &) const = default;
};

struct PanelObservation {
    CountryCode sender;
    CountryCode recipient;
    YearMonth month;
    double amount_usd = 0.0;
    SplitTag split = SplitTag::unassigned;

    bool operator==(const PanelObservation &) const = default;
};

/// Raw rows of every input file, in file order.
struct Tables {
    std::vector<CountryEconomics> economics;
    std::vector<MigrantStockRecord> stocks;
    std::vector<AgeProfileRecord> age_profiles;
    std::vector<SurplusRecord> surplus_profiles;
    std::vector<DisasterEvent> disasters;
    std::vector<PanelObservation> panel;

    bool operator==(const Tables &) const = default;
};

/// Identifies one (origin, destination, sex) stock series.
struct StockKey {
    CountryCode origin;
    CountryCode destination;
    Sex sex = Sex::male;

    auto operator<=>(const StockKey &) const = default;
};

using MonthlySeries = std::vector<double>;

/// Monthly stock series from January 2010 to December 2019 per (origin,
/// destination, sex), from a natural cubic spline through the 2010/2015/2020
/// anchors placed at January of each year. Values are clamped at zero.
std::map<StockKey, MonthlySeries>
interpolate_stocks_monthly(std::span<const MigrantStockRecord> anchors);

/// Spline through three anchors evaluated at the 120 window months, clamped at zero.
MonthlySeries interpolate_anchor_triplet(const std::array<double, 3> &anchors);

/// Validated, immutable input dataset with lookup indices.
class Dataset {
  public:
    /// Validates every table and cross-reference; throws DataError with the
    /// offending file, row and column. Nothing is returned on failure.
    static Dataset from_tables(Tables tables);

    const Tables &tables() const { return tables_; }

    /// Countries present in economics.csv, sorted.
    const std::vector<CountryCode> &countries() const { return countries_; }
    bool has_country(std::string_view code) const;

    const CountryEconomics &economics(std::string_view country, int year) const;
    const CountryEconomics *find_economics(std::string_view country, int year) const;

    const AgeArray &age_profile(Sex sex) const { return age_profiles_[static_cast<int>(sex)]; }

    /// Destination-specific surplus profile, else GLOBAL_DEFAULT.
    const AgeArray &surplus_profile(std::string_view destination) const;

    /// Interpolated monthly stocks (window months).
    const std::map<StockKey, MonthlySeries> &monthly_stocks() const { return monthly_stocks_; }

    /// Sorted unique (origin, destination) corridors with any stock.
    const std::vector<std::pair<CountryCode, CountryCode>> &corridors() const {
        return corridors_;
    }

    /// Events affecting `country`, in file order.
    std::vector<const DisasterEvent *> events_for(std::string_view country) const;
    const DisasterEvent *find_event(std::string_view event_id) const;

    /// Stable content hash over all tables, used to check that nothing mutates the dataset.
    std::uint64_t content_hash() const;

  private:
    Dataset() = default;

    Tables tables_;
    std::vector<CountryCode> countries_;
    std::map<std::pair<CountryCode, int>, std::size_t, std::less<>> economics_index_;
    std::array<AgeArray, 2> age_profiles_{};
    std::map<CountryCode, AgeArray, std::less<>> surplus_profiles_;
    std::map<StockKey, MonthlySeries> monthly_stocks_;
    std::vector<std::pair<CountryCode, CountryCode>> corridors_;
};

/// File names of the input tables inside a data directory.
struct DataPaths {
    std::filesystem::path economics;
    std::filesystem::path stocks;
    std::filesystem::path age_profiles;
    std::filesystem::path surplus_profiles;
    std::filesystem::path disasters;
    std::filesystem::path panel;

    static DataPaths in_directory(const std::filesystem::path &dir);
    std::vector<std::filesystem::path> all() const;
};

/// Parses every table and validates. The panel file is optional: a missing
/// panel.csv yields an empty panel.
Dataset load_dataset(const DataPaths &paths);

/// Parses without cross-validation (used by load_dataset and by tests).
Tables read_tables(const DataPaths &paths);

/// Writes the six CSV files in the documented schemas.
void write_tables(const Tables &tables, const std::filesystem::path &dir);

} // namespace remitsim
