#include "remitsim/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "remitsim/csv.hpp"
#include "remitsim/hashing.hpp"
#include "remitsim/spline.hpp"

namespace remitsim {

namespace {

constexpr const char *kEconomicsFile = "economics.csv";
constexpr const char *kStocksFile = "stocks.csv";
constexpr const char *kAgeProfilesFile = "age_profiles.csv";
constexpr const char *kSurplusFile = "surplus_profiles.csv";
constexpr const char *kDisastersFile = "disasters.csv";
constexpr const char *kPanelFile = "panel.csv";

constexpr double kShareSumTolerance = 1e-9;
constexpr double kAffectedSanityFactor = 10.0;
constexpr int kWorkingAge = 16;

[[noreturn]] void fail(std::string_view file, std::size_t index, std::string_view column,
                       std::string_view message) {
    throw DataError(fmt::format("{}: row {}: column '{}': {}", file, index + 1, column, message));
}

bool is_country_code(std::string_view code) {
    return code.size() == 3 && std::all_of(code.begin(), code.end(), [](char c) {
               return c >= 'A' && c <= 'Z';
           });
}

void check_code(std::string_view file, std::size_t row, std::string_view column,
                std::string_view code) {
    if (!is_country_code(code)) {
        fail(file, row, column, fmt::format("'{}' is not an ISO alpha-3 country code", code));
    }
}

int age_in_range(std::string_view file, std::size_t row, long long age) {
    if (age < 0 || age > kMaxAge) {
        fail(file, row, "age", fmt::format("age {} outside 0-{}", age, kMaxAge));
    }
    return static_cast<int>(age);
}

} // namespace

MonthlySeries interpolate_anchor_triplet(const std::array<double, 3> &anchors) {
    std::array<double, 3> knots{};
    for (std::size_t i = 0; i < kAnchorYears.size(); ++i) {
        knots[i] = static_cast<double>(YearMonth(kAnchorYears[i], 1) - kWindowStart);
    }
    const NaturalCubicSpline spline(knots, anchors);
    MonthlySeries series(kWindowMonths);
    for (int m = 0; m < kWindowMonths; ++m) {
        series[m] = std::max(0.0, spline(static_cast<double>(m)));
    }
    return series;
}

std::map<StockKey, MonthlySeries>
interpolate_stocks_monthly(std::span<const MigrantStockRecord> anchors) {
    std::map<StockKey, std::array<double, 3>> grouped;
    std::map<StockKey, std::array<bool, 3>> seen;
    for (const auto &rec : anchors) {
        const auto it = std::find(kAnchorYears.begin(), kAnchorYears.end(), rec.anchor_year);
        if (it == kAnchorYears.end()) {
            throw DataError(fmt::format("anchor year {} is not one of 2010, 2015, 2020",
                                        rec.anchor_year));
        }
        const auto slot = static_cast<std::size_t>(it - kAnchorYears.begin());
        StockKey key{rec.origin, rec.destination, rec.sex};
        grouped[key][slot] = rec.count;
        seen[key][slot] = true;
    }
    std::map<StockKey, MonthlySeries> out;
    for (const auto &[key, values] : grouped) {
        const auto &flags = seen[key];
        for (std::size_t i = 0; i < flags.size(); ++i) {
            if (!flags[i]) {
                throw DataError(fmt::format("{}: corridor {}->{} ({}) is missing anchor year {}",
                                            kStocksFile, key.origin, key.destination,
                                            to_string(key.sex), kAnchorYears[i]));
            }
        }
        out.emplace(key, interpolate_anchor_triplet(values));
    }
    return out;
}

Dataset Dataset::from_tables(Tables input) {
    Dataset ds;
    ds.tables_ = std::move(input);
    const Tables &tables = ds.tables_;

    // economics.csv
    std::set<CountryCode> countries;
    for (std::size_t i = 0; i < tables.economics.size(); ++i) {
        const auto &row = tables.economics[i];
        check_code(kEconomicsFile, i, "country", row.country);
        if (!(row.gdp_per_capita > 0.0) || !std::isfinite(row.gdp_per_capita)) {
            fail(kEconomicsFile, i, "gdp_per_capita", "must be strictly positive");
        }
        if (!(row.population > 0.0) || !std::isfinite(row.population)) {
            fail(kEconomicsFile, i, "population", "must be strictly positive");
        }
        if (!ds.economics_index_.emplace(std::pair{row.country, row.year}, i).second) {
            fail(kEconomicsFile, i, "year",
                 fmt::format("duplicate row for ({}, {})", row.country, row.year));
        }
        countries.insert(row.country);
    }
    for (const auto &country : countries) {
        for (int year = kWindowStart.year(); year <= kWindowEnd.year(); ++year) {
            if (!ds.economics_index_.contains(std::pair{country, year})) {
                throw DataError(fmt::format("{}: country {} has no row for year {}",
                                            kEconomicsFile, country, year));
            }
        }
    }
    ds.countries_.assign(countries.begin(), countries.end());

    auto require_known = [&](std::string_view file, std::size_t row, std::string_view column,
                             const CountryCode &code) {
        check_code(file, row, column, code);
        if (!countries.contains(code)) {
            fail(file, row, column, fmt::format("unknown country code '{}'", code));
        }
    };

    // stocks.csv
    std::set<std::tuple<CountryCode, CountryCode, Sex, int>> stock_keys;
    for (std::size_t i = 0; i < tables.stocks.size(); ++i) {
        const auto &row = tables.stocks[i];
        require_known(kStocksFile, i, "origin", row.origin);
        require_known(kStocksFile, i, "destination", row.destination);
        if (row.origin == row.destination) {
            fail(kStocksFile, i, "destination", "origin and destination must differ");
        }
        if (std::find(kAnchorYears.begin(), kAnchorYears.end(), row.anchor_year) ==
            kAnchorYears.end()) {
            fail(kStocksFile, i, "anchor_year", "must be one of 2010, 2015, 2020");
        }
        if (!(row.count >= 0.0)) {
            fail(kStocksFile, i, "count", "negative value");
        }
        if (!stock_keys.emplace(row.origin, row.destination, row.sex, row.anchor_year).second) {
            fail(kStocksFile, i, "anchor_year", "duplicate anchor for corridor and sex");
        }
    }
    ds.monthly_stocks_ = interpolate_stocks_monthly(tables.stocks);
    {
        std::set<std::pair<CountryCode, CountryCode>> corridor_set;
        for (const auto &[key, series] : ds.monthly_stocks_) {
            corridor_set.emplace(key.origin, key.destination);
        }
        ds.corridors_.assign(corridor_set.begin(), corridor_set.end());
    }

    // age_profiles.csv
    std::array<std::array<bool, kAgeCount>, 2> age_seen{};
    std::array<bool, 2> sex_seen{};
    for (std::size_t i = 0; i < tables.age_profiles.size(); ++i) {
        const auto &row = tables.age_profiles[i];
        const int age = age_in_range(kAgeProfilesFile, i, row.age);
        if (!(row.share >= 0.0 && row.share <= 1.0)) {
            fail(kAgeProfilesFile, i, "share", "must lie in [0,1]");
        }
        const int s = static_cast<int>(row.sex);
        if (age_seen[s][age]) {
            fail(kAgeProfilesFile, i, "age", "duplicate (sex, age) row");
        }
        age_seen[s][age] = true;
        sex_seen[s] = true;
        ds.age_profiles_[s][age] = row.share;
    }
    for (Sex sex : kSexes) {
        const int s = static_cast<int>(sex);
        if (!sex_seen[s]) {
            throw DataError(
                fmt::format("{}: no age profile rows for sex {}", kAgeProfilesFile, to_string(sex)));
        }
        double sum = 0.0;
        for (double share : ds.age_profiles_[s]) {
            sum += share;
        }
        if (std::abs(sum - 1.0) > kShareSumTolerance) {
            throw DataError(fmt::format("{}: shares for sex {} sum to {}, expected 1",
                                        kAgeProfilesFile, to_string(sex), sum));
        }
    }

    // surplus_profiles.csv
    std::map<CountryCode, std::array<bool, kAgeCount>> surplus_seen;
    for (std::size_t i = 0; i < tables.surplus_profiles.size(); ++i) {
        const auto &row = tables.surplus_profiles[i];
        if (row.country != kGlobalDefault) {
            require_known(kSurplusFile, i, "country", row.country);
        }
        const int age = age_in_range(kSurplusFile, i, row.age);
        if (!(row.surplus >= 0.0)) {
            fail(kSurplusFile, i, "surplus", "negative value");
        }
        if (age < kWorkingAge && row.surplus != 0.0) {
            fail(kSurplusFile, i, "surplus", "must be 0 for ages below 16");
        }
        auto &seen = surplus_seen[row.country];
        if (seen[age]) {
            fail(kSurplusFile, i, "age", "duplicate (country, age) row");
        }
        seen[age] = true;
        ds.surplus_profiles_[row.country][age] = row.surplus;
    }
    for (const auto &[country, seen] : surplus_seen) {
        for (int age = 0; age <= kMaxAge; ++age) {
            if (!seen[age]) {
                throw DataError(fmt::format("{}: profile {} is missing age {}", kSurplusFile,
                                            country, age));
            }
        }
    }
    const bool has_default = surplus_seen.contains(std::string(kGlobalDefault));
    for (const auto &[origin, destination] : ds.corridors_) {
        if (!has_default && !surplus_seen.contains(destination)) {
            throw DataError(fmt::format("{}: no profile for destination {} and no {} fallback",
                                        kSurplusFile, destination, kGlobalDefault));
        }
    }

    // disasters.csv
    std::set<std::string> event_ids;
    for (std::size_t i = 0; i < tables.disasters.size(); ++i) {
        const auto &row = tables.disasters[i];
        if (row.event_id.empty()) {
            fail(kDisastersFile, i, "event_id", "empty identifier");
        }
        if (!event_ids.insert(row.event_id).second) {
            fail(kDisastersFile, i, "event_id", fmt::format("duplicate event '{}'", row.event_id));
        }
        require_known(kDisastersFile, i, "country", row.country);
        if (!(row.affected >= 0.0)) {
            fail(kDisastersFile, i, "affected", "negative value");
        }
        const auto *econ = ds.find_economics(row.country, row.onset.year());
        if (econ == nullptr) {
            fail(kDisastersFile, i, "onset_month",
                 fmt::format("no population for {} in {}", row.country, row.onset.year()));
        }
        if (row.affected > kAffectedSanityFactor * econ->population) {
            fail(kDisastersFile, i, "affected", "exceeds 10x the country population");
        }
    }

    // panel.csv
    std::set<std::tuple<CountryCode, CountryCode, int>> panel_keys;
    for (std::size_t i = 0; i < tables.panel.size(); ++i) {
        const auto &row = tables.panel[i];
        require_known(kPanelFile, i, "sender", row.sender);
        require_known(kPanelFile, i, "recipient", row.recipient);
        if (!(row.amount_usd >= 0.0) || !std::isfinite(row.amount_usd)) {
            fail(kPanelFile, i, "amount_usd", "must be finite and non-negative");
        }
        if (!panel_keys.emplace(row.sender, row.recipient, row.month.index()).second) {
            fail(kPanelFile, i, "month", "duplicate (sender, recipient, month)");
        }
    }

    return ds;
}

bool Dataset::has_country(std::string_view code) const {
    return std::binary_search(countries_.begin(), countries_.end(), code);
}

const CountryEconomics *Dataset::find_economics(std::string_view country, int year) const {
    auto it = economics_index_.find(std::pair{std::string(country), year});
    if (it == economics_index_.end()) {
        return nullptr;
    }
    return &tables_.economics[it->second];
}

const CountryEconomics &Dataset::economics(std::string_view country, int year) const {
    const auto *row = find_economics(country, year);
    if (row == nullptr) {
        throw DataError(fmt::format("no economics row for ({}, {})", country, year));
    }
    return *row;
}

const AgeArray &Dataset::surplus_profile(std::string_view destination) const {
    if (auto it = surplus_profiles_.find(destination); it != surplus_profiles_.end()) {
        return it->second;
    }
    if (auto it = surplus_profiles_.find(kGlobalDefault); it != surplus_profiles_.end()) {
        return it->second;
    }
    throw DataError(fmt::format("no surplus profile for {}", destination));
}

std::vector<const DisasterEvent *> Dataset::events_for(std::string_view country) const {
    std::vector<const DisasterEvent *> out;
    for (const auto &event : tables_.disasters) {
        if (event.country == country) {
            out.push_back(&event);
        }
    }
    return out;
}

const DisasterEvent *Dataset::find_event(std::string_view event_id) const {
    for (const auto &event : tables_.disasters) {
        if (event.event_id == event_id) {
            return &event;
        }
    }
    return nullptr;
}

std::uint64_t Dataset::content_hash() const {
    Fnv1a h;
    auto num = [&](double v) { h.update(csv::format_number(v)); };
    for (const auto &r : tables_.economics) {
        h.update(r.country);
        num(r.year);
        num(r.gdp_per_capita);
        num(r.population);
        h.update(to_string(r.income_group));
    }
    for (const auto &r : tables_.stocks) {
        h.update(r.origin);
        h.update(r.destination);
        h.update(to_string(r.sex));
        num(r.anchor_year);
        num(r.count);
    }
    for (const auto &r : tables_.age_profiles) {
        h.update(to_string(r.sex));
        num(r.age);
        num(r.share);
    }
    for (const auto &r : tables_.surplus_profiles) {
        h.update(r.country);
        num(r.age);
        num(r.surplus);
    }
    for (const auto &r : tables_.disasters) {
        h.update(r.event_id);
        h.update(r.country);
        h.update(r.onset.str());
        h.update(to_string(r.hazard));
        num(r.affected);
    }
    for (const auto &r : tables_.panel) {
        h.update(r.sender);
        h.update(r.recipient);
        h.update(r.month.str());
        num(r.amount_usd);
        h.update(to_string(r.split));
    }
    for (const auto &[key, series] : monthly_stocks_) {
        for (double v : series) {
            num(v);
        }
    }
    return h.digest();
}

DataPaths DataPaths::in_directory(const std::filesystem::path &dir) {
    return DataPaths{dir / kEconomicsFile, dir / kStocksFile,    dir / kAgeProfilesFile,
                     dir / kSurplusFile,   dir / kDisastersFile, dir / kPanelFile};
}

std::vector<std::filesystem::path> DataPaths::all() const {
    return {economics, stocks, age_profiles, surplus_profiles, disasters, panel};
}

Tables read_tables(const DataPaths &paths) {
    Tables tables;

    {
        const auto t = csv::Table::read_file(paths.economics);
        t.require_columns({"country", "year", "gdp_per_capita", "population", "income_group"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            CountryEconomics row;
            row.country = t.cell(r, "country");
            row.year = static_cast<int>(t.integer(r, "year"));
            row.gdp_per_capita = t.number(r, "gdp_per_capita");
            row.population = t.number(r, "population");
            try {
                row.income_group = parse_income_group(t.cell(r, "income_group"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "income_group"), e.what()));
            }
            tables.economics.push_back(std::move(row));
        }
    }
    {
        const auto t = csv::Table::read_file(paths.stocks);
        t.require_columns({"origin", "destination", "sex", "anchor_year", "count"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            MigrantStockRecord row;
            row.origin = t.cell(r, "origin");
            row.destination = t.cell(r, "destination");
            try {
                row.sex = parse_sex(t.cell(r, "sex"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "sex"), e.what()));
            }
            row.anchor_year = static_cast<int>(t.integer(r, "anchor_year"));
            row.count = t.number(r, "count");
            if (row.count < 0.0) {
                throw DataError(fmt::format("{}: negative value", t.where(r, "count")));
            }
            tables.stocks.push_back(std::move(row));
        }
    }
    {
        const auto t = csv::Table::read_file(paths.age_profiles);
        t.require_columns({"sex", "age", "share"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            AgeProfileRecord row;
            try {
                row.sex = parse_sex(t.cell(r, "sex"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "sex"), e.what()));
            }
            row.age = static_cast<int>(t.integer(r, "age"));
            row.share = t.number(r, "share");
            tables.age_profiles.push_back(row);
        }
    }
    {
        const auto t = csv::Table::read_file(paths.surplus_profiles);
        t.require_columns({"country", "age", "surplus"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            SurplusRecord row;
            row.country = t.cell(r, "country");
            row.age = static_cast<int>(t.integer(r, "age"));
            row.surplus = t.number(r, "surplus");
            tables.surplus_profiles.push_back(std::move(row));
        }
    }
    {
        const auto t = csv::Table::read_file(paths.disasters);
        t.require_columns({"event_id", "country", "onset_month", "hazard", "affected"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            DisasterEvent row;
            row.event_id = t.cell(r, "event_id");
            row.country = t.cell(r, "country");
            try {
                row.onset = YearMonth::parse(t.cell(r, "onset_month"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "onset_month"), e.what()));
            }
            try {
                row.hazard = parse_hazard(t.cell(r, "hazard"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "hazard"), e.what()));
            }
            row.affected = t.number(r, "affected");
            tables.disasters.push_back(std::move(row));
        }
    }
    if (std::filesystem::exists(paths.panel)) {
        const auto t = csv::Table::read_file(paths.panel);
        t.require_columns({"sender", "recipient", "month", "amount_usd"});
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            PanelObservation row;
            row.sender = t.cell(r, "sender");
            row.recipient = t.cell(r, "recipient");
            try {
                row.month = YearMonth::parse(t.cell(r, "month"));
            } catch (const DataError &e) {
                throw DataError(fmt::format("{}: {}", t.where(r, "month"), e.what()));
            }
            row.amount_usd = t.number(r, "amount_usd");
            tables.panel.push_back(std::move(row));
        }
    }
    return tables;
}

Dataset load_dataset(const DataPaths &paths) { return Dataset::from_tables(read_tables(paths)); }

void write_tables(const Tables &tables, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    const auto paths = DataPaths::in_directory(dir);
    using csv::format_number;

    auto open = [](const std::filesystem::path &p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) {
            throw DataError(fmt::format("{}: cannot open for writing", p.string()));
        }
        return out;
    };
    {
        auto out = open(paths.economics);
        csv::Writer w(out);
        w.row({"country", "year", "gdp_per_capita", "population", "income_group"});
        for (const auto &r : tables.economics) {
            w.row({r.country, std::to_string(r.year), format_number(r.gdp_per_capita),
                   format_number(r.population), std::string(to_string(r.income_group))});
        }
    }
    {
        auto out = open(paths.stocks);
        csv::Writer w(out);
        w.row({"origin", "destination", "sex", "anchor_year", "count"});
        for (const auto &r : tables.stocks) {
            w.row({r.origin, r.destination, std::string(to_string(r.sex)),
                   std::to_string(r.anchor_year), format_number(r.count)});
        }
    }
    {
        auto out = open(paths.age_profiles);
        csv::Writer w(out);
        w.row({"sex", "age", "share"});
        for (const auto &r : tables.age_profiles) {
            w.row({std::string(to_string(r.sex)), std::to_string(r.age), format_number(r.share)});
        }
    }
    {
        auto out = open(paths.surplus_profiles);
        csv::Writer w(out);
        w.row({"country", "age", "surplus"});
        for (const auto &r : tables.surplus_profiles) {
            w.row({r.country, std::to_string(r.age), format_number(r.surplus)});
        }
    }
    {
        auto out = open(paths.disasters);
        csv::Writer w(out);
        w.row({"event_id", "country", "onset_month", "hazard", "affected"});
        for (const auto &r : tables.disasters) {
            w.row({r.event_id, r.country, r.onset.str(), std::string(to_string(r.hazard)),
                   format_number(r.affected)});
        }
    }
    {
        auto out = open(paths.panel);
        csv::Writer w(out);
        w.row({"sender", "recipient", "month", "amount_usd"});
        for (const auto &r : tables.panel) {
            w.row({r.sender, r.recipient, r.month.str(), format_number(r.amount_usd)});
        }
    }
}

} // namespace remitsim
