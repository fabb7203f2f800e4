#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace remitsim {

/// ISO-3166 alpha-3 country code, or the GLOBAL_DEFAULT sentinel in surplus tables.
using CountryCode = std::string;

inline constexpr std::string_view kGlobalDefault = "GLOBAL_DEFAULT";

inline constexpr int kMaxAge = 100;
inline constexpr std::size_t kAgeCount = kMaxAge + 1;

using AgeArray = std::array<double, kAgeCount>;

/// Length of the disaster response window in months (offsets 0..11).
inline constexpr int kDisasterWindow = 12;

/// Raised for any invalid input table, config value or argument domain violation.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Calendar month stored as a linear month index (year * 12 + month - 1).
class YearMonth {
  public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {
        if (month < 1 || month > 12) {
            throw DomainError("month out of range");
        }
    }

    static constexpr YearMonth from_index(int index) {
        YearMonth ym;
        ym.index_ = index;
        return ym;
    }

    /// Parses strict "YYYY-MM".
    static YearMonth parse(std::string_view text);

    constexpr int year() const { return index_ / 12; }
    constexpr int month() const { return index_ % 12 + 1; }
    constexpr int index() const { return index_; }

    std::string str() const;

    constexpr YearMonth operator+(int months) const { return from_index(index_ + months); }
    constexpr int operator-(YearMonth other) const { return index_ - other.index_; }
    constexpr auto operator<=>(const YearMonth &) const = default;

  private:
    int index_ = 0;
};

enum class Sex { male = 0, female = 1 };
inline constexpr std::array<Sex, 2> kSexes = {Sex::male, Sex::female};

enum class Hazard { flood, storm, earthquake, drought };
inline constexpr std::array<Hazard, 4> kHazards = {Hazard::flood, Hazard::storm,
                                                   Hazard::earthquake, Hazard::drought};

enum class IncomeGroup { low, lower_middle, upper_middle, high };
inline constexpr std::array<IncomeGroup, 4> kIncomeGroups = {
    IncomeGroup::low, IncomeGroup::lower_middle, IncomeGroup::upper_middle, IncomeGroup::high};

enum class SplitTag { unassigned, train, test };

std::string_view to_string(Sex sex);
std::string_view to_string(Hazard hazard);
std::string_view to_string(IncomeGroup group);
std::string_view to_string(SplitTag tag);

Sex parse_sex(std::string_view text);
Hazard parse_hazard(std::string_view text);
IncomeGroup parse_income_group(std::string_view text);
SplitTag parse_split_tag(std::string_view text);

/// Simulation window used for stock interpolation: January 2010 to December 2019.
inline constexpr YearMonth kWindowStart{2010, 1};
inline constexpr YearMonth kWindowEnd{2019, 12};
inline constexpr int kWindowMonths = kWindowEnd - kWindowStart + 1;

inline constexpr std::array<int, 3> kAnchorYears = {2010, 2015, 2020};

} // namespace remitsim
