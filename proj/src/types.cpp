#include "remitsim/types.hpp"

#include <charconv>

#include <fmt/format.h>

namespace remitsim {

namespace {

int parse_digits(std::string_view text) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError(fmt::format("invalid number '{}'", text));
    }
    return value;
}

} // namespace

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
        throw DataError(fmt::format("invalid month '{}', expected YYYY-MM", text));
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i != 4 && (text[i] < '0' || text[i] > '9')) {
            throw DataError(fmt::format("invalid month '{}', expected YYYY-MM", text));
        }
    }
    const int month = parse_digits(text.substr(5, 2));
    if (month < 1 || month > 12) {
        throw DataError(fmt::format("invalid month '{}', month must be 01-12", text));
    }
    return YearMonth(parse_digits(text.substr(0, 4)), month);
}

std::string YearMonth::str() const { return fmt::format("{:04d}-{:02d}", year(), month()); }

std::string_view to_string(Sex sex) { return sex == Sex::male ? "male" : "female"; }

std::string_view to_string(Hazard hazard) {
    switch (hazard) {
    case Hazard::flood:
        return "flood";
    case Hazard::storm:
        return "storm";
    case Hazard::earthquake:
        return "earthquake";
    case Hazard::drought:
        return "drought";
    }
    return "unknown";
}

std::string_view to_string(IncomeGroup group) {
    switch (group) {
    case IncomeGroup::low:
        return "low";
    case IncomeGroup::lower_middle:
        return "lower-middle";
    case IncomeGroup::upper_middle:
        return "upper-middle";
    case IncomeGroup::high:
        return "high";
    }
    return "unknown";
}

std::string_view to_string(SplitTag tag) {
    switch (tag) {
    case SplitTag::unassigned:
        return "unassigned";
    case SplitTag::train:
        return "train";
    case SplitTag::test:
        return "test";
    }
    return "unknown";
}

Sex parse_sex(std::string_view text) {
    if (text == "male") {
        return Sex::male;
    }
    if (text == "female") {
        return Sex::female;
    }
    throw DataError(fmt::format("invalid sex '{}', expected male or female", text));
}

Hazard parse_hazard(std::string_view text) {
    for (Hazard h : kHazards) {
        if (text == to_string(h)) {
            return h;
        }
    }
    throw DataError(fmt::format(
        "invalid hazard '{}', only flood, storm, earthquake and drought are modelled", text));
}

IncomeGroup parse_income_group(std::string_view text) {
    for (IncomeGroup g : kIncomeGroups) {
        if (text == to_string(g)) {
            return g;
        }
    }
    throw DataError(fmt::format(
        "invalid income group '{}', expected low, lower-middle, upper-middle or high", text));
}

SplitTag parse_split_tag(std::string_view text) {
    for (SplitTag t : {SplitTag::unassigned, SplitTag::train, SplitTag::test}) {
        if (text == to_string(t)) {
            return t;
        }
    }
    throw DataError(fmt::format("invalid split tag '{}'", text));
}

} // namespace remitsim
