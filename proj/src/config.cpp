#include "remitsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "remitsim/csv.hpp"

namespace remitsim {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T> T parse_value(const std::string &key, const std::string &value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw DataError(fmt::format("config key '{}': invalid value '{}'", key, value));
    }
    return out;
}

bool parse_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "off") {
        return false;
    }
    throw DataError(fmt::format("config key '{}': expected boolean, got '{}'", key, value));
}

} // namespace

std::string_view to_string(SplitMode mode) {
    return mode == SplitMode::observation ? "observation" : "corridor";
}

std::string_view to_string(AttributionConvention convention) {
    return convention == AttributionConvention::only_hazard ? "only_hazard" : "leave_one_out";
}

void RunConfig::set(const std::string &key, const std::string &value) {
    if (key == "data_dir") {
        data_dir = value;
    } else if (key == "output_dir") {
        output_dir = value;
    } else if (key == "start_month") {
        start_month = YearMonth::parse(value);
    } else if (key == "end_month") {
        end_month = YearMonth::parse(value);
    } else if (key == "seed") {
        seed = parse_value<std::uint64_t>(key, value);
    } else if (key == "split_seed") {
        split_seed = parse_value<std::uint64_t>(key, value);
    } else if (key == "split_fraction") {
        split_fraction = parse_value<double>(key, value);
    } else if (key == "split_mode") {
        if (value == "observation") {
            split_mode = SplitMode::observation;
        } else if (value == "corridor") {
            split_mode = SplitMode::corridor;
        } else {
            throw DataError(fmt::format("config key 'split_mode': invalid value '{}'", value));
        }
    } else if (key == "starts") {
        optimizer.starts = parse_value<int>(key, value);
    } else if (key == "max_iter") {
        optimizer.max_iter = parse_value<int>(key, value);
    } else if (key == "tolerance") {
        optimizer.tolerance = parse_value<double>(key, value);
    } else if (key == "bootstrap_reps") {
        optimizer.bootstrap_reps = parse_value<int>(key, value);
    } else if (key == "bootstrap_max_iter") {
        optimizer.bootstrap_max_iter = parse_value<int>(key, value);
    } else if (key == "corridor_weighted_loss") {
        optimizer.corridor_weighted_loss = parse_bool(key, value);
    } else if (key == "delta_gdp_clamp") {
        delta_gdp_clamp = parse_bool(key, value);
    } else if (key == "attribution_convention") {
        if (value == "only_hazard") {
            attribution = AttributionConvention::only_hazard;
        } else if (value == "leave_one_out") {
            attribution = AttributionConvention::leave_one_out;
        } else {
            throw DataError(
                fmt::format("config key 'attribution_convention': invalid value '{}'", value));
        }
    } else if (key == "threads") {
        threads = parse_value<int>(key, value);
    } else if (key == "draws") {
        draws = parse_value<int>(key, value);
    } else {
        throw DataError(fmt::format("unknown config key '{}'", key));
    }
}

void RunConfig::validate() const {
    if (start_month > end_month) {
        throw DataError("config: start_month must not be after end_month");
    }
    if (start_month < kWindowStart || end_month > kWindowEnd) {
        throw DataError(fmt::format("config: date range must lie within {}..{}",
                                    kWindowStart.str(), kWindowEnd.str()));
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw DataError("config: split_fraction must lie in (0,1)");
    }
    if (optimizer.starts < 1) {
        throw DataError("config: starts must be at least 1");
    }
    if (optimizer.max_iter < 0 || optimizer.bootstrap_reps < 0 ||
        optimizer.bootstrap_max_iter < 0) {
        throw DataError("config: iteration and replicate counts must be non-negative");
    }
    if (!(optimizer.tolerance > 0.0)) {
        throw DataError("config: tolerance must be positive");
    }
    if (threads < 0) {
        throw DataError("config: threads must be non-negative");
    }
    if (draws < 1) {
        throw DataError("config: draws must be at least 1");
    }
}

std::map<std::string, std::string> RunConfig::echo() const {
    return {
        {"start_month", start_month.str()},
        {"end_month", end_month.str()},
        {"seed", std::to_string(seed)},
        {"split_seed", std::to_string(split_seed)},
        {"split_fraction", csv::format_number(split_fraction)},
        {"split_mode", std::string(to_string(split_mode))},
        {"starts", std::to_string(optimizer.starts)},
        {"max_iter", std::to_string(optimizer.max_iter)},
        {"tolerance", csv::format_number(optimizer.tolerance)},
        {"bootstrap_reps", std::to_string(optimizer.bootstrap_reps)},
        {"bootstrap_max_iter", std::to_string(optimizer.bootstrap_max_iter)},
        {"corridor_weighted_loss", optimizer.corridor_weighted_loss ? "true" : "false"},
        {"delta_gdp_clamp", delta_gdp_clamp ? "true" : "false"},
        {"attribution_convention", std::string(to_string(attribution))},
        {"draws", std::to_string(draws)},
    };
}

RunConfig RunConfig::parse(const std::string &text, const std::string &source) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataError(fmt::format("{}: line {}: expected key = value", source, line_no));
        }
        try {
            config.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const DataError &e) {
            throw DataError(fmt::format("{}: line {}: {}", source, line_no, e.what()));
        }
    }
    config.validate();
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("{}: cannot open config file", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

} // namespace remitsim
