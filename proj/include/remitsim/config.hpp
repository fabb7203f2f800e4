#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "remitsim/types.hpp"

namespace remitsim {

enum class SplitMode { observation, corridor };
enum class AttributionConvention { only_hazard, leave_one_out };

struct OptimizerConfig {
    int starts = 8;
    int max_iter = 2000;
    double tolerance = 1e-12;
    int bootstrap_reps = 0;
    int bootstrap_max_iter = 100;
    bool corridor_weighted_loss = false;
};

/// Run configuration. Loaded from a flat `key = value` text file where `#`
/// starts a comment; unknown keys are rejected.
struct RunConfig {
    std::filesystem::path data_dir = ".";
    std::filesystem::path output_dir = "out";
    YearMonth start_month = kWindowStart;
    YearMonth end_month = kWindowEnd;
    std::uint64_t seed = 42;
    std::uint64_t split_seed = 7;
    double split_fraction = 0.8;
    SplitMode split_mode = SplitMode::observation;
    OptimizerConfig optimizer;
    bool delta_gdp_clamp = false;
    AttributionConvention attribution = AttributionConvention::only_hazard;
    int threads = 0; // 0 = hardware concurrency
    int draws = 1000;

    int month_count() const { return end_month - start_month + 1; }

    /// Throws DataError when an invariant is violated.
    void validate() const;

    /// Key/value echo in a stable order, used for the calibration output.
    std::map<std::string, std::string> echo() const;

    static RunConfig load(const std::filesystem::path &path);
    static RunConfig parse(const std::string &text, const std::string &source = "config");

    /// Applies a single key. Throws DataError for unknown keys or bad values.
    void set(const std::string &key, const std::string &value);
};

std::string_view to_string(SplitMode mode);
std::string_view to_string(AttributionConvention convention);

} // namespace remitsim
