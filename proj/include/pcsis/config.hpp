#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pcsis {

/// Settings of one synthesis run.  Text form is flat `key = value` lines;
/// vectors are comma separated, `#` starts a comment.
struct RunConfig {
    std::string system;                     // built-in name
    std::vector<std::string> plugin;        // adapter argv (instead of `system`)
    int plugin_dimension = 0;
    std::vector<double> plugin_safe_lower;  // plugin safe box
    std::vector<double> plugin_safe_upper;
    std::vector<double> plugin_control_lower;
    std::vector<double> plugin_control_upper;

    std::string mode = "sis";
    double alpha = 0.0;  // required
    double beta = 1e-20;
    int degree = -1;     // required
    double gamma = 0.9999;
    double epsilon = 0.5;
    double eps0 = 1e-6;
    double outside_constant = -1.0;
    double coefficient_bound = 1e3;
    std::uint64_t surrogate_count = 1000;
    int max_lambda_iterations = 5;
    int max_iterations = 10;
    std::optional<double> objective_tolerance;  // default 1e-6 * surrogate_count
    std::vector<int> grid_counts;              // empty: default for the control dimension
    std::vector<double> x0;                    // empty: origin
    std::uint64_t volume_samples = 1000000;
    std::uint64_t seed = 0;
    std::string outdir = ".";

    bool operator==(const RunConfig&) const = default;

    /// Assigns one key.  Throws UsageError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Checks required fields and ranges.  Throws UsageError.
    void validate() const;

    double effective_objective_tolerance() const {
        return objective_tolerance ? *objective_tolerance : 1e-6 * static_cast<double>(surrogate_count);
    }

    /// Canonical text, one key per line in fixed order.
    std::string serialize() const;
    /// FNV-1a of the canonical text without `outdir`.
    std::uint64_t hash() const;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

}  // namespace pcsis
