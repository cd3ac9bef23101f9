#include "pcsis/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "pcsis/error.hpp"
#include "pcsis/rng.hpp"

namespace pcsis {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw UsageError("config: bad value '" + text + "' for " + key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw UsageError("config: non-finite value for " + key);
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(key, item));
    }
    return out;
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> words;
    for (std::string w; is >> w;) words.push_back(w);
    return words;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "system") system = value;
    else if (key == "plugin") plugin = split_words(value);
    else if (key == "plugin_dimension") plugin_dimension = parse_number<int>(key, value);
    else if (key == "plugin_safe_lower") plugin_safe_lower = parse_list<double>(key, value);
    else if (key == "plugin_safe_upper") plugin_safe_upper = parse_list<double>(key, value);
    else if (key == "plugin_control_lower") plugin_control_lower = parse_list<double>(key, value);
    else if (key == "plugin_control_upper") plugin_control_upper = parse_list<double>(key, value);
    else if (key == "mode") mode = value;
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "beta") beta = parse_number<double>(key, value);
    else if (key == "degree") degree = parse_number<int>(key, value);
    else if (key == "gamma") gamma = parse_number<double>(key, value);
    else if (key == "epsilon") epsilon = parse_number<double>(key, value);
    else if (key == "eps0") eps0 = parse_number<double>(key, value);
    else if (key == "C") outside_constant = parse_number<double>(key, value);
    else if (key == "U_a") coefficient_bound = parse_number<double>(key, value);
    else if (key == "N_prime") surrogate_count = parse_number<std::uint64_t>(key, value);
    else if (key == "K") max_lambda_iterations = parse_number<int>(key, value);
    else if (key == "K_prime") max_iterations = parse_number<int>(key, value);
    else if (key == "eps_prime") objective_tolerance = parse_number<double>(key, value);
    else if (key == "grid") grid_counts = parse_list<int>(key, value);
    else if (key == "x0") x0 = parse_list<double>(key, value);
    else if (key == "volume_samples") volume_samples = parse_number<std::uint64_t>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "outdir") outdir = value;
    else throw UsageError("config: unknown key '" + key + "'");
}

void RunConfig::validate() const {
    if (system.empty() == plugin.empty()) throw UsageError("config: give exactly one of system or plugin");
    if (!plugin.empty()) {
        if (plugin_dimension < 1) throw UsageError("config: plugin_dimension must be >= 1");
        const auto n = static_cast<std::size_t>(plugin_dimension);
        if (plugin_safe_lower.size() != n || plugin_safe_upper.size() != n)
            throw UsageError("config: plugin safe box must have plugin_dimension entries");
        if (plugin_control_lower.size() != plugin_control_upper.size())
            throw UsageError("config: plugin control bounds differ in length");
    }
    if (mode != "sis" && mode != "csis") throw UsageError("config: mode must be sis or csis");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("config: alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw UsageError("config: beta must lie in (0, 1)");
    if (degree < 0) throw UsageError("config: degree must be >= 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("config: gamma must lie in (0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("config: epsilon must lie in [0, 1]");
    if (!(eps0 > 0.0)) throw UsageError("config: eps0 must be positive");
    if (!(outside_constant < 0.0)) throw UsageError("config: C must be negative");
    if (!(coefficient_bound >= eps0)) throw UsageError("config: U_a must be at least eps0");
    if (surrogate_count < 1) throw UsageError("config: N_prime must be >= 1");
    if (max_lambda_iterations < 0 || max_iterations < 0) throw UsageError("config: K and K_prime must be >= 0");
    if (objective_tolerance && !(*objective_tolerance >= 0.0)) throw UsageError("config: eps_prime must be >= 0");
    for (int c : grid_counts)
        if (c < 1) throw UsageError("config: grid counts must be >= 1");
    if (volume_samples < 1) throw UsageError("config: volume_samples must be >= 1");
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    if (!system.empty()) os << "system = " << system << '\n';
    if (!plugin.empty()) {
        os << "plugin =";
        for (const auto& w : plugin) os << ' ' << w;
        os << "\nplugin_dimension = " << plugin_dimension << '\n'
           << "plugin_safe_lower = " << fmt_list(plugin_safe_lower) << '\n'
           << "plugin_safe_upper = " << fmt_list(plugin_safe_upper) << '\n';
        if (!plugin_control_lower.empty())
            os << "plugin_control_lower = " << fmt_list(plugin_control_lower) << '\n'
               << "plugin_control_upper = " << fmt_list(plugin_control_upper) << '\n';
    }
    os << "mode = " << mode << '\n'
       << "alpha = " << fmt(alpha) << '\n'
       << "beta = " << fmt(beta) << '\n'
       << "degree = " << degree << '\n'
       << "gamma = " << fmt(gamma) << '\n'
       << "epsilon = " << fmt(epsilon) << '\n'
       << "eps0 = " << fmt(eps0) << '\n'
       << "C = " << fmt(outside_constant) << '\n'
       << "U_a = " << fmt(coefficient_bound) << '\n'
       << "N_prime = " << surrogate_count << '\n'
       << "K = " << max_lambda_iterations << '\n'
       << "K_prime = " << max_iterations << '\n';
    if (objective_tolerance) os << "eps_prime = " << fmt(*objective_tolerance) << '\n';
    if (!grid_counts.empty()) os << "grid = " << fmt_list(grid_counts) << '\n';
    if (!x0.empty()) os << "x0 = " << fmt_list(x0) << '\n';
    os << "volume_samples = " << volume_samples << '\n'
       << "seed = " << seed << '\n'
       << "outdir = " << outdir << '\n';
    return os.str();
}

std::uint64_t RunConfig::hash() const {
    RunConfig copy = *this;
    copy.outdir.clear();
    return fnv1a64(copy.serialize());
}

RunConfig parse_config(std::istream& is) {
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        config.set(trim(std::string_view(line).substr(0, eq)), line.substr(eq + 1));
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    return parse_config(in);
}

}  // namespace pcsis
