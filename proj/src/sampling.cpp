#include "pcsis/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pcsis/error.hpp"
#include "pcsis/parallel.hpp"
#include "pcsis/rng.hpp"

namespace pcsis {

namespace {

constexpr std::size_t kProbeDraws = 100'000;
constexpr double kMinAcceptance = 1e-4;
constexpr std::uint64_t kProbeSalt = 0x70726f6265ULL;  // "probe"
constexpr std::uint64_t kMaxRejections = 100'000'000;

StateVector draw_in_box(const Bounds& box, CounterRng& rng) {
    StateVector x(box.dimension());
    for (int k = 0; k < box.dimension(); ++k) x[k] = rng.uniform(box.lower[k], box.upper[k]);
    return x;
}

// Node values of a 1-D lattice with `count` points over [lo, hi].
std::vector<double> axis_nodes(double lo, double hi, int count) {
    std::vector<double> nodes(static_cast<std::size_t>(count));
    if (count == 1) {
        nodes[0] = 0.5 * (lo + hi);
        return nodes;
    }
    for (int i = 0; i < count; ++i) {
        nodes[static_cast<std::size_t>(i)] =
            (i == count - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    }
    return nodes;
}

// Cartesian product of per-axis nodes; first axis varies slowest.
std::vector<Eigen::VectorXd> lattice(const Bounds& box, std::span<const int> counts) {
    const int n = box.dimension();
    std::vector<std::vector<double>> axes;
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) {
        axes.push_back(axis_nodes(box.lower[k], box.upper[k], counts[static_cast<std::size_t>(k)]));
        total *= axes.back().size();
    }
    std::vector<Eigen::VectorXd> points;
    points.reserve(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t p = 0; p < total; ++p) {
        Eigen::VectorXd v(n);
        for (int k = 0; k < n; ++k) v[k] = axes[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        points.push_back(std::move(v));
        for (int k = n - 1; k >= 0; --k) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < axes[static_cast<std::size_t>(k)].size()) break;
            i = 0;
        }
    }
    return points;
}

}  // namespace

std::uint64_t required_sample_count(double alpha, double beta, std::uint64_t m) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("required_sample_count: alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw UsageError("required_sample_count: beta must lie in (0, 1)");
    if (m < 1) throw UsageError("required_sample_count: m must be >= 1");
    const double budget = 2.0 * (std::log(1.0 / beta) + static_cast<double>(m) + 1.0);
    auto n = static_cast<std::uint64_t>(std::ceil(budget / alpha));
    // Exact-quotient boundary: keep the smallest N satisfying the inequality.
    while (n > 1 && alpha * static_cast<double>(n - 1) >= budget) --n;
    while (alpha * static_cast<double>(n) < budget) ++n;
    return n;
}

double acceptance_ratio(const SafeSet& set, std::size_t probe_draws, std::uint64_t seed) {
    if (probe_draws == 0) throw UsageError("acceptance_ratio: need at least one draw");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probe_draws; ++i) {
        CounterRng rng(seed, i);
        if (set.contains(draw_in_box(set.enclosing_box(), rng))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(probe_draws);
}

SampleSet sample_uniform(const SafeSet& set, std::size_t count, std::uint64_t seed, SampleKind kind) {
    if (count < 1) throw UsageError("sample_uniform: count must be >= 1");
    if (set.kind() == SafeSet::Kind::PolySublevel) {
        const double ratio = acceptance_ratio(set, kProbeDraws, seed ^ kProbeSalt);
        if (ratio < kMinAcceptance)
            throw ConfigurationError("sample_uniform: rejection acceptance ratio " + std::to_string(ratio) +
                                     " is below 1e-4; the enclosing box is too loose");
    }

    SampleSet out;
    out.seed = seed;
    out.kind = kind;
    out.states.resize(count);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, i);
            for (std::uint64_t attempt = 0;; ++attempt) {
                if (attempt == kMaxRejections)
                    throw ConfigurationError("sample_uniform: rejection sampling did not terminate");
                StateVector x = draw_in_box(set.enclosing_box(), rng);
                if (set.contains(x)) {
                    out.states[i] = std::move(x);
                    break;
                }
            }
        }
    });
    return out;
}

SampleSet surrogate_grid(const SafeSet& set, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw UsageError("surrogate_grid: count must be >= 1");
    const int n = set.dimension();
    if (n > 3) {
        SampleSet s = sample_uniform(set, count, seed, SampleKind::Surrogate);
        return s;
    }

    int per_axis = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(count), 1.0 / n) - 1e-9)));
    std::vector<Eigen::VectorXd> inside;
    for (;; ++per_axis) {
        if (per_axis > 100'000) throw ConfigurationError("surrogate_grid: safe set too thin for a lattice");
        const std::vector<int> counts(static_cast<std::size_t>(n), per_axis);
        inside.clear();
        for (auto& p : lattice(set.enclosing_box(), counts))
            if (set.contains(p)) inside.push_back(std::move(p));
        if (inside.size() >= count) break;
    }

    SampleSet out;
    out.seed = seed;
    out.kind = SampleKind::Surrogate;
    out.states.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.states.push_back(inside[i * inside.size() / count]);
    return out;
}

ControlGrid control_grid(const ControlSet& set, std::span<const int> per_dim_counts) {
    if (static_cast<int>(per_dim_counts.size()) != set.dimension())
        throw UsageError("control_grid: need one count per control dimension");
    for (int c : per_dim_counts)
        if (c < 1) throw UsageError("control_grid: counts must be >= 1");
    ControlGrid grid;
    grid.per_dim_counts.assign(per_dim_counts.begin(), per_dim_counts.end());
    grid.points = lattice(set.bounds(), per_dim_counts);
    return grid;
}

std::vector<int> default_grid_counts(int control_dimension) {
    if (control_dimension == 2) return {3, 3};
    if (control_dimension == 3) return {2, 2, 2};
    return std::vector<int>(static_cast<std::size_t>(std::max(0, control_dimension)), 3);
}

TrainingDataset build_training_dataset(const SystemModel& system, const SampleSet& states,
                                       const ControlGrid& grid) {
    if (!system.controlled()) throw UsageError("build_training_dataset: system has no control input");
    if (grid.size() == 0) throw UsageError("build_training_dataset: empty control grid");
    TrainingDataset data;
    data.states = states.states;
    data.grid = grid;
    const std::size_t m = grid.size();
    data.successors.resize(data.states.size() * m);
    parallel_for(data.states.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                try {
                    data.successors[i * m + j] = system.step(data.states[i], grid.points[j]);
                } catch (const SimulationError& e) {
                    throw SimulationError("training sample i=" + std::to_string(i) + ", control j=" +
                                          std::to_string(j) + ": " + e.what());
                }
            }
        }
    });
    return data;
}

void write_samples_csv(std::ostream& os, const SampleSet& samples) {
    char buf[32];
    for (const auto& x : samples.states) {
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", x[k]);
            if (k > 0) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

SampleSet read_samples_csv(std::istream& is, int dimension) {
    SampleSet out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        StateVector x(dimension);
        std::string cell;
        int k = 0;
        while (std::getline(ls, cell, ',')) {
            if (k >= dimension) throw ParseError("samples csv: too many columns on row " + std::to_string(row));
            try {
                std::size_t used = 0;
                x[k] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::logic_error&) {
                throw ParseError("samples csv: bad number '" + cell + "' on row " + std::to_string(row));
            }
            ++k;
        }
        if (k != dimension) throw ParseError("samples csv: too few columns on row " + std::to_string(row));
        out.states.push_back(std::move(x));
    }
    return out;
}

}  // namespace pcsis
