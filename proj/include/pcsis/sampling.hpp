#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pcsis/system.hpp"

namespace pcsis {

/// Smallest N with alpha >= (2/N)(ln(1/beta) + m + 1).
std::uint64_t required_sample_count(double alpha, double beta, std::uint64_t m);

enum class SampleKind { Scenario, Surrogate, Training, Volume, Validation };

struct SampleSet {
    std::vector<StateVector> states;
    std::uint64_t seed = 0;
    SampleKind kind = SampleKind::Scenario;

    std::size_t size() const { return states.size(); }
};

/// Fraction of enclosing-box draws that land in the set, from `probe_draws`
/// counter-based draws of stream `seed`.
double acceptance_ratio(const SafeSet& set, std::size_t probe_draws, std::uint64_t seed);

/// I.i.d. uniform states over the safe set.  Sublevel sets use rejection
/// sampling from their enclosing box; a 1e5-draw probe with acceptance below
/// 1e-4 raises ConfigurationError.
SampleSet sample_uniform(const SafeSet& set, std::size_t count, std::uint64_t seed,
                         SampleKind kind = SampleKind::Scenario);

/// Fixed evaluation set X' for the surrogate-volume objective.  For n <= 3
/// the in-set nodes of a uniform lattice over the enclosing box (endpoints
/// included), refined until at least `count` nodes are inside and then
/// thinned by an even stride to exactly `count`.  For n > 3 a seeded uniform
/// sample.
SampleSet surrogate_grid(const SafeSet& set, std::size_t count, std::uint64_t seed);

struct ControlGrid {
    std::vector<ControlVector> points;
    std::vector<int> per_dim_counts;

    std::size_t size() const { return points.size(); }
};

/// Cartesian lattice over the control box; count >= 2 includes both
/// endpoints, count == 1 is the midpoint.  First dimension varies slowest.
ControlGrid control_grid(const ControlSet& set, std::span<const int> per_dim_counts);

/// Default per-dimension grid counts: (3,3) for s = 2, (2,2,2) for s = 3,
/// three points per dimension otherwise.
std::vector<int> default_grid_counts(int control_dimension);

/// Training data X^L: successors y_ij = f(x_i, u_j) for every state/control pair.
struct TrainingDataset {
    std::vector<StateVector> states;
    ControlGrid grid;
    std::vector<StateVector> successors;  // index i * M + j

    std::size_t state_count() const { return states.size(); }
    std::size_t control_count() const { return grid.size(); }
    const StateVector& successor(std::size_t i, std::size_t j) const {
        return successors[i * grid.size() + j];
    }
};

TrainingDataset build_training_dataset(const SystemModel& system, const SampleSet& states,
                                       const ControlGrid& grid);

/// One state per row, comma separated, 17 significant digits.
void write_samples_csv(std::ostream& os, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& is, int dimension);

}  // namespace pcsis
