#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcsis/barrier.hpp"
#include "pcsis/sampling.hpp"

namespace pcsis {

/// Per-state control weights, one row per state and one column per control
/// grid point.  Rows are non-negative and sum to one.
using WeightMatrix = Eigen::MatrixXd;

/// Epsilon-greedy weights for one state: the argmax entry of
/// `successor_h_values` (lowest index on ties) gets 1 - eps + eps/M, every
/// other entry eps/M.
std::vector<double> compute_weights(double epsilon, std::span<const double> successor_h_values);

/// Frozen weight functions w_j(x): epsilon-greedy with respect to
/// h(a_frozen, f(x, u_j)) over a fixed control grid.
struct WeightPolicy {
    BarrierTemplate barrier;
    CoefficientVector coefficients;
    double epsilon = 0.0;
    ControlGrid grid;
};

std::vector<double> compute_weights(const WeightPolicy& policy, std::span<const double> successor_h_values);

/// Simulates the M successors of x and returns the policy weights.
std::vector<double> policy_weights_for_state(const WeightPolicy& policy, const SystemModel& system,
                                             const StateVector& x);

/// Policy weights for every state of a dataset whose successors are already
/// simulated.
WeightMatrix policy_weights(const WeightPolicy& policy, const TrainingDataset& data);

/// Uniform 1/M weights for every state.
WeightMatrix uniform_weights(std::size_t states, std::size_t controls);

}  // namespace pcsis
