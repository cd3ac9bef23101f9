#include "pcsis/weights.hpp"

#include "pcsis/error.hpp"
#include "pcsis/parallel.hpp"

namespace pcsis {

std::vector<double> compute_weights(double epsilon, std::span<const double> successor_h_values) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("compute_weights: epsilon must lie in [0, 1]");
    const std::size_t m = successor_h_values.size();
    if (m == 0) throw UsageError("compute_weights: need at least one control");
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j)
        if (successor_h_values[j] > successor_h_values[best]) best = j;
    const double explore = epsilon / static_cast<double>(m);
    std::vector<double> w(m, explore);
    w[best] = 1.0 - epsilon + explore;
    return w;
}

std::vector<double> compute_weights(const WeightPolicy& policy, std::span<const double> successor_h_values) {
    if (successor_h_values.size() != policy.grid.size())
        throw UsageError("compute_weights: expected one value per control grid point");
    return compute_weights(policy.epsilon, successor_h_values);
}

std::vector<double> policy_weights_for_state(const WeightPolicy& policy, const SystemModel& system,
                                             const StateVector& x) {
    std::vector<double> values(policy.grid.size());
    for (std::size_t j = 0; j < values.size(); ++j)
        values[j] = policy.barrier.h(policy.coefficients, system.step(x, policy.grid.points[j]));
    return compute_weights(policy, values);
}

WeightMatrix policy_weights(const WeightPolicy& policy, const TrainingDataset& data) {
    const std::size_t n = data.state_count();
    const std::size_t m = data.control_count();
    if (m != policy.grid.size()) throw UsageError("policy_weights: dataset and policy grids differ");
    WeightMatrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> values(m);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < m; ++j)
                values[j] = policy.barrier.h(policy.coefficients, data.successor(i, j));
            const auto row = compute_weights(policy.epsilon, values);
            for (std::size_t j = 0; j < m; ++j)
                w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    });
    return w;
}

WeightMatrix uniform_weights(std::size_t states, std::size_t controls) {
    if (controls == 0) throw UsageError("uniform_weights: need at least one control");
    return WeightMatrix::Constant(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(controls),
                                  1.0 / static_cast<double>(controls));
}

}  // namespace pcsis
