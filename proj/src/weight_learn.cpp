#include "pcsis/weight_learn.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "pcsis/error.hpp"

namespace pcsis {

namespace {

using Clock = std::chrono::steady_clock;

LpSolution solve_or_throw(const SolverBackend& backend, const LinearProgram& lp, const char* what) {
    LpSolution sol = solve(backend, lp);
    if (sol.status != LpStatus::Optimal)
        throw SolverError(std::string(what) + ": " + to_string(sol.status) + " (" + sol.diagnostics +
                          "; tolerance " + std::to_string(backend.feasibility_tolerance()) + ")");
    return sol;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::LambdaZero: return "lambda-zero";
        case Termination::LambdaNotReached: return "K-exhausted-fail";
        case Termination::ObjectiveConverged: return "objective-converged";
        case Termination::IterationsExhausted: return "K'-exhausted";
    }
    return "unknown";
}

std::string IterationTrace::to_log() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& r : records) {
        os << "k=" << r.k << ' ' << (r.slack_phase ? "lambda=" : "objective=") << r.value
           << " seconds=" << std::setprecision(6) << r.seconds << std::setprecision(17) << '\n';
    }
    os << "termination=" << to_string(reason) << '\n';
    return os.str();
}

LearningResult learn_weights(const BarrierTemplate& tmpl, const TrainingDataset& data, const SampleSet& surrogate,
                             const LearningConfig& config, const SolverBackend& backend) {
    if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) throw UsageError("learn_weights: epsilon must lie in [0, 1]");
    if (config.max_lambda_iterations < 0 || config.max_iterations < 0)
        throw UsageError("learn_weights: iteration limits must be non-negative");
    if (data.state_count() == 0 || data.successors.size() != data.state_count() * data.control_count())
        throw UsageError("learn_weights: training dataset is incomplete");

    const auto m = static_cast<Eigen::Index>(tmpl.size());
    const Eigen::VectorXd surrogate_sum = surrogate_objective(tmpl, surrogate);

    LearningResult result{IterationTrace{}, CoefficientVector{},
                          WeightPolicy{tmpl, CoefficientVector{}, config.epsilon, data.grid}};
    IterationTrace& trace = result.trace;
    auto greedy_weights = [&](const CoefficientVector& a) {
        return policy_weights(WeightPolicy{tmpl, a, config.epsilon, data.grid}, data);
    };

    // Phase 0: uniform weights.
    auto t0 = Clock::now();
    LpSolution sol = solve_or_throw(
        backend, build_csis_lambda_lp(tmpl, data, uniform_weights(data.state_count(), data.control_count()), config.lp),
        "initial slack LP");
    CoefficientVector a = sol.values.head(m);
    double lambda = sol.values[m];
    trace.lambdas.push_back(lambda);
    trace.records.push_back({0, true, lambda, seconds_since(t0)});

    // Phase 1: drive the slack to zero.
    int k = 0;
    while (lambda > config.lambda_tolerance && k < config.max_lambda_iterations) {
        ++k;
        t0 = Clock::now();
        sol = solve_or_throw(backend, build_csis_lambda_lp(tmpl, data, greedy_weights(a), config.lp), "slack LP");
        a = sol.values.head(m);
        lambda = sol.values[m];
        trace.lambdas.push_back(lambda);
        trace.records.push_back({k, true, lambda, seconds_since(t0)});
    }
    trace.lambda_iterations = k;
    trace.total_iterations = k;
    result.coefficients = a;
    result.policy.coefficients = a;
    if (lambda > config.lambda_tolerance) {
        trace.reason = Termination::LambdaNotReached;
        return result;
    }

    // Phase 2: enlarge the set.
    trace.reason = Termination::LambdaZero;
    double previous = surrogate_sum.dot(a);
    trace.objectives.push_back(previous);
    while (k < config.max_iterations) {
        ++k;
        t0 = Clock::now();
        sol = solve_or_throw(backend, build_csis_tiebreak_lp(tmpl, data, greedy_weights(a), surrogate, config.lp),
                             "surrogate LP");
        a = sol.values;
        const double objective = surrogate_sum.dot(a);
        trace.objectives.push_back(objective);
        trace.records.push_back({k, false, objective, seconds_since(t0)});
        if (std::abs(objective - previous) <= config.objective_tolerance) {
            trace.reason = Termination::ObjectiveConverged;
            break;
        }
        previous = objective;
        trace.reason = Termination::IterationsExhausted;
    }
    trace.total_iterations = k;
    result.coefficients = a;
    result.policy.coefficients = a;
    return result;
}

}  // namespace pcsis
