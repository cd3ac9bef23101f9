#pragma once

#include <string>
#include <vector>

#include "pcsis/lp.hpp"
#include "pcsis/weights.hpp"

namespace pcsis {

/// Slack values at or below this are treated as zero.
inline constexpr double kLambdaTolerance = 1e-8;

struct LearningConfig {
    ScenarioLpParams lp;
    double epsilon = 0.5;
    int max_lambda_iterations = 5;   // K
    int max_iterations = 10;         // K'
    double objective_tolerance = 1e-3;  // eps'
    double lambda_tolerance = kLambdaTolerance;
};

enum class Termination { LambdaZero, LambdaNotReached, ObjectiveConverged, IterationsExhausted };

std::string to_string(Termination t);

/// One LP solve of the learning loop.
struct IterationRecord {
    int k = 0;
    bool slack_phase = true;  // true: min-lambda LP, false: surrogate LP
    double value = 0.0;       // lambda* or surrogate objective
    double seconds = 0.0;
};

struct IterationTrace {
    std::vector<double> lambdas;     // lambda*_0, lambda*_1, ...
    std::vector<double> objectives;  // surrogate sums; first entry is the phase-1 terminal iterate
    std::vector<IterationRecord> records;
    int lambda_iterations = 0;  // k when phase 1 stopped
    int total_iterations = 0;   // k at return
    Termination reason = Termination::LambdaNotReached;

    /// Run log: one line per iteration with k, the value and wall time.
    std::string to_log() const;
};

struct LearningResult {
    IterationTrace trace;
    /// Final iterate; the policy is epsilon-greedy with respect to it.
    CoefficientVector coefficients;
    WeightPolicy policy;

    bool ok() const { return trace.reason != Termination::LambdaNotReached; }
};

/// Epsilon-greedy learning of the weight functions on the training set X^L.
///
/// Phase 0 solves the min-lambda LP with uniform weights.  Phase 1 re-weights
/// greedily toward the best successor under the latest barrier and re-solves
/// until lambda* reaches zero or K solves have been spent; if lambda* is still
/// positive the result is a failure (ok() == false).  Phase 2 keeps
/// re-weighting while maximising the surrogate volume over X' until the
/// objective changes by at most eps' or k reaches K'.
///
/// Throws SolverError when an LP cannot be solved.
LearningResult learn_weights(const BarrierTemplate& tmpl, const TrainingDataset& data, const SampleSet& surrogate,
                             const LearningConfig& config, const SolverBackend& backend);

}  // namespace pcsis
