#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcsis/barrier.hpp"
#include "pcsis/sampling.hpp"
#include "pcsis/weights.hpp"

namespace pcsis {

enum class ObjectiveSense { Minimize, Maximize };
enum class Relation { GreaterEqual, LessEqual };

/// Sparse constraint row: sum_k value[k] * z[index[k]]  (>= | <=)  rhs.
struct ConstraintRow {
    std::vector<int> index;
    std::vector<double> value;
    Relation relation = Relation::GreaterEqual;
    double rhs = 0.0;
};

/// Solver-agnostic LP with finite variable bounds.  Built once, then read only.
class LinearProgram {
public:
    explicit LinearProgram(std::size_t variables);

    std::size_t variable_count() const { return lower_.size(); }
    std::size_t row_count() const { return rows_.size(); }

    void set_bounds(std::size_t j, double lower, double upper);
    void set_objective(ObjectiveSense sense, Eigen::VectorXd coefficients);
    /// Adds a dense row; exact zeros are dropped from storage.
    void add_row(const Eigen::Ref<const Eigen::VectorXd>& coefficients, Relation relation, double rhs);
    void set_variable_names(std::vector<std::string> names);

    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    ObjectiveSense sense() const { return sense_; }
    const Eigen::VectorXd& objective() const { return objective_; }
    const std::vector<ConstraintRow>& rows() const { return rows_; }
    const std::vector<std::string>& variable_names() const { return names_; }

    double row_activity(std::size_t r, const Eigen::VectorXd& z) const;
    /// Largest violation over rows and bounds (0 when z is feasible).
    double max_violation(const Eigen::VectorXd& z) const;
    double objective_value(const Eigen::VectorXd& z) const { return objective_.dot(z); }

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    ObjectiveSense sense_ = ObjectiveSense::Minimize;
    Eigen::VectorXd objective_;
    std::vector<ConstraintRow> rows_;
    std::vector<std::string> names_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    Eigen::VectorXd values;
    double objective = 0.0;
    double max_violation = 0.0;
    std::string diagnostics;
};

/// Pluggable LP solver.  Implementations must be deterministic for a fixed
/// LinearProgram and report the feasibility tolerance they work to.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual LpSolution solve(const LinearProgram& lp) const = 0;
    virtual double feasibility_tolerance() const = 0;
    virtual std::string name() const = 0;
};

/// Default backend (HiGHS dual simplex, single thread).
std::unique_ptr<SolverBackend> make_default_backend();

/// Runs the backend, fills max_violation and downgrades an "optimal" answer
/// that breaks a row by more than the backend tolerance to NumericalFailure.
LpSolution solve(const SolverBackend& backend, const LinearProgram& lp);

/// Writes the LP in CPLEX LP text format.
void write_lp_format(std::ostream& os, const LinearProgram& lp);

/// Shared parameters of every scenario LP.
struct ScenarioLpParams {
    double gamma = 0.9999;
    double eps0 = 1e-6;
    StateVector x0;
    Eigen::VectorXd coefficient_bounds;  // U_{a_l}, one per monomial
    double lambda_bar = 0.0;

    /// U_a applied to every coefficient and lambda_bar = U_a + |C| + 1.
    static ScenarioLpParams defaults(const BarrierTemplate& tmpl, double gamma, double eps0,
                                     StateVector x0, double coefficient_bound);
};

/// Tie-break objective coefficients: column sums of the surrogate basis matrix.
Eigen::VectorXd surrogate_objective(const BarrierTemplate& tmpl, const SampleSet& surrogate);

/// Uncontrolled feasibility LP: variables (a, lambda), minimise lambda subject
/// to h(a, x0) >= eps0 and h(a, y_i) >= gamma h(a, x_i) - lambda.
LinearProgram build_sis_feasibility_lp(const BarrierTemplate& tmpl, std::span<const StateVector> samples,
                                       std::span<const StateVector> successors, const ScenarioLpParams& params);

/// Uncontrolled tie-break LP: variables a, maximise sum h(a, x'_i) with lambda = 0.
LinearProgram build_sis_tiebreak_lp(const BarrierTemplate& tmpl, std::span<const StateVector> samples,
                                    std::span<const StateVector> successors, const SampleSet& surrogate,
                                    const ScenarioLpParams& params);

/// Controlled LP with weighted successor rows
/// sum_j w_ij h(a, y_ij) >= gamma h(a, x_i) - lambda.
LinearProgram build_csis_lambda_lp(const BarrierTemplate& tmpl, const TrainingDataset& data,
                                   const WeightMatrix& weights, const ScenarioLpParams& params);

/// Controlled tie-break LP (lambda fixed to zero, surrogate objective maximised).
LinearProgram build_csis_tiebreak_lp(const BarrierTemplate& tmpl, const TrainingDataset& data,
                                     const WeightMatrix& weights, const SampleSet& surrogate,
                                     const ScenarioLpParams& params);

/// Final scenario LP on fresh samples under a frozen policy: simulates all M
/// successors of every sample, applies the policy weights and builds the
/// minimise-lambda program.
LinearProgram build_final_scenario_lp(const BarrierTemplate& tmpl, const SystemModel& system,
                                      const SampleSet& fresh, const WeightPolicy& policy,
                                      const ScenarioLpParams& params);

}  // namespace pcsis
