#include "pcsis/lp.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "pcsis/error.hpp"
#include "pcsis/parallel.hpp"

namespace pcsis {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

void validate_params(const BarrierTemplate& tmpl, const ScenarioLpParams& p) {
    const auto m = static_cast<Eigen::Index>(tmpl.size());
    if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw UsageError("scenario LP: gamma must lie in (0, 1)");
    if (!(p.eps0 > 0.0)) throw UsageError("scenario LP: eps0 must be positive");
    if (p.x0.size() != tmpl.basis().dimension()) throw UsageError("scenario LP: x0 has the wrong dimension");
    if (!tmpl.safe_set().contains(p.x0)) throw UsageError("scenario LP: x0 must lie inside the safe set");
    if (p.coefficient_bounds.size() != m) throw UsageError("scenario LP: need one coefficient bound per monomial");
    for (Eigen::Index l = 0; l < m; ++l)
        if (!(p.coefficient_bounds[l] >= p.eps0) || !std::isfinite(p.coefficient_bounds[l]))
            throw UsageError("scenario LP: coefficient bounds must be finite and >= eps0");
}

void validate_lambda_bar(const BarrierTemplate& tmpl, const ScenarioLpParams& p) {
    const double needed = p.gamma * p.coefficient_bounds[0] - tmpl.outside_constant();
    if (!(p.lambda_bar > needed) || !std::isfinite(p.lambda_bar))
        throw UsageError("scenario LP: lambda_bar must exceed gamma * U_a1 - C = " + std::to_string(needed));
}

// Coefficients over a and right-hand side of
//   sum_j w_j h(a, y_j) - gamma h1(a, x) (+ lambda) >= rhs.
// Successors outside the safe set contribute w_j * C, moved to the right.
void weighted_row(const BarrierTemplate& tmpl, const StateVector& x, std::span<const StateVector> successors,
                  std::span<const double> weights, double gamma, Eigen::Ref<Eigen::VectorXd> coeffs,
                  Eigen::Ref<Eigen::VectorXd> scratch, double& rhs) {
    const auto& basis = tmpl.basis();
    basis.row_into(x, coeffs);
    coeffs *= -gamma;
    rhs = 0.0;
    for (std::size_t j = 0; j < successors.size(); ++j) {
        if (weights[j] == 0.0) continue;
        if (tmpl.safe_set().contains(successors[j])) {
            basis.row_into(successors[j], scratch);
            coeffs += weights[j] * scratch;
        } else {
            rhs -= weights[j] * tmpl.outside_constant();
        }
    }
}

void check_weights(const WeightMatrix& w, std::size_t states, std::size_t controls) {
    if (static_cast<std::size_t>(w.rows()) != states || static_cast<std::size_t>(w.cols()) != controls)
        throw UsageError("scenario LP: weight matrix shape does not match the dataset");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if ((w.row(i).array() < 0.0).any()) throw UsageError("scenario LP: negative weight in row " + std::to_string(i));
        if (std::abs(w.row(i).sum() - 1.0) > kWeightSumTolerance)
            throw UsageError("scenario LP: weights of row " + std::to_string(i) + " do not sum to 1");
    }
}

std::vector<std::string> coefficient_names(std::size_t m, bool with_lambda) {
    std::vector<std::string> names;
    for (std::size_t l = 0; l < m; ++l) names.push_back("a" + std::to_string(l + 1));
    if (with_lambda) names.push_back("lam");
    return names;
}

// Builds the weighted LP.  With `surrogate` null: variables (a, lambda) and
// minimise lambda.  Otherwise: variables a, lambda = 0, maximise the surrogate sum.
LinearProgram assemble(const BarrierTemplate& tmpl, std::span<const StateVector> states,
                       const std::vector<StateVector>& successors, std::size_t controls,
                       const WeightMatrix& weights, const SampleSet* surrogate, const ScenarioLpParams& params) {
    validate_params(tmpl, params);
    const bool with_lambda = surrogate == nullptr;
    if (with_lambda) validate_lambda_bar(tmpl, params);
    check_weights(weights, states.size(), controls);
    if (successors.size() != states.size() * controls)
        throw UsageError("scenario LP: successor count does not match states x controls");

    const std::size_t m = tmpl.size();
    const std::size_t v = with_lambda ? m + 1 : m;
    LinearProgram lp(v);
    lp.set_variable_names(coefficient_names(m, with_lambda));
    for (std::size_t l = 0; l < m; ++l) {
        const double u = params.coefficient_bounds[static_cast<Eigen::Index>(l)];
        lp.set_bounds(l, -u, u);
    }
    if (with_lambda) {
        lp.set_bounds(m, 0.0, params.lambda_bar);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v));
        c[static_cast<Eigen::Index>(m)] = 1.0;
        lp.set_objective(ObjectiveSense::Minimize, std::move(c));
    } else {
        lp.set_objective(ObjectiveSense::Maximize, surrogate_objective(tmpl, *surrogate));
    }

    // h(a, x0) >= eps0
    {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v));
        row.head(static_cast<Eigen::Index>(m)) = tmpl.basis().row(params.x0);
        lp.add_row(row, Relation::GreaterEqual, params.eps0);
    }

    const std::size_t n = states.size();
    Eigen::MatrixXd block(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        Eigen::VectorXd scratch(static_cast<Eigen::Index>(m));
        std::vector<double> w(controls);
        for (std::size_t i = begin; i < end; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            for (std::size_t j = 0; j < controls; ++j) w[j] = weights(col, static_cast<Eigen::Index>(j));
            double r = 0.0;
            weighted_row(tmpl, states[i], std::span(successors).subspan(i * controls, controls), w, params.gamma,
                         block.col(col).head(static_cast<Eigen::Index>(m)), scratch, r);
            if (with_lambda) block(static_cast<Eigen::Index>(m), col) = 1.0;
            rhs[col] = r;
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        lp.add_row(block.col(col), Relation::GreaterEqual, rhs[col]);
    }
    return lp;
}

}  // namespace

LinearProgram::LinearProgram(std::size_t variables)
    : lower_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variables))),
      upper_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variables))),
      objective_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variables))) {
    if (variables == 0) throw UsageError("linear program needs at least one variable");
}

void LinearProgram::set_bounds(std::size_t j, double lower, double upper) {
    if (j >= variable_count()) throw UsageError("set_bounds: variable index out of range");
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper)
        throw UsageError("set_bounds: bounds must be finite with lower <= upper");
    lower_[static_cast<Eigen::Index>(j)] = lower;
    upper_[static_cast<Eigen::Index>(j)] = upper;
}

void LinearProgram::set_objective(ObjectiveSense sense, Eigen::VectorXd coefficients) {
    if (static_cast<std::size_t>(coefficients.size()) != variable_count())
        throw UsageError("set_objective: coefficient length mismatch");
    sense_ = sense;
    objective_ = std::move(coefficients);
}

void LinearProgram::add_row(const Eigen::Ref<const Eigen::VectorXd>& coefficients, Relation relation, double rhs) {
    if (static_cast<std::size_t>(coefficients.size()) != variable_count())
        throw UsageError("add_row: coefficient length mismatch");
    ConstraintRow row;
    row.relation = relation;
    row.rhs = rhs;
    for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
        if (coefficients[k] != 0.0) {
            row.index.push_back(static_cast<int>(k));
            row.value.push_back(coefficients[k]);
        }
    }
    rows_.push_back(std::move(row));
}

void LinearProgram::set_variable_names(std::vector<std::string> names) {
    if (names.size() != variable_count()) throw UsageError("set_variable_names: need one name per variable");
    names_ = std::move(names);
}

double LinearProgram::row_activity(std::size_t r, const Eigen::VectorXd& z) const {
    const auto& row = rows_.at(r);
    double s = 0.0;
    for (std::size_t k = 0; k < row.index.size(); ++k) s += row.value[k] * z[row.index[k]];
    return s;
}

double LinearProgram::max_violation(const Eigen::VectorXd& z) const {
    if (static_cast<std::size_t>(z.size()) != variable_count()) throw UsageError("max_violation: length mismatch");
    double worst = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        worst = std::max(worst, lower_[j] - z[j]);
        worst = std::max(worst, z[j] - upper_[j]);
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const double act = row_activity(r, z);
        const double gap = rows_[r].relation == Relation::GreaterEqual ? rows_[r].rhs - act : act - rows_[r].rhs;
        worst = std::max(worst, gap);
    }
    return worst;
}

std::string to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

LpSolution solve(const SolverBackend& backend, const LinearProgram& lp) {
    LpSolution sol = backend.solve(lp);
    if (sol.status != LpStatus::Optimal) return sol;
    if (static_cast<std::size_t>(sol.values.size()) != lp.variable_count()) {
        sol.status = LpStatus::NumericalFailure;
        sol.diagnostics += "; backend returned a solution of the wrong length";
        return sol;
    }
    sol.max_violation = lp.max_violation(sol.values);
    if (sol.max_violation > backend.feasibility_tolerance()) {
        sol.status = LpStatus::NumericalFailure;
        char buf[96];
        std::snprintf(buf, sizeof buf, "; optimal point violates constraints by %.3g (tolerance %.3g)",
                      sol.max_violation, backend.feasibility_tolerance());
        sol.diagnostics += buf;
    }
    return sol;
}

void write_lp_format(std::ostream& os, const LinearProgram& lp) {
    std::vector<std::string> names = lp.variable_names();
    if (names.empty())
        for (std::size_t j = 0; j < lp.variable_count(); ++j) names.push_back("z" + std::to_string(j + 1));

    os << std::setprecision(17);
    auto term = [&](double c, std::size_t j, bool first) {
        if (c < 0) os << "- " << -c << ' ' << names[j];
        else os << (first ? "" : "+ ") << c << ' ' << names[j];
    };

    os << (lp.sense() == ObjectiveSense::Minimize ? "Minimize\n" : "Maximize\n") << " obj:";
    bool first = true;
    for (std::size_t j = 0; j < lp.variable_count(); ++j) {
        const double c = lp.objective()[static_cast<Eigen::Index>(j)];
        if (c == 0.0) continue;
        os << ' ';
        term(c, j, first);
        first = false;
    }
    if (first) os << " 0 " << names[0];
    os << "\nSubject To\n";
    for (std::size_t r = 0; r < lp.row_count(); ++r) {
        const auto& row = lp.rows()[r];
        os << " c" << r + 1 << ":";
        if (row.index.empty()) os << " 0 " << names[0];
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            os << ' ';
            term(row.value[k], static_cast<std::size_t>(row.index[k]), k == 0);
        }
        os << (row.relation == Relation::GreaterEqual ? " >= " : " <= ") << row.rhs << '\n';
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < lp.variable_count(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        os << ' ' << lp.lower()[jj] << " <= " << names[j] << " <= " << lp.upper()[jj] << '\n';
    }
    os << "End\n";
}

ScenarioLpParams ScenarioLpParams::defaults(const BarrierTemplate& tmpl, double gamma, double eps0, StateVector x0,
                                            double coefficient_bound) {
    ScenarioLpParams p;
    p.gamma = gamma;
    p.eps0 = eps0;
    p.x0 = std::move(x0);
    p.coefficient_bounds = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(tmpl.size()), coefficient_bound);
    p.lambda_bar = coefficient_bound + std::abs(tmpl.outside_constant()) + 1.0;
    return p;
}

Eigen::VectorXd surrogate_objective(const BarrierTemplate& tmpl, const SampleSet& surrogate) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tmpl.size()));
    Eigen::VectorXd row(static_cast<Eigen::Index>(tmpl.size()));
    for (const auto& x : surrogate.states) {
        if (!tmpl.safe_set().contains(x)) throw UsageError("surrogate point outside the safe set");
        tmpl.basis().row_into(x, row);
        sum += row;
    }
    return sum;
}

LinearProgram build_sis_feasibility_lp(const BarrierTemplate& tmpl, std::span<const StateVector> samples,
                                       std::span<const StateVector> successors, const ScenarioLpParams& params) {
    if (samples.size() != successors.size()) throw UsageError("scenario LP: one successor per sample required");
    const std::vector<StateVector> succ(successors.begin(), successors.end());
    return assemble(tmpl, samples, succ, 1, uniform_weights(samples.size(), 1), nullptr, params);
}

LinearProgram build_sis_tiebreak_lp(const BarrierTemplate& tmpl, std::span<const StateVector> samples,
                                    std::span<const StateVector> successors, const SampleSet& surrogate,
                                    const ScenarioLpParams& params) {
    if (samples.size() != successors.size()) throw UsageError("scenario LP: one successor per sample required");
    const std::vector<StateVector> succ(successors.begin(), successors.end());
    return assemble(tmpl, samples, succ, 1, uniform_weights(samples.size(), 1), &surrogate, params);
}

LinearProgram build_csis_lambda_lp(const BarrierTemplate& tmpl, const TrainingDataset& data,
                                   const WeightMatrix& weights, const ScenarioLpParams& params) {
    return assemble(tmpl, data.states, data.successors, data.control_count(), weights, nullptr, params);
}

LinearProgram build_csis_tiebreak_lp(const BarrierTemplate& tmpl, const TrainingDataset& data,
                                     const WeightMatrix& weights, const SampleSet& surrogate,
                                     const ScenarioLpParams& params) {
    return assemble(tmpl, data.states, data.successors, data.control_count(), weights, &surrogate, params);
}

LinearProgram build_final_scenario_lp(const BarrierTemplate& tmpl, const SystemModel& system,
                                      const SampleSet& fresh, const WeightPolicy& policy,
                                      const ScenarioLpParams& params) {
    const TrainingDataset data = build_training_dataset(system, fresh, policy.grid);
    return build_csis_lambda_lp(tmpl, data, policy_weights(policy, data), params);
}

}  // namespace pcsis
