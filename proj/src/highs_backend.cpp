#include <Highs.h>

#include <algorithm>
#include <cstdio>

#include "pcsis/lp.hpp"

namespace pcsis {

namespace {

class HighsBackend final : public SolverBackend {
public:
    // HiGHS can return vertices that break unscaled rows by more than its own
    // tolerance.  Those are re-solved with rows tightened by a margin until
    // the original rows hold.
    LpSolution solve(const LinearProgram& lp) const override {
        double margin = 0.0;
        LpSolution sol = run(lp, margin);
        for (int attempt = 0; attempt < kMaxTightening && sol.status == LpStatus::Optimal; ++attempt) {
            const double violation = lp.max_violation(sol.values);
            if (violation <= kReportedTolerance) break;
            margin = std::max(10.0 * margin, 10.0 * violation);
            sol = run(lp, margin);
            char buf[64];
            std::snprintf(buf, sizeof buf, "; rows tightened by %.3g", margin);
            sol.diagnostics += buf;
        }
        return sol;
    }

    double feasibility_tolerance() const override { return kReportedTolerance; }
    std::string name() const override { return "highs"; }

private:
    static constexpr double kPrimalTolerance = 1e-9;
    static constexpr double kReportedTolerance = 1e-7;
    static constexpr int kMaxTightening = 3;

    static LpSolution run(const LinearProgram& lp, double margin) {
        const auto num_col = static_cast<HighsInt>(lp.variable_count());
        const auto num_row = static_cast<HighsInt>(lp.row_count());

        HighsLp model;
        model.num_col_ = num_col;
        model.num_row_ = num_row;
        model.sense_ = lp.sense() == ObjectiveSense::Minimize ? ObjSense::kMinimize : ObjSense::kMaximize;
        model.col_cost_.assign(lp.objective().data(), lp.objective().data() + num_col);
        model.col_lower_.assign(lp.lower().data(), lp.lower().data() + num_col);
        model.col_upper_.assign(lp.upper().data(), lp.upper().data() + num_col);
        model.row_lower_.resize(static_cast<std::size_t>(num_row));
        model.row_upper_.resize(static_cast<std::size_t>(num_row));

        // Row-wise storage transposed to the column-wise matrix HiGHS expects.
        std::vector<HighsInt> count(static_cast<std::size_t>(num_col) + 1, 0);
        for (HighsInt r = 0; r < num_row; ++r) {
            const auto& row = lp.rows()[static_cast<std::size_t>(r)];
            if (row.relation == Relation::GreaterEqual) {
                model.row_lower_[static_cast<std::size_t>(r)] = row.rhs + margin;
                model.row_upper_[static_cast<std::size_t>(r)] = kHighsInf;
            } else {
                model.row_lower_[static_cast<std::size_t>(r)] = -kHighsInf;
                model.row_upper_[static_cast<std::size_t>(r)] = row.rhs - margin;
            }
            for (int j : row.index) ++count[static_cast<std::size_t>(j) + 1];
        }
        auto& a = model.a_matrix_;
        a.format_ = MatrixFormat::kColwise;
        a.num_col_ = num_col;
        a.num_row_ = num_row;
        a.start_.assign(count.begin(), count.end());
        for (std::size_t j = 1; j < a.start_.size(); ++j) a.start_[j] += a.start_[j - 1];
        a.index_.resize(static_cast<std::size_t>(a.start_.back()));
        a.value_.resize(static_cast<std::size_t>(a.start_.back()));
        std::vector<HighsInt> fill(a.start_.begin(), a.start_.end() - 1);
        for (HighsInt r = 0; r < num_row; ++r) {
            const auto& row = lp.rows()[static_cast<std::size_t>(r)];
            for (std::size_t k = 0; k < row.index.size(); ++k) {
                const auto pos = static_cast<std::size_t>(fill[static_cast<std::size_t>(row.index[k])]++);
                a.index_[pos] = r;
                a.value_[pos] = row.value[k];
            }
        }

        Highs highs;
        highs.setOptionValue("output_flag", false);
        highs.setOptionValue("threads", 1);
        highs.setOptionValue("random_seed", 0);
        highs.setOptionValue("primal_feasibility_tolerance", kPrimalTolerance);
        highs.setOptionValue("dual_feasibility_tolerance", kPrimalTolerance);

        LpSolution sol;
        if (highs.passModel(std::move(model)) == HighsStatus::kError) {
            sol.status = LpStatus::NumericalFailure;
            sol.diagnostics = "HiGHS rejected the model";
            return sol;
        }
        const HighsStatus run_status = highs.run();
        const HighsModelStatus status = highs.getModelStatus();
        sol.diagnostics = "HiGHS: " + highs.modelStatusToString(status);
        if (run_status == HighsStatus::kError) {
            sol.status = LpStatus::NumericalFailure;
            return sol;
        }
        switch (status) {
            case HighsModelStatus::kOptimal: sol.status = LpStatus::Optimal; break;
            case HighsModelStatus::kInfeasible: sol.status = LpStatus::Infeasible; return sol;
            case HighsModelStatus::kUnbounded:
            case HighsModelStatus::kUnboundedOrInfeasible: sol.status = LpStatus::Unbounded; return sol;
            default: sol.status = LpStatus::NumericalFailure; return sol;
        }
        const auto& values = highs.getSolution().col_value;
        sol.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        sol.objective = highs.getInfo().objective_function_value;
        return sol;
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_default_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace pcsis
