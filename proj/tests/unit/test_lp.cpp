#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pcsis/error.hpp"
#include "pcsis/lp.hpp"
#include "pcsis/rng.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

SafeSet unit_box(int n) {
    return SafeSet::box(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0));
}

Eigen::VectorXd dense_row(const LinearProgram& lp, std::size_t r) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lp.variable_count()));
    const auto& row = lp.rows()[r];
    for (std::size_t k = 0; k < row.index.size(); ++k) out[row.index[k]] = row.value[k];
    return out;
}

const SolverBackend& backend() {
    static const auto b = make_default_backend();
    return *b;
}

// h with C outside the box, written out independently of BarrierTemplate.
double oracle_h(int n, int d, double C, const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
    for (int k = 0; k < n; ++k)
        if (x[k] < -1.0 || x[k] > 1.0) return C;
    return oracle::h1(n, d, a, x);
}

}  // namespace

TEST_SUITE("lp") {
    TEST_CASE("feasibility LP shape") {
        const BarrierTemplate tmpl(MonomialBasis(1, 1), -1.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.5, 1e-6, vec({0.0}), 1e3);
        CHECK(p.lambda_bar == 1002.0);
        const std::vector<StateVector> xs = {vec({0.0}), vec({0.5}), vec({-0.5})};
        const std::vector<StateVector> ys = {vec({0.0}), vec({0.2}), vec({3.0})};
        const LinearProgram lp = build_sis_feasibility_lp(tmpl, xs, ys, p);
        CHECK(lp.variable_count() == 3);
        CHECK(lp.row_count() == 4);
        CHECK(lp.sense() == ObjectiveSense::Minimize);
        CHECK(lp.objective() == vec({0.0, 0.0, 1.0}));
        CHECK(lp.lower() == vec({-1e3, -1e3, 0.0}));
        CHECK(lp.upper() == vec({1e3, 1e3, 1002.0}));
        CHECK(lp.variable_names() == std::vector<std::string>{"a1", "a2", "lam"});
        // x0 row carries no lambda.
        CHECK(dense_row(lp, 0) == vec({1.0, 0.0, 0.0}));
        CHECK(lp.rows()[0].rhs == 1e-6);
        // x = 0, y = 0, gamma = 0.5: (1 - 0.5) a1 + lambda >= 0.
        CHECK(dense_row(lp, 1) == vec({0.5, 0.0, 1.0}));
        CHECK(lp.rows()[1].rhs == 0.0);
        CHECK(dense_row(lp, 2) == vec({0.5, 0.2 - 0.25, 1.0}));
    }

    TEST_CASE("successor outside the safe set moves C to the right-hand side") {
        const BarrierTemplate tmpl(MonomialBasis(1, 1), -1.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9, 1e-6, vec({0.0}), 1e3);
        const std::vector<StateVector> xs = {vec({0.0})};
        const std::vector<StateVector> ys = {vec({2.0})};
        const LinearProgram lp = build_sis_feasibility_lp(tmpl, xs, ys, p);
        CHECK(dense_row(lp, 1) == vec({-0.9, 0.0, 1.0}));
        CHECK(lp.rows()[1].rhs == 1.0);
    }

    TEST_CASE("tie-break LP objective is the surrogate column sum") {
        const BarrierTemplate tmpl(MonomialBasis(2, 2), -1.0, unit_box(2));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9, 1e-6, vec({0.0, 0.0}), 1e3);
        SampleSet sur;
        sur.states = {vec({0.5, -0.5}), vec({1.0, 0.25}), vec({0.0, 0.0})};
        const std::vector<StateVector> xs = {vec({0.1, 0.1})};
        const std::vector<StateVector> ys = {vec({0.05, 0.05})};
        const LinearProgram lp = build_sis_tiebreak_lp(tmpl, xs, ys, sur, p);
        CHECK(lp.variable_count() == 6);
        CHECK(lp.sense() == ObjectiveSense::Maximize);
        Eigen::VectorXd want = Eigen::VectorXd::Zero(6);
        for (const auto& x : sur.states)
            for (int l = 0; l < 6; ++l) want[l] += oracle::monomial(oracle::graded_lex(2, 2)[l], x);
        CHECK((lp.objective() - want).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(lp.upper() == Eigen::VectorXd::Constant(6, 1e3));

        SampleSet one;
        one.states = {vec({0.0, 0.0})};
        const LinearProgram single = build_sis_tiebreak_lp(tmpl, xs, ys, one, p);
        Eigen::VectorXd a(6);
        a << 0.3, 1, 2, 3, 4, 5;
        CHECK(single.objective_value(a) == doctest::Approx(tmpl.h1(a, vec({0.0, 0.0}))));

        SampleSet outside;
        outside.states = {vec({2.0, 0.0})};
        CHECK_THROWS_AS(build_sis_tiebreak_lp(tmpl, xs, ys, outside, p), UsageError);
    }

    TEST_CASE("a constant barrier is feasible for the min-lambda LP") {
        const BarrierTemplate tmpl(MonomialBasis(2, 3), -1.0, unit_box(2));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9, 1e-6, vec({0.0, 0.0}), 1e3);
        std::vector<StateVector> xs, ys;
        for (int i = 0; i < 20; ++i) {
            xs.push_back(vec({0.05 * i - 0.5, 0.3}));
            ys.push_back(vec({0.1 * i - 1.0, -0.3}));
        }
        const LinearProgram lp = build_sis_feasibility_lp(tmpl, xs, ys, p);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(11);
        z[0] = 1e-6;
        z[10] = p.lambda_bar;
        CHECK(lp.max_violation(z) == 0.0);
    }

    TEST_CASE("uniform weights and one-control data reproduce the unweighted form") {
        std::mt19937_64 rng(4);
        for (int t = 0; t < 50; ++t) {
            oracle::TinyInstance inst = oracle::random_instance(rng);
            const BarrierTemplate tmpl(MonomialBasis(inst.n, inst.d), -1.0, unit_box(inst.n));
            const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
            const std::size_t N = inst.data.state_count(), M = inst.data.control_count();

            // Uniform 1/M weights equal the mean over successors.
            const LinearProgram uni = build_csis_lambda_lp(tmpl, inst.data, uniform_weights(N, M), p);
            for (std::size_t j = 0; j < M; ++j) {
                // One-hot weights equal the unweighted row of successor j.
                WeightMatrix onehot = WeightMatrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
                onehot.col(static_cast<Eigen::Index>(j)).setOnes();
                const LinearProgram w = build_csis_lambda_lp(tmpl, inst.data, onehot, p);
                std::vector<StateVector> ys;
                for (std::size_t i = 0; i < N; ++i) ys.push_back(inst.data.successor(i, j));
                const LinearProgram s = build_sis_feasibility_lp(tmpl, inst.data.states, ys, p);
                REQUIRE(w.row_count() == s.row_count());
                for (std::size_t r = 0; r < w.row_count(); ++r) {
                    CHECK(dense_row(w, r) == dense_row(s, r));
                    CHECK(w.rows()[r].rhs == s.rows()[r].rhs);
                }
            }
            REQUIRE(uni.row_count() == N + 1);
            for (std::size_t i = 0; i < N; ++i) {
                Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(uni.variable_count()));
                double rhs = 0.0;
                for (std::size_t j = 0; j < M; ++j) {
                    WeightMatrix onehot =
                        WeightMatrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
                    onehot.col(static_cast<Eigen::Index>(j)).setOnes();
                    const LinearProgram w = build_csis_lambda_lp(tmpl, inst.data, onehot, p);
                    mean += dense_row(w, i + 1) / static_cast<double>(M);
                    rhs += w.rows()[i + 1].rhs / static_cast<double>(M);
                }
                mean[static_cast<Eigen::Index>(uni.variable_count()) - 1] = 1.0;
                CHECK((dense_row(uni, i + 1) - mean).cwiseAbs().maxCoeff() <= 1e-12);
                CHECK(std::abs(uni.rows()[i + 1].rhs - rhs) <= 1e-12);
            }
        }
    }

    TEST_CASE("all successors outside gives a pure lambda row") {
        const BarrierTemplate tmpl(MonomialBasis(1, 2), -2.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.5, 1e-6, vec({0.0}), 1e3);
        TrainingDataset data;
        data.states = {vec({0.0})};
        data.grid.points = {vec({0.0}), vec({1.0})};
        data.grid.per_dim_counts = {2};
        data.successors = {vec({5.0}), vec({-5.0})};
        const LinearProgram lp = build_csis_lambda_lp(tmpl, data, uniform_weights(1, 2), p);
        CHECK(dense_row(lp, 1) == vec({-0.5, 0.0, 0.0, 1.0}));
        CHECK(lp.rows()[1].rhs == 2.0);
    }

    TEST_CASE("weight matrix validation") {
        const BarrierTemplate tmpl(MonomialBasis(1, 1), -1.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.5, 1e-6, vec({0.0}), 1e3);
        TrainingDataset data;
        data.states = {vec({0.0})};
        data.grid.points = {vec({0.0}), vec({1.0})};
        data.grid.per_dim_counts = {2};
        data.successors = {vec({0.5}), vec({-0.5})};
        WeightMatrix bad(1, 2);
        bad << 0.5, 0.6;
        CHECK_THROWS_AS(build_csis_lambda_lp(tmpl, data, bad, p), UsageError);
        bad << 1.5, -0.5;
        CHECK_THROWS_AS(build_csis_lambda_lp(tmpl, data, bad, p), UsageError);
        CHECK_THROWS_AS(build_csis_lambda_lp(tmpl, data, uniform_weights(1, 3), p), UsageError);
        bad << 0.25, 0.75;
        CHECK_NOTHROW(build_csis_lambda_lp(tmpl, data, bad, p));
    }

    TEST_CASE("parameter validation") {
        const BarrierTemplate tmpl(MonomialBasis(1, 1), -1.0, unit_box(1));
        const std::vector<StateVector> xs = {vec({0.0})};
        auto p = ScenarioLpParams::defaults(tmpl, 0.5, 1e-6, vec({0.0}), 1e3);
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, std::vector<StateVector>{}, p), UsageError);
        auto q = p;
        q.gamma = 1.0;
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, xs, q), UsageError);
        q = p;
        q.eps0 = 0.0;
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, xs, q), UsageError);
        q = p;
        q.x0 = vec({2.0});
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, xs, q), UsageError);
        q = p;
        q.lambda_bar = 0.5 * 1e3 + 1.0;
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, xs, q), UsageError);
        q = p;
        q.coefficient_bounds = vec({1e3});
        CHECK_THROWS_AS(build_sis_feasibility_lp(tmpl, xs, xs, q), UsageError);
    }

    TEST_CASE("final scenario LP with epsilon = 1 matches uniform weights") {
        const SystemModel ex3 = builtin("ex3-controlled");
        const BarrierTemplate tmpl(MonomialBasis(2, 2), -1.0, ex3.safe_set());
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9999, 1e-6, vec({0.0, 0.0}), 1e3);
        const SampleSet fresh = sample_uniform(ex3.safe_set(), 40, 17);
        const std::vector<int> counts = {3, 3};
        Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
        const WeightPolicy policy{tmpl, a, 1.0, control_grid(ex3.control_set(), counts)};
        const LinearProgram fin = build_final_scenario_lp(tmpl, ex3, fresh, policy, p);
        const TrainingDataset data = build_training_dataset(ex3, fresh, policy.grid);
        const LinearProgram uni = build_csis_lambda_lp(tmpl, data, uniform_weights(40, 9), p);
        REQUIRE(fin.row_count() == 41);
        for (std::size_t r = 0; r < fin.row_count(); ++r) {
            CHECK(dense_row(fin, r) == dense_row(uni, r));
            CHECK(fin.rows()[r].rhs == uni.rows()[r].rhs);
        }
    }

    TEST_CASE("large scenario LP has N + 1 rows") {
        const SystemModel vdp = builtin("vanderpol");
        const BarrierTemplate tmpl(MonomialBasis(2, 12), -1.0, vdp.safe_set());
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9999, 1e-6, vec({0.0, 0.0}), 1e3);
        const SampleSet s = sample_uniform(vdp.safe_set(), 27610, 1);
        std::vector<StateVector> ys;
        for (const auto& x : s.states) ys.push_back(vdp.step(x));
        const LinearProgram lp = build_sis_feasibility_lp(tmpl, s.states, ys, p);
        CHECK(lp.row_count() == 27611);
        CHECK(lp.variable_count() == 92);
    }

    TEST_CASE("solve: lambda reaches zero on an invariant toy") {
        const BarrierTemplate tmpl(MonomialBasis(1, 2), -1.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.9, 1e-6, vec({0.0}), 10.0);
        std::vector<StateVector> xs, ys;
        for (int i = 0; i <= 20; ++i) {
            xs.push_back(vec({-1.0 + 0.1 * i}));
            ys.push_back(vec({0.5 * (-1.0 + 0.1 * i)}));
        }
        const LpSolution sol = solve(backend(), build_sis_feasibility_lp(tmpl, xs, ys, p));
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective <= 1e-9);
        CHECK(sol.max_violation <= backend().feasibility_tolerance());
        CHECK(backend().feasibility_tolerance() == 1e-7);
    }

    TEST_CASE("solve: empty and infeasible programs") {
        LinearProgram empty(2);
        empty.set_bounds(0, -1.0, 2.0);
        empty.set_bounds(1, 0.5, 3.0);
        empty.set_objective(ObjectiveSense::Minimize, vec({1.0, 1.0}));
        const LpSolution e = solve(backend(), empty);
        REQUIRE(e.status == LpStatus::Optimal);
        CHECK(e.objective == doctest::Approx(-0.5));

        LinearProgram bad(1);
        bad.set_bounds(0, 0.0, 0.5);
        bad.set_objective(ObjectiveSense::Minimize, vec({1.0}));
        bad.add_row(vec({1.0}), Relation::GreaterEqual, 1.0);
        CHECK(solve(backend(), bad).status == LpStatus::Infeasible);
        CHECK(to_string(LpStatus::Infeasible) != to_string(LpStatus::Optimal));
    }

    TEST_CASE("property: rows agree with the direct oracle") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int t = 0; t < 200; ++t) {
            const oracle::TinyInstance inst = oracle::random_instance(rng);
            const double C = -0.5 - 0.5 * std::abs(u(rng));
            const BarrierTemplate tmpl(MonomialBasis(inst.n, inst.d), C, unit_box(inst.n));
            const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
            const LinearProgram lp = build_csis_lambda_lp(tmpl, inst.data, inst.weights, p);
            const auto m = static_cast<Eigen::Index>(tmpl.size());
            Eigen::VectorXd z(m + 1);
            for (auto& v : z) v = u(rng);
            const Eigen::VectorXd a = z.head(m);
            for (std::size_t i = 0; i < inst.data.state_count(); ++i) {
                double want = -inst.gamma * oracle::h1(inst.n, inst.d, a, inst.data.states[i]) + z[m];
                for (std::size_t j = 0; j < inst.data.control_count(); ++j)
                    want += inst.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                            oracle_h(inst.n, inst.d, C, a, inst.data.successor(i, j));
                CHECK(oracle::row_slack(lp, i + 1, z) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
            }
        }
    }

    TEST_CASE("property: weighted rows are convex combinations of single-control rows") {
        std::mt19937_64 rng(22);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 100; ++t) {
            const oracle::TinyInstance inst = oracle::random_instance(rng);
            const BarrierTemplate tmpl(MonomialBasis(inst.n, inst.d), -1.0, unit_box(inst.n));
            const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
            const auto N = static_cast<Eigen::Index>(inst.data.state_count());
            const auto M = static_cast<Eigen::Index>(inst.data.control_count());
            const LinearProgram lp = build_csis_lambda_lp(tmpl, inst.data, inst.weights, p);
            Eigen::VectorXd z(static_cast<Eigen::Index>(lp.variable_count()));
            for (auto& v : z) v = u(rng);
            Eigen::MatrixXd single(N, M);
            for (Eigen::Index j = 0; j < M; ++j) {
                WeightMatrix onehot = WeightMatrix::Zero(N, M);
                onehot.col(j).setOnes();
                const LinearProgram s = build_csis_lambda_lp(tmpl, inst.data, onehot, p);
                for (Eigen::Index i = 0; i < N; ++i)
                    single(i, j) = oracle::row_slack(s, static_cast<std::size_t>(i) + 1, z);
            }
            for (Eigen::Index i = 0; i < N; ++i) {
                const double got = oracle::row_slack(lp, static_cast<std::size_t>(i) + 1, z);
                CHECK(got <= single.row(i).maxCoeff() + 1e-12);
                CHECK(got >= single.row(i).minCoeff() - 1e-12);
            }
        }
    }

    TEST_CASE("property: the constant eps0 barrier with lambda_bar is always feasible") {
        std::mt19937_64 rng(23);
        for (int t = 0; t < 200; ++t) {
            const oracle::TinyInstance inst = oracle::random_instance(rng);
            const BarrierTemplate tmpl(MonomialBasis(inst.n, inst.d), -1.0, unit_box(inst.n));
            const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
            const LinearProgram lp = build_csis_lambda_lp(tmpl, inst.data, inst.weights, p);
            Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lp.variable_count()));
            z[0] = p.eps0;
            z[z.size() - 1] = p.lambda_bar;
            CHECK(lp.max_violation(z) == 0.0);
        }
    }

    TEST_CASE("property: solutions respect the variable bounds") {
        std::mt19937_64 rng(24);
        for (int t = 0; t < 30; ++t) {
            const oracle::TinyInstance inst = oracle::random_instance(rng);
            const BarrierTemplate tmpl(MonomialBasis(inst.n, inst.d), -1.0, unit_box(inst.n));
            const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
            const LinearProgram lp = build_csis_lambda_lp(tmpl, inst.data, inst.weights, p);
            const LpSolution sol = solve(backend(), lp);
            REQUIRE(sol.status == LpStatus::Optimal);
            for (Eigen::Index j = 0; j < sol.values.size(); ++j) {
                CHECK(sol.values[j] >= lp.lower()[j] - 1e-7);
                CHECK(sol.values[j] <= lp.upper()[j] + 1e-7);
            }
            CHECK(sol.values[sol.values.size() - 1] >= -1e-7);
        }
    }

    TEST_CASE("CPLEX LP dump") {
        const BarrierTemplate tmpl(MonomialBasis(1, 1), -1.0, unit_box(1));
        const auto p = ScenarioLpParams::defaults(tmpl, 0.5, 1e-6, vec({0.0}), 1e3);
        const std::vector<StateVector> xs = {vec({0.5})};
        const std::vector<StateVector> ys = {vec({0.25})};
        std::ostringstream os;
        write_lp_format(os, build_sis_feasibility_lp(tmpl, xs, ys, p));
        const std::string text = os.str();
        CHECK(text.rfind("Minimize\n obj: 1 lam\nSubject To\n", 0) == 0);
        CHECK(text.find(" c1: 1 a1 >= 9.9999999999999995e-07\n") != std::string::npos);
        CHECK(text.find(" c2: 0.5 a1 + 0 a2 + 1 lam >= 0\n") == std::string::npos);
        CHECK(text.find(" c2: 0.5 a1 + 1 lam >= 0\n") != std::string::npos);
        CHECK(text.find(" 0 <= lam <= 1002\n") != std::string::npos);
        CHECK(text.substr(text.size() - 4) == "End\n");
    }

    TEST_CASE("LinearProgram argument validation") {
        CHECK_THROWS_AS(LinearProgram(0), UsageError);
        LinearProgram lp(2);
        CHECK_THROWS_AS(lp.set_bounds(2, 0.0, 1.0), UsageError);
        CHECK_THROWS_AS(lp.set_bounds(0, 1.0, 0.0), UsageError);
        CHECK_THROWS_AS(lp.set_objective(ObjectiveSense::Minimize, vec({1.0})), UsageError);
        CHECK_THROWS_AS(lp.add_row(vec({1.0}), Relation::LessEqual, 0.0), UsageError);
        CHECK_THROWS_AS(lp.set_variable_names({"x"}), UsageError);
    }
}
