#include <doctest.h>

#include <random>

#include "pcsis/error.hpp"
#include "pcsis/weight_learn.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

const SolverBackend& backend() {
    static const auto b = make_default_backend();
    return *b;
}

SystemModel contraction() {
    return SystemModel("contraction", 1,
                       [](const StateVector& x, const ControlVector& u) { return StateVector(0.5 * x + u); },
                       SafeSet::box(vec({-1.0}), vec({1.0})), ControlSet(vec({-0.1}), vec({0.1})));
}

SystemModel escape() {
    return SystemModel("escape", 1,
                       [](const StateVector& x, const ControlVector& u) {
                           return StateVector(StateVector::Constant(1, x[0] + 10.0 + u[0]));
                       },
                       SafeSet::box(vec({-1.0}), vec({1.0})), ControlSet(vec({-0.1}), vec({0.1})));
}

struct Setup {
    BarrierTemplate tmpl;
    TrainingDataset data;
    SampleSet surrogate;
    LearningConfig config;
};

Setup make_setup(const SystemModel& sys, int degree, std::size_t n, std::uint64_t seed, double epsilon,
                 std::vector<int> counts, double gamma = 0.9999) {
    BarrierTemplate tmpl(MonomialBasis(sys.dimension(), degree), -1.0, sys.safe_set());
    SampleSet states = sample_uniform(sys.safe_set(), n, seed, SampleKind::Training);
    states.states[0] = StateVector::Zero(sys.dimension());
    TrainingDataset data = build_training_dataset(sys, states, control_grid(sys.control_set(), counts));
    SampleSet sur = surrogate_grid(sys.safe_set(), 100, seed);
    LearningConfig cfg;
    cfg.lp = ScenarioLpParams::defaults(tmpl, gamma, 1e-6, StateVector::Zero(sys.dimension()), 1e3);
    cfg.epsilon = epsilon;
    cfg.objective_tolerance = 1e-4;
    return Setup{std::move(tmpl), std::move(data), std::move(sur), cfg};
}

}  // namespace

TEST_SUITE("weight_learn") {
    TEST_CASE("epsilon-greedy weight examples") {
        const std::vector<double> h = {0.1, 0.7, -0.2, 0.3};
        const auto w = compute_weights(0.2, h);
        REQUIRE(w.size() == 4);
        CHECK(w[0] == doctest::Approx(0.05));
        CHECK(w[1] == doctest::Approx(0.85));
        CHECK(w[2] == doctest::Approx(0.05));
        CHECK(w[3] == doctest::Approx(0.05));

        for (double v : compute_weights(1.0, h)) CHECK(v == 0.25);
        CHECK(compute_weights(0.0, h) == std::vector<double>{0.0, 1.0, 0.0, 0.0});

        const std::vector<double> tie = {0.5, 0.9, 0.9};
        CHECK(compute_weights(0.0, tie) == std::vector<double>{0.0, 1.0, 0.0});
        const std::vector<double> one = {-3.0};
        CHECK(compute_weights(0.4, one) == std::vector<double>{1.0});

        CHECK_THROWS_AS(compute_weights(1.5, h), UsageError);
        CHECK_THROWS_AS(compute_weights(-0.1, h), UsageError);
        CHECK_THROWS_AS(compute_weights(0.5, std::vector<double>{}), UsageError);
    }

    TEST_CASE("property: weights are a distribution with the greedy entry largest") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-5.0, 5.0), e(0.0, 1.0);
        for (int t = 0; t < 1000; ++t) {
            std::vector<double> h(1 + t % 9);
            for (auto& v : h) v = u(rng);
            const double eps = e(rng);
            const auto w = compute_weights(eps, h);
            double sum = 0.0;
            for (double v : w) {
                CHECK(v >= eps / static_cast<double>(h.size()) - 1e-15);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            const auto best = std::max_element(h.begin(), h.end()) - h.begin();
            CHECK(*std::max_element(w.begin(), w.end()) == w[static_cast<std::size_t>(best)]);
        }
    }

    TEST_CASE("policy weights for a single state") {
        const SystemModel sys = contraction();
        const BarrierTemplate tmpl(MonomialBasis(1, 2), -1.0, sys.safe_set());
        const std::vector<int> counts = {3};
        // h1 = -x^2 prefers the successor closest to zero.
        const WeightPolicy policy{tmpl, vec({0.0, 0.0, -1.0}), 0.3, control_grid(sys.control_set(), counts)};
        const auto w = policy_weights_for_state(policy, sys, vec({0.4}));
        REQUIRE(w.size() == 3);
        CHECK(w[0] == doctest::Approx(1.0 - 0.3 + 0.1));
        CHECK(w[1] == doctest::Approx(0.1));
        CHECK(w[2] == doctest::Approx(0.1));
        const auto v = policy_weights_for_state(policy, sys, vec({-0.4}));
        CHECK(v[2] == doctest::Approx(0.8));
        CHECK_THROWS_AS(compute_weights(policy, std::vector<double>{1.0, 2.0}), UsageError);
    }

    TEST_CASE("contracting toy reaches lambda = 0 immediately") {
        Setup s = make_setup(contraction(), 2, 60, 1, 0.5, {3}, 0.9);
        const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        REQUIRE(r.ok());
        REQUIRE(!r.trace.lambdas.empty());
        CHECK(r.trace.lambdas[0] <= kLambdaTolerance);
        CHECK(r.trace.lambda_iterations == 0);
        CHECK(r.trace.reason != Termination::LambdaNotReached);
        CHECK(r.trace.total_iterations <= s.config.max_iterations);
        CHECK(r.coefficients.size() == 3);
        CHECK(r.policy.coefficients == r.coefficients);
        CHECK(r.policy.epsilon == 0.5);
        CHECK(s.tmpl.h1(r.coefficients, vec({0.0})) >= 1e-6 - 1e-7);
    }

    TEST_CASE("escaping dynamics fail with lambda not reached") {
        Setup s = make_setup(escape(), 0, 10, 2, 0.5, {2});
        const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        CHECK_FALSE(r.ok());
        CHECK(r.trace.reason == Termination::LambdaNotReached);
        CHECK(r.trace.lambdas.size() == static_cast<std::size_t>(s.config.max_lambda_iterations) + 1);
        // The x0 sample forces lambda >= |C| + gamma * eps0.
        for (double l : r.trace.lambdas) CHECK(l >= 1.0);
        CHECK(r.trace.objectives.empty());
        CHECK(r.trace.to_log().find("termination=K-exhausted-fail") != std::string::npos);
    }

    TEST_CASE("property: phase-1 slack never increases") {
        const SystemModel ex3 = builtin("ex3-controlled");
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            Setup s = make_setup(ex3, 3, 300, seed, 0.5, {3, 3});
            s.config.max_iterations = 0;
            const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
            for (std::size_t k = 1; k < r.trace.lambdas.size(); ++k)
                CHECK(r.trace.lambdas[k] <= r.trace.lambdas[k - 1] + 1e-7);
            CHECK(r.trace.objectives.size() <= 1);
        }
    }

    TEST_CASE("property: phase-2 iterates stay feasible and the objective does not drop") {
        const SystemModel ex3 = builtin("ex3-controlled");
        Setup s = make_setup(ex3, 2, 200, 5, 0.5, {3, 3});
        s.config.objective_tolerance = 0.0;
        s.config.max_iterations = 4;
        const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        REQUIRE(r.ok());
        for (std::size_t k = 1; k < r.trace.objectives.size(); ++k)
            CHECK(r.trace.objectives[k] >= r.trace.objectives[k - 1] - 1e-6 * (1.0 + std::abs(r.trace.objectives[k])));
        // Greedy weights for the final iterate dominate the ones it was solved under.
        Eigen::VectorXd z(static_cast<Eigen::Index>(r.coefficients.size()) + 1);
        z << r.coefficients, 0.0;
        const LinearProgram check =
            build_csis_lambda_lp(s.tmpl, s.data, policy_weights(r.policy, s.data), s.config.lp);
        CHECK(check.max_violation(z) <= 1e-6);
    }

    TEST_CASE("policy weight matrices are normalised") {
        const SystemModel ex3 = builtin("ex3-controlled");
        Setup s = make_setup(ex3, 2, 100, 6, 0.3, {3, 3});
        const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        const WeightMatrix w = policy_weights(r.policy, s.data);
        CHECK(w.rows() == 100);
        CHECK(w.cols() == 9);
        CHECK((w.array() >= 0.3 / 9 - 1e-15).all());
        for (Eigen::Index i = 0; i < w.rows(); ++i) CHECK(std::abs(w.row(i).sum() - 1.0) <= 1e-12);
    }

    TEST_CASE("learning is deterministic") {
        const SystemModel ex3 = builtin("ex3-controlled");
        Setup s = make_setup(ex3, 2, 150, 7, 0.5, {3, 3});
        const LearningResult a = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        const LearningResult b = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        CHECK(a.coefficients == b.coefficients);
        CHECK(a.trace.lambdas == b.trace.lambdas);
        CHECK(a.trace.objectives == b.trace.objectives);
    }

    TEST_CASE("pure greedy run and iteration log") {
        Setup s = make_setup(contraction(), 2, 40, 3, 0.0, {3}, 0.9);
        const LearningResult r = learn_weights(s.tmpl, s.data, s.surrogate, s.config, backend());
        REQUIRE(r.ok());
        const std::string log = r.trace.to_log();
        CHECK(log.rfind("k=0 lambda=", 0) == 0);
        CHECK(log.find("seconds=") != std::string::npos);
        CHECK(log.find("termination=") != std::string::npos);
        const WeightMatrix w = policy_weights(r.policy, s.data);
        for (Eigen::Index i = 0; i < w.rows(); ++i) CHECK(w.row(i).maxCoeff() == 1.0);
    }

    TEST_CASE("learning argument validation") {
        Setup s = make_setup(contraction(), 1, 10, 4, 0.5, {2});
        LearningConfig bad = s.config;
        bad.epsilon = 2.0;
        CHECK_THROWS_AS(learn_weights(s.tmpl, s.data, s.surrogate, bad, backend()), UsageError);
        bad = s.config;
        bad.max_iterations = -1;
        CHECK_THROWS_AS(learn_weights(s.tmpl, s.data, s.surrogate, bad, backend()), UsageError);
        TrainingDataset empty = s.data;
        empty.successors.pop_back();
        CHECK_THROWS_AS(learn_weights(s.tmpl, empty, s.surrogate, s.config, backend()), UsageError);
    }
}
