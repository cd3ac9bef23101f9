#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pcsis/error.hpp"
#include "pcsis/rng.hpp"
#include "pcsis/sampling.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

const SafeSet& unit_square() {
    static const SafeSet s = SafeSet::box(vec({0.0, 0.0}), vec({1.0, 1.0}));
    return s;
}

}  // namespace

TEST_SUITE("sampling") {
    TEST_CASE("required_sample_count reproduces the benchmark table N") {
        CHECK(required_sample_count(0.01, 1e-20, 91) == 27611);
        CHECK(required_sample_count(0.3, 1e-20, 91) == 921);
        CHECK(required_sample_count(0.1, 1e-20, 91) == 2762);
        CHECK(required_sample_count(0.05, 1e-20, 91) == 5523);
        CHECK(required_sample_count(0.01, 1e-20, 21) == 13611);
        CHECK(required_sample_count(0.005, 1e-20, 15) == 24821);
        CHECK(required_sample_count(0.01, 1e-20, 210) == 51411);
    }

    TEST_CASE("required_sample_count is the smallest N satisfying the bound") {
        for (double alpha : {0.5, 0.3, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001})
            for (double beta : {0.5, 1e-3, 1e-10, 1e-20, 1e-40})
                for (std::uint64_t m : {1, 2, 6, 15, 21, 91, 210, 1001})
                    CHECK(required_sample_count(alpha, beta, m) == oracle::sample_count(alpha, beta, m));
    }

    TEST_CASE("required_sample_count monotonicity sweep") {
        const double alphas[] = {0.4, 0.2, 0.1, 0.05, 0.01, 0.001};
        const double betas[] = {0.1, 1e-5, 1e-10, 1e-20, 1e-30};
        for (std::uint64_t m = 1; m <= 300; m += 37) {
            for (std::size_t i = 0; i + 1 < std::size(alphas); ++i)
                CHECK(required_sample_count(alphas[i], 1e-20, m) <= required_sample_count(alphas[i + 1], 1e-20, m));
            for (std::size_t i = 0; i + 1 < std::size(betas); ++i)
                CHECK(required_sample_count(0.05, betas[i], m) <= required_sample_count(0.05, betas[i + 1], m));
            CHECK(required_sample_count(0.05, 1e-20, m) <= required_sample_count(0.05, 1e-20, m + 1));
        }
    }

    TEST_CASE("required_sample_count input validation") {
        CHECK_THROWS_AS(required_sample_count(0.0, 1e-20, 5), UsageError);
        CHECK_THROWS_AS(required_sample_count(1.0, 1e-20, 5), UsageError);
        CHECK_THROWS_AS(required_sample_count(0.1, 0.0, 5), UsageError);
        CHECK_THROWS_AS(required_sample_count(0.1, 1e-20, 0), UsageError);
    }

    TEST_CASE("uniform box sampling has the right mean") {
        const SampleSet s = sample_uniform(unit_square(), 100000, 123);
        REQUIRE(s.size() == 100000);
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        for (const auto& x : s.states) mean += x;
        mean /= 1e5;
        // 3 sigma with sigma = (1/sqrt(12)) / sqrt(1e5) is about 0.0027.
        CHECK(std::abs(mean[0] - 0.5) <= 0.005);
        CHECK(std::abs(mean[1] - 0.5) <= 0.005);
    }

    TEST_CASE("property: chi-square uniformity on a 4x4 grid") {
        const SampleSet s = sample_uniform(unit_square(), 100000, 77);
        std::array<int, 16> cells{};
        for (const auto& x : s.states) {
            const int i = std::min(3, static_cast<int>(x[0] * 4)), j = std::min(3, static_cast<int>(x[1] * 4));
            ++cells[static_cast<std::size_t>(i * 4 + j)];
        }
        double chi2 = 0.0;
        const double expected = 100000.0 / 16.0;
        for (int c : cells) chi2 += (c - expected) * (c - expected) / expected;
        // Upper 1e-3 quantile of chi-square with 15 degrees of freedom.
        CHECK(chi2 < 37.697);
    }

    TEST_CASE("disk acceptance ratio is about pi/4") {
        const SafeSet disk = builtin("vanderpol").safe_set();
        const double ratio = acceptance_ratio(disk, 100000, 5);
        CHECK(std::abs(ratio - std::numbers::pi / 4.0) <= 0.01);
        CHECK(disk.enclosing_box().upper[0] == doctest::Approx(std::sqrt(1.1)));
    }

    TEST_CASE("samples are in the set, exact in count and reproducible") {
        const SafeSet disk = builtin("vanderpol").safe_set();
        const SampleSet one = sample_uniform(disk, 1, 9);
        REQUIRE(one.size() == 1);
        CHECK(disk.contains(one.states[0]));

        const SampleSet a = sample_uniform(disk, 5000, 31, SampleKind::Training);
        const SampleSet b = sample_uniform(disk, 5000, 31, SampleKind::Training);
        CHECK(a.kind == SampleKind::Training);
        CHECK(a.seed == 31);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(disk.contains(a.states[i]));
            CHECK(a.states[i] == b.states[i]);
        }
        // Counter-based streams: a prefix does not depend on the total count.
        const SampleSet c = sample_uniform(disk, 100, 31);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.states[i] == a.states[i]);
        CHECK(sample_uniform(disk, 10, 32).states[0] != a.states[0]);
        CHECK_THROWS_AS(sample_uniform(disk, 0, 1), UsageError);
    }

    TEST_CASE("a loose enclosing box is a configuration error") {
        SparsePolynomial g(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1e-6}});
        const SafeSet tiny =
            SafeSet::poly_sublevel(g, Bounds{Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0)});
        CHECK_THROWS_AS(sample_uniform(tiny, 10, 1), ConfigurationError);
    }

    TEST_CASE("surrogate lattice on the unit square") {
        const SampleSet s = surrogate_grid(unit_square(), 4, 0);
        REQUIRE(s.size() == 4);
        std::set<std::pair<double, double>> pts;
        for (const auto& x : s.states) pts.insert({x[0], x[1]});
        CHECK(pts == std::set<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
        CHECK(s.kind == SampleKind::Surrogate);
    }

    TEST_CASE("surrogate sets are exact in size, inside and deterministic") {
        const SafeSet disk = builtin("vanderpol").safe_set();
        const SampleSet a = surrogate_grid(disk, 1000, 3);
        const SampleSet b = surrogate_grid(disk, 1000, 3);
        REQUIRE(a.size() == 1000);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double r2 = a.states[i].squaredNorm();
            CHECK(r2 < 1.1);
            CHECK(a.states[i] == b.states[i]);
        }
        const SafeSet box6 = builtin("ex-c4").safe_set();
        const SampleSet c = surrogate_grid(box6, 1000, 3);
        REQUIRE(c.size() == 1000);
        for (const auto& x : c.states) CHECK(box6.contains(x));
        CHECK(surrogate_grid(box6, 1000, 3).states == c.states);
    }

    TEST_CASE("control grids") {
        const ControlSet u2(vec({-1.0, -1.0}), vec({1.0, 1.0}));
        const std::vector<int> c33 = {3, 3};
        const ControlGrid g = control_grid(u2, c33);
        REQUIRE(g.size() == 9);
        std::set<std::pair<double, double>> pts;
        for (const auto& u : g.points) pts.insert({u[0], u[1]});
        std::set<std::pair<double, double>> want;
        for (double a : {-1.0, 0.0, 1.0})
            for (double b : {-1.0, 0.0, 1.0}) want.insert({a, b});
        CHECK(pts == want);
        CHECK(g.per_dim_counts == c33);

        const ControlSet u3(vec({-10.0, -10.0, -10.0}), vec({10.0, 10.0, 10.0}));
        const std::vector<int> c222 = {2, 2, 2};
        const ControlGrid h = control_grid(u3, c222);
        REQUIRE(h.size() == 8);
        for (const auto& u : h.points)
            for (int k = 0; k < 3; ++k) CHECK(std::abs(u[k]) == 10.0);

        const ControlSet u1(vec({-1.0}), vec({1.0}));
        const std::vector<int> c1 = {1};
        const ControlGrid m = control_grid(u1, c1);
        REQUIRE(m.size() == 1);
        CHECK(m.points[0][0] == 0.0);

        const std::vector<int> zero = {0};
        CHECK_THROWS_AS(control_grid(u1, zero), UsageError);
        CHECK(default_grid_counts(2) == std::vector<int>{3, 3});
        CHECK(default_grid_counts(3) == std::vector<int>{2, 2, 2});
    }

    TEST_CASE("training datasets") {
        const SystemModel ex3 = builtin("ex3-controlled");
        const std::vector<int> c3 = {3, 1};
        const ControlGrid grid = control_grid(ex3.control_set(), c3);
        SampleSet two;
        two.states = {vec({0.0, 0.0}), vec({1.0, -2.0})};
        const TrainingDataset d = build_training_dataset(ex3, two, grid);
        CHECK(d.successors.size() == 6);
        CHECK(d.state_count() == 2);
        CHECK(d.control_count() == 3);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(d.successor(0, j) == vec({0.0, 0.0}));
            CHECK(d.successor(1, j) == ex3.step(two.states[1], grid.points[j]));
        }
        const TrainingDataset again = build_training_dataset(ex3, two, grid);
        CHECK(again.successors == d.successors);
        CHECK_THROWS_AS(build_training_dataset(builtin("vanderpol"), two, grid), UsageError);
    }

    TEST_CASE("training errors carry the sample and control index") {
        const SystemModel blowup("blowup", 1, [](const StateVector& x, const ControlVector& u) {
            return StateVector(StateVector::Constant(1, u[0] > 0 ? std::nan("") : x[0]));
        }, SafeSet::box(vec({-1.0}), vec({1.0})), ControlSet(vec({-1.0}), vec({1.0})));
        SampleSet s;
        s.states = {vec({0.5})};
        const std::vector<int> c = {2};
        try {
            build_training_dataset(blowup, s, control_grid(blowup.control_set(), c));
            FAIL("expected SimulationError");
        } catch (const SimulationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("i=0") != std::string::npos);
            CHECK(msg.find("j=1") != std::string::npos);
        }
    }

    TEST_CASE("sample CSV round trip is bitwise") {
        const SampleSet a = sample_uniform(builtin("ex-c4").safe_set(), 50, 8);
        std::stringstream ss;
        write_samples_csv(ss, a);
        const SampleSet b = read_samples_csv(ss, 6);
        REQUIRE(b.size() == a.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i] == b.states[i]);
        std::istringstream bad("0.1,0.2\n");
        CHECK_THROWS_AS(read_samples_csv(bad, 6), ParseError);
    }

    TEST_CASE("sub-stream seeds differ by label") {
        std::set<std::uint64_t> seeds;
        for (auto l : {StreamLabel::Scenario, StreamLabel::Training, StreamLabel::Surrogate, StreamLabel::Volume,
                       StreamLabel::Validation, StreamLabel::Survival})
            seeds.insert(derive_seed(0, l));
        CHECK(seeds.size() == 6);
        CHECK(derive_seed(1, StreamLabel::Scenario) != derive_seed(0, StreamLabel::Scenario));
        CHECK(derive_seed(5, StreamLabel::Volume) == derive_seed(5, StreamLabel::Volume));
    }
}
