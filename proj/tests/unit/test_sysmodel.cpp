#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "pcsis/error.hpp"
#include "pcsis/system.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

bool bitwise_equal(const StateVector& a, const StateVector& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

StateVector random_in(const Bounds& box, std::mt19937_64& rng) {
    StateVector x(box.dimension());
    for (int k = 0; k < box.dimension(); ++k)
        x[k] = std::uniform_real_distribution<double>(box.lower[k], box.upper[k])(rng);
    return x;
}

// Lorenz-96 written with 1-based arrays padded by the wrap-around entries,
// evaluated from the last index down.
StateVector lorenz_reference(const StateVector& x, const ControlVector& u) {
    double p[15];
    for (int i = 1; i <= 12; ++i) p[i + 1] = x[i - 1];
    p[0] = x[10];   // x_{-1} = x_11
    p[1] = x[11];   // x_0 = x_12
    p[14] = x[0];   // x_13 = x_1
    auto at = [&](int i) { return p[i + 1]; };
    StateVector y(12);
    for (int i = 12; i >= 1; --i) {
        double r = (at(i + 1) - at(i - 2)) * at(i - 1) - at(i) + 2.0;
        if (i >= 10) r += u[i - 10];
        y[i - 1] = at(i) + 1e-2 * r;
    }
    return y;
}

}  // namespace

TEST_SUITE("sysmodel") {
    TEST_CASE("vanderpol fixed point and unit step") {
        const SystemModel vdp = builtin("vanderpol");
        const StateVector o = vdp.step(vec({0.0, 0.0}));
        CHECK(o[0] == 0.0);
        CHECK(o[1] == 0.0);
        // x' = x + 0.01 * (-2y), y' = y + 0.01 * (0.8x + 10(x^2 - 0.21)y) at (1, 0).
        const StateVector y = vdp.step(vec({1.0, 0.0}));
        CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(y[1] == doctest::Approx(0.008).epsilon(1e-15));
    }

    TEST_CASE("predator-prey origin is fixed") {
        const StateVector y = builtin("predator-prey").step(vec({0.0, 0.0}));
        CHECK(y[0] == 0.0);
        CHECK(y[1] == 0.0);
    }

    TEST_CASE("safe set membership conventions") {
        const SystemModel vdp = builtin("vanderpol");
        CHECK(contains(vdp.safe_set(), vec({1.0, 0.0})));
        CHECK_FALSE(contains(vdp.safe_set(), vec({1.1, 0.0})));
        // Strict inequality on the boundary of the disk.
        CHECK_FALSE(contains(vdp.safe_set(), vec({std::sqrt(1.1) + 1e-12, 0.0})));

        const SafeSet box = SafeSet::box(vec({-3.0, -3.0}), vec({3.0, 3.0}));
        CHECK(contains(box, vec({3.0, 3.0})));
        CHECK(contains(box, vec({-3.0, 0.0})));
        CHECK_FALSE(contains(box, vec({3.0 + 1e-12, 0.0})));
    }

    TEST_CASE("builtin shapes") {
        const SystemModel lz = builtin("lorenz12");
        CHECK(lz.dimension() == 12);
        CHECK(lz.control_dimension() == 3);
        CHECK(lz.safe_set().kind() == SafeSet::Kind::Box);
        CHECK(lz.safe_set().enclosing_box().lower == Eigen::VectorXd::Constant(12, -15.0));
        CHECK(lz.safe_set().enclosing_box().upper == Eigen::VectorXd::Constant(12, 15.0));
        CHECK(lz.control_set().bounds().lower == Eigen::VectorXd::Constant(3, -10.0));
        CHECK(lz.control_set().bounds().upper == Eigen::VectorXd::Constant(3, 10.0));

        const SystemModel vdp = builtin("vanderpol");
        CHECK(vdp.dimension() == 2);
        CHECK(vdp.control_dimension() == 0);
        CHECK_FALSE(vdp.controlled());
        CHECK(vdp.safe_set().kind() == SafeSet::Kind::PolySublevel);
        CHECK(vdp.safe_set().polynomial()(vec({0.0, 0.0})) == doctest::Approx(-1.1));
        CHECK(vdp.safe_set().polynomial()(vec({1.0, 1.0})) == doctest::Approx(0.9));

        const SystemModel ex3 = builtin("ex3-controlled");
        CHECK(ex3.dimension() == 2);
        CHECK(ex3.control_dimension() == 2);
        CHECK(ex3.safe_set().enclosing_box().upper == Eigen::VectorXd::Constant(2, 3.0));
        CHECK(ex3.control_set().bounds().lower == Eigen::VectorXd::Constant(2, -1.0));

        CHECK(builtin("predator-prey").dimension() == 2);
        CHECK(builtin("ex-c2").dimension() == 2);
        CHECK(builtin("ex-c4").dimension() == 6);
        CHECK(builtin_names().size() == 6);
    }

    TEST_CASE("unknown builtin lists valid names") {
        try {
            builtin("duffing");
            FAIL("expected UsageError");
        } catch (const UsageError& e) {
            const std::string msg = e.what();
            for (const auto& name : builtin_names()) CHECK(msg.find(name) != std::string::npos);
        }
    }

    TEST_CASE("step argument validation") {
        const SystemModel vdp = builtin("vanderpol");
        CHECK_THROWS_AS(vdp.step(vec({1.0})), UsageError);
        CHECK_THROWS_AS(vdp.step(vec({0.0, 0.0}), vec({1.0})), UsageError);
        const SystemModel ex3 = builtin("ex3-controlled");
        CHECK_THROWS_AS(ex3.step(vec({0.0, 0.0})), UsageError);
        CHECK_THROWS_AS(ex3.step(vec({0.0, 0.0}), vec({2.0, 0.0})), UsageError);
        CHECK_THROWS_AS(ex3.step(vec({0.0, 0.0}), vec({0.0})), UsageError);
        CHECK_THROWS_AS(vdp.control_set(), UsageError);
    }

    TEST_CASE("non-finite output is a simulation error carrying the state") {
        const SystemModel bad("bad", 1, [](const StateVector& x, const ControlVector&) {
            return StateVector(StateVector::Constant(1, x[0] > 0 ? std::numeric_limits<double>::infinity() : 0.0));
        }, SafeSet::box(vec({-1.0}), vec({1.0})));
        CHECK(bad.step(vec({-0.5}))[0] == 0.0);
        try {
            bad.step(vec({0.25}));
            FAIL("expected SimulationError");
        } catch (const SimulationError& e) {
            CHECK(std::string(e.what()).find("0.25") != std::string::npos);
        }
    }

    TEST_CASE("set construction invariants") {
        CHECK_THROWS_AS(SafeSet::box(vec({0.0}), vec({0.0})), ConfigurationError);
        CHECK_THROWS_AS(SafeSet::box(vec({1.0}), vec({0.0})), ConfigurationError);
        CHECK_THROWS_AS(ControlSet(vec({1.0}), vec({0.0})), ConfigurationError);
        CHECK_NOTHROW(ControlSet(vec({0.0}), vec({0.0})));
    }

    TEST_CASE("property: builtins stay finite on random inputs") {
        std::mt19937_64 rng(7);
        for (const auto& name : builtin_names()) {
            const SystemModel sys = builtin(name);
            const Bounds& box = sys.safe_set().enclosing_box();
            int checked = 0;
            while (checked < 1000) {
                const StateVector x = random_in(box, rng);
                if (!sys.safe_set().contains(x)) continue;
                const StateVector y =
                    sys.controlled() ? sys.step(x, random_in(sys.control_set().bounds(), rng)) : sys.step(x);
                REQUIRE(y.size() == sys.dimension());
                CHECK(y.allFinite());
                ++checked;
            }
        }
    }

    TEST_CASE("property: step is deterministic bitwise") {
        std::mt19937_64 rng(11);
        for (const auto& name : builtin_names()) {
            const SystemModel sys = builtin(name);
            for (int t = 0; t < 100; ++t) {
                const StateVector x = random_in(sys.safe_set().enclosing_box(), rng);
                const ControlVector u = sys.controlled() ? random_in(sys.control_set().bounds(), rng) : ControlVector();
                CHECK(bitwise_equal(sys.step(x, u), sys.step(x, u)));
            }
        }
    }

    TEST_CASE("property: lorenz12 wrap-around is independent of evaluation order") {
        const SystemModel lz = builtin("lorenz12");
        std::mt19937_64 rng(3);
        for (int t = 0; t < 1000; ++t) {
            const StateVector x = random_in(lz.safe_set().enclosing_box(), rng);
            const ControlVector u = random_in(lz.control_set().bounds(), rng);
            const StateVector got = lz.step(x, u);
            const StateVector want = lorenz_reference(x, u);
            for (int i = 0; i < 12; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
        }
    }
}
