#include <doctest.h>

#include <cstdlib>
#include <limits>

#include "pcsis/error.hpp"
#include "pcsis/plugin.hpp"

using namespace pcsis;

namespace {

SystemModel fixture(const std::string& mode, int n = 2, bool controlled = false) {
    std::optional<ControlSet> controls;
    if (controlled) controls = ControlSet(Eigen::VectorXd::Constant(n, -0.1), Eigen::VectorXd::Constant(n, 0.1));
    return plugin_system(PluginSpec{{PCSIS_FIXTURE_PLUGIN, std::to_string(n), mode}, n,
                                    SafeSet::box(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0)),
                                    controls});
}

}  // namespace

TEST_SUITE("plugin") {
    TEST_CASE("request lines carry 17 significant digits") {
        StateVector x(2);
        x << 0.1, -2.0 / 3.0;
        ControlVector u(1);
        u << 1e-300;
        CHECK(format_plugin_request(x, u) == "0.10000000000000001 -0.66666666666666663 1e-300");
        CHECK(format_plugin_request(x, ControlVector()) == "0.10000000000000001 -0.66666666666666663");
    }

    TEST_CASE("response parsing") {
        const StateVector y = parse_plugin_response("0.5 -1.25", 2);
        CHECK(y[0] == 0.5);
        CHECK(y[1] == -1.25);
        CHECK_THROWS_AS(parse_plugin_response("0.5", 2), SimulationError);
        CHECK_THROWS_AS(parse_plugin_response("0.5 1 2", 2), SimulationError);
        CHECK_THROWS_AS(parse_plugin_response("0.5 abc", 2), SimulationError);
    }

    TEST_CASE("controlled adapter round trip") {
        const SystemModel sys = fixture("half", 2, true);
        CHECK(sys.controlled());
        StateVector x(2);
        x << 0.8, -0.4;
        ControlVector u(2);
        u << 0.1, -0.05;
        const StateVector y = sys.step(x, u);
        CHECK(y[0] == 0.5);
        CHECK(y[1] == -0.25);
        CHECK(sys.step(x, u) == y);
        CHECK(sys.name().rfind("plugin:", 0) == 0);
    }

    TEST_CASE("uncontrolled adapter and copies share the process") {
        const SystemModel sys = fixture("identity", 3);
        const SystemModel copy = sys;
        StateVector x(3);
        x << 0.1, 0.2, 0.3;
        CHECK(sys.step(x) == x);
        CHECK(copy.step(x) == x);
    }

    TEST_CASE("adapter failures surface as simulation errors") {
        StateVector x = StateVector::Zero(2);
        CHECK_THROWS_AS(fixture("nan").step(x), SimulationError);
        CHECK_THROWS_AS(fixture("garbage").step(x), SimulationError);
        const SystemModel missing = plugin_system(PluginSpec{{"/nonexistent/adapter"}, 2,
                                                             SafeSet::box(Eigen::VectorXd::Constant(2, -1.0),
                                                                          Eigen::VectorXd::Constant(2, 1.0)),
                                                             std::nullopt});
        CHECK_THROWS_AS(missing.step(x), SimulationError);
    }
}
