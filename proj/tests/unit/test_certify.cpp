#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcsis/certify.hpp"
#include "pcsis/error.hpp"
#include "pcsis/rng.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

SystemModel identity_box(int n) {
    return SystemModel("identity", n, [](const StateVector& x, const ControlVector&) { return x; },
                       SafeSet::box(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0)));
}

// 1.05 - x^2 - y^2 in the degree-2 basis 1, x, y, x^2, xy, y^2.
CoefficientVector inner_disk() { return vec({1.05, 0.0, 0.0, -1.0, 0.0, -1.0}); }

PacCertificate sample_certificate(double lambda_star, double p_hat) {
    PacCertificate c;
    c.mode = "sis";
    c.system = describe_builtin("vanderpol");
    c.alpha = 0.01;
    c.beta = 1e-20;
    c.gamma = 0.9999;
    c.eps0 = 1e-6;
    c.outside_constant = -1.0;
    c.coefficient_bound = 1e3;
    c.lambda_bar = 1002.0;
    c.lambda_tolerance = 1e-8;
    c.degree = 2;
    c.m = 6;
    c.N = 2000;
    c.lambda_star = lambda_star;
    c.coefficients = vec({1.0 / 3.0, -0.1, 2e-17, -1.0, 0.5, -0.875});
    c.volume = VolumeEstimate{p_hat, 1000000, std::sqrt(p_hat * (1 - p_hat) / 1e6), 77};
    c.master_seed = 5;
    c.seeds = {{"scenario", derive_seed(5, StreamLabel::Scenario)}, {"volume", derive_seed(5, StreamLabel::Volume)}};
    c.config_hash = 0x0123456789abcdefULL;
    c.timings = {{"total", 1.5}};
    return assemble_certificate(c);
}

}  // namespace

TEST_SUITE("certify") {
    TEST_CASE("volume of nested disks") {
        const SystemModel vdp = builtin("vanderpol");
        const BarrierTemplate tmpl(MonomialBasis(2, 2), -1.0, vdp.safe_set());
        const VolumeEstimate v = mc_volume(tmpl, inner_disk(), 1000000, 3);
        const double want = 1.05 / 1.1;
        const double sigma = std::sqrt(want * (1 - want) / 1e6);
        CHECK(std::abs(v.p_hat - want) <= 3 * sigma);
        CHECK(v.samples == 1000000);
        CHECK(v.seed == 3);
        CHECK(v.standard_error == doctest::Approx(std::sqrt(v.p_hat * (1 - v.p_hat) / 1e6)));

        const VolumeEstimate same = mc_volume(tmpl, inner_disk(), 1000000, 3);
        CHECK(same.p_hat == v.p_hat);
        const VolumeEstimate other = mc_volume(tmpl, inner_disk(), 1000000, 4);
        CHECK(std::abs(other.p_hat - v.p_hat) <= 6 * sigma);
    }

    TEST_CASE("volume of constant barriers") {
        const SystemModel vdp = builtin("vanderpol");
        const BarrierTemplate tmpl(MonomialBasis(2, 1), -1.0, vdp.safe_set());
        const VolumeEstimate all = mc_volume(tmpl, vec({1e-6, 0.0, 0.0}), 10000, 1);
        CHECK(all.p_hat == 1.0);
        CHECK(all.standard_error == 0.0);
        CHECK(mc_volume(tmpl, vec({-1e-6, 0.0, 0.0}), 10000, 1).p_hat == 0.0);
        CHECK_THROWS_AS(mc_volume(tmpl, vec({1.0, 0.0, 0.0}), 0, 1), UsageError);
    }

    TEST_CASE("PAC bound") {
        CHECK(pac_bound(0.01, 0.5) == doctest::Approx(0.98));
        CHECK(pac_bound(0.05, 0.8) == doctest::Approx(0.9375));
        CHECK(pac_bound(0.01, 0.522354) == doctest::Approx(0.980856).epsilon(1e-6));
        CHECK(pac_bound(0.3, 0.3) == 0.0);
        CHECK(pac_bound(0.01, 1.0) == doctest::Approx(0.99));
        CHECK_THROWS_AS(pac_bound(0.01, 0.0), CertificateError);
        double last = -1e9;
        for (double p = 0.01; p <= 1.0; p += 0.01) {
            const double b = pac_bound(0.05, p);
            CHECK(b > last);
            CHECK(b < 1.0);
            last = b;
        }
    }

    TEST_CASE("empirical invariance of the identity map") {
        const SystemModel sys = identity_box(2);
        const BarrierTemplate tmpl(MonomialBasis(2, 2), -1.0, sys.safe_set());
        const InvarianceReport r = empirical_invariance(tmpl, vec({0.5, 0, 0, -1, 0, -1}), sys, nullptr, 20000, 9);
        CHECK(r.fraction == 1.0);
        CHECK(r.kept == r.satisfied);
        CHECK(r.kept > 5000);
        CHECK_FALSE(r.warning.has_value());

        const InvarianceReport c = empirical_invariance(tmpl, vec({1.0, 0, 0, 0, 0, 0}), sys, nullptr, 1000, 9);
        CHECK(c.kept == 1000);
        CHECK(c.fraction == 1.0);
    }

    TEST_CASE("empirical invariance detects escapes and warns on tiny sets") {
        const SystemModel shift("shift", 1, [](const StateVector& x, const ControlVector&) {
            return StateVector(x.array() + 0.5);
        }, SafeSet::box(vec({-1.0}), vec({1.0})));
        const BarrierTemplate tmpl(MonomialBasis(1, 0), -1.0, shift.safe_set());
        const InvarianceReport r = empirical_invariance(tmpl, vec({1.0}), shift, nullptr, 40000, 2);
        CHECK(std::abs(r.fraction - 0.75) <= 4 * std::sqrt(0.75 * 0.25 / 40000));
        CHECK(r.standard_error > 0.0);

        const BarrierTemplate quad(MonomialBasis(1, 2), -1.0, shift.safe_set());
        const InvarianceReport w = empirical_invariance(quad, vec({1e-6, 0.0, -1.0}), shift, nullptr, 1000, 2);
        CHECK(w.kept < 100);
        CHECK(w.warning.has_value());

        CHECK_THROWS_AS(empirical_invariance(tmpl, vec({1.0}), shift, nullptr, 0, 2), UsageError);
        CHECK_THROWS_AS(empirical_invariance(tmpl, vec({1.0}), builtin("ex3-controlled"), nullptr, 10, 2),
                        UsageError);
    }

    TEST_CASE("controlled invariance uses the best grid control") {
        const SystemModel sys("push", 1, [](const StateVector& x, const ControlVector& u) {
            return StateVector(x + u);
        }, SafeSet::box(vec({-1.0}), vec({1.0})), ControlSet(vec({-2.0}), vec({2.0})));
        const BarrierTemplate tmpl(MonomialBasis(1, 0), -1.0, sys.safe_set());
        const std::vector<int> counts = {3};
        const WeightPolicy policy{tmpl, vec({1.0}), 0.5, control_grid(sys.control_set(), counts)};
        const InvarianceReport r = empirical_invariance(tmpl, vec({1.0}), sys, &policy, 5000, 1);
        CHECK(r.fraction == 1.0);
    }

    TEST_CASE("maximal invariant set by survival") {
        const SystemModel vdp = builtin("vanderpol");
        const SurvivalResult zero = mc_maximal_sis(vdp, 0, 500, 1);
        CHECK(zero.fraction == 1.0);
        CHECK(zero.states.size() == 500);
        CHECK(mc_maximal_sis(identity_box(3), 50, 500, 1).fraction == 1.0);
        const SurvivalResult some = mc_maximal_sis(vdp, 500, 2000, 1);
        CHECK(some.fraction > 0.3);
        CHECK(some.fraction < 0.9);
        CHECK_THROWS_AS(mc_maximal_sis(vdp, -1, 10, 1), UsageError);
        CHECK_THROWS_AS(mc_maximal_sis(builtin("ex3-controlled"), 5, 10, 1), UsageError);

        std::ostringstream os;
        write_survival_csv(os, zero);
        const std::string text = os.str();
        CHECK(text.rfind("x1,x2,survived\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 501);
    }

    TEST_CASE("certificate validity is derived") {
        const PacCertificate ok = sample_certificate(0.0, 0.6);
        CHECK(ok.valid());
        REQUIRE(ok.bound().has_value());
        CHECK(*ok.bound() == doctest::Approx(1 - 0.01 / 0.6));
        REQUIRE(ok.conservative_bound().has_value());
        CHECK(*ok.conservative_bound() < *ok.bound());

        const PacCertificate slack = sample_certificate(1e-3, 0.6);
        CHECK_FALSE(slack.valid());
        CHECK_FALSE(slack.bound().has_value());
        CHECK_FALSE(sample_certificate(0.0, 0.0).valid());

        CHECK(to_json(ok).at("status") == "VALID");
        CHECK(to_json(slack).at("status") == "VOID");
        CHECK(to_json(slack).at("bound").is_null());
        CHECK_FALSE(ok.policy(builtin("vanderpol")).has_value());
    }

    TEST_CASE("assemble_certificate checks shapes") {
        PacCertificate c = sample_certificate(0.0, 0.5);
        c.m = 7;
        CHECK_THROWS_AS(assemble_certificate(c), UsageError);
        c = sample_certificate(0.0, 0.5);
        c.mode = "other";
        CHECK_THROWS_AS(assemble_certificate(c), UsageError);
        c = sample_certificate(0.0, 0.5);
        c.volume.p_hat = 1.5;
        CHECK_THROWS_AS(assemble_certificate(c), UsageError);
    }

    TEST_CASE("certificate JSON round trip is lossless") {
        const PacCertificate c = sample_certificate(0.0, 0.6180339887498949);
        std::stringstream ss;
        write_certificate(ss, c);
        const PacCertificate d = read_certificate(ss);
        CHECK(to_json(d) == to_json(c));
        CHECK(d.coefficients == c.coefficients);
        CHECK(d.volume.p_hat == c.volume.p_hat);
        CHECK(d.config_hash == c.config_hash);
        CHECK(d.seeds == c.seeds);
        CHECK(d.barrier().basis() == c.barrier().basis());

        const PacCertificate v = sample_certificate(0.25, 0.6);
        std::stringstream vs;
        write_certificate(vs, v);
        CHECK(to_json(read_certificate(vs)) == to_json(v));
    }

    TEST_CASE("tampered certificates are parse errors") {
        const nlohmann::json good = to_json(sample_certificate(0.0, 0.6));
        auto expect_parse_error = [](const nlohmann::json& j) {
            std::istringstream is(j.dump());
            CHECK_THROWS_AS(read_certificate(is), ParseError);
        };
        nlohmann::json j = good;
        j["status"] = "VOID";
        expect_parse_error(j);
        j = good;
        j["bound"] = 0.999;
        expect_parse_error(j);
        j = good;
        j["bound"] = nullptr;
        expect_parse_error(j);
        j = good;
        j["lambda_star"] = 0.5;
        expect_parse_error(j);
        j = good;
        j.erase("coefficients");
        expect_parse_error(j);
        j = good;
        j["coefficients"].erase(0);
        expect_parse_error(j);
        j = good;
        j["format"] = "something-else";
        expect_parse_error(j);
        std::istringstream broken("{\"format\": ");
        CHECK_THROWS_AS(read_certificate(broken), ParseError);
    }

    TEST_CASE("safe and control set JSON round trips") {
        for (const auto& name : builtin_names()) {
            const SystemModel sys = builtin(name);
            const SafeSet back = safe_set_from_json(safe_set_to_json(sys.safe_set()));
            CHECK(back.kind() == sys.safe_set().kind());
            CHECK(back.enclosing_box().lower == sys.safe_set().enclosing_box().lower);
            CHECK(back.enclosing_box().upper == sys.safe_set().enclosing_box().upper);
            CHECK(back.polynomial() == sys.safe_set().polynomial());
            if (sys.controlled()) {
                const ControlSet u = control_set_from_json(control_set_to_json(sys.control_set()));
                CHECK(u.bounds().lower == sys.control_set().bounds().lower);
                CHECK(u.bounds().upper == sys.control_set().bounds().upper);
            }
            const SystemModel again = instantiate(describe_builtin(name));
            CHECK(again.dimension() == sys.dimension());
        }
        CHECK(safe_set_to_json(builtin("vanderpol").safe_set()).at("kind") == "poly_sublevel");
        CHECK_THROWS_AS(safe_set_from_json({{"kind", "ellipse"}}), ParseError);
    }
}
