#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pcsis/barrier.hpp"
#include "pcsis/error.hpp"

using namespace pcsis;

namespace {

StateVector vec(std::initializer_list<double> v) {
    StateVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

std::vector<std::vector<int>> exponents_of(const MonomialBasis& b) {
    std::vector<std::vector<int>> out;
    for (std::size_t l = 0; l < b.size(); ++l) out.emplace_back(b.exponent(l).begin(), b.exponent(l).end());
    return out;
}

}  // namespace

TEST_SUITE("barrier") {
    TEST_CASE("basis_size examples") {
        CHECK(basis_size(2, 12) == 91);
        CHECK(basis_size(2, 5) == 21);
        CHECK(basis_size(2, 4) == 15);
        CHECK(basis_size(6, 4) == 210);
        CHECK(basis_size(12, 2) == 91);
        for (int n = 1; n <= 8; ++n) CHECK(basis_size(n, 0) == 1);
    }

    TEST_CASE("basis_size agrees with Pascal's triangle") {
        for (int n = 1; n <= 12; ++n)
            for (int d = 0; d <= 14; ++d) CHECK(basis_size(n, d) == oracle::binomial(n + d, d));
    }

    TEST_CASE("basis_size rejects bad input and overflow") {
        CHECK_THROWS_AS(basis_size(0, 2), UsageError);
        CHECK_THROWS_AS(basis_size(2, -1), UsageError);
        CHECK_THROWS_AS(basis_size(200, 200), UsageError);
    }

    TEST_CASE("graded-lex order with the constant first") {
        const MonomialBasis b(2, 2);
        const std::vector<std::vector<int>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
        CHECK(exponents_of(b) == want);
        for (int n = 1; n <= 4; ++n)
            for (int d = 0; d <= 5; ++d) {
                const MonomialBasis basis(n, d);
                CHECK(basis.size() == oracle::binomial(n + d, d));
                CHECK(exponents_of(basis) == oracle::graded_lex(n, d));
            }
    }

    TEST_CASE("property: basis construction is deterministic") {
        for (int n = 1; n <= 6; ++n)
            for (int d = 0; d <= 6; ++d) CHECK(exponents_of(MonomialBasis(n, d)) == exponents_of(MonomialBasis(n, d)));
    }

    TEST_CASE("eval_h1 examples") {
        const MonomialBasis b1(1, 2);
        CHECK(eval_h1(b1, vec({1.0, 2.0, 3.0}), vec({2.0})) == 17.0);

        const MonomialBasis b(2, 3);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size()));
        a[0] = 4.5;
        CHECK(eval_h1(b, a, vec({0.3, -7.0})) == 4.5);
        CHECK(eval_h1(b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size())), vec({0.3, -7.0})) == 0.0);
    }

    TEST_CASE("basis rows match direct monomial evaluation") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        for (int n = 1; n <= 3; ++n)
            for (int d = 0; d <= 12; d += 3) {
                const MonomialBasis b(n, d);
                const auto ref = oracle::graded_lex(n, d);
                for (int t = 0; t < 20; ++t) {
                    StateVector x(n);
                    for (int k = 0; k < n; ++k) x[k] = u(rng);
                    const Eigen::VectorXd row = b.row(x);
                    for (std::size_t l = 0; l < b.size(); ++l)
                        CHECK(row[static_cast<Eigen::Index>(l)] ==
                              doctest::Approx(oracle::monomial(ref[l], x)).epsilon(1e-13));
                }
            }
    }

    TEST_CASE("eval_h uses C outside the safe set") {
        const SystemModel vdp = builtin("vanderpol");
        const BarrierTemplate tmpl(MonomialBasis(2, 12), -1.0, vdp.safe_set());
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g;
        Eigen::VectorXd a(91);
        for (auto& v : a) v = g(rng);
        CHECK(eval_h(tmpl, a, vec({2.0, 0.0})) == -1.0);

        Eigen::VectorXd c = Eigen::VectorXd::Zero(91);
        c[0] = 1e-6;
        CHECK(eval_h(tmpl, c, vec({0.1, 0.2})) == 1e-6);
        CHECK_THROWS_AS(BarrierTemplate(MonomialBasis(2, 2), 0.0, vdp.safe_set()), UsageError);
        CHECK_THROWS_AS(BarrierTemplate(MonomialBasis(3, 2), -1.0, vdp.safe_set()), UsageError);
    }

    TEST_CASE("property: eval_h equals C exactly outside the safe set") {
        const SystemModel vdp = builtin("vanderpol");
        const BarrierTemplate tmpl(MonomialBasis(2, 6), -0.75, vdp.safe_set());
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        Eigen::VectorXd a(static_cast<Eigen::Index>(tmpl.size()));
        for (auto& v : a) v = u(rng);
        int outside = 0;
        while (outside < 1000) {
            const StateVector x = vec({u(rng), u(rng)});
            if (vdp.safe_set().contains(x)) continue;
            CHECK(tmpl.h(a, x) == -0.75);
            ++outside;
        }
    }

    TEST_CASE("property: h1 is linear in the coefficients") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        const MonomialBasis b(3, 4);
        const auto m = static_cast<Eigen::Index>(b.size());
        for (int t = 0; t < 200; ++t) {
            Eigen::VectorXd a(m), c(m);
            for (Eigen::Index l = 0; l < m; ++l) {
                a[l] = u(rng);
                c[l] = u(rng);
            }
            const double s = u(rng), r = u(rng);
            const StateVector x = vec({u(rng), u(rng), u(rng)});
            const double lhs = eval_h1(b, s * a + r * c, x);
            const double rhs = s * eval_h1(b, a, x) + r * eval_h1(b, c, x);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
            CHECK(eval_h1(b, a, x) == doctest::Approx(oracle::h1(3, 4, a, x)).epsilon(1e-12));
        }
    }

    TEST_CASE("coefficient file round trip") {
        CoefficientFile f;
        f.dimension = 2;
        f.degree = 3;
        f.outside_constant = -1.0;
        f.gamma = 0.9999;
        f.master_seed = 42;
        f.config_hash = 0xdeadbeefcafef00dULL;
        f.coefficients = Eigen::VectorXd::LinSpaced(10, -1.0 / 3.0, 7.0 / 11.0);
        std::stringstream ss;
        write_coefficients(ss, f);
        const std::string text = ss.str();
        CHECK(text.find("# master_seed 42") != std::string::npos);
        CHECK(text.find("deadbeefcafef00d") != std::string::npos);
        const CoefficientFile g = read_coefficients(ss);
        CHECK(g.dimension == 2);
        CHECK(g.degree == 3);
        CHECK(g.gamma == f.gamma);
        CHECK(g.outside_constant == f.outside_constant);
        CHECK(g.master_seed == 42);
        CHECK(g.config_hash == f.config_hash);
        CHECK(g.coefficients == f.coefficients);
    }

    TEST_CASE("corrupted coefficient files are parse errors") {
        CoefficientFile f;
        f.dimension = 1;
        f.degree = 1;
        f.gamma = 0.5;
        f.coefficients = vec({1.0, 2.0});
        std::stringstream ss;
        write_coefficients(ss, f);
        std::string text = ss.str();

        std::istringstream truncated(text.substr(0, text.size() - 6));
        CHECK_THROWS_AS(read_coefficients(truncated), ParseError);
        std::string swapped = text;
        swapped.replace(swapped.rfind("\n1 "), 3, "\n7 ");
        std::istringstream bad_order(swapped);
        CHECK_THROWS_AS(read_coefficients(bad_order), ParseError);
        std::istringstream empty("");
        CHECK_THROWS_AS(read_coefficients(empty), ParseError);
    }
}
