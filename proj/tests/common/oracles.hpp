#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pcsis/barrier.hpp"
#include "pcsis/lp.hpp"
#include "pcsis/sampling.hpp"

namespace oracle {

// C(n + d, d) from Pascal's triangle.
inline std::uint64_t binomial(int n, int k) {
    std::vector<std::vector<std::uint64_t>> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        t[i].assign(static_cast<std::size_t>(i) + 1, 1);
        for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return t[n][k];
}

// Smallest N with alpha >= (2/N)(ln(1/beta) + m + 1), by search in long double.
inline std::uint64_t sample_count(double alpha, double beta, std::uint64_t m) {
    const long double k = std::log(1.0L / static_cast<long double>(beta)) + static_cast<long double>(m) + 1.0L;
    std::uint64_t n = 1;
    while (static_cast<long double>(alpha) < 2.0L * k / static_cast<long double>(n)) n *= 2;
    std::uint64_t lo = n / 2, hi = n;  // predicate false at lo (or lo == 0), true at hi
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (static_cast<long double>(alpha) >= 2.0L * k / static_cast<long double>(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

// Exponent tuples of total degree <= d, grouped by degree, lexicographically
// descending inside a degree (x before y before z).
inline std::vector<std::vector<int>> graded_lex(int n, int d) {
    std::vector<std::vector<int>> all;
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int var, int left) -> void {
        if (var == n - 1) {
            e[static_cast<std::size_t>(var)] = left;
            all.push_back(e);
            return;
        }
        for (int k = left; k >= 0; --k) {
            e[static_cast<std::size_t>(var)] = k;
            self(self, var + 1, left - k);
        }
    };
    for (int deg = 0; deg <= d; ++deg) rec(rec, 0, deg);
    return all;
}

inline double monomial(const std::vector<int>& e, const Eigen::VectorXd& x) {
    double v = 1.0;
    for (std::size_t k = 0; k < e.size(); ++k) v *= std::pow(x[static_cast<Eigen::Index>(k)], e[k]);
    return v;
}

// h1 by direct summation over the oracle basis.
inline double h1(int n, int d, const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
    const auto basis = graded_lex(n, d);
    double s = 0.0;
    for (std::size_t l = 0; l < basis.size(); ++l) s += a[static_cast<Eigen::Index>(l)] * monomial(basis[l], x);
    return s;
}

// Left side minus right side of an LP row at z.
inline double row_slack(const pcsis::LinearProgram& lp, std::size_t r, const Eigen::VectorXd& z) {
    const auto& row = lp.rows()[r];
    const double act = lp.row_activity(r, z);
    return row.relation == pcsis::Relation::GreaterEqual ? act - row.rhs : row.rhs - act;
}

// Tiny random controlled instance for the row-construction oracle.
struct TinyInstance {
    int n = 1;
    int d = 0;
    pcsis::TrainingDataset data;
    pcsis::WeightMatrix weights;
    double gamma = 0.5;
};

inline TinyInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_n(1, 2), pick_d(0, 3), pick_N(1, 5), pick_M(1, 3);
    std::uniform_real_distribution<double> inside(-1.0, 1.0), wide(-1.6, 1.6), unit(0.0, 1.0);
    TinyInstance t;
    t.n = pick_n(rng);
    t.d = pick_d(rng);
    const int N = pick_N(rng), M = pick_M(rng);
    t.gamma = 0.05 + 0.9 * unit(rng);
    t.data.grid.per_dim_counts = {M};
    for (int j = 0; j < M; ++j) t.data.grid.points.push_back(Eigen::VectorXd::Constant(1, j));
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd x(t.n);
        for (int k = 0; k < t.n; ++k) x[k] = inside(rng);
        t.data.states.push_back(x);
        for (int j = 0; j < M; ++j) {
            Eigen::VectorXd y(t.n);
            for (int k = 0; k < t.n; ++k) y[k] = wide(rng);
            t.data.successors.push_back(y);
        }
    }
    t.weights.resize(N, M);
    for (int i = 0; i < N; ++i) {
        double sum = 0.0;
        for (int j = 0; j < M; ++j) sum += (t.weights(i, j) = unit(rng) + 1e-3);
        t.weights.row(i) /= sum;
        // Exact normalisation: put the rounding remainder on the last entry.
        t.weights(i, M - 1) = 1.0 - (t.weights.row(i).sum() - t.weights(i, M - 1));
    }
    return t;
}

}  // namespace oracle
