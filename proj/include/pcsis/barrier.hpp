#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcsis/system.hpp"

namespace pcsis {

using CoefficientVector = Eigen::VectorXd;

/// Number of monomials of total degree <= d in n variables, C(n+d, d).
/// Throws UsageError on invalid input or if the count does not fit in 64 bits.
std::uint64_t basis_size(int n, int d);

/// All monomials of total degree <= d in n variables, graded-lexicographic
/// order, constant monomial first.  For n = 2, d = 2 the order is
/// 1, x, y, x^2, xy, y^2.
class MonomialBasis {
public:
    MonomialBasis(int dimension, int degree);

    int dimension() const { return dimension_; }
    int degree() const { return degree_; }
    std::size_t size() const { return size_; }

    std::span<const int> exponent(std::size_t l) const {
        return {exponents_.data() + l * static_cast<std::size_t>(dimension_),
                static_cast<std::size_t>(dimension_)};
    }

    /// Monomial values at x, so that h1(a, x) = a . row(x).
    Eigen::VectorXd row(const StateVector& x) const;
    /// Writes the monomial values at x into `out` (length size()).
    void row_into(const StateVector& x, Eigen::Ref<Eigen::VectorXd> out) const;

    bool operator==(const MonomialBasis& other) const {
        return dimension_ == other.dimension_ && degree_ == other.degree_;
    }

private:
    int dimension_;
    int degree_;
    std::size_t size_;
    std::vector<int> exponents_;  // size_ x dimension_, row major
};

/// h1(a, x) = sum_l a_l x^{e_l}.
double eval_h1(const MonomialBasis& basis, const CoefficientVector& a, const StateVector& x);

/// Barrier template h(a, x) = h1(a, x) inside the safe set and C outside.
class BarrierTemplate {
public:
    BarrierTemplate(MonomialBasis basis, double outside_constant, SafeSet safe_set);

    const MonomialBasis& basis() const { return basis_; }
    double outside_constant() const { return outside_constant_; }
    const SafeSet& safe_set() const { return safe_set_; }
    std::size_t size() const { return basis_.size(); }

    double h1(const CoefficientVector& a, const StateVector& x) const { return eval_h1(basis_, a, x); }
    double h(const CoefficientVector& a, const StateVector& x) const;

private:
    MonomialBasis basis_;
    double outside_constant_;
    SafeSet safe_set_;
};

double eval_h(const BarrierTemplate& tmpl, const CoefficientVector& a, const StateVector& x);

/// Coefficient artifact: header (n, d, m, C, gamma) followed by one line per
/// monomial "e_1 ... e_n coefficient" in basis order.
struct CoefficientFile {
    int dimension = 0;
    int degree = 0;
    double outside_constant = -1.0;
    double gamma = 0.0;
    CoefficientVector coefficients;
    std::uint64_t master_seed = 0;
    std::uint64_t config_hash = 0;
};

void write_coefficients(std::ostream& os, const CoefficientFile& file);
CoefficientFile read_coefficients(std::istream& is);

}  // namespace pcsis
