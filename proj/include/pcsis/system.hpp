#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pcsis {

using StateVector = Eigen::VectorXd;
using ControlVector = Eigen::VectorXd;

/// Per-dimension axis-aligned bounds.
struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dimension() const { return static_cast<int>(lower.size()); }
    /// Closed-bound membership.
    bool contains(const Eigen::VectorXd& x) const;
};

/// A polynomial stored as a list of terms; used for sublevel-set safe sets.
class SparsePolynomial {
public:
    struct Term {
        std::vector<int> exponents;
        double coefficient = 0.0;
        bool operator==(const Term&) const = default;
    };

    SparsePolynomial() = default;
    SparsePolynomial(int dimension, std::vector<Term> terms);

    int dimension() const { return dimension_; }
    const std::vector<Term>& terms() const { return terms_; }
    double operator()(const Eigen::VectorXd& x) const;

    bool operator==(const SparsePolynomial&) const = default;

private:
    int dimension_ = 0;
    std::vector<Term> terms_;
};

/// The safe set X.  Either a closed box or the strict sublevel set {g < 0}
/// together with a box that encloses it (used for rejection sampling).
class SafeSet {
public:
    enum class Kind { Box, PolySublevel };

    static SafeSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
    static SafeSet poly_sublevel(SparsePolynomial g, Bounds enclosing_box);

    Kind kind() const { return kind_; }
    int dimension() const { return enclosing_.dimension(); }
    const Bounds& enclosing_box() const { return enclosing_; }
    /// Only meaningful for Kind::PolySublevel.
    const SparsePolynomial& polynomial() const { return g_; }

    bool contains(const StateVector& x) const;

private:
    SafeSet() = default;

    Kind kind_ = Kind::Box;
    Bounds enclosing_;
    SparsePolynomial g_;
};

bool contains(const SafeSet& set, const StateVector& x);

/// Compact box of admissible controls U.
class ControlSet {
public:
    ControlSet(Eigen::VectorXd lower, Eigen::VectorXd upper);

    int dimension() const { return bounds_.dimension(); }
    const Bounds& bounds() const { return bounds_; }
    bool contains(const ControlVector& u) const { return bounds_.contains(u); }

private:
    Bounds bounds_;
};

/// Opaque one-step map f(x, u).  Uncontrolled systems receive an empty u.
using StepFunction = std::function<StateVector(const StateVector&, const ControlVector&)>;

/// A black-box discrete-time system x(t+1) = f(x(t), u(t)).
///
/// The model never inspects f; it only validates dimensions on the way in
/// and finiteness on the way out.  Instances are immutable and `step` may be
/// called concurrently as long as the wrapped function is re-entrant.
class SystemModel {
public:
    SystemModel(std::string name, int dimension, StepFunction step, SafeSet safe_set,
                std::optional<ControlSet> control_set = std::nullopt);

    const std::string& name() const { return name_; }
    int dimension() const { return dimension_; }
    int control_dimension() const { return control_set_ ? control_set_->dimension() : 0; }
    bool controlled() const { return control_set_.has_value(); }
    const SafeSet& safe_set() const { return safe_set_; }
    /// Throws UsageError for uncontrolled systems.
    const ControlSet& control_set() const;

    StateVector step(const StateVector& x, const ControlVector& u = ControlVector()) const;

private:
    std::string name_;
    int dimension_;
    StepFunction step_;
    SafeSet safe_set_;
    std::optional<ControlSet> control_set_;
};

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

/// One of the bundled benchmark systems.  Throws UsageError for unknown names.
SystemModel builtin(std::string_view name);

}  // namespace pcsis
