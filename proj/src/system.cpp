#include "pcsis/system.hpp"

#include <cmath>
#include <sstream>

#include "pcsis/error.hpp"

namespace pcsis {

namespace {

std::string format_state(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i > 0) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

Eigen::VectorXd constant(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

SafeSet disk(double radius_squared) {
    SparsePolynomial g(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -radius_squared}});
    const double r = std::sqrt(radius_squared);
    return SafeSet::poly_sublevel(std::move(g), Bounds{constant(2, -r), constant(2, r)});
}

// Reversed-time Van der Pol oscillator, Euler step 0.01:
// xdot = -2y, ydot = 0.8x + 10(x^2 - 0.21)y.
SystemModel make_vanderpol() {
    auto f = [](const StateVector& s, const ControlVector&) {
        const double x = s[0], y = s[1];
        StateVector next(2);
        next[0] = x + 0.01 * (-2.0 * y);
        next[1] = y + 0.01 * (0.8 * x + 10.0 * (x * x - 0.21) * y);
        return next;
    };
    return SystemModel("vanderpol", 2, f, disk(1.1));
}

SystemModel make_ex3_controlled() {
    auto f = [](const StateVector& s, const ControlVector& u) {
        const double x = s[0], y = s[1];
        StateVector next(2);
        next[0] = x + 0.01 * (-0.41 * x - 1.05 * y - 2.3 * x * x - 0.56 * x * y - x * x * x + x * u[0]);
        next[1] = y + 0.01 * (1.98 * x + x * y + y * u[1]);
        return next;
    };
    return SystemModel("ex3-controlled", 2, f, SafeSet::box(constant(2, -3.0), constant(2, 3.0)),
                       ControlSet(constant(2, -1.0), constant(2, 1.0)));
}

// Lorenz-96 with 12 states, cyclic indices, controls on the last three states.
SystemModel make_lorenz12() {
    static constexpr int n = 12;
    auto f = [](const StateVector& x, const ControlVector& u) {
        auto at = [&x](int i) { return x[((i % n) + n) % n]; };
        StateVector next(n);
        for (int i = 0; i < n; ++i) {
            double rate = (at(i + 1) - at(i - 2)) * at(i - 1) - x[i] + 2.0;
            if (i >= 9) rate += u[i - 9];
            next[i] = x[i] + 1e-2 * rate;
        }
        return next;
    };
    return SystemModel("lorenz12", n, f, SafeSet::box(constant(n, -15.0), constant(n, 15.0)),
                       ControlSet(constant(3, -10.0), constant(3, 10.0)));
}

SystemModel make_predator_prey() {
    auto f = [](const StateVector& s, const ControlVector&) {
        const double x = s[0], y = s[1];
        StateVector next(2);
        next[0] = 0.5 * x - x * y;
        next[1] = -0.5 * y + x * y;
        return next;
    };
    return SystemModel("predator-prey", 2, f, disk(1.0));
}

SystemModel make_ex_c2() {
    auto f = [](const StateVector& s, const ControlVector&) {
        const double x = s[0], y = s[1];
        const double w = 2.0 * x * x + y;
        StateVector next(2);
        next[0] = w;
        next[1] = -2.0 * w * w - 0.8 * x;
        return next;
    };
    return SystemModel("ex-c2", 2, f, SafeSet::box(constant(2, -1.0), constant(2, 1.0)));
}

SystemModel make_ex_c4() {
    auto f = [](const StateVector& x, const ControlVector&) {
        const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5];
        StateVector next(6);
        next[0] = x1 + 0.01 * (x2 * x4 - x1 * x1 * x1);
        next[1] = x2 + 0.01 * (-3.0 * x1 * x4 - x2 * x2 * x2);
        next[2] = x3 + 0.01 * (-x3 - 3.0 * x1 * x4 * x4 * x4);
        next[3] = x4 + 0.01 * (-x4 + x1 * x3);
        next[4] = x5 + 0.01 * (-x5 + x6 * x6 * x6);
        next[5] = x6 + 0.01 * (-x5 - x6 + x3 * x3 * x3 * x3);
        return next;
    };
    return SystemModel("ex-c4", 6, f, SafeSet::box(constant(6, -0.5), constant(6, 2.0)));
}

}  // namespace

bool Bounds::contains(const Eigen::VectorXd& x) const {
    if (x.size() != lower.size()) throw UsageError("bounds: dimension mismatch");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

SparsePolynomial::SparsePolynomial(int dimension, std::vector<Term> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
    if (dimension_ < 1) throw UsageError("polynomial dimension must be >= 1");
    for (const auto& t : terms_) {
        if (static_cast<int>(t.exponents.size()) != dimension_)
            throw UsageError("polynomial term has wrong number of exponents");
        for (int e : t.exponents)
            if (e < 0) throw UsageError("polynomial exponents must be non-negative");
    }
}

double SparsePolynomial::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != dimension_) throw UsageError("polynomial: dimension mismatch");
    double sum = 0.0;
    for (const auto& t : terms_) {
        double v = t.coefficient;
        for (int k = 0; k < dimension_; ++k) {
            for (int p = 0; p < t.exponents[k]; ++p) v *= x[k];
        }
        sum += v;
    }
    return sum;
}

SafeSet SafeSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() < 1 || lower.size() != upper.size())
        throw ConfigurationError("safe box: bounds must be non-empty and of equal length");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
            throw ConfigurationError("safe box: need finite lower < upper in every dimension");
    }
    SafeSet s;
    s.kind_ = Kind::Box;
    s.enclosing_ = Bounds{std::move(lower), std::move(upper)};
    return s;
}

SafeSet SafeSet::poly_sublevel(SparsePolynomial g, Bounds enclosing_box) {
    // Validate the box via the Box factory.
    SafeSet s = box(enclosing_box.lower, enclosing_box.upper);
    if (g.dimension() != s.dimension())
        throw ConfigurationError("sublevel set: polynomial and enclosing box differ in dimension");
    s.kind_ = Kind::PolySublevel;
    s.g_ = std::move(g);
    return s;
}

bool SafeSet::contains(const StateVector& x) const {
    if (x.size() != dimension()) throw UsageError("safe set: dimension mismatch");
    if (kind_ == Kind::Box) return enclosing_.contains(x);
    return g_(x) < 0.0;
}

bool contains(const SafeSet& set, const StateVector& x) { return set.contains(x); }

ControlSet::ControlSet(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : bounds_{std::move(lower), std::move(upper)} {
    if (bounds_.lower.size() < 1 || bounds_.lower.size() != bounds_.upper.size())
        throw ConfigurationError("control set: bounds must be non-empty and of equal length");
    for (Eigen::Index i = 0; i < bounds_.lower.size(); ++i) {
        if (!std::isfinite(bounds_.lower[i]) || !std::isfinite(bounds_.upper[i]) ||
            bounds_.lower[i] > bounds_.upper[i])
            throw ConfigurationError("control set: need finite lower <= upper in every dimension");
    }
}

SystemModel::SystemModel(std::string name, int dimension, StepFunction step, SafeSet safe_set,
                         std::optional<ControlSet> control_set)
    : name_(std::move(name)),
      dimension_(dimension),
      step_(std::move(step)),
      safe_set_(std::move(safe_set)),
      control_set_(std::move(control_set)) {
    if (dimension_ < 1) throw UsageError("system dimension must be >= 1");
    if (!step_) throw UsageError("system step function is empty");
    if (safe_set_.dimension() != dimension_)
        throw UsageError("safe set dimension differs from system dimension");
}

const ControlSet& SystemModel::control_set() const {
    if (!control_set_) throw UsageError("system '" + name_ + "' has no control input");
    return *control_set_;
}

StateVector SystemModel::step(const StateVector& x, const ControlVector& u) const {
    if (x.size() != dimension_)
        throw UsageError("step: state has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dimension_));
    if (u.size() != control_dimension())
        throw UsageError("step: control has length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(control_dimension()));
    if (control_set_ && !control_set_->contains(u))
        throw UsageError("step: control " + format_state(u) + " outside the control set");

    StateVector y = step_(x, u);
    if (y.size() != dimension_)
        throw SimulationError("step: successor of " + format_state(x) + " has length " +
                              std::to_string(y.size()));
    if (!y.allFinite())
        throw SimulationError("step: non-finite successor " + format_state(y) + " from state " +
                              format_state(x) + (u.size() ? " under control " + format_state(u) : ""));
    return y;
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"vanderpol",     "ex3-controlled", "lorenz12",
                                                   "predator-prey", "ex-c2",          "ex-c4"};
    return names;
}

SystemModel builtin(std::string_view name) {
    if (name == "vanderpol") return make_vanderpol();
    if (name == "ex3-controlled") return make_ex3_controlled();
    if (name == "lorenz12") return make_lorenz12();
    if (name == "predator-prey") return make_predator_prey();
    if (name == "ex-c2") return make_ex_c2();
    if (name == "ex-c4") return make_ex_c4();

    std::string msg = "unknown system '" + std::string(name) + "'; valid names:";
    for (const auto& n : builtin_names()) msg += " " + n;
    throw UsageError(msg);
}

}  // namespace pcsis
