#include "pcsis/barrier.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "pcsis/error.hpp"

namespace pcsis {

namespace {

constexpr std::uint64_t kMaxBasisSize = 50'000'000;

// Appends every exponent tuple of total degree `total` in lexicographically
// decreasing order (x_1 power first).
void append_degree(int n, int total, std::vector<int>& prefix, std::vector<int>& out) {
    const int k = static_cast<int>(prefix.size());
    if (k == n - 1) {
        prefix.push_back(total);
        out.insert(out.end(), prefix.begin(), prefix.end());
        prefix.pop_back();
        return;
    }
    for (int e = total; e >= 0; --e) {
        prefix.push_back(e);
        append_degree(n, total - e, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::uint64_t basis_size(int n, int d) {
    if (n < 1) throw UsageError("basis_size: dimension must be >= 1");
    if (d < 0) throw UsageError("basis_size: degree must be >= 0");
    // C(n+d, d) built as C(n+k, k) for k = 1..d; every partial product is exact.
    std::uint64_t r = 1;
    for (int k = 1; k <= d; ++k) {
        std::uint64_t next = 0;
        if (__builtin_mul_overflow(r, static_cast<std::uint64_t>(n + k), &next))
            throw UsageError("basis_size: C(" + std::to_string(n + d) + ", " + std::to_string(d) +
                             ") overflows");
        r = next / static_cast<std::uint64_t>(k);
    }
    return r;
}

MonomialBasis::MonomialBasis(int dimension, int degree) : dimension_(dimension), degree_(degree) {
    const std::uint64_t m = basis_size(dimension, degree);
    if (m > kMaxBasisSize) throw UsageError("monomial basis too large: " + std::to_string(m));
    size_ = static_cast<std::size_t>(m);
    exponents_.reserve(size_ * static_cast<std::size_t>(dimension_));
    std::vector<int> prefix;
    for (int t = 0; t <= degree_; ++t) append_degree(dimension_, t, prefix, exponents_);
}

void MonomialBasis::row_into(const StateVector& x, Eigen::Ref<Eigen::VectorXd> out) const {
    if (x.size() != dimension_) throw UsageError("monomial basis: state dimension mismatch");
    if (static_cast<std::size_t>(out.size()) != size_)
        throw UsageError("monomial basis: output length mismatch");
    // powers[k * (degree+1) + p] = x_k^p
    const int stride = degree_ + 1;
    std::vector<double> powers(static_cast<std::size_t>(dimension_ * stride));
    for (int k = 0; k < dimension_; ++k) {
        double v = 1.0;
        for (int p = 0; p < stride; ++p) {
            powers[k * stride + p] = v;
            v *= x[k];
        }
    }
    const int* e = exponents_.data();
    for (std::size_t l = 0; l < size_; ++l, e += dimension_) {
        double v = 1.0;
        for (int k = 0; k < dimension_; ++k) {
            if (e[k] != 0) v *= powers[k * stride + e[k]];
        }
        out[static_cast<Eigen::Index>(l)] = v;
    }
}

Eigen::VectorXd MonomialBasis::row(const StateVector& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size_));
    row_into(x, out);
    return out;
}

double eval_h1(const MonomialBasis& basis, const CoefficientVector& a, const StateVector& x) {
    if (static_cast<std::size_t>(a.size()) != basis.size())
        throw UsageError("eval_h1: coefficient vector has length " + std::to_string(a.size()) +
                         ", basis has " + std::to_string(basis.size()));
    return a.dot(basis.row(x));
}

BarrierTemplate::BarrierTemplate(MonomialBasis basis, double outside_constant, SafeSet safe_set)
    : basis_(std::move(basis)), outside_constant_(outside_constant), safe_set_(std::move(safe_set)) {
    if (!(outside_constant_ < 0.0) || !std::isfinite(outside_constant_))
        throw UsageError("barrier template: outside constant C must be negative");
    if (basis_.dimension() != safe_set_.dimension())
        throw UsageError("barrier template: basis and safe set differ in dimension");
}

double BarrierTemplate::h(const CoefficientVector& a, const StateVector& x) const {
    if (!safe_set_.contains(x)) return outside_constant_;
    return eval_h1(basis_, a, x);
}

double eval_h(const BarrierTemplate& tmpl, const CoefficientVector& a, const StateVector& x) {
    return tmpl.h(a, x);
}

void write_coefficients(std::ostream& os, const CoefficientFile& file) {
    const MonomialBasis basis(file.dimension, file.degree);
    if (static_cast<std::size_t>(file.coefficients.size()) != basis.size())
        throw UsageError("write_coefficients: coefficient count does not match the basis");
    os << "# pcsis barrier coefficients\n";
    os << "# master_seed " << file.master_seed << '\n';
    os << "# config_hash " << std::hex << std::setw(16) << std::setfill('0') << file.config_hash
       << std::dec << std::setfill(' ') << '\n';
    os << std::setprecision(17);
    os << "n " << file.dimension << '\n';
    os << "d " << file.degree << '\n';
    os << "m " << basis.size() << '\n';
    os << "C " << file.outside_constant << '\n';
    os << "gamma " << file.gamma << '\n';
    for (std::size_t l = 0; l < basis.size(); ++l) {
        for (int e : basis.exponent(l)) os << e << ' ';
        os << file.coefficients[static_cast<Eigen::Index>(l)] << '\n';
    }
}

CoefficientFile read_coefficients(std::istream& is) {
    CoefficientFile file;
    std::string line;
    auto next_content_line = [&]() -> std::string {
        while (std::getline(is, line)) {
            if (line.rfind("# master_seed ", 0) == 0) {
                file.master_seed = std::stoull(line.substr(14));
                continue;
            }
            if (line.rfind("# config_hash ", 0) == 0) {
                file.config_hash = std::stoull(line.substr(14), nullptr, 16);
                continue;
            }
            if (line.empty() || line[0] == '#') continue;
            return line;
        }
        throw ParseError("coefficient file: unexpected end of input");
    };
    auto header = [&](const std::string& key) {
        std::istringstream ls(next_content_line());
        std::string k;
        std::string v;
        if (!(ls >> k >> v) || k != key) throw ParseError("coefficient file: expected '" + key + "'");
        return v;
    };

    std::size_t m = 0;
    try {
        file.dimension = std::stoi(header("n"));
        file.degree = std::stoi(header("d"));
        m = std::stoull(header("m"));
        file.outside_constant = std::stod(header("C"));
        file.gamma = std::stod(header("gamma"));
    } catch (const std::logic_error&) {
        throw ParseError("coefficient file: malformed header value");
    }

    const MonomialBasis basis(file.dimension, file.degree);
    if (m != basis.size()) throw ParseError("coefficient file: m does not match C(n+d, d)");
    file.coefficients.resize(static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < m; ++l) {
        std::istringstream ls(next_content_line());
        for (int expected : basis.exponent(l)) {
            int e = -1;
            if (!(ls >> e) || e != expected)
                throw ParseError("coefficient file: exponents of line " + std::to_string(l + 1) +
                                 " do not follow basis order");
        }
        double c = 0.0;
        if (!(ls >> c)) throw ParseError("coefficient file: missing coefficient");
        file.coefficients[static_cast<Eigen::Index>(l)] = c;
    }
    return file;
}

}  // namespace pcsis
