#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcsis/barrier.hpp"
#include "pcsis/sampling.hpp"
#include "pcsis/weights.hpp"

namespace pcsis {

struct VolumeEstimate {
    double p_hat = 0.0;
    std::size_t samples = 0;
    double standard_error = 0.0;
    std::uint64_t seed = 0;
};

/// Fraction of uniform safe-set samples with h1(a, x) >= 0.
VolumeEstimate mc_volume(const BarrierTemplate& tmpl, const CoefficientVector& a, std::size_t n_samples,
                         std::uint64_t seed);

/// 1 - alpha / P_hat.  Throws CertificateError when P_hat <= 0.
double pac_bound(double alpha, double p_hat);

struct InvarianceReport {
    double fraction = 0.0;
    std::size_t kept = 0;       // samples with h >= 0
    std::size_t satisfied = 0;  // of those, one-step invariant
    double standard_error = 0.0;
    std::optional<std::string> warning;
};

/// Empirical one-step invariance of {x in X | h(a, x) >= 0}.  Uncontrolled:
/// checks h(f(x)) >= 0.  Controlled (policy given): checks the best grid
/// control, max_j h(f(x, u_j)) >= 0.
InvarianceReport empirical_invariance(const BarrierTemplate& tmpl, const CoefficientVector& a,
                                      const SystemModel& system, const WeightPolicy* policy, std::size_t n_eval,
                                      std::uint64_t seed);

struct SurvivalResult {
    std::vector<StateVector> states;
    std::vector<bool> survived;
    double fraction = 0.0;
};

/// Monte-Carlo estimate of the maximal invariant set: a sample survives if
/// every iterate up to `horizon` stays in the safe set.
SurvivalResult mc_maximal_sis(const SystemModel& system, int horizon, std::size_t n_samples, std::uint64_t seed);

void write_survival_csv(std::ostream& os, const SurvivalResult& result);

/// Enough to rebuild the system a certificate talks about.
struct SystemDescriptor {
    std::string builtin;                  // empty for plugins
    std::vector<std::string> plugin_argv;  // empty for built-ins
    int dimension = 0;
    nlohmann::json safe_set;             // see safe_set_to_json
    std::optional<nlohmann::json> control_set;
};

nlohmann::json safe_set_to_json(const SafeSet& set);
SafeSet safe_set_from_json(const nlohmann::json& j);
nlohmann::json control_set_to_json(const ControlSet& set);
ControlSet control_set_from_json(const nlohmann::json& j);

SystemDescriptor describe_builtin(const std::string& name);
SystemModel instantiate(const SystemDescriptor& descriptor);

/// A PAC certificate for one synthesis run.
struct PacCertificate {
    std::string mode;  // "sis" or "csis"
    SystemDescriptor system;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double eps0 = 0.0;
    double outside_constant = -1.0;
    double coefficient_bound = 0.0;
    double lambda_bar = 0.0;
    double lambda_tolerance = 0.0;
    int degree = 0;
    std::uint64_t m = 0;
    std::uint64_t N = 0;
    double epsilon = 0.0;            // csis only
    std::vector<int> grid_counts;    // csis only
    double lambda_star = 0.0;
    CoefficientVector coefficients;
    VolumeEstimate volume;
    std::uint64_t master_seed = 0;
    std::map<std::string, std::uint64_t> seeds;
    std::uint64_t config_hash = 0;
    std::map<std::string, double> timings;

    /// lambda* <= tolerance and P_hat > 0.
    bool valid() const;
    /// 1 - alpha / P_hat; empty when the certificate is void.
    std::optional<double> bound() const;
    /// 1 - alpha / (P_hat - 3 sigma); empty when void or non-positive.
    std::optional<double> conservative_bound() const;

    BarrierTemplate barrier() const;
    /// Policy whose grid is the certificate's control grid (csis only).
    std::optional<WeightPolicy> policy(const SystemModel& system) const;
};

/// Assembles the certificate; validity is derived, never stored as input.
PacCertificate assemble_certificate(PacCertificate fields);

nlohmann::json to_json(const PacCertificate& cert, bool include_timings = true);
PacCertificate certificate_from_json(const nlohmann::json& j);
void write_certificate(std::ostream& os, const PacCertificate& cert);
/// Throws ParseError on malformed or internally inconsistent documents.
PacCertificate read_certificate(std::istream& is);

}  // namespace pcsis
