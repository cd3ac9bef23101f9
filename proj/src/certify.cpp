#include "pcsis/certify.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "pcsis/error.hpp"
#include "pcsis/parallel.hpp"
#include "pcsis/plugin.hpp"
#include "pcsis/rng.hpp"
#include "pcsis/weight_learn.hpp"

namespace pcsis {

using nlohmann::json;

namespace {

constexpr std::size_t kMinKeptSamples = 100;

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

VolumeEstimate mc_volume(const BarrierTemplate& tmpl, const CoefficientVector& a, std::size_t n_samples,
                         std::uint64_t seed) {
    if (n_samples < 1) throw UsageError("mc_volume: need at least one sample");
    const SampleSet samples = sample_uniform(tmpl.safe_set(), n_samples, seed, SampleKind::Volume);
    std::vector<unsigned char> inside(n_samples);
    parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) inside[i] = tmpl.h1(a, samples.states[i]) >= 0.0;
    });
    std::size_t hits = 0;
    for (auto b : inside) hits += b;
    VolumeEstimate est;
    est.samples = n_samples;
    est.seed = seed;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
    est.standard_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n_samples));
    return est;
}

double pac_bound(double alpha, double p_hat) {
    if (!(p_hat > 0.0))
        throw CertificateError("pac_bound: estimated volume is zero, so the certified set is empty");
    return 1.0 - alpha / p_hat;
}

InvarianceReport empirical_invariance(const BarrierTemplate& tmpl, const CoefficientVector& a,
                                      const SystemModel& system, const WeightPolicy* policy, std::size_t n_eval,
                                      std::uint64_t seed) {
    if (n_eval < 1) throw UsageError("empirical_invariance: need at least one sample");
    if (system.controlled() != (policy != nullptr))
        throw UsageError("empirical_invariance: a policy is required exactly for controlled systems");
    const SampleSet samples = sample_uniform(tmpl.safe_set(), n_eval, seed, SampleKind::Validation);

    // 0: outside S~, 1: inside but leaves, 2: inside and stays.
    std::vector<unsigned char> outcome(n_eval, 0);
    parallel_for(n_eval, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& x = samples.states[i];
            if (tmpl.h(a, x) < 0.0) continue;
            bool stays = false;
            if (policy == nullptr) {
                stays = tmpl.h(a, system.step(x)) >= 0.0;
            } else {
                for (const auto& u : policy->grid.points) {
                    if (tmpl.h(a, system.step(x, u)) >= 0.0) {
                        stays = true;
                        break;
                    }
                }
            }
            outcome[i] = stays ? 2 : 1;
        }
    });

    InvarianceReport report;
    for (auto o : outcome) {
        if (o > 0) ++report.kept;
        if (o == 2) ++report.satisfied;
    }
    if (report.kept > 0) {
        const double kept = static_cast<double>(report.kept);
        report.fraction = static_cast<double>(report.satisfied) / kept;
        report.standard_error = std::sqrt(report.fraction * (1.0 - report.fraction) / kept);
    }
    if (report.kept < kMinKeptSamples)
        report.warning = "only " + std::to_string(report.kept) +
                         " evaluation samples fell inside the certified set; the estimate has little power";
    return report;
}

SurvivalResult mc_maximal_sis(const SystemModel& system, int horizon, std::size_t n_samples, std::uint64_t seed) {
    if (system.controlled()) throw UsageError("mc_maximal_sis: system must be uncontrolled");
    if (horizon < 0) throw UsageError("mc_maximal_sis: horizon must be non-negative");
    SurvivalResult result;
    result.states = sample_uniform(system.safe_set(), n_samples, seed, SampleKind::Validation).states;
    std::vector<unsigned char> alive(n_samples, 1);
    parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            StateVector x = result.states[i];
            for (int t = 0; t < horizon; ++t) {
                x = system.step(x);
                if (!system.safe_set().contains(x)) {
                    alive[i] = 0;
                    break;
                }
            }
        }
    });
    result.survived.assign(alive.begin(), alive.end());
    std::size_t count = 0;
    for (auto b : alive) count += b;
    result.fraction = static_cast<double>(count) / static_cast<double>(std::max<std::size_t>(1, n_samples));
    return result;
}

void write_survival_csv(std::ostream& os, const SurvivalResult& result) {
    const int n = result.states.empty() ? 0 : static_cast<int>(result.states.front().size());
    for (int k = 0; k < n; ++k) os << 'x' << k + 1 << ',';
    os << "survived\n";
    char buf[32];
    for (std::size_t i = 0; i < result.states.size(); ++i) {
        for (int k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", result.states[i][k]);
            os << buf << ',';
        }
        os << (result.survived[i] ? 1 : 0) << '\n';
    }
}

json safe_set_to_json(const SafeSet& set) {
    if (set.kind() == SafeSet::Kind::Box)
        return {{"kind", "box"},
                {"lower", vector_to_json(set.enclosing_box().lower)},
                {"upper", vector_to_json(set.enclosing_box().upper)}};
    json terms = json::array();
    for (const auto& t : set.polynomial().terms()) terms.push_back({{"exponents", t.exponents}, {"coefficient", t.coefficient}});
    return {{"kind", "poly_sublevel"},
            {"terms", terms},
            {"enclosing_lower", vector_to_json(set.enclosing_box().lower)},
            {"enclosing_upper", vector_to_json(set.enclosing_box().upper)}};
}

SafeSet safe_set_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "box") return SafeSet::box(vector_from_json(j.at("lower")), vector_from_json(j.at("upper")));
    if (kind != "poly_sublevel") throw ParseError("unknown safe set kind '" + kind + "'");
    Bounds box{vector_from_json(j.at("enclosing_lower")), vector_from_json(j.at("enclosing_upper"))};
    std::vector<SparsePolynomial::Term> terms;
    for (const auto& t : j.at("terms"))
        terms.push_back({t.at("exponents").get<std::vector<int>>(), t.at("coefficient").get<double>()});
    return SafeSet::poly_sublevel(SparsePolynomial(box.dimension(), std::move(terms)), box);
}

json control_set_to_json(const ControlSet& set) {
    return {{"lower", vector_to_json(set.bounds().lower)}, {"upper", vector_to_json(set.bounds().upper)}};
}

ControlSet control_set_from_json(const json& j) {
    return ControlSet(vector_from_json(j.at("lower")), vector_from_json(j.at("upper")));
}

SystemDescriptor describe_builtin(const std::string& name) {
    const SystemModel sys = builtin(name);
    SystemDescriptor d;
    d.builtin = name;
    d.dimension = sys.dimension();
    d.safe_set = safe_set_to_json(sys.safe_set());
    if (sys.controlled()) d.control_set = control_set_to_json(sys.control_set());
    return d;
}

SystemModel instantiate(const SystemDescriptor& descriptor) {
    if (!descriptor.builtin.empty()) return builtin(descriptor.builtin);
    if (descriptor.plugin_argv.empty()) throw ParseError("system descriptor names neither a built-in nor a plugin");
    std::optional<ControlSet> controls;
    if (descriptor.control_set) controls = control_set_from_json(*descriptor.control_set);
    return plugin_system(PluginSpec{descriptor.plugin_argv, descriptor.dimension,
                                    safe_set_from_json(descriptor.safe_set), controls});
}

bool PacCertificate::valid() const { return lambda_star <= lambda_tolerance && volume.p_hat > 0.0; }

std::optional<double> PacCertificate::bound() const {
    if (!valid()) return std::nullopt;
    return pac_bound(alpha, volume.p_hat);
}

std::optional<double> PacCertificate::conservative_bound() const {
    if (!valid()) return std::nullopt;
    const double low = volume.p_hat - 3.0 * volume.standard_error;
    if (!(low > 0.0)) return std::nullopt;
    return pac_bound(alpha, low);
}

BarrierTemplate PacCertificate::barrier() const {
    return BarrierTemplate(MonomialBasis(system.dimension, degree), outside_constant, safe_set_from_json(system.safe_set));
}

std::optional<WeightPolicy> PacCertificate::policy(const SystemModel& sys) const {
    if (mode != "csis") return std::nullopt;
    return WeightPolicy{barrier(), coefficients, epsilon, control_grid(sys.control_set(), grid_counts)};
}

PacCertificate assemble_certificate(PacCertificate fields) {
    if (fields.mode != "sis" && fields.mode != "csis") throw UsageError("certificate: mode must be sis or csis");
    if (fields.m != basis_size(fields.system.dimension, fields.degree))
        throw UsageError("certificate: m does not match the barrier basis");
    if (static_cast<std::uint64_t>(fields.coefficients.size()) != fields.m)
        throw UsageError("certificate: coefficient count differs from m");
    if (!(fields.volume.p_hat >= 0.0 && fields.volume.p_hat <= 1.0))
        throw UsageError("certificate: P_hat must lie in [0, 1]");
    return fields;
}

json to_json(const PacCertificate& c, bool include_timings) {
    json sys;
    if (!c.system.builtin.empty()) sys["builtin"] = c.system.builtin;
    else sys["plugin"] = c.system.plugin_argv;
    sys["dimension"] = c.system.dimension;
    sys["safe_set"] = c.system.safe_set;
    if (c.system.control_set) sys["control_set"] = *c.system.control_set;

    json j;
    j["format"] = "pcsis-certificate/1";
    j["status"] = c.valid() ? "VALID" : "VOID";
    j["mode"] = c.mode;
    j["system"] = sys;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["eps0"] = c.eps0;
    j["C"] = c.outside_constant;
    j["U_a"] = c.coefficient_bound;
    j["lambda_bar"] = c.lambda_bar;
    j["lambda_tolerance"] = c.lambda_tolerance;
    j["degree"] = c.degree;
    j["m"] = c.m;
    j["N"] = c.N;
    if (c.mode == "csis") {
        j["epsilon"] = c.epsilon;
        j["grid_counts"] = c.grid_counts;
    }
    j["lambda_star"] = c.lambda_star;
    j["coefficients"] = vector_to_json(c.coefficients);
    j["P_hat"] = {{"value", c.volume.p_hat},
                  {"standard_error", c.volume.standard_error},
                  {"samples", c.volume.samples},
                  {"seed", c.volume.seed}};
    if (auto b = c.bound()) j["bound"] = *b;
    else j["bound"] = nullptr;
    if (auto b = c.conservative_bound()) j["conservative_bound"] = *b;
    else j["conservative_bound"] = nullptr;
    j["master_seed"] = c.master_seed;
    j["seeds"] = c.seeds;
    j["config_hash"] = c.config_hash;
    if (include_timings) j["timings"] = c.timings;
    return j;
}

PacCertificate certificate_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "pcsis-certificate/1") throw ParseError("certificate: unknown format");
        PacCertificate c;
        const auto& sys = j.at("system");
        if (sys.contains("builtin")) c.system.builtin = sys.at("builtin").get<std::string>();
        else c.system.plugin_argv = sys.at("plugin").get<std::vector<std::string>>();
        c.system.dimension = sys.at("dimension").get<int>();
        c.system.safe_set = sys.at("safe_set");
        if (sys.contains("control_set")) c.system.control_set = sys.at("control_set");

        c.mode = j.at("mode").get<std::string>();
        c.alpha = j.at("alpha").get<double>();
        c.beta = j.at("beta").get<double>();
        c.gamma = j.at("gamma").get<double>();
        c.eps0 = j.at("eps0").get<double>();
        c.outside_constant = j.at("C").get<double>();
        c.coefficient_bound = j.at("U_a").get<double>();
        c.lambda_bar = j.at("lambda_bar").get<double>();
        c.lambda_tolerance = j.at("lambda_tolerance").get<double>();
        c.degree = j.at("degree").get<int>();
        c.m = j.at("m").get<std::uint64_t>();
        c.N = j.at("N").get<std::uint64_t>();
        if (c.mode == "csis") {
            c.epsilon = j.at("epsilon").get<double>();
            c.grid_counts = j.at("grid_counts").get<std::vector<int>>();
        }
        c.lambda_star = j.at("lambda_star").get<double>();
        c.coefficients = vector_from_json(j.at("coefficients"));
        const auto& p = j.at("P_hat");
        c.volume.p_hat = p.at("value").get<double>();
        c.volume.standard_error = p.at("standard_error").get<double>();
        c.volume.samples = p.at("samples").get<std::size_t>();
        c.volume.seed = p.at("seed").get<std::uint64_t>();
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
        c.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
        c.config_hash = j.at("config_hash").get<std::uint64_t>();
        if (j.contains("timings")) c.timings = j.at("timings").get<std::map<std::string, double>>();

        c = assemble_certificate(std::move(c));
        safe_set_from_json(c.system.safe_set);

        const std::string status = j.at("status").get<std::string>();
        if (status != (c.valid() ? "VALID" : "VOID"))
            throw ParseError("certificate: status '" + status + "' contradicts lambda* and P_hat");
        const auto bound = c.bound();
        if (j.at("bound").is_null() == bound.has_value())
            throw ParseError("certificate: bound presence contradicts the status");
        if (bound && std::abs(j.at("bound").get<double>() - *bound) > 1e-12)
            throw ParseError("certificate: bound is inconsistent with alpha and P_hat");
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    } catch (const UsageError& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    } catch (const ConfigurationError& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    }
}

void write_certificate(std::ostream& os, const PacCertificate& cert) { os << to_json(cert).dump(2) << '\n'; }

PacCertificate read_certificate(std::istream& is) {
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    }
    return certificate_from_json(j);
}

}  // namespace pcsis
