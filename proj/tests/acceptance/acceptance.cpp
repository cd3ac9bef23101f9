// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "pcsis/certify.hpp"
#include "pcsis/pipeline.hpp"
#include "pcsis/rng.hpp"
#include "pcsis/weight_learn.hpp"

using namespace pcsis;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const SolverBackend& backend() {
    static const auto b = make_default_backend();
    return *b;
}

RunConfig vanderpol(double alpha) {
    RunConfig c;
    c.system = "vanderpol";
    c.mode = "sis";
    c.alpha = alpha;
    c.degree = 12;
    c.gamma = 0.9999;
    return c;
}

// Criterion 2 certificate, shared with criterion 3.
const SynthesisResult& vanderpol_03() {
    static const SynthesisResult r = synthesize(vanderpol(0.3), backend());
    return r;
}

Outcome sample_counts() {
    struct Case {
        double alpha;
        std::uint64_t m, want;
    };
    const Case cases[] = {{0.3, 91, 921},   {0.1, 91, 2762},   {0.05, 91, 5523},
                          {0.01, 91, 27611}, {0.01, 21, 13611}, {0.01, basis_size(12, 2), 27611}};
    std::string detail;
    bool pass = true;
    for (const auto& c : cases) {
        const std::uint64_t got = required_sample_count(c.alpha, 1e-20, c.m);
        detail += (detail.empty() ? "" : " ") + std::to_string(got);
        pass = pass && got == c.want;
    }
    return {pass, "N = " + detail};
}

Outcome vanderpol_synthesis() {
    const auto t0 = std::chrono::steady_clock::now();
    const SynthesisResult& r = vanderpol_03();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.certificate) return {false, "no certificate"};
    const PacCertificate& c = *r.certificate;
    const bool pass = c.lambda_star <= 1e-8 && c.valid() && c.volume.p_hat >= 0.35 && c.volume.p_hat <= 0.80;
    return {pass, "lambda* " + fmt("%.3g", c.lambda_star) + ", P_hat " + fmt("%.4f", c.volume.p_hat) + ", " +
                      fmt("%.1f", secs) + " s"};
}

Outcome pac_claim() {
    const SynthesisResult& r = vanderpol_03();
    if (!r.certificate || !r.certificate->valid()) return {false, "criterion 2 certificate missing or void"};
    const PacCertificate& c = *r.certificate;
    const SystemModel sys = instantiate(c.system);
    const InvarianceReport rep = empirical_invariance(c.barrier(), c.coefficients, sys, nullptr, 100000,
                                                      derive_seed(c.master_seed, StreamLabel::Validation));
    const double threshold = *c.bound() - 3.0 * rep.standard_error;
    return {rep.kept > 0 && rep.fraction >= threshold,
            "fraction " + fmt("%.5f", rep.fraction) + " >= " + fmt("%.5f", threshold)};
}

Outcome controlled_pipeline() {
    RunConfig c;
    c.system = "ex3-controlled";
    c.mode = "csis";
    c.alpha = 0.05;
    c.degree = 5;
    c.epsilon = 0.5;
    const SynthesisResult r = synthesize(c, backend());
    if (!r.trace || !r.certificate) return {false, "status " + to_string(r.status)};
    const IterationTrace& t = *r.trace;
    const std::size_t M = r.certificate->grid_counts.empty()
                              ? 0
                              : static_cast<std::size_t>(r.certificate->grid_counts[0] * r.certificate->grid_counts[1]);
    const bool pass = t.reason != Termination::LambdaNotReached && t.lambda_iterations <= 5 &&
                      t.lambdas.back() <= kLambdaTolerance && M == 9 && r.certificate->valid();
    return {pass, "N " + std::to_string(r.certificate->N) + ", M " + std::to_string(M) + ", phase-1 iterations " +
                      std::to_string(t.lambda_iterations) + ", status " + to_string(r.status)};
}

Outcome lambda_monotonicity() {
    const SystemModel ex3 = builtin("ex3-controlled");
    const BarrierTemplate tmpl(MonomialBasis(2, 5), -1.0, ex3.safe_set());
    const std::uint64_t n = required_sample_count(0.05, 1e-20, tmpl.size());
    const std::vector<int> counts = {3, 3};
    const ControlGrid grid = control_grid(ex3.control_set(), counts);
    LearningConfig cfg;
    cfg.lp = ScenarioLpParams::defaults(tmpl, 0.9999, 1e-6, StateVector::Zero(2), 1e3);
    cfg.epsilon = 0.5;
    cfg.max_iterations = 0;
    int violations = 0, pairs = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SampleSet xs = sample_uniform(ex3.safe_set(), n, derive_seed(seed, StreamLabel::Training),
                                            SampleKind::Training);
        const TrainingDataset data = build_training_dataset(ex3, xs, grid);
        const SampleSet sur = surrogate_grid(ex3.safe_set(), 1000, derive_seed(seed, StreamLabel::Surrogate));
        const LearningResult r = learn_weights(tmpl, data, sur, cfg, backend());
        for (std::size_t k = 1; k < r.trace.lambdas.size(); ++k, ++pairs)
            if (r.trace.lambdas[k] > r.trace.lambdas[k - 1] + 1e-7) ++violations;
    }
    return {violations == 0,
            std::to_string(violations) + " violations over " + std::to_string(pairs) + " consecutive pairs"};
}

Outcome row_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const oracle::TinyInstance inst = oracle::random_instance(rng);
        const BarrierTemplate tmpl(
            MonomialBasis(inst.n, inst.d), -1.0,
            SafeSet::box(Eigen::VectorXd::Constant(inst.n, -1.0), Eigen::VectorXd::Constant(inst.n, 1.0)));
        const auto p = ScenarioLpParams::defaults(tmpl, inst.gamma, 1e-6, StateVector::Zero(inst.n), 10.0);
        const LinearProgram lp = build_csis_lambda_lp(tmpl, inst.data, inst.weights, p);
        const auto m = static_cast<Eigen::Index>(tmpl.size());
        Eigen::VectorXd z(m + 1);
        for (auto& v : z) v = u(rng);
        const Eigen::VectorXd a = z.head(m);
        for (std::size_t i = 0; i < inst.data.state_count(); ++i) {
            double direct = -inst.gamma * eval_h(tmpl, a, inst.data.states[i]) + z[m];
            for (std::size_t j = 0; j < inst.data.control_count(); ++j)
                direct += inst.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                          eval_h(tmpl, a, inst.data.successor(i, j));
            worst = std::max(worst, std::abs(oracle::row_slack(lp, i + 1, z) - direct));
        }
    }
    return {worst <= 1e-10, "max deviation " + fmt("%.3g", worst)};
}

Outcome dominance_fuzz() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-10.0, 10.0), unit(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 12);
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> v(static_cast<std::size_t>(size(rng)));
        for (auto& x : v) x = val(rng);
        std::vector<double> w;
        if (t % 2 == 0) {
            w = compute_weights(unit(rng), v);
        } else {
            double s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) s += w.emplace_back(-std::log(1.0 - unit(rng)));
            for (auto& x : w) x /= s;
        }
        double avg = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) avg += w[j] * v[j];
        if (avg > *std::max_element(v.begin(), v.end()) + 1e-12) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations in 10000 draws"};
}

Outcome volume_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemModel vdp = builtin("vanderpol");
    const BarrierTemplate tmpl(MonomialBasis(2, 2), -1.0, vdp.safe_set());
    Eigen::VectorXd a(6);
    a << 1.05, 0.0, 0.0, -1.0, 0.0, -1.0;
    const VolumeEstimate v = mc_volume(tmpl, a, 1000000, derive_seed(0, StreamLabel::Volume));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double want = 1.05 / 1.1;
    const double z = std::abs(v.p_hat - want) / v.standard_error;
    return {z <= 3.0 && secs < 10.0, "P_hat " + fmt("%.5f", v.p_hat) + " vs " + fmt("%.5f", want) + " (" +
                                         fmt("%.2f", z) + " se), " + fmt("%.1f", secs) + " s"};
}

Outcome maximal_sis() {
    const auto t0 = std::chrono::steady_clock::now();
    const SurvivalResult r = mc_maximal_sis(builtin("vanderpol"), 500, 100000, derive_seed(0, StreamLabel::Survival));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::abs(r.fraction - 0.5906) <= 0.02 && secs < 60.0,
            "survival " + fmt("%.4f", r.fraction) + " vs 0.5906, " + fmt("%.1f", secs) + " s"};
}

Outcome subset_sanity() {
    const SynthesisResult r = synthesize(vanderpol(0.01), backend());
    if (!r.certificate || !r.certificate->valid()) return {false, "alpha = 0.01 certificate is not VALID"};
    const PacCertificate& c = *r.certificate;
    const SystemModel sys = instantiate(c.system);
    const BarrierTemplate tmpl = c.barrier();
    const std::uint64_t seed = derive_seed(c.master_seed, StreamLabel::Survival);
    std::vector<StateVector> kept;
    for (std::size_t batch = 0; kept.size() < 10000; ++batch) {
        const SampleSet s = sample_uniform(sys.safe_set(), 20000, seed + batch, SampleKind::Validation);
        for (const auto& x : s.states)
            if (kept.size() < 10000 && tmpl.h(c.coefficients, x) >= 0.0) kept.push_back(x);
    }
    std::size_t survived = 0;
    for (const auto& x0 : kept) {
        StateVector x = x0;
        bool ok = true;
        for (int t = 0; t < 500 && ok; ++t) {
            x = sys.step(x);
            ok = sys.safe_set().contains(x);
        }
        survived += ok ? 1 : 0;
    }
    const double frac = static_cast<double>(survived) / static_cast<double>(kept.size());
    return {frac >= 0.95, "survival of h >= 0 states " + fmt("%.4f", frac)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"sample-size exactness", sample_counts},
        {"vanderpol synthesis", vanderpol_synthesis},
        {"PAC claim check", pac_claim},
        {"controlled pipeline", controlled_pipeline},
        {"lambda monotonicity", lambda_monotonicity},
        {"LP-row oracle equivalence", row_oracle},
        {"weighted-average dominance", dominance_fuzz},
        {"volume estimator oracle", volume_oracle},
        {"maximal SIS baseline", maximal_sis},
        {"subset sanity", subset_sanity},
    };
    int failures = 0, index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %2d %s: %s (%s)\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
