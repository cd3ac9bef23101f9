#include "pcsis/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "pcsis/error.hpp"
#include "pcsis/parallel.hpp"
#include "pcsis/rng.hpp"

namespace pcsis {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class StageClock {
public:
    StageClock(std::map<std::string, double>& timings, std::string* stage_out)
        : timings_(timings), stage_out_(stage_out) {}

    void begin(const std::string& name) {
        name_ = name;
        start_ = Clock::now();
        if (stage_out_) *stage_out_ = name;
    }
    void end() { timings_[name_] += std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    std::map<std::string, double>& timings_;
    std::string* stage_out_;
    std::string name_;
    Clock::time_point start_;
};

std::vector<StateVector> simulate(const SystemModel& system, const SampleSet& samples) {
    std::vector<StateVector> successors(samples.size());
    parallel_for(samples.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                successors[i] = system.step(samples.states[i]);
            } catch (const SimulationError& e) {
                throw SimulationError("scenario sample i=" + std::to_string(i) + ": " + e.what());
            }
        }
    });
    return successors;
}

LpSolution solve_required(const SolverBackend& backend, const LinearProgram& lp, const char* what) {
    LpSolution sol = solve(backend, lp);
    if (sol.status != LpStatus::Optimal)
        throw SolverError(std::string(what) + ": " + to_string(sol.status) + " (" + sol.diagnostics + ")");
    return sol;
}

}  // namespace

std::string to_string(SynthesisStatus status) {
    switch (status) {
        case SynthesisStatus::Valid: return "VALID";
        case SynthesisStatus::Void: return "VOID";
        case SynthesisStatus::LearningFailed: return "LEARNING-FAILED";
    }
    return "unknown";
}

SystemDescriptor describe_system(const RunConfig& config) {
    if (!config.system.empty()) return describe_builtin(config.system);
    SystemDescriptor d;
    d.plugin_argv = config.plugin;
    d.dimension = config.plugin_dimension;
    d.safe_set = safe_set_to_json(SafeSet::box(to_eigen(config.plugin_safe_lower), to_eigen(config.plugin_safe_upper)));
    if (!config.plugin_control_lower.empty())
        d.control_set = control_set_to_json(
            ControlSet(to_eigen(config.plugin_control_lower), to_eigen(config.plugin_control_upper)));
    return d;
}

SynthesisResult synthesize(const RunConfig& config, const SolverBackend& backend, const SynthesisOptions& options) {
    config.validate();
    SynthesisResult result;
    PacCertificate cert;
    StageClock clock(cert.timings, options.stage);
    const auto t_total = Clock::now();
    std::ostringstream log;

    clock.begin("setup");
    cert.system = describe_system(config);
    const SystemModel system = instantiate(cert.system);
    const bool controlled_mode = config.mode == "csis";
    if (controlled_mode != system.controlled())
        throw UsageError("mode " + config.mode + " does not match system " + system.name() +
                         (system.controlled() ? " (it has controls; use csis)" : " (it has no controls; use sis)"));

    const int n = system.dimension();
    const BarrierTemplate tmpl(MonomialBasis(n, config.degree), config.outside_constant, system.safe_set());
    StateVector x0 = config.x0.empty() ? StateVector(StateVector::Zero(n)) : to_eigen(config.x0);
    if (x0.size() != n) throw UsageError("x0 must have " + std::to_string(n) + " entries");
    const ScenarioLpParams params =
        ScenarioLpParams::defaults(tmpl, config.gamma, config.eps0, x0, config.coefficient_bound);

    cert.mode = config.mode;
    cert.alpha = config.alpha;
    cert.beta = config.beta;
    cert.gamma = config.gamma;
    cert.eps0 = config.eps0;
    cert.outside_constant = config.outside_constant;
    cert.coefficient_bound = config.coefficient_bound;
    cert.lambda_bar = params.lambda_bar;
    cert.lambda_tolerance = kLambdaTolerance;
    cert.degree = config.degree;
    cert.m = basis_size(n, config.degree);
    cert.N = required_sample_count(config.alpha, config.beta, cert.m);
    cert.master_seed = config.seed;
    cert.config_hash = config.hash();
    for (auto label : {StreamLabel::Scenario, StreamLabel::Training, StreamLabel::Surrogate, StreamLabel::Volume})
        cert.seeds[std::string(to_string(label))] = derive_seed(config.seed, label);

    log << "# master_seed " << config.seed << "\n# config_hash " << std::hex << cert.config_hash << std::dec << '\n'
        << config.serialize() << "system " << system.name() << " n=" << n << "\nm " << cert.m << "\nN " << cert.N
        << '\n';

    const SampleSet surrogate = surrogate_grid(system.safe_set(), config.surrogate_count, cert.seeds["surrogate"]);
    clock.end();

    std::optional<WeightPolicy> policy;
    if (controlled_mode) {
        cert.epsilon = config.epsilon;
        cert.grid_counts = config.grid_counts.empty() ? default_grid_counts(system.control_dimension())
                                                      : config.grid_counts;
        if (static_cast<int>(cert.grid_counts.size()) != system.control_dimension())
            throw UsageError("grid needs one count per control dimension");
        const ControlGrid grid = control_grid(system.control_set(), cert.grid_counts);
        log << "M " << grid.size() << '\n';

        clock.begin("training");
        const SampleSet training =
            sample_uniform(system.safe_set(), cert.N, cert.seeds["training"], SampleKind::Training);
        const TrainingDataset data = build_training_dataset(system, training, grid);
        clock.end();

        clock.begin("learning");
        LearningConfig lc;
        lc.lp = params;
        lc.epsilon = config.epsilon;
        lc.max_lambda_iterations = config.max_lambda_iterations;
        lc.max_iterations = config.max_iterations;
        lc.objective_tolerance = config.effective_objective_tolerance();
        LearningResult learned = learn_weights(tmpl, data, surrogate, lc, backend);
        clock.end();
        log << learned.trace.to_log();
        result.trace = learned.trace;
        if (!learned.ok()) {
            result.status = SynthesisStatus::LearningFailed;
            log << "learning failed: lambda* = " << fmt(learned.trace.lambdas.back()) << " after K = "
                << config.max_lambda_iterations << " iterations\n";
            result.log = log.str();
            return result;
        }
        policy = learned.policy;
    }

    clock.begin("scenario");
    result.scenario = sample_uniform(system.safe_set(), cert.N, cert.seeds["scenario"], SampleKind::Scenario);
    std::optional<TrainingDataset> fresh;
    std::optional<WeightMatrix> weights;
    std::vector<StateVector> successors;
    if (controlled_mode) {
        fresh = build_training_dataset(system, result.scenario, policy->grid);
        weights = policy_weights(*policy, *fresh);
    } else {
        successors = simulate(system, result.scenario);
    }
    clock.end();

    clock.begin("feasibility_lp");
    LinearProgram feas = controlled_mode ? build_csis_lambda_lp(tmpl, *fresh, *weights, params)
                                         : build_sis_feasibility_lp(tmpl, result.scenario.states, successors, params);
    const LpSolution feas_sol = solve_required(backend, feas, "scenario LP");
    const auto m = static_cast<Eigen::Index>(tmpl.size());
    cert.lambda_star = feas_sol.values[m];
    cert.coefficients = feas_sol.values.head(m);
    clock.end();
    log << "lambda* " << fmt(cert.lambda_star) << '\n';
    if (options.keep_final_lp) result.final_lp = std::move(feas);

    if (cert.lambda_star <= kLambdaTolerance) {
        clock.begin("tiebreak_lp");
        const LinearProgram tie = controlled_mode
                                      ? build_csis_tiebreak_lp(tmpl, *fresh, *weights, surrogate, params)
                                      : build_sis_tiebreak_lp(tmpl, result.scenario.states, successors, surrogate, params);
        const LpSolution tie_sol = solve(backend, tie);
        if (tie_sol.status == LpStatus::Optimal) {
            cert.coefficients = tie_sol.values;
            log << "tie-break objective " << fmt(tie.objective_value(tie_sol.values)) << '\n';
        } else {
            log << "tie-break LP " << to_string(tie_sol.status) << " (" << tie_sol.diagnostics
                << "); keeping the min-lambda solution\n";
        }
        clock.end();
    }

    clock.begin("volume");
    cert.volume = mc_volume(tmpl, cert.coefficients, config.volume_samples, cert.seeds["volume"]);
    clock.end();
    cert.timings["total"] = std::chrono::duration<double>(Clock::now() - t_total).count();

    result.certificate = assemble_certificate(std::move(cert));
    const PacCertificate& c = *result.certificate;
    result.status = c.valid() ? SynthesisStatus::Valid : SynthesisStatus::Void;
    log << "P_hat " << fmt(c.volume.p_hat) << " (se " << fmt(c.volume.standard_error) << ")\n";
    if (auto b = c.bound()) log << "bound " << fmt(*b) << '\n';
    log << "status " << to_string(result.status) << '\n';
    for (const auto& [stage, seconds] : c.timings) log << "time " << stage << ' ' << seconds << '\n';
    result.log = log.str();
    return result;
}

}  // namespace pcsis
