#include "pcsis/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "pcsis/error.hpp"
#include "pcsis/pipeline.hpp"
#include "pcsis/rng.hpp"

namespace pcsis {

namespace {

namespace fs = std::filesystem;

template <typename Fn>
int guarded(std::ostream& err, const std::string* stage, Fn&& fn) {
    const auto where = [&] { return stage && !stage->empty() ? " in stage " + *stage : std::string(); };
    try {
        return fn();
    } catch (const LearningFailure& e) {
        err << "learning failed" << where() << ": " << e.what() << '\n';
        return kExitLearningFailed;
    } catch (const SolverError& e) {
        err << "solver failure" << where() << ": " << e.what() << '\n';
        return kExitSolverFailure;
    } catch (const CertificateError& e) {
        err << "certificate rejected: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error" << where() << ": " << e.what() << '\n';
        return kExitUsage;
    }
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path.string());
    return os;
}

PacCertificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open certificate " + path);
    return read_certificate(in);
}

RunConfig table_config(const std::string& system, const std::string& mode, double alpha, int degree,
                       double gamma = 0.9999, double epsilon = 0.5) {
    RunConfig c;
    c.system = system;
    c.mode = mode;
    c.alpha = alpha;
    c.degree = degree;
    c.gamma = gamma;
    c.epsilon = epsilon;
    return c;
}

}  // namespace

int cmd_synthesize(const RunConfig& config, const SynthesizeOptions& options, std::ostream& out, std::ostream& err) {
    std::string stage;
    return guarded(err, &stage, [&] {
        const auto backend = make_default_backend();
        SynthesisOptions so;
        so.keep_final_lp = options.dump_lp;
        so.stage = &stage;
        const SynthesisResult r = synthesize(config, *backend, so);

        stage = "write";
        const fs::path dir(config.outdir);
        fs::create_directories(dir);
        open_out(dir / "run.log") << r.log;
        if (r.status == SynthesisStatus::LearningFailed) {
            err << "weight learning did not reach lambda* = 0 within K = " << config.max_lambda_iterations
                << " iterations; see " << (dir / "run.log").string() << '\n';
            return static_cast<int>(kExitLearningFailed);
        }
        const PacCertificate& c = *r.certificate;
        open_out(dir / "certificate.json") << to_json(c).dump(2) << '\n';
        CoefficientFile cf{static_cast<int>(c.system.dimension), c.degree, c.outside_constant, c.gamma,
                           c.coefficients, c.master_seed, c.config_hash};
        auto coef_os = open_out(dir / "coefficients.txt");
        write_coefficients(coef_os, cf);
        if (options.dump_lp && r.final_lp) {
            auto lp_os = open_out(dir / "scenario.lp");
            lp_os << "\\ master_seed " << c.master_seed << "\n\\ config_hash " << std::hex << c.config_hash
                  << std::dec << '\n';
            write_lp_format(lp_os, *r.final_lp);
        }
        if (options.export_samples) {
            auto s_os = open_out(dir / "scenario_samples.csv");
            write_samples_csv(s_os, r.scenario);
        }

        out << "status " << to_string(r.status) << "\nm " << c.m << "\nN " << c.N << "\nlambda* "
            << fmt(c.lambda_star, "%.6g") << "\nP_hat " << fmt(c.volume.p_hat, "%.6f") << '\n';
        if (auto b = c.bound()) out << "bound " << fmt(*b, "%.6f") << '\n';
        if (auto b = c.conservative_bound()) out << "conservative_bound " << fmt(*b, "%.6f") << '\n';
        out << "artifacts " << dir.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, nullptr, [&] {
        const PacCertificate c = load_certificate(options.certificate_path);
        if (!c.valid())
            throw CertificateError("certificate is VOID (lambda* = " + fmt(c.lambda_star, "%.6g") +
                                   ", P_hat = " + fmt(c.volume.p_hat, "%.6g") + "), so it makes no claim to check");
        const SystemModel system = instantiate(c.system);
        const BarrierTemplate tmpl = c.barrier();
        const auto policy = c.policy(system);
        const std::uint64_t seed = options.seed ? *options.seed : derive_seed(c.master_seed, StreamLabel::Validation);
        const InvarianceReport report = empirical_invariance(tmpl, c.coefficients, system,
                                                             policy ? &*policy : nullptr, options.samples, seed);
        const double bound = *c.bound();
        const double threshold = bound - 3.0 * report.standard_error;
        out << "kept " << report.kept << " of " << options.samples << "\nfraction " << fmt(report.fraction, "%.6f")
            << "\nstandard_error " << fmt(report.standard_error, "%.3g") << "\nbound " << fmt(bound, "%.6f")
            << "\nthreshold " << fmt(threshold, "%.6f") << '\n';
        if (report.warning) err << "warning: " << *report.warning << '\n';
        if (report.kept == 0 || report.fraction < threshold) {
            out << "result FAIL\n";
            return static_cast<int>(kExitCheckFailed);
        }
        out << "result PASS\n";
        return static_cast<int>(kExitOk);
    });
}

int cmd_grid_export(const GridExportOptions& options, std::ostream& csv, std::ostream& err) {
    return guarded(err, nullptr, [&] {
        const PacCertificate c = load_certificate(options.certificate_path);
        const BarrierTemplate tmpl = c.barrier();
        const int n = c.system.dimension;
        if (options.resolution < 2) throw UsageError("resolution must be >= 2");
        if (options.dim_x < 0 || options.dim_x >= n || options.dim_y < 0 || options.dim_y >= n ||
            options.dim_x == options.dim_y)
            throw UsageError("slice needs two distinct coordinates in [0, " + std::to_string(n) + ")");
        if (static_cast<int>(options.fixed.size()) != n - 2)
            throw UsageError("slice needs " + std::to_string(n - 2) + " fixed values for the remaining coordinates");

        StateVector x(n);
        for (int k = 0, f = 0; k < n; ++k)
            if (k != options.dim_x && k != options.dim_y) x[k] = options.fixed[static_cast<std::size_t>(f++)];
        const Bounds& box = tmpl.safe_set().enclosing_box();
        const int r = options.resolution;
        csv << "x,y,h,inside\n";
        for (int i = 0; i < r; ++i) {
            x[options.dim_x] = box.lower[options.dim_x] +
                               (box.upper[options.dim_x] - box.lower[options.dim_x]) * i / (r - 1);
            for (int j = 0; j < r; ++j) {
                x[options.dim_y] = box.lower[options.dim_y] +
                                   (box.upper[options.dim_y] - box.lower[options.dim_y]) * j / (r - 1);
                csv << fmt(x[options.dim_x]) << ',' << fmt(x[options.dim_y]) << ',' << fmt(tmpl.h(c.coefficients, x))
                    << ',' << (tmpl.safe_set().contains(x) ? 1 : 0) << '\n';
            }
        }
        return static_cast<int>(kExitOk);
    });
}

const std::vector<TableRow>& table_rows() {
    static const std::vector<TableRow> rows = [] {
        std::vector<TableRow> v;
        v.push_back({"ex1-0.3", table_config("vanderpol", "sis", 0.3, 12), 921, 0, 0.52, 0.6646, 0.5486});
        v.push_back({"ex1-0.1", table_config("vanderpol", "sis", 0.1, 12), 2762, 0, 0.76, 0.6231, 0.8395});
        v.push_back({"ex1-0.05", table_config("vanderpol", "sis", 0.05, 12), 5523, 0, 1.16, 0.5629, 0.9112});
        v.push_back({"ex1-0.01", table_config("vanderpol", "sis", 0.01, 12), 27611, 0, 2.91, 0.5352, 0.9813});
        const double eps[] = {0.7, 0.5, 0.3, 0.1, 0.0};
        const double times[] = {3.49, 3.42, 3.36, 3.54, 3.41};
        const double p_hat[] = {0.5984, 0.6927, 0.6529, 0.5746, 0.5526};
        const double bound[] = {0.9833, 0.9856, 0.9847, 0.9826, 0.9819};
        for (int k = 0; k < 5; ++k)
            v.push_back({"ex3-" + fmt(eps[k], "%.1f"), table_config("ex3-controlled", "csis", 0.01, 5, 0.9999, eps[k]),
                         13611, 9, times[k], p_hat[k], bound[k]});
        v.push_back({"ex4", table_config("lorenz12", "csis", 0.01, 2, 0.9999, 0.1), 27611, 8, 11.9, 0.7931, 0.9874});
        v.push_back({"c1", table_config("predator-prey", "sis", 0.005, 4, 0.9), 24821, 0, 0.71, 0.9793, 0.9949});
        v.push_back({"c2", table_config("ex-c2", "sis", 0.01, 12), 27611, 0, 2.14, 0.4262, 0.9765});
        v.push_back({"c4", table_config("ex-c4", "sis", 0.01, 4), 51411, 0, 18.7, 0.3783, 0.9736});
        return v;
    }();
    return rows;
}

int cmd_reproduce_table(const ReproduceOptions& options, std::ostream& csv, std::ostream& err) {
    return guarded(err, nullptr, [&] {
        std::vector<const TableRow*> selected;
        for (const auto& row : table_rows())
            if (options.rows.empty() || std::find(options.rows.begin(), options.rows.end(), row.id) != options.rows.end())
                selected.push_back(&row);
        for (const auto& id : options.rows) {
            bool known = false;
            for (const auto& row : table_rows()) known = known || row.id == id;
            if (!known) throw UsageError("unknown table row '" + id + "'");
        }

        const auto backend = make_default_backend();
        csv << "example,alpha,N,M,d,epsilon,time,P_hat,bound,status,reported_N,reported_M,reported_time,reported_P_hat,reported_bound\n";
        int failures = 0;
        for (const TableRow* row : selected) {
            RunConfig config = row->config;
            config.seed = options.seed;
            const SystemModel system = builtin(config.system);
            const std::uint64_t m = basis_size(system.dimension(), config.degree);
            const std::uint64_t n_samples = required_sample_count(config.alpha, config.beta, m);
            std::size_t controls = 1;
            if (system.controlled()) {
                for (int c : default_grid_counts(system.control_dimension())) controls *= static_cast<std::size_t>(c);
            }
            std::string time, p_hat, bound, status = "counts-only";
            if (!options.counts_only) {
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    const SynthesisResult r = synthesize(config, *backend);
                    time = fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), "%.2f");
                    status = to_string(r.status);
                    if (r.certificate) {
                        p_hat = fmt(r.certificate->volume.p_hat, "%.4f");
                        if (auto b = r.certificate->bound()) bound = fmt(*b, "%.4f");
                    }
                } catch (const std::exception& e) {
                    ++failures;
                    status = "error";
                    err << row->id << ": " << e.what() << '\n';
                }
            }
            const bool controlled = system.controlled();
            csv << row->id << ',' << fmt(config.alpha, "%g") << ',' << n_samples << ','
                << (controlled ? std::to_string(controls) : "-") << ',' << config.degree << ','
                << (controlled ? fmt(config.epsilon, "%.1f") : "-") << ',' << time << ',' << p_hat << ',' << bound
                << ',' << status << ',' << row->reported_N << ','
                << (row->reported_M ? std::to_string(row->reported_M) : "-") << ','
                << (row->reported_time ? fmt(*row->reported_time, "%g") : "") << ',' << fmt(row->reported_p_hat, "%.4f")
                << ',' << fmt(row->reported_bound, "%.4f") << '\n';
            csv.flush();
        }
        return failures == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitSolverFailure);
    });
}

}  // namespace pcsis
