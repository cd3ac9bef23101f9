#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcsis/certify.hpp"
#include "pcsis/commands.hpp"
#include "pcsis/error.hpp"
#include "pcsis/rng.hpp"

using namespace pcsis;

namespace {

struct ConfigFlag {
    const char* flag;
    const char* key;
    const char* help;
};

const ConfigFlag kConfigFlags[] = {
    {"--system", "system", "built-in system name"},
    {"--plugin", "plugin", "adapter command line (space separated)"},
    {"--plugin-dimension", "plugin_dimension", "state dimension of the plugin"},
    {"--plugin-safe-lower", "plugin_safe_lower", "plugin safe box lower corner, comma separated"},
    {"--plugin-safe-upper", "plugin_safe_upper", "plugin safe box upper corner"},
    {"--plugin-control-lower", "plugin_control_lower", "plugin control box lower corner"},
    {"--plugin-control-upper", "plugin_control_upper", "plugin control box upper corner"},
    {"--mode", "mode", "sis or csis"},
    {"--alpha", "alpha", "violation level in (0,1)"},
    {"--beta", "beta", "confidence parameter (default 1e-20)"},
    {"--degree", "degree", "barrier polynomial degree"},
    {"--gamma", "gamma", "decay factor in (0,1) (default 0.9999)"},
    {"--epsilon", "epsilon", "exploration rate (default 0.5)"},
    {"--eps0", "eps0", "barrier value required at x0 (default 1e-6)"},
    {"--C", "C", "barrier value outside the safe set (default -1)"},
    {"--U-a", "U_a", "coefficient bound (default 1000)"},
    {"--n-prime", "N_prime", "surrogate set size (default 1000)"},
    {"--K", "K", "slack iterations (default 5)"},
    {"--K-prime", "K_prime", "total iterations (default 10)"},
    {"--eps-prime", "eps_prime", "surrogate objective tolerance (default 1e-6 N')"},
    {"--grid", "grid", "control grid counts, comma separated"},
    {"--x0", "x0", "anchor state, comma separated (default origin)"},
    {"--volume-samples", "volume_samples", "Monte-Carlo volume samples (default 1e6)"},
    {"--seed", "seed", "master seed (default 0)"},
    {"--outdir", "outdir", "artifact directory (default .)"},
};

std::vector<double> parse_doubles(const std::string& text) {
    RunConfig scratch;
    scratch.set("x0", text);
    return scratch.x0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAC safety invariant sets for black-box discrete-time systems"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synthesize", "synthesize a barrier and write a PAC certificate");
    std::string config_path;
    std::map<std::string, std::string> overrides;
    SynthesizeOptions synth_opts;
    synth->add_option("--config", config_path, "key = value configuration file");
    for (const auto& f : kConfigFlags)
        synth->add_option_function<std::string>(f.flag, [&overrides, key = f.key](const std::string& v) {
            overrides[key] = v;
        }, f.help);
    synth->add_flag("--dump-lp", synth_opts.dump_lp, "write the scenario LP in LP format");
    synth->add_flag("--export-samples", synth_opts.export_samples, "write the scenario samples as CSV");

    auto* cert = app.add_subcommand("certify", "check a certificate by empirical one-step invariance");
    CertifyOptions cert_opts;
    std::optional<std::uint64_t> cert_seed;
    cert->add_option("certificate", cert_opts.certificate_path, "certificate.json")->required();
    cert->add_option("--samples", cert_opts.samples, "evaluation samples (default 1e5)");
    cert->add_option("--seed", cert_seed, "evaluation seed");

    auto* grid = app.add_subcommand("grid-export", "export h over a 2D grid as CSV");
    GridExportOptions grid_opts;
    std::string grid_out, fix_text;
    std::vector<int> dims;
    grid->add_option("certificate", grid_opts.certificate_path, "certificate.json")->required();
    grid->add_option("--resolution", grid_opts.resolution, "points per axis (default 200)");
    grid->add_option("--dims", dims, "two coordinate indices (0-based)")->expected(2);
    grid->add_option("--fix", fix_text, "values of the remaining coordinates, comma separated");
    grid->add_option("--out", grid_out, "output file (default stdout)");

    auto* table = app.add_subcommand("reproduce-table", "rerun rows of the parameters-and-results table");
    ReproduceOptions table_opts;
    std::string table_out;
    table->add_option("rows", table_opts.rows, "row ids (default all)");
    table->add_flag("--counts-only", table_opts.counts_only, "report N and M without synthesis");
    table->add_option("--seed", table_opts.seed, "master seed");
    table->add_option("--out", table_out, "output file (default stdout)");

    auto* surv = app.add_subcommand("survival", "Monte-Carlo maximal invariant set labels as CSV");
    std::string surv_system, surv_out;
    int horizon = 500;
    std::size_t surv_samples = 100000;
    std::uint64_t surv_seed = 0;
    surv->add_option("--system", surv_system, "built-in uncontrolled system")->required();
    surv->add_option("--horizon", horizon, "steps (default 500)");
    surv->add_option("--samples", surv_samples, "samples (default 1e5)");
    surv->add_option("--seed", surv_seed, "master seed");
    surv->add_option("--out", surv_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    auto with_output = [](const std::string& path, auto&& run) -> int {
        if (path.empty()) return run(std::cout);
        std::ofstream os(path);
        if (!os) {
            std::cerr << "cannot write " << path << '\n';
            return kExitUsage;
        }
        return run(os);
    };

    try {
        if (*synth) {
            RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
            for (const auto& [key, value] : overrides) config.set(key, value);
            if (config.alpha == 0.0 || config.degree < 0) {
                std::cerr << "synthesize: --alpha and --degree are required\n";
                return kExitUsage;
            }
            return cmd_synthesize(config, synth_opts, std::cout, std::cerr);
        }
        if (*cert) {
            cert_opts.seed = cert_seed;
            return cmd_certify(cert_opts, std::cout, std::cerr);
        }
        if (*grid) {
            if (!dims.empty()) {
                grid_opts.dim_x = dims[0];
                grid_opts.dim_y = dims[1];
            }
            if (!fix_text.empty()) grid_opts.fixed = parse_doubles(fix_text);
            return with_output(grid_out, [&](std::ostream& os) { return cmd_grid_export(grid_opts, os, std::cerr); });
        }
        if (*table)
            return with_output(table_out,
                               [&](std::ostream& os) { return cmd_reproduce_table(table_opts, os, std::cerr); });
        if (*surv) {
            const SystemModel system = builtin(surv_system);
            const SurvivalResult r =
                mc_maximal_sis(system, horizon, surv_samples, derive_seed(surv_seed, StreamLabel::Survival));
            std::cerr << "survival fraction " << r.fraction << '\n';
            return with_output(surv_out, [&](std::ostream& os) {
                write_survival_csv(os, r);
                return static_cast<int>(kExitOk);
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
