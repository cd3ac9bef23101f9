#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcsis/config.hpp"

namespace pcsis {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitLearningFailed = 2,
    kExitSolverFailure = 3,
    kExitCheckFailed = 4,
};

struct SynthesizeOptions {
    bool dump_lp = false;       // writes scenario.lp
    bool export_samples = false;  // writes scenario_samples.csv
};

/// Writes certificate.json, coefficients.txt and run.log into config.outdir.
int cmd_synthesize(const RunConfig& config, const SynthesizeOptions& options, std::ostream& out, std::ostream& err);

struct CertifyOptions {
    std::string certificate_path;
    std::uint64_t samples = 100000;
    std::optional<std::uint64_t> seed;  // default: validation stream of the certificate's master seed
};

/// Empirical one-step invariance against the claimed bound; exit 4 when the
/// fraction falls below bound - 3 sigma or the certificate is void.
int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err);

struct GridExportOptions {
    std::string certificate_path;
    int resolution = 200;
    int dim_x = 0;
    int dim_y = 1;
    std::vector<double> fixed;  // values of the remaining coordinates, in order
};

/// CSV with header x,y,h,inside over the enclosing box of the two chosen
/// coordinates, resolution x resolution rows.
int cmd_grid_export(const GridExportOptions& options, std::ostream& csv, std::ostream& err);

/// One row of the parameters-and-results table with the reported values.
struct TableRow {
    std::string id;
    RunConfig config;
    std::uint64_t reported_N = 0;
    int reported_M = 0;  // 0 for uncontrolled rows
    std::optional<double> reported_time;
    double reported_p_hat = 0.0;
    double reported_bound = 0.0;
};

const std::vector<TableRow>& table_rows();

struct ReproduceOptions {
    std::vector<std::string> rows;  // empty: all
    bool counts_only = false;       // N, M and m only, no synthesis
    std::uint64_t seed = 0;
};

int cmd_reproduce_table(const ReproduceOptions& options, std::ostream& csv, std::ostream& err);

}  // namespace pcsis
