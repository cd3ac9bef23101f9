#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcsis/commands.hpp"
#include "pcsis/error.hpp"
#include "pcsis/pipeline.hpp"
#include "pcsis/rng.hpp"

using namespace pcsis;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pcsis_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args) {
    const std::string cmd = std::string(PCSIS_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig vdp_config(const fs::path& out) {
    RunConfig c;
    c.system = "vanderpol";
    c.alpha = 0.3;
    c.degree = 12;
    c.volume_samples = 100000;
    c.seed = 11;
    c.outdir = out.string();
    return c;
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

PacCertificate lorenz_certificate() {
    PacCertificate c;
    c.mode = "csis";
    c.system = describe_builtin("lorenz12");
    c.alpha = 0.01;
    c.beta = 1e-20;
    c.gamma = 0.9999;
    c.eps0 = 1e-6;
    c.coefficient_bound = 1e3;
    c.lambda_bar = 1002.0;
    c.lambda_tolerance = 1e-8;
    c.degree = 1;
    c.m = 13;
    c.N = 100;
    c.epsilon = 0.1;
    c.grid_counts = {2, 2, 2};
    c.coefficients = Eigen::VectorXd::LinSpaced(13, 1.0, -0.2);
    c.volume = VolumeEstimate{0.5, 1000, 0.0158, 1};
    return assemble_certificate(c);
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config text round trip") {
        RunConfig c;
        c.system = "ex3-controlled";
        c.mode = "csis";
        c.alpha = 0.01;
        c.degree = 5;
        c.epsilon = 0.3;
        c.grid_counts = {3, 3};
        c.x0 = {0.1, -0.2};
        c.objective_tolerance = 1e-4;
        c.seed = 99;
        std::istringstream is(c.serialize() + "# trailing comment\n");
        const RunConfig d = parse_config(is);
        CHECK(d == c);
        CHECK(d.serialize() == c.serialize());
        CHECK_NOTHROW(d.validate());

        std::istringstream bad("alpha = 0.1\nfrobnicate = 3\n");
        CHECK_THROWS_AS(parse_config(bad), UsageError);
        std::istringstream no_eq("alpha 0.1\n");
        CHECK_THROWS_AS(parse_config(no_eq), UsageError);
        RunConfig e;
        CHECK_THROWS_AS(e.set("alpha", "abc"), UsageError);
        e.system = "vanderpol";
        CHECK_THROWS_AS(e.validate(), UsageError);
        e.alpha = 0.1;
        CHECK_THROWS_AS(e.validate(), UsageError);
        e.degree = 4;
        CHECK_NOTHROW(e.validate());
        CHECK(e.effective_objective_tolerance() == doctest::Approx(1e-3));
    }

    TEST_CASE("config hash ignores the output directory only") {
        RunConfig a;
        a.system = "vanderpol";
        a.alpha = 0.1;
        a.degree = 4;
        RunConfig b = a;
        b.outdir = "/somewhere/else";
        CHECK(a.hash() == b.hash());
        b.seed = 1;
        CHECK(a.hash() != b.hash());
        RunConfig bare = a;
        bare.outdir.clear();
        CHECK(a.hash() == fnv1a64(bare.serialize()));
    }

    TEST_CASE("synthesize writes reproducible artifacts") {
        const fs::path d1 = scratch_dir("synth1"), d2 = scratch_dir("synth2");
        std::ostringstream out, err;
        SynthesizeOptions opts;
        opts.dump_lp = true;
        opts.export_samples = true;
        REQUIRE(cmd_synthesize(vdp_config(d1), opts, out, err) == kExitOk);
        CHECK(out.str().find("N 921\n") != std::string::npos);
        CHECK(out.str().find("m 91\n") != std::string::npos);
        for (const char* f : {"certificate.json", "coefficients.txt", "run.log", "scenario.lp", "scenario_samples.csv"})
            CHECK(fs::exists(d1 / f));

        const auto cert = nlohmann::json::parse(slurp(d1 / "certificate.json"));
        CHECK(cert.at("N") == 921);
        CHECK(cert.at("master_seed") == 11);
        const std::uint64_t hash = vdp_config(d1).hash();
        CHECK(cert.at("config_hash").get<std::uint64_t>() == hash);
        std::ostringstream hex;
        hex << std::hex << hash;
        CHECK(slurp(d1 / "coefficients.txt").find("# config_hash " + hex.str()) != std::string::npos);
        CHECK(slurp(d1 / "coefficients.txt").find("# master_seed 11") != std::string::npos);
        CHECK(slurp(d1 / "scenario.lp").find("\\ config_hash " + hex.str()) != std::string::npos);
        CHECK(slurp(d1 / "run.log").find("# master_seed 11") != std::string::npos);

        std::ostringstream out2, err2;
        REQUIRE(cmd_synthesize(vdp_config(d2), opts, out2, err2) == kExitOk);
        std::istringstream c1(slurp(d1 / "certificate.json")), c2(slurp(d2 / "certificate.json"));
        CHECK(to_json(read_certificate(c1), false) == to_json(read_certificate(c2), false));
        CHECK(slurp(d1 / "coefficients.txt") == slurp(d2 / "coefficients.txt"));
        CHECK(slurp(d1 / "scenario.lp") == slurp(d2 / "scenario.lp"));
        CHECK(slurp(d1 / "scenario_samples.csv") == slurp(d2 / "scenario_samples.csv"));

        // Certifying the fresh certificate passes.
        std::ostringstream cout_, cerr_;
        CertifyOptions co;
        co.certificate_path = (d1 / "certificate.json").string();
        co.samples = 20000;
        CHECK(cmd_certify(co, cout_, cerr_) == kExitOk);
        CHECK(cout_.str().find("result PASS") != std::string::npos);
    }

    TEST_CASE("exit codes of the command-line tool") {
        const fs::path d = scratch_dir("exit");
        CHECK(run("synthesize --system vanderpol --degree 4 --outdir " + d.string()) == 1);
        CHECK(run("synthesize --system vanderpol --alpha 0.3 --outdir " + d.string()) == 1);
        CHECK(run("no-such-command") == 1);
        CHECK(run("certify " + (d / "missing.json").string()) == 1);

        std::ofstream(d / "corrupt.json") << "{\"format\": \"pcsis-certificate/1\", \"status\": ";
        CHECK(run("certify " + (d / "corrupt.json").string()) == 1);

        PacCertificate v = lorenz_certificate();
        v.system = describe_builtin("vanderpol");
        v.mode = "sis";
        v.degree = 2;
        v.m = 6;
        v.coefficients = Eigen::VectorXd::Ones(6);
        v.lambda_star = 0.25;
        write_json(d / "void.json", to_json(assemble_certificate(v)));
        CHECK(run("certify " + (d / "void.json").string()) == 4);
    }

    TEST_CASE("plugin systems through the command-line tool") {
        const fs::path d = scratch_dir("plugin");
        const std::string escape = "synthesize --plugin '" + std::string(PCSIS_FIXTURE_PLUGIN) +
                                   " 1 escape' --plugin-dimension 1 --plugin-safe-lower=-1 --plugin-safe-upper 1 "
                                   "--plugin-control-lower=-0.1 --plugin-control-upper 0.1 --mode csis "
                                   "--alpha 0.3 --degree 0 --volume-samples 1000 --outdir " +
                                   (d / "escape").string();
        CHECK(run(escape) == 2);
        CHECK(fs::exists(d / "escape" / "run.log"));
        CHECK_FALSE(fs::exists(d / "escape" / "certificate.json"));

        const std::string identity = "synthesize --plugin '" + std::string(PCSIS_FIXTURE_PLUGIN) +
                                     " 1 identity' --plugin-dimension 1 --plugin-safe-lower=-1 "
                                     "--plugin-safe-upper 1 --alpha 0.3 --degree 2 --volume-samples 10000 "
                                     "--n-prime 50 --outdir " +
                                     (d / "identity").string();
        REQUIRE(run(identity) == 0);
        CHECK(run("certify --samples 2000 " + (d / "identity" / "certificate.json").string()) == 0);
    }

    TEST_CASE("grid export") {
        const fs::path d = scratch_dir("grid");
        PacCertificate c = lorenz_certificate();
        c.system = describe_builtin("vanderpol");
        c.mode = "sis";
        c.degree = 2;
        c.m = 6;
        c.coefficients = Eigen::VectorXd::LinSpaced(6, 1.0, -1.0);
        write_json(d / "vdp.json", to_json(assemble_certificate(c)));

        GridExportOptions g;
        g.certificate_path = (d / "vdp.json").string();
        std::ostringstream csv, err;
        REQUIRE(cmd_grid_export(g, csv, err) == kExitOk);
        const std::string text = csv.str();
        CHECK(text.rfind("x,y,h,inside\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 40001);
        // Corners of the enclosing box lie outside the disk.
        std::istringstream lines(text);
        std::string header, first;
        std::getline(lines, header);
        std::getline(lines, first);
        CHECK(first.substr(first.size() - 5) == ",-1,0");

        write_json(d / "lorenz.json", to_json(lorenz_certificate()));
        GridExportOptions s;
        s.certificate_path = (d / "lorenz.json").string();
        s.resolution = 5;
        s.dim_x = 3;
        s.dim_y = 7;
        s.fixed.assign(10, 0.5);
        std::ostringstream lz;
        REQUIRE(cmd_grid_export(s, lz, err) == kExitOk);
        const std::string slice = lz.str();
        CHECK(std::count(slice.begin(), slice.end(), '\n') == 26);
        CHECK(slice.find("\n-15,-15,") != std::string::npos);

        s.fixed.pop_back();
        std::ostringstream bad;
        CHECK(cmd_grid_export(s, bad, err) == kExitUsage);
        s.fixed.push_back(0.5);
        s.dim_y = 3;
        CHECK(cmd_grid_export(s, bad, err) == kExitUsage);
        CHECK(run("grid-export --dims 0 12 " + s.certificate_path) == 1);
    }

    TEST_CASE("reproduce-table counts") {
        ReproduceOptions o;
        o.counts_only = true;
        std::ostringstream csv, err;
        REQUIRE(cmd_reproduce_table(o, csv, err) == kExitOk);
        const std::string text = csv.str();
        CHECK(text.find("\nex1-0.01,0.01,27611,-,12,") != std::string::npos);
        CHECK(text.find("\nex1-0.3,0.3,921,-,12,") != std::string::npos);
        CHECK(text.find("\nex3-0.5,0.01,13611,9,5,0.5,") != std::string::npos);
        CHECK(text.find("\nex4,0.01,27611,8,2,0.1,") != std::string::npos);
        CHECK(text.find("\nc1,0.005,24821,-,4,") != std::string::npos);
        CHECK(text.find("\nc4,0.01,51411,-,4,") != std::string::npos);
        for (const auto& row : table_rows()) {
            const SystemModel sys = builtin(row.config.system);
            CHECK(required_sample_count(row.config.alpha, row.config.beta,
                                        basis_size(sys.dimension(), row.config.degree)) == row.reported_N);
        }

        o.rows = {"nope"};
        std::ostringstream none;
        CHECK(cmd_reproduce_table(o, none, err) == kExitUsage);
    }
}
