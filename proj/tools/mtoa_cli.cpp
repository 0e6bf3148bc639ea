// mtoa: run simulation, analysis, sweep, comparison and recommendation
// experiments from a JSON config.
//
//   mtoa <mode> --config cfg.json --out rows.csv [--summary s.json]
//        [--full-scale] [--workers N]
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 1 other.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "mtoa/error.hpp"
#include "mtoa/harness/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mtoa::ConfigError("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput/fairness experiments for learning-based random access"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_path;
    std::string summary_path;
    bool full_scale = false;
    unsigned workers = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "run seeded learning replications"},
        {"analyze", "evaluate the queueing model for one strategy"},
        {"sweep", "analytical throughput/fairness frontier"},
        {"compare", "simulation next to analysis with relative errors"},
        {"recommend", "best parameters under a fairness floor"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", out_path, "CSV output path")->required();
        sub->add_option("--summary", summary_path, "optional JSON summary path");
        sub->add_flag("--full-scale", full_scale, "default T = 1e7 instead of 1e6");
        sub->add_option("--workers", workers, "concurrent workers (overrides config)")->check(CLI::Range(1u, 1024u));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        mtoa::harness::ParseOptions opts;
        opts.mode = mtoa::harness::parse_mode(app.get_subcommands().front()->get_name());
        opts.full_scale = full_scale;
        auto spec = mtoa::harness::parse_config(read_file(config_path), opts);
        spec.output_path = out_path;
        if (!summary_path.empty()) spec.summary_path = summary_path;
        if (workers > 0) spec.workers = workers;

        const auto result = mtoa::harness::run_experiment(spec);
        for (const auto& d : result.diagnostics) std::cerr << "mtoa: " << d << '\n';
        return result.numerical_failure ? kExitNumerical : 0;
    } catch (const mtoa::ConfigError& e) {
        std::cerr << "mtoa: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mtoa::NumericalError& e) {
        std::cerr << "mtoa: numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitNumerical;
    } catch (const mtoa::InfeasibleError& e) {
        std::cerr << "mtoa: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "mtoa: " << e.what() << '\n';
        return 1;
    }
}
