// threatbench command-line interface.
//
// Exit codes: 0 success, 1 expectations not met, 2 configuration error,
// 3 data error, 4 numeric failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "threatbench/core/error.hpp"
#include "threatbench/pipeline/config.hpp"
#include "threatbench/pipeline/expectations.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/pipeline/report.hpp"

namespace tb = threatbench;
namespace tp = threatbench::pipeline;

namespace {

struct RunOptions {
    std::string domain;
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> overrides;
};

void add_run_options(CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("domain", opts.domain, "intrusion, malware, phishing or ueba")->required();
    cmd->add_option("--config", opts.config_file, "JSON config file overlaid on the defaults");
    cmd->add_option("--seed", opts.seed, "Root seed");
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--override", opts.overrides, "Dotted key=value, repeatable");
}

tp::PipelineConfig resolve(const RunOptions& opts) {
    auto overrides = opts.overrides;
    if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
    auto config = tp::load_config(tp::domain_from_string(opts.domain), opts.config_file, overrides);
    if (!opts.out.empty()) config.out_dir = opts.out;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"threatbench: synthetic security data, detectors and evaluation"};
    app.set_version_flag("--version", THREATBENCH_VERSION);
    app.require_subcommand(1);

    RunOptions gen_opts;
    auto* generate = app.add_subcommand("generate", "Write a domain's synthetic dataset");
    add_run_options(generate, gen_opts);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Run a domain pipeline and emit its report");
    add_run_options(run, run_opts);

    std::string eval_report;
    std::string expectations = "config/expectations.json";
    auto* evaluate = app.add_subcommand("evaluate", "Check a report against acceptance bands");
    evaluate->add_option("--report", eval_report, "report.json to check")->required();
    evaluate->add_option("--expectations", expectations, "Expectations file");

    std::string report_path;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Print a report summary or re-emit its files");
    report->add_option("--report", report_path, "report.json to read")->required();
    report->add_option("--out", report_out, "Directory to re-emit report files into");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            for (const auto& path : tp::generate_dataset(resolve(gen_opts))) {
                std::cout << path.string() << "\n";
            }
        } else if (*run) {
            const auto config = resolve(run_opts);
            const auto result = tp::run_pipeline(config);
            tp::emit_report(result, config.out_dir);
            std::cout << tp::format_summary(result);
        } else if (*evaluate) {
            const auto result = tp::load_report(eval_report);
            const auto checks = tp::check_expectations(result, tp::load_expectations(expectations));
            bool ok = true;
            for (const auto& c : checks) {
                std::cout << c.describe() << "\n";
                ok = ok && c.status != tp::CheckStatus::fail;
            }
            if (checks.empty()) std::cout << "no expectations for domain " << result.domain << "\n";
            return ok ? 0 : 1;
        } else if (*report) {
            const auto result = tp::load_report(report_path);
            if (!report_out.empty()) tp::emit_report(result, report_out);
            std::cout << tp::format_summary(result);
        }
    } catch (const tb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tb::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const tb::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
