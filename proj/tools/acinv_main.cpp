#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "acinv/pipeline.hpp"

namespace {

void print_summary(const acinv::RunResult& rr, std::ostream& out) {
    for (const auto& pr : rr.programs) {
        out << pr.path << ": " << pr.status;
        if (pr.status == "ok") {
            out << ", " << pr.emitted.size() << "/" << pr.extraction.loops.size()
                << " loops annotated";
            if (pr.solved) out << (*pr.solved ? ", solved" : ", unsolved");
            out << " -> " << pr.output_path;
        } else if (!pr.error.empty()) {
            out << ": " << pr.error;
        }
        out << "\n";
    }
    if (rr.report.contains("metrics")) {
        const auto& m = rr.report["metrics"];
        if (m.contains("completion")) {
            out << "completion " << m["solved"] << "/" << m["programs"];
            if (m.contains("acc") && !m["acc"].is_null()) {
                out << ", Acc " << m["passing"] << "/" << m["finalized"];
            }
            out << " (checker: " << m["checker"].get<std::string>() << ")\n";
        } else if (m.contains("note")) {
            out << m["note"].get<std::string>() << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generates and checks ACSL loop invariants for C programs"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Annotate programs and emit a JSON report");
    std::vector<std::string> paths;
    run->add_option("paths", paths, "C files or directories to process")->required();

    std::string backend = "replay";
    run->add_option("--backend", backend, "Model backend: live, replay or record")
        ->check(CLI::IsMember({"live", "replay", "record"}))
        ->capture_default_str();
    std::string fixtures;
    run->add_option("--fixtures", fixtures, "Fixture directory (required for replay and record)");

    acinv::PipelineOptions opt;
    run->add_option("--k", opt.k, "Augmentation budget per loop")->capture_default_str();
    run->add_option("--prompts-dir", opt.prompts_dir, "Directory with prompt template overrides");
    std::string oracle = "report";
    run->add_option("--oracle", oracle, "Trace oracle mode: off, report or gate")
        ->check(CLI::IsMember({"off", "report", "gate"}))
        ->capture_default_str();
    run->add_option("--seed", opt.seed, "Seed for the trace sampler")->capture_default_str();
    run->add_option("--fuel", opt.fuel, "Interpreter step budget per program")
        ->capture_default_str();
    run->add_option("--verifier-cmd", opt.verifier_cmd,
                    "External checker command; {file} is replaced with the annotated path");
    long long verifier_timeout_ms = 60000;
    run->add_option("--verifier-timeout-ms", verifier_timeout_ms,
                    "Time limit for one verifier invocation")
        ->capture_default_str();
    run->add_option("--verifier-pattern", opt.verifier_pattern,
                    "Regex the verifier output must match to count as a pass");
    run->add_option("--jobs", opt.jobs, "Programs processed in parallel")->capture_default_str();
    std::string report_path;
    run->add_option("--report", report_path, "Write the JSON report to this file");
    run->add_flag("--dump-extraction", opt.dump_extraction,
                  "Stop after extraction and report the loop table only");
    std::string model;
    std::string base_url;
    run->add_option("--model", model, "Model name for the live backend");
    run->add_option("--base-url", base_url, "API base URL for the live backend");

    CLI11_PARSE(app, argc, argv);

    try {
        opt.backend = backend == "live"     ? acinv::BackendMode::Live
                      : backend == "record" ? acinv::BackendMode::Record
                                            : acinv::BackendMode::Replay;
        opt.oracle = oracle == "off"    ? acinv::OracleMode::Off
                     : oracle == "gate" ? acinv::OracleMode::Gate
                                        : acinv::OracleMode::Report;
        opt.fixtures_dir = fixtures;
        opt.verifier_timeout = std::chrono::milliseconds(verifier_timeout_ms);

        const auto inputs = acinv::collect_inputs(paths);

        std::unique_ptr<acinv::FixtureStore> store;
        std::unique_ptr<acinv::HttpBackend> live;
        if (!opt.dump_extraction) {
            if (opt.backend != acinv::BackendMode::Live) {
                if (fixtures.empty()) {
                    std::cerr << "acinv: --backend " << backend << " needs --fixtures\n";
                    return 1;
                }
                store = std::make_unique<acinv::FixtureStore>(fixtures);
                for (const auto& d : store->diagnostics) {
                    std::cerr << "acinv: " << d.message << "\n";
                }
            }
            if (opt.backend != acinv::BackendMode::Replay) {
                acinv::HttpConfig cfg;
                if (!model.empty()) cfg.model = model;
                if (!base_url.empty()) cfg.base_url = base_url;
                live = std::make_unique<acinv::HttpBackend>(cfg);
            }
        }

        acinv::RunResult rr = acinv::run_pipeline(inputs, opt, live.get(), store.get());
        const std::string json = rr.report.dump(2) + "\n";
        if (report_path.empty()) {
            std::cout << json;
        } else {
            std::ofstream out(report_path, std::ios::binary);
            if (!out.good()) {
                std::cerr << "acinv: cannot write " << report_path << "\n";
                return 1;
            }
            out << json;
            print_summary(rr, std::cout);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "acinv: " << e.what() << "\n";
        return 1;
    }
}
