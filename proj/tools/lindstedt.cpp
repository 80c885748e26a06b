// lindstedt: batch front end.
//
//   lindstedt <command> --config run.json [--out dir] [--threads n]
//
// Exit codes: 0 every asserted check passed, 1 some check failed,
// 2 invalid config or usage, 3 a computation raised an error.

#include <iostream>

#include <CLI11.hpp>

#include <lindstedt/cli.hpp>

int main(int argc, char** argv) {
    using namespace lindstedt;
    CLI::App app{"Lindstedt series, renormalised expansions and torus verification"};
    app.require_subcommand(1);
    std::string config, out = ".";
    int threads = 1;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker cap; results do not depend on it")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    std::unique_ptr<Workspace> ws;
    try {
        ws = std::make_unique<Workspace>(load_config(config), out);
        CommandResult r = run_command(command, *ws);
        auto summary = r.summary();
        summary["threads_requested"] = threads;
        summary["threads_used"] = 1;
        r.files.push_back(ws->write(command + "_summary.json", summary));
        for (auto& rep : r.reports) {
            int failed = 0;
            for (auto& c : rep.checks) failed += !c.pass();
            std::cout << (rep.pass() ? "PASS " : "FAIL ") << rep.suite << " (" << rep.checks.size() << " checks"
                      << (failed ? ", " + std::to_string(failed) + " failed" : "") << ")\n";
        }
        for (auto& n : r.notes) std::cout << "note: " << n << "\n";
        if (!r.pass()) {
            nlohmann::json err{{"status", "fail"}, {"command", command}, {"failed", r.failures()}};
            std::cerr << err.dump(2) << "\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        auto err = error_report(command, e);
        std::cerr << err.dump(2) << "\n";
        if (ws) ws->write("error.json", err);
        return err["kind"] == "config" ? 2 : 3;
    }
}
