// ucont command line: run, validate and list-kinds.
// Exit codes: 0 ok, 1 a check failed, 2 config error, 3 runtime error.

#include <iostream>

#include "CLI11.hpp"

#include "ucont/experiment.hpp"

namespace {

void print_errors(const ucont::ConfigError& e) {
    for (const auto& m : e.errors()) std::cerr << "error: " << m << "\n";
}

int cmd_run(const std::string& path, bool quiet) {
    try {
        auto cfg = ucont::load_config(path);
        auto rep = ucont::run_experiment(cfg);
        if (!quiet) {
            for (const auto& c : rep.checks)
                std::cout << "[" << c.status << "] " << c.name << ": " << ucont::format_number(c.value) << " " << c.relation << " "
                          << ucont::format_number(c.tolerance) << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
            std::cout << "report: " << cfg.output() << "/report.json\n";
        }
        std::cout << (rep.failed() ? "FAIL " : "PASS ") << rep.kind << " in " << ucont::format_number(rep.wall_clock) << " s\n";
        return rep.failed() ? 1 : 0;
    } catch (const ucont::ConfigError& e) {
        print_errors(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int cmd_validate(const std::string& path, bool echo) {
    try {
        auto cfg = ucont::load_config(path);
        if (echo) std::cout << cfg.normalized();
        std::cout << "ok: " << cfg.kind() << "\n";
        return 0;
    } catch (const ucont::ConfigError& e) {
        print_errors(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ucont: numerical checks for unique continuation of Schroedinger flows"};
    app.set_version_flag("--version", std::string("ucont ") + ucont::kVersion);
    app.require_subcommand(1);

    std::string run_path, validate_path;
    bool quiet = false, echo = false;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", run_path, "config file")->required();
    run->add_flag("-q,--quiet", quiet, "only print the summary line");
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", validate_path, "config file")->required();
    validate->add_flag("--echo", echo, "print the normalized config");
    auto* list = app.add_subcommand("list-kinds", "list the experiment kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (*run) return cmd_run(run_path, quiet);
    if (*validate) return cmd_validate(validate_path, echo);
    if (*list) {
        for (const auto& k : ucont::experiment_kinds()) std::cout << k << "  " << ucont::kind_summary(k) << "\n";
        return 0;
    }
    return 2;
}
