// Command-line front end; talks to the library only through the C API.
#include "bumpcert/bumpcert.h"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int fail(bc_status st) {
    std::cerr << "error: " << bc_last_error() << "\n";
    (void)st;
    return kUsage;
}

void print_and_free(char* s) {
    if (s) {
        std::cout << s;
        bc_string_free(s);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical certification of the Bellman-function proof of the two-weight bump theorem"};
    app.require_subcommand(1);

    std::string suite;
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::int64_t> trial;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suites_help = "suite name, one of:\n";
    suites_help += bc_suite_list();
    verify->add_option("suite", suite, suites_help)->required();
    verify->add_option("--config", config, "JSON experiment config")->required();
    verify->add_option("--seed", seed, "master seed (overrides the config)");
    verify->add_option("--trials", trials, "number of trials (overrides the config)")->check(CLI::NonNegativeNumber);
    verify->add_option("--trial", trial, "replay a single trial by index")->check(CLI::NonNegativeNumber);
    verify->add_option("--out", out_dir, "directory for CSV and Markdown reports");

    std::string in_dir;
    auto* report = app.add_subcommand("report", "summarize a report directory");
    report->add_option("--in", in_dir, "directory written by verify --out")->required();

    std::string bump_config;
    auto* bump = app.add_subcommand("bump", "print A2, Orlicz and n_Psi bump constants");
    bump->add_option("--config", bump_config, "JSON experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    if (*verify) {
        const auto text = slurp(config);
        if (!text) {
            std::cerr << "error: cannot read config file '" << config << "'\n";
            return kUsage;
        }
        bc_run_options opt{};
        if (seed) {
            opt.has_seed = 1;
            opt.seed = *seed;
        }
        if (trials) {
            opt.has_trials = 1;
            opt.trials = *trials;
        }
        if (trial) {
            opt.has_trial = 1;
            opt.trial = *trial;
        }
        int passed = 0;
        char* summary = nullptr;
        const bc_status st = bc_run_suite(suite.c_str(), text->c_str(), config.c_str(), &opt,
                                          out_dir.empty() ? nullptr : out_dir.c_str(), &passed, &summary);
        if (st != BC_OK) return fail(st);
        print_and_free(summary);
        return passed ? kPass : kViolation;
    }
    if (*report) {
        int passed = 0;
        char* summary = nullptr;
        const bc_status st = bc_report(in_dir.c_str(), &passed, &summary);
        if (st != BC_OK) return fail(st);
        print_and_free(summary);
        return passed ? kPass : kViolation;
    }
    if (*bump) {
        const auto text = slurp(bump_config);
        if (!text) {
            std::cerr << "error: cannot read config file '" << bump_config << "'\n";
            return kUsage;
        }
        char* table = nullptr;
        const bc_status st = bc_bump_table(text->c_str(), bump_config.c_str(), &table);
        if (st != BC_OK) return fail(st);
        print_and_free(table);
        return kPass;
    }
    return kUsage;
}
