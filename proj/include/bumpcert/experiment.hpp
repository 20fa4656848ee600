#pragma once

#include "bumpcert/embedding.hpp"
#include "bumpcert/generators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bumpcert {

struct GaugeSpec {
    std::string family = "log"; ///< log | young-log
    double alpha = 2.0;
};

struct LatticeSpec {
    int depth = 8;
    int branching = 2;
    std::string masses = "equal"; ///< equal | random
    std::optional<std::uint64_t> seed;
};

struct OperatorSpec {
    std::string kind = "shift"; ///< shift | paraproduct
    int complexity = 1;
    int max_complexity = 4;
    bool extremal = false; ///< use worst_kernel output instead of random kernels
};

struct BellmanSpec {
    DistFnSpec dist;
    int min_children = 2;
    int max_children = 16;
};

struct ExperimentConfig {
    GaugeSpec gauge;
    std::optional<GaugeSpec> gauge2;
    LatticeSpec lattice;
    WeightSpec v;
    WeightSpec w;
    OperatorSpec op;
    BellmanSpec bellman;
    double carleson_density = 0.5;
    int trials = 100;
    std::uint64_t seed = 42;
    double tolerance = 1e-9;
    std::uint64_t hash = 0; ///< FNV-1a of the canonical JSON
    std::string canonical;  ///< canonical JSON of the parsed document
};

/// Parses and validates a JSON config. Errors are UsageError messages naming
/// the origin, line and field.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

const std::vector<std::string>& suite_names();

struct TrialRow {
    std::int64_t trial = 0;
    double slack = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string witness;
    bool pass = true;
    double ratio = 0.0; ///< suites with a bounded ratio; 0 otherwise
};

struct LedgerEntry {
    std::int64_t trial = 0;
    std::string form; ///< "25" or "26"
    LedgerRow row;
};

struct RunReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double tolerance = 0.0;
    std::vector<TrialRow> rows;
    std::vector<LedgerEntry> ledger;
    std::vector<std::string> notes;
    bool has_ratio = false;
    double ratio_bound = 0.0;
    double min_slack = 0.0;
    double max_ratio = 0.0;
    bool pass = true;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::int64_t> only_trial;
};

RunReport run_suite(const std::string& suite, const ExperimentConfig& config, const RunOptions& options = {});

std::string trials_csv(const RunReport& report);
std::string summary_markdown(const RunReport& report);
std::string histogram_csv(const RunReport& report, int bins = 20);
std::string ledger_csv(const RunReport& report);
/// Writes trials.csv, summary.md, histogram.csv, run.json and (telescope) ledger.csv.
void write_report(const RunReport& report, const std::string& dir);
/// Reads a directory written by write_report.
RunReport read_report(const std::string& dir);

/// Markdown table of A2, Orlicz and n_Psi bump constants for the configured weights.
std::string bump_table(const ExperimentConfig& config);

} // namespace bumpcert
