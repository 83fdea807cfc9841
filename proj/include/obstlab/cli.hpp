#pragma once

#include "obstlab/grid.hpp"
#include "obstlab/heat.hpp"
#include "obstlab/verify.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace obstlab {

/// One experiment. Loaded from a JSON file, then overridden by command-line flags.
struct ExperimentConfig {
    GridSpec grid;
    std::string case_id = "pstar";
    CaseParams params;
    std::vector<SpaceTimePoint> centers;  // empty: the origin at t_final
    double p = 2.0;
    std::string ladder;                   // empty: log:<4h>:<min(R, sqrt T)/2>:24
    Calibration cal;
    std::filesystem::path output = "out";
    std::uint64_t seed = 0;

    std::string kind = "obstacle";        // solve: heat | obstacle
    std::string f_source = "case";        // const:<v> | case | case:<id> | file:<path>
    std::string data_source = "case";     // zero | case | file:<path>

    std::vector<std::string> checks;      // verify/report
    std::optional<double> expected;
    double tolerance = 0.15;
    double d = 0.2;                       // nondegeneracy cylinder radius

    std::size_t stride = 1;               // sweep
    double eps_pos = 0.0;                 // 0: h^2/4

    std::filesystem::path u_file;         // analyze/verify/sweep inputs; empty: <output>/u.prfd
    std::filesystem::path f_file;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    std::vector<SpaceTimePoint> effective_centers() const;
    std::string effective_ladder() const;
};

ExperimentConfig config_from_json(const std::string& text);
/// Every field, defaults included.
std::string config_to_json(const ExperimentConfig& cfg);

/// Parses `x1,...,xn` or `x1,...,xn,t` for an n-dimensional grid with default time t_default.
SpaceTimePoint parse_center(const std::string& text, int n, double t_default);

// Commands. Each records the effective config into the output directory and
// returns the process exit code (0 ok, 3 hard check failed); errors are thrown.
int cmd_manufacture(const ExperimentConfig& cfg);
int cmd_solve(const ExperimentConfig& cfg);
int cmd_analyze(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_report(const ExperimentConfig& cfg);

/// Full front end: 0 ok, 1 validation error, 2 numerical failure, 3 hard check failed.
int run_cli(int argc, const char* const* argv);

}  // namespace obstlab
