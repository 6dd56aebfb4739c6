#pragma once

#include "sispatch/cli/result_table.hpp"
#include "sispatch/cli/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace sispatch::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommandOptions {
    /// overrides the sweep block of the config
    std::optional<Grid> grid;
    double t_end = 500.0;
    double stride = 1.0;
    /// simulate: field norm counted as converged
    std::optional<double> tol;
    /// simulate: dfe, dfe-perturbed, uniform or config
    std::string initial = "dfe-perturbed";
    unsigned threads = 0;
};

/// Prints n, the risk partition, alpha and which of A0-A3 hold. Load-time
/// validation already enforces A0-A2, so a returned report always has them.
int cmd_validate(const Scenario& sc, std::ostream& out, std::ostream& log);

/// dI, R0, s(F - V) per grid point (or at the config dI), followed by the
/// dI -> 0 and dI -> infinity limit rows.
ResultTable cmd_r0(const Scenario& sc, const CommandOptions& opt);

/// Per dI: h_j on H+, dI*, dI**, J+ membership, method and S*. Rows where
/// the classification is undefined carry a nonzero status (1 degenerate h,
/// 2 below threshold) and NaN in the dependent columns.
ResultTable cmd_profile(const Scenario& sc, const CommandOptions& opt);

/// dS, dI, S_j, I_j, kappa, residual, total at the config point or along the
/// sweep. Throws SubThreshold after logging R0.
ResultTable cmd_equilibrium(const Scenario& sc, const CommandOptions& opt, std::ostream& log);

/// t, S_j, I_j, total sampled every stride up to t_end; a convergence
/// summary goes to log.
ResultTable cmd_simulate(const Scenario& sc, const CommandOptions& opt, std::ostream& log);

/// Full four-patch star example. The report goes to out; with a bundle
/// directory the CSV tables are written there too.
int cmd_star_example(std::ostream& out, const std::optional<std::string>& bundle_dir, double gamma_4,
                     unsigned threads);

/// '#' header lines shared by every table.
void stamp(ResultTable& table, const std::string& subcommand, const std::string& config_hash);

} // namespace sispatch::cli
