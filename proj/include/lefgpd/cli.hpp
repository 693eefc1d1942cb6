#pragma once

// Batch front end: JSON run configuration, report emission and the
// subcommand drivers behind the lefgpd executable.

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lefgpd/lefschetz.hpp"

namespace lefgpd::cli {

enum class OutputFormat { Json, Csv };

struct RunConfig {
  VerificationConfig verification;
  OutputFormat format = OutputFormat::Json;
  std::string output_path;
  int verbosity = 0;
};

// Exit codes shared by all subcommands.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFailedVerdict = 2;

inline constexpr std::string_view kSweepHeader =
    "t,tau,str_t_geometric,str_spectral,fixed_point_side,abs_error";

// Throws Error(SchemaViolation) naming the line (syntax errors) or the field
// path (schema errors). Unknown keys are rejected.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

// Doubles are written with 17 significant digits; non-finite values as null.
std::string dump_json(const nlohmann::ordered_json& value);
std::string format_double(double value);

nlohmann::ordered_json report_to_json(const ConvergenceReport& report);
std::string report_to_csv(const ConvergenceReport& report);

int exit_code(const ConvergenceReport& report);

// Subcommand drivers; diagnostics go to `err`, results to `out` or the path.
int run_verify(const std::string& config_path, const std::string& out_path, std::ostream& out,
               std::ostream& err);
int run_sweep(const std::string& config_path, double t_max, double ratio, int rungs,
              const std::string& out_path, std::ostream& out, std::ostream& err);
int run_model_kernel(int order, int dim, const std::string& coeff_json, const std::string& out_path,
                     std::ostream& out, std::ostream& err);

// Coefficient format: a number or square matrix (diagonal symbol
// sum_j a xi_j^(2s)), or an array of {"alpha": [...], "a": number|matrix}.
EllipticSymbol parse_symbol(int order, int dim, std::string_view coeff_json);

}  // namespace lefgpd::cli
