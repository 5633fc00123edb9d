#ifndef RKSTAB_CLI_HPP
#define RKSTAB_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rkstab/grid.hpp"
#include "rkstab/hyper_params.hpp"

namespace rkstab::cli {

inline constexpr const char* kArtifactVersion = "rkstab 1.0.0";

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,  ///< I/O and other runtime failures
  kUsage = 2,
  kDomain = 3,
  kAllDiverged = 4,
};

enum class Command { TraceRc, TraceRk, PhaseDiagram, Frontier, Converge, FixedPoints };
enum class Format { Csv, Json };

std::string_view to_string(Command command);

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentSpec {
  Command command = Command::TraceRk;
  HyperParams params;
  std::optional<SimConfig> sim;  ///< trace-rc and converge
  int t_max = 0;
  std::optional<GridAxis> grid_r;
  std::optional<GridAxis> grid_i;
  /// frontier: which single-point mode was requested, if not a grid.
  std::optional<double> frontier_sigma_r;
  std::optional<double> frontier_sigma_i;
  double tol = 1e-6;
  std::string out_path = "-";  ///< "-" writes to stdout
  Format format = Format::Csv;
  unsigned jobs = 1;
};

/// Parses argv (without the program name). Throws UsageError naming the
/// offending flag. `help` is set instead when --help was requested.
ExperimentSpec parse_args(const std::vector<std::string>& args, std::string* help = nullptr);

/// Rectangular result with a metadata header.
struct Table {
  using Value = std::variant<double, std::int64_t, std::string>;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

/// 17 significant digits (round-trip exact); "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_number(double value);

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);

/// Result of evaluating a spec, before serialization.
struct RunResult {
  Table table;
  int exit_code = kSuccess;
};

/// Evaluates the spec. Domain errors propagate as rkstab::DomainError.
RunResult evaluate(const ExperimentSpec& spec);

/// Evaluates the spec and writes the artifact to `out_path` (temp file, then
/// rename) or to `out` for "-". Returns the process exit status.
int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rkstab::cli

#endif  // RKSTAB_CLI_HPP
