#include "rkstab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rkstab/convergence_harness.hpp"
#include "rkstab/errors.hpp"
#include "rkstab/recurrent_kernel.hpp"
#include "rkstab/reservoir_sim.hpp"
#include "rkstab/stability_analysis.hpp"

namespace rkstab::cli {

namespace {

const std::map<std::string, Command, std::less<>> kCommands = {
    {"trace-rc", Command::TraceRc},   {"trace-rk", Command::TraceRk},
    {"phase-diagram", Command::PhaseDiagram}, {"frontier", Command::Frontier},
    {"converge", Command::Converge},  {"fixed-points", Command::FixedPoints},
};

template <typename T>
T parse_value(const std::string& flag, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last)
    throw UsageError(flag + ": cannot parse '" + text + "'");
  return value;
}

double parse_sigma(const std::string& flag, const std::string& text) {
  const double v = parse_value<double>(flag, text);
  if (!std::isfinite(v) || v < 0.0)
    throw UsageError(flag + ": standard deviation must be finite and nonnegative, got " + text);
  return v;
}

int parse_positive(const std::string& flag, const std::string& text) {
  const long long v = parse_value<long long>(flag, text);
  if (v < 1 || v > 1'000'000'000) throw UsageError(flag + ": must be a positive integer, got " + text);
  return static_cast<int>(v);
}

GridAxis parse_grid(const std::string& flag, const std::string& text, bool nonnegative) {
  GridAxis axis;
  try {
    axis = parse_grid_axis(text, flag);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (nonnegative && axis.min < 0.0) throw UsageError(flag + ": standard deviations must be nonnegative");
  return axis;
}

unsigned jobs_from_environment() {
  const char* env = std::getenv("RKSTAB_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  return static_cast<unsigned>(parse_positive("RKSTAB_JOBS", env));
}

}  // namespace

std::string_view to_string(Command command) {
  for (const auto& [name, value] : kCommands)
    if (value == command) return name;
  return "unknown";
}

ExperimentSpec parse_args(const std::vector<std::string>& args, std::string* help) {
  CLI::App app{"Stability of echo-state networks and their recurrent-kernel limits", "rkstab"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string command;
  std::map<std::string, std::string> raw;
  app.add_option("command", command, "trace-rc | trace-rk | phase-diagram | frontier | converge | fixed-points")
      ->required();
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"--activation", "erf | sign | relu"},
      {"--sigma-r", "std of internal weights"},
      {"--sigma-i", "std of input weights"},
      {"--n", "reservoir size"},
      {"--d", "input dimension (default 10)"},
      {"--t-max", "trace length / input sequence length"},
      {"--seed", "64-bit base seed (default 0)"},
      {"--tol", "stability tolerance (default 1e-6)"},
      {"--grid-r", "sigma_r grid MIN:MAX:STEPS (inclusive)"},
      {"--grid-i", "sigma_i grid MIN:MAX:STEPS (inclusive)"},
      {"--out", "output path, '-' for stdout (default)"},
      {"--format", "csv | json (default csv)"},
      {"--jobs", "worker threads for sweeps (default $RKSTAB_JOBS or 1)"},
  };
  for (const auto& [flag, description] : flags) app.add_option(flag, raw[flag], description);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    if (help != nullptr) *help = app.help();
    return {};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
  const auto require = [&](const std::string& flag) -> const std::string& {
    if (!given(flag)) throw UsageError("missing required flag " + flag + " for command " + command);
    return raw[flag];
  };

  ExperimentSpec spec;
  const auto found = kCommands.find(command);
  if (found == kCommands.end()) throw UsageError("unknown command '" + command + "'");
  spec.command = found->second;

  if (given("--activation")) {
    const auto kind = parse_activation(raw["--activation"]);
    if (!kind) throw UsageError("--activation: expected erf, sign or relu, got '" + raw["--activation"] + "'");
    spec.params.activation = *kind;
  }
  // Validate every numeric flag that was supplied, even if the command ignores it.
  if (given("--sigma-r")) spec.params.sigma_r = parse_sigma("--sigma-r", raw["--sigma-r"]);
  if (given("--sigma-i")) spec.params.sigma_i = parse_sigma("--sigma-i", raw["--sigma-i"]);
  if (given("--tol")) {
    spec.tol = parse_value<double>("--tol", raw["--tol"]);
    if (!(spec.tol > 0.0) || !std::isfinite(spec.tol)) throw UsageError("--tol: must be positive");
  }
  if (given("--grid-r")) spec.grid_r = parse_grid("--grid-r", raw["--grid-r"], true);
  if (given("--grid-i")) spec.grid_i = parse_grid("--grid-i", raw["--grid-i"], true);
  if (given("--format")) {
    if (raw["--format"] == "csv")
      spec.format = Format::Csv;
    else if (raw["--format"] == "json")
      spec.format = Format::Json;
    else
      throw UsageError("--format: expected csv or json, got '" + raw["--format"] + "'");
  }
  if (given("--out")) {
    if (raw["--out"].empty()) throw UsageError("--out: empty path");
    spec.out_path = raw["--out"];
  }
  spec.jobs = given("--jobs") ? static_cast<unsigned>(parse_positive("--jobs", raw["--jobs"]))
                              : jobs_from_environment();

  SimConfig sim;
  if (given("--n")) sim.n = parse_positive("--n", raw["--n"]);
  if (given("--d")) sim.d = parse_positive("--d", raw["--d"]);
  if (given("--t-max")) spec.t_max = parse_positive("--t-max", raw["--t-max"]);
  if (given("--seed")) sim.seed = parse_value<std::uint64_t>("--seed", raw["--seed"]);

  switch (spec.command) {
    case Command::TraceRc:
      require("--activation");
      require("--sigma-r");
      require("--sigma-i");
      require("--n");
      require("--t-max");
      sim.t_max = spec.t_max;
      spec.sim = sim;
      break;
    case Command::TraceRk:
      require("--activation");
      require("--sigma-r");
      require("--sigma-i");
      require("--t-max");
      break;
    case Command::PhaseDiagram:
      require("--activation");
      require("--grid-r");
      require("--grid-i");
      if (!given("--t-max")) spec.t_max = kDefaultPhaseTMax;
      break;
    case Command::Converge:
      require("--activation");
      require("--grid-r");
      require("--grid-i");
      if (!given("--n")) sim.n = 2000;
      if (!given("--t-max")) spec.t_max = kDefaultConvergenceLength;
      sim.t_max = spec.t_max;
      spec.sim = sim;
      break;
    case Command::FixedPoints:
      require("--activation");
      require("--sigma-r");
      require("--sigma-i");
      break;
    case Command::Frontier: {
      if (given("--activation") && spec.params.activation != Activation::Erf)
        throw UsageError("--activation: the frontier is only defined for erf");
      spec.params.activation = Activation::Erf;
      const int modes = int(given("--grid-r")) + int(given("--sigma-r")) + int(given("--sigma-i"));
      if (modes != 1)
        throw UsageError("frontier needs exactly one of --grid-r, --sigma-r or --sigma-i");
      if (given("--sigma-r")) spec.frontier_sigma_r = spec.params.sigma_r;
      if (given("--sigma-i")) spec.frontier_sigma_i = spec.params.sigma_i;
      break;
    }
  }
  return spec;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

namespace {

std::string format_cell(const Table::Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (const auto& [key, value] : table.meta) out << "# " << key << ": " << value << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

void write_json(const Table& table, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["meta"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.meta) doc["meta"][key] = value;
  doc["columns"] = table.columns;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json record = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v))
                record[table.columns[c]] = v;
              else
                record[table.columns[c]] = format_number(v);
            } else {
              record[table.columns[c]] = v;
            }
          },
          row[c]);
    }
    doc["rows"].push_back(std::move(record));
  }
  out << doc.dump(2) << '\n';
}

namespace {

std::string grid_text(const GridAxis& g) {
  return format_number(g.min) + ":" + format_number(g.max) + ":" + std::to_string(g.steps);
}

Table base_table(const ExperimentSpec& spec) {
  Table t;
  t.meta.emplace_back("command", std::string(to_string(spec.command)));
  t.meta.emplace_back("version", kArtifactVersion);
  t.meta.emplace_back("activation", std::string(rkstab::to_string(spec.params.activation)));
  return t;
}

void add_trace_rows(Table& table, const Trace& trace) {
  table.columns = {"t", "metric"};
  for (std::size_t t = 0; t < trace.values.size(); ++t)
    table.rows.push_back({static_cast<std::int64_t>(t), trace.values[t]});
  table.meta.emplace_back("divergent", trace.divergent ? "true" : "false");
}

}  // namespace

RunResult evaluate(const ExperimentSpec& spec) {
  RunResult result;
  Table& table = result.table;
  table = base_table(spec);
  const auto& p = spec.params;

  switch (spec.command) {
    case Command::TraceRc: {
      const SimConfig& sim = *spec.sim;
      table.meta.emplace_back("sigma_r", format_number(p.sigma_r));
      table.meta.emplace_back("sigma_i", format_number(p.sigma_i));
      table.meta.emplace_back("n", std::to_string(sim.n));
      table.meta.emplace_back("d", std::to_string(sim.d));
      table.meta.emplace_back("t_max", std::to_string(sim.t_max));
      table.meta.emplace_back("seed", std::to_string(sim.seed));
      const Trace trace = run_twin_experiment(sim, p, sim.seed);
      add_trace_rows(table, trace);
      if (trace.divergent) result.exit_code = kAllDiverged;
      break;
    }
    case Command::TraceRk: {
      table.meta.emplace_back("sigma_r", format_number(p.sigma_r));
      table.meta.emplace_back("sigma_i", format_number(p.sigma_i));
      table.meta.emplace_back("t_max", std::to_string(spec.t_max));
      const Trace trace = rk_trace(p, spec.t_max);
      add_trace_rows(table, trace);
      if (trace.divergent) result.exit_code = kAllDiverged;
      break;
    }
    case Command::PhaseDiagram: {
      table.meta.emplace_back("grid_r", grid_text(*spec.grid_r));
      table.meta.emplace_back("grid_i", grid_text(*spec.grid_i));
      table.meta.emplace_back("t_max", std::to_string(spec.t_max));
      table.meta.emplace_back("tol", format_number(spec.tol));
      const PhaseDiagram diagram =
          phase_diagram(p.activation, *spec.grid_r, *spec.grid_i, spec.t_max, spec.tol, spec.jobs);
      table.columns = {"sigma_r", "sigma_i", "metric_final", "label"};
      std::size_t divergent = 0, failed = 0;
      for (const auto& cell : diagram.cells) {
        table.rows.push_back(
            {cell.sigma_r, cell.sigma_i, cell.metric_final, std::string(to_string(cell.label))});
        divergent += cell.label == Regime::Divergent;
        failed += cell.label == Regime::Undefined;
      }
      if (failed == diagram.cells.size())
        result.exit_code = kDomain;
      else if (divergent + failed == diagram.cells.size())
        result.exit_code = kAllDiverged;
      break;
    }
    case Command::Frontier: {
      table.columns = {"sigma_r", "sigma_i_frontier"};
      if (spec.frontier_sigma_i) {
        table.meta.emplace_back("sigma_i", format_number(*spec.frontier_sigma_i));
        table.rows.push_back({erf_frontier_sigma_r(*spec.frontier_sigma_i), *spec.frontier_sigma_i});
      } else if (spec.frontier_sigma_r) {
        table.meta.emplace_back("sigma_r", format_number(*spec.frontier_sigma_r));
        table.rows.push_back({*spec.frontier_sigma_r, erf_frontier_sigma_i(*spec.frontier_sigma_r)});
      } else {
        table.meta.emplace_back("grid_r", grid_text(*spec.grid_r));
        // Grid points below sqrt(pi)/2 lie outside the frontier's domain.
        for (double sr : spec.grid_r->values())
          if (sr >= erf_critical_sigma_r()) table.rows.push_back({sr, erf_frontier_sigma_i(sr)});
        if (table.rows.empty())
          throw DomainError("--grid-r: no grid point reaches sqrt(pi)/2, the frontier's domain");
      }
      break;
    }
    case Command::Converge: {
      const SimConfig& sim = *spec.sim;
      table.meta.emplace_back("grid_r", grid_text(*spec.grid_r));
      table.meta.emplace_back("grid_i", grid_text(*spec.grid_i));
      table.meta.emplace_back("n", std::to_string(sim.n));
      table.meta.emplace_back("d", std::to_string(sim.d));
      table.meta.emplace_back("t_len", std::to_string(sim.t_max));
      table.meta.emplace_back("seed", std::to_string(sim.seed));
      const auto cells = convergence_sweep(p.activation, *spec.grid_r, *spec.grid_i, sim.n,
                                           sim.t_max, sim.seed, sim.d, spec.jobs);
      table.columns = {"sigma_r", "sigma_i", "n", "e_value", "flag"};
      std::size_t divergent = 0, failed = 0;
      for (const auto& cell : cells) {
        table.rows.push_back({cell.sigma_r, cell.sigma_i, static_cast<std::int64_t>(cell.n),
                              cell.e_value, std::string(to_string(cell.flag))});
        divergent += cell.flag == CellFlag::Divergent;
        failed += cell.flag == CellFlag::Error;
      }
      if (failed == cells.size())
        result.exit_code = kDomain;
      else if (divergent + failed == cells.size())
        result.exit_code = kAllDiverged;
      break;
    }
    case Command::FixedPoints: {
      table.meta.emplace_back("sigma_r", format_number(p.sigma_r));
      table.meta.emplace_back("sigma_i", format_number(p.sigma_i));
      table.meta.emplace_back("tol", format_number(spec.tol));
      table.columns = {"sigma_r", "sigma_i", "a", "b", "limit_value", "label"};
      const RegimeLabel regime = rk_limit(p, spec.tol);
      double a = 0.0, b = 0.0;
      switch (p.activation) {
        case Activation::Erf:
          a = erf_fixed_point_a(p, kDefaultSolverTol).value;
          b = erf_fixed_point_b(p, a, kDefaultSolverTol).value;
          break;
        case Activation::Sign:
          a = 1.0;
          b = sign_fixed_point_b(p, kDefaultSolverTol).value;
          break;
        case Activation::ReLU: {
          const double sr2 = p.sigma_r * p.sigma_r;
          a = sr2 < 2.0 ? p.sigma_i * p.sigma_i / (2.0 - sr2) : std::numeric_limits<double>::infinity();
          b = a;
          break;
        }
      }
      table.rows.push_back({p.sigma_r, p.sigma_i, a, b, regime.limit_value,
                            std::string(to_string(regime.label))});
      if (regime.label == Regime::Divergent) result.exit_code = kAllDiverged;
      break;
    }
  }
  return result;
}

int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  RunResult result;
  try {
    result = evaluate(spec);
  } catch (const DomainError& e) {
    err << "rkstab: domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "rkstab: error: " << e.what() << '\n';
    return kFailure;
  }

  const auto serialize = [&](std::ostream& os) {
    if (spec.format == Format::Json)
      write_json(result.table, os);
    else
      write_csv(result.table, os);
  };

  if (spec.out_path == "-") {
    serialize(out);
    return result.exit_code;
  }

  namespace fs = std::filesystem;
  const fs::path target(spec.out_path);
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "rkstab: cannot open " << temp.string() << " for writing\n";
      return kFailure;
    }
    serialize(file);
    file.flush();
    if (!file) {
      err << "rkstab: write to " << temp.string() << " failed\n";
      std::error_code ec;
      fs::remove(temp, ec);
      return kFailure;
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    err << "rkstab: cannot rename " << temp.string() << " to " << target.string() << ": "
        << ec.message() << '\n';
    fs::remove(temp, ec);
    return kFailure;
  }
  return result.exit_code;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  try {
    std::string help;
    spec = parse_args(args, &help);
    if (!help.empty()) {
      out << help;
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "rkstab: usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  }
  return run(spec, out, err);
}

}  // namespace rkstab::cli
