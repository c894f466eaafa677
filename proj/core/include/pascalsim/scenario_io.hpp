#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pascalsim/montecarlo.hpp"

namespace pascalsim {

class ParseError : public DomainError {
 public:
  ParseError(int line, const std::string& msg)
      : DomainError("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::None;
  std::vector<double> values;
  bool operator==(const SweepSpec&) const = default;
};

struct OutputSpec {
  std::string csv;        // empty: standard output unless --out is given
  bool analytic = true;   // fill analytic_ser
  bool per_drone = false; // one row per drone instead of the drone average
  int range_nodes = 3;
  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioFile {
  Scenario scenario;
  SweepSpec sweep;
  OutputSpec output;
  std::size_t calibration_trials = 0;  // sampled mode: >0 replaces sigmas by AO-ML RMSE
  bool operator==(const ScenarioFile&) const = default;
};

ScenarioFile parse_scenario(std::string_view text);
std::string serialize_scenario(const ScenarioFile& file);

struct ResultRow {
  std::optional<double> axis_value;
  std::string equalizer;
  std::string drone;  // 1-based index or "all"
  std::optional<double> ser;
  std::optional<double> ci95;
  std::optional<double> rmse_theta;  // rad
  std::optional<double> rmse_d;      // m
  std::optional<double> rmse_fd;     // Hz
  std::optional<double> analytic_ser;
  std::optional<int> neumann_order;
  std::optional<int> taylor_order;
};

inline constexpr std::string_view kResultHeader =
    "axis_value,equalizer,drone,ser,ci95,rmse_theta,rmse_d,rmse_fd,analytic_ser,neumann_order,taylor_order";

/// Shortest round-trip-safe rendering with 6 significant digits; values below
/// 1e-3 in magnitude use compact scientific form such as 4.4e-4.
std::string format_value(double v);
std::string format_table(const std::vector<ResultRow>& rows);
/// Writes the CSV to a file, or to standard output for "-".
void emit_table(const std::vector<ResultRow>& rows, const std::string& destination);

struct RunFlags {
  std::optional<std::uint64_t> seed;
  bool analytic_only = false;
  bool mc_only = false;
  std::string out;  // overrides [output] csv
  int jobs = 1;
};

struct RunReport {
  std::vector<ResultRow> rows;
  std::string summary;
};

/// Executes the sweep described by a parsed file.
RunReport execute_scenario(const ScenarioFile& file, const RunFlags& flags);

/// Full CLI action: read, run, write. Returns 0 ok, 2 validation/I/O error,
/// 3 numerical failure; diagnostics go to err.
int run_scenario(const std::string& path, const RunFlags& flags, std::ostream& err);

}  // namespace pascalsim
