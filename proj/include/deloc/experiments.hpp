#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "deloc/svg_plot.hpp"

namespace deloc {

/// Result table written as results.csv. Doubles print with %.17g so the file
/// round-trips exactly.
class Table {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  Table() = default;
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Throws InputError when the row width does not match the header.
  void add(std::vector<Cell> row);
  void append(const Table& other);

  std::size_t column(const std::string& name) const;
  /// Numeric view of a column (integers widened, strings parsed).
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
  /// Rows whose column `name` equals `value`.
  Table where(const std::string& name, const std::string& value) const;

  std::string to_csv() const;
  static Table parse_csv(const std::string& text);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Table::Cell& c);

struct RunContext {
  std::filesystem::path out_dir = "out";
  /// Override the config's seed / thread count (command-line flags).
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool write_files = true;
};

struct ExperimentResult {
  std::string experiment;
  Table table;
  nlohmann::json summary;
  /// Extra CSVs written next to results.csv, by file name.
  std::vector<std::pair<std::string, Table>> extra_tables;
  std::vector<std::pair<std::string, Chart>> plots;
  double wall_seconds = 0.0;
};

/// Subcommand names accepted by run_experiment.
const std::vector<std::string>& experiment_kinds();

/// Validates `config` for `kind`, runs it and (when ctx.write_files) writes
/// results.csv, summary.json, timing.json and plots/*.svg under ctx.out_dir.
/// Throws ConfigError for schema problems and Error for runtime failures.
ExperimentResult run_experiment(const std::string& kind, const nlohmann::json& config, const RunContext& ctx);

/// Charts for a result table; a pure function of (kind, table) so plots can be
/// regenerated from results.csv alone.
std::vector<std::pair<std::string, Chart>> plots_for(const std::string& kind, const Table& table);

}  // namespace deloc
