#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kaonbell {

using Cell = std::variant<double, long long, bool, std::string>;

/// Column-ordered records shared by the CSV and JSON writers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument if the row width differs from the header.
  void add_row(std::vector<Cell> row);
};

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(std::string_view name);

/// Scientific notation with 12 significant digits, e.g. 7.19043512345e-02.
std::string format_number(double value);

void write_csv(const Table& table, std::ostream& out);
/// An array of objects, one per row, keys in column order.
void write_json(const Table& table, std::ostream& out);
void write_table(const Table& table, OutputFormat format, std::ostream& out);

}  // namespace kaonbell
