#include "kaonbell/table.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace kaonbell {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the header");
  rows.push_back(std::move(row));
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", value == 0.0 ? 0.0 : value);
  return buf;
}

namespace {

std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string quoted = "\"";
      for (char c : v) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + '"';
    }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
}

void write_json(const Table& table, std::ostream& out) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json record = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              record[table.columns[i]] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
            } else {
              record[table.columns[i]] = v;
            }
          },
          row[i]);
    }
    records.push_back(std::move(record));
  }
  out << records.dump(2) << '\n';
}

void write_table(const Table& table, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::csv) {
    write_csv(table, out);
  } else {
    write_json(table, out);
  }
}

}  // namespace kaonbell
