#include "despar/csv.hpp"

#include "despar/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace despar {

namespace {

std::string where(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::vector<std::string> split(const std::string& raw) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = cell.find_first_not_of(" \t");
    const auto last = cell.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool looks_numeric(const std::string& cell) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

double parse_number(const std::string& cell, std::size_t line, std::size_t column) {
  std::string_view s = cell;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::ParseError, "invalid number '" + cell + "' at " + where(line, column));
  return v;
}

// Reads header plus numeric rows; strips a UTF-8 BOM and skips blank lines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& in) {
  Table table;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(raw);
    if (!have_header) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].empty())
          throw Error(ErrorCode::ParseError, "empty column name at " + where(line_no, c + 1));
        if (looks_numeric(cells[c]))
          throw Error(ErrorCode::ParseError,
                      "missing header row (numeric field at " + where(line_no, c + 1) + ")");
      }
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(cells.size()) + " at " +
                      where(line_no, std::min(cells.size(), table.header.size()) + 1));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_number(cells[c], line_no, c + 1);
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "empty input: missing header row");
  return table;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return in;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  Table table = read_table(in);
  const auto cols = static_cast<Index>(table.header.size());
  if (cols < 2) throw Error(ErrorCode::ParseError, "need a response column and at least one regressor");
  if (table.rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
  const auto T = static_cast<Index>(table.rows.size());
  Eigen::VectorXd y(T);
  Eigen::MatrixXd X(T, cols - 1);
  for (Index t = 0; t < T; ++t) {
    const auto& row = table.rows[static_cast<std::size_t>(t)];
    y(t) = row[0];
    for (Index j = 1; j < cols; ++j) X(t, j - 1) = row[static_cast<std::size_t>(j)];
  }
  std::vector<std::string> names(table.header.begin() + 1, table.header.end());
  return Dataset(std::move(y), std::move(X), std::move(names));
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open(path);
  return read_dataset_csv(in);
}

Restriction read_restriction_csv(std::istream& in, std::span<const std::string> targets,
                                 std::span<const Index> H) {
  if (targets.size() != H.size())
    throw Error(ErrorCode::InvalidArgument, "target names and indices differ in length");
  Table table = read_table(in);
  std::map<std::string, Index> position;
  for (std::size_t i = 0; i < targets.size(); ++i) position[targets[i]] = static_cast<Index>(i);

  std::vector<Index> col_target(table.header.size(), -1);
  Index q_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name == "q") {
      q_col = static_cast<Index>(c);
      continue;
    }
    const auto it = position.find(name);
    if (it == position.end())
      throw Error(ErrorCode::UnknownColumn, "restriction column '" + name + "' is not a target");
    col_target[c] = it->second;
  }
  if (q_col < 0) throw Error(ErrorCode::ParseError, "restriction file lacks a 'q' column");
  if (table.rows.empty()) throw Error(ErrorCode::ParseError, "restriction file has no rows");

  Restriction r;
  r.H.assign(H.begin(), H.end());
  const auto P = static_cast<Index>(table.rows.size());
  r.R = Eigen::MatrixXd::Zero(P, static_cast<Index>(H.size()));
  r.q.resize(P);
  for (Index p = 0; p < P; ++p) {
    const auto& row = table.rows[static_cast<std::size_t>(p)];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (static_cast<Index>(c) == q_col)
        r.q(p) = row[c];
      else
        r.R(p, col_target[c]) = row[c];
    }
  }
  r.validate();
  return r;
}

Restriction read_restriction_csv(const std::string& path, std::span<const std::string> targets,
                                 std::span<const Index> H) {
  auto in = open(path);
  return read_restriction_csv(in, targets, H);
}

}  // namespace despar
