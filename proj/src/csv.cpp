#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "errors.hpp"

namespace opeid {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    rows.push_back(split_line(line));
  }
  return rows;
}

static double parse_number(const std::string& cell, const std::string& path, int line_no,
                           const std::string& column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  double value = 0.0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse '" + cell +
                     "' in column " + column);
  if (!std::isfinite(value))
    throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value in column " +
                     column);
  return value;
}

static int find_column(const std::vector<std::string>& header, const std::string& name,
                       const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw ParseError(path + ": column '" + name + "' not found in header");
}

LoadedDataset load_dataset(const std::string& path, const DatasetSchema& schema) {
  auto rows = read_csv(path);
  if (rows.empty()) throw ParseError(path + ": empty file, header row required");
  const auto& header = rows[0];

  std::vector<int> cov_cols;
  for (const auto& name : schema.covariates) cov_cols.push_back(find_column(header, name, path));
  int pb_col = find_column(header, schema.behavior_prob, path);
  int pe_col = find_column(header, schema.eval_prob, path);
  int a_col = find_column(header, schema.action, path);
  int y_col = find_column(header, schema.outcome, path);
  int mu_col = schema.mu_hat ? find_column(header, *schema.mu_hat, path) : -1;

  const int n = static_cast<int>(rows.size()) - 1;
  const int p = static_cast<int>(cov_cols.size());
  if (n < 1) throw ParseError(path + ": no data rows");
  if (p < 1) throw ParseError(path + ": schema must name at least one covariate column");

  LoadedDataset out;
  out.data.covariates.n = n;
  out.data.covariates.p = p;
  out.data.covariates.values.resize(static_cast<std::size_t>(n) * p);
  out.data.behavior_prob.resize(n);
  out.data.eval_prob.resize(n);
  out.data.action_taken.resize(n);
  out.data.outcome.resize(n);
  if (mu_col >= 0) out.mu = MuHat{std::vector<double>(n)};

  for (int i = 0; i < n; ++i) {
    const int line_no = i + 2;
    const auto& cells = rows[i + 1];
    if (cells.size() != header.size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    for (int k = 0; k < p; ++k)
      out.data.covariates.values[static_cast<std::size_t>(i) * p + k] =
          parse_number(cells[cov_cols[k]], path, line_no, schema.covariates[k]);
    out.data.behavior_prob[i] = parse_number(cells[pb_col], path, line_no, schema.behavior_prob);
    out.data.eval_prob[i] = parse_number(cells[pe_col], path, line_no, schema.eval_prob);
    double a = parse_number(cells[a_col], path, line_no, schema.action);
    if (a != 0.0 && a != 1.0)
      throw ParseError(path + ":" + std::to_string(line_no) + ": action must be 0 or 1");
    out.data.action_taken[i] = static_cast<std::uint8_t>(a);
    if (out.data.action_taken[i] == 1 && out.data.behavior_prob[i] == 0.0)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": action taken on a row with zero behavior probability");
    const std::string& ycell = cells[y_col];
    bool y_missing = ycell.empty();
    if (y_missing) {
      if (out.data.action_taken[i] == 1)
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": missing outcome on a row with action=1");
      out.data.outcome[i] = 0.0;
    } else {
      out.data.outcome[i] = parse_number(ycell, path, line_no, schema.outcome);
    }
    if (mu_col >= 0)
      out.mu->fitted[i] = parse_number(cells[mu_col], path, line_no, *schema.mu_hat);
  }

  try {
    out.data.validate();
    if (out.mu) out.mu->validate(n);
  } catch (const InvariantError& e) {
    throw InvariantError(path + ": " + e.what());
  }
  return out;
}

DatasetSchema canonical_schema(int p, bool with_mu) {
  DatasetSchema s;
  for (int k = 1; k <= p; ++k) s.covariates.push_back("x" + std::to_string(k));
  s.behavior_prob = "pb";
  s.eval_prob = "pe";
  s.action = "a";
  s.outcome = "y";
  if (with_mu) s.mu_hat = "mu";
  return s;
}

void save_dataset(const std::string& path, const LoggedDataset& data, const MuHat* mu) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  const int p = data.covariates.p;
  for (int k = 1; k <= p; ++k) out << "x" << k << ",";
  out << "pb,pe,a,y";
  if (mu) out << ",mu";
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int k = 0; k < p; ++k) out << format_double(data.covariates.at(i, k)) << ",";
    out << format_double(data.behavior_prob[i]) << "," << format_double(data.eval_prob[i]) << ","
        << int(data.action_taken[i]) << ",";
    if (data.action_taken[i] == 1) out << format_double(data.outcome[i]);
    if (mu) out << "," << format_double(mu->fitted[i]);
    out << "\n";
  }
}

Metric load_precomputed_metric(const std::string& path, int n) {
  auto rows = read_csv(path);
  if (static_cast<int>(rows.size()) != n)
    throw ParseError(path + ": expected " + std::to_string(n) + " rows, got " +
                     std::to_string(rows.size()));
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw ParseError(path + ":" + std::to_string(i + 1) + ": expected " + std::to_string(n) +
                       " columns");
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i) * n + j] = parse_number(rows[i][j], path, i + 1, "d");
  }
  return Metric::precomputed(std::move(m), n);
}

}  // namespace opeid
