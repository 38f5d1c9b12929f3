#include "mtdiff/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mtdiff/error.hpp"

namespace mtdiff {

namespace {

bool valid_name(const std::string& s) {
  return !s.empty() && s.find_first_of(",\"\n\r") == std::string::npos;
}

auto row_key(const ResultRow& r) { return std::tie(r.experiment, r.agent, r.alpha, r.metric); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError("results line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return x;
}

std::uint64_t parse_unsigned(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || end != s.c_str() + s.size()) {
    throw ValidationError("results line " + std::to_string(line) + ": '" + s + "' is not a nonnegative integer");
  }
  return x;
}

}  // namespace

bool is_probability_metric(const std::string& metric) {
  return metric.rfind("error", 0) == 0 || metric.rfind("type1", 0) == 0 || metric.rfind("type2", 0) == 0 ||
         metric.rfind("bound", 0) == 0 || metric.rfind("correct", 0) == 0;
}

double round_significant(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

const char* library_version() { return MTDIFF_VERSION; }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ResultTable::add(ResultRow row) {
  if (!valid_name(row.experiment)) throw ValidationError("invalid experiment name '" + row.experiment + "'");
  if (!valid_name(row.metric)) throw ValidationError("invalid metric name '" + row.metric + "'");
  if (row.runs == 0) throw ValidationError("result row " + row.experiment + "/" + row.metric + " has no runs");
  if (!std::isfinite(row.value)) throw NumericalError("non-finite value for " + row.experiment + "/" + row.metric);
  if (is_probability_metric(row.metric) && (row.value < 0.0 || row.value > 1.0)) {
    throw NumericalError("probability " + row.metric + " = " + std::to_string(row.value) + " outside [0, 1]");
  }
  row.alpha = round_significant(row.alpha);
  row.value = round_significant(row.value);
  row.std_error = round_significant(row.std_error);
  rows_.push_back(std::move(row));
}

void ResultTable::append(const ResultTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  if (metadata.spec_hash.empty()) metadata = other.metadata;
}

void ResultTable::sort() {
  std::stable_sort(rows_.begin(), rows_.end(),
                   [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
}

std::optional<ResultRow> ResultTable::find(const std::string& experiment, AgentId agent, double alpha,
                                           const std::string& metric) const {
  const double a = round_significant(alpha);
  for (const ResultRow& r : rows_) {
    if (r.experiment == experiment && r.agent == agent && r.alpha == a && r.metric == metric) return r;
  }
  return std::nullopt;
}

void write_csv(std::ostream& out, const ResultTable& table) {
  ResultTable sorted = table;
  sorted.sort();
  out << kCsvHeader << '\n';
  for (const ResultRow& r : sorted.rows()) {
    out << r.experiment << ',' << r.agent + 1 << ',' << format_number(r.alpha) << ',' << r.metric << ','
        << format_number(r.value) << ',' << format_number(r.std_error) << ',' << r.runs << ',' << r.seed << '\n';
  }
}

ResultTable read_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("results file lacks the expected header");
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 8) throw ValidationError("results line " + std::to_string(n) + ": expected 8 columns");
    ResultRow r;
    r.experiment = cells[0];
    const std::uint64_t agent = parse_unsigned(cells[1], n);
    if (agent == 0) throw ValidationError("results line " + std::to_string(n) + ": agent ids start at 1");
    r.agent = agent - 1;
    r.alpha = parse_double(cells[2], n);
    r.metric = cells[3];
    r.value = parse_double(cells[4], n);
    r.std_error = parse_double(cells[5], n);
    r.runs = parse_unsigned(cells[6], n);
    r.seed = parse_unsigned(cells[7], n);
    table.add(std::move(r));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_csv(out, table);
  }
  nlohmann::ordered_json meta;
  meta["spec_hash"] = table.metadata.spec_hash;
  meta["tool_version"] = table.metadata.tool_version;
  meta["columns"] = {"experiment", "agent", "alpha", "metric", "value", "stderr", "runs", "seed"};
  std::ofstream side(path.string() + ".meta.json", std::ios::binary);
  if (!side) throw ValidationError("cannot write " + path.string() + ".meta.json");
  side << meta.dump(2) << '\n';
}

ResultTable load_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  ResultTable table = read_csv(in);
  std::ifstream side(path.string() + ".meta.json", std::ios::binary);
  if (side) {
    try {
      const auto meta = nlohmann::json::parse(side);
      table.metadata.spec_hash = meta.value("spec_hash", "");
      table.metadata.tool_version = meta.value("tool_version", "");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("malformed metadata sidecar for " + path.string());
    }
  }
  return table;
}

ResultTable smooth_along_alpha(const ResultTable& table) {
  ResultTable sorted = table;
  sorted.sort();
  std::map<std::tuple<std::string, AgentId, std::string>, std::vector<ResultRow>> series;
  for (const ResultRow& r : sorted.rows()) series[{r.experiment, r.agent, r.metric}].push_back(r);
  ResultTable out;
  out.metadata = table.metadata;
  for (auto& [key, rows] : series) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(i + 1, rows.size() - 1);
      double sum = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) sum += rows[j].value;
      ResultRow r = rows[i];
      r.value = sum / static_cast<double>(hi - lo + 1);
      out.add(std::move(r));
    }
  }
  out.sort();
  return out;
}

}  // namespace mtdiff
