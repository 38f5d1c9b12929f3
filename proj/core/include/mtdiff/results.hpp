#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtdiff/network.hpp"

namespace mtdiff {

/// One measured quantity. `agent` is 0-based here and 1-based in CSV files.
struct ResultRow {
  std::string experiment;
  AgentId agent = 0;
  double alpha = 0.0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultMetadata {
  std::string spec_hash;  // 16 hex digits
  std::string tool_version;
};

/// Rows are stored the way they are written: floats rounded to 9 significant
/// digits on insertion, so emitting and re-loading a table is lossless.
class ResultTable {
 public:
  /// Rejects an empty experiment/metric name, separators in names, runs == 0
  /// and probability metrics outside [0, 1].
  void add(ResultRow row);
  void append(const ResultTable& other);
  /// Orders rows by (experiment, agent, alpha, metric).
  void sort();

  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::optional<ResultRow> find(const std::string& experiment, AgentId agent, double alpha,
                                const std::string& metric) const;

  ResultMetadata metadata;

 private:
  std::vector<ResultRow> rows_;
};

/// Metrics whose value is a probability and must lie in [0, 1].
bool is_probability_metric(const std::string& metric);

/// Round-trips through "%.9g".
double round_significant(double x);
std::string format_number(double x);

inline constexpr const char* kCsvHeader = "experiment,agent,alpha,metric,value,stderr,runs,seed";

/// Sorted CSV with LF endings.
void write_csv(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);

/// Writes `path` and the metadata sidecar `path.meta.json`.
void emit_results(const ResultTable& table, const std::filesystem::path& path);
ResultTable load_results(const std::filesystem::path& path);

/// Three-point moving average along alpha within each (experiment, agent,
/// metric) series; endpoints average themselves with their one neighbor. For plotting only.
ResultTable smooth_along_alpha(const ResultTable& table);

std::string hash_hex(std::uint64_t h);

/// Version string of this library build.
const char* library_version();

}  // namespace mtdiff
