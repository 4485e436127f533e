#pragma once

#include "lqrlag/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lqrlag {

/// One check. pass <=> margin >= 0; for failed computations value is NaN and margin -1.
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
  std::string anchor;  // the statement the check exercises
  bool gating = true;  // non-gating records are reported but do not affect the exit code
  std::string note;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

class Certificate {
public:
  std::string scenario;
  std::string mode;
  unsigned seed = 42;
  std::vector<CheckRecord> records;
  std::map<std::string, CsvTable> tables;  // keyed by file name

  /// value <= bound
  CheckRecord& upper(const std::string& name, double value, double bound, const std::string& anchor,
                     bool gating = true);
  /// value >= bound
  CheckRecord& lower(const std::string& name, double value, double bound, const std::string& anchor,
                     bool gating = true);
  /// value > bound, realized as margin = value - bound with a zero margin counted as failure
  CheckRecord& strict_lower(const std::string& name, double value, double bound, const std::string& anchor,
                            bool gating = true);
  CheckRecord& flag(const std::string& name, bool ok, const std::string& anchor, bool gating = true);
  CheckRecord& info(const std::string& name, double value, const std::string& anchor);
  CheckRecord& failure(const std::string& name, const std::string& what, const std::string& anchor,
                       bool gating = true);

  const CheckRecord* find(const std::string& name) const;
  bool all_pass() const;  // over gating records
  int failed_count() const;

  nlohmann::json to_json() const;
};

/// Fixed CSV schemas; every file is written (header only when the table is absent).
std::vector<std::filesystem::path> export_plots(const Certificate& cert, const std::filesystem::path& out_dir);

/// The file names and headers export_plots writes.
const std::map<std::string, std::vector<std::string>>& csv_schemas();

std::string to_csv(const CsvTable& table);

}  // namespace lqrlag
