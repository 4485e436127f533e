#include "lqrlag/certificate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace lqrlag {

namespace {

CheckRecord& push(std::vector<CheckRecord>& recs, CheckRecord r) {
  recs.push_back(std::move(r));
  return recs.back();
}

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

CheckRecord& Certificate::upper(const std::string& name, double value, double bound, const std::string& anchor,
                                bool gating) {
  const double margin = std::isnan(value) ? -1.0 : bound - value;
  return push(records, {name, value, bound, margin, margin >= 0.0, anchor, gating, ""});
}

CheckRecord& Certificate::lower(const std::string& name, double value, double bound, const std::string& anchor,
                                bool gating) {
  const double margin = std::isnan(value) ? -1.0 : value - bound;
  return push(records, {name, value, bound, margin, margin >= 0.0, anchor, gating, ""});
}

CheckRecord& Certificate::strict_lower(const std::string& name, double value, double bound,
                                       const std::string& anchor, bool gating) {
  double margin = std::isnan(value) ? -1.0 : value - bound;
  if (margin == 0.0) margin = -std::numeric_limits<double>::min();
  return push(records, {name, value, bound, margin, margin >= 0.0, anchor, gating, ""});
}

CheckRecord& Certificate::flag(const std::string& name, bool ok, const std::string& anchor, bool gating) {
  return push(records, {name, ok ? 1.0 : 0.0, 1.0, ok ? 0.0 : -1.0, ok, anchor, gating, ""});
}

CheckRecord& Certificate::info(const std::string& name, double value, const std::string& anchor) {
  return push(records, {name, value, value, 0.0, true, anchor, false, ""});
}

CheckRecord& Certificate::failure(const std::string& name, const std::string& what, const std::string& anchor,
                                  bool gating) {
  return push(records,
              {name, std::numeric_limits<double>::quiet_NaN(), 0.0, -1.0, false, anchor, gating, what});
}

const CheckRecord* Certificate::find(const std::string& name) const {
  for (const CheckRecord& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

bool Certificate::all_pass() const { return failed_count() == 0; }

int Certificate::failed_count() const {
  int c = 0;
  for (const CheckRecord& r : records)
    if (r.gating && !r.pass) ++c;
  return c;
}

nlohmann::json Certificate::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["scenario"] = scenario;
  j["mode"] = mode;
  j["seed"] = seed;
  j["pass"] = all_pass();
  nlohmann::json recs = nlohmann::json::array();
  for (const CheckRecord& r : records) {
    nlohmann::json x;
    x["name"] = r.name;
    x["value"] = number(r.value);
    x["bound"] = number(r.bound);
    x["margin"] = number(r.margin);
    x["pass"] = r.pass;
    x["gating"] = r.gating;
    x["anchor"] = r.anchor;
    if (!r.note.empty()) x["note"] = r.note;
    recs.push_back(std::move(x));
  }
  j["records"] = std::move(recs);
  return j;
}

const std::map<std::string, std::vector<std::string>>& csv_schemas() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"freq_margin.csv", {"omega", "min_eig", "inv_norm"}},
      {"fibers.csv", {"phase", "grassmann_to_ref", "norm_Pq"}},
      {"continuity.csv", {"phase_offset", "m_distance", "grassmann"}},
      {"decay.csv", {"phase", "rate", "prefactor", "r_squared", "M_eps"}},
      {"gap_margins.csv", {"N", "k", "mu_bar", "margin_first", "margin_second", "pass"}},
  };
  return s;
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> export_plots(const Certificate& cert, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& [file, header] : csv_schemas()) {
    CsvTable t{header, {}};
    if (auto it = cert.tables.find(file); it != cert.tables.end()) t.rows = it->second.rows;
    const std::filesystem::path p = out_dir / file;
    std::ofstream os(p);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    os << to_csv(t);
    files.push_back(p);
  }
  return files;
}

}  // namespace lqrlag
