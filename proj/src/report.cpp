#include "mcl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/text_config.hpp"

namespace mcl {

namespace {

constexpr const char* kGapMagic = "# mcl-gap-report v1";
constexpr const char* kGapColumns = "instance_id,policy_name,detail,gain,optimal_gain,gap_percent";
constexpr const char* kTimingMagic = "# mcl-timings v1";

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') {
      c = c == ',' ? ';' : ' ';
    }
  }
  return text;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

std::string fixed(double x, int digits) {
  if (std::isnan(x)) {
    return "-";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

std::string write_gap_csv(const std::vector<GapReport>& reports) {
  std::ostringstream out;
  out << kGapMagic << '\n' << kGapColumns << '\n';
  for (const auto& report : reports) {
    for (const auto& row : report.rows) {
      out << row.instance_id << ',' << row.policy_name << ',' << sanitize(row.detail) << ','
          << format_double(row.gain) << ',' << format_double(row.optimal_gain) << ','
          << format_double(row.gap_percent) << '\n';
    }
    if (!report.error.empty()) {
      out << report.instance_id << ",error," << sanitize(report.error) << ",,,\n";
    }
  }
  return out.str();
}

std::vector<GapReport> read_gap_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kGapMagic) {
    throw ValidationError(std::string("gap report: missing '") + kGapMagic + "' header");
  }
  if (!std::getline(in, line) || line != kGapColumns) {
    throw ValidationError("gap report: unexpected column header");
  }
  std::vector<GapReport> reports;
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto f = split_row(line);
    if (f.size() != 6) {
      throw ValidationError("gap report:" + std::to_string(lineno) + ": expected 6 fields");
    }
    if (reports.empty() || reports.back().instance_id != f[0]) {
      reports.emplace_back();
      reports.back().instance_id = f[0];
    }
    auto& report = reports.back();
    if (f[1] == "error") {
      report.error = f[2];
      continue;
    }
    GapRow row{f[0], f[1], f[2], parse_double(f[3]), parse_double(f[4]), parse_double(f[5])};
    report.optimal_gain = row.optimal_gain;
    if (row.policy_name == "best_base_stock" && row.detail.rfind("S=", 0) == 0) {
      report.base_stock_level = std::stoi(row.detail.substr(2));
    }
    if (row.policy_name == "mcl_best" && row.detail.rfind("generation=", 0) == 0) {
      report.best_generation = std::stoi(row.detail.substr(11));
    }
    report.rows.push_back(std::move(row));
  }
  return reports;
}

std::string write_timings_csv(const std::vector<GapReport>& reports) {
  std::ostringstream out;
  out << kTimingMagic << "\ninstance_id,phase,seconds\n";
  for (const auto& report : reports) {
    for (const auto& t : report.timings) {
      out << report.instance_id << ',' << t.phase << ',' << fixed(t.seconds, 3) << '\n';
    }
  }
  return out.str();
}

std::string render_gap_table(const std::vector<GapReport>& reports) {
  std::vector<std::string> policies;
  for (const auto& report : reports) {
    for (const auto& row : report.rows) {
      if (std::find(policies.begin(), policies.end(), row.policy_name) == policies.end()) {
        policies.push_back(row.policy_name);
      }
    }
  }

  // cells[r][c]: r = 0 header, 1 optimal gain, then one row per policy.
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"gap %"});
  cells.push_back({"optimal gain"});
  for (const auto& p : policies) {
    cells.push_back({p});
  }
  for (const auto& report : reports) {
    cells[0].push_back(report.instance_id);
    cells[1].push_back(report.rows.empty() ? "-" : fixed(report.optimal_gain, 4));
    for (std::size_t k = 0; k < policies.size(); ++k) {
      const auto* row = report.find(policies[k]);
      std::string cell = row != nullptr ? fixed(row->gap_percent, 4) : "-";
      if (row != nullptr && !row->detail.empty() && policies[k] != "pi0" &&
          policies[k].rfind("mcl_gen", 0) != 0) {
        cell += " (" + row->detail + ")";
      }
      cells[k + 2].push_back(cell);
    }
  }
  bool any_error = false;
  for (const auto& report : reports) {
    any_error = any_error || !report.error.empty();
  }
  if (any_error) {
    cells.push_back({"status"});
    for (const auto& report : reports) {
      cells.back().push_back(report.error.empty() ? "ok" : "error");
    }
  }

  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << r[c] << std::string(width[c] - r[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  }
  for (const auto& report : reports) {
    if (!report.error.empty()) {
      out << report.instance_id << ": " << report.error << '\n';
    }
  }
  return out.str();
}

}  // namespace mcl
