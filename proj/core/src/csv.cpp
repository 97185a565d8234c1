#include "reinsure/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reinsure::csv {

std::string format(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string value_policy(const ValueGrid& values) {
  std::string out = kValuePolicyHeader;
  out += '\n';
  for (std::size_t j = 0; j < values.grid.size(); ++j) {
    out += format(values.grid.y(j)) + ',' + format(values.grid.x(j)) + ',' +
           format(values.psi[j]) + ',' + format(values.u_star[j]) + ',' +
           (values.dividend_flag[j] ? '1' : '0') + '\n';
  }
  return out;
}

std::string solve_report(const SolveReport& report, double barrier) {
  std::ostringstream out;
  out << kSolveReportHeader << '\n'
      << report.iterations << ',' << format(report.sup_residual) << ','
      << (report.converged ? 1 : 0) << ',' << report.policy_changes_last_iter << ','
      << report.total_sweeps << ',' << (report.m_matrix_ok ? 1 : 0) << ',' << format(barrier)
      << '\n';
  return out.str();
}

std::string estimates(std::span<const EstimateRow> rows) {
  std::ostringstream out;
  out << kEstimateHeader << '\n';
  for (const auto& row : rows)
    out << format(row.x0) << ',' << format(row.estimate.mean) << ','
        << format(row.estimate.std_error) << ',' << row.estimate.paths << ','
        << row.estimate.seed << '\n';
  return out.str();
}

std::string path_events(std::size_t path_id, const PathRecord& record, bool with_header) {
  std::ostringstream out;
  if (with_header) out << kPathHeader << '\n';
  for (const auto& e : record.events)
    out << path_id << ',' << format(e.time) << ',' << to_string(e.kind) << ','
        << format(e.reserve_after) << ',' << format(e.amount) << '\n';
  return out.str();
}

std::string verify_report(std::span<const PropertyReport> reports) {
  std::ostringstream out;
  out << kVerifyHeader << '\n';
  for (const auto& r : reports) {
    std::string location = r.location;
    for (auto& ch : location)
      if (ch == ',') ch = ';';
    out << r.name << ',' << (r.passed ? 1 : 0) << ',' << format(r.worst_violation) << ','
        << location << '\n';
  }
  return out.str();
}

std::string counterexample(const CounterexampleRow& row) {
  std::ostringstream out;
  const auto& res = row.result;
  out << kCounterexampleHeader << '\n'
      << format(row.r) << ',' << format(res.analytic) << ',' << format(res.dividend.mean) << ','
      << format(res.dividend.std_error) << ',' << res.dividend.paths << ',' << res.dividend.seed
      << ',' << format(res.survival.mean) << ',' << format(res.survival.std_error) << ','
      << format(res.survival_analytic) << ',' << format(row.grid_x1) << ','
      << format(row.grid_v_x1) << ',' << format(row.grid_k) << '\n';
  return out.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + text + "'");
  }
}

} // namespace

ValueGrid parse_value_policy(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kValuePolicyHeader)
    throw std::runtime_error("value/policy table must start with header '" +
                             std::string(kValuePolicyHeader) + "'");
  struct Row {
    double y, psi, u;
    bool flag;
  };
  std::vector<Row> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw std::runtime_error("line " + std::to_string(number) + ": expected 5 fields");
    if (f[4] != "0" && f[4] != "1")
      throw std::runtime_error("line " + std::to_string(number) + ": dividend_flag must be 0 or 1");
    rows.push_back({to_double(f[0], number), to_double(f[2], number), to_double(f[3], number),
                    f[4] == "1"});
  }
  if (rows.size() < 3) throw std::runtime_error("value/policy table needs at least 3 rows");

  ValueGrid values{Grid(rows.size())};
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (std::abs(rows[j].y - values.grid.y(j)) > 1e-12)
      throw std::runtime_error("row " + std::to_string(j) + " is not on the uniform mesh y_j = j/n");
    values.psi[j] = rows[j].psi;
    values.u_star[j] = rows[j].u;
    values.dividend_flag[j] = rows[j].flag;
  }
  return values;
}

ValueGrid read_value_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_value_policy(text.str());
}

} // namespace reinsure::csv
