#include "safe_etc/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace safe_etc {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("csv: not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::size_t parse_size(std::string_view text) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("csv: not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

bool parse_flag(std::string_view text) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw IoError("csv: flag must be 0 or 1, got '" + std::string(text) + "'");
}

void require_2d(const ThetaPoint& theta) {
  if (theta.size() != 2) throw IoError("csv: theta columns assume a two-dimensional parameter");
}

}  // namespace

std::string trajectory_header(std::size_t state_dim, std::size_t input_dim) {
  std::string header = "t";
  for (std::size_t i = 1; i <= state_dim; ++i) header += ",x" + std::to_string(i);
  if (input_dim == 1) {
    header += ",u";
  } else {
    for (std::size_t i = 1; i <= input_dim; ++i) header += ",u" + std::to_string(i);
  }
  header += ",event";
  return header;
}

std::string run_log_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream out;
  out << kRunLogHeader << '\n';
  for (const auto& r : records) {
    require_2d(r.theta);
    out << r.j << ',' << format_double(r.theta[0]) << ',' << format_double(r.theta[1]) << ','
        << format_double(r.y_g) << ',' << format_double(r.y_s) << ',' << format_double(r.beta_g) << ','
        << format_double(r.beta_s) << ',' << r.size_theta_s << ',' << r.size_theta << ','
        << format_double(r.acq_value) << '\n';
  }
  return out.str();
}

std::string grid_sets_csv(const GridSets& sets) {
  std::ostringstream out;
  out << kGridSetsHeader << '\n';
  for (std::size_t i = 0; i < sets.grid.size(); ++i) {
    const ThetaPoint& p = sets.grid.point(i);
    require_2d(p);
    out << format_double(p[0]) << ',' << format_double(p[1]) << ',' << int(sets.in_theta_s[i] != 0) << ','
        << int(sets.in_theta[i] != 0) << '\n';
  }
  return out.str();
}

std::string initial_samples_csv(const std::vector<Sample>& samples) {
  std::ostringstream out;
  out << "i,theta1,theta2,y_g,y_s\n";
  std::size_t i = 1;
  for (const auto& s : samples) {
    require_2d(s.theta);
    out << i++ << ',' << format_double(s.theta[0]) << ',' << format_double(s.theta[1]) << ','
        << format_double(s.y_g) << ',' << format_double(s.y_s) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj, std::size_t decimation) {
  if (decimation == 0) decimation = 1;
  std::ostringstream out;
  out << trajectory_header(static_cast<std::size_t>(traj.states.rows()),
                           static_cast<std::size_t>(traj.inputs.rows()))
      << '\n';
  const std::size_t n = traj.samples();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % decimation != 0 && i + 1 != n) continue;
    const auto c = static_cast<Eigen::Index>(i);
    out << format_double(traj.times[i]);
    for (Eigen::Index r = 0; r < traj.states.rows(); ++r) out << ',' << format_double(traj.states(r, c));
    for (Eigen::Index r = 0; r < traj.inputs.rows(); ++r) out << ',' << format_double(traj.inputs(r, c));
    out << ',' << int(traj.events[i] != 0) << '\n';
  }
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::string_view expected_header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    throw IoError("csv: expected header '" + std::string(expected_header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::vector<IterationRecord> parse_run_log(const std::string& text) {
  std::vector<IterationRecord> records;
  for (const auto& f : parse_csv(text, kRunLogHeader)) {
    if (f.size() != 10) throw IoError("run_log: expected 10 columns");
    IterationRecord r;
    r.j = parse_size(f[0]);
    r.theta = ThetaPoint(2);
    r.theta << parse_double(f[1]), parse_double(f[2]);
    r.y_g = parse_double(f[3]);
    r.y_s = parse_double(f[4]);
    r.beta_g = parse_double(f[5]);
    r.beta_s = parse_double(f[6]);
    r.size_theta_s = parse_size(f[7]);
    r.size_theta = parse_size(f[8]);
    r.acq_value = parse_double(f[9]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<GridRow> parse_grid_sets(const std::string& text) {
  std::vector<GridRow> rows;
  for (const auto& f : parse_csv(text, kGridSetsHeader)) {
    if (f.size() != 4) throw IoError("grid_sets: expected 4 columns");
    GridRow row;
    row.theta = ThetaPoint(2);
    row.theta << parse_double(f[0]), parse_double(f[1]);
    row.in_theta_s = parse_flag(f[2]);
    row.in_theta = parse_flag(f[3]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace safe_etc
