#include "piconsensus/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace piconsensus {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string indexed(const char* prefix, std::size_t i) { return prefix + std::to_string(i + 1); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("trajectory CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
  return v;
}

bool close(double a, double b) {
  return a == b || std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::vector<std::string> csv_columns(const StateLayout& layout) {
  const std::size_t n = layout.agents();
  std::vector<std::string> cols{"t"};
  auto family = [&](const char* prefix) {
    for (std::size_t i = 0; i < n; ++i) cols.push_back(indexed(prefix, i));
  };
  family("x_");
  if (layout.order() == 2) family("v_");
  family("w_");
  family("z_");
  if (layout.order() == 2) family("s_");
  family("zeta_");
  family("u_");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < layout.theta_hat_size(i); ++k) {
      cols.push_back("theta_hat_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
    }
  }
  return cols;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const StateLayout& L = traj.layout;
  const std::size_t n = L.agents();
  const auto cols = csv_columns(L);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";

  char buf[40];
  std::string line;
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += ',';
    line += buf;
  };
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const SampleRecord& r = traj.records[k];
    std::snprintf(buf, sizeof buf, "%.17g", traj.time[k]);
    line = buf;
    for (std::size_t i = 0; i < n; ++i) put(traj.value(k, L.x(i)));
    if (L.order() == 2) for (std::size_t i = 0; i < n; ++i) put(traj.value(k, L.v(i)));
    for (std::size_t i = 0; i < n; ++i) put(traj.value(k, L.w(i)));
    for (std::size_t i = 0; i < n; ++i) put(r.z(idx(i)));
    if (L.order() == 2) for (std::size_t i = 0; i < n; ++i) put(r.s(idx(i)));
    for (std::size_t i = 0; i < n; ++i) put(traj.value(k, L.zeta(i)));
    for (std::size_t i = 0; i < n; ++i) put(r.u(idx(i)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < L.theta_hat_size(i); ++c) put(traj.value(k, L.theta_hat(i) + c));
    }
    line += '\n';
    out << line;
  }
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_trajectory_csv(out, traj);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Trajectory read_trajectory_csv(std::istream& in, const Scenario& scenario) {
  const ClosedLoop loop(scenario);
  const StateLayout& L = loop.layout();
  const std::size_t n = L.agents();
  const auto expected = csv_columns(L);

  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split(line) != expected) {
    throw InvalidArgument("trajectory CSV header does not match the scenario layout");
  }

  std::vector<double> time;
  std::vector<Eigen::VectorXd> states;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != expected.size()) {
      throw InvalidArgument("trajectory CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected.size()) + " columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(to_double(c, line_no));

    Eigen::VectorXd y(idx(L.size()));
    std::size_t col = 1;
    for (std::size_t i = 0; i < n; ++i) y(idx(L.x(i))) = row[col++];
    if (L.order() == 2) for (std::size_t i = 0; i < n; ++i) y(idx(L.v(i))) = row[col++];
    for (std::size_t i = 0; i < n; ++i) y(idx(L.w(i))) = row[col++];
    col += n;                           // z
    if (L.order() == 2) col += n;       // s
    for (std::size_t i = 0; i < n; ++i) y(idx(L.zeta(i))) = row[col++];
    col += n;                           // u
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < L.theta_hat_size(i); ++c) y(idx(L.theta_hat(i) + c)) = row[col++];
    }
    if (!time.empty() && !(row[0] > time.back())) {
      throw InvalidArgument("trajectory CSV line " + std::to_string(line_no) +
                            ": time must be strictly increasing");
    }
    time.push_back(row[0]);
    states.push_back(std::move(y));
    rows.push_back(std::move(row));
  }
  if (time.empty()) throw InvalidArgument("trajectory CSV has no samples");

  Trajectory traj = rebuild_trajectory(scenario, std::move(time), std::move(states));
  const std::size_t z_col = 1 + n * static_cast<std::size_t>(L.order()) + n;
  const std::size_t u_col = z_col + n * static_cast<std::size_t>(L.order()) + n;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!close(rows[k][z_col + i], traj.records[k].z(idx(i))) ||
          !close(rows[k][u_col + i], traj.records[k].u(idx(i)))) {
        throw InvalidArgument("trajectory CSV row " + std::to_string(k + 2) +
                              " is inconsistent with the scenario (z or u differs)");
      }
    }
  }
  return traj;
}

Trajectory load_trajectory_csv(const std::filesystem::path& path, const Scenario& scenario) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory '" + path.string() + "'");
  return read_trajectory_csv(in, scenario);
}

}  // namespace piconsensus
