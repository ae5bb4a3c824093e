// SPDX-License-Identifier: Apache-2.0
#include "preim/archive.hpp"

#include <fstream>
#include <stdexcept>

#include "preim/csv.hpp"

namespace preim {
namespace {

Matrix read_shaped(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
  Matrix m = read_matrix_csv(path);
  if (m.size() == 0 && rows * cols == 0) return Matrix(rows, cols);
  if (m.rows() != rows || m.cols() != cols) {
    throw std::runtime_error("archive: unexpected shape in " + path.filename().string());
  }
  return m;
}

Matrix as_column(const Vector& v) { return Matrix(v); }

}  // namespace

const std::string& RomArchive::value(const std::string& key) const {
  const auto it = manifest.find(key);
  if (it == manifest.end()) throw std::runtime_error("archive manifest lacks key " + key);
  return it->second;
}

double RomArchive::number(const std::string& key) const { return std::stod(value(key)); }

Manifest case_manifest(const CaseConfig& config) {
  return {{"case", config.id},
          {"kappa0", format_double(config.kappa0)},
          {"phi_e", format_double(config.phi_e)},
          {"u0", format_double(config.u0)},
          {"u_m", format_double(config.u_m)},
          {"omega", format_double(config.omega)},
          {"p_min", format_double(config.p_min)},
          {"p_max", format_double(config.p_max)},
          {"refine", std::to_string(config.refine)}};
}

void save_archive(const std::filesystem::path& dir, const ReducedModel& rom, Manifest manifest) {
  std::filesystem::create_directories(dir);
  const ReducedOperators& ops = rom.ops;
  manifest["format_version"] = std::to_string(kArchiveFormatVersion);
  manifest["N"] = std::to_string(ops.basis_size());
  manifest["M"] = std::to_string(ops.rank());
  manifest["K"] = std::to_string(ops.times.steps());
  manifest["grid_mode"] = to_string(ops.grid_mode);
  manifest["gamma_kind"] = ops.kind == Nonlinearity::Kind::gradient ? "gradient" : "solution";
  manifest["nodes"] = std::to_string(rom.basis.modes.rows());
  manifest["grid_points"] = std::to_string(rom.eim.grid_size());
  {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
    for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
  }
  write_matrix_csv(dir / "basis.csv", rom.basis.modes);
  write_matrix_csv(dir / "q.csv", rom.eim.q);
  write_matrix_csv(dir / "B.csv", ops.interpolation);
  Matrix points(static_cast<Eigen::Index>(rom.eim.rank()), 1);
  for (std::size_t j = 0; j < rom.eim.rank(); ++j) points(static_cast<Eigen::Index>(j), 0) = static_cast<double>(rom.eim.points[j]);
  write_matrix_csv(dir / "xpoints.csv", points);
  write_matrix_csv(dir / "Mr.csv", ops.mass);
  write_matrix_csv(dir / "A0r.csv", ops.stiffness);
  for (std::size_t j = 0; j < ops.rank(); ++j) {
    write_matrix_csv(dir / ("Cj_" + std::to_string(j + 1) + ".csv"), ops.nonlinear[j]);
  }
  write_matrix_csv(dir / "fk.csv", ops.load);
  write_matrix_csv(dir / "u0r.csv", as_column(ops.initial));
  write_matrix_csv(dir / "theta_at_points.csv", ops.point_values);
  Matrix steps(ops.times.steps(), 1);
  for (int k = 1; k <= ops.times.steps(); ++k) steps(k - 1, 0) = ops.times.dt(k);
  write_matrix_csv(dir / "times.csv", steps);
}

RomArchive load_archive(const std::filesystem::path& dir, bool with_basis) {
  const auto manifest_path = dir / "manifest.txt";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("no reduced-model archive at " + dir.string());
  RomArchive a;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || eq == std::string::npos) continue;
    a.manifest[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (std::stoi(a.value("format_version")) != kArchiveFormatVersion) {
    throw std::runtime_error("unsupported archive format version " + a.value("format_version"));
  }
  const auto n = static_cast<Eigen::Index>(std::stoll(a.value("N")));
  const auto m = static_cast<Eigen::Index>(std::stoll(a.value("M")));
  const auto k = static_cast<Eigen::Index>(std::stoll(a.value("K")));
  ReducedOperators& ops = a.ops;
  ops.grid_mode = grid_mode_from_string(a.value("grid_mode"));
  ops.kind = a.value("gamma_kind") == "gradient" ? Nonlinearity::Kind::gradient : Nonlinearity::Kind::solution;
  const Matrix steps = read_shaped(dir / "times.csv", k, 1);
  ops.times = TimeGrid(std::vector<double>(steps.data(), steps.data() + steps.size()));
  ops.mass = read_shaped(dir / "Mr.csv", n, n);
  ops.stiffness = read_shaped(dir / "A0r.csv", n, n);
  ops.load = read_shaped(dir / "fk.csv", k, n);
  ops.initial = read_shaped(dir / "u0r.csv", n, 1).col(0);
  ops.interpolation = read_shaped(dir / "B.csv", m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    ops.nonlinear.push_back(read_shaped(dir / ("Cj_" + std::to_string(j + 1) + ".csv"), n, n));
  }
  const Eigen::Index width = ops.kind == Nonlinearity::Kind::gradient ? 2 * n : n;
  ops.point_values = read_shaped(dir / "theta_at_points.csv", m, width);
  const Matrix points = read_shaped(dir / "xpoints.csv", m, 1);
  for (Eigen::Index j = 0; j < m; ++j) a.points.push_back(static_cast<std::size_t>(points(j, 0)));
  if (with_basis) {
    const auto nodes = static_cast<Eigen::Index>(std::stoll(a.value("nodes")));
    const auto grid = static_cast<Eigen::Index>(std::stoll(a.value("grid_points")));
    a.basis = read_shaped(dir / "basis.csv", nodes, n);
    a.q = read_shaped(dir / "q.csv", grid, m);
  }
  return a;
}

CaseConfig archive_case(const RomArchive& archive) {
  CaseConfig c = testcase(archive.value("case"));
  c.kappa0 = archive.number("kappa0");
  c.phi_e = archive.number("phi_e");
  c.u0 = archive.number("u0");
  c.u_m = archive.number("u_m");
  c.omega = archive.number("omega");
  c.p_min = archive.number("p_min");
  c.p_max = archive.number("p_max");
  c.refine = std::stoi(archive.value("refine"));
  c.steps = archive.ops.times.steps();
  return c;
}

}  // namespace preim
