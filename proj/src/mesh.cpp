// SPDX-License-Identifier: Apache-2.0
#include "preim/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

#include "preim/csv.hpp"

namespace preim {

Mesh::Mesh(std::vector<Point> nodes, std::vector<std::array<std::size_t, 3>> triangles, double h)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), h_(h) {
  areas_.reserve(triangles_.size());
  gradients_.reserve(triangles_.size());
  for (const auto& t : triangles_) {
    const Point& p0 = nodes_[t[0]];
    const Point& p1 = nodes_[t[1]];
    const Point& p2 = nodes_[t[2]];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    areas_.push_back(0.5 * det);
    // grad(lambda_i) = rot90(opposite edge) / (2 area)
    std::array<Point, 3> g;
    g[0] = Point(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    g[1] = Point(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    g[2] = Point(p0.y() - p1.y(), p1.x() - p0.x()) / det;
    gradients_.push_back(g);
  }

  // An edge on the boundary belongs to exactly one triangle.
  std::map<std::pair<std::size_t, std::size_t>, std::pair<int, std::pair<std::size_t, std::size_t>>> edges;
  for (const auto& t : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = t[i];
      const std::size_t b = t[(i + 1) % 3];
      auto& slot = edges[{std::min(a, b), std::max(a, b)}];
      slot.first += 1;
      slot.second = {a, b};
    }
  }
  for (const auto& [key, value] : edges) {
    if (value.first == 1) {
      const auto [a, b] = value.second;
      boundary_.push_back({a, b, (nodes_[a] - nodes_[b]).norm()});
    }
  }
}

Point Mesh::centroid(std::size_t e) const {
  const auto& t = triangles_[e];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

Mesh generate_perforated_plate(int refine) {
  if (refine < 1) {
    throw std::invalid_argument("generate_perforated_plate: refine must be >= 1");
  }
  const int n = 4 * refine;  // cells per side
  const double h = 1.0 / refine;
  // Lattice index i in [0, n] maps to x = -2 + i h. The hole [-1,1]^2 spans
  // lattice indices [refine, 3 refine]; strictly interior lattice nodes are removed.
  auto in_hole_node = [&](int i, int j) {
    return i > refine && i < 3 * refine && j > refine && j < 3 * refine;
  };
  auto in_hole_cell = [&](int i, int j) {
    return i >= refine && i < 3 * refine && j >= refine && j < 3 * refine;
  };

  std::vector<long> index((n + 1) * (n + 1), -1);
  std::vector<Point> nodes;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (in_hole_node(i, j)) continue;
      index[j * (n + 1) + i] = static_cast<long>(nodes.size());
      nodes.emplace_back(-2.0 + i * h, -2.0 + j * h);
    }
  }

  std::vector<std::array<std::size_t, 3>> triangles;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (in_hole_cell(i, j)) continue;
      const auto v00 = static_cast<std::size_t>(index[j * (n + 1) + i]);
      const auto v10 = static_cast<std::size_t>(index[j * (n + 1) + i + 1]);
      const auto v01 = static_cast<std::size_t>(index[(j + 1) * (n + 1) + i]);
      const auto v11 = static_cast<std::size_t>(index[(j + 1) * (n + 1) + i + 1]);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(nodes), std::move(triangles), h);
}

const char* to_string(GridMode mode) {
  return mode == GridMode::nodes ? "nodes" : "centroids";
}

GridMode grid_mode_from_string(const std::string& text) {
  if (text == "nodes") return GridMode::nodes;
  if (text == "centroids") return GridMode::centroids;
  throw std::invalid_argument("unknown grid mode: " + text);
}

EvalGrid eval_grid(const Mesh& mesh, GridMode mode) {
  EvalGrid grid{mode, {}, {}};
  if (mode == GridMode::nodes) {
    grid.points = mesh.nodes();
    grid.owner.resize(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) grid.owner[i] = i;
  } else {
    grid.points.reserve(mesh.triangle_count());
    grid.owner.resize(mesh.triangle_count());
    for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
      grid.points.push_back(mesh.centroid(e));
      grid.owner[e] = e;
    }
  }
  return grid;
}

std::vector<Point> element_gradients(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.node_count()) {
    throw std::invalid_argument("element_gradients: field length does not match node count");
  }
  std::vector<Point> grads(mesh.triangle_count());
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    grads[e] = u[t[0]] * mesh.shape_gradient(e, 0) + u[t[1]] * mesh.shape_gradient(e, 1) +
               u[t[2]] * mesh.shape_gradient(e, 2);
  }
  return grads;
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream nodes(dir / "nodes.csv");
  for (const auto& p : mesh.nodes()) nodes << format_double(p.x()) << ',' << format_double(p.y()) << '\n';
  std::ofstream tris(dir / "triangles.csv");
  for (const auto& t : mesh.triangles()) tris << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  std::ofstream boundary(dir / "boundary.csv");
  for (const auto& e : mesh.boundary_edges()) boundary << e.a << ',' << e.b << '\n';
}

}  // namespace preim
