// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace preim {

using Point = Eigen::Vector2d;

struct BoundaryEdge {
  std::size_t a;
  std::size_t b;
  double length;
};

/// Conforming P1 triangulation. Per-triangle areas and barycentric gradients are
/// cached at construction; the mesh is immutable afterwards.
class Mesh {
 public:
  Mesh(std::vector<Point> nodes, std::vector<std::array<std::size_t, 3>> triangles, double h);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  double cell_size() const { return h_; }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  /// Signed area of triangle e (positive for counter-clockwise ordering).
  double area(std::size_t e) const { return areas_[e]; }
  /// Gradient of the hat function of local vertex i on triangle e.
  const Point& shape_gradient(std::size_t e, int i) const { return gradients_[e][i]; }
  Point centroid(std::size_t e) const;

 private:
  std::vector<Point> nodes_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<double> areas_;
  std::vector<std::array<Point, 3>> gradients_;
  double h_;
};

/// Structured triangulation of (-2,2)^2 \ [-1,1]^2 with cell size 1/refine.
/// Each square cell is split along its (+,+) diagonal; nodes are ordered by (y, x).
Mesh generate_perforated_plate(int refine);

enum class GridMode { nodes, centroids };

const char* to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& text);

/// Finite set of points on which nonlinear terms are sampled.
struct EvalGrid {
  GridMode mode;
  std::vector<Point> points;
  /// Node index (nodes mode) or triangle index (centroids mode) owning each point.
  std::vector<std::size_t> owner;

  std::size_t size() const { return points.size(); }
};

EvalGrid eval_grid(const Mesh& mesh, GridMode mode);

/// Constant gradient of the P1 interpolant of u on every triangle.
std::vector<Point> element_gradients(const Mesh& mesh, const Eigen::VectorXd& u);

/// Writes nodes.csv, triangles.csv and boundary.csv into dir.
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir);

}  // namespace preim
