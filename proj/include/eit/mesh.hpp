#pragma once
#include <Eigen/Dense>
#include <array>
#include <vector>

#include "eit/geometry.hpp"
#include "eit/phantom.hpp"

namespace eit {

// Conforming triangulation of the helmet domain. Compartment interfaces
// coincide with mesh rings; stroke inclusion boundaries are resolved by
// snapping nearby nodes onto them. Region tags are evaluated at triangle
// centroids with HeadPhantom::region_at.
struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> tris; // CCW
  std::vector<int> region;              // per-triangle region id
  // per electrode: consecutive boundary edges (node index pairs), ordered along the boundary
  std::vector<std::vector<std::array<int, 2>>> electrode_edges;
  std::vector<int> boundary_loop; // ring-0 node ids in boundary order
  std::vector<double> boundary_s; // arc coordinate of each boundary node

  int n_nodes() const { return int(nodes.size()); }
  int n_tris() const { return int(tris.size()); }
  double tri_area(int t) const;
  double tri_quality(int t) const; // inradius / circumradius
  double min_quality() const;
};

// target_h: interior edge-length target; boundary spacing is kept at or
// below target_h / 2 (electrode-endpoint refinement). coverage is the
// fraction of the boundary covered by electrodes (width coverage * L / M).
Mesh build_mesh(const HeadPhantom& phantom, const ConformalMap& map,
                const ElectrodeLayout& layout, double target_h, double coverage = 0.5);

} // namespace eit
