#include <sstream>
#include <cstdio>
#include <cstdlib>
#include "eit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace eit {

double Mesh::tri_area(int t) const {
  const auto& tr = tris[std::size_t(t)];
  const Eigen::Vector2d a = nodes[std::size_t(tr[0])], b = nodes[std::size_t(tr[1])],
                        c = nodes[std::size_t(tr[2])];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::tri_quality(int t) const {
  const auto& tr = tris[std::size_t(t)];
  const Eigen::Vector2d p0 = nodes[std::size_t(tr[0])], p1 = nodes[std::size_t(tr[1])],
                        p2 = nodes[std::size_t(tr[2])];
  const double a = (p1 - p2).norm(), b = (p2 - p0).norm(), c = (p0 - p1).norm();
  const double area = std::abs(tri_area(t));
  if (area <= 0.0) return 0.0;
  const double s = 0.5 * (a + b + c);
  const double inr = area / s;
  const double circ = a * b * c / (4.0 * area);
  return inr / circ;
}

double Mesh::min_quality() const {
  double q = 1.0;
  for (int t = 0; t < n_tris(); ++t) q = std::min(q, tri_quality(t));
  return q;
}

namespace {

struct Ring {
  std::vector<int> ids;      // node indices, CCW
  std::vector<double> angle; // unwrapped polar angles, ascending
  double spacing = 0.0;      // typical arc spacing
  bool interface = false;    // lies on a compartment curve or the boundary
};

double wrap_len(double s, double L) {
  double r = std::fmod(s, L);
  if (r < 0) r += L;
  return r;
}

// Triangulate the annulus between an outer ring A and inner ring B by a
// two-pointer sweep over their (unwrapped) angles. Assumes each ring's
// `angle` is ascending and spans one period.
void stitch_rings(const Ring& A, const Ring& B, std::vector<std::array<int, 3>>& tris) {
  const int Na = int(A.ids.size()), Nb = int(B.ids.size());
  const double base = A.angle[0];
  std::vector<double> a(std::size_t(Na) + 1), b(std::size_t(Nb) + 1);
  for (int i = 0; i < Na; ++i) a[std::size_t(i)] = A.angle[std::size_t(i)];
  a[std::size_t(Na)] = base + 2.0 * M_PI;
  // start B at the node closest (circularly) to A's first node
  int j0 = 0;
  double best = 1e300;
  for (int j = 0; j < Nb; ++j) {
    const double d = std::abs(std::remainder(B.angle[std::size_t(j)] - base, 2.0 * M_PI));
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  b[0] = base + std::remainder(B.angle[std::size_t(j0)] - base, 2.0 * M_PI);
  for (int t = 1; t <= Nb; ++t) {
    const double prev = B.angle[std::size_t((j0 + t - 1) % Nb)];
    const double cur = B.angle[std::size_t((j0 + t) % Nb)];
    double d = cur - prev;
    d -= 2.0 * M_PI * std::floor(d / (2.0 * M_PI));
    if (d < 1e-12) d += 2.0 * M_PI;
    b[std::size_t(t)] = b[std::size_t(t - 1)] + d;
  }
  int i = 0, j = 0;
  while (i < Na || j < Nb) {
    bool adv_a;
    if (i < Na && j < Nb)
      adv_a = a[std::size_t(i + 1)] <= b[std::size_t(j + 1)];
    else
      adv_a = i < Na;
    const int ai = A.ids[std::size_t(i % Na)], an = A.ids[std::size_t((i + 1) % Na)];
    const int bi = B.ids[std::size_t((j0 + j) % Nb)], bn = B.ids[std::size_t((j0 + j + 1) % Nb)];
    if (adv_a) {
      tris.push_back({ai, an, bi});
      ++i;
    } else {
      tris.push_back({ai, bn, bi});
      ++j;
    }
  }
}

struct InclusionGeom {
  const StrokeInclusion* inc;
  // signed distance (approximate for ellipses): negative inside
  double dist(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d d = p - inc->center;
    if (inc->is_disc) return d.norm() - inc->r1;
    const double c = std::cos(inc->rotation), s = std::sin(inc->rotation);
    const Eigen::Vector2d q(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
    const Eigen::Vector2d e = closest_local(q);
    const double m = (q - e).norm();
    return inc->contains(p) ? -m : m;
  }
  Eigen::Vector2d project(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d d = p - inc->center;
    if (inc->is_disc) {
      const double n = d.norm();
      if (n < 1e-12) return inc->center + Eigen::Vector2d(inc->r1, 0.0);
      return inc->center + d * (inc->r1 / n);
    }
    const double c = std::cos(inc->rotation), s = std::sin(inc->rotation);
    const Eigen::Vector2d q(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
    const Eigen::Vector2d e = closest_local(q);
    return inc->center + Eigen::Vector2d(c * e.x() - s * e.y(), s * e.x() + c * e.y());
  }
  // closest point on the axis-aligned ellipse (r1, r2) to q, by Newton on
  // the parametric angle
  Eigen::Vector2d closest_local(const Eigen::Vector2d& q) const {
    const double a = inc->r1, b = inc->r2;
    double t = std::atan2(a * q.y(), b * q.x());
    for (int it = 0; it < 12; ++it) {
      const double ct = std::cos(t), st = std::sin(t);
      const Eigen::Vector2d e(a * ct, b * st), de(-a * st, b * ct);
      const Eigen::Vector2d dd(-a * ct, -b * st);
      const double f = de.dot(q - e);
      const double df = dd.dot(q - e) - de.squaredNorm();
      if (std::abs(df) < 1e-300) break;
      const double step = f / df;
      t -= step;
      if (std::abs(step) < 1e-14) break;
    }
    return {a * std::cos(t), b * std::sin(t)};
  }
};

double quality_of(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                  const Eigen::Vector2d& p2) {
  const double a = (p1 - p2).norm(), b = (p2 - p0).norm(), c = (p0 - p1).norm();
  const double area =
      0.5 * std::abs((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
  if (area <= 0.0) return 0.0;
  return (area / (0.5 * (a + b + c))) / (a * b * c / (4.0 * area));
}

} // namespace

Mesh build_mesh(const HeadPhantom& phantom, const ConformalMap& map,
                const ElectrodeLayout& layout, double target_h, double coverage) {
  if (!(target_h > 0.0)) throw std::invalid_argument("build_mesh: target_h must be positive");
  if (!(coverage > 0.0 && coverage < 1.0))
    throw std::invalid_argument("build_mesh: electrode coverage must be in (0,1)");
  const int M = layout.M;
  const double L = map.length;
  const double width = coverage * L / M;
  const double gap = L / M - width;
  const double hb = std::min(target_h / 2.0, width / 4.0);

  // validate curve nesting before meshing
  if (!phantom.curves.empty()) {
    for (int r = 0; r < 256; ++r) {
      const double th = 2.0 * M_PI * r / 256.0;
      double outer = phantom.helmet_radius(th);
      for (std::size_t i = 0; i < phantom.curves.size(); ++i) {
        const double ri = phantom.curve_radius(i, th);
        if (!(ri > 0.0) || !(ri < outer))
          throw std::runtime_error("build_mesh: degenerate or non-nested compartment curves");
        outer = ri;
      }
    }
  }

  Mesh mesh;
  std::vector<int> kind; // 0 free, 1 boundary, 2 interface, 3 snapped
  std::vector<double> node_h;
  auto add_node = [&](const Eigen::Vector2d& p, int k, double h) {
    mesh.nodes.push_back(p);
    kind.push_back(k);
    node_h.push_back(h);
    return int(mesh.nodes.size()) - 1;
  };

  // ---- ring 0: boundary nodes, electrode aware ------------------------
  struct BNode {
    double s;
    int id;
  };
  std::vector<BNode> bnodes;
  std::vector<std::pair<double, double>> spans(static_cast<std::size_t>(M)); // electrode [lo, hi] in s (may exceed L)
  for (int m = 0; m < M; ++m) {
    const double sm = layout.s[m];
    spans[std::size_t(m)] = {sm - width / 2.0, sm + width / 2.0};
    const int ne = std::max(4, int(std::ceil(width / hb)));
    for (int i = 0; i < ne; ++i) {
      const double s = sm - width / 2.0 + width * i / ne;
      bnodes.push_back({wrap_len(s, L), -1});
    }
    // gap between this electrode and the next (non-uniform on the ellipse)
    const double s_next = (m + 1 < M) ? layout.s[m + 1] : layout.s[0] + L;
    const double g0 = sm + width / 2.0;
    const double gm = (s_next - width / 2.0) - g0;
    if (gm < hb * 0.5)
      throw std::runtime_error("build_mesh: electrodes overlap (coverage too large)");
    const int ng = std::max(2, int(std::ceil(gm / hb)));
    for (int i = 0; i < ng; ++i) {
      const double s = g0 + gm * i / ng;
      bnodes.push_back({wrap_len(s, L), -1});
    }
  }
  std::sort(bnodes.begin(), bnodes.end(), [](const BNode& a, const BNode& b) { return a.s < b.s; });
  // drop accidental duplicates (wrap seams)
  {
    std::vector<BNode> uniq;
    for (const auto& bn : bnodes)
      if (uniq.empty() || bn.s - uniq.back().s > 1e-9 * L) uniq.push_back(bn);
    if (!uniq.empty() && (L - uniq.back().s) + uniq.front().s < 1e-9 * L) uniq.pop_back();
    bnodes = std::move(uniq);
  }
  Ring ring0;
  ring0.interface = true;
  ring0.spacing = hb;
  {
    double prev_angle = 0.0;
    for (std::size_t i = 0; i < bnodes.size(); ++i) {
      const cdouble z = map.boundary_point(bnodes[i].s);
      const int id = add_node({z.real(), z.imag()}, 1, hb);
      bnodes[i].id = id;
      ring0.ids.push_back(id);
      double ang = std::atan2(z.imag(), z.real());
      if (i == 0)
        prev_angle = ang;
      else {
        while (ang < prev_angle - 1e-12) ang += 2.0 * M_PI;
        prev_angle = ang;
      }
      ring0.angle.push_back(ang);
      mesh.boundary_loop.push_back(id);
      mesh.boundary_s.push_back(bnodes[i].s);
    }
  }

  // ---- radial levels ---------------------------------------------------
  // boundary radius table for blending
  const int nrad = 2048;
  std::vector<double> brad(static_cast<std::size_t>(nrad));
  for (int i = 0; i < nrad; ++i) brad[std::size_t(i)] = map.boundary_radius(2.0 * M_PI * i / nrad);
  auto boundary_radius = [&](double phi) {
    double u = wrap_len(phi, 2.0 * M_PI) / (2.0 * M_PI) * nrad;
    int i0 = int(std::floor(u)) % nrad;
    double f = u - std::floor(u);
    return brad[std::size_t(i0)] * (1.0 - f) + brad[std::size_t((i0 + 1) % nrad)] * f;
  };

  const int n_curves = int(phantom.curves.size());
  std::vector<std::function<double(double)>> level_r; // radius(phi)
  std::vector<bool> level_iface;
  std::vector<double> level_arc; // arc spacing target per level
  auto zone_levels = [&](const std::function<double(double)>& Rout,
                         const std::function<double(double)>& Rin, double dr, bool inner_iface) {
    double tbar = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double phi = 2.0 * M_PI * i / 64.0;
      tbar += (Rout(phi) - Rin(phi)) / 64.0;
    }
    const int n = std::max(1, int(std::lround(tbar / dr)));
    for (int jlev = 1; jlev <= n; ++jlev) {
      const double f = double(jlev) / n;
      level_r.push_back(
          [Rout, Rin, f](double phi) { return Rout(phi) + f * (Rin(phi) - Rout(phi)); });
      level_iface.push_back(jlev == n && inner_iface);
      level_arc.push_back(dr);
    }
  };

  std::function<double(double)> outer = boundary_radius;
  for (int c = 0; c < n_curves; ++c) {
    auto curve = [&phantom, c](double phi) { return phantom.curve_radius(std::size_t(c), phi); };
    const double dr = (c == 0) ? hb : target_h; // boundary-matched spacing in the helmet zone
    zone_levels(outer, curve, dr, true);
    outer = curve;
  }
  // core: shrink the innermost level towards the centre
  {
    double rbar = 0.0;
    for (int i = 0; i < 64; ++i) rbar += outer(2.0 * M_PI * i / 64.0) / 64.0;
    if (n_curves == 0) {
      // keep the boundary-layer spacing for the first interior ring
      const double f0 = 1.0 - hb / rbar;
      level_r.push_back([outer, f0](double phi) { return outer(phi) * f0; });
      level_iface.push_back(false);
      level_arc.push_back(hb);
    }
    const double r_in = (n_curves == 0) ? rbar - hb : rbar;
    const int n = std::max(1, int(std::lround(r_in / target_h)));
    const double f_base = r_in / rbar;
    for (int jlev = 1; jlev < n; ++jlev) {
      const double f = f_base * (1.0 - double(jlev) / n);
      level_r.push_back([outer, f](double phi) { return outer(phi) * f; });
      level_iface.push_back(false);
      level_arc.push_back(target_h);
    }
  }

  // ---- build rings and stitch -----------------------------------------
  std::vector<Ring> rings{ring0};
  for (std::size_t lev = 0; lev < level_r.size(); ++lev) {
    const auto& R = level_r[lev];
    double rbar = 0.0;
    for (int i = 0; i < 64; ++i) rbar += R(2.0 * M_PI * i / 64.0) / 64.0;
    const double circ = 2.0 * M_PI * rbar;
    const double arc_target = 0.95 * level_arc[lev];
    int N = std::max(8, int(std::lround(circ / arc_target)));
    N = std::min(N, int(rings.back().ids.size()));
    Ring ring;
    ring.interface = level_iface[lev];
    ring.spacing = circ / N;
    const double off = (lev % 2 == 1) ? M_PI / N : 0.0;
    for (int i = 0; i < N; ++i) {
      const double phi = 2.0 * M_PI * i / N + off;
      const double r = R(phi);
      const int id = add_node({r * std::cos(phi), r * std::sin(phi)},
                              ring.interface ? 2 : 0, ring.spacing);
      ring.ids.push_back(id);
      ring.angle.push_back(phi);
    }
    stitch_rings(rings.back(), ring, mesh.tris);
    rings.push_back(std::move(ring));
  }
  // centre fan
  {
    const int cid = add_node({0.0, 0.0}, 0, target_h);
    const Ring& last = rings.back();
    const int N = int(last.ids.size());
    for (int i = 0; i < N; ++i)
      mesh.tris.push_back({last.ids[std::size_t(i)], cid, last.ids[std::size_t((i + 1) % N)]});
  }

  // orient CCW
  for (auto& t : mesh.tris) {
    const Eigen::Vector2d a = mesh.nodes[std::size_t(t[0])], b = mesh.nodes[std::size_t(t[1])],
                          c = mesh.nodes[std::size_t(t[2])];
    if ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()) < 0.0)
      std::swap(t[1], t[2]);
  }

  // ---- snap free nodes onto inclusion boundaries -----------------------
  if (!phantom.inclusions.empty()) {
    std::vector<std::vector<int>> node_tris(mesh.nodes.size());
    for (int t = 0; t < mesh.n_tris(); ++t)
      for (int v : mesh.tris[std::size_t(t)]) node_tris[std::size_t(v)].push_back(t);
    auto local_quality = [&](int node, const Eigen::Vector2d& pos) {
      double q = 1.0;
      for (int t : node_tris[std::size_t(node)]) {
        const auto& tr = mesh.tris[std::size_t(t)];
        Eigen::Vector2d p[3];
        for (int v = 0; v < 3; ++v)
          p[v] = (tr[std::size_t(v)] == node) ? pos : mesh.nodes[std::size_t(tr[std::size_t(v)])];
        q = std::min(q, quality_of(p[0], p[1], p[2]));
      }
      return q;
    };
    for (const auto& inc : phantom.inclusions) {
      InclusionGeom geom{&inc};
      for (int v = 0; v < mesh.n_nodes(); ++v) {
        if (kind[std::size_t(v)] != 0) continue;
        const double d = geom.dist(mesh.nodes[std::size_t(v)]);
        if (std::abs(d) > 0.4 * node_h[std::size_t(v)]) continue;
        const Eigen::Vector2d target = geom.project(mesh.nodes[std::size_t(v)]);
        if (local_quality(v, target) < 0.18) continue;
        mesh.nodes[std::size_t(v)] = target;
        kind[std::size_t(v)] = 3;
      }
    }
  }

  // ---- region tags ------------------------------------------------------
  mesh.region.resize(std::size_t(mesh.n_tris()));
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tr = mesh.tris[std::size_t(t)];
    const Eigen::Vector2d c = (mesh.nodes[std::size_t(tr[0])] + mesh.nodes[std::size_t(tr[1])] +
                               mesh.nodes[std::size_t(tr[2])]) /
                              3.0;
    mesh.region[std::size_t(t)] = phantom.region_at(c);
  }

  // ---- electrode edges ---------------------------------------------------
  mesh.electrode_edges.assign(std::size_t(M), {});
  const int nb = int(mesh.boundary_loop.size());
  for (int i = 0; i < nb; ++i) {
    const int jn = (i + 1) % nb;
    double s0 = mesh.boundary_s[std::size_t(i)];
    double s1 = mesh.boundary_s[std::size_t(jn)];
    if (s1 < s0) s1 += L;
    const double mid = 0.5 * (s0 + s1);
    for (int m = 0; m < M; ++m) {
      const auto& sp = spans[std::size_t(m)];
      const double rel = std::remainder(mid - 0.5 * (sp.first + sp.second), L);
      if (std::abs(rel) < width / 2.0 - 1e-12) {
        mesh.electrode_edges[std::size_t(m)].push_back(
            {mesh.boundary_loop[std::size_t(i)], mesh.boundary_loop[std::size_t(jn)]});
        break;
      }
    }
  }
  for (int m = 0; m < M; ++m)
    if (int(mesh.electrode_edges[std::size_t(m)].size()) < 4)
      throw std::runtime_error("build_mesh: electrode with fewer than 4 edges");

  const double q = mesh.min_quality();
  if (q <= 0.15 && std::getenv("EIT_MESH_DEBUG")) {
    for (int t = 0; t < mesh.n_tris(); ++t) {
      if (mesh.tri_quality(t) < 0.05) {
        const auto& tr = mesh.tris[std::size_t(t)];
        std::fprintf(stderr, "BAD q=%.5f nodes %d %d %d: (%.6f,%.6f) (%.6f,%.6f) (%.6f,%.6f) kinds %d %d %d\n",
          mesh.tri_quality(t), tr[0], tr[1], tr[2],
          mesh.nodes[std::size_t(tr[0])].x(), mesh.nodes[std::size_t(tr[0])].y(),
          mesh.nodes[std::size_t(tr[1])].x(), mesh.nodes[std::size_t(tr[1])].y(),
          mesh.nodes[std::size_t(tr[2])].x(), mesh.nodes[std::size_t(tr[2])].y(),
          kind[std::size_t(tr[0])], kind[std::size_t(tr[1])], kind[std::size_t(tr[2])]);
      }
    }
  }
  if (q <= 0.15) {
    int worst = 0;
    for (int t = 0; t < mesh.n_tris(); ++t)
      if (mesh.tri_quality(t) < mesh.tri_quality(worst)) worst = t;
    const auto& tr = mesh.tris[std::size_t(worst)];
    const Eigen::Vector2d c = (mesh.nodes[std::size_t(tr[0])] + mesh.nodes[std::size_t(tr[1])] +
                               mesh.nodes[std::size_t(tr[2])]) /
                              3.0;
    std::ostringstream msg;
    msg << "build_mesh: triangle quality " << q << " below 0.15 near (" << c.x() << ", " << c.y()
        << "), r = " << c.norm();
    throw std::runtime_error(msg.str());
  }
  return mesh;
}

} // namespace eit
