#pragma once
// 2.5D Delaunay triangulation: classic Bowyer-Watson on the xy projection,
// with z carried through to the emitted facets.  Height-field assumption:
// duplicate xy locations are treated as duplicate points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ucover/geometry.hpp"

namespace ucover {

namespace detail {

struct Tri {
  int a, b, c;
};

struct Circumcircle {
  double cx, cy, r2;
};

inline Circumcircle circumcircle(double ax, double ay, double bx, double by,
                                 double cx, double cy) {
  const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(d) < 1e-300) {
    throw std::runtime_error("delaunay_2p5d: degenerate triangle in working set");
  }
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  Circumcircle cc;
  cc.cx = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  cc.cy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  const double dx = ax - cc.cx;
  const double dy = ay - cc.cy;
  cc.r2 = dx * dx + dy * dy;
  return cc;
}

}  // namespace detail

// Triangulates the xy projection of a 3D point cloud and lifts the result
// back to 3D facets; normals come out with positive z.  Duplicate points
// (xy distance <= 1e-9) are dropped, keeping the first occurrence.  Facets
// are returned sorted by centroid for a stable, reproducible order.
inline std::vector<Facet> delaunay_2p5d(const std::vector<Eigen::Vector3d>& input) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(input.size());
  for (const auto& p : input) {
    bool dup = false;
    for (const auto& q : pts) {
      const double dx = p.x() - q.x();
      const double dy = p.y() - q.y();
      if (dx * dx + dy * dy <= 1e-18) {
        dup = true;
        break;
      }
    }
    if (!dup) pts.push_back(p);
  }
  const int n = static_cast<int>(pts.size());
  if (n < 3) {
    throw std::invalid_argument("delaunay_2p5d: need at least 3 distinct points");
  }

  // Collinearity test: farthest point pair spans a baseline; every other
  // point must leave it by more than the 1e-12 cross-product tolerance.
  {
    int far = 1;
    double best = 0.0;
    for (int i = 1; i < n; ++i) {
      const double dx = pts[i].x() - pts[0].x();
      const double dy = pts[i].y() - pts[0].y();
      const double d2 = dx * dx + dy * dy;
      if (d2 > best) {
        best = d2;
        far = i;
      }
    }
    const double ux = pts[far].x() - pts[0].x();
    const double uy = pts[far].y() - pts[0].y();
    double max_cross = 0.0;
    for (int i = 0; i < n; ++i) {
      const double cx = ux * (pts[i].y() - pts[0].y()) - uy * (pts[i].x() - pts[0].x());
      max_cross = std::max(max_cross, std::abs(cx));
    }
    if (max_cross <= 1e-12) {
      throw std::invalid_argument("delaunay_2p5d: xy projections are collinear");
    }
  }

  // Working 2D coordinates, with three super-triangle vertices appended.
  std::vector<double> xs(n + 3), ys(n + 3);
  double minx = pts[0].x(), maxx = minx, miny = pts[0].y(), maxy = miny;
  for (int i = 0; i < n; ++i) {
    xs[i] = pts[i].x();
    ys[i] = pts[i].y();
    minx = std::min(minx, xs[i]);
    maxx = std::max(maxx, xs[i]);
    miny = std::min(miny, ys[i]);
    maxy = std::max(maxy, ys[i]);
  }
  const double cx = 0.5 * (minx + maxx);
  const double cy = 0.5 * (miny + maxy);
  const double span = std::max({maxx - minx, maxy - miny, 1.0});
  xs[n] = cx - 32.0 * span;
  ys[n] = cy - 16.0 * span;
  xs[n + 1] = cx + 32.0 * span;
  ys[n + 1] = cy - 16.0 * span;
  xs[n + 2] = cx;
  ys[n + 2] = cy + 32.0 * span;

  std::vector<detail::Tri> tris = {{n, n + 1, n + 2}};
  std::vector<detail::Circumcircle> circles = {
      detail::circumcircle(xs[n], ys[n], xs[n + 1], ys[n + 1], xs[n + 2], ys[n + 2])};

  std::vector<char> bad;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    const double px = xs[i];
    const double py = ys[i];
    bad.assign(tris.size(), 0);
    edges.clear();
    // Closed circumdisk test with a relative slack: cocircular points count
    // as inside, which keeps the cavity star-shaped in degenerate grids.
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& cc = circles[t];
      const double dx = px - cc.cx;
      const double dy = py - cc.cy;
      if (dx * dx + dy * dy <= cc.r2 * (1.0 + 1e-10) + 1e-10) {
        bad[t] = 1;
        edges.emplace_back(tris[t].a, tris[t].b);
        edges.emplace_back(tris[t].b, tris[t].c);
        edges.emplace_back(tris[t].c, tris[t].a);
      }
    }
    // Cavity boundary: directed edges whose reverse is not among the cavity
    // edges.  Interior (shared) edges appear in both directions.
    std::size_t keep = 0;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!bad[t]) {
        tris[keep] = tris[t];
        circles[keep] = circles[t];
        ++keep;
      }
    }
    tris.resize(keep);
    circles.resize(keep);
    for (const auto& e : edges) {
      bool shared = false;
      for (const auto& f : edges) {
        if (f.first == e.second && f.second == e.first) {
          shared = true;
          break;
        }
      }
      if (shared) continue;
      tris.push_back({e.first, e.second, i});
      circles.push_back(detail::circumcircle(xs[e.first], ys[e.first], xs[e.second],
                                             ys[e.second], px, py));
    }
  }

  std::vector<Facet> out;
  for (const auto& t : tris) {
    if (t.a >= n || t.b >= n || t.c >= n) continue;
    int a = t.a, b = t.b, c = t.c;
    const double area2 = (xs[b] - xs[a]) * (ys[c] - ys[a]) - (ys[b] - ys[a]) * (xs[c] - xs[a]);
    if (area2 < 0.0) std::swap(b, c);
    out.push_back(Facet::from_vertices(pts[a], pts[b], pts[c]));
  }
  std::sort(out.begin(), out.end(), [](const Facet& f, const Facet& g) {
    if (f.centroid.x() != g.centroid.x()) return f.centroid.x() < g.centroid.x();
    if (f.centroid.y() != g.centroid.y()) return f.centroid.y() < g.centroid.y();
    return f.centroid.z() < g.centroid.z();
  });
  return out;
}

}  // namespace ucover
