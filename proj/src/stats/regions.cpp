#include "octlayers/regions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace octlayers {

namespace {

struct Edge {
  int x, y;    // start corner
  int dx, dy;  // unit direction
};

// Preference when several boundary edges leave one corner: right turn first,
// so diagonally touching pixels end up on a single outline.
int turn_rank(int in_dx, int in_dy, int out_dx, int out_dy) {
  if (out_dx == in_dy && out_dy == -in_dx) return 0;  // right
  if (out_dx == in_dx && out_dy == in_dy) return 1;   // straight
  if (out_dx == -in_dy && out_dy == in_dx) return 2;  // left
  return 3;                                           // reverse
}

double signed_area(const std::vector<LatticePoint>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& p = loop[i];
    const auto& q = loop[(i + 1) % loop.size()];
    a += p.ix * q.iy - q.ix * p.iy;
  }
  return 0.5 * a;
}

}  // namespace

std::vector<std::vector<LatticeIndex>> connected_components(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  Raster<int> label(w, h, -1);
  std::vector<std::vector<LatticeIndex>> out;
  std::deque<LatticeIndex> queue;
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      if (!mask(ix, iy) || label(ix, iy) >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      label(ix, iy) = id;
      queue.push_back({ix, iy});
      while (!queue.empty()) {
        const auto p = queue.front();
        queue.pop_front();
        out[id].push_back(p);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.ix + dx, ny = p.iy + dy;
            if ((dx || dy) && mask.in_bounds(nx, ny) && mask(nx, ny) && label(nx, ny) < 0) {
              label(nx, ny) = id;
              queue.push_back({nx, ny});
            }
          }
      }
      std::sort(out[id].begin(), out[id].end(),
                [](const LatticeIndex& a, const LatticeIndex& b) {
                  return a.iy != b.iy ? a.iy < b.iy : a.ix < b.ix;
                });
    }
  }
  return out;
}

std::vector<std::vector<LatticePoint>> trace_outlines(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  auto on = [&](int x, int y) { return mask.in_bounds(x, y) && mask(x, y) != 0; };

  // Counter-clockwise (y up) boundary edges of every member pixel; corner
  // (x, y) sits at lattice position (x - 0.5, y - 0.5).
  std::vector<Edge> edges;
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      if (!on(ix, iy)) continue;
      if (!on(ix, iy - 1)) edges.push_back({ix, iy, 1, 0});
      if (!on(ix + 1, iy)) edges.push_back({ix + 1, iy, 0, 1});
      if (!on(ix, iy + 1)) edges.push_back({ix + 1, iy + 1, -1, 0});
      if (!on(ix - 1, iy)) edges.push_back({ix, iy + 1, 0, -1});
    }
  std::map<std::pair<int, int>, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i) outgoing[{edges[i].y, edges[i].x}].push_back(i);

  std::vector<char> used(edges.size(), 0);
  std::vector<std::vector<LatticePoint>> loops;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (used[start]) continue;
    std::vector<LatticePoint> loop;
    std::size_t e = start;
    while (!used[e]) {
      used[e] = 1;
      const Edge& cur = edges[e];
      loop.push_back({cur.x - 0.5, cur.y - 0.5});
      const auto& next = outgoing.at({cur.y + cur.dy, cur.x + cur.dx});
      std::size_t best = next.front();
      int best_rank = 4;
      for (std::size_t cand : next) {
        const int r = turn_rank(cur.dx, cur.dy, edges[cand].dx, edges[cand].dy);
        if (r < best_rank) {
          best_rank = r;
          best = cand;
        }
      }
      e = best;
    }
    // Drop collinear corners.
    std::vector<LatticePoint> simple;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = loop[(i + n - 1) % n];
      const auto& b = loop[i];
      const auto& c = loop[(i + 1) % n];
      const double cross = (b.ix - a.ix) * (c.iy - b.iy) - (b.iy - a.iy) * (c.ix - b.ix);
      if (cross != 0.0) simple.push_back(b);
    }
    loops.push_back(std::move(simple));
  }
  // Outer boundaries (positive area) first, largest first; then holes.
  std::stable_sort(loops.begin(), loops.end(), [](const auto& a, const auto& b) {
    return signed_area(a) > signed_area(b);
  });
  return loops;
}

Mask significance_mask(const ComparisonMap& cmp) {
  Mask m(cmp.domain.width, cmp.domain.n_bscans, 0);
  for (int iy = 0; iy < cmp.domain.n_bscans; ++iy)
    for (int ix = 0; ix < cmp.domain.width; ++ix) m(ix, iy) = cmp.at(ix, iy).significant ? 1 : 0;
  return m;
}

Mask region_mask(const EnFaceDomain& domain, const Region& region) {
  Mask m(domain.width, domain.n_bscans, 0);
  for (const auto& p : region.points) m(p.ix, p.iy) = 1;
  return m;
}

std::vector<Region> extract_significant_regions(const ComparisonMap& cmp) {
  const auto& d = cmp.domain;
  std::vector<Region> regions;
  for (auto& points : connected_components(significance_mask(cmp))) {
    Region r;
    r.points = std::move(points);
    r.area_mm2 = static_cast<double>(r.points.size()) * d.pixel_area_mm2();
    double sx = 0.0, sy = 0.0, sdiff = 0.0;
    for (const auto& p : r.points) {
      const auto phys = d.to_physical(p.ix, p.iy);
      sx += phys.x_mm;
      sy += phys.y_mm;
      const auto& rec = cmp.at(p.ix, p.iy);
      sdiff += rec.diff;
      r.min_p = std::min(r.min_p, rec.p);
    }
    const double n = static_cast<double>(r.points.size());
    r.centroid = {sx / n, sy / n};
    r.mean_diff = sdiff / n;
    // Trace on the bounding box only.
    int x0 = d.width, y0 = d.n_bscans, x1 = -1, y1 = -1;
    for (const auto& p : r.points) {
      x0 = std::min(x0, p.ix);
      x1 = std::max(x1, p.ix);
      y0 = std::min(y0, p.iy);
      y1 = std::max(y1, p.iy);
    }
    Mask local(x1 - x0 + 1, y1 - y0 + 1, 0);
    for (const auto& p : r.points) local(p.ix - x0, p.iy - y0) = 1;
    for (const auto& loop : trace_outlines(local)) {
      Polygon poly;
      poly.reserve(loop.size());
      for (const auto& q : loop) poly.push_back(d.to_physical(q.ix + x0, q.iy + y0));
      r.outlines.push_back(std::move(poly));
    }
    regions.push_back(std::move(r));
  }
  std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
    if (a.centroid.x_mm != b.centroid.x_mm) return a.centroid.x_mm < b.centroid.x_mm;
    return a.centroid.y_mm < b.centroid.y_mm;
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].id = static_cast<int>(i) + 1;
  return regions;
}

}  // namespace octlayers
