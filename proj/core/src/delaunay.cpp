#include "flowmap/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "flowmap/error.hpp"

namespace flowmap {
namespace {

using Real = long double;

// Orientation with a scale-relative dead zone; 0 means collinear.
int orient_sign(const Point& a, const Point& b, const Point& c) {
  const Real bx = static_cast<Real>(b[0]) - a[0], by = static_cast<Real>(b[1]) - a[1];
  const Real cx = static_cast<Real>(c[0]) - a[0], cy = static_cast<Real>(c[1]) - a[1];
  const Real det = bx * cy - by * cx;
  const Real scale = std::abs(bx * cy) + std::abs(by * cx);
  const Real tol = 1e-12L * scale;
  return det > tol ? 1 : (det < -tol ? -1 : 0);
}

struct Builder {
  const std::vector<Point>& pts;
  std::vector<int> rank;
  std::vector<std::array<int, 3>> tri;
  std::vector<std::array<int, 3>> nbr;
  std::vector<int> hull_next, hull_prev, hull_tri;

  explicit Builder(const std::vector<Point>& p)
      : pts(p), rank(p.size()), hull_next(p.size(), -1), hull_prev(p.size(), -1), hull_tri(p.size(), -1) {}

  int add(int a, int b, int c) {
    tri.push_back({a, b, c});
    nbr.push_back({kNoNeighbor, kNoNeighbor, kNoNeighbor});
    return static_cast<int>(tri.size()) - 1;
  }

  static int slot_of(const std::array<int, 3>& t, int v) {
    for (int i = 0; i < 3; ++i)
      if (t[static_cast<std::size_t>(i)] == v) return i;
    return -1;
  }

  // Index in t of the vertex opposite the edge shared with triangle u.
  int facing(int t, int u) const {
    for (int i = 0; i < 3; ++i)
      if (nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] == u) return i;
    return -1;
  }

  void relink(int t, int from, int to) {
    if (t == kNoNeighbor) return;
    const int i = facing(t, from);
    nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = to;
  }

  void refresh_hull(int t) {
    for (int i = 0; i < 3; ++i)
      if (nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] == kNoNeighbor)
        hull_tri[static_cast<std::size_t>(tri[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 1) % 3)])] = t;
  }

  // Replaces the edge opposite tri[t][i] by the other diagonal of the quad.
  // Afterwards t = (a, b, d) and u = (a, d, c), a being the old tri[t][i].
  int flip(int t, int i) {
    auto& T = tri[static_cast<std::size_t>(t)];
    const int a = T[static_cast<std::size_t>(i)], b = T[static_cast<std::size_t>((i + 1) % 3)],
              c = T[static_cast<std::size_t>((i + 2) % 3)];
    const int u = nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    const int j = facing(u, t);
    const auto& U = tri[static_cast<std::size_t>(u)];
    const int d = U[static_cast<std::size_t>(j)];
    const int n_ab = nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 2) % 3)];
    const int n_ca = nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 1) % 3)];
    const int n_bd = nbr[static_cast<std::size_t>(u)][static_cast<std::size_t>(slot_of(U, c))];
    const int n_dc = nbr[static_cast<std::size_t>(u)][static_cast<std::size_t>(slot_of(U, b))];
    tri[static_cast<std::size_t>(t)] = {a, b, d};
    nbr[static_cast<std::size_t>(t)] = {n_bd, u, n_ab};
    tri[static_cast<std::size_t>(u)] = {a, d, c};
    nbr[static_cast<std::size_t>(u)] = {n_dc, n_ca, t};
    relink(n_bd, u, t);
    relink(n_ca, t, u);
    refresh_hull(t);
    refresh_hull(u);
    return u;
  }

  // Restores the Delaunay property around edges opposite the new vertex.
  void legalize(int t0, int i0) {
    std::vector<std::pair<int, int>> stack{{t0, i0}};
    while (!stack.empty()) {
      auto [t, i] = stack.back();
      stack.pop_back();
      const int u = nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      if (u == kNoNeighbor) continue;
      const auto& T = tri[static_cast<std::size_t>(t)];
      const int d = tri[static_cast<std::size_t>(u)][static_cast<std::size_t>(facing(u, t))];
      if (incircle(pts[static_cast<std::size_t>(T[0])], pts[static_cast<std::size_t>(T[1])],
                   pts[static_cast<std::size_t>(T[2])], pts[static_cast<std::size_t>(d)]) <= 0)
        continue;
      const int nu = flip(t, i);
      // New vertex stays at slot 0 of both triangles.
      stack.emplace_back(t, 0);
      stack.emplace_back(nu, 0);
    }
  }

  bool visible(int a, int b, const Point& p) const {
    return orient_sign(pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)], p) < 0;
  }

  void insert(int p, int last) {
    const Point& P = pts[static_cast<std::size_t>(p)];
    int start = -1;
    if (visible(last, hull_next[static_cast<std::size_t>(last)], P)) start = last;
    else if (visible(hull_prev[static_cast<std::size_t>(last)], last, P)) start = hull_prev[static_cast<std::size_t>(last)];
    else {
      int v = last;
      do {
        if (visible(v, hull_next[static_cast<std::size_t>(v)], P)) {
          start = v;
          break;
        }
        v = hull_next[static_cast<std::size_t>(v)];
      } while (v != last);
    }
    if (start < 0) throw Error("delaunay: no visible hull edge (inconsistent predicates)");
    int first = start;
    while (visible(hull_prev[static_cast<std::size_t>(first)], first, P) && hull_prev[static_cast<std::size_t>(first)] != start)
      first = hull_prev[static_cast<std::size_t>(first)];
    std::vector<int> chain{first};
    int v = first;
    while (visible(v, hull_next[static_cast<std::size_t>(v)], P)) {
      v = hull_next[static_cast<std::size_t>(v)];
      chain.push_back(v);
      if (v == first) break;
    }
    std::vector<int> fresh;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      const int a = chain[k], b = chain[k + 1];
      const int old = hull_tri[static_cast<std::size_t>(a)];
      const int t = add(b, a, p);
      nbr[static_cast<std::size_t>(t)][2] = old;
      const auto& O = tri[static_cast<std::size_t>(old)];
      for (int s = 0; s < 3; ++s)
        if (O[static_cast<std::size_t>(s)] != a && O[static_cast<std::size_t>(s)] != b)
          nbr[static_cast<std::size_t>(old)][static_cast<std::size_t>(s)] = t;
      if (!fresh.empty()) {
        nbr[static_cast<std::size_t>(t)][0] = fresh.back();
        nbr[static_cast<std::size_t>(fresh.back())][1] = t;
      }
      fresh.push_back(t);
    }
    const int lo = chain.front(), hi = chain.back();
    for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
      hull_next[static_cast<std::size_t>(chain[k])] = hull_prev[static_cast<std::size_t>(chain[k])] = -1;
    }
    hull_next[static_cast<std::size_t>(lo)] = p;
    hull_prev[static_cast<std::size_t>(p)] = lo;
    hull_next[static_cast<std::size_t>(p)] = hi;
    hull_prev[static_cast<std::size_t>(hi)] = p;
    hull_tri[static_cast<std::size_t>(lo)] = fresh.front();
    hull_tri[static_cast<std::size_t>(p)] = fresh.back();
    for (int t : fresh) {
      // Slot 2 of each new triangle is p; rotate so that p sits in slot 0
      // and legalize the edge opposite it.
      auto& T = tri[static_cast<std::size_t>(t)];
      auto& N = nbr[static_cast<std::size_t>(t)];
      T = {T[2], T[0], T[1]};
      N = {N[2], N[0], N[1]};
    }
    for (int t : fresh) legalize(t, 0);
  }

  bool diagonal_less(int a, int b, int c, int d) const {
    auto key = [&](int x, int y) {
      const int rx = rank[static_cast<std::size_t>(x)], ry = rank[static_cast<std::size_t>(y)];
      return std::pair{std::min(rx, ry), std::max(rx, ry)};
    };
    return key(a, b) < key(c, d);
  }

  // Among cocircular quads keep the diagonal whose endpoints come first in
  // (x, y) order.
  void break_ties() {
    const std::size_t max_passes = 64;
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
      bool changed = false;
      for (int t = 0; t < static_cast<int>(tri.size()); ++t)
        for (int i = 0; i < 3; ++i) {
          const int u = nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
          if (u == kNoNeighbor || u < t) continue;
          const auto T = tri[static_cast<std::size_t>(t)];
          const int a = T[static_cast<std::size_t>(i)], b = T[static_cast<std::size_t>((i + 1) % 3)],
                    c = T[static_cast<std::size_t>((i + 2) % 3)];
          const int d = tri[static_cast<std::size_t>(u)][static_cast<std::size_t>(facing(u, t))];
          const auto& A = pts[static_cast<std::size_t>(a)];
          const auto& B = pts[static_cast<std::size_t>(b)];
          const auto& C = pts[static_cast<std::size_t>(c)];
          const auto& D = pts[static_cast<std::size_t>(d)];
          if (incircle(A, B, C, D) != 0) continue;
          if (orient_sign(A, B, D) <= 0 || orient_sign(A, D, C) <= 0) continue;
          if (!diagonal_less(a, d, b, c)) continue;
          flip(t, i);
          changed = true;
        }
      if (!changed) return;
    }
  }
};

}  // namespace

double orient2d(const Point& a, const Point& b, const Point& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

int incircle(const Point& a, const Point& b, const Point& c, const Point& d, double rel_tol) {
  const Real adx = static_cast<Real>(a[0]) - d[0], ady = static_cast<Real>(a[1]) - d[1];
  const Real bdx = static_cast<Real>(b[0]) - d[0], bdy = static_cast<Real>(b[1]) - d[1];
  const Real cdx = static_cast<Real>(c[0]) - d[0], cdy = static_cast<Real>(c[1]) - d[1];
  const Real alift = adx * adx + ady * ady, blift = bdx * bdx + bdy * bdy, clift = cdx * cdx + cdy * cdy;
  const Real det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
  const Real perm = alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy)) +
                    blift * (std::abs(cdx * ady) + std::abs(adx * cdy)) +
                    clift * (std::abs(adx * bdy) + std::abs(bdx * ady));
  const Real tol = static_cast<Real>(rel_tol) * perm;
  return det > tol ? 1 : (det < -tol ? -1 : 0);
}

std::size_t Triangulation::hull_vertex_count() const {
  std::size_t n = 0;
  for (const auto& nb : neighbors)
    for (int x : nb)
      if (x == kNoNeighbor) ++n;
  return n;
}

Triangulation triangulate(std::span<const Point> points) {
  if (points.size() < 3) throw InvalidArgument("triangulation needs at least 3 points");
  for (const auto& p : points)
    if (p.dim() != 2 || !p.finite()) throw InvalidArgument("triangulation needs finite 2D points");
  std::vector<Point> pts(points.begin(), points.end());
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  auto lex = [&](int a, int b) {
    const auto& A = pts[static_cast<std::size_t>(a)];
    const auto& B = pts[static_cast<std::size_t>(b)];
    return A[0] != B[0] ? A[0] < B[0] : (A[1] != B[1] ? A[1] < B[1] : a < b);
  };
  std::sort(order.begin(), order.end(), lex);
  for (std::size_t k = 1; k < order.size(); ++k)
    if (pts[static_cast<std::size_t>(order[k])] == pts[static_cast<std::size_t>(order[k - 1])])
      throw InvalidArgument("duplicate point " + pts[static_cast<std::size_t>(order[k])].str());

  Builder bld(pts);
  for (std::size_t k = 0; k < order.size(); ++k) bld.rank[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

  // First point off the line through the two smallest points.
  const Point& p0 = pts[static_cast<std::size_t>(order[0])];
  const Point& p1 = pts[static_cast<std::size_t>(order[1])];
  std::size_t apex = 2;
  while (apex < order.size() && orient_sign(p0, p1, pts[static_cast<std::size_t>(order[apex])]) == 0) ++apex;
  if (apex == order.size()) throw InvalidArgument("all points are collinear");
  const int q = order[apex];
  const bool left = orient_sign(p0, p1, pts[static_cast<std::size_t>(q)]) > 0;
  int prev = -1;
  for (std::size_t k = 0; k + 1 < apex; ++k) {
    const int a = order[k], b = order[k + 1];
    const int t = left ? bld.add(a, b, q) : bld.add(b, a, q);
    if (prev >= 0) {
      // Shared edge is (b_prev == a, q).
      bld.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(left ? 1 : 0)] = prev;
      bld.nbr[static_cast<std::size_t>(prev)][static_cast<std::size_t>(left ? 0 : 1)] = t;
    }
    prev = t;
  }
  // Hull, counter-clockwise.
  std::vector<int> ring;
  if (left) {
    for (std::size_t k = 0; k < apex; ++k) ring.push_back(order[k]);
    ring.push_back(q);
  } else {
    ring.push_back(order[0]);
    ring.push_back(q);
    for (std::size_t k = apex - 1; k >= 1; --k) ring.push_back(order[k]);
  }
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const int a = ring[k], b = ring[(k + 1) % ring.size()];
    bld.hull_next[static_cast<std::size_t>(a)] = b;
    bld.hull_prev[static_cast<std::size_t>(b)] = a;
  }
  for (int t = 0; t < static_cast<int>(bld.tri.size()); ++t) bld.refresh_hull(t);

  int last = q;
  for (std::size_t k = apex + 1; k < order.size(); ++k) {
    bld.insert(order[k], last);
    last = order[k];
  }
  bld.break_ties();

  Triangulation out;
  out.vertices = std::move(pts);
  out.triangles = std::move(bld.tri);
  out.neighbors = std::move(bld.nbr);
  return out;
}

std::array<double, 3> barycentric_weights(const Point& a, const Point& b, const Point& c, const Point& p) {
  const double area = orient2d(a, b, c);
  const double scale = std::abs((b[0] - a[0]) * (c[1] - a[1])) + std::abs((b[1] - a[1]) * (c[0] - a[0]));
  if (!(std::abs(area) > 1e-14 * scale)) throw InvalidArgument("zero-area triangle");
  return {orient2d(p, b, c) / area, orient2d(a, p, c) / area, orient2d(a, b, p) / area};
}

bool triangle_contains(const Triangulation& tri, int t, const Point& p) {
  const auto& T = tri.triangles[static_cast<std::size_t>(t)];
  for (int i = 0; i < 3; ++i) {
    const Point& a = tri.vertices[static_cast<std::size_t>(T[static_cast<std::size_t>((i + 1) % 3)])];
    const Point& b = tri.vertices[static_cast<std::size_t>(T[static_cast<std::size_t>((i + 2) % 3)])];
    if (orient_sign(a, b, p) < 0) return false;
  }
  return true;
}

int locate_brute_force(const Triangulation& tri, const Point& p) {
  for (int t = 0; t < static_cast<int>(tri.size()); ++t)
    if (triangle_contains(tri, t, p)) return t;
  return kOutside;
}

int Locator::locate(const Point& p) {
  const Triangulation& tri = *tri_;
  if (tri.size() == 0) return kOutside;
  int t = last_ < static_cast<int>(tri.size()) ? last_ : 0;
  const std::size_t cap = 3 * tri.size() + 16;
  for (std::size_t step = 0; step < cap; ++step) {
    const auto& T = tri.triangles[static_cast<std::size_t>(t)];
    int next = -2;
    for (int i = 0; i < 3; ++i) {
      const Point& a = tri.vertices[static_cast<std::size_t>(T[static_cast<std::size_t>((i + 1) % 3)])];
      const Point& b = tri.vertices[static_cast<std::size_t>(T[static_cast<std::size_t>((i + 2) % 3)])];
      if (orient_sign(a, b, p) < 0) {
        next = tri.neighbors[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
        break;
      }
    }
    if (next == -2) {
      last_ = t;
      return t;
    }
    // Across a hull edge: the hull is convex, so p is outside.
    if (next == kNoNeighbor) return kOutside;
    t = next;
  }
  // Walk did not settle (near-degenerate predicates); fall back to a scan.
  const int found = locate_brute_force(tri, p);
  if (found != kOutside) last_ = found;
  return found;
}

}  // namespace flowmap
