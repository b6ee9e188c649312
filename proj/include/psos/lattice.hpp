#pragma once

// Finite box geometry, boundary conditions, and integer height fields.
//
// Sites are 1-based pairs (x, y) in {1..L}^2; serialized order is row-major
// with 0-based index (y-1)*L + (x-1). The outer boundary is the set of sites
// at l1-distance exactly 1 from the box (4L sites; the four corner sites sit
// at l1-distance 2 and touch no nearest-neighbor bond, so they are excluded).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace psos {

struct Site {
  int x = 0;
  int y = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

enum class NeighborKind { Interior, Boundary };

struct Neighbor {
  Site site;
  NeighborKind kind;
};

class BoxGeometry {
 public:
  explicit BoxGeometry(int side) : side_(side) {
    if (side < 1) throw std::invalid_argument("BoxGeometry: side must be >= 1");
  }

  int side() const { return side_; }
  int site_count() const { return side_ * side_; }

  bool contains(Site s) const {
    return s.x >= 1 && s.x <= side_ && s.y >= 1 && s.y <= side_;
  }

  // Outer-boundary membership: l1-distance exactly 1 from the box.
  bool on_outer_boundary(Site s) const {
    bool x_in = s.x >= 1 && s.x <= side_;
    bool y_in = s.y >= 1 && s.y <= side_;
    if (x_in && y_in) return false;
    if (x_in && (s.y == 0 || s.y == side_ + 1)) return true;
    if (y_in && (s.x == 0 || s.x == side_ + 1)) return true;
    return false;
  }

  int index_of(Site s) const {
    if (!contains(s)) throw std::domain_error("BoxGeometry::index_of: site outside box");
    return (s.y - 1) * side_ + (s.x - 1);
  }

  Site site_at(int index) const {
    if (index < 0 || index >= site_count())
      throw std::domain_error("BoxGeometry::site_at: index out of range");
    return Site{index % side_ + 1, index / side_ + 1};
  }

  // The four lattice neighbors of an in-box site, each tagged interior/boundary.
  std::array<Neighbor, 4> neighbors(Site s) const {
    if (!contains(s)) throw std::domain_error("BoxGeometry::neighbors: site outside box");
    std::array<Neighbor, 4> out;
    const Site raw[4] = {{s.x - 1, s.y}, {s.x + 1, s.y}, {s.x, s.y - 1}, {s.x, s.y + 1}};
    for (int i = 0; i < 4; ++i)
      out[i] = Neighbor{raw[i], contains(raw[i]) ? NeighborKind::Interior : NeighborKind::Boundary};
    return out;
  }

  // l1 distance to the nearest outer-boundary site.
  int dist_to_boundary(Site s) const {
    if (!contains(s)) throw std::domain_error("BoxGeometry::dist_to_boundary: site outside box");
    int dx = s.x < side_ + 1 - s.x ? s.x : side_ + 1 - s.x;
    int dy = s.y < side_ + 1 - s.y ? s.y : side_ + 1 - s.y;
    return dx < dy ? dx : dy;
  }

  // All 4L outer-boundary sites, in a fixed scan order.
  std::vector<Site> outer_boundary() const {
    std::vector<Site> out;
    out.reserve(4 * side_);
    for (int x = 1; x <= side_; ++x) out.push_back({x, 0});
    for (int y = 1; y <= side_; ++y) {
      out.push_back({0, y});
      out.push_back({side_ + 1, y});
    }
    for (int x = 1; x <= side_; ++x) out.push_back({x, side_ + 1});
    return out;
  }

  friend bool operator==(const BoxGeometry& a, const BoxGeometry& b) {
    return a.side_ == b.side_;
  }

 private:
  int side_;
};

// Heights on the outer boundary. Either one constant or a dense per-site map.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;  // constant 0

  static BoundaryCondition constant(int value) {
    BoundaryCondition bc;
    bc.constant_value_ = value;
    return bc;
  }

  // Map form: every outer-boundary site of `geom` must be assigned exactly once.
  static BoundaryCondition from_map(const BoxGeometry& geom,
                                    const std::vector<std::pair<Site, int>>& values);

  bool is_constant() const { return values_.empty(); }
  int constant_value() const { return constant_value_; }

  // Height at an outer-boundary site (throws if the site is not on the boundary
  // of the geometry the map was built for; constant BCs accept any site).
  int value_at(Site s) const;

 private:
  int constant_value_ = 0;
  int map_side_ = 0;                 // geometry side the map was validated against
  std::vector<int> values_;          // dense, indexed by boundary scan order
  int boundary_index(Site s) const;  // -1 if not on the boundary ring
};

// Integer heights on a box. Plain storage; constraints (floor/ceiling) live in
// the Gibbs model parameters, not here.
class HeightField {
 public:
  explicit HeightField(const BoxGeometry& geom, int fill = 0)
      : geom_(geom), h_(static_cast<std::size_t>(geom.site_count()), fill) {}

  const BoxGeometry& geometry() const { return geom_; }

  int at(Site s) const { return h_[static_cast<std::size_t>(geom_.index_of(s))]; }
  int at_index(int i) const { return h_[static_cast<std::size_t>(i)]; }
  void set(Site s, int v) { h_[static_cast<std::size_t>(geom_.index_of(s))] = v; }
  void set_index(int i, int v) { h_[static_cast<std::size_t>(i)] = v; }

  const std::vector<int>& data() const { return h_; }
  std::vector<int>& data() { return h_; }

  friend bool operator==(const HeightField& a, const HeightField& b) {
    return a.geom_ == b.geom_ && a.h_ == b.h_;
  }

 private:
  BoxGeometry geom_;
  std::vector<int> h_;
};

// Pointwise partial order eta <= xi. Geometry mismatch is a usage error.
bool leq(const HeightField& lo, const HeightField& hi);

}  // namespace psos
