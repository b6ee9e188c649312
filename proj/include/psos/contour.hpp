#pragma once

// Dual-lattice contours of height-field level sets.
//
// A dual vertex (i, j) names the lattice point (i + 1/2, j + 1/2); it is the
// shared corner of the primal sites (i, j), (i+1, j), (i, j+1), (i+1, j+1).
// A contour is a closed dual circuit; its interior is the set of primal sites
// it encloses (holes included, i.e. the filled hull). For a height field and a
// level h, extraction returns the outer hulls of the 4-connected components of
// {xi >= h} taken over the box plus its boundary ring; where four level-set
// bonds meet at one dual vertex, circuits are split so that each hugs its high
// cell (the two bonds adjacent to each high diagonal cell are paired), which
// per-component tracing realizes automatically. Boundary circuits of enclosed
// low pockets separate high from low but are not h-contours (their inside is
// the low side) and are not returned.

#include <cstdint>
#include <vector>

#include "psos/lattice.hpp"

namespace psos {

struct DualVertex {
  int x = 0;
  int y = 0;
  friend bool operator==(const DualVertex&, const DualVertex&) = default;
};

class Contour {
 public:
  // Validates: >= 4 vertices, consecutive (cyclically) adjacent, no bond used
  // twice, and any revisited vertex is a linked crossing (both passes turn,
  // around diagonally opposite cells). Throws std::invalid_argument otherwise.
  static Contour from_circuit(std::vector<DualVertex> vertices);

  int perimeter() const { return static_cast<int>(vertices_.size()); }
  const std::vector<DualVertex>& vertices() const { return vertices_; }

  // Enclosed primal sites (filled hull), row-major scan order.
  const std::vector<Site>& interior() const { return interior_; }
  long long interior_area() const { return static_cast<long long>(interior_.size()); }
  bool contains_site(Site s) const;

  // Sites adjacent to the circuit from inside / outside: the inner boundary
  // lies in the interior, the outer boundary just off it.
  const std::vector<Site>& inner_boundary() const { return inner_boundary_; }
  const std::vector<Site>& outer_boundary() const { return outer_boundary_; }

 private:
  Contour() = default;
  std::vector<DualVertex> vertices_;
  std::vector<Site> interior_;
  std::vector<Site> inner_boundary_;
  std::vector<Site> outer_boundary_;
  int min_x_ = 0, min_y_ = 0, span_x_ = 0, span_y_ = 0;  // interior lookup grid
  std::vector<std::uint8_t> inside_;
};

// All h-contours of the field (with its boundary condition) at level h.
std::vector<Contour> extract_h_contours(const HeightField& field, const BoundaryCondition& bc,
                                        int level);

// Every contour with dual vertices in [0, side]^2 (equivalently: interior
// inside the box) and perimeter at most perimeter_cap, including linked
// figure-eight circuits. Deterministic order: start vertices scanned
// bottom-to-top rows, left to right, then DFS branches left turn first.
std::vector<Contour> enumerate_contours(const BoxGeometry& geom, int perimeter_cap);

// True iff heights are >= level on the contour's inner boundary and
// <= level - 1 on its outer boundary. Sites on the boundary ring use the
// boundary condition; flanking sites beyond the ring carry no constraint.
bool is_h_contour(const Contour& gamma, const HeightField& field, const BoundaryCondition& bc,
                  int level);

struct ShiftResult {
  HeightField field;
  bool floor_ok;  // false if some shifted site started at height <= 0
};

// Lower every in-box interior site of gamma by one. For eta in the h-contour
// event of gamma with gamma inside the box, the energy drops by at least the
// perimeter; equality exactly when p = 1 or every bond crossing gamma has
// gradient 1.
ShiftResult shift_down(const HeightField& field, const Contour& gamma);

// True iff no h-contour of the field at `level` has interior area strictly
// above `area_threshold`.
bool atypical_membership(const HeightField& field, const BoundaryCondition& bc, int level,
                         long long area_threshold);

}  // namespace psos
