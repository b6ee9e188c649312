#include "psos/lattice.hpp"

namespace psos {

int BoundaryCondition::boundary_index(Site s) const {
  // Scan order must match BoxGeometry::outer_boundary().
  int L = map_side_;
  if (s.y == 0 && s.x >= 1 && s.x <= L) return s.x - 1;
  if (s.y >= 1 && s.y <= L) {
    if (s.x == 0) return L + 2 * (s.y - 1);
    if (s.x == L + 1) return L + 2 * (s.y - 1) + 1;
  }
  if (s.y == L + 1 && s.x >= 1 && s.x <= L) return 3 * L + (s.x - 1);
  return -1;
}

BoundaryCondition BoundaryCondition::from_map(const BoxGeometry& geom,
                                              const std::vector<std::pair<Site, int>>& values) {
  BoundaryCondition bc;
  bc.map_side_ = geom.side();
  bc.values_.assign(static_cast<std::size_t>(4 * geom.side()), 0);
  std::vector<bool> seen(bc.values_.size(), false);
  for (const auto& [site, v] : values) {
    int i = bc.boundary_index(site);
    if (i < 0)
      throw std::invalid_argument("BoundaryCondition::from_map: site not on the outer boundary");
    if (seen[static_cast<std::size_t>(i)])
      throw std::invalid_argument("BoundaryCondition::from_map: duplicate boundary site");
    seen[static_cast<std::size_t>(i)] = true;
    bc.values_[static_cast<std::size_t>(i)] = v;
  }
  for (bool b : seen)
    if (!b) throw std::invalid_argument("BoundaryCondition::from_map: boundary site missing");
  return bc;
}

int BoundaryCondition::value_at(Site s) const {
  if (is_constant()) return constant_value_;
  int i = boundary_index(s);
  if (i < 0) throw std::domain_error("BoundaryCondition::value_at: site not on the outer boundary");
  return values_[static_cast<std::size_t>(i)];
}

bool leq(const HeightField& lo, const HeightField& hi) {
  if (!(lo.geometry() == hi.geometry()))
    throw std::invalid_argument("leq: height fields live on different boxes");
  const auto& a = lo.data();
  const auto& b = hi.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

}  // namespace psos
