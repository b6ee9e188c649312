#include "psos/contour.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace psos {

namespace {

// Directions on the dual lattice: E, N, W, S (math orientation, y upward).
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};
inline int left_of(int dir) { return (dir + 1) & 3; }
inline int right_of(int dir) { return (dir + 3) & 3; }
inline int reverse_of(int dir) { return (dir + 2) & 3; }

// The two primal cells flanking the dual bond from vertex v in direction dir.
// left/right relative to the walking direction.
struct BondCells {
  Site left, right;
};
BondCells flanking_cells(DualVertex v, int dir) {
  switch (dir) {
    case 0:  // east: separates (x+1, y+1) above from (x+1, y) below
      return {Site{v.x + 1, v.y + 1}, Site{v.x + 1, v.y}};
    case 1:  // north: separates (x, y+1) left from (x+1, y+1) right
      return {Site{v.x, v.y + 1}, Site{v.x + 1, v.y + 1}};
    case 2:  // west
      return {Site{v.x, v.y}, Site{v.x, v.y + 1}};
    default:  // south
      return {Site{v.x + 1, v.y}, Site{v.x, v.y}};
  }
}

struct NormalBond {
  int x, y;     // lower-left vertex of the bond
  bool vertical;
  friend auto operator<=>(const NormalBond&, const NormalBond&) = default;
};
NormalBond normalize_bond(DualVertex v, int dir) {
  DualVertex w{v.x + kDx[dir], v.y + kDy[dir]};
  DualVertex lo = (w.x < v.x || w.y < v.y) ? w : v;
  return NormalBond{lo.x, lo.y, dir == 1 || dir == 3};
}

}  // namespace

Contour Contour::from_circuit(std::vector<DualVertex> vertices) {
  const int n = static_cast<int>(vertices.size());
  if (n < 4) throw std::invalid_argument("Contour: a circuit needs at least four vertices");

  // consecutive adjacency and per-step directions
  std::vector<int> dirs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const DualVertex& a = vertices[static_cast<std::size_t>(i)];
    const DualVertex& b = vertices[static_cast<std::size_t>((i + 1) % n)];
    int dx = b.x - a.x, dy = b.y - a.y;
    int dir = -1;
    for (int d = 0; d < 4; ++d)
      if (dx == kDx[d] && dy == kDy[d]) dir = d;
    if (dir < 0) throw std::invalid_argument("Contour: consecutive vertices are not adjacent");
    dirs[static_cast<std::size_t>(i)] = dir;
  }

  // distinct bonds
  std::set<NormalBond> bonds;
  for (int i = 0; i < n; ++i)
    if (!bonds.insert(normalize_bond(vertices[static_cast<std::size_t>(i)],
                                     dirs[static_cast<std::size_t>(i)]))
             .second)
      throw std::invalid_argument("Contour: a dual bond is used twice");

  // revisited vertices must be linked crossings: both passes turn, and the two
  // turn corners are diagonally opposite quadrants.
  std::map<std::pair<int, int>, std::vector<int>> visits;  // vertex -> pass indices
  for (int i = 0; i < n; ++i)
    visits[{vertices[static_cast<std::size_t>(i)].x, vertices[static_cast<std::size_t>(i)].y}]
        .push_back(i);
  for (const auto& [v, idx] : visits) {
    if (idx.size() == 1) continue;
    if (idx.size() > 2)
      throw std::invalid_argument("Contour: a dual vertex is visited more than twice");
    int corner[2];
    for (int k = 0; k < 2; ++k) {
      int i = idx[static_cast<std::size_t>(k)];
      int in_dir = dirs[static_cast<std::size_t>((i + n - 1) % n)];
      int out_dir = dirs[static_cast<std::size_t>(i)];
      if (out_dir == in_dir || out_dir == reverse_of(in_dir))
        throw std::invalid_argument("Contour: revisited vertex with a straight pass (not linked)");
      // quadrant spanned by the two bond directions out of v
      int ax = kDx[reverse_of(in_dir)] + kDx[out_dir];
      int ay = kDy[reverse_of(in_dir)] + kDy[out_dir];
      corner[k] = (ax > 0 ? 1 : 0) | (ay > 0 ? 2 : 0);
    }
    if ((corner[0] ^ corner[1]) != 3)
      throw std::invalid_argument("Contour: revisited vertex passes are not linked");
  }

  Contour c;
  c.vertices_ = std::move(vertices);

  // Interior by flood fill on a grid one cell wider than the bounding box.
  int min_vx = c.vertices_[0].x, max_vx = c.vertices_[0].x;
  int min_vy = c.vertices_[0].y, max_vy = c.vertices_[0].y;
  for (const DualVertex& v : c.vertices_) {
    min_vx = std::min(min_vx, v.x);
    max_vx = std::max(max_vx, v.x);
    min_vy = std::min(min_vy, v.y);
    max_vy = std::max(max_vy, v.y);
  }
  // candidate cells: x in [min_vx, max_vx+1], y likewise; pad one ring outside
  c.min_x_ = min_vx - 1;
  c.min_y_ = min_vy - 1;
  c.span_x_ = max_vx - min_vx + 4;
  c.span_y_ = max_vy - min_vy + 4;
  const int sx = c.span_x_, sy = c.span_y_;
  auto cell_id = [&](int x, int y) { return (y - c.min_y_) * sx + (x - c.min_x_); };

  // blocked[dir] per cell: wall toward E/N/W/S neighbor
  std::vector<std::uint8_t> wall(static_cast<std::size_t>(sx * sy), 0);
  const int cn = static_cast<int>(c.vertices_.size());
  for (int i = 0; i < cn; ++i) {
    BondCells fc = flanking_cells(c.vertices_[static_cast<std::size_t>(i)],
                                  dirs[static_cast<std::size_t>(i)]);
    // wall between fc.left and fc.right
    int dx = fc.right.x - fc.left.x, dy = fc.right.y - fc.left.y;
    for (int d = 0; d < 4; ++d)
      if (dx == kDx[d] && dy == kDy[d]) {
        wall[static_cast<std::size_t>(cell_id(fc.left.x, fc.left.y))] |= std::uint8_t(1u << d);
        wall[static_cast<std::size_t>(cell_id(fc.right.x, fc.right.y))] |=
            std::uint8_t(1u << reverse_of(d));
      }
  }

  std::vector<std::uint8_t> outside(static_cast<std::size_t>(sx * sy), 0);
  std::vector<std::pair<int, int>> stack{{c.min_x_, c.min_y_}};
  outside[0] = 1;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    std::uint8_t w = wall[static_cast<std::size_t>(cell_id(x, y))];
    for (int d = 0; d < 4; ++d) {
      if (w & (1u << d)) continue;
      int nx = x + kDx[d], ny = y + kDy[d];
      if (nx < c.min_x_ || nx >= c.min_x_ + sx || ny < c.min_y_ || ny >= c.min_y_ + sy) continue;
      std::uint8_t& mark = outside[static_cast<std::size_t>(cell_id(nx, ny))];
      if (!mark) {
        mark = 1;
        stack.push_back({nx, ny});
      }
    }
  }

  c.inside_.assign(static_cast<std::size_t>(sx * sy), 0);
  for (int y = c.min_y_; y < c.min_y_ + sy; ++y)
    for (int x = c.min_x_; x < c.min_x_ + sx; ++x)
      if (!outside[static_cast<std::size_t>(cell_id(x, y))]) {
        c.inside_[static_cast<std::size_t>(cell_id(x, y))] = 1;
        c.interior_.push_back(Site{x, y});
      }
  if (c.interior_.empty())
    throw std::invalid_argument("Contour: circuit encloses no cell");

  // boundary sets from the bonds
  std::set<std::pair<int, int>> inner, outer;
  for (int i = 0; i < cn; ++i) {
    BondCells fc = flanking_cells(c.vertices_[static_cast<std::size_t>(i)],
                                  dirs[static_cast<std::size_t>(i)]);
    bool left_in = c.contains_site(fc.left);
    bool right_in = c.contains_site(fc.right);
    if (left_in == right_in)
      throw std::invalid_argument("Contour: a bond does not separate inside from outside");
    const Site& in_site = left_in ? fc.left : fc.right;
    const Site& out_site = left_in ? fc.right : fc.left;
    inner.insert({in_site.x, in_site.y});
    outer.insert({out_site.x, out_site.y});
  }
  for (auto [x, y] : inner) c.inner_boundary_.push_back(Site{x, y});
  for (auto [x, y] : outer) c.outer_boundary_.push_back(Site{x, y});
  return c;
}

bool Contour::contains_site(Site s) const {
  if (s.x < min_x_ || s.x >= min_x_ + span_x_ || s.y < min_y_ || s.y >= min_y_ + span_y_)
    return false;
  return inside_[static_cast<std::size_t>((s.y - min_y_) * span_x_ + (s.x - min_x_))] != 0;
}

namespace {

// Height of an extended-grid cell: in-box from the field, ring from the BC.
// `defined` reports whether the cell carries a height at all.
int cell_height(const HeightField& f, const BoundaryCondition& bc, Site s, bool& defined) {
  const BoxGeometry& g = f.geometry();
  if (g.contains(s)) {
    defined = true;
    return f.at(s);
  }
  if (g.on_outer_boundary(s)) {
    defined = true;
    return bc.value_at(s);
  }
  defined = false;
  return 0;
}

}  // namespace

std::vector<Contour> extract_h_contours(const HeightField& field, const BoundaryCondition& bc,
                                        int level) {
  const BoxGeometry& g = field.geometry();
  const int L = g.side();
  const int side = L + 2;  // extended grid: x, y in [0, L+1]
  auto id = [side](int x, int y) { return y * side + x; };

  std::vector<std::uint8_t> high(static_cast<std::size_t>(side * side), 0);
  for (int y = 0; y <= L + 1; ++y)
    for (int x = 0; x <= L + 1; ++x) {
      bool defined;
      int h = cell_height(field, bc, Site{x, y}, defined);
      high[static_cast<std::size_t>(id(x, y))] = defined && h >= level;
    }

  // 4-connected components of the high set
  std::vector<int> comp(static_cast<std::size_t>(side * side), -1);
  int n_comp = 0;
  std::vector<int> stack;
  for (int start = 0; start < side * side; ++start) {
    if (!high[static_cast<std::size_t>(start)] || comp[static_cast<std::size_t>(start)] >= 0)
      continue;
    comp[static_cast<std::size_t>(start)] = n_comp;
    stack.assign(1, start);
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      int x = cur % side, y = cur / side;
      for (int d = 0; d < 4; ++d) {
        int nx = x + kDx[d], ny = y + kDy[d];
        if (nx < 0 || nx >= side || ny < 0 || ny >= side) continue;
        int nid = id(nx, ny);
        if (high[static_cast<std::size_t>(nid)] && comp[static_cast<std::size_t>(nid)] < 0) {
          comp[static_cast<std::size_t>(nid)] = n_comp;
          stack.push_back(nid);
        }
      }
    }
    ++n_comp;
  }

  std::vector<Contour> out;
  std::vector<std::uint8_t> filled(static_cast<std::size_t>(side * side));
  std::vector<std::uint8_t> reached(static_cast<std::size_t>(side * side));
  for (int target = 0; target < n_comp; ++target) {
    // filled hull: cells from which the frame cannot be reached without
    // entering the component (i.e. component plus its holes)
    std::fill(reached.begin(), reached.end(), 0);
    stack.clear();
    for (int x = 0; x < side; ++x)
      for (int y : {0, side - 1}) {
        if (comp[static_cast<std::size_t>(id(x, y))] != target &&
            !reached[static_cast<std::size_t>(id(x, y))]) {
          reached[static_cast<std::size_t>(id(x, y))] = 1;
          stack.push_back(id(x, y));
        }
        if (comp[static_cast<std::size_t>(id(y, x))] != target &&
            !reached[static_cast<std::size_t>(id(y, x))]) {
          reached[static_cast<std::size_t>(id(y, x))] = 1;
          stack.push_back(id(y, x));
        }
      }
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      int x = cur % side, y = cur / side;
      for (int d = 0; d < 4; ++d) {
        int nx = x + kDx[d], ny = y + kDy[d];
        if (nx < 0 || nx >= side || ny < 0 || ny >= side) continue;
        int nid = id(nx, ny);
        if (comp[static_cast<std::size_t>(nid)] != target &&
            !reached[static_cast<std::size_t>(nid)]) {
          reached[static_cast<std::size_t>(nid)] = 1;
          stack.push_back(nid);
        }
      }
    }
    for (int i = 0; i < side * side; ++i)
      filled[static_cast<std::size_t>(i)] = !reached[static_cast<std::size_t>(i)];

    // directed boundary edges (filled region on the walker's left)
    auto in_filled = [&](int x, int y) {
      return x >= 0 && x < side && y >= 0 && y < side &&
             filled[static_cast<std::size_t>(id(x, y))] != 0;
    };
    // start: bottom-most then left-most filled cell; its south edge, eastbound
    int cx = -1, cy = -1;
    for (int y = 0; y < side && cx < 0; ++y)
      for (int x = 0; x < side; ++x)
        if (filled[static_cast<std::size_t>(id(x, y))]) {
          cx = x;
          cy = y;
          break;
        }
    // vertex chain: walk with left-turn priority; cells on the left must be
    // filled, cells on the right must not
    auto edge_ok = [&](DualVertex v, int dir) {
      BondCells fc = flanking_cells(v, dir);
      return in_filled(fc.left.x, fc.left.y) && !in_filled(fc.right.x, fc.right.y);
    };
    DualVertex start{cx - 1, cy - 1};  // south-west corner of the start cell
    const int start_dir = 0;           // east along its south edge
    std::vector<DualVertex> circuit;
    DualVertex v = start;
    int dir = start_dir;
    do {
      circuit.push_back(v);
      DualVertex w{v.x + kDx[dir], v.y + kDy[dir]};
      int next = -1;
      for (int cand : {left_of(dir), dir, right_of(dir)})
        if (edge_ok(w, cand)) {
          next = cand;
          break;
        }
      if (next < 0) throw std::logic_error("extract_h_contours: boundary walk got stuck");
      v = w;
      dir = next;
    } while (!(v == start && dir == start_dir));

    out.push_back(Contour::from_circuit(std::move(circuit)));
  }
  return out;
}

std::vector<Contour> enumerate_contours(const BoxGeometry& geom, int perimeter_cap) {
  const int V = geom.side() + 1;  // dual vertices 0..side
  std::vector<Contour> out;
  if (perimeter_cap < 4) return out;

  // Walks start at the circuit's lex-min vertex (bottom row first, then left),
  // whose two circuit bonds are forced to E and N; fixing the first step E
  // gives each circuit one canonical traversal. The walk may close a bond set
  // in a non-linked order (straight passes at a crossing), which from_circuit
  // rejects; the linked traversal of the same set shows up on another branch,
  // so only accepted circuits mark the dedup set.
  std::set<std::set<NormalBond>> seen;
  std::vector<int> visits(std::size_t(V) * std::size_t(V), 0);
  std::set<NormalBond> used;
  std::vector<DualVertex> path;
  DualVertex v0{};

  auto vid = [V](DualVertex v) { return std::size_t(v.y * V + v.x); };

  auto dfs = [&](auto&& self, DualVertex v, int in_dir) -> void {
    for (int cand : {left_of(in_dir), in_dir, right_of(in_dir)}) {
      DualVertex w{v.x + kDx[cand], v.y + kDy[cand]};
      if (w.x < 0 || w.x >= V || w.y < 0 || w.y >= V) continue;
      if (w.y < v0.y || (w.y == v0.y && w.x < v0.x)) continue;  // v0 stays lex-min
      NormalBond b = normalize_bond(v, cand);
      if (used.count(b)) continue;
      int len = int(used.size()) + 1;
      if (len + std::abs(w.x - v0.x) + std::abs(w.y - v0.y) > perimeter_cap) continue;
      if (w == v0) {
        std::set<NormalBond> key = used;
        key.insert(b);
        if (seen.count(key)) continue;
        try {
          Contour c = Contour::from_circuit(path);
          seen.insert(std::move(key));
          out.push_back(std::move(c));
        } catch (const std::invalid_argument&) {
          // closed walk but not a single linked circuit
        }
        continue;
      }
      if (visits[vid(w)] >= 2) continue;
      used.insert(b);
      ++visits[vid(w)];
      path.push_back(w);
      self(self, w, cand);
      path.pop_back();
      --visits[vid(w)];
      used.erase(b);
    }
  };

  for (int y = 0; y < V; ++y)
    for (int x = 0; x + 1 < V; ++x) {
      v0 = DualVertex{x, y};
      DualVertex w{x + 1, y};
      std::fill(visits.begin(), visits.end(), 0);
      visits[vid(v0)] = 1;
      visits[vid(w)] = 1;
      used.clear();
      used.insert(normalize_bond(v0, 0));
      path.assign({v0, w});
      dfs(dfs, w, 0);
    }
  return out;
}

bool is_h_contour(const Contour& gamma, const HeightField& field, const BoundaryCondition& bc,
                  int level) {
  for (Site s : gamma.inner_boundary()) {
    bool defined;
    int h = cell_height(field, bc, s, defined);
    if (defined && h < level) return false;
  }
  for (Site s : gamma.outer_boundary()) {
    bool defined;
    int h = cell_height(field, bc, s, defined);
    if (defined && h > level - 1) return false;
  }
  return true;
}

ShiftResult shift_down(const HeightField& field, const Contour& gamma) {
  ShiftResult r{field, true};
  const BoxGeometry& g = field.geometry();
  for (Site s : gamma.interior()) {
    if (!g.contains(s)) continue;
    int h = field.at(s);
    if (h <= 0) r.floor_ok = false;
    r.field.set(s, h - 1);
  }
  return r;
}

bool atypical_membership(const HeightField& field, const BoundaryCondition& bc, int level,
                         long long area_threshold) {
  for (const Contour& gamma : extract_h_contours(field, bc, level))
    if (gamma.interior_area() > area_threshold) return false;
  return true;
}

}  // namespace psos
