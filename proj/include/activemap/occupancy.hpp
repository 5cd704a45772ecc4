#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "activemap/camera.hpp"
#include "activemap/image.hpp"
#include "activemap/lie2.hpp"
#include "activemap/splat.hpp"

namespace activemap {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// PGM encoding of cell states (fixed contract).
inline std::uint8_t cell_gray(CellState s) {
  switch (s) {
    case CellState::Free: return 255;
    case CellState::Occupied: return 0;
    default: return 127;
  }
}

struct CellIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend bool operator<(const CellIndex& a, const CellIndex& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

// Dynamically growing 2D occupancy grid. Cells are global integer
// coordinates (floor(world / resolution)); storage is a window that grows
// with margin whenever a write lands outside. Reads outside the window are
// Unknown, which is also the correct semantic for never-observed space.
class OccupancyGrid {
 public:
  explicit OccupancyGrid(double resolution = 0.05) : res_(resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("OccupancyGrid: resolution must be > 0");
  }

  double resolution() const { return res_; }
  int width() const { return width_; }
  int height() const { return height_; }
  CellIndex window_origin() const { return origin_; }

  CellIndex world_to_cell(const Eigen::Vector2d& p) const {
    return {static_cast<int>(std::floor(p.x() / res_)), static_cast<int>(std::floor(p.y() / res_))};
  }
  Eigen::Vector2d cell_center(const CellIndex& c) const {
    return {(c.x + 0.5) * res_, (c.y + 0.5) * res_};
  }

  CellState at(const CellIndex& c) const {
    const int ix = c.x - origin_.x, iy = c.y - origin_.y;
    if (ix < 0 || iy < 0 || ix >= width_ || iy >= height_) return CellState::Unknown;
    return cells_[static_cast<size_t>(iy) * width_ + ix];
  }
  CellState state_at(const Eigen::Vector2d& p) const { return at(world_to_cell(p)); }

  void set(const CellIndex& c, CellState s) {
    ensure(c);
    cells_[static_cast<size_t>(c.y - origin_.y) * width_ + (c.x - origin_.x)] = s;
  }

  // Window iteration helper (row-major, deterministic).
  template <class Fn>
  void for_each_known(Fn&& fn) const {
    for (int iy = 0; iy < height_; ++iy) {
      for (int ix = 0; ix < width_; ++ix) {
        const CellState s = cells_[static_cast<size_t>(iy) * width_ + ix];
        if (s != CellState::Unknown) fn(CellIndex{origin_.x + ix, origin_.y + iy}, s);
      }
    }
  }

  std::vector<CellIndex> cells_in_state(CellState want) const {
    std::vector<CellIndex> out;
    for_each_known([&](const CellIndex& c, CellState s) {
      if (s == want) out.push_back(c);
    });
    return out;
  }

  int count(CellState want) const {
    int n = 0;
    for (const CellState s : cells_) n += (s == want);
    return n;
  }

 private:
  void ensure(const CellIndex& c) {
    if (width_ == 0) {
      constexpr int kInit = 16;
      origin_ = {c.x - kInit / 2, c.y - kInit / 2};
      width_ = height_ = kInit;
      cells_.assign(static_cast<size_t>(kInit) * kInit, CellState::Unknown);
      return;
    }
    const int ix = c.x - origin_.x, iy = c.y - origin_.y;
    if (ix >= 0 && iy >= 0 && ix < width_ && iy < height_) return;
    constexpr int kMargin = 32;
    const int nx0 = std::min(origin_.x, c.x - kMargin);
    const int ny0 = std::min(origin_.y, c.y - kMargin);
    const int nx1 = std::max(origin_.x + width_, c.x + kMargin + 1);
    const int ny1 = std::max(origin_.y + height_, c.y + kMargin + 1);
    std::vector<CellState> fresh(static_cast<size_t>(nx1 - nx0) * (ny1 - ny0), CellState::Unknown);
    for (int iy2 = 0; iy2 < height_; ++iy2) {
      std::copy_n(cells_.begin() + static_cast<size_t>(iy2) * width_, width_,
                  fresh.begin() + static_cast<size_t>(origin_.y + iy2 - ny0) * (nx1 - nx0) +
                      (origin_.x - nx0));
    }
    cells_ = std::move(fresh);
    origin_ = {nx0, ny0};
    width_ = nx1 - nx0;
    height_ = ny1 - ny0;
  }

  double res_;
  CellIndex origin_{0, 0};
  int width_ = 0, height_ = 0;
  std::vector<CellState> cells_;
};

namespace detail {

// Amanatides-Woo traversal: every cell the segment [p0, p1] passes through,
// in order, both endpoints' cells included.
inline void traverse_cells(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, double res,
                           std::vector<CellIndex>& out) {
  out.clear();
  Eigen::Vector2d a = p0 / res, b = p1 / res;  // continuous cell coords
  int cx = static_cast<int>(std::floor(a.x()));
  int cy = static_cast<int>(std::floor(a.y()));
  const int ex = static_cast<int>(std::floor(b.x()));
  const int ey = static_cast<int>(std::floor(b.y()));
  out.push_back({cx, cy});
  const Eigen::Vector2d d = b - a;
  const int sx = d.x() > 0 ? 1 : -1;
  const int sy = d.y() > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
  if (d.x() != 0.0) {
    const double next = sx > 0 ? (cx + 1.0) : cx;
    t_max_x = (next - a.x()) / d.x();
    t_dx = std::abs(1.0 / d.x());
  }
  if (d.y() != 0.0) {
    const double next = sy > 0 ? (cy + 1.0) : cy;
    t_max_y = (next - a.y()) / d.y();
    t_dy = std::abs(1.0 / d.y());
  }
  // Step count bound guards FP stall at exact corner crossings.
  const int max_steps = std::abs(ex - cx) + std::abs(ey - cy) + 4;
  for (int i = 0; i < max_steps && (cx != ex || cy != ey); ++i) {
    if (t_max_x <= t_max_y) {
      cx += sx;
      t_max_x += t_dx;
    } else {
      cy += sy;
      t_max_y += t_dy;
    }
    out.push_back({cx, cy});
  }
}

}  // namespace detail

struct IntegrateParams {
  // Fraction of the max range marked Free on a no-hit ray.
  double miss_truncation = 0.95;
};

// Folds one scan into the grid. Within a single call Occupied endpoints win
// over Free traversal (a later mark in this scan cannot be erased by an
// earlier ray); across calls newer evidence overwrites older.
inline void integrate_scan(OccupancyGrid& grid, const Pose2& pose, const Observation& obs,
                           const Camera1D& cam, const IntegrateParams& ip = {}) {
  if (obs.width() != cam.width) throw std::invalid_argument("integrate_scan: width mismatch");
  std::vector<CellIndex> free_cells, occ_cells, line;
  const Eigen::Vector2d p0 = pose.translation();
  const Eigen::Matrix2d R = pose.rotation();
  for (int i = 0; i < cam.width; ++i) {
    const Eigen::Vector2d db = cam.ray_dir_body(i);
    const Eigen::Vector2d dw = R * db;
    const double z = obs.depth[i];
    const bool hit = z < cam.max_depth - 1e-9;
    const double range = (hit ? z : cam.max_depth * ip.miss_truncation) / db.x();
    const Eigen::Vector2d end = p0 + range * dw;
    detail::traverse_cells(p0, end, grid.resolution(), line);
    if (hit && !line.empty()) {
      occ_cells.push_back(line.back());
      line.pop_back();
    }
    free_cells.insert(free_cells.end(), line.begin(), line.end());
  }
  for (const CellIndex& c : free_cells) grid.set(c, CellState::Free);
  for (const CellIndex& c : occ_cells) grid.set(c, CellState::Occupied);
}

// A frontier is a connected set (8-connectivity) of Free cells that touch
// Unknown space. Results are sorted by size descending, ties by centroid
// (x, then y), so index 0 is always the largest frontier.
struct Frontier {
  std::vector<CellIndex> cells;
  Eigen::Vector2d centroid{0, 0};
  int size() const { return static_cast<int>(cells.size()); }
};

inline std::vector<Frontier> extract_frontiers(const OccupancyGrid& grid, int min_size) {
  auto is_frontier = [&](const CellIndex& c) {
    if (grid.at(c) != CellState::Free) return false;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (grid.at({c.x + dx, c.y + dy}) == CellState::Unknown) return true;
      }
    }
    return false;
  };

  std::vector<CellIndex> seeds;
  grid.for_each_known([&](const CellIndex& c, CellState) {
    if (is_frontier(c)) seeds.push_back(c);
  });

  std::vector<CellIndex> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  auto is_seed = [&](const CellIndex& c) {
    return std::binary_search(sorted.begin(), sorted.end(), c);
  };

  std::vector<Frontier> out;
  std::vector<CellIndex> visited;
  auto seen = [&](const CellIndex& c) {
    return std::binary_search(visited.begin(), visited.end(), c);
  };
  for (const CellIndex& seed : seeds) {
    if (seen(seed)) continue;
    Frontier f;
    std::deque<CellIndex> queue{seed};
    visited.insert(std::lower_bound(visited.begin(), visited.end(), seed), seed);
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      f.cells.push_back(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const CellIndex n{c.x + dx, c.y + dy};
          if (!is_seed(n) || seen(n)) continue;
          visited.insert(std::lower_bound(visited.begin(), visited.end(), n), n);
          queue.push_back(n);
        }
      }
    }
    if (f.size() < min_size) continue;
    Eigen::Vector2d sum(0, 0);
    for (const CellIndex& c : f.cells) sum += grid.cell_center(c);
    f.centroid = sum / f.size();
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    if (a.centroid.x() != b.centroid.x()) return a.centroid.x() < b.centroid.x();
    return a.centroid.y() < b.centroid.y();
  });
  return out;
}

// Fraction of ground-truth free positions the grid has discovered as Free.
inline double completeness(const OccupancyGrid& grid, const std::vector<Eigen::Vector2d>& gt_free) {
  if (gt_free.empty()) throw std::invalid_argument("completeness: empty ground-truth set");
  int hit = 0;
  for (const auto& p : gt_free) hit += (grid.state_at(p) == CellState::Free);
  return static_cast<double>(hit) / static_cast<double>(gt_free.size());
}

// Grid export: binary PGM (row 0 = highest y, so the image reads like a
// map) plus a JSON sidecar with the georeferencing.
inline void save_occupancy(const std::string& pgm_path, const std::string& json_path,
                           const OccupancyGrid& grid) {
  const int w = std::max(grid.width(), 1), h = std::max(grid.height(), 1);
  std::vector<std::uint8_t> gray(static_cast<size_t>(w) * h, cell_gray(CellState::Unknown));
  const CellIndex o = grid.window_origin();
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      const CellIndex c{o.x + col, o.y + grid.height() - 1 - row};
      gray[static_cast<size_t>(row) * w + col] = cell_gray(grid.at(c));
    }
  }
  write_pgm(pgm_path, w, h, gray);

  nlohmann::json meta;
  meta["resolution"] = grid.resolution();
  meta["width"] = w;
  meta["height"] = h;
  meta["origin_cell"] = {o.x, o.y};
  meta["origin_world"] = {o.x * grid.resolution(), o.y * grid.resolution()};
  meta["row0_is_max_y"] = true;
  meta["encoding"] = {{"unknown", 127}, {"free", 255}, {"occupied", 0}};
  std::ofstream f(json_path);
  if (!f) throw std::runtime_error("cannot open for writing: " + json_path);
  f << meta.dump(2) << "\n";
}

inline OccupancyGrid load_occupancy(const std::string& pgm_path, const std::string& json_path) {
  std::ifstream jf(json_path);
  if (!jf) throw std::runtime_error("cannot open for reading: " + json_path);
  nlohmann::json meta = nlohmann::json::parse(jf);
  OccupancyGrid grid(meta.at("resolution").get<double>());
  const int w = meta.at("width").get<int>(), h = meta.at("height").get<int>();
  const int ox = meta.at("origin_cell")[0].get<int>(), oy = meta.at("origin_cell")[1].get<int>();

  std::ifstream pf(pgm_path, std::ios::binary);
  if (!pf) throw std::runtime_error("cannot open for reading: " + pgm_path);
  std::string magic;
  int pw, ph, maxv;
  pf >> magic >> pw >> ph >> maxv;
  if (magic != "P5" || maxv != 255) throw std::runtime_error("unsupported PGM: " + pgm_path);
  pf.get();  // single whitespace after header
  std::vector<std::uint8_t> gray(static_cast<size_t>(pw) * ph);
  pf.read(reinterpret_cast<char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!pf || pw != w || ph != h) throw std::runtime_error("PGM/sidecar mismatch: " + pgm_path);

  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::uint8_t g = gray[static_cast<size_t>(row) * w + col];
      const CellIndex c{ox + col, oy + h - 1 - row};
      if (g == 255) grid.set(c, CellState::Free);
      else if (g == 0) grid.set(c, CellState::Occupied);
    }
  }
  return grid;
}

}  // namespace activemap
