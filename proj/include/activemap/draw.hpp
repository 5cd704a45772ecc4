#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include <Eigen/Dense>

#include "activemap/image.hpp"

namespace activemap {

// Bresenham segment between pixel coordinates, clipped to the image.
inline void draw_line(Image& img, int x0, int y0, int x1, int y1, const Eigen::Vector3d& color) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set_clipped(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Eight-armed asterisk star centered on (cx, cy).
inline void draw_star(Image& img, int cx, int cy, const Eigen::Vector3d& color, int arm = 4) {
  draw_line(img, cx - arm, cy, cx + arm, cy, color);
  draw_line(img, cx, cy - arm, cx, cy + arm, color);
  const int d = std::max(1, (arm * 7) / 10);  // ~arm/sqrt(2)
  draw_line(img, cx - d, cy - d, cx + d, cy + d, color);
  draw_line(img, cx - d, cy + d, cx + d, cy - d, color);
}

// Filled diamond: Manhattan ball of the given radius.
inline void draw_diamond(Image& img, int cx, int cy, const Eigen::Vector3d& color, int radius = 3) {
  for (int dy = -radius; dy <= radius; ++dy) {
    const int span = radius - std::abs(dy);
    for (int dx = -span; dx <= span; ++dx) img.set_clipped(cx + dx, cy + dy, color);
  }
}

namespace detail {

// 5x7 bitmap digits, one byte per row, low 5 bits used (MSB-left).
inline constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigitFont = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
}};

}  // namespace detail

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphSpacing = 1;

inline void draw_digit(Image& img, int left, int top, int digit, const Eigen::Vector3d& color) {
  if (digit < 0 || digit > 9) return;
  const auto& rows = detail::kDigitFont[static_cast<size_t>(digit)];
  for (int r = 0; r < kGlyphHeight; ++r) {
    for (int c = 0; c < kGlyphWidth; ++c) {
      if (rows[static_cast<size_t>(r)] & (1u << (kGlyphWidth - 1 - c))) {
        img.set_clipped(left + c, top + r, color);
      }
    }
  }
}

// Non-negative integer centered on (cx, cy), digits left to right.
inline void draw_number(Image& img, int cx, int cy, int value, const Eigen::Vector3d& color) {
  const std::string s = std::to_string(value);
  const int total_w =
      static_cast<int>(s.size()) * kGlyphWidth + (static_cast<int>(s.size()) - 1) * kGlyphSpacing;
  int left = cx - total_w / 2;
  const int top = cy - kGlyphHeight / 2;
  for (char ch : s) {
    if (ch >= '0' && ch <= '9') draw_digit(img, left, top, ch - '0', color);
    left += kGlyphWidth + kGlyphSpacing;
  }
}

}  // namespace activemap
