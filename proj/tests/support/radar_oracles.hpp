#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gpr/scene/bscan.hpp"

namespace gpr::testing {

// Per-column time index of the strongest |amplitude|.
inline std::vector<std::size_t> peak_rows(const scene::BScan& b) {
  std::vector<std::size_t> rows(b.traces, 0);
  for (std::size_t k = 0; k < b.traces; ++k) {
    float best = -1.0F;
    for (std::size_t i = 0; i < b.samples; ++i) {
      const float a = std::abs(b.amplitude[i * b.traces + k]);
      if (a > best) {
        best = a;
        rows[k] = i;
      }
    }
  }
  return rows;
}

// Apex trace: centre of the run of columns whose peak time is minimal.
// Columns without any echo (beyond the antenna footprint) are skipped.
inline double apex_trace(const scene::BScan& b) {
  const auto rows = peak_rows(b);
  std::vector<float> peak(b.traces, 0.0F);
  for (std::size_t k = 0; k < b.traces; ++k) peak[k] = std::abs(b.amplitude[rows[k] * b.traces + k]);
  float loudest = 0.0F;
  for (float p : peak) loudest = std::max(loudest, p);
  auto heard = [&](std::size_t k) { return peak[k] > 1e-3F * loudest; };
  std::size_t lo = b.traces;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (heard(k) && (lo == b.traces || rows[k] < rows[lo])) lo = k;
  }
  if (lo == b.traces) return -1.0;
  std::size_t hi = lo;
  while (hi + 1 < rows.size() && heard(hi + 1) && rows[hi + 1] == rows[lo]) ++hi;
  return 0.5 * static_cast<double>(lo + hi);
}

// Strict 8-neighbour local maxima above `floor`, returned as (row, col).
inline std::vector<std::pair<std::size_t, std::size_t>> local_maxima(const std::vector<double>& v, std::size_t rows,
                                                                    std::size_t cols, double floor) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = v[r * cols + c];
      if (x <= floor) continue;
      bool peak = true;
      for (int dr = -1; dr <= 1 && peak; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (!dr && !dc) continue;
          const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(rows) || cc >= static_cast<long>(cols)) continue;
          if (v[rr * cols + cc] >= x) {
            peak = false;
            break;
          }
        }
      }
      if (peak) out.emplace_back(r, c);
    }
  }
  return out;
}

// 4-connected components of a binary mask.
inline std::size_t component_count(const std::vector<std::uint8_t>& mask, std::size_t rows, std::size_t cols) {
  std::vector<int> label(mask.size(), 0);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s] || label[s]) continue;
    ++count;
    stack.push_back(s);
    label[s] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t r = i / cols, c = i % cols;
      const std::size_t nbr[4] = {r > 0 ? i - cols : i, r + 1 < rows ? i + cols : i, c > 0 ? i - 1 : i,
                                  c + 1 < cols ? i + 1 : i};
      for (auto j : nbr) {
        if (mask[j] && !label[j]) {
          label[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return count;
}

}  // namespace gpr::testing
