#pragma once

// Exhaustive reference for TER on short sentences: minimum of
// shifts + edit distance over all shift sequences up to a given depth,
// where a shift moves any contiguous block to any new position.

#include <algorithm>
#include <string>
#include <vector>

namespace ter_oracle {

using Sent = std::vector<std::string>;

inline int edit_distance(const Sent& a, const Sent& b) {
  std::vector<std::vector<int>> d(a.size() + 1,
                                  std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

inline int min_edits(const Sent& hyp, const Sent& ref, int shifts_left) {
  int best = edit_distance(hyp, ref);
  if (shifts_left == 0 || hyp.size() < 2) return best;
  for (std::size_t b = 0; b < hyp.size(); ++b) {
    for (std::size_t e = b + 1; e <= hyp.size(); ++e) {
      Sent rest;
      for (std::size_t i = 0; i < hyp.size(); ++i)
        if (i < b || i >= e) rest.push_back(hyp[i]);
      for (std::size_t pos = 0; pos <= rest.size(); ++pos) {
        if (pos == b) continue;  // no-op move
        Sent moved = rest;
        moved.insert(moved.begin() + static_cast<long>(pos),
                     hyp.begin() + static_cast<long>(b),
                     hyp.begin() + static_cast<long>(e));
        best = std::min(best, 1 + min_edits(moved, ref, shifts_left - 1));
      }
    }
  }
  return best;
}

}  // namespace ter_oracle
