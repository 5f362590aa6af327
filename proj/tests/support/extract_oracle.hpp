#pragma once

// O(n^4) reference for phrase extraction: enumerate every box and test the
// consistency predicate directly.

#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace extract_oracle {

using Box = std::tuple<int, int, int, int>;  // s1, s2, t1, t2; [begin, end)

inline std::set<Box> consistent_boxes(
    const std::vector<std::pair<int, int>>& links, int m, int n, int max_len) {
  std::set<Box> out;
  for (int s1 = 0; s1 < m; ++s1)
    for (int s2 = s1 + 1; s2 <= m && s2 - s1 <= max_len; ++s2)
      for (int t1 = 0; t1 < n; ++t1)
        for (int t2 = t1 + 1; t2 <= n && t2 - t1 <= max_len; ++t2) {
          bool any_inside = false, ok = true;
          for (const auto& [i, j] : links) {
            const bool in_src = i >= s1 && i < s2;
            const bool in_tgt = j >= t1 && j < t2;
            if (in_src && in_tgt) any_inside = true;
            if (in_src != in_tgt) {
              ok = false;
              break;
            }
          }
          if (any_inside && ok) out.insert({s1, s2, t1, t2});
        }
  return out;
}

}  // namespace extract_oracle
