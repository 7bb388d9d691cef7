#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "semfem/errors.hpp"

namespace semfem {

// Dorfler (bulk) marking: the shortest prefix of elements, sorted by decay
// descending with index ascending as the tie-break, whose decay sum reaches
// theta times the total. Negative decays are clamped to zero; a zero total
// yields the empty set (nothing left to gain). Returns ascending element ids.
inline std::vector<int> dorfler_mark(const std::vector<double>& decays, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("dorfler_mark: theta must be in (0,1)");
  std::vector<double> d(decays);
  for (double& v : d) v = std::max(v, 0.0);
  double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (total == 0.0) return {};
  std::vector<int> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return d[a] != d[b] ? d[a] > d[b] : a < b;
  });
  const double target = theta * total;
  double run = 0.0;
  std::size_t take = 0;
  while (take < order.size() && run < target) run += d[order[take++]];
  std::vector<int> marked(order.begin(), order.begin() + take);
  std::sort(marked.begin(), marked.end());
  return marked;
}

}  // namespace semfem
