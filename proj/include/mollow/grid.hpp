#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mollow {

/// n points evenly spaced on [lo, hi]; n == 1 gives {lo}.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) out.back() = hi;
  return out;
}

/// n points evenly spaced in log10 on [lo, hi]; both ends positive.
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out = linspace(std::log10(lo), std::log10(hi), n);
  for (double& v : out) v = std::pow(10.0, v);
  if (n > 0) out.front() = lo;
  if (n > 1) out.back() = hi;
  return out;
}

}  // namespace mollow
