#pragma once

// Brute-force point-by-point metric formulas, written independently of the
// library's confusion-count implementation.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace pcsod::oracle {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline std::vector<int> binarize(const std::vector<double>& p, double t) {
  std::vector<int> b(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) b[i] = p[i] >= t ? 1 : 0;
  return b;
}

inline Counts counts(const std::vector<int>& b, const std::vector<std::uint8_t>& g) {
  Counts c;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] && g[i]) ++c.tp;
    if (b[i] && !g[i]) ++c.fp;
    if (!b[i] && g[i]) ++c.fn;
    if (!b[i] && !g[i]) ++c.tn;
  }
  return c;
}

inline double mae(const std::vector<double>& p, const std::vector<std::uint8_t>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - g[i]);
  return s / static_cast<double>(p.size());
}

inline std::optional<double> f_measure(const std::vector<int>& b, const std::vector<std::uint8_t>& g,
                                       double beta_sq = 0.3) {
  const Counts c = counts(b, g);
  if (c.tp + c.fn == 0) return std::nullopt;
  const double prec = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fp);
  const double reca = double(c.tp) / double(c.tp + c.fn);
  if (prec == 0.0 && reca == 0.0) return 0.0;
  return (1.0 + beta_sq) * prec * reca / (beta_sq * prec + reca);
}

inline double e_measure(const std::vector<int>& b, const std::vector<std::uint8_t>& g, double eps = 1e-12) {
  const std::size_t n = b.size();
  bool b_const = true, g_const = true;
  for (std::size_t i = 1; i < n; ++i) {
    b_const = b_const && b[i] == b[0];
    g_const = g_const && g[i] == g[0];
  }
  if (b_const && g_const) return b[0] == int(g[0]) ? 1.0 : 0.0;
  double mb = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mb += b[i];
    mg += g[i];
  }
  mb /= double(n);
  mg /= double(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pb = b[i] - mb, pg = g[i] - mg;
    const double xi = 2.0 * pb * pg / (pb * pb + pg * pg + eps);
    total += (1.0 + xi) * (1.0 + xi) / 4.0;
  }
  return total / double(n);
}

inline double iou(const std::vector<int>& b, const std::vector<std::uint8_t>& g) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    inter += b[i] && g[i];
    uni += b[i] || g[i];
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

}  // namespace pcsod::oracle
