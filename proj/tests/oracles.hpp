#pragma once

// Naive reference implementations the tests compare the library against.
// Everything here is written as a direct transcription, with none of the
// library's stabilization or caching.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "htrpn/losses.hpp"
#include "htrpn/rng.hpp"

namespace oracle {

// Random contrastive batch; gaussian features, labels in [0, max_label],
// IoUs uniform in [0, 1] so both sides of the phi clip get exercised.
inline htrpn::ContrastiveBatch random_batch(htrpn::Rng& rng, std::int64_t n,
                                            std::int64_t dim, int max_label) {
  htrpn::ContrastiveBatch b;
  b.dim = dim;
  for (std::int64_t i = 0; i < n; ++i) {
    b.labels.push_back(static_cast<int>(rng.uniform_int(0, max_label)));
    b.ious.push_back(rng.real01());
    for (std::int64_t c = 0; c < dim; ++c)
      b.features.push_back(rng.normal(0.0, 1.0));
  }
  return b;
}

inline std::vector<std::vector<double>> unit_rows(const htrpn::ContrastiveBatch& b) {
  const auto n = static_cast<std::size_t>(b.size());
  const auto d = static_cast<std::size_t>(b.dim);
  std::vector<std::vector<double>> z(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) norm += b.features[i * d + c] * b.features[i * d + c];
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < d; ++c) z[i][c] = b.features[i * d + c] / norm;
  }
  return z;
}

// Weighted supervised contrastive mean, written as the double loop.
inline double tcon(const htrpn::ContrastiveBatch& b, double tau, double phi) {
  const auto n = static_cast<std::size_t>(b.size());
  const auto z = unit_rows(b);
  auto zdot = [&](std::size_t a, std::size_t c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < z[a].size(); ++k) acc += z[a][k] * z[c][k];
    return acc;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.ious[i] < phi) continue;
    std::size_t same = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (b.labels[j] == b.labels[i]) ++same;
    }
    if (same < 2) continue;
    double li = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || b.labels[j] != b.labels[i]) continue;
      double den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) den += std::exp(zdot(i, k) / tau);
      }
      li += std::log(std::exp(zdot(i, j) / tau) / den);
    }
    acc += -li / static_cast<double>(same - 1);
  }
  return acc / static_cast<double>(n);
}

// Central finite differences of the library loss.
inline std::vector<double> fd_grad(htrpn::ContrastiveBatch b, double tau, double phi,
                                   double h = 1e-5) {
  std::vector<double> grad(b.features.size(), 0.0);
  for (std::size_t c = 0; c < b.features.size(); ++c) {
    const double kept = b.features[c];
    b.features[c] = kept + h;
    const double up = htrpn::tcon_loss(b, tau, phi);
    b.features[c] = kept - h;
    const double down = htrpn::tcon_loss(b, tau, phi);
    b.features[c] = kept;
    grad[c] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Relative error with a floor, so near-zero coordinates are judged absolutely.
inline double grad_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    worst = std::max(worst, std::abs(a[c] - b[c]) /
                                std::max({std::abs(a[c]), std::abs(b[c]), 1e-4}));
  }
  return worst;
}

// IoU of integer boxes by counting unit lattice cells one at a time.
inline double pixel_iou(int ax1, int ay1, int ax2, int ay2, int bx1, int by1,
                        int bx2, int by2) {
  const int lo_x = std::min(ax1, bx1);
  const int hi_x = std::max(ax2, bx2);
  const int lo_y = std::min(ay1, by1);
  const int hi_y = std::max(ay2, by2);
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (int x = lo_x; x < hi_x; ++x) {
    for (int y = lo_y; y < hi_y; ++y) {
      const bool in_a = x >= ax1 && x < ax2 && y >= ay1 && y < ay2;
      const bool in_b = x >= bx1 && x < bx2 && y >= by1 && y < by2;
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Drawing m of N pooled items with K marked: mean and variance of the marked
// count in the draw.
inline double hyper_mean(double m, double K, double N) { return m * K / N; }
inline double hyper_var(double m, double K, double N) {
  const double p = K / N;
  return m * p * (1.0 - p) * (N - m) / (N - 1.0);
}

// Plain softmax cross entropy without stabilization.
inline double softmax_ce(const std::vector<double>& logits, std::size_t label) {
  double den = 0.0;
  for (double v : logits) den += std::exp(v);
  return -std::log(std::exp(logits[label]) / den);
}

}  // namespace oracle
