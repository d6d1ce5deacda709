#include "htrpn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace htrpn {

void ContrastiveBatch::validate() const {
  const auto n = size();
  if (n < 1) {
    throw std::invalid_argument("ContrastiveBatch: at least one row required");
  }
  if (dim <= 0) {
    throw std::invalid_argument("ContrastiveBatch: dim must be positive");
  }
  if (static_cast<std::int64_t>(features.size()) != n * dim) {
    throw std::invalid_argument("ContrastiveBatch: features must hold n * dim values");
  }
  if (static_cast<std::int64_t>(ious.size()) != n) {
    throw std::invalid_argument("ContrastiveBatch: one IoU per row required");
  }
}

void LossWeights::validate() const {
  if (alpha < 0.0 || lambda < 0.0) {
    throw std::invalid_argument("LossWeights: alpha and lambda must be >= 0");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("LossWeights: tau must be positive");
  }
  if (!(phi >= 0.0 && phi <= 1.0) || !(thre_cls >= 0.0 && thre_cls <= 1.0)) {
    throw std::invalid_argument("LossWeights: phi and thre_cls must lie in [0, 1]");
  }
}

namespace {

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

double ternary_ce_row(const std::array<double, 3>& logits, int label) {
  if (label < 0 || label > 2) {
    throw std::invalid_argument("ternary_ce: label must be 0, 1 or 2");
  }
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

double ternary_ce(std::span<const std::array<double, 3>> logits,
                  std::span<const int> labels) {
  if (logits.size() != labels.size()) {
    throw std::invalid_argument("ternary_ce: logits/labels size mismatch");
  }
  if (logits.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    acc += ternary_ce_row(logits[i], labels[i]);
  }
  return acc / static_cast<double>(logits.size());
}

double cls_ce_row(std::span<const double> logits, std::int64_t label) {
  if (logits.empty()) {
    throw std::invalid_argument("cls_ce: empty logits");
  }
  if (label < 0 || label >= static_cast<std::int64_t>(logits.size())) {
    throw std::invalid_argument("cls_ce: label out of range");
  }
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

double instance_cls_loss(std::span<const std::vector<double>> logits,
                         std::span<const std::int64_t> labels) {
  if (logits.size() != labels.size()) {
    throw std::invalid_argument("instance_cls_loss: logits/labels size mismatch");
  }
  if (logits.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    acc += cls_ce_row(logits[i], labels[i]);
  }
  return acc / static_cast<double>(logits.size());
}

double contrast_weight(double iou, double phi) {
  return iou >= phi ? 1.0 : 0.0;
}

namespace {

// Unit-normalized copies of the rows plus the original norms (needed to push
// gradients back through the normalization).
struct UnitRows {
  std::vector<double> z;
  std::vector<double> norm;
};

UnitRows normalize_rows(const ContrastiveBatch& b) {
  const auto n = b.size();
  const auto d = b.dim;
  UnitRows u;
  u.z.resize(static_cast<std::size_t>(n * d));
  u.norm.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::int64_t c = 0; c < d; ++c) {
      const double v = b.features[static_cast<std::size_t>(i * d + c)];
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::domain_error("contrastive features: row has zero or non-finite norm");
    }
    u.norm[static_cast<std::size_t>(i)] = norm;
    for (std::int64_t c = 0; c < d; ++c) {
      u.z[static_cast<std::size_t>(i * d + c)] =
          b.features[static_cast<std::size_t>(i * d + c)] / norm;
    }
  }
  return u;
}

// How many rows share each row's label, the row itself included.
std::vector<std::int64_t> label_multiplicity(std::span<const int> labels) {
  std::vector<std::int64_t> count(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == labels[i]) ++count[i];
    }
  }
  return count;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) acc += a[c] * b[c];
  return acc;
}

double per_sample_term(const UnitRows& u, std::span<const int> labels,
                       std::int64_t n, std::int64_t d, std::int64_t i,
                       std::int64_t n_label, double tau) {
  if (n_label <= 1) return 0.0;
  const std::span<const double> zi{u.z.data() + i * d, static_cast<std::size_t>(d)};
  std::vector<double> sims;
  sims.reserve(static_cast<std::size_t>(n - 1));
  std::vector<double> pos_sims;
  for (std::int64_t k = 0; k < n; ++k) {
    if (k == i) continue;
    const std::span<const double> zk{u.z.data() + k * d, static_cast<std::size_t>(d)};
    const double s = dot(zi, zk) / tau;
    sims.push_back(s);
    if (labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(i)]) {
      pos_sims.push_back(s);
    }
  }
  const double logdenom = log_sum_exp(sims);
  double acc = 0.0;
  for (double s : pos_sims) acc += s - logdenom;
  return -acc / static_cast<double>(n_label - 1);
}

void check_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

double weighted_supcon_loss(const ContrastiveBatch& b, double tau, double phi) {
  const auto n = b.size();
  const auto u = normalize_rows(b);
  const auto mult = label_multiplicity(b.labels);
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = contrast_weight(b.ious[static_cast<std::size_t>(i)], phi);
    if (w == 0.0) continue;
    acc += w * per_sample_term(u, b.labels, n, b.dim, i,
                               mult[static_cast<std::size_t>(i)], tau);
  }
  return acc / static_cast<double>(n);
}

}  // namespace

double sup_con_per_sample(const ContrastiveBatch& batch, std::int64_t i, double tau) {
  check_tau(tau);
  batch.validate();
  if (i < 0 || i >= batch.size()) {
    throw std::invalid_argument("sup_con_per_sample: row index out of range");
  }
  const auto u = normalize_rows(batch);
  const auto mult = label_multiplicity(batch.labels);
  return per_sample_term(u, batch.labels, batch.size(), batch.dim, i,
                         mult[static_cast<std::size_t>(i)], tau);
}

double tcon_loss(const ContrastiveBatch& batch, double tau, double phi) {
  check_tau(tau);
  batch.validate();
  return weighted_supcon_loss(batch, tau, phi);
}

std::vector<double> sup_con_grad(const ContrastiveBatch& batch, double tau, double phi) {
  check_tau(tau);
  batch.validate();
  const auto n = batch.size();
  const auto d = batch.dim;
  const auto u = normalize_rows(batch);
  const auto mult = label_multiplicity(batch.labels);

  // Gradient with respect to the unit rows first: for each anchor row i,
  // d/ds_ij = (w_i / n) (p_ij - [same label]/(n_label - 1)), then each
  // similarity spreads into both rows it touches.
  std::vector<double> gz(static_cast<std::size_t>(n * d), 0.0);
  std::vector<double> sims(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = contrast_weight(batch.ious[static_cast<std::size_t>(i)], phi);
    const auto n_label = mult[static_cast<std::size_t>(i)];
    if (w == 0.0 || n_label <= 1) continue;
    const std::span<const double> zi{u.z.data() + i * d, static_cast<std::size_t>(d)};

    double smax = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const std::span<const double> zk{u.z.data() + k * d, static_cast<std::size_t>(d)};
      sims[static_cast<std::size_t>(k)] = dot(zi, zk) / tau;
      smax = std::max(smax, sims[static_cast<std::size_t>(k)]);
    }
    double denom = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      if (k != i) denom += std::exp(sims[static_cast<std::size_t>(k)] - smax);
    }

    const double scale = w / static_cast<double>(n);
    const double inv_pos = 1.0 / static_cast<double>(n_label - 1);
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double p = std::exp(sims[static_cast<std::size_t>(j)] - smax) / denom;
      const bool same = batch.labels[static_cast<std::size_t>(j)] ==
                        batch.labels[static_cast<std::size_t>(i)];
      const double coeff = scale * (p - (same ? inv_pos : 0.0)) / tau;
      const std::span<const double> zj{u.z.data() + j * d, static_cast<std::size_t>(d)};
      for (std::int64_t c = 0; c < d; ++c) {
        gz[static_cast<std::size_t>(i * d + c)] += coeff * zj[static_cast<std::size_t>(c)];
        gz[static_cast<std::size_t>(j * d + c)] += coeff * zi[static_cast<std::size_t>(c)];
      }
    }
  }

  // Push back through z = f / |f|: g = (gz - (gz . z) z) / |f|.
  std::vector<double> grad(static_cast<std::size_t>(n * d), 0.0);
  for (std::int64_t a = 0; a < n; ++a) {
    const std::span<const double> za{u.z.data() + a * d, static_cast<std::size_t>(d)};
    const std::span<const double> ga{gz.data() + a * d, static_cast<std::size_t>(d)};
    const double proj = dot(ga, za);
    const double inv_norm = 1.0 / u.norm[static_cast<std::size_t>(a)];
    for (std::int64_t c = 0; c < d; ++c) {
      grad[static_cast<std::size_t>(a * d + c)] =
          (ga[static_cast<std::size_t>(c)] - proj * za[static_cast<std::size_t>(c)]) * inv_norm;
    }
  }
  return grad;
}

double roi_contra_loss(const ContrastiveBatch& batch, double tau, double phi) {
  check_tau(tau);
  batch.validate();
  return weighted_supcon_loss(batch, tau, phi);
}

LossBreakdown total_loss(const LossParts& parts, const LossWeights& weights) {
  weights.validate();
  for (double v : {parts.cls, parts.bbox, parts.obj, parts.tcon, parts.contra}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("total_loss: parts must be finite");
    }
  }
  LossBreakdown out;
  out.l_cls = parts.cls;
  out.l_bbox = parts.bbox;
  out.l_obj = parts.obj;
  out.l_tcon = parts.tcon;
  out.l_contra = parts.contra;
  out.l_tobj = parts.obj + weights.lambda * parts.tcon;
  out.total = parts.cls + parts.bbox + out.l_tobj + weights.alpha * parts.contra;
  return out;
}

}  // namespace htrpn
