#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace htrpn {

// Row-major feature matrix plus the per-row label and best-IoU metadata the
// contrastive terms consume. Features need not be pre-normalized; the loss
// normalizes internally.
struct ContrastiveBatch {
  std::vector<double> features;  // n * dim, row-major
  std::int64_t dim = 0;
  std::vector<int> labels;
  std::vector<double> ious;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  std::span<const double> row(std::int64_t i) const {
    return {features.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  void validate() const;
};

struct LossWeights {
  double alpha = 0.5;     // weight of the RoI contrastive term
  double lambda = 0.5;    // weight of the ternary-consistency term
  double tau = 0.2;       // contrastive temperature
  double phi = 0.7;       // IoU clip for the contrastive weight
  double thre_cls = 0.75; // label-2 confidence gate

  void validate() const;
};

// Raw measured pieces fed into the assembly.
struct LossParts {
  double cls = 0.0;
  double bbox = 0.0;
  double obj = 0.0;
  double tcon = 0.0;
  double contra = 0.0;
};

struct LossBreakdown {
  double l_cls = 0.0;
  double l_bbox = 0.0;
  double l_obj = 0.0;
  double l_tcon = 0.0;
  double l_tobj = 0.0;   // l_obj + lambda * l_tcon
  double l_contra = 0.0;
  double total = 0.0;    // l_cls + l_bbox + l_tobj + alpha * l_contra
};

// Cross entropy of one 3-way softmax row, stabilized by max subtraction.
double ternary_ce_row(const std::array<double, 3>& logits, int label);

// Mean ternary cross entropy over a labeled batch.
double ternary_ce(std::span<const std::array<double, 3>> logits,
                  std::span<const int> labels);

// Same kernel with an arbitrary class count (RoI classification head).
double cls_ce_row(std::span<const double> logits, std::int64_t label);
double instance_cls_loss(std::span<const std::vector<double>> logits,
                         std::span<const std::int64_t> labels);

// Hard clip: rows below the IoU threshold contribute nothing.
double contrast_weight(double iou, double phi);

// Supervised contrastive term for row i over unit-normalized rows: mean over
// same-label partners j of -log softmax_{k != i}(z_i . z_k / tau)[j].
// Rows whose label appears only once contribute zero.
double sup_con_per_sample(const ContrastiveBatch& batch, std::int64_t i, double tau);

// IoU-weighted mean of the per-sample terms across the batch.
double tcon_loss(const ContrastiveBatch& batch, double tau, double phi);

// Analytic gradient of tcon_loss with respect to every feature entry,
// including the chain rule through the unit normalization.
std::vector<double> sup_con_grad(const ContrastiveBatch& batch, double tau, double phi);

// Identical machinery over instance-class labels (the RoI feature branch).
double roi_contra_loss(const ContrastiveBatch& batch, double tau, double phi);

LossBreakdown total_loss(const LossParts& parts, const LossWeights& weights);

}  // namespace htrpn
