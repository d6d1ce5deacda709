#pragma once

#include <span>

namespace htrpn {

// Axis-aligned box in continuous pixel coordinates, corner form.
// Zero-area boxes are legal degenerate values; their IoU with anything is 0.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
};

// Center offsets relative to anchor size plus log-scale size ratios.
struct BoxDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
};

// |a ∩ b| / |a ∪ b|; 0 when the union has zero area.
double iou(const Box& a, const Box& b);

// Throws std::invalid_argument on a degenerate (non-positive size) anchor,
// and encode additionally on a degenerate target.
BoxDelta encode_deltas(const Box& anchor, const Box& gt);
Box decode_deltas(const Box& anchor, const BoxDelta& d);

// Per-coordinate kernel: 0.5 r^2 for |r| < 1, |r| - 0.5 otherwise.
double smooth_l1_kernel(double residual);

// Mean of the kernel over all 4*n coordinates. Throws on length mismatch.
double smooth_l1(std::span<const BoxDelta> pred, std::span<const BoxDelta> target);

}  // namespace htrpn
