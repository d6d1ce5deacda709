#include "htrpn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace htrpn {

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) {
    // No overlap; still 0 by the zero-union rule when both degenerate.
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

BoxDelta encode_deltas(const Box& anchor, const Box& gt) {
  const double aw = anchor.width();
  const double ah = anchor.height();
  if (aw <= 0.0 || ah <= 0.0) {
    throw std::invalid_argument("encode_deltas: degenerate anchor");
  }
  const double gw = gt.width();
  const double gh = gt.height();
  if (gw <= 0.0 || gh <= 0.0) {
    throw std::invalid_argument("encode_deltas: degenerate target box");
  }
  BoxDelta d;
  d.dx = (gt.cx() - anchor.cx()) / aw;
  d.dy = (gt.cy() - anchor.cy()) / ah;
  d.dw = std::log(gw / aw);
  d.dh = std::log(gh / ah);
  return d;
}

Box decode_deltas(const Box& anchor, const BoxDelta& d) {
  const double aw = anchor.width();
  const double ah = anchor.height();
  if (aw <= 0.0 || ah <= 0.0) {
    throw std::invalid_argument("decode_deltas: degenerate anchor");
  }
  const double cx = anchor.cx() + d.dx * aw;
  const double cy = anchor.cy() + d.dy * ah;
  const double w = aw * std::exp(d.dw);
  const double h = ah * std::exp(d.dh);
  return Box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

double smooth_l1_kernel(double residual) {
  const double r = std::abs(residual);
  return r < 1.0 ? 0.5 * r * r : r - 0.5;
}

double smooth_l1(std::span<const BoxDelta> pred, std::span<const BoxDelta> target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("smooth_l1: length mismatch");
  }
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += smooth_l1_kernel(pred[i].dx - target[i].dx);
    sum += smooth_l1_kernel(pred[i].dy - target[i].dy);
    sum += smooth_l1_kernel(pred[i].dw - target[i].dw);
    sum += smooth_l1_kernel(pred[i].dh - target[i].dh);
  }
  return sum / (4.0 * static_cast<double>(pred.size()));
}

}  // namespace htrpn
