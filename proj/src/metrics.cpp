#include "uncseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uncseg/errors.hpp"
#include "uncseg/ops.hpp"

namespace uncseg {

BinaryRegion BinaryRegion::from_labels(const LabelMask& m, uint8_t class_id,
                                       std::pair<float, float> spacing) {
  BinaryRegion r(m.h, m.w, spacing);
  for (size_t i = 0; i < m.labels.size(); ++i)
    r.mask[i] = m.labels[i] == class_id ? 1 : 0;
  return r;
}

int64_t BinaryRegion::count() const {
  int64_t n = 0;
  for (uint8_t v : mask) n += v;
  return n;
}

double BinaryRegion::diagonal_mm() const {
  const double dy = double(h) * spacing_mm.first;
  const double dx = double(w) * spacing_mm.second;
  return std::sqrt(dy * dy + dx * dx);
}

Contour extract_contour(const BinaryRegion& r) {
  Contour c;
  c.spacing_mm = r.spacing_mm;
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      if (!r.at(y, x)) continue;
      const bool boundary = y == 0 || !r.at(y - 1, x) || y == r.h - 1 ||
                            !r.at(y + 1, x) || x == 0 || !r.at(y, x - 1) ||
                            x == r.w - 1 || !r.at(y, x + 1);
      if (boundary) c.points.emplace_back(y, x);
    }
  }
  return c;
}

namespace {

void check_shapes(const BinaryRegion& a, const BinaryRegion& b,
                  const char* what) {
  if (a.h != b.h || a.w != b.w)
    throw DimensionError(std::string(what) + ": region shapes " +
                         std::to_string(a.h) + "x" + std::to_string(a.w) +
                         " vs " + std::to_string(b.h) + "x" +
                         std::to_string(b.w));
}

double point_dist_mm(const std::pair<int, int>& p, const std::pair<int, int>& q,
                     std::pair<float, float> spacing) {
  const double dy = double(p.first - q.first) * spacing.first;
  const double dx = double(p.second - q.second) * spacing.second;
  return std::sqrt(dy * dy + dx * dx);
}

double min_dist_mm(const std::pair<int, int>& p, const Contour& to) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : to.points)
    best = std::min(best, point_dist_mm(p, q, to.spacing_mm));
  return best;
}

}  // namespace

double dice(const BinaryRegion& a, const BinaryRegion& b) {
  check_shapes(a, b, "dice");
  int64_t na = 0, nb = 0, inter = 0;
  for (size_t i = 0; i < a.mask.size(); ++i) {
    na += a.mask[i];
    nb += b.mask[i];
    inter += a.mask[i] & b.mask[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * double(inter) / double(na + nb);
}

double assd(const BinaryRegion& a, const BinaryRegion& b) {
  check_shapes(a, b, "assd");
  const Contour ca = extract_contour(a);
  const Contour cb = extract_contour(b);
  if (ca.points.empty() || cb.points.empty())
    throw UndefinedMetricError("assd: empty contour");
  double sa = 0;
  for (const auto& p : ca.points) sa += min_dist_mm(p, cb);
  double sb = 0;
  for (const auto& p : cb.points) sb += min_dist_mm(p, ca);
  return 0.5 * sa / double(ca.points.size()) +
         0.5 * sb / double(cb.points.size());
}

double hausdorff(const BinaryRegion& a, const BinaryRegion& b) {
  check_shapes(a, b, "hausdorff");
  const Contour ca = extract_contour(a);
  const Contour cb = extract_contour(b);
  if (ca.points.empty() || cb.points.empty())
    throw UndefinedMetricError("hausdorff: empty contour");
  double ma = 0;
  for (const auto& p : ca.points) ma = std::max(ma, min_dist_mm(p, cb));
  double mb = 0;
  for (const auto& p : cb.points) mb = std::max(mb, min_dist_mm(p, ca));
  return std::max(ma, mb);
}

double nll(const std::vector<float>& probs, int num_classes,
           const LabelMask& labels, bool mean) {
  const size_t hw = size_t(labels.h) * size_t(labels.w);
  if (probs.size() != hw * size_t(num_classes))
    throw DimensionError("nll: probs length " + std::to_string(probs.size()) +
                         " vs " + std::to_string(hw * size_t(num_classes)));
  double acc = 0;
  for (size_t j = 0; j < hw; ++j) {
    const int y = labels.labels[j];
    if (y >= num_classes)
      throw DomainError("nll: label " + std::to_string(y) + " >= C");
    acc -= std::log(std::max(double(probs[size_t(y) * hw + j]),
                             kLogProbFloor));
  }
  return mean ? acc / double(hw) : acc;
}

double brier(const std::vector<float>& probs, int num_classes,
             const LabelMask& labels, bool mean) {
  const size_t hw = size_t(labels.h) * size_t(labels.w);
  if (probs.size() != hw * size_t(num_classes))
    throw DimensionError("brier: probs length mismatch");
  double acc = 0;
  for (size_t j = 0; j < hw; ++j) {
    const int y = labels.labels[j];
    if (y >= num_classes)
      throw DomainError("brier: label " + std::to_string(y) + " >= C");
    for (int c = 0; c < num_classes; ++c) {
      const double t = c == y ? 1.0 : 0.0;
      const double d = double(probs[size_t(c) * hw + j]) - t;
      acc += d * d;
    }
  }
  return mean ? acc / double(hw) : acc;
}

}  // namespace uncseg
