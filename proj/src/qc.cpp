#include "uncseg/qc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "uncseg/errors.hpp"

namespace uncseg {

double QcThresholds::for_structure(const std::string& name) const {
  if (name == "lv") return lv;
  if (name == "myo") return myo;
  if (name == "rv") return rv;
  throw ConfigError("unknown structure '" + name + "'");
}

bool classify_poor(double assd_mm, double threshold_mm) {
  if (threshold_mm < 0) throw DomainError("qc threshold must be >= 0");
  return assd_mm > threshold_mm;
}

namespace {

QcCurve curve_from_order(const std::vector<QcCase>& ordered) {
  const size_t n = ordered.size();
  if (n == 0) throw DomainError("qc_curve: empty case list");
  size_t total_poor = 0;
  for (const QcCase& c : ordered) total_poor += c.poor ? 1 : 0;

  QcCurve curve;
  curve.points.reserve(n + 1);
  size_t corrected = 0;
  for (size_t k = 0; k <= n; ++k) {
    if (k > 0) corrected += ordered[k - 1].poor ? 1 : 0;
    curve.points.push_back(
        {double(k) / double(n), double(total_poor - corrected) / double(n)});
  }
  double auc = 0;
  for (size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    auc += 0.5 * (a.remaining_poor_fraction + b.remaining_poor_fraction) *
           (b.reviewed_fraction - a.reviewed_fraction);
  }
  curve.auc = auc;
  return curve;
}

}  // namespace

QcCurve qc_curve(const std::vector<QcCase>& cases) {
  std::vector<QcCase> ordered = cases;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const QcCase& a, const QcCase& b) {
                     return a.uncertainty > b.uncertainty;
                   });
  return curve_from_order(ordered);
}

QcCurve random_baseline(const std::vector<QcCase>& cases) {
  const size_t n = cases.size();
  if (n == 0) throw DomainError("random_baseline: empty case list");
  size_t total_poor = 0;
  for (const QcCase& c : cases) total_poor += c.poor ? 1 : 0;
  const double p = double(total_poor) / double(n);
  QcCurve curve;
  curve.points.reserve(n + 1);
  for (size_t k = 0; k <= n; ++k) {
    const double f = double(k) / double(n);
    curve.points.push_back({f, p * (1.0 - f)});
  }
  curve.auc = p / 2.0;
  return curve;
}

QcCurve slice_position_baseline(const std::vector<QcCase>& cases) {
  // Distance from the subject's middle slice; extremes reviewed first.
  std::map<int, std::pair<int, int>> extent;  // subject -> [min, max] slice
  for (const QcCase& c : cases) {
    auto [it, fresh] =
        extent.try_emplace(c.subject_id, c.slice_index, c.slice_index);
    if (!fresh) {
      it->second.first = std::min(it->second.first, c.slice_index);
      it->second.second = std::max(it->second.second, c.slice_index);
    }
  }
  std::vector<QcCase> ordered = cases;
  for (QcCase& c : ordered) {
    const auto [lo, hi] = extent.at(c.subject_id);
    c.uncertainty = std::abs(c.slice_index - 0.5 * (lo + hi));
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const QcCase& a, const QcCase& b) {
                     return a.uncertainty > b.uncertainty;
                   });
  return curve_from_order(ordered);
}

double review_fraction_for_target(const QcCurve& curve, double target) {
  if (target < 0) throw DomainError("qc target must be >= 0");
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (p.remaining_poor_fraction <= target) {
      if (i == 0) return p.reviewed_fraction;
      const auto& q = curve.points[i - 1];
      const double drop = q.remaining_poor_fraction - p.remaining_poor_fraction;
      if (drop <= 0) return p.reviewed_fraction;
      const double t = (q.remaining_poor_fraction - target) / drop;
      return q.reviewed_fraction +
             t * (p.reviewed_fraction - q.reviewed_fraction);
    }
  }
  return 1.0;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (double(i) + double(j)) + 1.0;  // 1-based
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionError("spearman: length mismatch");
  if (a.size() < 2) throw DomainError("spearman: need at least 2 points");
  const std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
  const size_t n = ra.size();
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= double(n);
  mb /= double(n);
  double cov = 0, va = 0, vb = 0;
  for (size_t i = 0; i < n; ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0 || vb == 0)
    throw UndefinedMetricError("spearman: constant ranking");
  return cov / std::sqrt(va * vb);
}

}  // namespace uncseg
