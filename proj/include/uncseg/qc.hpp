#pragma once

#include <string>
#include <vector>

namespace uncseg {

// Per-structure ASSD thresholds (mm) separating acceptable from poor
// segmentations. A case is poor iff its ASSD is strictly above the threshold.
struct QcThresholds {
  double lv = 1.17;
  double myo = 1.19;
  double rv = 1.88;

  double for_structure(const std::string& name) const;
};

struct QcCase {
  std::string id;
  double uncertainty = 0;  // ranking score (higher reviewed first)
  bool poor = false;
  int subject_id = 0;
  int slice_index = 0;
};

// One point per review budget k = 0..N: fraction reviewed and the fraction of
// the dataset that remains poor after perfect correction of reviewed cases.
struct QcCurvePoint {
  double reviewed_fraction = 0;
  double remaining_poor_fraction = 0;
};

struct QcCurve {
  std::vector<QcCurvePoint> points;
  double auc = 0;  // trapezoid area under remaining-poor vs reviewed
};

bool classify_poor(double assd_mm, double threshold_mm);

// Cases reviewed in descending uncertainty order; equal scores keep input
// order (stable sort).
QcCurve qc_curve(const std::vector<QcCase>& cases);

// Expected curve when review order is uninformative: remaining poor decays
// linearly from P/N to 0, so the area is P/(2N).
QcCurve random_baseline(const std::vector<QcCase>& cases);

// Heuristic baseline: review apical/basal slices first, ranked by distance
// from each subject's mid slice.
QcCurve slice_position_baseline(const std::vector<QcCase>& cases);

// Smallest reviewed fraction at which the remaining-poor fraction reaches the
// target, linearly interpolating between curve points. Returns 1.0 when the
// target is never reached.
double review_fraction_for_target(const QcCurve& curve, double target);

// Spearman rank correlation via Pearson on average ranks (ties averaged).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace uncseg
