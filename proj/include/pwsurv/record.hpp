#pragma once

#include <span>
#include <vector>

namespace pwsurv {

/// One right-censored observation.
struct SurvivalRecord {
  std::vector<double> covariates;
  double time = 0.0;   // event or censoring time
  bool event = true;   // false: censored at `time`

  bool operator==(const SurvivalRecord&) const = default;
};

/// Affine covariate transform x -> (x - mean) / scale applied before the
/// network. Empty vectors mean identity.
struct CovariateScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  bool identity() const { return mean.empty(); }
  /// z-score statistics of the records' covariates (scale 1 for constant columns).
  static CovariateScaler fit(std::span<const SurvivalRecord> records);

  bool operator==(const CovariateScaler&) const = default;
};

}  // namespace pwsurv
