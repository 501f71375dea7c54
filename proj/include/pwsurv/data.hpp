#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pwsurv/record.hpp"
#include "pwsurv/rng.hpp"

namespace pwsurv {

struct WeibullParams {
  double scale = 1.0;  // lambda
  double shape = 1.0;  // k
};

/// exp(-(t/scale)^shape). Throws DomainError for t < 0, InvalidArgument
/// for non-positive parameters.
double weibull_survival(const WeibullParams& p, double t);
double weibull_density(const WeibullParams& p, double t);
double weibull_hazard(const WeibullParams& p, double t);

/// Inverse-CDF draw scale * (-log u)^(1/shape) for a given u in (0, 1).
double weibull_quantile_from_uniform(const WeibullParams& p, double u);
double sample_weibull(const WeibullParams& p, Rng& rng);

/// Right-censoring applied to simulated event times. With probability
/// `probability` a record gets an independent censoring time C ~ U(0, max_time)
/// and is censored if C < T. Independently, every time above
/// `administrative_time` is censored there.
struct CensoringConfig {
  double probability = 0.0;
  double max_time = 0.0;
  std::optional<double> administrative_time;

  bool enabled() const { return probability > 0.0 || administrative_time.has_value(); }
};

/// Ranges the per-record Weibull parameters are drawn from; the covariate
/// vector of each record is [scale, shape].
struct CovariateRanges {
  double scale_lo = 1.0;
  double scale_hi = 3.0;
  double shape_lo = 0.5;
  double shape_hi = 5.0;
};

struct SimulationConfig {
  CovariateRanges ranges;
  CensoringConfig censoring;
};

inline constexpr const char* kGeneratorVersion = "pwsurv-weibull-1";

struct DatasetMetadata {
  std::optional<std::uint64_t> seed;
  std::optional<SimulationConfig> simulation;
  std::string split;
  std::string generator;
};

struct Dataset {
  std::vector<SurvivalRecord> records;
  DatasetMetadata metadata;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  /// 0 for an empty dataset.
  std::size_t covariate_dim() const {
    return records.empty() ? 0 : records.front().covariates.size();
  }
  double max_time() const;
};

/// Simulated Weibull dataset: per record lambda ~ U(scale range),
/// k ~ U(shape range), T ~ Weibull(lambda, k), then censoring. The main
/// stream Rng(seed) draws lambda, k, T per record; random censoring draws
/// (selector, then C) come from Rng(derive_seed(seed, 1)), so event times do
/// not depend on the censoring config. Throws InvalidArgument for n == 0 or
/// an invalid config.
Dataset generate_dataset(std::size_t n, const SimulationConfig& config, std::uint64_t seed,
                         std::string split = {});

/// CSV with header x0,...,x{d-1},time,event. Throws ParseError naming the
/// line for malformed rows and missing or misordered columns.
Dataset parse_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);
void format_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// key=value sidecar describing how a dataset was produced.
std::string format_metadata(const DatasetMetadata& meta, std::size_t n_records);
DatasetMetadata parse_metadata(std::istream& in);

}  // namespace pwsurv
