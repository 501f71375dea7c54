#include "pwsurv/loss.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "pwsurv/error.hpp"

namespace pwsurv {

CovariateScaler CovariateScaler::fit(std::span<const SurvivalRecord> records) {
  CovariateScaler s;
  if (records.empty()) return s;
  const std::size_t d = records.front().covariates.size();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  const double n = static_cast<double>(records.size());
  for (const auto& r : records) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r.covariates[j] / n;
  }
  for (const auto& r : records) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dx = r.covariates[j] - s.mean[j];
      s.scale[j] += dx * dx / n;
    }
  }
  for (double& v : s.scale) v = v > 0.0 ? std::sqrt(v) : 1.0;
  return s;
}

double record_log_likelihood(HeadKind head, std::span<const double> z, const TimeGrid& grid,
                             const SurvivalRecord& record) {
  const HeadEvaluation e = evaluate(head, z, grid, record.time);
  return record.event ? e.log_density : e.log_survival;
}

std::vector<double> loss_grad_z(HeadKind head, std::span<const double> z, const TimeGrid& grid,
                                const SurvivalRecord& record) {
  const HeadWeights w = head_weights(head, grid, record.time);
  std::vector<double> d_log_f(w.dim()), d_log_s(w.dim());
  evaluate(w, z, d_log_f, d_log_s);
  auto& chosen = record.event ? d_log_f : d_log_s;
  for (double& g : chosen) g = -g;
  return chosen;
}

PreparedBatch prepare_batch(HeadKind head, const TimeGrid& grid,
                            std::span<const SurvivalRecord> records,
                            const CovariateScaler& scaler) {
  if (records.empty()) {
    throw InvalidArgument("dataset is empty");
  }
  const std::size_t d = records.front().covariates.size();
  if (!scaler.identity() && (scaler.mean.size() != d || scaler.scale.size() != d)) {
    throw DimensionMismatch("covariate scaler has " + std::to_string(scaler.mean.size()) +
                            " columns, records have " + std::to_string(d));
  }
  PreparedBatch b;
  b.head = head;
  b.covariates.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(records.size()));
  b.weights.reserve(records.size());
  b.events.reserve(records.size());

  std::vector<std::size_t> out_of_range;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.covariates.size() != d) {
      throw DimensionMismatch("record " + std::to_string(i) + " has " +
                              std::to_string(r.covariates.size()) + " covariates, expected " +
                              std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double x = r.covariates[j];
      b.covariates(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          scaler.identity() ? x : (x - scaler.mean[j]) / scaler.scale[j];
    }
    if (!(r.time >= 0.0) || r.time > grid.t_max()) {
      out_of_range.push_back(i);
      continue;
    }
    b.weights.push_back(head_weights(head, grid, r.time));
    b.events.push_back(r.event);
  }
  if (!out_of_range.empty()) {
    std::ostringstream msg;
    msg << out_of_range.size() << " record(s) with time outside [0, " << grid.t_max()
        << "], rows:";
    const std::size_t shown = std::min<std::size_t>(out_of_range.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      msg << ' ' << out_of_range[i] << " (t=" << records[out_of_range[i]].time << ')';
    }
    if (shown < out_of_range.size()) msg << " ...";
    throw DomainError(msg.str());
  }
  return b;
}

double batch_loss(const PreparedBatch& batch, const Eigen::MatrixXd& z, Eigen::MatrixXd* grad_z) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (z.cols() != n) {
    throw DimensionMismatch("network output has " + std::to_string(z.cols()) +
                            " columns, batch has " + std::to_string(n) + " records");
  }
  if (grad_z) grad_z->resize(z.rows(), n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t dim = static_cast<std::size_t>(z.rows());
  std::vector<double> d_log_f(grad_z ? dim : 0), d_log_s(grad_z ? dim : 0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const double> zi(z.col(i).data(), dim);
    const auto& w = batch.weights[static_cast<std::size_t>(i)];
    const bool event = batch.events[static_cast<std::size_t>(i)];
    const HeadEvaluation e = evaluate(w, zi, d_log_f, d_log_s);
    total -= event ? e.log_density : e.log_survival;
    if (grad_z) {
      const auto& g = event ? d_log_f : d_log_s;
      for (std::size_t r = 0; r < dim; ++r) {
        (*grad_z)(static_cast<Eigen::Index>(r), i) = -g[r] * inv_n;
      }
    }
  }
  return total * inv_n;
}

double dataset_loss(HeadKind head, const NetworkParams& params, const TimeGrid& grid,
                    std::span<const SurvivalRecord> records, const CovariateScaler& scaler) {
  const PreparedBatch batch = prepare_batch(head, grid, records, scaler);
  const std::size_t needed = output_dim(head, grid.segments());
  if (params.output_dim() != needed) {
    throw DimensionMismatch("network has " + std::to_string(params.output_dim()) + " outputs, " +
                            std::string(to_string(head)) + " head needs " + std::to_string(needed));
  }
  return batch_loss(batch, forward(params, batch.covariates));
}

}  // namespace pwsurv
