#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pwsurv/grid.hpp"
#include "pwsurv/heads.hpp"
#include "pwsurv/network.hpp"
#include "pwsurv/record.hpp"

namespace pwsurv {

/// log f(time | x) for an event, log S(time | x) for a censored record.
/// Throws DomainError if the time is outside the grid.
double record_log_likelihood(HeadKind head, std::span<const double> z, const TimeGrid& grid,
                             const SurvivalRecord& record);

/// d(-log L)/dz for one record.
std::vector<double> loss_grad_z(HeadKind head, std::span<const double> z, const TimeGrid& grid,
                                const SurvivalRecord& record);

/// Mean negative log-likelihood of `records` under the network `params`.
/// Throws InvalidArgument on an empty record list.
double dataset_loss(HeadKind head, const NetworkParams& params, const TimeGrid& grid,
                    std::span<const SurvivalRecord> records, const CovariateScaler& scaler = {});

/// Records preprocessed for repeated loss evaluation: scaled covariates as
/// matrix columns and the z-independent head weights of every record.
struct PreparedBatch {
  HeadKind head = HeadKind::ConstantDensity;
  Eigen::MatrixXd covariates;  // input_dim x n
  std::vector<HeadWeights> weights;
  std::vector<bool> events;

  std::size_t size() const { return events.size(); }
};

/// Throws InvalidArgument for empty input or ragged covariates, DomainError
/// (naming the offending rows) for times outside [0, t_max].
PreparedBatch prepare_batch(HeadKind head, const TimeGrid& grid,
                            std::span<const SurvivalRecord> records,
                            const CovariateScaler& scaler = {});

/// Mean NLL given network outputs `z` (output_dim x n). When `grad_z` is
/// non-null it receives d(mean NLL)/dz with the same shape.
double batch_loss(const PreparedBatch& batch, const Eigen::MatrixXd& z,
                  Eigen::MatrixXd* grad_z = nullptr);

}  // namespace pwsurv
