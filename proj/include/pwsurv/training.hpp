#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pwsurv/data.hpp"
#include "pwsurv/grid.hpp"
#include "pwsurv/heads.hpp"
#include "pwsurv/network.hpp"
#include "pwsurv/optimizer.hpp"

namespace pwsurv {

/// Uniform grid whose t_max is either fixed or `margin` times the largest
/// time seen in the reference data.
struct GridSpec {
  std::size_t n_points = 5;
  std::optional<double> t_max;
  double margin = 1.001;
};

struct TrainConfig {
  HeadKind head = HeadKind::LinearHazard;
  GridSpec grid;
  NetworkConfig network;       // input/output dims are filled in by train()
  std::size_t epochs = 200;
  double learning_rate = 1e-3;
  std::size_t batch_size = 0;  // 0 = full batch
  bool standardize = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches, before each step
  double val_loss = 0.0;    // after the epoch's last step
};

struct TrainedModel {
  HeadKind head = HeadKind::LinearHazard;
  TimeGrid grid = make_uniform_grid(1.0, 2);
  NetworkParams params;  // checkpoint of the best validation epoch
  CovariateScaler scaler;
  TrainConfig config;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  double train_seconds = 0.0;

  std::size_t input_dim() const { return params.input_dim(); }
  /// Raw head outputs z(x), covariates before scaling.
  std::vector<double> outputs(std::span<const double> covariates) const;
  /// Throws DimensionMismatch / DomainError.
  HeadEvaluation predict(std::span<const double> covariates, double t) const;
};

/// t_max = spec.t_max if set, else margin * the largest time across `data`.
TimeGrid resolve_grid(const GridSpec& spec, std::initializer_list<const Dataset*> data);

/// Full training run with best-validation checkpointing (ties keep the
/// earliest epoch). Throws TrainingDiverged naming the epoch and learning
/// rate when a loss or parameter becomes non-finite.
TrainedModel train(const TrainConfig& config, const TimeGrid& grid, const Dataset& train_set,
                   const Dataset& val_set);
/// Grid resolved from the training and validation sets.
TrainedModel train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set);

/// Mean NLL of `data`. Throws DomainError listing rows beyond t_max.
double evaluate(const TrainedModel& model, const Dataset& data);

// Learning-rate sweep.

struct SweepConfig {
  double lr_min = 1e-4;
  double lr_max = 1e-1;
  std::size_t count = 20;
  std::size_t jobs = 1;
};

/// `count` geometrically spaced values from lr_min to lr_max inclusive.
std::vector<double> geometric_learning_rates(double lr_min, double lr_max, std::size_t count);

struct SweepEntry {
  double learning_rate = 0.0;
  std::optional<double> val_loss;  // empty when the run aborted
  std::string failure;
  std::vector<EpochRecord> history;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  double selected_lr = 0.0;
  TrainedModel model;
};

/// Trains one model per learning rate from the same initialization and
/// keeps the one with the lowest checkpointed validation loss (ties: smaller
/// LR). Aborted runs are recorded and skipped; throws TrainingDiverged only
/// if every run aborts.
SweepResult lr_sweep(const TrainConfig& base, const TimeGrid& grid, const Dataset& train_set,
                     const Dataset& val_set, const SweepConfig& sweep = {});
SweepResult lr_sweep(const TrainConfig& base, const Dataset& train_set, const Dataset& val_set,
                     const SweepConfig& sweep = {});

// Replication study.

struct StudyConfig {
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t train_size = 1000;
  std::size_t val_size = 300;
  std::size_t test_size = 300;
  SimulationConfig simulation;
  TrainConfig base;  // head is overridden per study
  SweepConfig sweep;
  std::size_t jobs = 1;  // replications run in parallel; sweeps inside are serial
};

struct ReplicationResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  double test_loss = 0.0;
  double oracle_test_loss = 0.0;  // NLL of the generating Weibull model
  double selected_lr = 0.0;
  double train_seconds = 0.0;
};

struct StudySummary {
  HeadKind head = HeadKind::LinearHazard;
  std::vector<ReplicationResult> replications;
  std::size_t failures = 0;
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  double mean_time = 0.0;
  double sd_time = 0.0;
  bool single_sample = false;  // sd is 0 because only one replication succeeded
};

/// Datasets of replication `index`: seeds derive_seed(rep_seed, 0/1/2) for
/// train/val/test and derive_seed(rep_seed, 3) for network init, where
/// rep_seed = derive_seed(config.seed, index). The grid t_max covers all
/// three splits.
struct ReplicationData {
  std::uint64_t seed = 0;
  Dataset train, val, test;
};
ReplicationData replication_data(const StudyConfig& config, std::size_t index);

/// Sample mean and standard deviation (n - 1 denominator; 0 when n < 2).
std::pair<double, double> mean_and_sd(std::span<const double> values);

/// Mean NLL of `data` under the Weibull model whose parameters are each
/// record's covariates [scale, shape].
double weibull_oracle_loss(const Dataset& data);

StudySummary replication_study(HeadKind head, const StudyConfig& config);

}  // namespace pwsurv
