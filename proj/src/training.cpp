#include "pwsurv/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "pwsurv/error.hpp"
#include "pwsurv/loss.hpp"

namespace pwsurv {

namespace {

std::string lr_text(double lr) {
  std::ostringstream s;
  s.precision(6);
  s << lr;
  return s.str();
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. Results must be
// written by index so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PreparedBatch subset(const PreparedBatch& b, std::span<const std::size_t> idx) {
  PreparedBatch s;
  s.head = b.head;
  s.covariates.resize(b.covariates.rows(), static_cast<Eigen::Index>(idx.size()));
  s.weights.reserve(idx.size());
  s.events.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    s.covariates.col(static_cast<Eigen::Index>(j)) =
        b.covariates.col(static_cast<Eigen::Index>(idx[j]));
    s.weights.push_back(b.weights[idx[j]]);
    s.events.push_back(b.events[idx[j]]);
  }
  return s;
}

}  // namespace

std::vector<double> TrainedModel::outputs(std::span<const double> covariates) const {
  if (covariates.size() != input_dim()) {
    throw DimensionMismatch("model expects " + std::to_string(input_dim()) + " covariates, got " +
                            std::to_string(covariates.size()));
  }
  std::vector<double> x(covariates.begin(), covariates.end());
  if (!scaler.identity()) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - scaler.mean[j]) / scaler.scale[j];
  }
  return forward(params, x);
}

HeadEvaluation TrainedModel::predict(std::span<const double> covariates, double t) const {
  const auto z = outputs(covariates);
  return evaluate(head, z, grid, t);
}

TimeGrid resolve_grid(const GridSpec& spec, std::initializer_list<const Dataset*> data) {
  if (spec.t_max) return make_uniform_grid(*spec.t_max, spec.n_points);
  double m = 0.0;
  for (const Dataset* d : data) {
    if (d) m = std::max(m, d->max_time());
  }
  if (!(m > 0.0)) {
    throw InvalidArgument("cannot derive t_max: no positive times in the data");
  }
  return make_uniform_grid(spec.margin * m, spec.n_points);
}

TrainedModel train(const TrainConfig& config, const TimeGrid& grid, const Dataset& train_set,
                   const Dataset& val_set) {
  if (config.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (train_set.empty()) throw InvalidArgument("training set is empty");
  if (val_set.empty()) throw InvalidArgument("validation set is empty");
  if (train_set.covariate_dim() != val_set.covariate_dim()) {
    throw DimensionMismatch("training and validation sets have different covariate dims");
  }
  const auto start = std::chrono::steady_clock::now();

  TrainedModel model;
  model.head = config.head;
  model.grid = grid;
  model.config = config;
  model.config.network.input_dim = train_set.covariate_dim();
  model.config.network.output_dim = output_dim(config.head, grid.segments());
  if (config.standardize) model.scaler = CovariateScaler::fit(train_set.records);

  const PreparedBatch train_batch = prepare_batch(config.head, grid, train_set.records, model.scaler);
  const PreparedBatch val_batch = prepare_batch(config.head, grid, val_set.records, model.scaler);

  NetworkParams params = init_params(model.config.network);
  OptimizerState opt = make_optimizer(
      params, AdamConfig{config.learning_rate, config.beta1, config.beta2, config.epsilon});

  const std::size_t n = train_batch.size();
  const std::size_t batch_size = config.batch_size == 0 ? n : std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.network.seed, 0x5eed));

  auto diverged = [&](std::size_t epoch, const std::string& what) {
    return TrainingDiverged(what + " at epoch " + std::to_string(epoch) + " (lr " +
                            lr_text(config.learning_rate) + ", head " +
                            std::string(to_string(config.head)) + ")");
  };

  ForwardCache cache;
  Eigen::MatrixXd grad_z;
  model.history.reserve(config.epochs);
  model.best_val_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (batch_size == n) {
      const Eigen::MatrixXd z = forward(params, train_batch.covariates, &cache);
      epoch_loss = batch_loss(train_batch, z, &grad_z);
      if (!std::isfinite(epoch_loss)) throw diverged(epoch, "non-finite training loss");
      try {
        optimizer_step(params, backward(params, cache, grad_z), opt);
      } catch (const TrainingDiverged& e) {
        throw diverged(epoch, e.what());
      }
    } else {
      // Fisher-Yates with the project RNG; std::shuffle is not portable.
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.below(i + 1)]);
      for (std::size_t s = 0; s < n; s += batch_size) {
        const std::size_t e = std::min(n, s + batch_size);
        const PreparedBatch mb = subset(train_batch, std::span(order).subspan(s, e - s));
        const Eigen::MatrixXd z = forward(params, mb.covariates, &cache);
        const double l = batch_loss(mb, z, &grad_z);
        if (!std::isfinite(l)) throw diverged(epoch, "non-finite training loss");
        epoch_loss += l * static_cast<double>(e - s) / static_cast<double>(n);
        try {
          optimizer_step(params, backward(params, cache, grad_z), opt);
        } catch (const TrainingDiverged& ex) {
          throw diverged(epoch, ex.what());
        }
      }
    }
    const double val_loss = batch_loss(val_batch, forward(params, val_batch.covariates));
    if (!std::isfinite(val_loss)) throw diverged(epoch, "non-finite validation loss");
    model.history.push_back({epoch, epoch_loss, val_loss});
    if (val_loss < model.best_val_loss) {
      model.best_val_loss = val_loss;
      model.best_epoch = epoch;
      model.params = params;
    }
  }
  model.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return model;
}

TrainedModel train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set) {
  return train(config, resolve_grid(config.grid, {&train_set, &val_set}), train_set, val_set);
}

double evaluate(const TrainedModel& model, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("evaluation dataset is empty");
  if (data.covariate_dim() != model.input_dim()) {
    throw DimensionMismatch("model expects " + std::to_string(model.input_dim()) +
                            " covariates, dataset has " + std::to_string(data.covariate_dim()));
  }
  return dataset_loss(model.head, model.params, model.grid, data.records, model.scaler);
}

std::vector<double> geometric_learning_rates(double lr_min, double lr_max, std::size_t count) {
  if (count < 2) throw InvalidArgument("learning-rate sweep needs at least 2 values");
  if (!(lr_min > 0.0) || !(lr_max >= lr_min)) {
    throw InvalidArgument("learning-rate range must satisfy 0 < min <= max");
  }
  std::vector<double> lrs(count);
  const double log_lo = std::log(lr_min);
  const double step = (std::log(lr_max) - log_lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) lrs[i] = std::exp(log_lo + step * static_cast<double>(i));
  lrs.front() = lr_min;
  lrs.back() = lr_max;
  return lrs;
}

SweepResult lr_sweep(const TrainConfig& base, const TimeGrid& grid, const Dataset& train_set,
                     const Dataset& val_set, const SweepConfig& sweep) {
  const auto lrs = geometric_learning_rates(sweep.lr_min, sweep.lr_max, sweep.count);
  std::vector<SweepEntry> entries(lrs.size());
  std::vector<std::optional<TrainedModel>> models(lrs.size());
  parallel_for(lrs.size(), sweep.jobs, [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.learning_rate = lrs[i];
    entries[i].learning_rate = lrs[i];
    try {
      models[i] = train(cfg, grid, train_set, val_set);
      entries[i].val_loss = models[i]->best_val_loss;
      entries[i].history = models[i]->history;
    } catch (const TrainingDiverged& e) {
      entries[i].failure = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].val_loss && (!best || *entries[i].val_loss < *entries[*best].val_loss)) best = i;
  }
  if (!best) {
    throw TrainingDiverged("all " + std::to_string(entries.size()) +
                           " learning rates aborted; first failure: " + entries.front().failure);
  }
  return SweepResult{std::move(entries), lrs[*best], std::move(*models[*best])};
}

SweepResult lr_sweep(const TrainConfig& base, const Dataset& train_set, const Dataset& val_set,
                     const SweepConfig& sweep) {
  return lr_sweep(base, resolve_grid(base.grid, {&train_set, &val_set}), train_set, val_set, sweep);
}

ReplicationData replication_data(const StudyConfig& config, std::size_t index) {
  ReplicationData d;
  d.seed = derive_seed(config.seed, index);
  d.train = generate_dataset(config.train_size, config.simulation, derive_seed(d.seed, 0), "train");
  d.val = generate_dataset(config.val_size, config.simulation, derive_seed(d.seed, 1), "val");
  d.test = generate_dataset(config.test_size, config.simulation, derive_seed(d.seed, 2), "test");
  return d;
}

std::pair<double, double> mean_and_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

double weibull_oracle_loss(const Dataset& data) {
  if (data.empty()) throw InvalidArgument("dataset is empty");
  double total = 0.0;
  for (const auto& r : data.records) {
    if (r.covariates.size() != 2) {
      throw DimensionMismatch("oracle loss needs covariates [scale, shape]");
    }
    const WeibullParams p{r.covariates[0], r.covariates[1]};
    const double log_s = -std::pow(r.time / p.scale, p.shape);
    total -= r.event ? std::log(weibull_hazard(p, r.time)) + log_s : log_s;
  }
  return total / static_cast<double>(data.size());
}

StudySummary replication_study(HeadKind head, const StudyConfig& config) {
  if (config.reps < 1) throw InvalidArgument("replication study needs at least 1 replication");
  StudySummary summary;
  summary.head = head;
  summary.replications.resize(config.reps);

  parallel_for(config.reps, config.jobs, [&](std::size_t i) {
    auto& rep = summary.replications[i];
    rep.index = i;
    try {
      const ReplicationData data = replication_data(config, i);
      rep.seed = data.seed;
      TrainConfig base = config.base;
      base.head = head;
      base.network.seed = derive_seed(data.seed, 3);
      const TimeGrid grid = resolve_grid(base.grid, {&data.train, &data.val, &data.test});
      SweepConfig sweep = config.sweep;
      sweep.jobs = 1;
      const SweepResult result = lr_sweep(base, grid, data.train, data.val, sweep);
      rep.selected_lr = result.selected_lr;
      rep.train_seconds = result.model.train_seconds;
      rep.test_loss = evaluate(result.model, data.test);
      rep.oracle_test_loss = weibull_oracle_loss(data.test);
      rep.ok = std::isfinite(rep.test_loss);
      if (!rep.ok) rep.failure = "non-finite test loss";
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.failure = e.what();
    }
  });

  std::vector<double> losses, times;
  for (const auto& r : summary.replications) {
    if (!r.ok) {
      ++summary.failures;
      continue;
    }
    losses.push_back(r.test_loss);
    times.push_back(r.train_seconds);
  }
  std::tie(summary.mean_loss, summary.sd_loss) = mean_and_sd(losses);
  std::tie(summary.mean_time, summary.sd_time) = mean_and_sd(times);
  summary.single_sample = losses.size() == 1;
  return summary;
}

}  // namespace pwsurv
