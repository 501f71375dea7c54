// Acceptance checks. Each criterion prints one [PASS]/[FAIL] line; the exit
// status is nonzero if any selected criterion fails.
//
//   acceptance            run every criterion
//   acceptance 3 7        run criteria 3 and 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "oracles.hpp"
#include "pwsurv/data.hpp"
#include "pwsurv/heads.hpp"
#include "pwsurv/loss.hpp"
#include "pwsurv/network.hpp"
#include "pwsurv/rng.hpp"
#include "pwsurv/training.hpp"

namespace fs = std::filesystem;
using namespace pwsurv;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random grid with N segments of widths in [0.2, 2] and outputs in [-3, 3].
struct Instance {
  TimeGrid grid;
  std::vector<double> z;
};

Instance random_instance(HeadKind head, Rng& rng) {
  const std::size_t n = 1 + rng.below(8);
  std::vector<double> pts{0.0};
  for (std::size_t i = 0; i < n; ++i) pts.push_back(pts.back() + rng.uniform(0.2, 2.0));
  TimeGrid grid(pts);
  std::vector<double> z(output_dim(head, n));
  for (double& v : z) v = rng.uniform(-3.0, 3.0);
  return {std::move(grid), std::move(z)};
}

Outcome normalization() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (HeadKind head : kAllHeads) {
    for (int rep = 0; rep < 100; ++rep) {
      const Instance in = random_instance(head, rng);
      const auto f = [&](double t) { return evaluate(head, in.z, in.grid, t).density(); };
      const double mass = oracle::integrate(f, 0.0, in.grid.t_max(), in.grid.points());
      const double tail = evaluate(head, in.z, in.grid, in.grid.t_max()).survival();
      worst = std::max(worst, std::abs(mass + tail - 1.0));
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-6 && secs < 10.0,
          fmt("max |int f + S(t_max) - 1| = %.3g over 400 instances (tol 1e-6), %.2f s (limit 10 s)", worst, secs)};
}

Outcome oracle_equivalence() {
  Rng rng(202);
  double worst_hazard = 0.0, worst_density = 0.0;
  for (HeadKind head : kAllHeads) {
    for (int rep = 0; rep < 100; ++rep) {
      const Instance in = random_instance(head, rng);
      for (int j = 0; j < 50; ++j) {
        // interior of a segment, away from the knots so the stencil stays inside it
        const std::size_t k = rng.below(in.grid.segments());
        const double t = in.grid.point(k) + in.grid.width(k) * rng.uniform(0.05, 0.95);
        const HeadEvaluation e = evaluate(head, in.z, in.grid, t);
        if (is_density_head(head)) {
          const double h = 1e-5 * in.grid.width(k);
          const auto s = [&](double u) { return evaluate(head, in.z, in.grid, u).survival(); };
          const double fd = -oracle::central_difference(s, t, h);
          worst_density = std::max(worst_density, oracle::rel_err(fd, e.density(), 0.0));
        } else {
          worst_hazard = std::max(worst_hazard, std::abs(e.survival() - std::exp(-e.cumulative_hazard)));
        }
      }
    }
  }
  return {worst_hazard <= 1e-12 && worst_density <= 1e-5,
          fmt("hazard heads max |S - exp(-H)| = %.3g (tol 1e-12); density heads max rel |f + dS/dt| = %.3g "
              "(tol 1e-5)",
              worst_hazard, worst_density)};
}

Outcome gradients() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (HeadKind head : kAllHeads) {
    for (bool event : {true, false}) {
      const TimeGrid grid = make_uniform_grid(4.0, 4);
      NetworkConfig nc;
      nc.hidden_layers = {8, 8};
      nc.output_dim = output_dim(head, grid.segments());
      nc.seed = 17;
      NetworkParams params = init_params(nc);
      std::vector<SurvivalRecord> toy;
      for (double t : {0.3, 1.1, 1.9, 2.6, 3.8}) toy.push_back({{1.0 + t / 3.0, 4.5 - t}, t, event});
      const PreparedBatch batch = prepare_batch(head, grid, toy);

      ForwardCache cache;
      const Eigen::MatrixXd z = forward(params, batch.covariates, &cache);
      Eigen::MatrixXd grad_z;
      batch_loss(batch, z, &grad_z);
      const std::vector<double> analytic = backward(params, cache, grad_z).flatten();

      const std::vector<double> theta = params.flatten();
      std::vector<double> probe = theta;
      const auto loss_at = [&](std::size_t i, double v) {
        probe[i] = v;
        params.assign(probe);
        probe[i] = theta[i];
        return batch_loss(batch, forward(params, batch.covariates));
      };
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
        const double fd = (loss_at(i, theta[i] + h) - loss_at(i, theta[i] - h)) / (2.0 * h);
        worst = std::max(worst, oracle::rel_err(fd, analytic[i], 1e-6));
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 5.0,
          fmt("max relative gradient error %.3g over 4 heads x {event, censored} (tol 1e-4), %.2f s (limit 5 s)",
              worst, secs)};
}

Outcome exponential_mle() {
  const auto start = Clock::now();
  SimulationConfig sim;
  sim.ranges = {2.0, 2.0, 1.0, 1.0};  // scale 2, shape 1: exponential with rate 0.5
  const Dataset train_set = generate_dataset(1000, sim, 41, "train");
  const Dataset val_set = generate_dataset(300, sim, 42, "val");
  double exposure = 0.0;
  for (const auto& r : train_set.records) exposure += r.time;
  const double mle = static_cast<double>(train_set.size()) / exposure;

  TrainConfig cfg;
  cfg.head = HeadKind::ConstantHazard;
  cfg.grid.n_points = 2;
  cfg.network.seed = 43;
  const SweepResult sweep = lr_sweep(cfg, train_set, val_set);
  const double rate = sweep.model.predict(train_set.records[0].covariates, 0.0).hazard;
  const double err = std::abs(rate / mle - 1.0);
  const double secs = seconds_since(start);
  return {err <= 0.05 && secs < 30.0,
          fmt("fitted rate %.5f vs MLE %.5f (rel err %.3g, tol 0.05), selected lr %.3g, %.2f s (limit 30 s)", rate,
              mle, err, sweep.selected_lr, secs)};
}

Outcome table1(std::size_t jobs) {
  struct Target {
    HeadKind head;
    double mean, sd;
  };
  const Target targets[] = {{HeadKind::LinearHazard, 0.561, 0.0592},
                            {HeadKind::LinearDensity, 0.582, 0.0644},
                            {HeadKind::ConstantHazard, 0.600, 0.0714},
                            {HeadKind::ConstantDensity, 0.607, 0.0699}};
  const auto start = Clock::now();
  StudyConfig cfg;
  cfg.reps = 20;
  cfg.seed = 1;
  cfg.jobs = jobs;
  bool within = true;
  std::map<HeadKind, double> means;
  std::string detail;
  for (const Target& t : targets) {
    const StudySummary s = replication_study(t.head, cfg);
    std::vector<double> oracle_losses;
    for (const auto& r : s.replications) oracle_losses.push_back(r.oracle_test_loss);
    const double oracle_mean = mean_and_sd(oracle_losses).first;
    const bool ok = s.failures == 0 && std::abs(s.mean_loss - t.mean) <= 2.0 * t.sd;
    within = within && ok;
    means[t.head] = s.mean_loss;
    detail += fmt("%s %.4f (sd %.4f, target %.3f +/- %.3f, generating-model NLL %.4f, failures %zu)%s; ",
                  std::string(to_string(t.head)).c_str(), s.mean_loss, s.sd_loss, t.mean, 2.0 * t.sd, oracle_mean,
                  s.failures, ok ? "" : " OUT");
  }
  const bool ordered = means[HeadKind::LinearHazard] <= means[HeadKind::ConstantHazard] &&
                       means[HeadKind::LinearDensity] <= means[HeadKind::ConstantDensity];
  const double secs = seconds_since(start);
  detail += fmt("ordering linear <= constant %s; %.0f s at --jobs %zu (target 1800 s at --jobs 4)",
                ordered ? "holds" : "violated", secs, jobs);
  return {within && ordered, detail};
}

Outcome training_time() {
  const Dataset train_set = generate_dataset(1000, {}, 61, "train");
  const Dataset val_set = generate_dataset(300, {}, 62, "val");
  TrainConfig cfg;  // 2x32 ReLU, 5 grid points, 200 epochs
  double worst = 0.0;
  std::string per_head;
  for (HeadKind head : kAllHeads) {
    cfg.head = head;
    const auto start = Clock::now();
    train(cfg, train_set, val_set);
    const double secs = seconds_since(start);
    worst = std::max(worst, secs);
    per_head += fmt(" %s %.3f s", std::string(to_string(head)).c_str(), secs);
  }
  return {worst < 5.0, "single training run (2x32, 5 points, 200 epochs, 1000 records):" + per_head +
                           " (limit 5 s)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int status = cli::run(args, o, e);
  if (status != 0) std::fprintf(stderr, "%s", e.str().c_str());
  if (out) *out = o.str();
  return status;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pwsurv_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

Outcome determinism() {
  const fs::path dir = scratch("determinism");
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / std::to_string(i);
    if (run_cli({"study", "--reps", "3", "--seed", "1", "--jobs", "1", "--out", out.string()}) != 0) {
      return {false, "study run failed"};
    }
    reports[i] = slurp(out / "report.csv") + slurp(out / "replications.csv");
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "report.csv and replications.csv byte-identical across two runs"
                     : "report CSVs differ between runs"};
}

Outcome curve_shape() {
  const fs::path dir = scratch("curves");
  const std::string data = (dir / "data").string(), model = (dir / "model").string();
  if (run_cli({"simulate", "--seed", "5", "--scale-range", "2,2", "--shape-range", "3,3", "--out", data}) != 0 ||
      run_cli({"train", "--train", data + "/train.csv", "--val", data + "/val.csv", "--head", "linear-hazard",
               "--grid-points", "3", "--sweep", "--seed", "6", "--out", model}) != 0) {
    return {false, "simulate/train failed"};
  }
  std::string csv;
  if (run_cli({"curves", "--model", model + "/model.json", "--x", "2,3", "--truth", "2,3", "--resolution", "1001"},
              &csv) != 0) {
    return {false, "curves failed"};
  }
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  bool monotone = true, first = true;
  double s0 = -1.0, prev = 2.0, sup = 0.0, t_end = 0.0;
  while (std::getline(rows, line)) {
    std::vector<double> v;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (first) s0 = v[1];
    first = false;
    monotone = monotone && v[1] <= prev;
    prev = v[1];
    sup = std::max(sup, std::abs(v[1] - v[5]));
    t_end = v[0];
  }
  return {monotone && s0 == 1.0 && sup < 0.08,
          fmt("S non-increasing: %s, S(0) = %.17g, sup |S - S_true| on [0, %.4g] = %.4f (harness threshold 0.08)",
              monotone ? "yes" : "no", s0, t_end, sup)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pwsurv acceptance checks"};
  std::vector<int> selected;
  std::size_t jobs = 4;
  app.add_option("criteria", selected, "criterion numbers (default: all)")->check(CLI::Range(1, 8));
  app.add_option("--jobs", jobs, "parallel replications for criterion 5")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"normalization", normalization}},
      {2, {"oracle equivalence", oracle_equivalence}},
      {3, {"gradient correctness", gradients}},
      {4, {"exponential MLE anchor", exponential_mle}},
      {5, {"Table 1 reproduction", [jobs] { return table1(jobs); }}},
      {6, {"training time", training_time}},
      {7, {"determinism", determinism}},
      {8, {"curve shape", curve_shape}},
  };
  int failed = 0;
  for (int c : selected) {
    const auto& [name, check] = criteria.at(c);
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c, name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
