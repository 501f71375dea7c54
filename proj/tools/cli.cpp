#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pwsurv/data.hpp"
#include "pwsurv/error.hpp"
#include "pwsurv/model_io.hpp"
#include "pwsurv/training.hpp"

namespace fs = std::filesystem;

namespace pwsurv::cli {

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidArgument("cannot create output directory " + dir.string());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

std::pair<double, double> as_range(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw InvalidArgument(std::string(flag) + " expects two comma-separated values");
  return {v[0], v[1]};
}

// Flags shared by commands that simulate data.
struct SimulationFlags {
  std::vector<double> scale_range{1.0, 3.0};
  std::vector<double> shape_range{0.5, 5.0};
  double censor_prob = 0.0;
  double censor_max = 0.0;
  std::optional<double> admin_censor;

  void add_to(CLI::App& app) {
    app.add_option("--scale-range", scale_range, "Range of the Weibull scale covariate")
        ->delimiter(',')->expected(2)->capture_default_str();
    app.add_option("--shape-range", shape_range, "Range of the Weibull shape covariate")
        ->delimiter(',')->expected(2)->capture_default_str();
    app.add_option("--censor-prob", censor_prob, "Probability a record gets a U(0, censor-max) censoring time")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app.add_option("--censor-max", censor_max, "Upper bound of the uniform censoring time")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--admin-censor", admin_censor, "Administrative censoring time")
        ->check(CLI::PositiveNumber);
  }

  SimulationConfig config() const {
    SimulationConfig c;
    std::tie(c.ranges.scale_lo, c.ranges.scale_hi) = as_range(scale_range, "--scale-range");
    std::tie(c.ranges.shape_lo, c.ranges.shape_hi) = as_range(shape_range, "--shape-range");
    if (censor_prob > 0.0 && !(censor_max > 0.0)) {
      throw InvalidArgument("--censor-prob > 0 requires a positive --censor-max");
    }
    c.censoring = {censor_prob, censor_max, admin_censor};
    return c;
  }
};

// Flags shared by train and study.
struct ModelFlags {
  std::string head = "linear-hazard";
  std::size_t grid_points = 5;
  std::optional<double> t_max;
  std::size_t epochs = 200;
  std::vector<std::size_t> hidden{32, 32};
  std::string activation = "relu";
  std::size_t batch_size = 0;
  bool standardize = false;
  double lr_min = 1e-4;
  double lr_max = 1e-1;
  std::size_t lr_count = 20;

  void add_to(CLI::App& app, bool with_head) {
    if (with_head) {
      app.add_option("--head", head, "constant-density | linear-density | constant-hazard | linear-hazard")
          ->capture_default_str();
    }
    app.add_option("--grid-points", grid_points, "Number of uniform grid points (>= 2)")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
    app.add_option("--t-max", t_max, "Grid horizon (default: 1.001 x largest observed time)")
        ->check(CLI::PositiveNumber);
    app.add_option("--epochs", epochs, "Training epochs")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))->capture_default_str();
    app.add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
    app.add_option("--activation", activation, "relu | tanh")->capture_default_str();
    app.add_option("--batch-size", batch_size, "Mini-batch size (0 = full batch)")->capture_default_str();
    app.add_flag("--standardize", standardize, "z-score covariates before the network");
    app.add_option("--lr-min", lr_min, "Smallest swept learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--lr-max", lr_max, "Largest swept learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--lr-count", lr_count, "Number of swept learning rates")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000}))->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c;
    c.head = parse_head_kind(head);
    c.grid.n_points = grid_points;
    c.grid.t_max = t_max;
    c.epochs = epochs;
    c.network.hidden_layers = hidden;
    for (std::size_t h : hidden) {
      if (h == 0) throw InvalidArgument("--hidden widths must be positive");
    }
    c.network.activation = parse_activation(activation);
    c.batch_size = batch_size;
    c.standardize = standardize;
    return c;
  }

  SweepConfig sweep(std::size_t jobs) const { return {lr_min, lr_max, lr_count, jobs}; }
};

void write_history(std::ostream& out, double lr, const std::vector<EpochRecord>& history) {
  for (const auto& h : history) {
    out << num(lr) << ',' << h.epoch << ',' << num(h.train_loss) << ',' << num(h.val_loss) << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise neural survival models: simulate, train, evaluate, plot curves, study"};
  app.name("pwsurv");
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI config file (flags override)");

  // simulate
  std::vector<std::size_t> sizes{1000, 300, 300};
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  SimulationFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "Write simulated train/val/test CSVs");
  simulate->add_option("--sizes", sizes, "train,val,test record counts")
      ->delimiter(',')->expected(3)->capture_default_str();
  simulate->add_option("--seed", seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sim_flags.add_to(*simulate);

  // train
  std::string train_path, val_path;
  std::optional<double> lr;
  bool sweep = false;
  std::size_t jobs = 1;
  ModelFlags model_flags;
  auto* train_cmd = app.add_subcommand("train", "Train one model, or sweep learning rates");
  train_cmd->add_option("--train", train_path, "Training CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--val", val_path, "Validation CSV")->required()->check(CLI::ExistingFile);
  model_flags.add_to(*train_cmd, true);
  auto* lr_opt = train_cmd->add_option("--lr", lr, "Learning rate of a single run (default 1e-3)")
                     ->check(CLI::NonNegativeNumber);
  auto* sweep_flag = train_cmd->add_flag("--sweep", sweep, "Sweep geometrically spaced learning rates");
  lr_opt->excludes(sweep_flag);
  train_cmd->add_option("--seed", seed, "Network initialization seed")->capture_default_str();
  train_cmd->add_option("--jobs", jobs, "Parallel sweep workers")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  // eval
  std::string model_path, data_path;
  auto* eval_cmd = app.add_subcommand("eval", "Mean negative log-likelihood of a dataset");
  eval_cmd->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);

  // curves
  std::vector<double> x, truth;
  std::size_t resolution = 201;
  std::string curve_out;
  auto* curves = app.add_subcommand("curves", "Tabulate S, f, h, H of a model on [0, t_max]");
  curves->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  curves->add_option("--x", x, "Covariate vector")->required()->delimiter(',');
  curves->add_option("--resolution", resolution, "Number of time points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}))->capture_default_str();
  curves->add_option("--truth", truth, "Weibull scale,shape for ground-truth columns")
      ->delimiter(',')->expected(2);
  curves->add_option("--out", curve_out, "Output CSV (default: stdout)");

  // study
  std::size_t reps = 100;
  std::vector<std::string> heads;
  ModelFlags study_flags;
  SimulationFlags study_sim;
  auto* study = app.add_subcommand("study", "Replication study over the four heads");
  study->add_option("--reps", reps, "Replications per head")->check(CLI::PositiveNumber)->capture_default_str();
  study->add_option("--seed", seed, "Master seed")->capture_default_str();
  study->add_option("--jobs", jobs, "Parallel replications")->check(CLI::PositiveNumber)->capture_default_str();
  study->add_option("--heads", heads, "Subset of heads (default: all four)")->delimiter(',');
  study->add_option("--sizes", sizes, "train,val,test record counts")
      ->delimiter(',')->expected(3)->capture_default_str();
  study->add_option("--out", out_dir, "Output directory")->capture_default_str();
  study_flags.add_to(*study, false);
  study_sim.add_to(*study);

  std::vector<std::string> argv_store{"pwsurv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*simulate) {
      for (std::size_t s : sizes) {
        if (s == 0) throw InvalidArgument("--sizes entries must be at least 1");
      }
      const SimulationConfig cfg = sim_flags.config();
      ensure_dir(out_dir);
      const char* names[] = {"train", "val", "test"};
      for (std::size_t i = 0; i < 3; ++i) {
        const Dataset d = generate_dataset(sizes[i], cfg, derive_seed(seed, i), names[i]);
        const fs::path base = fs::path(out_dir) / names[i];
        write_csv(d, fs::path(base).replace_extension(".csv"));
        open_out(fs::path(base).replace_extension(".meta")) << format_metadata(d.metadata, d.size());
        out << "wrote " << base.string() << ".csv (" << d.size() << " records)\n";
      }
      return 0;
    }

    if (*train_cmd) {
      const Dataset train_set = read_csv(train_path);
      const Dataset val_set = read_csv(val_path);
      if (train_set.empty() || val_set.empty()) throw InvalidArgument("training and validation sets must be non-empty");
      TrainConfig cfg = model_flags.config();
      cfg.network.seed = seed;
      cfg.learning_rate = lr.value_or(1e-3);
      ensure_dir(out_dir);
      auto history = open_out(fs::path(out_dir) / "history.csv");
      history << "lr,epoch,train_loss,val_loss\n";
      TrainedModel model;
      if (sweep) {
        SweepResult res = lr_sweep(cfg, train_set, val_set, model_flags.sweep(jobs));
        auto summary = open_out(fs::path(out_dir) / "sweep.csv");
        summary << "lr,best_val_loss,status\n";
        for (const auto& e : res.entries) {
          write_history(history, e.learning_rate, e.history);
          summary << num(e.learning_rate) << ',' << (e.val_loss ? num(*e.val_loss) : "") << ','
                  << (e.val_loss ? "ok" : "aborted") << '\n';
        }
        model = std::move(res.model);
        out << "selected lr " << num(res.selected_lr) << '\n';
      } else {
        model = train(cfg, train_set, val_set);
        write_history(history, cfg.learning_rate, model.history);
      }
      save_model(model, fs::path(out_dir) / "model.json");
      out << "best epoch " << model.best_epoch << ", validation loss " << std::setprecision(4)
          << model.best_val_loss << ", " << std::setprecision(3) << model.train_seconds
          << " s\nwrote " << (fs::path(out_dir) / "model.json").string() << '\n';
      return 0;
    }

    if (*eval_cmd) {
      const TrainedModel model = load_model(model_path);
      const Dataset data = read_csv(data_path);
      if (data.empty()) throw InvalidArgument("dataset " + data_path + " has no records");
      const double loss = evaluate(model, data);
      out << "mean_nll=" << std::setprecision(4) << loss << " records=" << data.size() << '\n';
      return 0;
    }

    if (*curves) {
      const TrainedModel model = load_model(model_path);
      if (x.size() != model.input_dim()) {
        throw DimensionMismatch("--x has " + std::to_string(x.size()) + " values, model expects " +
                                std::to_string(model.input_dim()));
      }
      std::optional<WeibullParams> wb;
      if (!truth.empty()) {
        wb = WeibullParams{truth.at(0), truth.at(1)};
        weibull_survival(*wb, 0.0);  // validates parameters
      }
      std::ofstream file;
      if (!curve_out.empty()) file = open_out(curve_out);
      std::ostream& os = curve_out.empty() ? out : file;
      os << "t,survival,density,hazard,cumulative_hazard";
      if (wb) os << ",true_survival,true_density,true_hazard,true_cumulative_hazard";
      os << '\n';
      const auto z = model.outputs(x);
      const double t_max = model.grid.t_max();
      for (std::size_t i = 0; i < resolution; ++i) {
        const double t = i + 1 == resolution
                             ? t_max
                             : t_max * (static_cast<double>(i) / static_cast<double>(resolution - 1));
        const HeadEvaluation e = evaluate(model.head, z, model.grid, t);
        os << num(t) << ',' << num(e.survival()) << ',' << num(e.density()) << ','
           << num(e.hazard) << ',' << num(e.cumulative_hazard);
        if (wb) {
          os << ',' << num(weibull_survival(*wb, t)) << ',' << num(weibull_density(*wb, t)) << ','
             << num(weibull_hazard(*wb, t)) << ',' << num(std::pow(t / wb->scale, wb->shape));
        }
        os << '\n';
      }
      return 0;
    }

    if (*study) {
      StudyConfig cfg;
      cfg.reps = reps;
      cfg.seed = seed;
      cfg.jobs = jobs;
      for (std::size_t s : sizes) {
        if (s == 0) throw InvalidArgument("--sizes entries must be at least 1");
      }
      cfg.train_size = sizes[0];
      cfg.val_size = sizes[1];
      cfg.test_size = sizes[2];
      cfg.simulation = study_sim.config();
      cfg.base = study_flags.config();
      cfg.sweep = study_flags.sweep(1);

      std::vector<HeadKind> kinds;
      if (heads.empty()) {
        kinds.assign(std::begin(kAllHeads), std::end(kAllHeads));
      } else {
        for (const auto& h : heads) kinds.push_back(parse_head_kind(h));
      }
      ensure_dir(out_dir);
      auto report = open_out(fs::path(out_dir) / "report.csv");
      auto timing = open_out(fs::path(out_dir) / "timing.csv");
      auto per_rep = open_out(fs::path(out_dir) / "replications.csv");
      report << "model,reps,failures,mean_loss,sd_loss,caveat\n";
      timing << "model,mean_time_s,sd_time_s\n";
      per_rep << "model,replication,seed,status,test_loss,oracle_test_loss,selected_lr\n";
      out << "model              test loss (mean NLL)     training time [s]   failures\n";
      for (HeadKind k : kinds) {
        const StudySummary s = replication_study(k, cfg);
        const std::string caveat = s.single_sample ? "single-sample-sd" : "";
        report << to_string(k) << ',' << reps << ',' << s.failures << ',' << num(s.mean_loss) << ','
               << num(s.sd_loss) << ',' << caveat << '\n';
        timing << to_string(k) << ',' << num(s.mean_time) << ',' << num(s.sd_time) << '\n';
        for (const auto& r : s.replications) {
          per_rep << to_string(k) << ',' << r.index << ',' << r.seed << ','
                  << (r.ok ? "ok" : "failed") << ',' << (r.ok ? num(r.test_loss) : "") << ','
                  << (r.ok ? num(r.oracle_test_loss) : "") << ',' << (r.ok ? num(r.selected_lr) : "")
                  << '\n';
        }
        std::ostringstream row;
        row << std::left << std::setw(18) << to_string(k) << ' ' << std::setprecision(3)
            << s.mean_loss << " +- " << std::setprecision(3) << s.sd_loss << "\t\t" << s.mean_time
            << " +- " << s.sd_time << "\t" << s.failures << (caveat.empty() ? "" : " (" + caveat + ")");
        out << row.str() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << error_tag(e) << ": " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pwsurv::cli
