#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pwsurv/data.hpp"
#include "pwsurv/error.hpp"
#include "pwsurv/heads.hpp"
#include "pwsurv/model_io.hpp"
#include "pwsurv/numerics.hpp"
#include "pwsurv/training.hpp"

namespace py = pybind11;
using namespace pwsurv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset dataset_from_arrays(const Array& x, const Array& time, const py::array_t<bool>& event) {
  if (x.ndim() != 2) throw DimensionMismatch("covariates must be a 2-d array");
  const auto n = static_cast<std::size_t>(x.shape(0));
  const auto d = static_cast<std::size_t>(x.shape(1));
  if (static_cast<std::size_t>(time.size()) != n || static_cast<std::size_t>(event.size()) != n) {
    throw DimensionMismatch("covariates, time and event must have the same length");
  }
  auto xs = x.unchecked<2>();
  auto ts = time.unchecked<1>();
  auto es = event.unchecked<1>();
  Dataset data;
  data.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SurvivalRecord r;
    r.covariates.resize(d);
    for (std::size_t j = 0; j < d; ++j) r.covariates[j] = xs(i, j);
    r.time = ts(i);
    r.event = es(i);
    data.records.push_back(std::move(r));
  }
  return data;
}

py::dict as_dict(const HeadEvaluation& e) {
  py::dict d;
  d["density"] = e.density();
  d["survival"] = e.survival();
  d["hazard"] = e.hazard;
  d["cumulative_hazard"] = e.cumulative_hazard;
  d["log_density"] = e.log_density;
  d["log_survival"] = e.log_survival;
  return d;
}

TrainConfig make_config(const std::string& head, std::size_t grid_points, std::size_t epochs, double learning_rate,
                        std::vector<std::size_t> hidden, const std::string& activation, std::uint64_t seed,
                        bool standardize) {
  TrainConfig c;
  c.head = parse_head_kind(head);
  c.grid.n_points = grid_points;
  c.epochs = epochs;
  c.learning_rate = learning_rate;
  c.network.hidden_layers = std::move(hidden);
  c.network.activation = parse_activation(activation);
  c.network.seed = seed;
  c.standardize = standardize;
  return c;
}

}  // namespace

PYBIND11_MODULE(_pwsurv, m) {
  m.doc() = "Neural survival models with piecewise constant and linear output heads";

  // InvalidArgument and DimensionMismatch surface as ValueError.
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

  std::vector<std::string> heads;
  for (HeadKind k : kAllHeads) heads.emplace_back(to_string(k));
  m.attr("HEADS") = heads;

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def_property_readonly("points", [](const TimeGrid& g) {
        return std::vector<double>(g.points().begin(), g.points().end());
      })
      .def_property_readonly("segments", &TimeGrid::segments)
      .def_property_readonly("t_max", &TimeGrid::t_max)
      .def("segment_index", &TimeGrid::segment_index, py::arg("t"))
      .def("__repr__", [](const TimeGrid& g) {
        return "TimeGrid(segments=" + std::to_string(g.segments()) + ", t_max=" + std::to_string(g.t_max()) + ")";
      });
  m.def("uniform_grid", &make_uniform_grid, py::arg("t_max"), py::arg("n_points"));

  m.def(
      "log_sum_exp",
      [](std::vector<double> values, std::vector<double> weights) { return log_sum_exp(values, weights); },
      py::arg("values"), py::arg("weights") = std::vector<double>{});
  m.def(
      "evaluate_head",
      [](const std::string& head, std::vector<double> z, const TimeGrid& grid, double t) {
        return as_dict(evaluate(parse_head_kind(head), z, grid, t));
      },
      py::arg("head"), py::arg("z"), py::arg("grid"), py::arg("t"),
      "Density, survival, hazard and cumulative hazard of a head at time t.");
  m.def(
      "weibull_survival", [](double scale, double shape, double t) { return weibull_survival({scale, shape}, t); },
      py::arg("scale"), py::arg("shape"), py::arg("t"));

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("covariates"), py::arg("time"), py::arg("event"))
      .def("__len__", &Dataset::size)
      .def_property_readonly("covariates",
                             [](const Dataset& d) {
                               const std::size_t n = d.size(), k = d.covariate_dim();
                               py::array_t<double> out({n, k});
                               auto o = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < n; ++i) {
                                 for (std::size_t j = 0; j < k; ++j) o(i, j) = d.records[i].covariates[j];
                               }
                               return out;
                             })
      .def_property_readonly("time",
                             [](const Dataset& d) {
                               py::array_t<double> out(d.size());
                               auto o = out.mutable_unchecked<1>();
                               for (std::size_t i = 0; i < d.size(); ++i) o(i) = d.records[i].time;
                               return out;
                             })
      .def_property_readonly("event",
                             [](const Dataset& d) {
                               py::array_t<bool> out(d.size());
                               auto o = out.mutable_unchecked<1>();
                               for (std::size_t i = 0; i < d.size(); ++i) o(i) = d.records[i].event;
                               return out;
                             })
      .def("save_csv", [](const Dataset& d, const std::filesystem::path& p) { write_csv(d, p); })
      .def_static("load_csv", &read_csv, py::arg("path"));

  m.def(
      "generate_dataset",
      [](std::size_t n, std::uint64_t seed, std::pair<double, double> scale_range,
         std::pair<double, double> shape_range, double censor_probability, double censor_max_time) {
        SimulationConfig sim;
        sim.ranges = {scale_range.first, scale_range.second, shape_range.first, shape_range.second};
        sim.censoring.probability = censor_probability;
        sim.censoring.max_time = censor_max_time;
        return generate_dataset(n, sim, seed);
      },
      py::arg("n"), py::arg("seed"), py::arg("scale_range") = std::pair{1.0, 3.0},
      py::arg("shape_range") = std::pair{0.5, 5.0}, py::arg("censor_probability") = 0.0,
      py::arg("censor_max_time") = 0.0);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("head", [](const TrainedModel& t) { return std::string(to_string(t.head)); })
      .def_readonly("grid", &TrainedModel::grid)
      .def_readonly("best_epoch", &TrainedModel::best_epoch)
      .def_readonly("best_val_loss", &TrainedModel::best_val_loss)
      .def_readonly("train_seconds", &TrainedModel::train_seconds)
      .def_property_readonly("history",
                             [](const TrainedModel& t) {
                               std::vector<std::tuple<std::size_t, double, double>> rows;
                               for (const auto& e : t.history) rows.emplace_back(e.epoch, e.train_loss, e.val_loss);
                               return rows;
                             })
      .def(
          "predict",
          [](const TrainedModel& t, std::vector<double> x, double time) { return as_dict(t.predict(x, time)); },
          py::arg("covariates"), py::arg("t"))
      .def("outputs", [](const TrainedModel& t, std::vector<double> x) { return t.outputs(x); })
      .def("evaluate", [](const TrainedModel& t, const Dataset& d) { return evaluate(t, d); }, py::arg("data"))
      .def("save", [](const TrainedModel& t, const std::filesystem::path& p) { save_model(t, p); })
      .def("to_json", &format_model);
  m.def("load_model", &load_model, py::arg("path"));

  m.def(
      "train",
      [](const Dataset& train_set, const Dataset& val_set, const std::string& head, std::size_t grid_points,
         std::size_t epochs, double learning_rate, std::vector<std::size_t> hidden, const std::string& activation,
         std::uint64_t seed, bool standardize) {
        const TrainConfig c =
            make_config(head, grid_points, epochs, learning_rate, std::move(hidden), activation, seed, standardize);
        py::gil_scoped_release release;
        return train(c, train_set, val_set);
      },
      py::arg("train"), py::arg("val"), py::arg("head") = "linear-hazard", py::arg("grid_points") = 5,
      py::arg("epochs") = 200, py::arg("learning_rate") = 1e-3,
      py::arg("hidden") = std::vector<std::size_t>{32, 32}, py::arg("activation") = "relu", py::arg("seed") = 0,
      py::arg("standardize") = false);

  m.def(
      "lr_sweep",
      [](const Dataset& train_set, const Dataset& val_set, const std::string& head, std::size_t grid_points,
         std::size_t epochs, double lr_min, double lr_max, std::size_t lr_count, std::uint64_t seed,
         std::size_t jobs) {
        TrainConfig c = make_config(head, grid_points, epochs, 1e-3, {32, 32}, "relu", seed, false);
        SweepConfig s{lr_min, lr_max, lr_count, jobs};
        py::gil_scoped_release release;
        SweepResult r = lr_sweep(c, train_set, val_set, s);
        std::vector<std::pair<double, std::optional<double>>> entries;
        for (const auto& e : r.entries) entries.emplace_back(e.learning_rate, e.val_loss);
        return std::make_tuple(std::move(r.model), r.selected_lr, std::move(entries));
      },
      py::arg("train"), py::arg("val"), py::arg("head") = "linear-hazard", py::arg("grid_points") = 5,
      py::arg("epochs") = 200, py::arg("lr_min") = 1e-4, py::arg("lr_max") = 1e-1, py::arg("lr_count") = 20,
      py::arg("seed") = 0, py::arg("jobs") = 1,
      "Returns (model, selected_lr, [(lr, val_loss or None), ...]).");

  m.def(
      "replication_study",
      [](const std::string& head, std::size_t reps, std::uint64_t seed, std::size_t epochs, std::size_t lr_count,
         std::tuple<std::size_t, std::size_t, std::size_t> sizes, std::size_t jobs) {
        StudyConfig c;
        c.reps = reps;
        c.seed = seed;
        c.base.epochs = epochs;
        c.sweep.count = lr_count;
        std::tie(c.train_size, c.val_size, c.test_size) = sizes;
        c.jobs = jobs;
        StudySummary s;
        {
          py::gil_scoped_release release;
          s = replication_study(parse_head_kind(head), c);
        }
        py::dict d;
        d["mean_loss"] = s.mean_loss;
        d["sd_loss"] = s.sd_loss;
        d["failures"] = s.failures;
        std::vector<double> losses;
        for (const auto& r : s.replications) {
          if (r.ok) losses.push_back(r.test_loss);
        }
        d["test_losses"] = losses;
        return d;
      },
      py::arg("head"), py::arg("reps"), py::arg("seed") = 1, py::arg("epochs") = 200, py::arg("lr_count") = 20,
      py::arg("sizes") = std::make_tuple(1000, 300, 300), py::arg("jobs") = 1);
}
