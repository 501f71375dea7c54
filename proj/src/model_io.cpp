#include "pwsurv/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pwsurv/error.hpp"

namespace pwsurv {

using nlohmann::json;

std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "dimension-mismatch";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid-argument";
  if (dynamic_cast<const DomainError*>(&e)) return "out-of-domain";
  if (dynamic_cast<const ParseError*>(&e)) return "parse-error";
  if (dynamic_cast<const TrainingDiverged*>(&e)) return "training-diverged";
  return "error";
}

namespace {

json config_to_json(const TrainConfig& c) {
  json grid{{"n_points", c.grid.n_points}, {"margin", c.grid.margin}};
  grid["t_max"] = c.grid.t_max ? json(*c.grid.t_max) : json(nullptr);
  return {
      {"head", to_string(c.head)},
      {"grid", grid},
      {"epochs", c.epochs},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"standardize", c.standardize},
      {"optimizer", {{"name", "adam"}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}}},
  };
}

TrainConfig config_from_json(const json& j, const NetworkConfig& net) {
  TrainConfig c;
  c.head = parse_head_kind(j.at("head").get<std::string>());
  c.grid.n_points = j.at("grid").at("n_points").get<std::size_t>();
  c.grid.margin = j.at("grid").at("margin").get<double>();
  if (!j.at("grid").at("t_max").is_null()) c.grid.t_max = j.at("grid").at("t_max").get<double>();
  c.network = net;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.standardize = j.at("standardize").get<bool>();
  const auto& o = j.at("optimizer");
  c.beta1 = o.at("beta1").get<double>();
  c.beta2 = o.at("beta2").get<double>();
  c.epsilon = o.at("epsilon").get<double>();
  return c;
}

std::vector<double> to_vector(const Eigen::MatrixXd& m) {
  return {m.data(), m.data() + m.size()};
}

}  // namespace

std::string format_model(const TrainedModel& m) {
  const auto& net = m.config.network;
  json layers = json::array();
  for (const auto& l : m.params.layers) {
    layers.push_back({
        {"weight",
         {{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"order", "column-major"},
          {"data", to_vector(l.weight)}}},
        {"bias", {{"size", l.bias.size()}, {"data", to_vector(l.bias)}}},
    });
  }
  json history = json::array();
  for (const auto& h : m.history) history.push_back({h.epoch, h.train_loss, h.val_loss});

  json doc{
      {"format", "pwsurv-model"},
      {"version", kModelFormatVersion},
      {"head", to_string(m.head)},
      {"grid", {{"points", std::vector<double>(m.grid.points().begin(), m.grid.points().end())}}},
      {"network",
       {{"input_dim", net.input_dim},
        {"hidden_layers", net.hidden_layers},
        {"output_dim", net.output_dim},
        {"activation", to_string(net.activation)},
        {"init", "uniform-fan-in"},
        {"seed", net.seed}}},
      {"scaler", m.scaler.identity() ? json(nullptr)
                                     : json{{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
      {"parameters", layers},
      {"training",
       {{"best_epoch", m.best_epoch},
        {"best_val_loss", m.best_val_loss},
        {"train_seconds", m.train_seconds},
        {"history_columns", {"epoch", "train_loss", "val_loss"}},
        {"history", history}}},
      {"config", config_to_json(m.config)},
  };
  return doc.dump(1) + "\n";
}

TrainedModel parse_model(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "pwsurv-model") throw ParseError("not a pwsurv model file");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw ParseError("unsupported model format version " + doc.at("version").dump());
    }
    TrainedModel m;
    m.head = parse_head_kind(doc.at("head").get<std::string>());
    m.grid = TimeGrid(doc.at("grid").at("points").get<std::vector<double>>());

    const auto& jn = doc.at("network");
    NetworkConfig net;
    net.input_dim = jn.at("input_dim").get<std::size_t>();
    net.hidden_layers = jn.at("hidden_layers").get<std::vector<std::size_t>>();
    net.output_dim = jn.at("output_dim").get<std::size_t>();
    net.activation = parse_activation(jn.at("activation").get<std::string>());
    net.seed = jn.at("seed").get<std::uint64_t>();
    if (net.output_dim != output_dim(m.head, m.grid.segments())) {
      throw ParseError("network output_dim does not match head and grid");
    }

    if (!doc.at("scaler").is_null()) {
      m.scaler.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
      m.scaler.scale = doc.at("scaler").at("scale").get<std::vector<double>>();
    }

    m.params.activation = net.activation;
    std::size_t expected_in = net.input_dim;
    for (const auto& jl : doc.at("parameters")) {
      const auto rows = jl.at("weight").at("rows").get<Eigen::Index>();
      const auto cols = jl.at("weight").at("cols").get<Eigen::Index>();
      const auto w = jl.at("weight").at("data").get<std::vector<double>>();
      const auto b = jl.at("bias").at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows ||
          cols != static_cast<Eigen::Index>(expected_in)) {
        throw ParseError("layer " + std::to_string(m.params.layers.size()) + " has inconsistent shape");
      }
      m.params.layers.push_back({Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols),
                                 Eigen::Map<const Eigen::VectorXd>(b.data(), rows)});
      expected_in = static_cast<std::size_t>(rows);
    }
    if (m.params.layers.size() != net.hidden_layers.size() + 1 ||
        m.params.output_dim() != net.output_dim) {
      throw ParseError("parameter layers do not match the network description");
    }

    const auto& jt = doc.at("training");
    m.best_epoch = jt.at("best_epoch").get<std::size_t>();
    m.best_val_loss = jt.at("best_val_loss").get<double>();
    m.train_seconds = jt.at("train_seconds").get<double>();
    for (const auto& h : jt.at("history")) {
      m.history.push_back({h.at(0).get<std::size_t>(), h.at(1).get<double>(), h.at(2).get<double>()});
    }
    m.config = config_from_json(doc.at("config"), net);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << format_model(model);
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void format_history(const TrainedModel& model, std::ostream& out) {
  out << "epoch,train_loss,val_loss\n";
  out.precision(17);
  for (const auto& h : model.history) {
    out << h.epoch << ',' << h.train_loss << ',' << h.val_loss << '\n';
  }
}

}  // namespace pwsurv
