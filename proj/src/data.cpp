#include "pwsurv/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pwsurv/error.hpp"

namespace pwsurv {

namespace {

void check_params(const WeibullParams& p) {
  if (!(p.scale > 0.0) || !(p.shape > 0.0) || !std::isfinite(p.scale) || !std::isfinite(p.shape)) {
    throw InvalidArgument("Weibull scale and shape must be positive and finite");
  }
}

void check_time(double t) {
  if (!(t >= 0.0)) throw DomainError("Weibull functions need t >= 0");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void check_config(const SimulationConfig& c) {
  const auto& r = c.ranges;
  if (!(r.scale_lo > 0.0 && r.scale_lo <= r.scale_hi) ||
      !(r.shape_lo > 0.0 && r.shape_lo <= r.shape_hi)) {
    throw InvalidArgument("covariate ranges must satisfy 0 < lo <= hi");
  }
  const auto& cens = c.censoring;
  if (!(cens.probability >= 0.0 && cens.probability <= 1.0)) {
    throw InvalidArgument("censoring probability must lie in [0, 1]");
  }
  if (cens.probability > 0.0 && !(cens.max_time > 0.0)) {
    throw InvalidArgument("random censoring needs a positive max time");
  }
  if (cens.administrative_time && !(*cens.administrative_time > 0.0)) {
    throw InvalidArgument("administrative censoring time must be positive");
  }
}

}  // namespace

double weibull_survival(const WeibullParams& p, double t) {
  check_params(p);
  check_time(t);
  return std::exp(-std::pow(t / p.scale, p.shape));
}

double weibull_hazard(const WeibullParams& p, double t) {
  check_params(p);
  check_time(t);
  return p.shape / p.scale * std::pow(t / p.scale, p.shape - 1.0);
}

double weibull_density(const WeibullParams& p, double t) {
  return weibull_hazard(p, t) * weibull_survival(p, t);
}

double weibull_quantile_from_uniform(const WeibullParams& p, double u) {
  check_params(p);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform draw must lie in (0, 1)");
  return p.scale * std::pow(-std::log(u), 1.0 / p.shape);
}

double sample_weibull(const WeibullParams& p, Rng& rng) {
  return weibull_quantile_from_uniform(p, rng.uniform_open01());
}

double Dataset::max_time() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.time);
  return m;
}

Dataset generate_dataset(std::size_t n, const SimulationConfig& config, std::uint64_t seed,
                         std::string split) {
  if (n == 0) throw InvalidArgument("dataset size must be at least 1");
  check_config(config);
  Rng rng(seed);
  Rng censor_rng(derive_seed(seed, 1));
  Dataset d;
  d.metadata = {seed, config, std::move(split), kGeneratorVersion};
  d.records.reserve(n);
  const auto& r = config.ranges;
  const auto& cens = config.censoring;
  for (std::size_t i = 0; i < n; ++i) {
    const WeibullParams p{rng.uniform(r.scale_lo, r.scale_hi), rng.uniform(r.shape_lo, r.shape_hi)};
    SurvivalRecord rec{{p.scale, p.shape}, sample_weibull(p, rng), true};
    if (cens.probability > 0.0) {
      const bool selected = censor_rng.uniform01() < cens.probability;
      const double c = censor_rng.uniform_open01() * cens.max_time;
      if (selected && c < rec.time) {
        rec.time = c;
        rec.event = false;
      }
    }
    if (cens.administrative_time && rec.time > *cens.administrative_time) {
      rec.time = *cens.administrative_time;
      rec.event = false;
    }
    d.records.push_back(std::move(rec));
  }
  return d;
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line, ',');
  if (header.size() < 2 || header[header.size() - 2] != "time" || header.back() != "event") {
    throw ParseError("line 1: header must end with columns 'time,event'");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw ParseError("line 1: expected covariate column 'x" + std::to_string(j) + "', found '" +
                       std::string(header[j]) + "'");
    }
  }

  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    auto fail = [&](const std::string& what) {
      throw ParseError("line " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != d + 2) {
      fail("expected " + std::to_string(d + 2) + " fields, found " + std::to_string(fields.size()));
    }
    SurvivalRecord rec;
    rec.covariates.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = parse_double(fields[j]);
      if (!v || !std::isfinite(*v)) fail("invalid covariate x" + std::to_string(j));
      rec.covariates.push_back(*v);
    }
    const auto t = parse_double(fields[d]);
    if (!t || !std::isfinite(*t) || *t < 0.0) fail("time must be a finite non-negative number");
    rec.time = *t;
    if (fields[d + 1] == "1") {
      rec.event = true;
    } else if (fields[d + 1] == "0") {
      rec.event = false;
    } else {
      fail("event must be 0 or 1, found '" + std::string(fields[d + 1]) + "'");
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    Dataset d = parse_csv(in);
    std::filesystem::path meta = path;
    meta.replace_extension(".meta");
    if (std::ifstream min(meta); min) d.metadata = parse_metadata(min);
    return d;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void format_csv(const Dataset& data, std::ostream& out) {
  const std::size_t d = data.covariate_dim();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "time,event\n";
  for (const auto& r : data.records) {
    if (r.covariates.size() != d) throw DimensionMismatch("records have differing covariate dims");
    for (double x : r.covariates) out << format_double(x) << ',';
    out << format_double(r.time) << ',' << (r.event ? '1' : '0') << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  format_csv(data, out);
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

std::string format_metadata(const DatasetMetadata& meta, std::size_t n_records) {
  std::ostringstream out;
  out << "generator=" << (meta.generator.empty() ? "external" : meta.generator) << '\n';
  out << "rng=mt19937_64\n";
  if (meta.seed) out << "seed=" << *meta.seed << '\n';
  if (!meta.split.empty()) out << "split=" << meta.split << '\n';
  out << "records=" << n_records << '\n';
  if (meta.simulation) {
    const auto& s = *meta.simulation;
    out << "scale_range=" << format_double(s.ranges.scale_lo) << ','
        << format_double(s.ranges.scale_hi) << '\n';
    out << "shape_range=" << format_double(s.ranges.shape_lo) << ','
        << format_double(s.ranges.shape_hi) << '\n';
    out << "censor_probability=" << format_double(s.censoring.probability) << '\n';
    out << "censor_max_time=" << format_double(s.censoring.max_time) << '\n';
    out << "admin_censor_time="
        << (s.censoring.administrative_time ? format_double(*s.censoring.administrative_time)
                                            : std::string("none"))
        << '\n';
  }
  return out.str();
}

DatasetMetadata parse_metadata(std::istream& in) {
  DatasetMetadata meta;
  SimulationConfig sim;
  bool has_sim = false;
  std::string line;
  std::size_t line_no = 0;
  auto pair_of = [&](std::string_view v) {
    const auto parts = split_fields(v, ',');
    std::optional<double> a, b;
    if (parts.size() == 2) {
      a = parse_double(parts[0]);
      b = parse_double(parts[1]);
    }
    if (!a || !b) throw ParseError("metadata line " + std::to_string(line_no) + ": bad range");
    return std::pair{*a, *b};
  };
  auto number = [&](std::string_view v) {
    const auto x = parse_double(v);
    if (!x) throw ParseError("metadata line " + std::to_string(line_no) + ": bad number");
    return *x;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("metadata line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "generator") {
      meta.generator = value;
    } else if (key == "seed") {
      meta.seed = std::stoull(std::string(value));
    } else if (key == "split") {
      meta.split = value;
    } else if (key == "scale_range") {
      std::tie(sim.ranges.scale_lo, sim.ranges.scale_hi) = pair_of(value);
      has_sim = true;
    } else if (key == "shape_range") {
      std::tie(sim.ranges.shape_lo, sim.ranges.shape_hi) = pair_of(value);
      has_sim = true;
    } else if (key == "censor_probability") {
      sim.censoring.probability = number(value);
    } else if (key == "censor_max_time") {
      sim.censoring.max_time = number(value);
    } else if (key == "admin_censor_time") {
      if (value != "none") sim.censoring.administrative_time = number(value);
    }
  }
  if (has_sim) meta.simulation = sim;
  return meta;
}

}  // namespace pwsurv
