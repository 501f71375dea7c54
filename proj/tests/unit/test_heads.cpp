#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pwsurv/error.hpp"
#include "pwsurv/heads.hpp"

using namespace pwsurv;

namespace {

using Vec = std::vector<double>;

struct Instance {
  HeadKind kind;
  TimeGrid grid;
  Vec z;
};

Instance random_instance(HeadKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> width(0.1, 1.0), logit(-3.0, 3.0);
  const std::size_t n = 1 + rng() % 8;
  Vec pts{0.0};
  for (std::size_t i = 0; i < n; ++i) pts.push_back(pts.back() + width(rng));
  TimeGrid grid(pts);
  Vec z(output_dim(kind, n));
  for (double& v : z) v = logit(rng);
  return {kind, std::move(grid), std::move(z)};
}

double density_at(const Instance& in, double t) {
  return evaluate(in.kind, in.z, in.grid, t).density();
}
double survival_at(const Instance& in, double t) {
  return evaluate(in.kind, in.z, in.grid, t).survival();
}

}  // namespace

TEST_CASE("output dimension contract") {
  CHECK(output_dim(HeadKind::ConstantDensity, 4) == 5);
  CHECK(output_dim(HeadKind::LinearDensity, 4) == 6);
  CHECK(output_dim(HeadKind::ConstantHazard, 4) == 4);
  CHECK(output_dim(HeadKind::LinearHazard, 4) == 5);
  for (HeadKind k : kAllHeads) CHECK(parse_head_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_head_kind("energy"), InvalidArgument);
}

TEST_CASE("constant density levels") {
  const TimeGrid g2({0.0, 1.0, 2.0});
  auto f = density_levels_constant(Vec{0, 0, 0}, g2);
  CHECK(f[0] == doctest::Approx(1.0 / 3));
  CHECK(f[1] == doctest::Approx(1.0 / 3));

  f = density_levels_constant(Vec{0, std::log(3.0)}, TimeGrid({0.0, 1.0}));
  CHECK(f.size() == 1);
  CHECK(f[0] == doctest::Approx(0.25));

  // Z = 1 + 0.5*2 + 0.5*1 = 2.5
  const TimeGrid half({0.0, 0.5, 1.0});
  const Vec z{std::log(2.0), 0, 0};
  f = density_levels_constant(z, half);
  CHECK(f[0] == doctest::Approx(0.8));
  CHECK(f[1] == doctest::Approx(0.4));
  const double tail = eval_constant_density(z, half, 1.0).survival();
  CHECK(0.5 * f[0] + 0.5 * f[1] + tail == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(density_levels_constant(Vec{0, 0}, g2), DimensionMismatch);
}

TEST_CASE("constant density evaluation") {
  const TimeGrid g({0.0, 1.0, 2.0});
  const Vec z{0, 0, 0};
  auto e = eval_constant_density(z, g, 0.0);
  CHECK(e.log_survival == 0.0);
  CHECK(e.density() == doctest::Approx(1.0 / 3));
  CHECK(eval_constant_density(z, g, 2.0).survival() == doctest::Approx(1.0 / 3));

  e = eval_constant_density(z, g, 1.5);
  CHECK(e.survival() == doctest::Approx(0.5));
  CHECK(e.density() == doctest::Approx(1.0 / 3));
  CHECK(e.hazard == doctest::Approx(2.0 / 3));
  const double mass = oracle::integrate([&](double t) { return eval_constant_density(z, g, t).density(); },
                                        0.0, 1.5, g.points());
  CHECK(1.0 - mass == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(eval_constant_density(z, g, 2.01), DomainError);
  CHECK_THROWS_AS(eval_constant_density(z, g, -0.1), DomainError);
}

TEST_CASE("linear density nodes") {
  auto f = density_nodes_linear(Vec{0, 0, 0}, TimeGrid({0.0, 1.0}));
  CHECK(f == std::vector<double>{0.5, 0.5});
  f = density_nodes_linear(Vec{0, 0, 0, 0}, TimeGrid({0.0, 1.0, 2.0}));
  for (double v : f) CHECK(v == doctest::Approx(1.0 / 3));

  // Z = 1 + 0.5 * (3 + 1) = 3
  const TimeGrid g({0.0, 1.0});
  const Vec z{0, std::log(3.0), 0};
  f = density_nodes_linear(z, g);
  CHECK(f[0] == doctest::Approx(1.0 / 3));
  CHECK(f[1] == doctest::Approx(1.0));
  const double trapezoid = 0.5 * (f[0] + f[1]);
  CHECK(trapezoid == doctest::Approx(2.0 / 3));
  CHECK(trapezoid + eval_linear_density(z, g, 1.0).survival() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(density_nodes_linear(Vec{0, 0}, g), DimensionMismatch);
}

TEST_CASE("linear density evaluation") {
  const TimeGrid g({0.0, 1.0});
  auto e = eval_linear_density(Vec{0, 0, 0}, g, 0.5);
  CHECK(e.density() == doctest::Approx(0.5));
  CHECK(e.survival() == doctest::Approx(0.75));

  const Vec z{0, std::log(3.0), 0};
  CHECK(eval_linear_density(z, g, 0.0).log_survival == 0.0);
  CHECK(eval_linear_density(z, g, 1.0).survival() == doctest::Approx(1.0 / 3));
  const double mass = oracle::integrate([&](double t) { return eval_linear_density(z, g, t).density(); },
                                        0.0, 1.0);
  CHECK(1.0 - mass == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("constant hazard levels and evaluation") {
  CHECK(hazard_levels_constant(Vec{0, 0}) == Vec{1, 1});
  CHECK(hazard_levels_constant(Vec{std::log(2.0)})[0] == doctest::Approx(2.0));
  const auto h = hazard_levels_constant(Vec{-1, 0, 1});
  CHECK(h[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(h[2] == doctest::Approx(std::exp(1.0)));

  const TimeGrid g2({0.0, 1.0, 2.0});
  auto e = eval_constant_hazard(Vec{0, 0}, g2, 1.5);
  CHECK(e.cumulative_hazard == doctest::Approx(1.5));
  CHECK(e.survival() == doctest::Approx(std::exp(-1.5)));

  e = eval_constant_hazard(Vec{std::log(2.0)}, TimeGrid({0.0, 1.0}), 0.5);
  CHECK(e.cumulative_hazard == doctest::Approx(1.0));
  CHECK(e.survival() == doctest::Approx(std::exp(-1.0)));
  CHECK(e.density() == doctest::Approx(2.0 * std::exp(-1.0)));

  const Vec z{0, std::log(3.0)};
  e = eval_constant_hazard(z, g2, 2.0);
  CHECK(e.cumulative_hazard == doctest::Approx(4.0));
  const double quad = oracle::integrate([&](double t) { return eval_constant_hazard(z, g2, t).hazard; },
                                        0.0, 2.0, g2.points());
  CHECK(quad == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("linear hazard evaluation") {
  const TimeGrid g({0.0, 1.0});
  for (double t : {0.0, 0.3, 1.0}) {
    const auto e = eval_linear_hazard(Vec{0, 0}, g, t);
    CHECK(e.hazard == doctest::Approx(1.0));
    CHECK(e.cumulative_hazard == doctest::Approx(t));
  }
  const Vec z{0, std::log(3.0)};
  CHECK(eval_linear_hazard(z, g, 1.0).cumulative_hazard == doctest::Approx(2.0));
  const auto e = eval_linear_hazard(z, g, 0.5);
  CHECK(e.hazard == doctest::Approx(2.0));
  CHECK(e.cumulative_hazard == doctest::Approx(0.75));
  const double quad = oracle::integrate([](double t) { return 1.0 + 2.0 * t; }, 0.0, 0.5);
  CHECK(e.cumulative_hazard == doctest::Approx(quad).epsilon(1e-12));
  CHECK_THROWS_AS(eval_linear_hazard(Vec{0}, g, 0.5), DimensionMismatch);
}

TEST_CASE("normalization: integral of f plus S(t_max) is one") {
  std::mt19937_64 rng(2024);
  for (HeadKind kind : kAllHeads) {
    for (int trial = 0; trial < 25; ++trial) {
      const Instance in = random_instance(kind, rng);
      const double tm = in.grid.t_max();
      const double mass = oracle::integrate([&](double t) { return density_at(in, t); }, 0.0, tm,
                                            in.grid.points());
      CHECK(std::abs(mass + survival_at(in, tm) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("proper survival function on random instances") {
  std::mt19937_64 rng(77);
  for (HeadKind kind : kAllHeads) {
    for (int trial = 0; trial < 25; ++trial) {
      const Instance in = random_instance(kind, rng);
      const double tm = in.grid.t_max();
      CHECK(evaluate(kind, in.z, in.grid, 0.0).log_survival == 0.0);
      CHECK(survival_at(in, tm) > 0.0);
      double prev = 1.0;
      for (int s = 1; s <= 200; ++s) {
        const double cur = survival_at(in, std::min(tm, tm * s / 200.0));
        CHECK(cur <= prev + 1e-15);
        prev = cur;
      }
    }
  }
}

TEST_CASE("evaluation identities and derivative consistency") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (HeadKind kind : kAllHeads) {
    for (int trial = 0; trial < 20; ++trial) {
      const Instance in = random_instance(kind, rng);
      const double tm = in.grid.t_max();
      const double step = 1e-5 * tm;
      for (int s = 0; s < 20; ++s) {
        const std::size_t seg = rng() % in.grid.segments();
        // interior point, away from the grid points by more than the step
        const double t = in.grid.point(seg) + in.grid.width(seg) * (0.01 + 0.98 * unit(rng));
        const auto e = evaluate(kind, in.z, in.grid, t);
        CHECK(e.log_survival <= 0.0);
        CHECK(std::abs(e.cumulative_hazard + e.log_survival) <= 1e-10);
        CHECK(oracle::rel_err(e.density(), e.hazard * e.survival(), 1e-300) <= 1e-10);
        const double fd = -oracle::central_difference([&](double u) { return survival_at(in, u); }, t, step);
        CHECK(oracle::rel_err(fd, e.density()) <= 1e-5);
      }
    }
  }
}

TEST_CASE("continuity at interior grid points") {
  std::mt19937_64 rng(8);
  for (HeadKind kind : kAllHeads) {
    for (int trial = 0; trial < 20; ++trial) {
      const Instance in = random_instance(kind, rng);
      for (std::size_t i = 1; i < in.grid.segments(); ++i) {
        const double tau = in.grid.point(i);
        const double left = std::nextafter(tau, 0.0);
        const auto a = evaluate(kind, in.z, in.grid, left);
        const auto b = evaluate(kind, in.z, in.grid, tau);
        CHECK(std::abs(a.survival() - b.survival()) <= 1e-12);
        if (kind == HeadKind::LinearDensity) CHECK(std::abs(a.density() - b.density()) <= 1e-9);
        if (kind == HeadKind::LinearHazard) CHECK(std::abs(a.hazard - b.hazard) <= 1e-9);
      }
    }
  }
}

TEST_CASE("linear heads with equal nodes reduce to constant heads") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> logit(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance base = random_instance(HeadKind::ConstantHazard, rng);
    const std::size_t n = base.grid.segments();
    const double c = logit(rng), tail = logit(rng);
    const Vec z_const_h(n, c), z_lin_h(n + 1, c);
    Vec z_const_d(n, c), z_lin_d(n + 1, c);
    z_const_d.push_back(tail);
    z_lin_d.push_back(tail);
    for (int s = 0; s <= 50; ++s) {
      const double t = std::min(base.grid.t_max(), base.grid.t_max() * s / 50.0);
      const auto ch = eval_constant_hazard(z_const_h, base.grid, t);
      const auto lh = eval_linear_hazard(z_lin_h, base.grid, t);
      CHECK(lh.hazard == ch.hazard);
      CHECK(std::abs(lh.cumulative_hazard - ch.cumulative_hazard) <= 4e-16 * (1.0 + ch.cumulative_hazard));
      const auto cd = eval_constant_density(z_const_d, base.grid, t);
      const auto ld = eval_linear_density(z_lin_d, base.grid, t);
      CHECK(std::abs(cd.survival() - ld.survival()) <= 1e-12);
    }
  }
}

TEST_CASE("analytic log f and log S gradients match finite differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (HeadKind kind : kAllHeads) {
    for (int trial = 0; trial < 20; ++trial) {
      Instance in = random_instance(kind, rng);
      const double t = in.grid.t_max() * unit(rng);
      const HeadWeights w = head_weights(kind, in.grid, t);
      Vec d_f(w.dim()), d_s(w.dim());
      evaluate(w, in.z, d_f, d_s);
      for (std::size_t i = 0; i < in.z.size(); ++i) {
        auto at = [&](double v, bool density) {
          Vec z = in.z;
          z[i] = v;
          const auto e = evaluate(w, z);
          return density ? e.log_density : e.log_survival;
        };
        const double h = 1e-6;
        CHECK(std::abs(oracle::central_difference([&](double v) { return at(v, true); }, in.z[i], h) - d_f[i]) < 1e-6);
        CHECK(std::abs(oracle::central_difference([&](double v) { return at(v, false); }, in.z[i], h) - d_s[i]) < 1e-6);
      }
    }
  }
}

TEST_CASE("extreme outputs stay finite in the log domain") {
  const TimeGrid g({0.0, 1.0, 2.0});
  const auto cd = eval_constant_density(Vec{700, -700, 0}, g, 1.5);
  CHECK(std::isfinite(cd.log_density));
  CHECK(std::isfinite(cd.log_survival));
  const auto ld = eval_linear_density(Vec{-800, 800, -800, -800}, g, 1.999);
  CHECK(std::isfinite(ld.log_density));
  CHECK(std::isfinite(ld.log_survival));
  CHECK(eval_linear_density(Vec{-800, 800, -800, -800}, g, 2.0).log_survival ==
        doctest::Approx(-800 - (800 + std::log(1.0))).epsilon(1e-12));
}
