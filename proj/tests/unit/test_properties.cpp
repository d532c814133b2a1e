// Randomised invariant checks. Generators are hand-rolled on a fixed-seed
// engine so failures are reproducible.

#include "idde/bias.hpp"
#include "idde/coincidence.hpp"
#include "idde/dataset.hpp"
#include "idde/estimator.hpp"

#include "../support/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace idde;

namespace {

std::mt19937_64& engine() {
  static std::mt19937_64 rng(0x1dde);
  return rng;
}

std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(engine()); }
double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine()); }

// Mixes continuous coordinates with coarse grids that force ties and
// duplicate rows.
Dataset random_dataset(std::size_t max_n, std::size_t max_dim) {
  const std::size_t n = pick(2, max_n);
  const std::size_t dim = pick(1, max_dim);
  const bool grid = pick(0, 1) == 1;
  std::vector<double> values(n * dim);
  for (auto& v : values) v = grid ? static_cast<double>(pick(0, 4)) * 0.5 : uniform(-10.0, 10.0);
  return Dataset(std::move(values), n, dim);
}

CorrelationCurve random_line(double slope, double offset) {
  CorrelationCurve c;
  c.n = 50;
  c.lr = 1225;
  const double x0 = uniform(-20.0, 5.0);
  const std::size_t count = pick(2, 60);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = x0 + static_cast<double>(i) * uniform(0.01, 0.5);
    c.points.push_back({x, slope * x - offset});
  }
  return c;
}

} // namespace

TEST_CASE("radii profiles hold every pair once, sorted and non-negative") {
  for (int trial = 0; trial < 200; ++trial) {
    const auto ds = random_dataset(40, 6);
    const auto profile = pairwise_radii(ds);
    CHECK(profile.lr() == ds.size() * (ds.size() - 1) / 2);
    CHECK(std::is_sorted(profile.radii().begin(), profile.radii().end()));
    CHECK(profile.radii().front() >= 0.0);
    auto naive = oracle::pair_radii(ds);
    std::sort(naive.begin(), naive.end());
    CHECK(std::equal(naive.begin(), naive.end(), profile.radii().begin(), profile.radii().end()));
  }
}

TEST_CASE("thread count never changes the radii") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = random_dataset(300, 4);
    PairOptions one;
    one.threads = 1;
    PairOptions many;
    many.threads = static_cast<unsigned>(pick(2, 9));
    const auto a = pairwise_radii(ds, one);
    const auto b = pairwise_radii(ds, many);
    CHECK(std::equal(a.radii().begin(), a.radii().end(), b.radii().begin(), b.radii().end()));
  }
}

TEST_CASE("correlation integral is a monotone fraction matching the double loop") {
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = random_dataset(25, 4);
    const auto profile = pairwise_radii(ds);
    double previous = 0.0;
    for (int k = 0; k < 30; ++k) {
      const double r = k * 1.5;
      const double c = correlation_at(profile, r);
      CHECK(c >= previous);
      CHECK(c <= 1.0);
      CHECK(c == oracle::correlation(ds, r));
      previous = c;
    }
  }
}

TEST_CASE("curve invariants") {
  for (int trial = 0; trial < 150; ++trial) {
    const auto ds = random_dataset(40, 5);
    const auto profile = pairwise_radii(ds);
    if (profile.radii().back() == 0.0) continue;
    const auto c = curve(profile);
    CHECK(c.points == oracle::curve_points(ds));
    CHECK(c.points.back().log2_c == 0.0);
    const double floor = -std::log2(static_cast<double>(c.lr));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      CHECK(c.points[i].log2_c >= floor - 1e-12);
      CHECK(c.points[i].log2_c <= 0.0);
      if (i > 0) {
        CHECK(c.points[i].log2_r > c.points[i - 1].log2_r);
        CHECK(c.points[i].log2_c >= c.points[i - 1].log2_c);
      }
    }
    if (c.points.size() >= 2) {
      const auto r = resample_curve(c, pick(2, 100));
      CHECK(r.points.front().log2_r == c.points.front().log2_r);
      CHECK(r.points.back().log2_r == c.points.back().log2_r);
      CHECK(r.points.back().log2_c == 0.0);
      for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].log2_c >= r.points[i - 1].log2_c);
    }
  }
}

TEST_CASE("exact lines are recovered to 1e-9 bits") {
  for (int trial = 0; trial < 200; ++trial) {
    const double slope = uniform(0.0, 40.0);
    const double offset = uniform(-50.0, 150.0);
    const auto c = random_line(slope, offset);
    const ScaleRange all(c.min_log2_r() - 1e-9, c.max_log2_r() + 1e-9);
    const auto fit = fit_segment(c, all);
    CHECK(std::abs(fit.d_hat - slope) <= 1e-9);
    CHECK(std::abs(fit.h_hat - offset) <= 1e-9);
  }
}

TEST_CASE("shifting log2 r by s keeps d and adds d*s to h") {
  for (int trial = 0; trial < 100; ++trial) {
    const double slope = uniform(0.5, 20.0);
    const auto c = random_line(slope, uniform(-5.0, 5.0));
    const double s = uniform(-4.0, 4.0);
    auto shifted = c;
    for (auto& p : shifted.points) p.log2_r += s;
    const ScaleRange all(c.min_log2_r() - 1e-9, c.max_log2_r() + 1e-9);
    const ScaleRange moved(all.lo() + s, all.hi() + s);
    const auto a = fit_segment(c, all);
    const auto b = fit_segment(shifted, moved);
    CHECK(b.d_hat == doctest::Approx(a.d_hat).epsilon(1e-9));
    CHECK(b.h_hat - a.h_hat == doctest::Approx(a.d_hat * s).epsilon(1e-9));
  }
}

TEST_CASE("scaling a dataset by 2^s shifts the curve by s") {
  for (int trial = 0; trial < 30; ++trial) {
    const auto ds = random_dataset(30, 3);
    if (pairwise_radii(ds).radii().back() == 0.0) continue;
    const int s = static_cast<int>(pick(0, 6)) - 3;
    std::vector<double> scaled(ds.values().begin(), ds.values().end());
    for (auto& v : scaled) v = std::ldexp(v, s);
    const auto a = curve(pairwise_radii(ds));
    const auto b = curve(pairwise_radii(Dataset(scaled, ds.size(), ds.dimension())));
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(std::abs(b.points[i].log2_r - (a.points[i].log2_r + s)) <= 1e-12);
      CHECK(b.points[i].log2_c == a.points[i].log2_c);
    }
  }
}

TEST_CASE("mean offset equals the OLS intercept when the slope is the OLS slope") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = curve(pairwise_radii(gen_hypercube(120, pick(1, 5), 5, trial)));
    const ScaleRange all(c.min_log2_r(), c.max_log2_r());
    const auto ols = fit_segment(c, all);
    const auto fixed = fit_segment(c, all, ols.d_hat);
    CHECK(fixed.h_hat == doctest::Approx(ols.h_hat).epsilon(1e-9));
  }
}

TEST_CASE("windowing conserves values") {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t width = pick(1, 10);
    std::vector<double> series(pick(2 * width, 200));
    for (auto& v : series) v = uniform(-1.0, 1.0);
    const auto ds = window_series(series, {width, WindowMode::Disjoint, 1});
    CHECK(ds.size() == series.size() / width);
    CHECK(std::equal(ds.values().begin(), ds.values().end(), series.begin()));
  }
}

TEST_CASE("generators are pure functions of their arguments") {
  for (std::uint64_t seed : {0ull, 1ull, 77ull, 1ull << 40}) {
    CHECK(gen_circle(50, seed) == gen_circle(50, seed));
    CHECK(gen_sinusoid(50, seed) == gen_sinusoid(50, seed));
    CHECK(gen_hypercube(50, 3, 6, seed, HypercubeOptions{true}) == gen_hypercube(50, 3, 6, seed, HypercubeOptions{true}));
    const std::vector<double> dir = {1, 2};
    CHECK(gen_noisy_segment(50, dir, 0.1, seed) == gen_noisy_segment(50, dir, 0.1, seed));
  }
}

TEST_CASE("hypercube output has exactly D - d zero columns") {
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = pick(1, 6);
    const std::size_t ambient = pick(d, 9);
    const auto ds = gen_hypercube(pick(2, 40), d, ambient, trial);
    std::size_t zero = 0;
    for (std::size_t k = 0; k < ambient; ++k) {
      bool all = true;
      for (std::size_t i = 0; i < ds.size(); ++i) all = all && ds(i, k) == 0.0;
      zero += all ? 1 : 0;
    }
    CHECK(zero == ambient - d);
  }
}

TEST_CASE("bias model properties over the test grid") {
  const std::vector<double> ns = {10, 30, 100, 785, 1000, 1600, 2000, 6990, 1e4, 1e5, 1e6, 1e7};
  for (double n : ns) {
    double previous = 0.0;
    for (int d = 1; d <= 60; ++d) {
      const double a = bias::apparent_id(n, d);
      CHECK(a < d);
      CHECK(a > previous);
      previous = a;
      CHECK(bias::de_bias(n, d) >= 0.0);
    }
  }
  for (int d = 1; d <= 60; ++d) {
    for (std::size_t i = 1; i < ns.size(); ++i) CHECK(bias::apparent_id(ns[i], d) > bias::apparent_id(ns[i - 1], d));
  }
  // d0(r, d) / d depends on r only.
  for (double r = 0.05; r < 1.0; r += 0.05) {
    const double ratio = bias::d0_of_r(r, 1.0);
    for (int d = 2; d <= 40; ++d) CHECK(bias::d0_of_r(r, d) / d == doctest::Approx(ratio).epsilon(1e-12));
  }
  // As n grows the DE bias approaches d.
  for (int d = 1; d <= 3; ++d) CHECK(bias::de_bias(1e12, d) == doctest::Approx(d).epsilon(0.01));
}

TEST_CASE("compensation and requirements") {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = pick(10, 100000);
    const double d_hat = uniform(1.0, 30.0);
    const double h_hat = uniform(-10.0, 150.0);
    const auto comp = bias::compensate_fit(n, d_hat, h_hat);
    CHECK(comp.h_bar == h_hat - comp.delta_h);
    // Integer mode lands on the closest table row.
    const double err = std::abs(bias::apparent_id(static_cast<double>(n), comp.d_bar) - d_hat);
    if (comp.d_bar > 1) CHECK(err <= std::abs(bias::apparent_id(static_cast<double>(n), comp.d_bar - 1) - d_hat));
    CHECK(err <= std::abs(bias::apparent_id(static_cast<double>(n), comp.d_bar + 1) - d_hat));
  }
  double smith = 0.0, eckmann = 0.0;
  for (double d = 1.0; d <= 50.0; d += 0.5) {
    const auto req = bias::min_observations(d);
    CHECK(req.smith_n_min() >= 1.0);
    CHECK(req.eckmann_n_min() >= 1.0);
    CHECK(req.smith_n_min() > smith);
    CHECK(req.eckmann_n_min() > eckmann);
    smith = req.smith_n_min();
    eckmann = req.eckmann_n_min();
  }
}
