#include <doctest.h>

#include "diffreg/metrics.hpp"
#include "diffreg/synth.hpp"
#include "diffreg/transport.hpp"
#include "oracles.hpp"

using namespace diffreg;
using oracle::Point;

namespace {

LabelVolume disc_labels(const Grid& g, Point c, double r, std::int32_t id) {
  LabelVolume l(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    if (std::hypot(x[0] - c[0], x[1] - c[1]) < r) l[i] = id;
  }
  return l;
}

// brute-force Dice over the merged foreground
double count_dice(const LabelVolume& a, const LabelVolume& b) {
  long both = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += a[i] != 0 && b[i] != 0;
  }
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

}  // namespace

TEST_CASE("Dice of identical and disjoint label sets") {
  const Grid g({32, 32});
  auto a = disc_labels(g, {-1, 0, 0}, 1.0, 1);
  const auto b = disc_labels(g, {1.5, 1.5, 0}, 0.8, 2);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (b[i]) a[i] = 2;
  const auto same = dice(a, a);
  REQUIRE(same.per_label.size() == 2);
  for (const auto& s : same.per_label) CHECK(s.score == 1.0);
  CHECK(same.union_score == 1.0);

  const auto left = disc_labels(g, {-1.5, 0, 0}, 1.0, 1), right = disc_labels(g, {1.5, 0, 0}, 1.0, 1);
  const auto apart = dice(left, right);
  CHECK(apart.per_label.at(0).score == 0.0);
  CHECK(apart.union_score == 0.0);
}

TEST_CASE("Dice of a half plane against the full plane is 2/3") {
  const Grid g({16, 16});
  LabelVolume half(g), full(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.multi_index(i)[0] < 8) half[i] = 1;
  const auto d = dice(half, full);
  CHECK(count_dice(half, full) == 2.0 / 3.0);
  CHECK(d.per_label.at(0).score == 2.0 / 3.0);
  CHECK(d.union_score == 2.0 / 3.0);
}

TEST_CASE("Dice properties on random label volumes") {
  const Grid g({16, 16});
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    LabelVolume a(g), b(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = static_cast<std::int32_t>(4 * uniform01(rng));
      b[i] = static_cast<std::int32_t>(4 * uniform01(rng));
    }
    const auto ab = dice(a, b), ba = dice(b, a);
    REQUIRE(ab.per_label.size() == ba.per_label.size());
    for (std::size_t k = 0; k < ab.per_label.size(); ++k) {
      CHECK(ab.per_label[k].score == ba.per_label[k].score);
      CHECK(ab.per_label[k].score >= 0.0);
      CHECK(ab.per_label[k].score <= 1.0);
    }
    CHECK(ab.union_score == doctest::Approx(count_dice(a, b)).epsilon(1e-15));
  }
}

TEST_CASE("Dice of an id absent from both volumes is flagged") {
  const Grid g({8, 8});
  const LabelVolume a(g, 1), b(g, 1);
  const auto d = dice(a, b, {1, 7});
  REQUIRE(d.per_label.size() == 2);
  CHECK(d.per_label[1].id == 7);
  CHECK(d.per_label[1].empty);
  CHECK(d.per_label[1].score == 1.0);
  CHECK_FALSE(d.per_label[0].empty);
  const auto bg = dice(LabelVolume(g), LabelVolume(g));
  CHECK(bg.per_label.empty());
  CHECK(bg.union_empty);
  CHECK(bg.union_score == 1.0);
}

TEST_CASE("label volumes reject bad input") {
  const Grid g({8, 8});
  CHECK_THROWS_AS(LabelVolume(g, -1), std::invalid_argument);
  CHECK_THROWS_AS(LabelVolume(g, std::vector<std::int32_t>(3, 0)), std::invalid_argument);
  CHECK_THROWS_AS(dice(LabelVolume(g), LabelVolume(Grid({8, 16}))), std::invalid_argument);
}

TEST_CASE("labels under zero velocity are unchanged") {
  const Grid g({32, 32});
  const auto l = disc_labels(g, {0.3, -0.2, 0}, 1.3, 5);
  CHECK(transport_labels(l, VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8) == l);
}

TEST_CASE("a lattice translation cyclically shifts labels") {
  const Grid g({16, 16});
  LabelVolume l(g);
  std::mt19937_64 rng(2);
  for (std::size_t i = 0; i < g.size(); ++i) l[i] = static_cast<std::int32_t>(3 * uniform01(rng));
  const auto v = sample_vector<double>(g, [&](const Point&) { return Point{g.spacing(0), -2 * g.spacing(1), 0}; });
  const auto out = transport_labels(l, v, InterpMethod::cubic, DiffScheme::fd8);
  // departure point x - v: one index up along axis 0, two down along axis 1
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      CHECK(out[g.linear_index(i, j, 0)] == l[g.linear_index((i + 1) % 16, (j + 14) % 16, 0)]);
    }
}

TEST_CASE("label transport agrees with thresholded linear transport") {
  const Grid g({64, 64});
  const auto v = synth_velocity(g, SynthCase::swirl, 1);
  const auto l = disc_labels(g, {0.5, -0.4, 0}, 1.4, 3);
  ScalarField<double> ind(g);
  for (std::size_t i = 0; i < g.size(); ++i) ind[i] = l[i] ? 1.0 : 0.0;
  const TransportPlan<double> plan(v, InterpMethod::linear, DiffScheme::fd8);
  const auto moved = solve_state(ind, plan).final();
  const auto lt = transport_labels(l, v, InterpMethod::cubic, DiffScheme::fd8);
  long fg = 0, agree = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool a = lt[i] != 0, b = moved[i] >= 0.5;
    if (a || b) {
      ++fg;
      agree += a == b;
    }
  }
  REQUIRE(fg > 0);
  CHECK(static_cast<double>(agree) >= 0.95 * static_cast<double>(fg));
  CHECK(lt.ids() == l.ids());
}

TEST_CASE("transport never creates new label ids") {
  const Grid g({32, 32});
  LabelVolume l(g);
  std::mt19937_64 rng(4);
  for (std::size_t i = 0; i < g.size(); ++i) l[i] = 2 * static_cast<std::int32_t>(4 * uniform01(rng));
  const auto v = synth_velocity(g, SynthCase::rotation, 1);
  const auto out = transport_labels(l, v, InterpMethod::cubic, DiffScheme::fd8);
  const auto before = l.ids();
  for (auto id : out.ids()) CHECK(std::find(before.begin(), before.end(), id) != before.end());
}

TEST_CASE("det statistics of trivial velocities") {
  const Grid g({32, 32});
  auto s = detgrad_stats(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  CHECK(s.min == 1.0);
  CHECK(s.mean == 1.0);
  CHECK(s.max == 1.0);
  const auto c = sample_vector<double>(g, [](const Point&) { return Point{-0.4, 0.9, 0}; });
  s = detgrad_stats(c, InterpMethod::cubic, DiffScheme::fd8);
  CHECK(s.min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("det statistics of a compressive velocity match the flow map") {
  const Grid g({32, 32}, 8);
  const double a = 0.4;
  const oracle::VelocityFn fn = [&](const Point& x) {
    return Point{a * std::sin(x[0]) + 0.2 * std::cos(x[1]), a * std::sin(x[1]), 0.0};
  };
  const auto v = sample_vector<double>(g, fn);
  const auto s = detgrad_stats(v, InterpMethod::cubic, DiffScheme::fd8);
  double mean = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) mean += oracle::flow_map_det(fn, g.point(i), 2, 100);
  mean /= static_cast<double>(g.size());
  CHECK(s.min < 1.0);
  CHECK(s.max > 1.0);
  CHECK(std::abs(s.mean - mean) / mean <= 1e-2);
}

TEST_CASE("det statistics are ordered") {
  const Grid g({16, 16});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = oracle::random_band_limited<double>(g, seed, 3, 0.5);
    const auto s = detgrad_stats(v, InterpMethod::linear, DiffScheme::spectral);
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
  }
  ScalarField<float> f(g);
  f[3] = 1e30f;
  const auto fs = field_stats(f);
  CHECK(fs.min <= fs.mean);
  CHECK(fs.mean <= fs.max);
}

TEST_CASE("relative mismatch") {
  const auto prob = synth_case<double>(SynthCase::rotation, 32, 1);
  const Grid& g = prob.m0.grid();
  auto r = relative_mismatch(prob.m0, prob.m1, VectorField<double>(g), DistanceKind::ssd, InterpMethod::cubic,
                             DiffScheme::fd8);
  CHECK(r.value == 1.0);
  CHECK_FALSE(r.degenerate);
  r = relative_mismatch(prob.m0, prob.m0, prob.v_true, DistanceKind::ssd, InterpMethod::cubic, DiffScheme::fd8);
  CHECK(r.degenerate);
  CHECK(r.value == 0.0);
  r = relative_mismatch(prob.m0, prob.m1, prob.v_true, DistanceKind::ssd, InterpMethod::cubic, DiffScheme::fd8);
  CHECK(r.value < 1e-2);
}

TEST_CASE("residual image is the pointwise absolute difference") {
  const Grid g({8, 8});
  const auto a = oracle::random_band_limited<double>(g, 1, 2, 1.0)[0];
  const auto b = oracle::random_band_limited<double>(g, 2, 2, 1.0)[0];
  const auto r = residual_image(a, b);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(r[i] == std::abs(a[i] - b[i]));
}
