#include <doctest.h>

#include "diffreg/diffops.hpp"
#include "diffreg/transport.hpp"
#include "oracles.hpp"

using namespace diffreg;
using oracle::Point;

namespace {

VectorField<double> node_points(const Grid& g) {
  return sample_vector<double>(g, [](const Point& x) { return x; });
}

VectorField<double> constant(const Grid& g, Point c) {
  return sample_vector<double>(g, [&](const Point&) { return c; });
}

// divergence-free, band-limited: stream function 0.4 (sin x1 sin x2 + 0.5 cos(x1 + x2))
Point rotation(const Point& x) {
  const double a = 0.4;
  return {a * (std::sin(x[0]) * std::cos(x[1]) - 0.5 * std::sin(x[0] + x[1])),
          -a * (std::cos(x[0]) * std::sin(x[1]) - 0.5 * std::sin(x[0] + x[1])), 0.0};
}

// compressible and band-limited
Point squeeze(const Point& x) { return {0.3 * std::sin(x[0]) + 0.1 * std::cos(x[1]), 0.2 * std::sin(x[1] - x[0]), 0.0}; }

double wrap_diff(double a, double b) { return std::remainder(a - b, kTwoPi); }

}  // namespace

TEST_CASE("interpolation is exact at nodes for every method") {
  const Grid g({16, 12});
  const auto u = oracle::random_band_limited<double>(g, 1, 5, 1.0)[0];
  auto pts = node_points(g);
  for (auto m : {InterpMethod::nearest, InterpMethod::linear, InterpMethod::cubic}) {
    CHECK(oracle::max_abs_diff(interpolate(u, pts, m), u) < 1e-14);
  }
  // whole periods away still hit the nodes
  for (auto& c : pts) for (auto& x : c.values()) x += 2 * kTwoPi;
  CHECK(oracle::max_abs_diff(interpolate(u, pts, InterpMethod::cubic), u) < 1e-12);
}

TEST_CASE("linear interpolation at an axis midpoint is the mean") {
  const Grid g({8, 8});
  std::mt19937_64 rng(3);
  ScalarField<double> u(g);
  for (auto& x : u.values()) x = uniform01(rng);
  auto pts = node_points(g);
  for (auto& x : pts[1].values()) x -= 0.5 * g.spacing(1);
  const auto r = interpolate(u, pts, InterpMethod::linear);
  // a smaller coordinate means the next index along the axis
  const auto a = u[g.linear_index(2, 3, 0)], b = u[g.linear_index(2, 4, 0)];
  CHECK(r[g.linear_index(2, 3, 0)] == doctest::Approx(0.5 * (a + b)).epsilon(1e-15));
}

TEST_CASE("cubic interpolation error is O(h^4)") {
  std::vector<double> err;
  for (int n : {32, 64}) {
    const Grid g({n, 8});
    const auto u = sample<double>(g, [](const Point& x) { return std::sin(x[0]); });
    std::mt19937_64 rng(5);
    VectorField<double> pts(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      pts[0][i] = -kPi + kTwoPi * uniform01(rng);
      pts[1][i] = -kPi + kTwoPi * uniform01(rng);
    }
    const auto r = interpolate(u, pts, InterpMethod::cubic);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(r[i] - std::sin(pts[0][i])));
    // Lagrange remainder: max|f''''| * max|(t+1)t(t-1)(t-2)| / 4! * h^4
    const double h = g.spacing(0);
    CHECK(e <= (9.0 / 16.0) / 24.0 * std::pow(h, 4) * 1.0001);
    err.push_back(e);
  }
  CHECK(oracle::order(err[0], err[1]) > 3.5);
}

TEST_CASE("cubic Lagrange weights") {
  const auto w = cubic_lagrange_weights(0.0);
  CHECK(w[1] == 1.0);
  const auto h = cubic_lagrange_weights(0.5);
  CHECK(h[0] == doctest::Approx(-1.0 / 16));
  CHECK(h[1] == doctest::Approx(9.0 / 16));
  CHECK(h[0] + h[1] + h[2] + h[3] == doctest::Approx(1.0));
}

TEST_CASE("departure points") {
  const Grid g({16, 16});
  const auto x = node_points(g);
  CHECK(oracle::max_abs_diff(departure_points(VectorField<double>(g), 0.25, InterpMethod::cubic), x) == 0.0);
  const auto y = departure_points(constant(g, {0.3, -0.7, 0.0}), 0.25, InterpMethod::cubic);
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e = std::max(e, std::abs(y[0][i] - (x[0][i] - 0.075)));
    e = std::max(e, std::abs(y[1][i] - (x[1][i] + 0.175)));
  }
  CHECK(e < 1e-14);
}

TEST_CASE("departure points have third-order local error") {
  const Grid g({64, 64});
  const auto v = sample_vector<double>(g, squeeze);
  std::vector<double> err;
  for (double ht : {0.2, 0.1}) {
    const auto y = departure_points(v, ht, InterpMethod::cubic);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 7) {
      const auto ref = oracle::rk4_flow(squeeze, g.point(i), -ht, 100, 2);
      e = std::max({e, std::abs(y[0][i] - ref[0]), std::abs(y[1][i] - ref[1])});
    }
    err.push_back(e);
  }
  CHECK(oracle::order(err[0], err[1]) > 2.5);
}

TEST_CASE("state equation trivial cases") {
  const Grid g({16, 16}, 4);
  const auto m0 = oracle::random_band_limited<double>(g, 2, 3, 1.0)[0];
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  const auto m = solve_state(m0, zero);
  for (int j = 0; j <= 4; ++j) CHECK(oracle::max_abs_diff(m[j], m0) < 1e-14);

  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::fd8);
  const auto c = solve_state(ScalarField<double>(g, 0.75), plan);
  for (int j = 0; j <= 4; ++j) CHECK(oracle::max_abs_diff(c[j], ScalarField<double>(g, 0.75)) < 1e-15);
}

TEST_CASE("translated bump matches the analytic shift") {
  const Grid g({128, 128}, 4);
  const oracle::Bump bump{{0.3, -0.5, 0.0}, 3.0, 2};
  const Point c{0.7, -0.4, 0.0};
  const TransportPlan<double> plan(constant(g, c), InterpMethod::cubic, DiffScheme::fd8);
  const auto m1 = solve_state(sample<double>(g, bump), plan).final();
  const auto exact = sample<double>(g, [&](const Point& x) { return bump({x[0] - c[0], x[1] - c[1], 0.0}); });
  // four cubic steps with bounded fourth derivative
  CHECK(oracle::max_abs_diff(m1, exact) < 1e-4);
}

TEST_CASE("linear interpolation transport obeys the min-max principle") {
  const Grid g({32, 32}, 8);
  std::mt19937_64 rng(9);
  ScalarField<double> m0(g);
  for (auto& x : m0.values()) x = uniform01(rng);
  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::linear, DiffScheme::fd8);
  const auto m = solve_state(m0, plan);
  for (int j = 0; j <= 8; ++j) {
    CHECK(m[j].min() >= m0.min());
    CHECK(m[j].max() <= m0.max());
  }
}

TEST_CASE("state solver converges in time with order >= 1.5") {
  const oracle::Bump bump{{0.5, 0.2, 0.0}, 2.0, 2};
  std::vector<double> err;
  for (int nt : {2, 4, 8}) {
    const Grid g({128, 128}, nt);
    const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::spectral);
    const auto m1 = solve_state(sample<double>(g, bump), plan).final();
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 5) {
      e = std::max(e, std::abs(m1[i] - bump(oracle::departure(squeeze, g.point(i), 2, 200))));
    }
    err.push_back(e);
  }
  CHECK(oracle::order(err[0], err[1]) >= 1.5);
  CHECK(oracle::order(err[1], err[2]) >= 1.5);
}

TEST_CASE("adjoint equation") {
  const Grid g({32, 32}, 4);
  const auto lam1 = oracle::random_band_limited<double>(g, 6, 3, 1.0)[0];
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  const auto l0 = solve_adjoint(lam1, zero);
  for (int j = 0; j <= 4; ++j) CHECK(oracle::max_abs_diff(l0[j], lam1) < 1e-14);

  const TransportPlan<double> plan(sample_vector<double>(g, rotation), InterpMethod::cubic, DiffScheme::spectral);
  CHECK(oracle::max_abs(solve_adjoint(ScalarField<double>(g), plan)[0]) == 0.0);

  // divergence free: the continuity equation is pure advection backwards
  const auto lam = solve_adjoint(lam1, plan);
  const TransportPlan<double> back(-1.0 * sample_vector<double>(g, rotation), InterpMethod::cubic,
                                   DiffScheme::spectral);
  const auto adv = solve_state(lam1, back);
  for (int j = 0; j <= 4; ++j) CHECK(oracle::max_abs_diff(lam[j], adv[4 - j]) < 1e-10);

  // and it conserves mass
  const ScalarField<double> one(g, 1.0);
  const double mass1 = l2_inner(lam[4], one);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(l2_inner(lam[j], one) - mass1) <= 1e-3 * oracle::inner(lam1, lam1));
}

TEST_CASE("adjoint conserves mass for compressible flow") {
  const Grid g({64, 64}, 8);
  const oracle::Bump bump{{0.0, 0.5, 0.0}, 2.0, 2};
  const auto lam1 = sample<double>(g, bump);
  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::fd8);
  const auto lam = solve_adjoint(lam1, plan);
  const ScalarField<double> one(g, 1.0);
  const double mass1 = l2_inner(lam1, one);
  CHECK(std::abs(l2_inner(lam[0], one) - mass1) <= 1e-3 * std::abs(mass1));
}

TEST_CASE("incremental state") {
  const Grid g({32, 32}, 4);
  const oracle::Bump bump{{0.0, 0.5, 0.0}, 2.0, 2};
  const auto m0 = sample<double>(g, bump);
  const auto vt = oracle::random_band_limited<double>(g, 8, 2, 0.5);

  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::fd8);
  const auto grads = slice_gradients(solve_state(m0, plan), DiffScheme::fd8);
  CHECK(oracle::max_abs(solve_inc_state(grads, VectorField<double>(g), plan).final()) == 0.0);

  // v = 0: m~(1) = -grad m0 . v~
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  const auto g0 = slice_gradients(solve_state(m0, zero), DiffScheme::fd8);
  const auto mt = solve_inc_state(g0, vt, zero).final();
  ScalarField<double> expect(g);
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < g.size(); ++i) expect[i] -= g0[0][c][i] * vt[c][i];
  CHECK(oracle::max_abs_diff(mt, expect) < 1e-12);
}

TEST_CASE("incremental state linearizes the state equation") {
  const Grid g({64, 64}, 4);
  const oracle::Bump bump{{0.0, 0.5, 0.0}, 2.0, 2};
  const auto m0 = sample<double>(g, bump);
  const auto m1 = sample<double>(g, oracle::Bump{{0.2, 0.3, 0.0}, 2.0, 2});
  const auto v = sample_vector<double>(g, squeeze);
  const auto vt = oracle::random_band_limited<double>(g, 8, 2, 0.5);
  const TransportPlan<double> plan(v, InterpMethod::cubic, DiffScheme::fd8);
  const auto m = solve_state(m0, plan);
  const auto mt = solve_inc_state(slice_gradients(m, DiffScheme::fd8), vt, plan).final();
  // d/d eps of 1/2 ||m(1) - m1||^2 along v~
  const double lin = l2_inner(m.final() - m1, mt);
  auto J = [&](double eps) {
    auto w = v;
    w.axpy(eps, vt);
    const TransportPlan<double> p(w, InterpMethod::cubic, DiffScheme::fd8);
    const auto d = solve_state(m0, p).final() - m1;
    return 0.5 * l2_inner(d, d);
  };
  double best = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) best = std::min(best, std::abs((J(eps) - J(0.0)) / eps - lin));
  CHECK(best <= 1e-2 * std::abs(lin));
}

TEST_CASE("Gauss-Newton incremental adjoint") {
  const Grid g({32, 32}, 4);
  const auto f = oracle::random_band_limited<double>(g, 12, 3, 1.0)[0];
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  const auto l = solve_inc_adjoint_gn(f, zero);
  for (int j = 0; j <= 4; ++j) CHECK(oracle::max_abs_diff(l[j], f) < 1e-14);
  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::fd8);
  CHECK(oracle::max_abs(solve_inc_adjoint_gn(ScalarField<double>(g), plan)[0]) == 0.0);
}

TEST_CASE("deformation tensor") {
  const Grid g({32, 32}, 4);
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  auto det = solve_deformation_tensor(VectorField<double>(g), zero).determinant();
  CHECK(oracle::max_abs_diff(det, ScalarField<double>(g, 1.0)) == 0.0);
  const auto c = constant(g, {0.4, 0.1, 0.0});
  const TransportPlan<double> tplan(c, InterpMethod::cubic, DiffScheme::fd8);
  const auto f = solve_deformation_tensor(c, tplan);
  CHECK(oracle::max_abs_diff(f(0, 0), ScalarField<double>(g, 1.0)) < 1e-14);
  CHECK(oracle::max_abs(f(0, 1)) < 1e-14);
}

TEST_CASE("det of the deformation tensor matches the flow-map oracle") {
  const Grid g({64, 64}, 8);
  const auto v = sample_vector<double>(g, squeeze);
  const TransportPlan<double> plan(v, InterpMethod::cubic, DiffScheme::fd8);
  const auto det = solve_deformation_tensor(v, plan).determinant();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 53) {
    const double ref = oracle::flow_map_det(squeeze, g.point(i), 2);
    worst = std::max(worst, std::abs(det[i] - ref) / ref);
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("composed trajectory") {
  const Grid g({32, 32}, 4);
  const auto x = node_points(g);
  const TransportPlan<double> zero(VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8);
  CHECK(oracle::max_abs_diff(compose_trajectory(zero), x) < 1e-15);

  const Point c{0.9, -2.5, 0.0};
  const TransportPlan<double> shift(constant(g, c), InterpMethod::cubic, DiffScheme::fd8);
  const auto y = compose_trajectory(shift);
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e = std::max({e, std::abs(wrap_diff(y[0][i], x[0][i] - c[0])), std::abs(wrap_diff(y[1][i], x[1][i] - c[1]))});
  }
  CHECK(e < 1e-12);
}

TEST_CASE("composed trajectory agrees with stepwise transport") {
  const Grid g({64, 64}, 4);
  const auto m0 = sample<double>(g, oracle::Bump{{0.0, 0.5, 0.0}, 2.0, 2});
  const TransportPlan<double> plan(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::fd8);
  const auto a = interpolate(m0, compose_trajectory(plan), InterpMethod::cubic);
  const auto b = solve_state(m0, plan).final();
  CHECK(oracle::max_abs_diff(a, b) <= 1e-2 * oracle::max_abs(b));
}
