#include "diffreg/synth.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace diffreg {

namespace {

constexpr int kBumps = 5;
constexpr int kTransportSteps = 64;

}  // namespace

std::string to_string(SynthCase c) {
  switch (c) {
    case SynthCase::translation: return "translation";
    case SynthCase::rotation: return "rotation";
    case SynthCase::swirl: return "swirl";
    case SynthCase::compress: return "compress";
  }
  return "unknown";
}

SynthCase synth_case_from_string(const std::string& s) {
  if (s == "translation") return SynthCase::translation;
  if (s == "rotation") return SynthCase::rotation;
  if (s == "swirl") return SynthCase::swirl;
  if (s == "compress") return SynthCase::compress;
  throw std::invalid_argument("unknown synthetic case: " + s);
}

namespace {

using Point = std::array<double, 3>;

struct Bump {
  Point c{};
  double amp = 1.0, kappa = 2.0;
};

// closed-form template before rescaling
struct TemplateFn {
  std::vector<Bump> bumps;
  int dim = 2;

  double operator()(const Point& x) const {
    double s = 0.0;
    for (const auto& b : bumps) {
      double e = 0.0;
      for (int a = 0; a < dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        e += std::cos(x[ua] - b.c[ua]) - 1.0;
      }
      s += b.amp * std::exp(b.kappa * e);
    }
    return s;
  }
};

TemplateFn make_template(std::uint64_t seed, bool bump_at_corner, int dim) {
  std::mt19937_64 rng(seed);
  TemplateFn t;
  t.dim = dim;
  for (int k = 0; k < kBumps; ++k) {
    Bump b;
    for (int a = 0; a < 3; ++a) b.c[static_cast<std::size_t>(a)] = -kPi + kTwoPi * uniform01(rng);
    b.amp = 0.5 + 0.5 * uniform01(rng);
    b.kappa = 1.5 + 1.5 * uniform01(rng);
    t.bumps.push_back(b);
  }
  if (bump_at_corner) t.bumps.push_back({{kPi, kPi, kPi}, 1.5, 2.0});
  return t;
}

std::function<Point(const Point&)> velocity_fn(SynthCase c, std::uint64_t seed, bool three) {
  switch (c) {
    case SynthCase::translation: {
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
      const Point t{0.4 + 0.2 * uniform01(rng), -0.3 - 0.2 * uniform01(rng), three ? 0.2 + 0.2 * uniform01(rng) : 0.0};
      return [t](const Point&) { return t; };
    }
    case SynthCase::rotation:
      return [three](const Point& x) {
        const double a = 0.4;
        if (!three) return Point{-a * std::sin(x[1]), a * std::sin(x[0]), 0.0};
        return Point{-a * std::sin(x[1]), a * std::sin(x[2]), a * std::sin(x[0])};
      };
    case SynthCase::swirl:
      // v = (d psi/dx2, -d psi/dx1) with psi = a (1 + cos x1)(1 + cos x2) / 4
      return [three](const Point& x) {
        const double a = 1.6;
        const double w = three ? 0.5 * (1.0 + std::cos(x[2])) : 1.0;
        return Point{-0.25 * a * (1.0 + std::cos(x[0])) * std::sin(x[1]) * w,
                     0.25 * a * std::sin(x[0]) * (1.0 + std::cos(x[1])) * w, 0.0};
      };
    case SynthCase::compress:
      // fixed points at 0 (expanding) and +-pi (compressing)
      return [three](const Point& x) {
        const double a = 1.5;
        return Point{a * std::sin(x[0]), a * std::sin(x[1]), three ? a * std::sin(x[2]) : 0.0};
      };
  }
  throw std::invalid_argument("unknown synthetic case");
}

// foot of the characteristic through x at t = 1, traced back to t = 0 with RK4
Point departure(const std::function<Point(const Point&)>& v, Point x, int steps) {
  const double h = -1.0 / steps;
  auto add = [](const Point& p, const Point& q, double s) { return Point{p[0] + s * q[0], p[1] + s * q[1], p[2] + s * q[2]}; };
  for (int k = 0; k < steps; ++k) {
    const auto k1 = v(x);
    const auto k2 = v(add(x, k1, 0.5 * h));
    const auto k3 = v(add(x, k2, 0.5 * h));
    const auto k4 = v(add(x, k3, h));
    for (std::size_t a = 0; a < 3; ++a) x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
  }
  return x;
}

}  // namespace

ScalarField<double> synth_template(const Grid& grid, std::uint64_t seed, bool bump_at_corner) {
  const auto fn = make_template(seed, bump_at_corner, grid.dim());
  auto f = sample<double>(grid, fn);
  const double lo = f.min(), hi = f.max();
  for (auto& x : f.values()) x = (x - lo) / (hi - lo);
  return f;
}

VectorField<double> synth_velocity(const Grid& grid, SynthCase c, std::uint64_t seed) {
  return sample_vector<double>(grid, velocity_fn(c, seed, grid.dim() == 3));
}

template <std::floating_point Real>
SynthProblem<Real> synth_case(SynthCase c, int n, std::uint64_t seed, int dim, int time_steps) {
  if (n < 32 || (n & (n - 1)) != 0) throw std::invalid_argument("synth_case: n must be a power of two >= 32");
  if (dim != 2 && dim != 3) throw std::invalid_argument("synth_case: dim must be 2 or 3");
  const std::vector<int> dims(static_cast<std::size_t>(dim), n);
  const Grid g(std::span<const int>(dims), time_steps);

  const auto fn = make_template(seed, c == SynthCase::compress, dim);
  const auto vel = velocity_fn(c, seed, dim == 3);
  const auto raw = sample<double>(g, fn);
  const double lo = raw.min(), hi = raw.max();
  ScalarField<Real> m0(g), m1(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    m0[i] = static_cast<Real>((raw[i] - lo) / (hi - lo));
    m1[i] = static_cast<Real>((fn(departure(vel, g.point(i), kTransportSteps)) - lo) / (hi - lo));
  }
  return {std::move(m0), std::move(m1), sample_vector<Real>(g, vel)};
}

template SynthProblem<float> synth_case(SynthCase, int, std::uint64_t, int, int);
template SynthProblem<double> synth_case(SynthCase, int, std::uint64_t, int, int);

}  // namespace diffreg
