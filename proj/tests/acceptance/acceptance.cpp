// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cstring>
#include <map>
#include <optional>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "diffreg/continuation.hpp"
#include "diffreg/diffops.hpp"
#include "diffreg/metrics.hpp"
#include "diffreg/optimizer.hpp"
#include "diffreg/synth.hpp"
#include "diffreg/transport.hpp"
#include "diffreg/volume_io.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace diffreg;
using oracle::Point;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  void add(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!text_.empty()) text_ += "; ";
    text_ += what + (ok ? "" : " [failed]");
  }
  Outcome outcome() const { return {pass_, text_}; }

 private:
  bool pass_ = true;
  std::string text_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// det f(1) minima of every converged registration, checked in criterion 8
std::vector<double> converged_det_minima;
std::optional<SearchOutcome<double>> compress_search;

void note_run(const SolveReport& r) {
  if (r.converged) converged_det_minima.push_back(r.det_min);
}

RegConfig reg_none(double alpha = 1e-2) { return {alpha, {}, IncompressibilityMode::none()}; }

// ---------------------------------------------------------------------------

Outcome spectral_exactness() {
  double worst = 0.0;
  for (const Grid& g : {Grid({32, 32}), Grid({16, 16, 16})}) {
    const int d = g.dim();
    const std::array<double, 3> k{3, -2, d == 3 ? 5.0 : 0.0};
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    auto phase = [&](const Point& x) { return k[0] * x[0] + k[1] * x[1] + k[2] * x[2]; };
    const auto u = sample<double>(g, [&](const Point& x) { return std::cos(phase(x)); });
    const auto grad = spectral_gradient(u);
    const auto lap = spectral_laplacian(u);
    VectorField<double> w(g);
    for (int c = 0; c < d; ++c) w[c] = u;  // div of (u, u, u) is -sin(phase) * sum k
    const auto div = divergence(w, DiffScheme::spectral);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      const double s = std::sin(phase(x)), c = std::cos(phase(x));
      for (int a = 0; a < d; ++a) worst = std::max(worst, std::abs(grad[a][i] + k[static_cast<std::size_t>(a)] * s) / std::sqrt(k2));
      worst = std::max(worst, std::abs(lap[i] + k2 * c) / k2);
      worst = std::max(worst, std::abs(div[i] + (k[0] + k[1] + k[2]) * s) / std::sqrt(k2));
    }
  }
  Notes n;
  n.add(worst <= 1e-10, "max relative error " + fmt(worst));
  return n.outcome();
}

Outcome fd8_order() {
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    const Grid g({n, 8});
    const auto u = sample<double>(g, [](const Point& x) { return std::sin(x[0]); });
    const auto du = fd8_derivative(u, 0);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(du[i] - std::cos(g.point(i)[0])));
    err.push_back(e);
  }
  const double p1 = oracle::order(err[0], err[1]), p2 = oracle::order(err[1], err[2]);
  Notes n;
  n.add(p1 >= 7.0 && p2 >= 7.0, "orders " + fmt(p1) + ", " + fmt(p2));
  return n.outcome();
}

Outcome transport_oracle() {
  Notes n;
  const auto prob = synth_case<double>(SynthCase::translation, 128, 1);
  const TransportPlan<double> plan(prob.v_true, InterpMethod::cubic, DiffScheme::fd8);
  const double e = oracle::max_abs_diff(solve_state(prob.m0, plan).final(), prob.m1);
  n.add(e <= 1e-3, "translation max error " + fmt(e));

  // time order needs a non-constant velocity: the translation case has no time error
  const oracle::VelocityFn squeeze = [](const Point& x) {
    return Point{0.3 * std::sin(x[0]) + 0.1 * std::cos(x[1]), 0.2 * std::sin(x[1] - x[0]), 0.0};
  };
  const oracle::Bump bump{{0.5, 0.2, 0.0}, 2.0, 2};
  std::vector<double> err;
  for (int nt : {2, 4, 8}) {
    const Grid g({128, 128}, nt);
    const TransportPlan<double> p(sample_vector<double>(g, squeeze), InterpMethod::cubic, DiffScheme::spectral);
    const auto m1 = solve_state(sample<double>(g, bump), p).final();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 5) {
      worst = std::max(worst, std::abs(m1[i] - bump(oracle::departure(squeeze, g.point(i), 2, 200))));
    }
    err.push_back(worst);
  }
  const double p1 = oracle::order(err[0], err[1]), p2 = oracle::order(err[1], err[2]);
  n.add(p1 >= 1.5 && p2 >= 1.5, "time orders " + fmt(p1) + ", " + fmt(p2));
  return n.outcome();
}

double best_directional_error(KktProblem<double>& p, const VectorField<double>& v, const VectorField<double>& g,
                              const VectorField<double>& dir) {
  const double exact = l2_inner(g, dir);
  double best = 1e300;
  for (double eps = 1e-1; eps >= 1e-7; eps /= 10.0) {
    auto vp = v, vm = v;
    vp.axpy(eps, dir);
    vm.axpy(-eps, dir);
    const double fd = (p.trial_objective(vp).total() - p.trial_objective(vm).total()) / (2.0 * eps);
    best = std::min(best, std::abs(fd - exact) / std::abs(exact));
  }
  return best;
}

Outcome gradient_consistency() {
  const auto prob = synth_case<double>(SynthCase::swirl, 64, 1);
  const Grid& g = prob.m0.grid();
  auto half = prob.v_true;
  half *= 0.5;
  Notes n;
  for (const auto& mode : {IncompressibilityMode::near_incompressible(1e-4), IncompressibilityMode::none()}) {
    KktProblem<double> p(prob.m0, prob.m1, {1e-2, {}, mode}, {});
    double worst = 0.0;
    for (const VectorField<double>& v : {VectorField<double>(g), half}) {
      p.set_velocity(v);
      auto grad = p.gradient();
      if (mode.kind != IncompressibilityMode::Kind::none) grad = p.merit_gradient();
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        worst = std::max(worst, best_directional_error(p, v, grad, oracle::random_band_limited<double>(g, seed, 4, 1.0)));
      }
    }
    n.add(worst <= 5e-2, mode.name() + " worst relative error " + fmt(worst));
  }
  return n.outcome();
}

Outcome hessian_symmetry() {
  const auto prob = synth_case<double>(SynthCase::swirl, 64, 1);
  const Grid& g = prob.m0.grid();
  KktProblem<double> p(prob.m0, prob.m1, reg_none(), {});
  auto v = prob.v_true;
  v *= 0.5;
  p.set_velocity(v);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = oracle::random_band_limited<double>(g, 10 + s, 6, 1.0);
    const auto b = oracle::random_band_limited<double>(g, 20 + s, 6, 1.0);
    const auto ha = p.hessian_matvec(a), hb = p.hessian_matvec(b);
    worst = std::max(worst, std::abs(l2_inner(ha, b) - l2_inner(a, hb)) / (l2_norm(ha) * l2_norm(b)));
  }
  Notes n;
  n.add(worst <= 1e-3, "worst relative asymmetry " + fmt(worst) + " (mode none)");
  return n.outcome();
}

Outcome preconditioner_ordering() {
  const auto prob = synth_case<double>(SynthCase::swirl, 64, 1);
  const Grid& g = prob.m0.grid();
  KktProblem<double> p(prob.m0, prob.m1, reg_none(), {});
  const auto res = optimize(p, OptimizerConfig{});
  note_run(res.report);
  Notes n;
  n.add(res.report.converged, "converged state after " + std::to_string(res.report.iterations) + " iterations");
  const auto grad = p.gradient();
  std::map<PrecondKind, int> iters;
  for (auto kind : {PrecondKind::two_level, PrecondKind::h0, PrecondKind::reg}) {
    Preconditioner<double> pre(p, {kind});
    const auto step = pcg_newton_step(p, grad, pre, 1e-6, 1000);
    iters[kind] = step.status == PcgStatus::converged ? step.iterations : 1 << 30;
  }
  n.add(iters[PrecondKind::two_level] <= iters[PrecondKind::h0] && iters[PrecondKind::h0] <= iters[PrecondKind::reg],
        "PCG iterations 2level " + std::to_string(iters[PrecondKind::two_level]) + ", h0 " +
            std::to_string(iters[PrecondKind::h0]) + ", reg " + std::to_string(iters[PrecondKind::reg]));
  bool spd = true;
  for (auto kind : {PrecondKind::reg, PrecondKind::h0, PrecondKind::two_level}) {
    PrecondOptions o{kind};
    o.inner_tolerance = 1e-10;
    o.inner_max_iterations = 500;
    Preconditioner<double> pre(p, o);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto r = oracle::random_band_limited<double>(g, 40 + s, 8, 1.0);
      const auto q = oracle::random_band_limited<double>(g, 50 + s, 8, 1.0);
      const auto mr = pre.apply(r, 0.1), mq = pre.apply(q, 0.1);
      spd = spd && l2_inner(mr, r) > 0.0;
      spd = spd && std::abs(l2_inner(mr, q) - l2_inner(r, mq)) <= 1e-3 * l2_norm(mr) * l2_norm(q);
    }
  }
  n.add(spd, "SPD checks");
  return n.outcome();
}

bool monotone(const SolveReport& r) {
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    if (r.trace[k].objective > r.trace[k - 1].objective) return false;
  return true;
}

Outcome end_to_end() {
  Notes n;
  for (int dim : {2, 3}) {
    const int size = dim == 2 ? 128 : 64;
    const auto prob = synth_case<double>(SynthCase::swirl, size, 1, dim);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = register_images(prob.m0, prob.m1, RegConfig{}, {}, OptimizerConfig{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note_run(res.report);
    const auto& r = res.report;
    n.add(r.converged && r.mismatch <= 0.1 && r.iterations <= 25 && monotone(r),
          std::to_string(size) + "^" + std::to_string(dim) + ": mismatch " + fmt(r.mismatch) + " in " +
              std::to_string(r.iterations) + " iterations, " + fmt(secs) + " s");
  }
  return n.outcome();
}

Outcome parameter_search() {
  const auto prob = synth_case<double>(SynthCase::compress, 64, 1);
  compress_search = search_alpha(prob.m0, prob.m1, RegConfig{}, KktOptions{}, OptimizerConfig{}, SearchConfig{});
  const auto& r = compress_search->result;
  Notes n;
  n.add(r.found && r.status == "ok", "status " + r.status + ", alpha* " + fmt(r.alpha) + " after " +
                                         std::to_string(r.trials.size()) + " trials");
  n.add(r.monotone, "monotone log");
  bool warm_ok = true;
  for (const auto& t : r.trials) warm_ok = warm_ok && t.objective_start <= t.objective_zero;
  n.add(warm_ok, "warm starts never above J(0)");
  return n.outcome();
}

Outcome diffeomorphism() {
  Notes n;
  // every converged trial of the search counts as a run too
  if (compress_search) {
    for (const auto& t : compress_search->result.trials)
      if (t.solver_status.rfind("converged", 0) == 0 || t.solver_status == "initial-gradient-small")
        converged_det_minima.push_back(t.det_min);
  }
  double lowest = 1e300;
  for (double d : converged_det_minima) lowest = std::min(lowest, d);
  n.add(!converged_det_minima.empty() && lowest > 0.0,
        std::to_string(converged_det_minima.size()) + " converged runs, smallest det " + fmt(lowest));
  if (compress_search && compress_search->v) {
    const auto b = det_bounds_ok(*compress_search->v, 0.1, InterpMethod::cubic, DiffScheme::fd8);
    n.add(b.ok, "search solution det in [" + fmt(b.stats.min) + ", " + fmt(b.stats.max) + "]");
  } else {
    n.add(false, "search returned no solution");
  }
  return n.outcome();
}

Outcome ncc() {
  Notes n;
  const Grid g({8, 8});
  const auto m = oracle::random_band_limited<double>(g, 1, 3, 1.0)[0] + ScalarField<double>(g, 2.0);
  const auto mref = oracle::random_band_limited<double>(g, 2, 3, 1.0)[0] + ScalarField<double>(g, 2.0);
  const auto lam = adjoint_final(m, mref, DistanceKind::ncc);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double eps = 1e-6;
    auto mp = m, mm = m;
    mp[i] += eps;
    mm[i] -= eps;
    const double fd = (dist_value(mp, mref, DistanceKind::ncc) - dist_value(mm, mref, DistanceKind::ncc)) / (2 * eps);
    // dD/dm_i = -lambda_i * cell volume
    const double adj = -lam[i] * g.cell_volume();
    err = std::max(err, std::abs(fd - adj));
    scale = std::max(scale, std::abs(fd));
  }
  n.add(err / scale <= 1e-4, "adjoint vs FD relative error " + fmt(err / scale));

  const auto prob = synth_case<double>(SynthCase::translation, 64, 1);
  KktOptions opts;
  opts.distance = DistanceKind::ncc;
  const auto res = register_images(prob.m0, prob.m1, RegConfig{}, opts, OptimizerConfig{});
  note_run(res.report);
  n.add(res.report.mismatch <= 0.1, "NCC translation mismatch " + fmt(res.report.mismatch) + " in " +
                                        std::to_string(res.report.iterations) + " iterations");
  return n.outcome();
}

Outcome dice_machinery() {
  Notes n;
  const Grid g({32, 32});
  LabelVolume a(g), b(g), half(g), full(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.multi_index(i);
    a[i] = idx[0] < 10 ? 1 : 0;
    b[i] = idx[0] >= 20 ? 1 : 0;
    half[i] = idx[0] < 16 ? 1 : 0;
  }
  n.add(dice(a, a).union_score == 1.0 && dice(a, a).per_label.at(0).score == 1.0, "identical 1");
  n.add(dice(a, b).union_score == 0.0, "disjoint 0");
  const double h = dice(half, full).per_label.at(0).score;
  n.add(h == 2.0 / 3.0, "half overlap " + fmt(h));
  LabelVolume l(g);
  std::mt19937_64 rng(5);
  for (std::size_t i = 0; i < g.size(); ++i) l[i] = static_cast<std::int32_t>(6 * uniform01(rng));
  n.add(transport_labels(l, VectorField<double>(g), InterpMethod::cubic, DiffScheme::fd8) == l,
        "zero-velocity label transport unchanged");
  return n.outcome();
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Outcome determinism() {
  Notes n;
  const fs::path dir = fs::path(DIFFREG_TEST_TMP);
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Grid g({24, 40});
  const auto f = oracle::random_band_limited<double>(g, 7, 9, 1.0);
  write_volume(dir / "f.clf", f, DType::f64);
  const auto back = read_vector_volume<double>(dir / "f.clf");
  bool same = true;
  for (int c = 0; c < 2; ++c)
    same = same && std::memcmp(back[c].values().data(), f[c].values().data(), g.size() * sizeof(double)) == 0;
  n.add(same, "volume round trip bitwise");

  bool cli_ok = run_cli({"synth", "--case", "rotation", "--size", "32", "--out-dir", (dir / "p").string()}) == 0;
  std::vector<std::string> reports;
  for (int rep = 0; rep < 2; ++rep) {
    cli_ok = cli_ok && run_cli({"register", "--template", (dir / "p" / "m0.clf").string(), "--reference",
                                (dir / "p" / "m1.clf").string(), "--threads", "1", "--out-dir",
                                (dir / "run").string()}) == 0;
    std::ifstream in(dir / "run" / "report.json");
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
      cli_ok = false;
      break;
    }
    doc["report"].erase("runtime_seconds");
    reports.push_back(doc.dump());
  }
  n.add(cli_ok && reports.size() == 2 && reports[0] == reports[1], "repeated single-threaded reports identical");
  return n.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, spectral_exactness}, {2, fd8_order},         {3, transport_oracle},        {4, gradient_consistency},
      {5, hessian_symmetry},   {6, preconditioner_ordering}, {7, end_to_end},         {9, parameter_search},
      {8, diffeomorphism},     {10, ncc},                {11, dice_machinery},        {12, determinism}};
  std::map<int, Outcome> results;
  for (const auto& [id, fn] : criteria) {
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
  }
  int failed = 0;
  for (const auto& [id, o] : results) {
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
