#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "diffreg/metrics.hpp"
#include "diffreg/parallel.hpp"
#include "diffreg/synth.hpp"
#include "diffreg/volume_io.hpp"

namespace diffreg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// bad input data, as opposed to bad arguments
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool converged(const SolveReport& r) { return r.converged; }

struct Range {
  double min = 0.0, max = 0.0;
};

// Maps intensities onto [0, 1]; a constant image becomes 0.
template <std::floating_point Real>
Range rescale_unit(ScalarField<Real>& f) {
  if (!f.all_finite()) throw DataError("image contains non-finite values");
  const Range r{static_cast<double>(f.min()), static_cast<double>(f.max())};
  const double span = r.max - r.min;
  for (auto& x : f.values()) x = span > 0.0 ? static_cast<Real>((x - r.min) / span) : Real(0);
  return r;
}

DType out_dtype(const JobConfig& job) { return job.precision == "f32" ? DType::f32 : DType::f64; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out_dir(const JobConfig& job) {
  const fs::path dir(job.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json grid_json(const Grid& g) {
  json dims = json::array();
  for (int a = 0; a < g.dim(); ++a) dims.push_back(g.extent(a));
  return dims;
}

template <std::floating_point Real>
std::pair<ScalarField<Real>, ScalarField<Real>> load_pair(const JobConfig& job, json& input) {
  auto m0 = read_scalar_volume<Real>(job.template_path, job.nt);
  auto m1 = read_scalar_volume<Real>(job.reference_path, job.nt);
  if (!m0.grid().same_space(m1.grid())) throw DataError("template and reference shapes differ");
  const auto r0 = rescale_unit(m0);
  const auto r1 = rescale_unit(m1);
  input = {{"template", job.template_path},
           {"reference", job.reference_path},
           {"grid", grid_json(m0.grid())},
           {"template_range", {r0.min, r0.max}},
           {"reference_range", {r1.min, r1.max}}};
  return {std::move(m0), std::move(m1)};
}

template <std::floating_point Real>
void write_solution(const fs::path& dir, const JobConfig& job, const ScalarField<Real>& m0,
                    const ScalarField<Real>& m1, const VectorField<Real>& v) {
  const auto opts = job.kkt();
  const TransportPlan<Real> plan(v, opts.interp, opts.scheme);
  const auto deformed = solve_state(m0, plan).final();
  const auto dt = out_dtype(job);
  write_volume(dir / "velocity.clf", v, dt);
  write_volume(dir / "deformed.clf", deformed, dt);
  write_volume(dir / "residual-before.clf", residual_image(m0, m1), dt);
  write_volume(dir / "residual-after.clf", residual_image(deformed, m1), dt);
}

json report_envelope(const JobConfig& job, json input) {
  return {{"schema", "diffreg.report"},
          {"schema_version", kReportSchemaVersion},
          {"command", job.command},
          {"config", to_json(job)},
          {"input", std::move(input)}};
}

template <std::floating_point Real>
int cmd_register(const JobConfig& job, std::ostream& out) {
  json input;
  auto [m0, m1] = load_pair<Real>(job, input);
  const auto dir = prepare_out_dir(job);
  auto res = register_images(m0, m1, job.reg(), job.kkt(), job.optimizer());
  write_solution(dir, job, m0, m1, res.v);
  auto doc = report_envelope(job, std::move(input));
  doc["report"] = to_json(res.report);
  doc["det_bounds_ok"] =
      det_bounds_from_stats({res.report.det_min, res.report.det_mean, res.report.det_max}, job.eps_det).ok;
  write_json(dir / "report.json", doc);
  out << "status " << res.report.status << ", iterations " << res.report.iterations << ", mismatch "
      << res.report.mismatch << ", det [" << res.report.det_min << ", " << res.report.det_max << "]\n";
  return converged(res.report) ? ok : solver_failure;
}

template <std::floating_point Real>
int cmd_search(const JobConfig& job, std::ostream& out) {
  json input;
  auto [m0, m1] = load_pair<Real>(job, input);
  const auto dir = prepare_out_dir(job);
  auto res = search_alpha(m0, m1, job.reg(), job.kkt(), job.optimizer(), job.search());
  write_text(dir / "trials.csv", trials_csv(res.result));
  if (res.v) write_solution(dir, job, m0, m1, *res.v);
  auto doc = report_envelope(job, std::move(input));
  doc["search"] = to_json(res.result);
  doc["report"] = to_json(res.result.report);
  write_json(dir / "report.json", doc);
  out << "search " << res.result.status << ", alpha " << res.result.alpha << ", trials "
      << res.result.trials.size() << "\n";
  return res.result.found ? ok : solver_failure;
}

template <std::floating_point Real>
int cmd_transport(const JobConfig& job, const std::string& velocity, const std::string& labels, std::ostream& out) {
  const auto v = read_vector_volume<Real>(velocity, job.nt);
  const auto dir = prepare_out_dir(job);
  const auto opts = job.kkt();
  if (!job.template_path.empty()) {
    const auto m0 = read_scalar_volume<Real>(job.template_path, job.nt);
    if (!m0.grid().same_space(v.grid())) throw DataError("image and velocity shapes differ");
    const TransportPlan<Real> plan(v, opts.interp, opts.scheme);
    write_volume(dir / "deformed.clf", solve_state(m0, plan).final(), out_dtype(job));
    out << "wrote " << (dir / "deformed.clf").string() << "\n";
  }
  if (!labels.empty()) {
    const auto l = read_labels(labels);
    if (!l.grid().same_space(v.grid())) throw DataError("label and velocity shapes differ");
    write_labels(dir / "labels.clf", transport_labels(l, v, opts.interp, opts.scheme));
    out << "wrote " << (dir / "labels.clf").string() << "\n";
  }
  return ok;
}

template <std::floating_point Real>
int cmd_detgrad(const JobConfig& job, const std::string& velocity, std::ostream& out) {
  const auto v = read_vector_volume<Real>(velocity, job.nt);
  const auto dir = prepare_out_dir(job);
  const auto opts = job.kkt();
  const auto det = detgrad(v, opts.interp, opts.scheme);
  write_volume(dir / "detgrad.clf", det, out_dtype(job));
  const auto bounds = det_bounds_from_stats(field_stats(det), job.eps_det);
  write_json(dir / "detgrad.json", {{"min", bounds.stats.min},
                                    {"mean", bounds.stats.mean},
                                    {"max", bounds.stats.max},
                                    {"eps_det", job.eps_det},
                                    {"bounds_ok", bounds.ok}});
  out << "det min " << bounds.stats.min << ", mean " << bounds.stats.mean << ", max " << bounds.stats.max
      << (bounds.ok ? ", within bounds\n" : ", outside bounds\n");
  return ok;
}

template <std::floating_point Real>
int cmd_dice(const JobConfig& job, const std::vector<std::string>& files, const std::string& velocity,
             std::ostream& out) {
  auto a = read_labels(files.at(0));
  const auto b = read_labels(files.at(1));
  if (!a.grid().same_space(b.grid())) throw DataError("label volumes differ in shape");
  if (!velocity.empty()) {
    const auto v = read_vector_volume<Real>(velocity, job.nt);
    if (!v.grid().same_space(a.grid())) throw DataError("label and velocity shapes differ");
    const auto opts = job.kkt();
    a = transport_labels(a, v, opts.interp, opts.scheme);
  }
  const auto d = dice(a, b);
  std::ostringstream csv;
  csv.precision(17);
  csv << "label,dice,empty\n";
  for (const auto& s : d.per_label) csv << s.id << ',' << s.score << ',' << (s.empty ? 1 : 0) << '\n';
  csv << "union," << d.union_score << ',' << (d.union_empty ? 1 : 0) << '\n';
  const auto dir = prepare_out_dir(job);
  write_text(dir / "dice.csv", csv.str());
  out << csv.str();
  return ok;
}

template <std::floating_point Real>
int cmd_synth(const JobConfig& job, const std::string& name, int size, int dim, std::ostream& out) {
  const auto c = synth_case_from_string(name);
  const auto p = synth_case<Real>(c, size, job.seed, dim, job.nt);
  const auto dir = prepare_out_dir(job);
  const auto dt = out_dtype(job);
  write_volume(dir / "m0.clf", p.m0, dt);
  write_volume(dir / "m1.clf", p.m1, dt);
  write_volume(dir / "v_true.clf", p.v_true, dt);
  auto threshold = [](const ScalarField<Real>& m) {
    LabelVolume l(m.grid());
    for (std::size_t i = 0; i < m.size(); ++i) l[i] = m[i] > Real(0.7) ? 2 : (m[i] > Real(0.4) ? 1 : 0);
    return l;
  };
  write_labels(dir / "labels0.clf", threshold(p.m0));
  write_labels(dir / "labels1.clf", threshold(p.m1));
  const auto det = detgrad_stats(p.v_true, InterpMethod::cubic, DiffScheme::spectral);
  write_json(dir / "synth.json", {{"case", name},
                                  {"size", size},
                                  {"dim", dim},
                                  {"seed", job.seed},
                                  {"ssd", dist_value(p.m0, p.m1, DistanceKind::ssd)},
                                  {"det_min", det.min},
                                  {"det_max", det.max}});
  out << "wrote " << name << " case to " << dir.string() << "\n";
  return ok;
}

template <class F>
int dispatch(const JobConfig& job, F&& f) {
  return job.precision == "f32" ? f(float{}) : f(double{});
}

void add_io(CLI::App* sc, JobConfig& job) {
  sc->add_option("--out-dir", job.out_dir, "Output directory");
  sc->add_option("--threads", job.threads, "Thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  sc->add_option("--precision", job.precision, "Working precision")->check(CLI::IsMember({"f32", "f64"}));
}

void add_transport_opts(CLI::App* sc, JobConfig& job) {
  sc->add_option("--nt", job.nt, "Number of time steps")->check(CLI::PositiveNumber);
  sc->add_option("--interp", job.interp, "Interpolation")->check(CLI::IsMember({"nearest", "linear", "cubic"}));
}

void add_solver(CLI::App* sc, JobConfig& job) {
  sc->add_option("--template", job.template_path, "Template image m0")->required();
  sc->add_option("--reference", job.reference_path, "Reference image m1")->required();
  sc->add_option("--beta", job.beta, "Divergence penalty weight, 0 disables")->check(CLI::NonNegativeNumber);
  sc->add_option("--distance", job.distance, "Distance measure")->check(CLI::IsMember({"ssd", "ncc"}));
  sc->add_option("--precond", job.precond, "Preconditioner")->check(CLI::IsMember({"reg", "h0", "2level"}));
  sc->add_option("--tol", job.eps_opt, "Relative gradient tolerance")->check(CLI::PositiveNumber);
  sc->add_option("--maxit", job.maxit, "Maximum Gauss-Newton iterations")->check(CLI::PositiveNumber);
  sc->add_option("--forcing", job.forcing, "Forcing sequence")->check(CLI::IsMember({"superlinear", "quadratic"}));
  sc->add_option("--eps-det", job.eps_det, "Determinant bound")->check(CLI::Range(0.0, 1.0));
  add_transport_opts(sc, job);
  add_io(sc, job);
}

}  // namespace

void JobConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("--alpha must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("--beta must be non-negative");
  if (!(eps_det > 0.0 && eps_det < 1.0)) throw std::invalid_argument("--eps-det must lie in (0, 1)");
  if (!(eps_opt > 0.0) || nt < 1 || maxit < 1) throw std::invalid_argument("tolerances and counts must be positive");
}

RegConfig JobConfig::reg() const {
  RegConfig r;
  r.alpha = alpha;
  r.incomp = beta > 0.0 ? IncompressibilityMode::near_incompressible(beta) : IncompressibilityMode::none();
  return r;
}

KktOptions JobConfig::kkt() const {
  KktOptions o;
  o.distance = distance_from_string(distance);
  o.interp = interp_method_from_string(interp);
  return o;
}

OptimizerConfig JobConfig::optimizer() const {
  OptimizerConfig c;
  c.eps_opt = eps_opt;
  c.max_iterations = maxit;
  c.forcing = forcing_from_string(forcing);
  c.precond.kind = precond_from_string(precond);
  return c;
}

SearchConfig JobConfig::search() const {
  SearchConfig s;
  s.eps_det = eps_det;
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffeomorphic image registration with stationary velocity fields", "diffreg"};
  app.require_subcommand(1);
  JobConfig job;
  std::string velocity, labels, case_name = "swirl";
  int size = 128, dim = 2;
  std::vector<std::string> dice_files;

  auto* reg = app.add_subcommand("register", "Register a template image to a reference image");
  reg->add_option("--alpha", job.alpha, "Regularization weight")->check(CLI::PositiveNumber);
  add_solver(reg, job);

  auto* search = app.add_subcommand("search-alpha", "Find the smallest alpha satisfying the determinant bounds");
  add_solver(search, job);

  auto* transport = app.add_subcommand("transport", "Transport an image and/or labels with a velocity");
  transport->add_option("--template", job.template_path, "Image to transport");
  transport->add_option("--velocity", velocity, "Velocity volume")->required();
  transport->add_option("--labels", labels, "Label volume to transport");
  add_transport_opts(transport, job);
  add_io(transport, job);

  auto* det = app.add_subcommand("detgrad", "Determinant of the deformation gradient");
  det->add_option("--velocity", velocity, "Velocity volume")->required();
  det->add_option("--eps-det", job.eps_det, "Determinant bound")->check(CLI::Range(0.0, 1.0));
  add_transport_opts(det, job);
  add_io(det, job);

  auto* metrics = app.add_subcommand("metrics", "Evaluation metrics");
  metrics->require_subcommand(1);
  auto* dice_cmd = metrics->add_subcommand("dice", "Dice overlap of two label volumes");
  dice_cmd->add_option("labels", dice_files, "Two label volumes")->required()->expected(2);
  dice_cmd->add_option("--velocity", velocity, "Transport the first volume with this velocity first");
  add_transport_opts(dice_cmd, job);
  add_io(dice_cmd, job);

  auto* synth = app.add_subcommand("synth", "Write a synthetic registration problem");
  synth->add_option("--case", case_name, "Case")->check(CLI::IsMember({"translation", "rotation", "swirl", "compress"}));
  synth->add_option("--size", size, "Grid points per axis (power of two >= 32)");
  synth->add_option("--dim", dim, "Dimension")->check(CLI::IsMember({2, 3}));
  synth->add_option("--seed", job.seed, "Seed for the template image");
  synth->add_option("--nt", job.nt, "Number of time steps recorded in the grid")->check(CLI::PositiveNumber);
  add_io(synth, job);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return usage;
  }

  try {
    job.validate();
    if (synth->parsed() && (size < 32 || (size & (size - 1)) != 0)) {
      throw std::invalid_argument("--size must be a power of two >= 32");
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
  if (job.threads > 0) set_thread_count(job.threads);

  try {
    if (reg->parsed()) {
      job.command = "register";
      return dispatch(job, [&]<class R>(R) { return cmd_register<R>(job, out); });
    }
    if (search->parsed()) {
      job.command = "search-alpha";
      return dispatch(job, [&]<class R>(R) { return cmd_search<R>(job, out); });
    }
    if (transport->parsed()) {
      job.command = "transport";
      if (job.template_path.empty() && labels.empty()) {
        err << "error: transport needs --template and/or --labels\n";
        return usage;
      }
      return dispatch(job, [&]<class R>(R) { return cmd_transport<R>(job, velocity, labels, out); });
    }
    if (det->parsed()) {
      job.command = "detgrad";
      return dispatch(job, [&]<class R>(R) { return cmd_detgrad<R>(job, velocity, out); });
    }
    if (dice_cmd->parsed()) {
      job.command = "metrics dice";
      return dispatch(job, [&]<class R>(R) { return cmd_dice<R>(job, dice_files, velocity, out); });
    }
    if (synth->parsed()) {
      job.command = "synth";
      return dispatch(job, [&]<class R>(R) { return cmd_synth<R>(job, case_name, size, dim, out); });
    }
  } catch (const VolumeError& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const DistanceError& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  }
  err << app.help();
  return usage;
}

}  // namespace diffreg::cli
