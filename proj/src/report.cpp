#include "fplap/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef FPLAP_VERSION
#define FPLAP_VERSION "unknown"
#endif

namespace fplap {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// NaN and infinities have no JSON literal; they become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string version_string() { return FPLAP_VERSION; }

json report_header(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["version"] = version_string();
  const auto& P = cfg.params;
  json c;
  c["s"] = P.s;
  c["p"] = P.p;
  c["q"] = P.q;
  c["alpha"] = P.alpha;
  c["lambda"] = P.lambda;
  c["lambda_rel"] = cfg.lambda_rel ? json(*cfg.lambda_rel) : json(nullptr);
  c["mode"] = std::string(to_string(P.mode));
  c["a"] = cfg.a;
  c["b"] = cfg.b;
  c["n"] = cfg.n;
  c["seed"] = cfg.seed;
  c["eigen_tol"] = cfg.eigen_tol;
  c["samples"] = cfg.samples;
  c["branch"] = cfg.branch;
  c["starts"] = cfg.starts;
  c["residual_tol"] = cfg.residual_tol;
  c["energy_tol"] = cfg.energy_tol;
  c["max_iter"] = cfg.max_iter;
  c["lambda_min"] = cfg.lambda_min;
  c["lambda_max"] = cfg.lambda_max;
  c["grid"] = cfg.grid;
  c["bisection"] = cfg.bisection;
  c["input"] = cfg.input.string();
  c["verify_tol"] = cfg.verify_tol;
  c["refine"] = cfg.refine;
  c["out"] = cfg.out.string();
  c["cache"] = cfg.cache.string();
  j["config"] = c;
  j["conventions"] = {
      {"lambda1", "min ||u||^p / |u|_p^p (p-homogeneous Rayleigh quotient)"},
      {"residual", "max_i |(Au)_i - lambda u_i^-q - u_i^alpha| / max_i |(Au)_i|"},
      {"eta", "min((lambda q/alpha)^(1/(alpha+q)), (lambda/lambda1)^(1/(p-1+q)))"},
      {"mesh", "N interior nodes x_i = a + (i+1) h, h = (b-a)/(N+1)"}};
  return j;
}

json to_json(const EigenPair& eig) {
  json j;
  j["lambda1"] = eig.lambda1;
  j["residual"] = eig.residual;
  j["relative_residual"] = eig.residual / eig.lambda1;
  j["iterations"] = eig.iterations;
  j["phi1_min"] = eig.phi1.min_value();
  j["quotient_trace"] = eig.quotient_trace;
  return j;
}

json to_json(const SolveReport& rep) {
  json j;
  j["method"] = rep.method;
  j["converged"] = rep.converged;
  j["energy"] = num(rep.energy);
  j["residual"] = num(rep.residual);
  j["seminorm"] = num(rep.seminorm);
  j["sup_norm"] = num(rep.u.sup_norm());
  j["nehari_class"] = std::string(to_string(rep.nehari_class));
  j["lower_bound_ok"] = rep.lower_bound_ok;
  j["eta"] = num(rep.eta);
  j["iterations"] = rep.iterations;
  j["start_index"] = rep.start_index;
  json trace = json::array();
  for (const auto& s : rep.t_projection_trace) trace.push_back({s.iteration, s.t, s.energy});
  j["t_projection_trace"] = trace;
  return j;
}

json to_json(const VerifyReport& vr) {
  json j;
  j["ok"] = vr.ok();
  j["residual"] = num(vr.residual);
  j["residual_ok"] = vr.residual_ok;
  j["energy"] = num(vr.energy);
  j["seminorm"] = num(vr.seminorm);
  j["nehari_class"] = std::string(to_string(vr.nehari_class));
  j["eta"] = num(vr.eta);
  j["eta_literal"] = num(vr.eta_literal);
  j["barrier_margin"] = num(vr.barrier_margin);
  j["barrier_margin_literal"] = num(vr.barrier_margin_literal);
  j["barrier_ok"] = vr.barrier_ok;
  j["barrier_ok_literal"] = vr.barrier_ok_literal;
  j["sup_norm"] = num(vr.sup_norm);
  if (vr.refined) {
    j["refined_sup_norm"] = num(vr.refined_sup_norm);
    j["refinement_ok"] = vr.refinement_ok;
  }
  return j;
}

json to_json(const SweepEntry& e) {
  return {{"lambda", e.lambda},          {"succeeded", e.succeeded},   {"iterations", e.iterations},
          {"energy", num(e.energy)},     {"sup_norm", num(e.sup_norm)}, {"residual", num(e.residual)},
          {"upper_source", e.upper_source}, {"failure", e.failure}};
}

json to_json(const SweepResult& sr) {
  json j;
  j["lambda_hat"] = num(sr.lambda_hat);
  j["bracket"] = {num(sr.bracket_lo), num(sr.bracket_hi)};
  j["has_transition"] = sr.has_transition;
  j["down_set"] = sr.down_set;
  json entries = json::array();
  for (const auto& e : sr.entries) entries.push_back(to_json(e));
  j["entries"] = entries;
  json bis = json::array();
  for (const auto& e : sr.bisection) bis.push_back(to_json(e));
  j["bisection"] = bis;
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_solution_csv(const std::filesystem::path& path, const DiscreteFunction& u) {
  auto out = open_out(path);
  out << "x,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) out << u.mesh().node(i) << ',' << u[i] << '\n';
}

DiscreteFunction read_solution_csv(const std::filesystem::path& path, double a, double b) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  std::vector<double> xs;
  std::vector<double> us;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("x,", 0) == 0) continue;
    std::istringstream ss(line);
    double x = 0.0;
    double u = 0.0;
    char comma = 0;
    if (!(ss >> x >> comma >> u) || comma != ',')
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(lineno) + ": expected x,u");
    xs.push_back(x);
    us.push_back(u);
  }
  const Mesh mesh = build_mesh(a, b, us.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - mesh.node(i)) > 1e-9 * mesh.length())
      throw Error(ErrorCode::MeshMismatch, "row " + std::to_string(i) + " is not at the uniform node");
  return DiscreteFunction(mesh, std::move(us));
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sr) {
  auto out = open_out(path);
  out << "lambda,succeeded,iterations,energy,sup_norm,residual\n";
  // Non-finite fields (failed points) are left empty.
  auto field = [&](double v) {
    out << ',';
    if (std::isfinite(v)) out << v;
  };
  for (const auto& e : sr.entries) {
    out << e.lambda << ',' << (e.succeeded ? 1 : 0) << ',' << e.iterations;
    field(e.energy);
    field(e.sup_norm);
    field(e.residual);
    out << '\n';
  }
}

void write_plot(const std::filesystem::path& path, const std::vector<double>& x, const std::vector<double>& y) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) out << x[i] << ' ' << y[i] << '\n';
}

}  // namespace fplap
