#include "fplap/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "CLI11.hpp"

#include "fplap/report.hpp"

namespace fplap {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDomain:
    case ErrorCode::InvalidExponent:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidMode:
    case ErrorCode::SupercriticalAlpha:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::MeshMismatch:
    case ErrorCode::NonPositiveValue:
    case ErrorCode::NoTwoRoots:
    case ErrorCode::Io:
      return kExitValidation;
    case ErrorCode::NotConverged:
    case ErrorCode::MonotonicityViolation:
      return kExitNotConverged;
    default:
      return kExitInternal;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  RunConfig cfg;
  Mesh mesh;
  std::optional<KernelWeights> K;
  std::optional<EigenPair> eig;
  Clock::time_point start = Clock::now();

  const KernelWeights& kernel() {
    if (!K) {
      K = cfg.cache.empty() ? build_kernel(mesh, cfg.params.s, cfg.params.p)
                            : cached_kernel(cfg.cache, mesh, cfg.params.s, cfg.params.p);
    }
    return *K;
  }
  const EigenPair& eigen() {
    if (!eig) {
      EigenOptions eo;
      eo.seed = cfg.seed;
      eig = principal_eigenpair(kernel(), cfg.eigen_tol, eo);
    }
    return *eig;
  }
  json header() const { return report_header(cfg); }
  void finish(json& j) const {
    j["timing"] = {{"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  }
};

std::vector<double> nodes(const DiscreteFunction& u) { return u.mesh().nodes(); }

void require_power_term(const RunConfig& cfg, const char* what) {
  if (!cfg.params.has_power_term())
    throw Error(ErrorCode::InvalidMode, std::string(what) + " needs mode = full");
}

// Resolves λ from lambda_rel when given; returns the Λ₁ estimate used (NaN otherwise).
double resolve_lambda(Context& ctx) {
  if (!ctx.cfg.lambda_rel) return std::numeric_limits<double>::quiet_NaN();
  require_power_term(ctx.cfg, "lambda_rel");
  const auto est = estimate_Lambda1(ctx.kernel(), ctx.cfg.params, ctx.cfg.samples, ctx.cfg.seed);
  ctx.cfg.params.lambda = *ctx.cfg.lambda_rel * est.value;
  return est.value;
}

int cmd_eigen(Context& ctx) {
  const auto& eig = ctx.eigen();
  json j = ctx.header();
  j["eigen"] = to_json(eig);
  if (ctx.cfg.params.p == 2.0) {
    const double l2 = second_eigenvalue_p2(ctx.kernel(), eig);
    j["eigen"]["second_eigenvalue"] = l2;
    j["eigen"]["spectral_gap"] = l2 - eig.lambda1;
  }
  ctx.finish(j);
  write_json(ctx.cfg.out / "eigen.json", j);
  write_solution_csv(ctx.cfg.out / "phi1.csv", eig.phi1);
  write_plot(ctx.cfg.out / "phi1.dat", nodes(eig.phi1), eig.phi1.vec());
  std::vector<double> its(eig.quotient_trace.size());
  for (std::size_t i = 0; i < its.size(); ++i) its[i] = static_cast<double>(i);
  write_plot(ctx.cfg.out / "quotient_trace.dat", its, eig.quotient_trace);
  std::cerr << "lambda1 = " << eig.lambda1 << "  residual = " << eig.residual << '\n';
  return kExitOk;
}

int cmd_constants(Context& ctx) {
  require_power_term(ctx.cfg, "constants");
  const auto& K = ctx.kernel();
  const auto& P = ctx.cfg.params;
  const auto& eig = ctx.eigen();
  json j = ctx.header();
  json c;
  c["lambda1"] = eig.lambda1;
  const auto Cp = embedding_constant(K, P.p, 1e-12, ctx.cfg.seed);
  c["C_p"] = Cp.value;
  c["inverse_lambda1"] = 1.0 / eig.lambda1;
  const auto Ca = embedding_constant(K, P.alpha + 1.0, 1e-12, ctx.cfg.seed);
  c["C_alpha_plus_1"] = Ca.value;
  const auto S = sobolev_constant(K, 1e-12, ctx.cfg.seed);
  c["sobolev"] = S.value;
  if (P.q < 1.0) {
    const auto Cq = embedding_constant(K, 1.0 - P.q, 1e-12, ctx.cfg.seed);
    c["C_one_minus_q"] = Cq.value;
    const auto ls = lambda_star(P, Cq.value, Ca.value);
    c["lambda_star_printed"] = ls.printed;
    c["lambda_star_corrected"] = ls.corrected;
  } else {
    c["C_one_minus_q"] = nullptr;
  }
  const auto est = estimate_Lambda1(K, P, ctx.cfg.samples, ctx.cfg.seed);
  c["Lambda1_hat"] = est.value;
  c["Lambda1_sample_min"] = est.sample_min;
  c["Lambda1_refined"] = est.refined;
  const auto fc = fiber_coeffs(K, P, eig.phi1);
  c["phi1_lambda_bar"] = lambda_bar(fc);
  c["phi1_m_tmax_printed"] = m_tmax_printed(fc);
  c["phi1_m_tmax_exact"] = m_tmax_exact(fc);
  j["constants"] = c;
  ctx.finish(j);
  write_json(ctx.cfg.out / "constants.json", j);
  write_plot(ctx.cfg.out / "Lambda1_direction.dat", nodes(est.direction), est.direction.vec());
  std::cerr << "Lambda1_hat = " << est.value << '\n';
  return kExitOk;
}

int cmd_fiber(Context& ctx) {
  require_power_term(ctx.cfg, "fiber");
  const double L1 = resolve_lambda(ctx);
  const auto& K = ctx.kernel();
  const auto& P = ctx.cfg.params;
  const auto& eig = ctx.eigen();
  const auto fc = fiber_coeffs(K, P, eig.phi1);
  json j = ctx.header();
  json f;
  f["direction"] = "phi1";
  f["lambda"] = P.lambda;
  f["Lambda1_hat"] = std::isfinite(L1) ? json(L1) : json(nullptr);
  f["P"] = fc.P;
  f["A"] = fc.A;
  f["B"] = fc.B;
  f["t_max"] = t_max(fc);
  f["lambda_bar"] = lambda_bar(fc);
  f["m_tmax_printed"] = m_tmax_printed(fc);
  f["m_tmax_exact"] = m_tmax_exact(fc);
  const auto cp = critical_points(fc, P.lambda);
  if (cp) {
    f["t1"] = cp->t1;
    f["t2"] = cp->t2;
  } else {
    f["t1"] = nullptr;
    f["t2"] = nullptr;
  }
  j["fiber"] = f;
  ctx.finish(j);
  write_json(ctx.cfg.out / "fiber.json", j);
  const double tend = 3.0 * (cp ? cp->t2 : t_max(fc));
  std::vector<double> ts, phis, ms;
  for (int k = 1; k <= 400; ++k) {
    const double t = tend * k / 400.0;
    ts.push_back(t);
    phis.push_back(evaluate_fiber(fc, P.lambda, t).phi);
    ms.push_back(m_fiber(fc, t));
  }
  write_plot(ctx.cfg.out / "fiber.dat", ts, phis);
  write_plot(ctx.cfg.out / "m.dat", ts, ms);
  std::cerr << "lambda_bar(phi1) = " << lambda_bar(fc) << (cp ? "  two critical points\n" : "  no critical points\n");
  return kExitOk;
}

void write_solution_outputs(Context& ctx, json& j, const SolveReport& rep, const char* name) {
  const auto vr = verify_solution(ctx.kernel(), ctx.cfg.params, ctx.eigen(), rep.u, ctx.cfg.verify_tol, ctx.cfg.refine);
  j["verify"] = to_json(vr);
  ctx.finish(j);
  write_json(ctx.cfg.out / "report.json", j);
  write_solution_csv(ctx.cfg.out / "solution.csv", rep.u);
  write_plot(ctx.cfg.out / (std::string(name) + ".dat"), nodes(rep.u), rep.u.vec());
  std::vector<double> its, es;
  for (const auto& s : rep.t_projection_trace) {
    its.push_back(static_cast<double>(s.iteration));
    es.push_back(s.energy);
  }
  write_plot(ctx.cfg.out / "energy_trace.dat", its, es);
  std::cerr << rep.method << ": energy = " << rep.energy << "  residual = " << rep.residual << '\n';
}

int cmd_solve(Context& ctx) {
  auto& cfg = ctx.cfg;
  if (cfg.branch == "pure-singular") {
    cfg.params.mode = Mode::PureSingular;
    validate(cfg);
  }
  const double L1 = resolve_lambda(ctx);
  const auto& K = ctx.kernel();
  const auto& eig = ctx.eigen();
  NehariOptions no;
  no.energy_tol = cfg.energy_tol;
  no.residual_tol = cfg.residual_tol;
  no.max_iter = cfg.max_iter;
  no.starts = cfg.starts;
  no.seed = cfg.seed;
  SolveReport rep;
  if (cfg.branch == "plus") rep = minimize_plus(K, cfg.params, eig, eig.phi1, no);
  else if (cfg.branch == "minus") rep = minimize_minus(K, cfg.params, eig, eig.phi1, no);
  else rep = minimize_pure_singular(K, cfg.params, eig);
  json j = ctx.header();
  j["lambda"] = cfg.params.lambda;
  j["Lambda1_hat"] = std::isfinite(L1) ? json(L1) : json(nullptr);
  j["solve"] = to_json(rep);
  write_solution_outputs(ctx, j, rep, "solution");
  return kExitOk;
}

int cmd_monotone(Context& ctx) {
  auto& cfg = ctx.cfg;
  const double L1 = resolve_lambda(ctx);
  const auto& K = ctx.kernel();
  const auto& eig = ctx.eigen();
  std::optional<DiscreteFunction> upper;
  std::string source = "none";
  if (cfg.params.has_power_term()) {
    try {
      upper = minimize_plus(K, cfg.params, eig, eig.phi1).u;
      source = "minimize_plus";
    } catch (const Error& e) {
      std::cerr << "no super-solution from the plus branch (" << e.what() << "); iterating unbounded\n";
    }
  }
  const auto sub = build_subsolution(K, cfg.params, eig, upper);
  MonotoneOptions mo;
  mo.max_iter = cfg.max_iter;
  mo.residual_tol = cfg.verify_tol;
  const auto mr = monotone_iterate(K, cfg.params, eig, {sub.u, upper}, mo);
  json j = ctx.header();
  j["lambda"] = cfg.params.lambda;
  j["Lambda1_hat"] = std::isfinite(L1) ? json(L1) : json(nullptr);
  j["subsolution"] = {{"t", sub.t}, {"residual", sub.residual}, {"verified", sub.verified}};
  j["upper_source"] = source;
  j["solve"] = to_json(mr.solve);
  j["max_order_violation"] = mr.max_order_violation;
  j["max_upper_excess"] = mr.max_upper_excess;
  if (upper) {
    const auto box = box_minimize(K, cfg.params, eig, {sub.u, upper});
    double diff = 0.0;
    for (std::size_t i = 0; i < box.u.size(); ++i) diff = std::max(diff, std::abs(box.u[i] - mr.solve.u[i]));
    j["box"] = to_json(box);
    j["box"]["sup_distance_to_monotone"] = diff;
  }
  std::vector<double> its(mr.sup_trace.size());
  for (std::size_t i = 0; i < its.size(); ++i) its[i] = static_cast<double>(i);
  write_plot(cfg.out / "sup_trace.dat", its, mr.sup_trace);
  write_solution_outputs(ctx, j, mr.solve, "solution");
  return kExitOk;
}

int cmd_sweep(Context& ctx) {
  auto& cfg = ctx.cfg;
  const auto& K = ctx.kernel();
  const auto& eig = ctx.eigen();
  std::vector<double> grid(cfg.grid);
  const double r = std::log(cfg.lambda_max / cfg.lambda_min);
  for (std::size_t k = 0; k < cfg.grid; ++k)
    grid[k] = cfg.lambda_min * std::exp(r * static_cast<double>(k) / static_cast<double>(cfg.grid - 1));
  SweepOptions so;
  so.bisection_steps = cfg.bisection;
  const auto sr = lambda_sweep(K, cfg.params, eig, grid, so);
  json j = ctx.header();
  j["sweep"] = to_json(sr);
  if (cfg.params.has_power_term())
    j["Lambda1_hat"] = estimate_Lambda1(K, cfg.params, cfg.samples, cfg.seed).value;
  ctx.finish(j);
  write_json(cfg.out / "sweep.json", j);
  write_sweep_csv(cfg.out / "sweep.csv", sr);
  std::vector<double> ls, sups;
  for (const auto& e : sr.entries)
    if (e.succeeded) {
      ls.push_back(e.lambda);
      sups.push_back(e.sup_norm);
    }
  write_plot(cfg.out / "sweep.dat", ls, sups);
  std::cerr << "Lambda_hat = " << sr.lambda_hat << (sr.has_transition ? "" : " (no transition on grid)") << '\n';
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  auto& cfg = ctx.cfg;
  if (cfg.input.empty()) throw Error(ErrorCode::ValidationError, "input: verify needs --input solution.csv");
  const auto u = read_solution_csv(cfg.input, cfg.a, cfg.b);
  cfg.n = u.size();
  ctx.mesh = u.mesh();
  resolve_lambda(ctx);
  const auto vr = verify_solution(ctx.kernel(), cfg.params, ctx.eigen(), u, cfg.verify_tol, cfg.refine);
  json j = ctx.header();
  j["verify"] = to_json(vr);
  ctx.finish(j);
  write_json(cfg.out / "verify.json", j);
  std::cerr << "residual = " << vr.residual << (vr.ok() ? "  ok\n" : "  FAILED\n");
  if (!vr.ok()) throw Error(ErrorCode::NotConverged, "input does not pass verification");
  return kExitOk;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

const std::map<std::string, std::string>& help_text() {
  static const std::map<std::string, std::string> h = {
      {"s", "fractional order in (0,1)"},
      {"p", "integrability exponent, p >= 2"},
      {"q", "singular exponent in (0,1]"},
      {"alpha", "power exponent, p-1 < alpha <= p*-1"},
      {"lambda", "singular coefficient"},
      {"lambda_rel", "set lambda to this multiple of the estimated Lambda1"},
      {"mode", "full | pure_singular"},
      {"a", "left end of the interval"},
      {"b", "right end of the interval"},
      {"n", "interior nodes"},
      {"seed", "seed for sampled directions and multi-starts"},
      {"eigen_tol", "eigen residual tolerance relative to lambda1"},
      {"samples", "directions sampled for Lambda1"},
      {"branch", "plus | minus | pure-singular"},
      {"starts", "minus-branch multi-starts"},
      {"residual_tol", "normalized residual tolerance"},
      {"energy_tol", "relative energy change tolerance"},
      {"max_iter", "iteration cap"},
      {"lambda_min", "smallest sweep lambda"},
      {"lambda_max", "largest sweep lambda"},
      {"grid", "sweep points (log spaced)"},
      {"bisection", "bisection steps after the sweep"},
      {"input", "solution CSV to verify"},
      {"verify_tol", "residual threshold for verification"},
      {"out", "output directory"},
      {"cache", "kernel cache directory"}};
  return h;
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Discrete fractional p-Laplacian singular problems"};
  app.name("fplap");
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file; flags override it");
  std::map<std::string, std::string> values;
  bool refine = false;
  for (const auto& key : config_keys()) {
    if (key == "refine") app.add_flag("--refine", refine, "refinement diagnostic in verification");
    else app.add_option(flag_name(key), values[key], help_text().at(key));
  }
  const std::vector<std::pair<std::string, int (*)(Context&)>> commands = {
      {"eigen", cmd_eigen}, {"constants", cmd_constants}, {"fiber", cmd_fiber}, {"solve", cmd_solve},
      {"monotone", cmd_monotone}, {"sweep", cmd_sweep}, {"verify", cmd_verify}};
  const std::map<std::string, std::string> about = {
      {"eigen", "principal eigenpair"},
      {"constants", "embedding constants, thresholds and Lambda1"},
      {"fiber", "fibering map along phi1"},
      {"solve", "Nehari or pure-singular solve"},
      {"monotone", "monotone iteration between sub- and super-solution"},
      {"sweep", "existence sweep over lambda"},
      {"verify", "check a solution file"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, about.at(name));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Context ctx;
    if (!config_path.empty()) read_config_file(ctx.cfg, config_path);
    for (const auto& key : config_keys()) {
      if (key == "refine") {
        if (app.get_option("--refine")->count() > 0) ctx.cfg.refine = refine;
      } else if (app.get_option(flag_name(key))->count() > 0) {
        apply_setting(ctx.cfg, key, values[key]);
      }
    }
    validate(ctx.cfg);
    ctx.mesh = build_mesh(ctx.cfg.a, ctx.cfg.b, ctx.cfg.n);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) {
        ctx.cfg.command = name;
        return fn(ctx);
      }
    return kExitInternal;
  } catch (const Error& e) {
    std::cerr << "fplap: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fplap: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace fplap
