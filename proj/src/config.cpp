#include "fplap/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fplap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& msg, std::size_t line) {
  throw Error(ErrorCode::ParseError, line ? "line " + std::to_string(line) + ": " + msg : msg);
}

double to_double(const std::string& key, const std::string& v, std::size_t line) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) parse_fail(key + ": not a number: '" + v + "'", line);
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v, std::size_t line) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    parse_fail(key + ": not a nonnegative integer: '" + v + "'", line);
  return x;
}

bool to_bool(const std::string& key, const std::string& v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  parse_fail(key + ": not a boolean: '" + v + "'", line);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "s",         "p",          "q",        "alpha",    "lambda",   "lambda_rel", "mode",       "a",
      "b",         "n",          "seed",     "eigen_tol", "samples", "branch",     "starts",     "residual_tol",
      "energy_tol", "max_iter",  "lambda_min", "lambda_max", "grid",  "bisection",  "input",      "verify_tol",
      "refine",    "out",        "cache"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw, std::size_t line) {
  const std::string v = trim(raw);
  auto& P = cfg.params;
  if (key == "s") P.s = to_double(key, v, line);
  else if (key == "p") P.p = to_double(key, v, line);
  else if (key == "q") P.q = to_double(key, v, line);
  else if (key == "alpha") P.alpha = to_double(key, v, line);
  else if (key == "lambda") P.lambda = to_double(key, v, line);
  else if (key == "lambda_rel") cfg.lambda_rel = to_double(key, v, line);
  else if (key == "mode") {
    if (v == "full") P.mode = Mode::Full;
    else if (v == "pure_singular" || v == "pure-singular") P.mode = Mode::PureSingular;
    else parse_fail("mode: expected full or pure_singular, got '" + v + "'", line);
  } else if (key == "a") cfg.a = to_double(key, v, line);
  else if (key == "b") cfg.b = to_double(key, v, line);
  else if (key == "n") cfg.n = to_uint(key, v, line);
  else if (key == "seed") cfg.seed = to_uint(key, v, line);
  else if (key == "eigen_tol") cfg.eigen_tol = to_double(key, v, line);
  else if (key == "samples") cfg.samples = to_uint(key, v, line);
  else if (key == "branch") cfg.branch = v;
  else if (key == "starts") cfg.starts = to_uint(key, v, line);
  else if (key == "residual_tol") cfg.residual_tol = to_double(key, v, line);
  else if (key == "energy_tol") cfg.energy_tol = to_double(key, v, line);
  else if (key == "max_iter") cfg.max_iter = to_uint(key, v, line);
  else if (key == "lambda_min") cfg.lambda_min = to_double(key, v, line);
  else if (key == "lambda_max") cfg.lambda_max = to_double(key, v, line);
  else if (key == "grid") cfg.grid = to_uint(key, v, line);
  else if (key == "bisection") cfg.bisection = to_uint(key, v, line);
  else if (key == "input") cfg.input = v;
  else if (key == "verify_tol") cfg.verify_tol = to_double(key, v, line);
  else if (key == "refine") cfg.refine = to_bool(key, v, line);
  else if (key == "out") cfg.out = v;
  else if (key == "cache") cfg.cache = v;
  else parse_fail("unknown key '" + key + "'", line);
}

void read_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config file " + path.string());
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    if (trim(text).empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) parse_fail("expected key = value", line);
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) parse_fail("empty key", line);
    apply_setting(cfg, key, text.substr(eq + 1), line);
  }
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); };
  try {
    cfg.params.validate();
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    fail("params: " + (colon == std::string::npos ? msg : msg.substr(colon + 2)));
  }
  if (!(cfg.b > cfg.a)) fail("b: requires a < b");
  if (cfg.n < kMinNodes) fail("n: requires n >= " + std::to_string(kMinNodes));
  if (cfg.lambda_rel && !(*cfg.lambda_rel > 0.0)) fail("lambda_rel: requires lambda_rel > 0");
  if (cfg.branch != "plus" && cfg.branch != "minus" && cfg.branch != "pure-singular")
    fail("branch: expected plus, minus or pure-singular");
  if (!(cfg.eigen_tol > 0.0)) fail("eigen_tol: requires eigen_tol > 0");
  if (!(cfg.residual_tol > 0.0)) fail("residual_tol: requires residual_tol > 0");
  if (!(cfg.energy_tol > 0.0)) fail("energy_tol: requires energy_tol > 0");
  if (!(cfg.verify_tol > 0.0)) fail("verify_tol: requires verify_tol > 0");
  if (!(cfg.lambda_min > 0.0 && cfg.lambda_max > cfg.lambda_min)) fail("lambda_min: requires 0 < lambda_min < lambda_max");
  if (cfg.grid < 2) fail("grid: requires at least 2 points");
  if (cfg.samples < 1) fail("samples: requires samples >= 1");
  if (cfg.starts < 1) fail("starts: requires starts >= 1");
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg;
  read_config_file(cfg, path);
  validate(cfg);
  return cfg;
}

std::map<std::string, std::string> describe(const RunConfig& cfg) {
  const auto& P = cfg.params;
  return {{"s", fmt(P.s)},
          {"p", fmt(P.p)},
          {"q", fmt(P.q)},
          {"alpha", fmt(P.alpha)},
          {"lambda", fmt(P.lambda)},
          {"lambda_rel", cfg.lambda_rel ? fmt(*cfg.lambda_rel) : ""},
          {"mode", P.mode == Mode::Full ? "full" : "pure_singular"},
          {"a", fmt(cfg.a)},
          {"b", fmt(cfg.b)},
          {"n", std::to_string(cfg.n)},
          {"seed", std::to_string(cfg.seed)},
          {"eigen_tol", fmt(cfg.eigen_tol)},
          {"samples", std::to_string(cfg.samples)},
          {"branch", cfg.branch},
          {"starts", std::to_string(cfg.starts)},
          {"residual_tol", fmt(cfg.residual_tol)},
          {"energy_tol", fmt(cfg.energy_tol)},
          {"max_iter", std::to_string(cfg.max_iter)},
          {"lambda_min", fmt(cfg.lambda_min)},
          {"lambda_max", fmt(cfg.lambda_max)},
          {"grid", std::to_string(cfg.grid)},
          {"bisection", std::to_string(cfg.bisection)},
          {"input", cfg.input.string()},
          {"verify_tol", fmt(cfg.verify_tol)},
          {"refine", cfg.refine ? "true" : "false"},
          {"out", cfg.out.string()},
          {"cache", cfg.cache.string()}};
}

}  // namespace fplap
