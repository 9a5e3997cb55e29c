#include "anosov/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "anosov/errors.hpp"
#include "json.hpp"

namespace anosov {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ValidationError(what); }

void expect_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      bad("unknown key '" + it.key() + "' in " + where);
    }
  }
}

long long as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where + " must be an integer");
  return v.get<long long>();
}

double as_finite(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where + " must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) bad(where + " must be finite");
  return x;
}

std::array<double, 2> as_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) bad(where + " must be a pair of numbers");
  return {as_finite(v[0], where + "[0]"), as_finite(v[1], where + "[1]")};
}

void parse_matrix(const json& v, RunConfig& cfg) {
  if (!v.is_array() || v.size() != 2) bad("matrix must be a 2x2 integer array");
  for (int r = 0; r < 2; ++r) {
    if (!v[r].is_array() || v[r].size() != 2) {
      bad("matrix must be a 2x2 integer array");
    }
    for (int c = 0; c < 2; ++c) {
      long long e = as_int(v[r][c], "matrix entry");
      if (std::llabs(e) > 1000000000LL) bad("matrix entry out of range");
      cfg.matrix[r][c] = e;
    }
  }
}

void parse_coeffs(const json& v, RunConfig& cfg) {
  if (!v.is_array()) bad("coeffs must be an array of harmonic records");
  cfg.coeffs.clear();
  for (const auto& rec : v) {
    if (!rec.is_object()) bad("each coeffs entry must be an object");
    expect_keys(rec, {"n", "re", "im"}, "coeffs entry");
    if (!rec.contains("n") || !rec.contains("re") || !rec.contains("im")) {
      bad("coeffs entry needs keys n, re, im");
    }
    const json& n = rec["n"];
    if (!n.is_array() || n.size() != 2) bad("coeffs n must be a pair of integers");
    TrigPoly::Harmonic h;
    for (int i = 0; i < 2; ++i) {
      long long e = as_int(n[i], "coeffs n entry");
      if (std::llabs(e) > 1000) bad("coeffs frequency out of range");
      h.n[i] = static_cast<int>(e);
    }
    auto re = as_pair(rec["re"], "coeffs re");
    auto im = as_pair(rec["im"], "coeffs im");
    h.c1 = {re[0], im[0]};
    h.c2 = {re[1], im[1]};
    cfg.coeffs.push_back(h);
  }
}

int derived_degree_bound(const std::vector<TrigPoly::Harmonic>& coeffs) {
  int best = 1;
  for (const auto& h : coeffs) {
    double r = std::hypot(static_cast<double>(h.n[0]),
                          static_cast<double>(h.n[1]));
    best = std::max(best, static_cast<int>(std::floor(r)) + 1);
  }
  return best;
}

void parse_eps(const json& v, RunConfig& cfg) {
  cfg.eps.clear();
  if (v.is_number()) {
    cfg.eps.push_back(as_finite(v, "eps"));
  } else if (v.is_array()) {
    if (v.empty()) bad("eps list must not be empty");
    for (const auto& e : v) cfg.eps.push_back(as_finite(e, "eps entry"));
  } else {
    bad("eps must be a number or a list of numbers");
  }
}

void parse_psi(const json& v, RunConfig& cfg) {
  if (v.is_array()) {
    auto p = as_pair(v, "psi");
    cfg.psi.is_grid = false;
    cfg.psi.point = TorusPoint::wrapped(p[0], p[1]);
    return;
  }
  if (v.is_object()) {
    expect_keys(v, {"grid"}, "psi");
    if (!v.contains("grid")) bad("psi object needs a grid key");
    long long n = as_int(v["grid"], "psi grid");
    if (n < 1 || n > 128) bad("psi grid must be between 1 and 128");
    cfg.psi.is_grid = true;
    cfg.psi.grid_n = static_cast<int>(n);
    return;
  }
  bad("psi must be a coordinate pair or {\"grid\": n}");
}

void parse_t_list(const json& v, RunConfig& cfg) {
  if (!v.is_array() || v.empty()) bad("t_list must be a nonempty array");
  cfg.t_list.clear();
  for (const auto& e : v) {
    double t = as_finite(e, "t_list entry");
    if (t <= 0.0) bad("t_list entries must be positive");
    if (!cfg.t_list.empty() && t >= cfg.t_list.back()) {
      bad("t_list must be strictly decreasing");
    }
    cfg.t_list.push_back(t);
  }
}

RunConfig parse_json(const json& j) {
  if (!j.is_object()) bad("config root must be an object");
  expect_keys(j,
              {"matrix", "coeffs", "degree_bound", "eps", "psi", "K", "pmax",
               "t_list", "restrict_mode", "seed", "out_dir", "force"},
              "config");
  RunConfig cfg = default_config();
  bool coeffs_given = false;
  if (j.contains("matrix")) parse_matrix(j["matrix"], cfg);
  if (j.contains("coeffs")) {
    parse_coeffs(j["coeffs"], cfg);
    coeffs_given = true;
  }
  if (j.contains("degree_bound")) {
    long long n = as_int(j["degree_bound"], "degree_bound");
    if (n < 1 || n > 10000) bad("degree_bound out of range");
    cfg.degree_bound = static_cast<int>(n);
  } else if (coeffs_given) {
    cfg.degree_bound = derived_degree_bound(cfg.coeffs);
  }
  if (j.contains("eps")) parse_eps(j["eps"], cfg);
  if (j.contains("psi")) parse_psi(j["psi"], cfg);
  if (j.contains("K")) {
    long long k = as_int(j["K"], "K");
    if (k < 1 || k > 12) bad("K must be between 1 and 12");
    cfg.K = static_cast<int>(k);
  }
  if (j.contains("pmax")) {
    long long p = as_int(j["pmax"], "pmax");
    if (p < 1 || p > 2000) bad("pmax must be between 1 and 2000");
    cfg.pmax = static_cast<int>(p);
  }
  if (j.contains("t_list")) parse_t_list(j["t_list"], cfg);
  if (j.contains("restrict_mode")) {
    if (!j["restrict_mode"].is_string()) bad("restrict_mode must be a string");
    cfg.mode = mode_from_name(j["restrict_mode"].get<std::string>());
  }
  if (j.contains("seed")) {
    long long s = as_int(j["seed"], "seed");
    if (s < 0) bad("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) bad("out_dir must be a string");
    cfg.out_dir = j["out_dir"].get<std::string>();
  }
  if (j.contains("force")) {
    if (!j["force"].is_boolean()) bad("force must be a boolean");
    cfg.force = j["force"].get<bool>();
  }
  return cfg;
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  TrigPoly::Harmonic h;
  h.n = {1, 0};
  h.c1 = {0.35, -0.1};
  h.c2 = {0.25, 0.15};
  TrigPoly::Harmonic hc;
  hc.n = {-1, 0};
  hc.c1 = std::conj(h.c1);
  hc.c2 = std::conj(h.c2);
  cfg.coeffs = {h, hc};
  cfg.degree_bound = 2;
  return cfg;
}

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

HyperbolicAuto make_automorphism(const RunConfig& cfg) {
  IntMat2 m;
  m.a = cfg.matrix[0][0];
  m.b = cfg.matrix[0][1];
  m.c = cfg.matrix[1][0];
  m.d = cfg.matrix[1][1];
  return eigen_decompose(m);
}

TrigPoly make_forcing(const RunConfig& cfg) {
  return TrigPoly::checked(cfg.coeffs, cfg.degree_bound);
}

std::vector<TorusPoint> psi_points(const RunConfig& cfg) {
  if (!cfg.psi.is_grid) return {cfg.psi.point};
  std::vector<TorusPoint> out;
  int n = cfg.psi.grid_n;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.push_back({kTwoPi * i / n, kTwoPi * j / n});
    }
  }
  return out;
}

const char* mode_name(RestrictMode mode) {
  switch (mode) {
    case RestrictMode::none:
      return "none";
    case RestrictMode::all_minus:
      return "all-minus";
    case RestrictMode::stem_minus_only:
      return "stem-minus-only";
  }
  return "unknown";
}

RestrictMode mode_from_name(const std::string& name) {
  if (name == "all-minus") return RestrictMode::all_minus;
  if (name == "stem-minus-only") return RestrictMode::stem_minus_only;
  throw ValidationError("restrict_mode must be all-minus or stem-minus-only");
}

}  // namespace anosov
