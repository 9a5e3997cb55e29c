#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "anosov/torus.hpp"
#include "anosov/trees.hpp"

namespace anosov {

// Base point selection: one explicit point, or a uniform n-by-n grid over
// the fundamental square.
struct PsiSpec {
  bool is_grid = false;
  TorusPoint point{1.0, 2.0};
  int grid_n = 0;
};

struct RunConfig {
  std::array<std::array<long long, 2>, 2> matrix{{{1, 1}, {1, 0}}};
  std::vector<TrigPoly::Harmonic> coeffs;  // validated reality pairs
  int degree_bound = 2;
  std::vector<double> eps{0.02};  // scalar configs become one-element lists
  PsiSpec psi{};
  int K = 3;
  int pmax = 40;
  std::vector<double> t_list{1e-2, 5e-3, 2.5e-3};
  RestrictMode mode = RestrictMode::all_minus;
  std::uint64_t seed = 1900;
  std::string out_dir;  // empty: write to stdout only
  bool force = false;   // permit eps beyond the estimated radius
};

// The shipped example instance: golden-mean matrix with a one-harmonic
// forcing of sup-norm near one.
RunConfig default_config();

// Strict schema: unknown keys, malformed records, and out-of-range values
// all throw ValidationError with the offending key in the message.
RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

HyperbolicAuto make_automorphism(const RunConfig& cfg);
TrigPoly make_forcing(const RunConfig& cfg);

// The explicit point, or the expanded grid in row-major order.
std::vector<TorusPoint> psi_points(const RunConfig& cfg);

const char* mode_name(RestrictMode mode);
RestrictMode mode_from_name(const std::string& name);

}  // namespace anosov
