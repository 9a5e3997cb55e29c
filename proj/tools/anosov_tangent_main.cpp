#include <cmath>
#include <sstream>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anosov/bounds.hpp"
#include "anosov/config.hpp"
#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
#include "anosov/oracle.hpp"
#include "anosov/series.hpp"
#include "anosov/slope.hpp"
#include "anosov/trees.hpp"
#include "anosov/verify.hpp"
#include "json.hpp"

namespace {

using anosov::RunConfig;
using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinity literal; overflowed bounds are reported as a string.
json num_or_inf(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

// Flag values shared by every subcommand; -1 / empty means "not given".
struct Overrides {
  std::string config_path;
  std::vector<double> eps;
  std::vector<double> psi;
  int grid = -1;
  int K = -1;
  int pmax = -1;
  std::string mode;
  long long seed = -1;
  std::string out_dir;
  bool force = false;
  std::vector<double> t_list;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--eps", o.eps, "perturbation size(s), overrides config");
  cmd->add_option("--psi", o.psi, "base point, two coordinates")
      ->expected(2);
  cmd->add_option("--grid", o.grid, "use an n-by-n base-point grid");
  cmd->add_option("--K", o.K, "expansion order");
  cmd->add_option("--pmax", o.pmax, "label truncation bound");
  cmd->add_option("--restrict-mode", o.mode,
                  "all-minus or stem-minus-only");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out-dir", o.out_dir, "also write outputs here");
  cmd->add_flag("--force", o.force, "proceed past the radius estimate");
  cmd->add_option("--t-list", o.t_list,
                  "finite-step list, strictly decreasing");
}

RunConfig build_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? anosov::default_config()
                                        : anosov::load_config(o.config_path);
  if (!o.eps.empty()) {
    for (double e : o.eps) {
      if (!std::isfinite(e)) throw anosov::ValidationError("--eps must be finite");
    }
    cfg.eps = o.eps;
  }
  if (!o.psi.empty()) {
    cfg.psi.is_grid = false;
    cfg.psi.point = anosov::TorusPoint::wrapped(o.psi[0], o.psi[1]);
  }
  if (o.grid != -1) {
    if (o.grid < 1 || o.grid > 128) {
      throw anosov::ValidationError("--grid must be between 1 and 128");
    }
    cfg.psi.is_grid = true;
    cfg.psi.grid_n = o.grid;
  }
  if (o.K != -1) {
    if (o.K < 1 || o.K > 12) {
      throw anosov::ValidationError("--K must be between 1 and 12");
    }
    cfg.K = o.K;
  }
  if (o.pmax != -1) {
    if (o.pmax < 1 || o.pmax > 2000) {
      throw anosov::ValidationError("--pmax must be between 1 and 2000");
    }
    cfg.pmax = o.pmax;
  }
  if (!o.mode.empty()) cfg.mode = anosov::mode_from_name(o.mode);
  if (o.seed != -1) {
    if (o.seed < 0) throw anosov::ValidationError("--seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(o.seed);
  }
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.force) cfg.force = true;
  if (!o.t_list.empty()) {
    for (std::size_t i = 0; i < o.t_list.size(); ++i) {
      if (!std::isfinite(o.t_list[i]) || o.t_list[i] <= 0.0 ||
          (i > 0 && o.t_list[i] >= o.t_list[i - 1])) {
        throw anosov::ValidationError(
            "--t-list must be positive and strictly decreasing");
      }
    }
    cfg.t_list = o.t_list;
  }
  return cfg;
}

// Print to stdout and, when an output directory is configured, mirror the
// bytes into a file there.
void emit(const RunConfig& cfg, const std::string& filename,
          const std::string& text) {
  std::cout << text;
  if (cfg.out_dir.empty()) return;
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / filename, std::ios::binary);
  if (!out) {
    throw anosov::ValidationError("cannot write into out_dir '" +
                                  cfg.out_dir + "'");
  }
  out << text;
}

anosov::SeriesParams series_params(const RunConfig& cfg, int k_max) {
  anosov::SeriesParams prm;
  prm.pmax = cfg.pmax;
  prm.k_max = k_max;
  return prm;
}

// Enforcement radius: the majorants of exactly the orders being summed.
// The estimate is deliberately conservative; force skips the check and is
// recorded in the output.
double radius_for(const anosov::HyperbolicAuto& a, const anosov::TrigPoly& f,
                  int K) {
  double sup = anosov::forcing_sup(f, a);
  return anosov::radius_estimate(f.degree_bound, sup, a.lambda_plus, K).radius;
}

json slope_report_json(const anosov::SlopeReport& rep, int pmax,
                       bool forced, double radius) {
  json per_order = json::array();
  for (std::size_t i = 0; i < rep.per_order.size(); ++i) {
    per_order.push_back({{"k", static_cast<int>(i + 1)},
                         {"value", rep.per_order[i].value},
                         {"tail_bound", rep.per_order[i].tail_bound}});
  }
  return {{"psi", {rep.psi.t1, rep.psi.t2}},
          {"eps", rep.eps},
          {"K", rep.K},
          {"pmax", pmax},
          {"restrict_mode", anosov::mode_name(rep.mode)},
          {"forced", forced},
          {"radius", num_or_inf(radius)},
          {"per_order", per_order},
          {"slope", rep.slope},
          {"tail_bound", rep.tail_bound},
          {"tangent", {rep.tangent.x, rep.tangent.y}}};
}

int run_slope(const RunConfig& cfg) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  anosov::TorusPoint psi = anosov::psi_points(cfg)[0];
  double eps = cfg.eps[0];

  anosov::Evaluator ev(a, f, series_params(cfg, cfg.K + 2));
  anosov::SlopeOptions opts;
  opts.radius = radius_for(a, f, cfg.K);
  opts.force = cfg.force;
  anosov::SlopeReport rep =
      anosov::stable_slope(ev, psi, eps, cfg.K, cfg.mode, opts);

  // Independent check: pull back the contracting direction at the point the
  // series says lies on the invariant curve.
  anosov::TorusPoint image = ev.conjugate_point(psi, eps, cfg.K + 2);
  anosov::PerturbedMap map{a, f, eps};
  anosov::OracleResult orc = anosov::stable_direction(map, image, 40);

  json out = slope_report_json(rep, cfg.pmax, cfg.force, opts.radius);
  out["command"] = "slope";
  out["oracle_slope"] = orc.slope;
  out["oracle_residual"] = orc.residual;
  out["abs_err"] = std::abs(rep.slope - orc.slope);
  emit(cfg, "slope.json", out.dump(2) + "\n");
  return 0;
}

int run_slope_field(const RunConfig& cfg) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  anosov::Evaluator ev(a, f, series_params(cfg, cfg.K));
  anosov::SlopeOptions opts;
  opts.radius = radius_for(a, f, cfg.K);
  opts.force = cfg.force;

  std::string csv = "psi1,psi2,eps,slope,tangent1,tangent2,tail_bound\n";
  for (const auto& psi : anosov::psi_points(cfg)) {
    for (double eps : cfg.eps) {
      anosov::SlopeReport rep =
          anosov::stable_slope(ev, psi, eps, cfg.K, cfg.mode, opts);
      csv += fmt(psi.t1) + "," + fmt(psi.t2) + "," + fmt(eps) + "," +
             fmt(rep.slope) + "," + fmt(rep.tangent.x) + "," +
             fmt(rep.tangent.y) + "," + fmt(rep.tail_bound) + "\n";
    }
  }
  emit(cfg, "slope-field.csv", csv);
  return 0;
}

int run_h_expansion(const RunConfig& cfg) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  anosov::Evaluator ev(a, f, series_params(cfg, cfg.K));

  std::string csv = "psi1,psi2,k,alpha,value,tail_bound\n";
  for (const auto& psi : anosov::psi_points(cfg)) {
    for (int k = 1; k <= cfg.K; ++k) {
      for (int alpha : {+1, -1}) {
        anosov::SeriesTerm term = ev.order_term(k, alpha, psi);
        csv += fmt(psi.t1) + "," + fmt(psi.t2) + "," + std::to_string(k) +
               "," + std::to_string(alpha) + "," + fmt(term.value) + "," +
               fmt(term.tail_bound) + "\n";
      }
    }
  }
  emit(cfg, "h-expansion.csv", csv);
  return 0;
}

int run_qnt(const RunConfig& cfg) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  anosov::TorusPoint psi = anosov::psi_points(cfg)[0];
  anosov::Evaluator ev(a, f, series_params(cfg, cfg.K));

  std::vector<double> limits(cfg.K + 1, 0.0);
  for (int n = 1; n <= cfg.K; ++n) {
    limits[n] = anosov::slope_coefficient(ev, n, psi, cfg.mode).value;
  }

  std::string csv = "n,t,q_n_t,val_qn0,abs_diff\n";
  for (int n = 1; n <= cfg.K; ++n) {
    for (double t : cfg.t_list) {
      anosov::ChordSeries ch = anosov::chord_slope_series(ev, psi, t, cfg.K);
      double qnt = ch.q[n];
      csv += std::to_string(n) + "," + fmt(t) + "," + fmt(qnt) + "," +
             fmt(limits[n]) + "," + fmt(std::abs(qnt - limits[n])) + "\n";
    }
  }
  emit(cfg, "qnt.csv", csv);
  return 0;
}

int run_bound(const RunConfig& cfg) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  double sup = anosov::forcing_sup(f, a);
  constexpr int kOrders = 10;
  anosov::RadiusEstimate est =
      anosov::radius_estimate(f.degree_bound, sup, a.lambda_plus, kOrders);

  json per_order = json::array();
  for (int k = 1; k <= kOrders; ++k) {
    per_order.push_back(
        {{"k", k}, {"B_k", num_or_inf(est.per_order[k - 1])}});
  }
  json out = {{"command", "bound"},
              {"N", f.degree_bound},
              {"F", sup},
              {"lambda_plus", a.lambda_plus},
              {"per_order", per_order},
              {"radius", num_or_inf(est.radius)}};
  emit(cfg, "bound.json", out.dump(2) + "\n");
  return 0;
}

int run_oracle(const RunConfig& cfg, int iters) {
  auto a = make_automorphism(cfg);
  auto f = make_forcing(cfg);
  json points = json::array();
  for (const auto& psi : anosov::psi_points(cfg)) {
    for (double eps : cfg.eps) {
      anosov::PerturbedMap map{a, f, eps};
      anosov::OracleResult orc = anosov::stable_direction(map, psi, iters);
      points.push_back({{"psi", {psi.t1, psi.t2}},
                        {"eps", eps},
                        {"slope_oracle", orc.slope},
                        {"direction", {orc.direction.x, orc.direction.y}},
                        {"multiplier", orc.multiplier},
                        {"residual", orc.residual},
                        {"iters", orc.iterations}});
    }
  }
  json out = {{"command", "oracle"}, {"points", points}};
  emit(cfg, "oracle.json", out.dump(2) + "\n");
  return 0;
}

int run_trees(const RunConfig& cfg, int k_single, int k_max) {
  int lo = 1, hi = k_max;
  if (k_single != -1) lo = hi = k_single;
  if (lo < 1 || hi > 7) {
    throw anosov::ValidationError("tree orders must lie between 1 and 7");
  }

  std::string csv = "k,shapes,half_labeled_keys,classes,product_trees_at_pmax\n";
  for (int k = lo; k <= hi; ++k) {
    long long shapes = anosov::catalan(k - 1);
    long long keys =
        static_cast<long long>(anosov::derivative_classes(k, +1).size());
    // Distinct product-tree classes reachable by cutting any order-k tree.
    std::set<std::string> product_classes;
    for (const auto& t : anosov::marked_trees(k, +1)) {
      for (const auto& cut : anosov::cuts_of(t)) {
        product_classes.insert(
            anosov::product_key(anosov::break_at(t, cut), false));
      }
    }
    long long tuples = anosov::product_tuple_count(k, cfg.pmax);
    csv += std::to_string(k) + "," + std::to_string(shapes) + "," +
           std::to_string(keys) + "," +
           std::to_string(static_cast<long long>(product_classes.size())) +
           "," + std::to_string(tuples) + "\n";
  }
  emit(cfg, "trees.csv", csv);
  return 0;
}

int run_verify(const RunConfig& cfg) {
  anosov::AcceptanceReport rep = anosov::run_acceptance(cfg, std::cerr);
  json criteria = json::array();
  for (const auto& c : rep.criteria) {
    criteria.push_back({{"id", c.id},
                        {"name", c.name},
                        {"pass", c.pass},
                        {"detail", c.detail}});
  }
  json out = {{"command", "verify"},
              {"criteria", criteria},
              {"arbitrated_mode", rep.arbitrated_mode},
              {"all_pass", rep.all_pass}};
  emit(cfg, "verify.json", out.dump(2) + "\n");
  return rep.all_pass ? 0 : 3;
}

void diagnostic(const char* kind, const std::string& what) {
  json out = {{"error", kind}, {"what", what}};
  std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tangent directions of the stable manifold of perturbed "
               "hyperbolic torus maps"};
  app.require_subcommand(1);

  Overrides o;
  int oracle_iters = 40;
  int trees_k = -1;
  int trees_kmax = 6;

  CLI::App* slope = app.add_subcommand(
      "slope", "per-order slope series with an oracle comparison");
  CLI::App* field = app.add_subcommand(
      "slope-field", "slope sweep over base points and eps values");
  CLI::App* hexp = app.add_subcommand(
      "h-expansion", "conjugacy displacement coefficients per order");
  CLI::App* qnt = app.add_subcommand(
      "qnt", "finite-step chord coefficients against their limits");
  CLI::App* bound = app.add_subcommand(
      "bound", "per-order majorants and the radius estimate");
  CLI::App* oracle = app.add_subcommand(
      "oracle", "pulled-back contracting direction at the base points");
  CLI::App* trees = app.add_subcommand(
      "trees", "tree, class, and labeling counts per order");
  CLI::App* verify = app.add_subcommand(
      "verify", "run the acceptance battery and report pass/fail");

  for (CLI::App* cmd :
       {slope, field, hexp, qnt, bound, oracle, trees, verify}) {
    add_common_flags(cmd, o);
  }
  oracle->add_option("--iters", oracle_iters, "pull-back iterations")
      ->check(CLI::Range(10, 200));
  trees->add_option("--k", trees_k, "emit the single order k");
  trees->add_option("--kmax", trees_kmax, "emit orders 1..kmax");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    msg << e.get_name() << ": " << e.what();
    diagnostic("validation", msg.str());
    return 2;
  }

  try {
    RunConfig cfg = build_config(o);
    if (app.got_subcommand(slope)) return run_slope(cfg);
    if (app.got_subcommand(field)) return run_slope_field(cfg);
    if (app.got_subcommand(hexp)) return run_h_expansion(cfg);
    if (app.got_subcommand(qnt)) return run_qnt(cfg);
    if (app.got_subcommand(bound)) return run_bound(cfg);
    if (app.got_subcommand(oracle)) return run_oracle(cfg, oracle_iters);
    if (app.got_subcommand(trees)) return run_trees(cfg, trees_k, trees_kmax);
    if (app.got_subcommand(verify)) return run_verify(cfg);
  } catch (const anosov::ValidationError& e) {
    diagnostic("validation", e.what());
    return 2;
  } catch (const anosov::NumericError& e) {
    diagnostic("numeric", e.what());
    return 3;
  } catch (const std::exception& e) {
    diagnostic("internal", e.what());
    return 1;
  }
  return 0;
}
