#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anosov/config.hpp"

namespace anosov {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // the measured numbers backing the verdict
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_pass = false;
  // Restricted-label mode that won the end-to-end slope comparison; the
  // finite-step and oracle checks are judged against this one.
  std::string arbitrated_mode;
};

// Runs the full acceptance battery on the given instance. Tolerances are
// fixed in the implementation, not configurable. Base points for the random
// families are drawn from cfg.seed, so a (config, seed) pair pins the whole
// run. One progress line per criterion goes to `progress` as it finishes.
AcceptanceReport run_acceptance(const RunConfig& cfg, std::ostream& progress);

}  // namespace anosov
