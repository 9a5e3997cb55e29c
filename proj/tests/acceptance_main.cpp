// Acceptance gate: runs the full criterion battery on the default instance
// and prints one pass/fail line per criterion. Exit 0 only if all pass.

#include <cstdio>
#include <iostream>

#include "anosov/config.hpp"
#include "anosov/verify.hpp"

int main() {
  anosov::RunConfig cfg = anosov::default_config();
  anosov::AcceptanceReport rep = anosov::run_acceptance(cfg, std::cout);
  std::cout << (rep.all_pass ? "ACCEPTANCE: all criteria passed"
                             : "ACCEPTANCE: FAILURES PRESENT")
            << " (arbitrated mode: " << rep.arbitrated_mode << ")\n";
  return rep.all_pass ? 0 : 1;
}
