#pragma once

#include <functional>
#include <iosfwd>

#include "psc/quant.hpp"

namespace psc {

struct SelftestHooks {
  // Quantizer under test. Swappable so a broken implementation can be fed
  // through the suite.
  std::function<F8Code(double)> quantize = quantize_e4m3;
};

// Runs the embedded invariant checks, printing one "PASS name" or
// "FAIL name: detail" line each. Output is deterministic. Returns true iff
// every check passed.
bool run_selftest(std::ostream& out, const SelftestHooks& hooks = {});

}  // namespace psc
