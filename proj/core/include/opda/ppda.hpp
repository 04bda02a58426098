#pragma once

#include <optional>

#include "opda/machine.hpp"
#include "opda/rational.hpp"
#include "opda/simulate.hpp"

namespace opda {

// Exact acceptance probability of a probabilistic pushdown automaton:
// the sum over accepting paths of the product of branch weights.  All
// arithmetic is exact rational; floating point never touches probability
// paths.  Throws ResourceExceededError when any path hits a bound or
// repeats a configuration (every path of a ppda must halt).
struct ProbabilityResult {
  Rational accept = 0;
  Rational reject = 0;  // includes paths that die without halting
  uint64_t paths = 0;
};
ProbabilityResult exact_acceptance_probability(const MachineSpec& p,
                                               const Word& w,
                                               const RunBounds& b);

// The six-symbol count-equality machine: strings over {a1..a6, _} with
// every ai appearing equally often.  Small counts (all <= N) are decided
// deterministically by capped counters; otherwise two numbers x, y are
// drawn uniformly from [N]^2 and the stack checks
//   (c1-c4) + x(c2-c5) + y(c3-c6) == 0
// with a deficit symbol for negative balances.  The draw is deferred to
// the first moment a count exceeds N, which is observationally equivalent
// to drawing up front and keeps the generated rule set small.
MachineSpec equal6_machine(int N = 5);

// Direct membership predicate for the count-equality language.
bool equal6_reference(const Word& w);

// The alphabet {a1..a6, _}.
Word equal6_alphabet();

// Word a1^c1 a2^c2 ... a6^c6 for a count vector.
Word equal6_word(const std::vector<int>& counts);

struct ErrorScanReport {
  uint64_t members = 0;
  uint64_t nonmembers = 0;
  bool members_all_one = true;
  Rational max_nonmember_probability = 0;
  std::vector<int> argmax_counts;
  uint64_t over_12_25 = 0;  // non-members with acceptance > 12/25
  uint64_t over_1_3 = 0;    // non-members with acceptance > 1/3
  bool within_12_25 = true;
  bool within_1_3 = true;
  bool sums_exact = true;  // accept + reject == 1 everywhere
};

// Scans every count vector with all counts in [lo, hi]: members must
// accept with probability exactly one; the maximum non-member acceptance
// probability is reported against the 12/25 and 1/3 thresholds.
ErrorScanReport error_scan(int lo, int hi, const MachineSpec& machine);

}  // namespace opda
