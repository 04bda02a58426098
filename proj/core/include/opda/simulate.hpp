#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include "opda/machine.hpp"

namespace opda {

// Termination enforcement.  The machine model demands that every path
// halts; these bounds are how the artifact enforces it at run time.
struct RunBounds {
  uint64_t max_steps = 0;
  uint64_t max_stack_height = 0;
  uint64_t max_tape_len = 0;

  static RunBounds for_input_length(size_t n, uint64_t coeff = 64);
};

enum class Verdict { Accept, Reject, ResourceExceeded };

// One string per query tape, as left on an accepting path.
using OutputTuple = std::vector<Word>;

struct Configuration {
  State state = 0;
  size_t head_pos = 0;  // index into ¢w$; n+2 = right endmarker consumed
  Word stack;           // bottom at index 0
  std::vector<Word> tapes;
  uint64_t steps = 0;
};

enum class PathEnd { Accept, Reject, Stuck, Repeat, Exceeded };

struct RunStats {
  uint64_t paths_explored = 0;
  uint64_t exceeded_paths = 0;
  uint64_t repeated_configs = 0;
  uint64_t died_paths = 0;
  uint64_t accepting_paths = 0;
};

struct RunResult {
  Verdict verdict = Verdict::Reject;
  std::set<OutputTuple> valid_outputs;
  RunStats stats;
};

struct RunCallbacks {
  // Called when a path ends on an accepting state.  Return false to stop
  // the whole exploration (early accept).
  std::function<bool(const OutputTuple&)> on_accept;
  // Called at the end of every maximal path (after on_accept).  Return
  // false to stop.  `path` holds 0-based indices into spec.transitions.
  std::function<bool(const std::vector<uint32_t>&, const Configuration&,
                     PathEnd)>
      on_path_end;
  // Oracle resolver for turing mode: answer for the current query word.
  std::function<bool(const Word&)> oracle;
};

// Exhaustive bounded path exploration over ¢w$.  Machines that never read
// <cent> start with it already consumed.  Throws InputAlphabetError when w
// leaves the input alphabet.
RunStats explore(const MachineSpec& spec, const Word& w, const RunBounds& b,
                 const RunCallbacks& cb);

// Full enumeration; collects valid outputs and the verdict.  Accept wins
// over everything; a bound hit with no accepting path yields
// ResourceExceeded rather than Reject.
RunResult run_machine(const MachineSpec& spec, const Word& w,
                      const RunBounds& b);

// Early-exit acceptance.
Verdict accepts(const MachineSpec& spec, const Word& w, const RunBounds& b);

// Memoized visited-set acceptance over (state, head, stack), ignoring tape
// contents.  Valid when no oracle queries fire and no outputs are needed.
Verdict accepts_reachability(const MachineSpec& spec, const Word& w,
                             const RunBounds& b);

std::set<OutputTuple> valid_outputs(const MachineSpec& spec, const Word& w,
                                    const RunBounds& b);

struct PathRecord {
  std::vector<uint32_t> rule_indices;  // 0-based into spec.transitions
  Configuration final_config;
  bool accepted = false;
  PathEnd end = PathEnd::Reject;
};

// Every maximal path within bounds.
std::vector<PathRecord> run_paths(const MachineSpec& spec, const Word& w,
                                  const RunBounds& b);

// Deterministically replays a transition-index sequence.  Throws
// PreconditionError when some rule is inapplicable at its step.
Configuration replay_path(const MachineSpec& spec, const Word& w,
                          std::span<const uint32_t> rule_indices);

}  // namespace opda
