#pragma once

#include <map>
#include <set>
#include <vector>

#include "opda/expr.hpp"
#include "opda/machine.hpp"

namespace opda {

// All strings obtained from x by inserting the padding symbol "~", up to
// max_len total length.
std::set<Word> natural_extensions(const Word& x, size_t max_len);

// Normalization contract used by the stack-history constructions: no
// lambda-move before the right endmarker, and every rule entering an
// accepting state matches the bottom marker and re-pushes it (so accepting
// configurations carry an empty stack).
std::vector<std::string> check_normalized(const MachineSpec& m);

// Appends stack-draining lambda-rules in front of every accepting state.
// Language-preserving.
MachineSpec normalize_end(const MachineSpec& m);

// Stack-history elimination: N simulates m without a stack and writes the
// guessed stack history on its query tape; the oracle is the Dyck language
// over one bracket pair per stack symbol.  decide_many_one(N, D, w) equals
// accepts(m, w).
struct DyckifyResult {
  MachineSpec reducer;  // nfa-kind m-reducer
  ExprPtr oracle;       // Dyck(d)
  int dyck_width = 0;
};
DyckifyResult dyckify(const MachineSpec& m);

// Deterministic lambda-free recognizer for Dyck(d); also usable as the
// dpda side of absorb_dpda_oracle.
MachineSpec dyck_recognizer(int d);

// Composes an outer reducer with a stackless inner reducer: the result
// queries the inner machine's oracle directly.
MachineSpec absorb_nfa(const MachineSpec& outer, const MachineSpec& inner);

// Runs a deterministic lambda-free dpda on the reducer's query word as it
// is written; the composed npda needs no oracle.
MachineSpec absorb_dpda_oracle(const MachineSpec& reducer,
                               const MachineSpec& dpda);

// Absorbs a total dfa oracle into the reducer's finite control, for
// many-one, turing, and ktt reducers.  ktt mode also needs the truth table.
MachineSpec absorb_regular_oracle(const MachineSpec& reducer,
                                  const MachineSpec& dfa, OracleMode mode,
                                  const MachineSpec* ktt_table = nullptr);

// Runs d normalized lambda-free npdas in parallel; the reducer writes the
// d stack histories on the tracks of one query tape, padding with "~", and
// the oracle is DyckExt(d).
struct ProductResult {
  MachineSpec reducer;
  ExprPtr oracle;  // DyckExt(d)
};
ProductResult product_reducer(const std::vector<MachineSpec>& machines);

// Simulates m while copying the input to the query tape; realizes the
// intersection of L(m) with the oracle.
MachineSpec copy_input_reducer(const MachineSpec& m);

// Exchanges accepting and rejecting states.
MachineSpec flip_halting(const MachineSpec& m);

// Swaps the yes/no resumption states of a turing reducer.
MachineSpec flip_answers(const MachineSpec& m);

// Rewrites a turing reducer to guess its oracle answers: the result is a
// many-one reducer emitting b1 y1 ~ b2 y2 ~ ... with each guessed bit
// before its query word.  Accepting paths that write after their last
// query are dropped; author reducers accordingly.
MachineSpec guess_answers(const MachineSpec& m);

// Verifier machines for the guessed-answer encoding, given a normalized
// npda for the oracle language: the positive verifier accepts when every
// 1-flagged segment is accepted by the oracle machine; the negative
// verifier accepts when some 0-flagged segment is.
MachineSpec positive_verifier(const MachineSpec& oracle_npda);
MachineSpec negative_verifier(const MachineSpec& oracle_npda);

// The guessed-answer pipeline oracle: L(N2) and not L(N3).
ExprPtr guess_answers_oracle(const MachineSpec& oracle_npda);

// Path encodings: N1 emits the index sequence of the path it follows; the
// replayer is a deterministic npda over two-track columns [input | index]
// that accepts exactly the encodings of accepting paths.
struct EncodePathResult {
  MachineSpec encoder;   // emits index strings over t1..tD
  MachineSpec replayer;  // deterministic two-track replayer
};
EncodePathResult encode_path_reducer(const MachineSpec& m);

// Builds the two-track word [x-with-~ | index sequence] for a concrete
// path of m on x, as the replayer expects it.
Word encode_track_string(const MachineSpec& m,
                         const std::vector<uint32_t>& rule_indices);

// Closure constructions on oracle-free npdas.
MachineSpec union_m(const MachineSpec& a, const MachineSpec& b);
MachineSpec concat_m(const MachineSpec& a, const MachineSpec& b);
MachineSpec star_m(const MachineSpec& a);
MachineSpec homomorphism_m(const MachineSpec& m,
                           const std::map<Symbol, Word>& h);
MachineSpec inv_homomorphism_m(const MachineSpec& m,
                               const std::map<Symbol, Word>& h);
MachineSpec reverse_m(const MachineSpec& m);
MachineSpec substitute_m(const MachineSpec& m,
                         const std::map<Symbol, MachineSpec>& s);

// Reversal of a single-oracle turing reducer.  The returned machine
// decides the reversed language relative to Reverse(A) whenever the input
// machine decides relative to A (guess the answer, write the reversed
// query word, then verify with a real query).
MachineSpec reverse_turing(const MachineSpec& m);

}  // namespace opda
