#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opda/rational.hpp"
#include "opda/symbols.hpp"

namespace opda {

enum class Kind { Dfa, Nfa, Npda };
enum class OracleMode { None, ManyOne, Turing, Ktt };

std::string kind_name(Kind k);
std::string oracle_mode_name(OracleMode m, int ktt_arity);

using State = uint32_t;
inline constexpr State kNoState = static_cast<State>(-1);

// One split transition.  The file order of transitions is the indexing of
// the machine's split transition set; path encodings refer to it.
struct Transition {
  State from = 0;
  Symbol read = kLambda;  // kLambda, kCent, kDollar or an input symbol
  Symbol top = kLambda;   // matched stack top; kLambda when the kind has no stack
  State to = 0;
  // Replacement for the matched top, top-first: after the move push[0] is the
  // new top.  Empty = pop.  Unused when the kind has no stack.
  Word push;
  // One entry per query tape; kLambda = the tape head stays.
  Word emits;
  // Probabilistic group this rule belongs to, or -1.  Weights live in
  // MachineSpec::weights, parallel to transitions.
  int32_t group = -1;

  bool operator==(const Transition&) const = default;
};

struct MachineSpec {
  std::string name;
  Kind kind = Kind::Npda;
  OracleMode mode = OracleMode::None;
  int ktt_arity = 0;

  std::vector<std::string> states;  // index = State
  State start = 0;
  std::vector<char> accepting;  // by state
  std::vector<char> rejecting;  // by state

  Word input_alphabet;
  Word stack_alphabet;  // [0] = bottom marker; empty for dfa/nfa
  std::vector<Word> query_alphabets;

  State query_state = kNoState;  // turing mode only
  State yes_state = kNoState;
  State no_state = kNoState;

  std::vector<Transition> transitions;

  // Probabilistic annotations (ppda): group id names and per-transition
  // weights.  weights is either empty or parallel to transitions with
  // weight 0 meaning "unannotated".
  std::vector<std::string> group_ids;
  std::vector<Rational> weights;

  State add_state(const std::string& name);
  State state_id(const std::string& name) const;  // kNoState if missing
  const std::string& state_name(State s) const { return states.at(s); }
  bool is_accepting(State s) const { return accepting[s]; }
  bool is_rejecting(State s) const { return rejecting[s]; }
  bool is_halting(State s) const { return accepting[s] || rejecting[s]; }
  Symbol bottom_marker() const { return stack_alphabet.at(0); }
  bool has_stack() const { return kind == Kind::Npda; }
  size_t tape_count() const { return query_alphabets.size(); }

  // True when some rule reads <cent>.  Machines that never mention the left
  // endmarker start with it already consumed.
  bool reads_cent() const;

  bool in_input_alphabet(Symbol s) const;
  bool probabilistic() const { return !weights.empty(); }
};

// Returns the list of invariant violations; empty = well-formed.
std::vector<std::string> validate(const MachineSpec& spec);

// Throws ValidationError when validate() is non-empty.
void validate_or_throw(const MachineSpec& spec);

// True when every (state, read, top) has at most one successor and the
// machine has no lambda-moves.
bool is_deterministic(const MachineSpec& spec);

bool alphabet_contains(const Word& alphabet, Symbol s);

// Set equality of alphabets (order-insensitive).
bool same_alphabet(const Word& a, const Word& b);

}  // namespace opda
