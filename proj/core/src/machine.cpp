#include "opda/machine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "opda/errors.hpp"

namespace opda {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Dfa: return "dfa";
    case Kind::Nfa: return "nfa";
    case Kind::Npda: return "npda";
  }
  return "?";
}

std::string oracle_mode_name(OracleMode m, int ktt_arity) {
  switch (m) {
    case OracleMode::None: return "none";
    case OracleMode::ManyOne: return "many-one";
    case OracleMode::Turing: return "turing";
    case OracleMode::Ktt: return "ktt " + std::to_string(ktt_arity);
  }
  return "?";
}

State MachineSpec::add_state(const std::string& name) {
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i] == name) return static_cast<State>(i);
  }
  states.push_back(name);
  accepting.push_back(0);
  rejecting.push_back(0);
  return static_cast<State>(states.size() - 1);
}

State MachineSpec::state_id(const std::string& name) const {
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i] == name) return static_cast<State>(i);
  }
  return kNoState;
}

bool MachineSpec::reads_cent() const {
  return std::any_of(transitions.begin(), transitions.end(),
                     [](const Transition& t) { return t.read == kCent; });
}

bool MachineSpec::in_input_alphabet(Symbol s) const {
  return alphabet_contains(input_alphabet, s);
}

bool alphabet_contains(const Word& alphabet, Symbol s) {
  return std::find(alphabet.begin(), alphabet.end(), s) != alphabet.end();
}

bool same_alphabet(const Word& a, const Word& b) {
  std::set<Symbol> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  return sa == sb;
}

namespace {

void check_alphabet(const Word& alphabet, const std::string& what,
                    std::vector<std::string>& out) {
  std::set<Symbol> seen;
  for (Symbol s : alphabet) {
    const std::string& n = symbol_name(s);
    if (is_reserved_token(n)) {
      out.push_back(what + ": reserved token '" + n + "' used as a symbol");
    }
    if (n.empty() || n == "-" || n.find('#') != std::string::npos ||
        n.find_first_of(" \t\n") != std::string::npos) {
      out.push_back(what + ": malformed symbol token '" + n + "'");
    }
    if (!seen.insert(s).second) {
      out.push_back(what + ": duplicate symbol '" + n + "'");
    }
  }
}

}  // namespace

std::vector<std::string> validate(const MachineSpec& m) {
  std::vector<std::string> out;

  check_alphabet(m.input_alphabet, "input alphabet", out);
  for (size_t i = 0; i < m.query_alphabets.size(); ++i) {
    check_alphabet(m.query_alphabets[i],
                   "query alphabet " + std::to_string(i + 1), out);
  }
  if (m.kind == Kind::Npda) {
    if (m.stack_alphabet.empty()) {
      out.push_back("npda has no stack alphabet");
    } else {
      check_alphabet(m.stack_alphabet, "stack alphabet", out);
    }
  } else if (!m.stack_alphabet.empty()) {
    out.push_back(kind_name(m.kind) + " must not declare a stack alphabet");
  }

  if (m.states.empty()) {
    out.push_back("machine has no states");
    return out;
  }
  for (const auto& name : m.states) {
    if (name.empty() || name == "-" || name.find('#') != std::string::npos ||
        name.find_first_of(" \t\n") != std::string::npos) {
      out.push_back("malformed state name '" + name + "'");
    }
  }
  if (m.start >= m.states.size()) out.push_back("start state out of range");

  for (size_t q = 0; q < m.states.size(); ++q) {
    if (m.accepting[q] && m.rejecting[q]) {
      out.push_back("state '" + m.states[q] + "' is both accepting and rejecting");
    }
  }

  for (size_t i = 0; i < m.transitions.size(); ++i) {
    const Transition& t = m.transitions[i];
    std::string where = "transition " + std::to_string(i + 1);
    if (t.from >= m.states.size() || t.to >= m.states.size()) {
      out.push_back(where + ": state out of range");
      continue;
    }
    if (m.is_halting(t.from)) {
      out.push_back(where + ": leaves halting state '" + m.states[t.from] + "'");
    }
    if (t.read != kLambda && t.read != kCent && t.read != kDollar &&
        !m.in_input_alphabet(t.read)) {
      out.push_back(where + ": reads '" + symbol_name(t.read) +
                    "' outside the input alphabet");
    }
    if (m.kind == Kind::Npda) {
      if (!alphabet_contains(m.stack_alphabet, t.top)) {
        out.push_back(where + ": stack top '" + symbol_name(t.top) +
                      "' outside the stack alphabet");
      }
      Symbol z0 = m.bottom_marker();
      for (size_t j = 0; j < t.push.size(); ++j) {
        if (!alphabet_contains(m.stack_alphabet, t.push[j])) {
          out.push_back(where + ": pushes '" + symbol_name(t.push[j]) +
                        "' outside the stack alphabet");
        }
        // Z0 may only be re-pushed at the very bottom of a replacement for
        // a matched Z0: it never rises above position 0.
        if (t.push[j] == z0 && !(t.top == z0 && j + 1 == t.push.size())) {
          out.push_back(where + ": pushes the bottom marker above position 0");
        }
      }
    } else {
      if (!t.push.empty() || t.top != kLambda) {
        out.push_back(where + ": stack rule on a machine without a stack");
      }
    }
    if (t.emits.size() != m.query_alphabets.size()) {
      out.push_back(where + ": expected " +
                    std::to_string(m.query_alphabets.size()) +
                    " emit slots, got " + std::to_string(t.emits.size()));
    } else {
      for (size_t tp = 0; tp < t.emits.size(); ++tp) {
        if (t.emits[tp] != kLambda &&
            !alphabet_contains(m.query_alphabets[tp], t.emits[tp])) {
          out.push_back(where + ": emits '" + symbol_name(t.emits[tp]) +
                        "' outside query alphabet " + std::to_string(tp + 1));
        }
      }
    }
  }

  if (m.kind == Kind::Dfa) {
    if (!m.query_alphabets.empty() && m.mode == OracleMode::None) {
      // allowed: plain dfas normally carry no tapes; reducers may.
    }
    std::map<std::pair<State, Symbol>, int> fanout;
    for (const Transition& t : m.transitions) {
      if (t.read == kLambda) {
        out.push_back("dfa has a lambda-move from state '" +
                      m.states[t.from] + "'");
        continue;
      }
      fanout[{t.from, t.read}]++;
    }
    Word reads = m.input_alphabet;
    reads.push_back(kDollar);
    bool cent = m.reads_cent();
    if (cent) reads.push_back(kCent);
    for (size_t q = 0; q < m.states.size(); ++q) {
      if (m.is_halting(static_cast<State>(q))) continue;
      for (Symbol s : reads) {
        int n = fanout.count({static_cast<State>(q), s})
                    ? fanout[{static_cast<State>(q), s}]
                    : 0;
        if (n != 1) {
          out.push_back("dfa determinism: state '" + m.states[q] +
                        "' has " + std::to_string(n) + " successors on '" +
                        symbol_name(s) + "'");
        }
      }
    }
  }

  if (m.mode == OracleMode::Turing) {
    if (m.query_state == kNoState || m.yes_state == kNoState ||
        m.no_state == kNoState) {
      out.push_back("turing mode requires query/yes/no states");
    } else {
      if (m.query_state == m.yes_state || m.query_state == m.no_state ||
          m.yes_state == m.no_state) {
        out.push_back("turing query/yes/no states must be distinct");
      }
      for (const Transition& t : m.transitions) {
        if (t.from == m.query_state) {
          out.push_back("query state '" + m.states[m.query_state] +
                        "' has an ordinary outgoing transition");
          break;
        }
      }
      if (m.query_alphabets.size() != 1) {
        out.push_back("turing mode requires exactly one query tape");
      }
    }
  } else {
    if (m.query_state != kNoState || m.yes_state != kNoState ||
        m.no_state != kNoState) {
      out.push_back("query/yes/no states declared outside turing mode");
    }
  }

  if (m.mode == OracleMode::Ktt) {
    if (static_cast<int>(m.query_alphabets.size()) != m.ktt_arity) {
      out.push_back("ktt(" + std::to_string(m.ktt_arity) + ") mode requires " +
                    std::to_string(m.ktt_arity) + " query tapes, got " +
                    std::to_string(m.query_alphabets.size()));
    }
  }
  if (m.mode == OracleMode::ManyOne && m.query_alphabets.size() != 1) {
    out.push_back("many-one mode requires exactly one query tape");
  }

  if (!m.weights.empty()) {
    if (m.weights.size() != m.transitions.size()) {
      out.push_back("weight vector not parallel to transitions");
    } else {
      std::map<int32_t, Rational> sums;
      std::map<int32_t, std::tuple<State, Symbol, Symbol>> key;
      for (size_t i = 0; i < m.transitions.size(); ++i) {
        const Transition& t = m.transitions[i];
        if (t.group < 0) continue;
        const Rational& w = m.weights[i];
        if (w <= 0 || w > 1) {
          out.push_back("transition " + std::to_string(i + 1) +
                        ": weight outside (0, 1]");
        }
        sums[t.group] += w;
        auto k = std::make_tuple(t.from, t.read, t.top);
        auto it = key.find(t.group);
        if (it == key.end()) {
          key.emplace(t.group, k);
        } else if (it->second != k) {
          out.push_back("group '" + m.group_ids[t.group] +
                        "' mixes different (state, read, top) keys");
        }
      }
      for (const auto& [g, s] : sums) {
        if (s != 1) {
          out.push_back("group '" + m.group_ids[g] + "' weights sum to " +
                        rational_str(s) + ", expected 1");
        }
      }
    }
  }

  return out;
}

void validate_or_throw(const MachineSpec& m) {
  auto v = validate(m);
  if (!v.empty()) {
    std::string msg = "machine '" + m.name + "' is not well-formed:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ValidationError(msg);
  }
}

bool is_deterministic(const MachineSpec& m) {
  std::set<std::tuple<State, Symbol, Symbol>> seen;
  std::set<std::pair<State, Symbol>> lambda_tops, read_tops;
  for (const Transition& t : m.transitions) {
    if (!seen.insert({t.from, t.read, t.top}).second) return false;
    if (t.read == kLambda) {
      lambda_tops.insert({t.from, t.top});
    } else {
      read_tops.insert({t.from, t.top});
    }
  }
  for (const auto& lt : lambda_tops) {
    if (read_tops.count(lt)) return false;
  }
  return true;
}

}  // namespace opda
