#include "opda/transforms.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "opda/errors.hpp"

namespace opda {

namespace {

Symbol bit_symbol(int b) { return intern_symbol(b ? "1" : "0"); }

Symbol index_symbol(uint32_t i) {
  return intern_symbol("t" + std::to_string(i + 1));
}

Word union_sorted(std::initializer_list<Word> parts) {
  std::set<std::string> names;
  for (const Word& p : parts) {
    for (Symbol s : p) names.insert(symbol_name(s));
  }
  Word out;
  for (const auto& n : names) out.push_back(intern_symbol(n));
  return out;
}

// Construction helper: tracks tape count, pads emit slots, and mints fresh
// chain states for multi-symbol emissions.
struct Builder {
  MachineSpec m;
  int fresh = 0;

  Builder(std::string name, Kind kind) {
    m.name = std::move(name);
    m.kind = kind;
  }

  State st(const std::string& n) { return m.add_state(n); }

  State fresh_state(const std::string& tag) {
    return st(tag + "." + std::to_string(fresh++));
  }

  Word pad_emits(Word e) {
    e.resize(m.query_alphabets.size(), kLambda);
    return e;
  }

  Transition& rule(State f, Symbol read, Symbol top, State to, Word push,
                   Word emits = {}) {
    Transition t;
    t.from = f;
    t.read = read;
    t.top = m.kind == Kind::Npda ? top : kLambda;
    t.to = to;
    if (m.kind == Kind::Npda) t.push = std::move(push);
    t.emits = pad_emits(std::move(emits));
    m.transitions.push_back(std::move(t));
    return m.transitions.back();
  }

  // Emits `tokens` on tape 0 while applying one read/stack move, chaining
  // through fresh lambda states when more than one token is needed.  The
  // lambda links preserve the stack (one passthrough rule per stack
  // symbol).
  void emit_chain(State from, Symbol read, Symbol top, Word push,
                  const std::vector<Symbol>& tokens, State to,
                  const std::string& tag) {
    if (tokens.empty()) {
      rule(from, read, top, to, std::move(push), {});
      return;
    }
    State cur = from;
    for (size_t i = 0; i < tokens.size(); ++i) {
      State next = (i + 1 == tokens.size()) ? to : fresh_state(tag);
      if (i == 0) {
        rule(cur, read, top, next, push, {tokens[i]});
      } else {
        if (m.kind == Kind::Npda) {
          for (Symbol g : m.stack_alphabet) {
            rule(cur, kLambda, g, next, {g}, {tokens[i]});
          }
        } else {
          rule(cur, kLambda, kLambda, next, {}, {tokens[i]});
        }
      }
      cur = next;
    }
  }
};

void require_pre(bool ok, const std::string& msg) {
  if (!ok) throw PreconditionError(msg);
}

void require_oracle_free_npda(const MachineSpec& m, const char* what) {
  require_pre(m.kind == Kind::Npda && m.mode == OracleMode::None &&
                  m.query_alphabets.empty(),
              std::string(what) + ": '" + m.name +
                  "' must be an oracle-free npda");
}

std::vector<std::vector<uint32_t>> rules_by_state(const MachineSpec& m) {
  std::vector<std::vector<uint32_t>> by(m.states.size());
  for (uint32_t i = 0; i < m.transitions.size(); ++i) {
    by[m.transitions[i].from].push_back(i);
  }
  return by;
}

}  // namespace

std::set<Word> natural_extensions(const Word& x, size_t max_len) {
  require_pre(max_len >= x.size(),
              "natural_extensions: max_len shorter than the string");
  Symbol nat = natural_symbol();
  std::set<Word> out;
  std::function<void(size_t, Word&)> go = [&](size_t i, Word& acc) {
    if (acc.size() > max_len) return;
    if (i == x.size()) {
      Word w = acc;
      out.insert(w);
      if (acc.size() < max_len) {
        acc.push_back(nat);
        go(i, acc);
        acc.pop_back();
      }
      return;
    }
    acc.push_back(x[i]);
    go(i + 1, acc);
    acc.pop_back();
    if (acc.size() < max_len) {
      acc.push_back(nat);
      go(i, acc);
      acc.pop_back();
    }
  };
  Word acc;
  go(0, acc);
  return out;
}

std::vector<std::string> check_normalized(const MachineSpec& m) {
  std::vector<std::string> out;
  // States reachable without consuming '$'.
  std::vector<char> pre(m.states.size(), 0);
  std::deque<State> work{m.start};
  pre[m.start] = 1;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    for (const Transition& t : m.transitions) {
      if (t.from != q || t.read == kDollar) continue;
      if (!pre[t.to]) {
        pre[t.to] = 1;
        work.push_back(t.to);
      }
    }
  }
  for (size_t i = 0; i < m.transitions.size(); ++i) {
    const Transition& t = m.transitions[i];
    if (t.read == kLambda && pre[t.from]) {
      out.push_back("rule " + std::to_string(i + 1) +
                    ": lambda-move before the right endmarker");
    }
    if (m.has_stack() && m.is_accepting(t.to)) {
      bool clean = t.top == m.bottom_marker() && t.push.size() == 1 &&
                   t.push[0] == m.bottom_marker();
      if (!clean) {
        out.push_back("rule " + std::to_string(i + 1) +
                      ": enters an accepting state without an empty stack");
      }
    }
  }
  return out;
}

MachineSpec normalize_end(const MachineSpec& m) {
  require_oracle_free_npda(m, "normalize_end");
  MachineSpec out = m;
  out.name = m.name + "_norm";
  Symbol z0 = m.bottom_marker();
  std::map<State, State> drains;
  for (size_t q = 0; q < m.states.size(); ++q) {
    if (!m.accepting[q]) continue;
    State d = out.add_state(m.states[q] + "@drain");
    drains[static_cast<State>(q)] = d;
    for (Symbol g : m.stack_alphabet) {
      Transition t;
      t.from = d;
      t.read = kLambda;
      t.top = g;
      if (g == z0) {
        t.to = static_cast<State>(q);
        t.push = {z0};
      } else {
        t.to = d;
      }
      out.transitions.push_back(std::move(t));
    }
  }
  for (auto& t : out.transitions) {
    auto it = drains.find(t.to);
    if (it != drains.end() && t.from != it->second) t.to = it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stack-history encoding (dyckify and friends).

namespace {

int bracket_index(const MachineSpec& m, Symbol stack_sym) {
  for (size_t i = 0; i < m.stack_alphabet.size(); ++i) {
    if (m.stack_alphabet[i] == stack_sym) return static_cast<int>(i) + 1;
  }
  throw PreconditionError("unknown stack symbol");
}

// Tokens a rule contributes to the stack history: close the matched top,
// then open the pushed symbols bottom-first.  Rules entering an accepting
// state also close the bottom marker, asserting a drained stack; the Dyck
// oracle filters paths where that assertion is wrong.
std::vector<Symbol> history_tokens(const MachineSpec& m, const Transition& t) {
  std::vector<Symbol> tokens;
  tokens.push_back(dyck_close(bracket_index(m, t.top)));
  for (size_t j = t.push.size(); j-- > 0;) {
    tokens.push_back(dyck_open(bracket_index(m, t.push[j])));
  }
  if (m.is_accepting(t.to)) {
    bool popped_bottom = t.top == m.bottom_marker() && t.push.empty();
    if (!popped_bottom) tokens.push_back(dyck_close(1));
  }
  return tokens;
}

}  // namespace

DyckifyResult dyckify(const MachineSpec& m) {
  require_oracle_free_npda(m, "dyckify");
  auto viols = check_normalized(m);
  if (!viols.empty()) {
    throw PreconditionError("dyckify: '" + m.name +
                            "' is not normalized: " + viols.front());
  }
  int d = static_cast<int>(m.stack_alphabet.size());
  Builder b(m.name + "_dyck", Kind::Nfa);
  b.m.mode = OracleMode::ManyOne;
  b.m.input_alphabet = m.input_alphabet;
  b.m.query_alphabets = {dyck_alphabet(d)};
  State s0 = b.st("@start");
  b.m.start = s0;
  for (const auto& n : m.states) b.st(n);
  auto map = [&](State q) { return b.m.state_id(m.states[q]); };
  for (size_t q = 0; q < m.states.size(); ++q) {
    if (m.accepting[q]) b.m.accepting[map(static_cast<State>(q))] = 1;
    if (m.rejecting[q]) b.m.rejecting[map(static_cast<State>(q))] = 1;
  }
  // The initial stack content opens the history.
  b.rule(s0, kLambda, kLambda, map(m.start), {}, {dyck_open(1)});
  for (size_t i = 0; i < m.transitions.size(); ++i) {
    const Transition& t = m.transitions[i];
    b.emit_chain(map(t.from), t.read, kLambda, {}, history_tokens(m, t),
                 map(t.to), "c" + std::to_string(i));
  }
  DyckifyResult r;
  r.reducer = std::move(b.m);
  r.oracle = dyck_expr(d);
  r.dyck_width = d;
  return r;
}

MachineSpec dyck_recognizer(int d) {
  require_pre(d >= 1, "dyck_recognizer: d must be at least 1");
  Builder b("dyck" + std::to_string(d), Kind::Npda);
  Symbol z = intern_symbol("Z");
  b.m.stack_alphabet.push_back(z);
  std::vector<Symbol> marks;
  for (int i = 1; i <= d; ++i) {
    Symbol mk = intern_symbol("B" + std::to_string(i));
    marks.push_back(mk);
    b.m.stack_alphabet.push_back(mk);
  }
  b.m.input_alphabet = dyck_alphabet(d);
  State q0 = b.st("q0"), acc = b.st("qf"), rej = b.st("qr");
  b.m.start = q0;
  b.m.accepting[acc] = 1;
  b.m.rejecting[rej] = 1;
  for (int i = 1; i <= d; ++i) {
    for (Symbol g : b.m.stack_alphabet) {
      b.rule(q0, dyck_open(i), g, q0, {marks[i - 1], g});
    }
    for (Symbol g : b.m.stack_alphabet) {
      if (g == marks[i - 1]) {
        b.rule(q0, dyck_close(i), g, q0, {});
      } else {
        b.rule(q0, dyck_close(i), g, rej, {g});
      }
    }
  }
  b.rule(q0, kDollar, z, acc, {z});
  for (Symbol mk : marks) b.rule(q0, kDollar, mk, rej, {mk});
  return std::move(b.m);
}

// ---------------------------------------------------------------------------
// Oracle absorption.

MachineSpec absorb_nfa(const MachineSpec& outer, const MachineSpec& inner) {
  require_pre(outer.mode == OracleMode::ManyOne &&
                  outer.query_alphabets.size() == 1,
              "absorb_nfa: outer must be a many-one reducer");
  require_pre(inner.mode == OracleMode::ManyOne &&
                  inner.query_alphabets.size() == 1 && !inner.has_stack(),
              "absorb_nfa: inner must be a stackless many-one reducer");
  require_pre(same_alphabet(outer.query_alphabets[0], inner.input_alphabet),
              "absorb_nfa: query/input alphabet mismatch");
  require_pre(!inner.reads_cent() && !outer.reads_cent(),
              "absorb_nfa: left-endmarker rules are not supported");

  Builder b(outer.name + "_o_" + inner.name, outer.kind);
  b.m.mode = OracleMode::ManyOne;
  b.m.input_alphabet = outer.input_alphabet;
  b.m.stack_alphabet = outer.stack_alphabet;
  b.m.query_alphabets = {inner.query_alphabets[0]};

  Word tops = outer.has_stack() ? outer.stack_alphabet : Word{kLambda};
  auto inner_by = rules_by_state(inner);
  auto outer_by = rules_by_state(outer);

  std::map<std::pair<State, State>, State> ids;
  std::deque<std::pair<State, State>> work;
  auto get = [&](State q, State i) {
    auto key = std::make_pair(q, i);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    State s = b.st(outer.states[q] + "." + inner.states[i]);
    ids.emplace(key, s);
    bool rej = outer.is_rejecting(q) || inner.is_rejecting(i);
    bool acc = outer.is_accepting(q) && inner.is_accepting(i);
    if (acc) {
      b.m.accepting[s] = 1;
    } else if (rej) {
      b.m.rejecting[s] = 1;
    } else {
      work.push_back(key);
    }
    return s;
  };
  b.m.start = get(outer.start, inner.start);
  while (!work.empty()) {
    auto [q, i] = work.front();
    work.pop_front();
    State src = ids[{q, i}];
    // Inner lambda-moves run on their own.
    if (!inner.is_halting(i)) {
      for (uint32_t ri : inner_by[i]) {
        const Transition& it = inner.transitions[ri];
        if (it.read != kLambda) continue;
        for (Symbol g : tops) {
          b.rule(src, kLambda, g, get(q, it.to), {g}, {it.emits[0]});
        }
      }
    }
    if (!outer.is_halting(q)) {
      for (uint32_t ro : outer_by[q]) {
        const Transition& ot = outer.transitions[ro];
        if (ot.emits[0] == kLambda) {
          b.rule(src, ot.read, ot.top, get(ot.to, i), ot.push, {kLambda});
        } else if (!inner.is_halting(i)) {
          for (uint32_t ri : inner_by[i]) {
            const Transition& it = inner.transitions[ri];
            if (it.read != ot.emits[0]) continue;
            b.rule(src, ot.read, ot.top, get(ot.to, it.to), ot.push,
                   {it.emits[0]});
          }
        }
      }
    } else if (outer.is_accepting(q) && !inner.is_halting(i)) {
      // The query word is complete; the inner machine consumes its own '$'.
      for (uint32_t ri : inner_by[i]) {
        const Transition& it = inner.transitions[ri];
        if (it.read != kDollar) continue;
        for (Symbol g : tops) {
          b.rule(src, kLambda, g, get(q, it.to), {g}, {it.emits[0]});
        }
      }
    }
  }
  return std::move(b.m);
}

MachineSpec absorb_dpda_oracle(const MachineSpec& reducer,
                               const MachineSpec& dpda) {
  require_pre(reducer.mode == OracleMode::ManyOne &&
                  reducer.query_alphabets.size() == 1 && !reducer.has_stack(),
              "absorb_dpda_oracle: reducer must be a stackless many-one "
              "reducer");
  require_pre(dpda.kind == Kind::Npda && dpda.mode == OracleMode::None,
              "absorb_dpda_oracle: oracle must be a plain npda");
  require_pre(is_deterministic(dpda), "absorb_dpda_oracle: oracle machine "
                                      "must be deterministic");
  for (const Transition& t : dpda.transitions) {
    require_pre(t.read != kLambda && t.read != kCent,
                "absorb_dpda_oracle: oracle machine must be lambda-free");
  }
  require_pre(!reducer.reads_cent(),
              "absorb_dpda_oracle: left-endmarker rules are not supported");
  require_pre(same_alphabet(reducer.query_alphabets[0], dpda.input_alphabet),
              "absorb_dpda_oracle: query/input alphabet mismatch");

  Builder b(reducer.name + "_x_" + dpda.name, Kind::Npda);
  b.m.input_alphabet = reducer.input_alphabet;
  b.m.stack_alphabet = dpda.stack_alphabet;

  auto red_by = rules_by_state(reducer);
  auto d_by = rules_by_state(dpda);
  auto d_rule = [&](State d, Symbol read, Symbol top) -> const Transition* {
    for (uint32_t ri : d_by[d]) {
      const Transition& t = dpda.transitions[ri];
      if (t.read == read && t.top == top) return &t;
    }
    return nullptr;
  };

  std::map<std::pair<State, State>, State> ids;
  std::deque<std::pair<State, State>> work;
  auto get = [&](State q, State d) {
    auto key = std::make_pair(q, d);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    State s = b.st(reducer.states[q] + "." + dpda.states[d]);
    ids.emplace(key, s);
    bool acc = reducer.is_accepting(q) && dpda.is_accepting(d);
    bool rej = reducer.is_rejecting(q) || dpda.is_rejecting(d);
    if (acc) {
      b.m.accepting[s] = 1;
    } else if (rej) {
      b.m.rejecting[s] = 1;
    } else {
      work.push_back(key);
    }
    return s;
  };
  b.m.start = get(reducer.start, dpda.start);
  while (!work.empty()) {
    auto [q, d] = work.front();
    work.pop_front();
    State src = ids[{q, d}];
    if (!reducer.is_halting(q)) {
      for (uint32_t rr : red_by[q]) {
        const Transition& rt = reducer.transitions[rr];
        if (rt.emits[0] == kLambda) {
          for (Symbol g : dpda.stack_alphabet) {
            b.rule(src, rt.read, g, get(rt.to, d), {g});
          }
        } else {
          for (Symbol g : dpda.stack_alphabet) {
            const Transition* dt = d_rule(d, rt.emits[0], g);
            if (!dt) continue;  // oracle run dies on this prefix
            b.rule(src, rt.read, g, get(rt.to, dt->to), dt->push);
          }
        }
      }
    } else if (reducer.is_accepting(q) && !dpda.is_halting(d)) {
      for (Symbol g : dpda.stack_alphabet) {
        const Transition* dt = d_rule(d, kDollar, g);
        if (!dt) continue;
        b.rule(src, kLambda, g, get(q, dt->to), dt->push);
      }
    }
  }
  return std::move(b.m);
}

namespace {

State dfa_step(const MachineSpec& dfa, State r, Symbol s) {
  for (const Transition& t : dfa.transitions) {
    if (t.from == r && t.read == s) return t.to;
  }
  throw PreconditionError("dfa '" + dfa.name + "' is not total on '" +
                          symbol_name(s) + "'");
}

bool dfa_accepts_from(const MachineSpec& dfa, State r) {
  if (dfa.is_halting(r)) return dfa.is_accepting(r);
  return dfa.is_accepting(dfa_step(dfa, r, kDollar));
}

}  // namespace

MachineSpec absorb_regular_oracle(const MachineSpec& reducer,
                                  const MachineSpec& dfa, OracleMode mode,
                                  const MachineSpec* ktt_table) {
  require_pre(reducer.mode == mode, "absorb_regular_oracle: mode mismatch");
  require_pre(dfa.kind == Kind::Dfa && dfa.mode == OracleMode::None,
              "absorb_regular_oracle: oracle must be a dfa");
  require_pre(!dfa.reads_cent(),
              "absorb_regular_oracle: dfa left-endmarker rules unsupported");
  validate_or_throw(dfa);

  Builder b(reducer.name + "_reg", reducer.kind);
  b.m.input_alphabet = reducer.input_alphabet;
  b.m.stack_alphabet = reducer.stack_alphabet;
  auto red_by = rules_by_state(reducer);

  if (mode == OracleMode::ManyOne) {
    std::map<std::pair<State, State>, State> ids;
    std::deque<std::pair<State, State>> work;
    auto get = [&](State q, State r) {
      auto key = std::make_pair(q, r);
      auto it = ids.find(key);
      if (it != ids.end()) return it->second;
      State s = b.st(reducer.states[q] + "." + dfa.states[r]);
      ids.emplace(key, s);
      if (reducer.is_accepting(q)) {
        if (dfa_accepts_from(dfa, r)) b.m.accepting[s] = 1;
        else b.m.rejecting[s] = 1;
      } else if (reducer.is_rejecting(q)) {
        b.m.rejecting[s] = 1;
      } else {
        work.push_back(key);
      }
      return s;
    };
    b.m.start = get(reducer.start, dfa.start);
    while (!work.empty()) {
      auto [q, r] = work.front();
      work.pop_front();
      State src = ids[{q, r}];
      for (uint32_t rr : red_by[q]) {
        const Transition& rt = reducer.transitions[rr];
        State r2 = rt.emits[0] == kLambda ? r : dfa_step(dfa, r, rt.emits[0]);
        b.rule(src, rt.read, rt.top, get(rt.to, r2), rt.push);
      }
    }
    return std::move(b.m);
  }

  if (mode == OracleMode::Turing) {
    std::map<std::pair<State, State>, State> ids;
    std::deque<std::pair<State, State>> work;
    std::function<State(State, State)> get = [&](State q, State r) {
      auto key = std::make_pair(q, r);
      auto it = ids.find(key);
      if (it != ids.end()) return it->second;
      State s = b.st(reducer.states[q] + "." + dfa.states[r]);
      ids.emplace(key, s);
      if (reducer.is_accepting(q)) b.m.accepting[s] = 1;
      else if (reducer.is_rejecting(q)) b.m.rejecting[s] = 1;
      else work.push_back(key);
      return s;
    };
    b.m.start = get(reducer.start, dfa.start);
    while (!work.empty()) {
      auto [q, r] = work.front();
      work.pop_front();
      if (q == reducer.query_state) continue;  // handled at the caller edge
      State src = ids[{q, r}];
      for (uint32_t rr : red_by[q]) {
        const Transition& rt = reducer.transitions[rr];
        State r2 = rt.emits[0] == kLambda ? r : dfa_step(dfa, r, rt.emits[0]);
        State target;
        if (rt.to == reducer.query_state) {
          bool ans = dfa_accepts_from(dfa, r2);
          target = get(ans ? reducer.yes_state : reducer.no_state, dfa.start);
        } else {
          target = get(rt.to, r2);
        }
        b.rule(src, rt.read, rt.top, target, rt.push);
      }
    }
    return std::move(b.m);
  }

  // ktt: track one dfa state per tape plus the truth table's progress over
  // the input; the final table decision folds in statically.
  require_pre(mode == OracleMode::Ktt && ktt_table != nullptr,
              "absorb_regular_oracle: ktt mode needs the truth table");
  const MachineSpec& tbl = *ktt_table;
  require_pre(tbl.kind == Kind::Dfa && !tbl.reads_cent(),
              "absorb_regular_oracle: truth table must be a dfa");
  int k = reducer.ktt_arity;
  auto table_accepts = [&](State bstate, const std::vector<State>& rs) {
    State cur = dfa_step(tbl, bstate, hash_symbol());
    for (int i = 0; i < k; ++i) {
      cur = dfa_step(tbl, cur, bit_symbol(dfa_accepts_from(dfa, rs[i])));
    }
    return dfa_accepts_from(tbl, cur);
  };
  using KKey = std::pair<State, std::pair<std::vector<State>, State>>;
  std::map<KKey, State> ids;
  std::deque<KKey> work;
  std::function<State(State, std::vector<State>, State)> get =
      [&](State q, std::vector<State> rs, State bstate) {
        KKey key{q, {rs, bstate}};
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        std::string nm = reducer.states[q];
        for (State r : rs) nm += "." + dfa.states[r];
        nm += "." + tbl.states[bstate];
        State s = b.st(nm);
        ids.emplace(key, s);
        if (reducer.is_accepting(q)) {
          if (table_accepts(bstate, rs)) b.m.accepting[s] = 1;
          else b.m.rejecting[s] = 1;
        } else if (reducer.is_rejecting(q)) {
          b.m.rejecting[s] = 1;
        } else {
          work.push_back(key);
        }
        return s;
      };
  std::vector<State> r0(k, dfa.start);
  b.m.start = get(reducer.start, r0, tbl.start);
  while (!work.empty()) {
    auto [q, rest] = work.front();
    auto [rs, bstate] = rest;
    work.pop_front();
    State src = ids[{q, {rs, bstate}}];
    for (uint32_t rr : red_by[q]) {
      const Transition& rt = reducer.transitions[rr];
      std::vector<State> rs2 = rs;
      for (int i = 0; i < k; ++i) {
        if (rt.emits[i] != kLambda) rs2[i] = dfa_step(dfa, rs[i], rt.emits[i]);
      }
      State b2 = bstate;
      if (rt.read != kLambda && rt.read != kDollar && rt.read != kCent) {
        b2 = dfa_step(tbl, bstate, rt.read);
      }
      b.rule(src, rt.read, rt.top, get(rt.to, rs2, b2), rt.push);
    }
  }
  return std::move(b.m);
}

// ---------------------------------------------------------------------------
// Parallel stack-history product.

ProductResult product_reducer(const std::vector<MachineSpec>& machines) {
  int d = static_cast<int>(machines.size());
  require_pre(d >= 1, "product_reducer: need at least one machine");
  for (const MachineSpec& m : machines) {
    require_oracle_free_npda(m, "product_reducer");
    require_pre(!m.reads_cent(),
                "product_reducer: left-endmarker rules unsupported");
    for (const Transition& t : m.transitions) {
      require_pre(t.read != kLambda,
                  "product_reducer: '" + m.name + "' has a lambda-move");
    }
    auto v = check_normalized(m);
    require_pre(v.empty(), "product_reducer: '" + m.name +
                               "' is not normalized: " +
                               (v.empty() ? "" : v.front()));
    require_pre(same_alphabet(m.input_alphabet, machines[0].input_alphabet),
                "product_reducer: input alphabet mismatch");
  }

  Symbol nat = natural_symbol();
  Builder b("product" + std::to_string(d), Kind::Nfa);
  b.m.mode = OracleMode::ManyOne;
  b.m.input_alphabet = machines[0].input_alphabet;
  b.m.query_alphabets.resize(1);

  std::set<Symbol> columns_used;
  auto column = [&](const std::vector<Symbol>& parts) {
    Symbol c = track_symbol(parts);
    columns_used.insert(c);
    return c;
  };

  std::vector<std::vector<std::vector<uint32_t>>> by;
  for (const auto& m : machines) by.push_back(rules_by_state(m));

  using Tuple = std::vector<State>;
  std::map<Tuple, State> ids;
  std::deque<Tuple> work;
  auto get = [&](const Tuple& qs) {
    auto it = ids.find(qs);
    if (it != ids.end()) return it->second;
    std::string nm;
    for (int i = 0; i < d; ++i) {
      if (i) nm += ".";
      nm += machines[i].states[qs[i]];
    }
    State s = b.st(nm);
    ids.emplace(qs, s);
    bool all_acc = true, any_rej = false;
    for (int i = 0; i < d; ++i) {
      all_acc = all_acc && machines[i].is_accepting(qs[i]);
      any_rej = any_rej || machines[i].is_rejecting(qs[i]);
    }
    if (all_acc) b.m.accepting[s] = 1;
    else if (any_rej) b.m.rejecting[s] = 1;
    else work.push_back(qs);
    return s;
  };

  Tuple start0;
  for (const auto& m : machines) start0.push_back(m.start);
  State tuple_start = get(start0);
  State s0 = b.st("@start");
  b.m.start = s0;
  {
    std::vector<Symbol> parts(d, dyck_open(1));
    b.rule(s0, kLambda, kLambda, tuple_start, {}, {column(parts)});
  }

  while (!work.empty()) {
    Tuple qs = work.front();
    work.pop_front();
    bool any_halt = false;
    for (int i = 0; i < d; ++i) any_halt |= machines[i].is_halting(qs[i]);
    if (any_halt) continue;  // desynchronized tuple: the path dies
    State src = ids[qs];
    Word reads = machines[0].input_alphabet;
    reads.push_back(kDollar);
    for (Symbol a : reads) {
      // One combined move per tuple of component rules on this symbol.
      std::vector<std::vector<uint32_t>> options(d);
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        for (uint32_t ri : by[i][qs[i]]) {
          if (machines[i].transitions[ri].read == a) options[i].push_back(ri);
        }
        if (options[i].empty()) ok = false;
      }
      if (!ok) continue;
      std::vector<size_t> odo(d, 0);
      while (true) {
        std::vector<std::vector<Symbol>> toks(d);
        Tuple target(d);
        size_t maxlen = 0;
        for (int i = 0; i < d; ++i) {
          const Transition& t = machines[i].transitions[options[i][odo[i]]];
          toks[i] = history_tokens(machines[i], t);
          target[i] = t.to;
          maxlen = std::max(maxlen, toks[i].size());
        }
        std::vector<Symbol> cols;
        for (size_t p = 0; p < maxlen; ++p) {
          std::vector<Symbol> parts(d);
          for (int i = 0; i < d; ++i) {
            parts[i] = p < toks[i].size() ? toks[i][p] : nat;
          }
          cols.push_back(column(parts));
        }
        b.emit_chain(src, a, kLambda, {}, cols, get(target), "p");
        size_t i = d;
        while (i > 0) {
          --i;
          if (++odo[i] < options[i].size()) break;
          odo[i] = 0;
          if (i == 0) goto done_combo;
        }
      }
    done_combo:;
    }
  }
  Word qa(columns_used.begin(), columns_used.end());
  std::sort(qa.begin(), qa.end(), [](Symbol a, Symbol c) {
    return symbol_name(a) < symbol_name(c);
  });
  b.m.query_alphabets[0] = qa;
  ProductResult r;
  r.reducer = std::move(b.m);
  r.oracle = dyck_ext_expr(d);
  return r;
}

MachineSpec copy_input_reducer(const MachineSpec& m) {
  require_oracle_free_npda(m, "copy_input_reducer");
  for (const Transition& t : m.transitions) {
    if (m.is_accepting(t.to)) {
      require_pre(t.read == kDollar || t.read == kLambda,
                  "copy_input_reducer: '" + m.name +
                      "' does not decide at the right endmarker");
    }
  }
  MachineSpec out = m;
  out.name = m.name + "_copy";
  out.mode = OracleMode::ManyOne;
  out.query_alphabets = {m.input_alphabet};
  for (Transition& t : out.transitions) {
    bool is_input = t.read != kLambda && t.read != kCent && t.read != kDollar;
    t.emits = {is_input ? t.read : kLambda};
  }
  return out;
}

MachineSpec flip_halting(const MachineSpec& m) {
  MachineSpec out = m;
  out.name = m.name + "_flip";
  std::swap(out.accepting, out.rejecting);
  return out;
}

MachineSpec flip_answers(const MachineSpec& m) {
  require_pre(m.mode == OracleMode::Turing,
              "flip_answers: requires a turing reducer");
  MachineSpec out = m;
  out.name = m.name + "_flipans";
  std::swap(out.yes_state, out.no_state);
  return out;
}

// ---------------------------------------------------------------------------
// Guessed oracle answers.

MachineSpec guess_answers(const MachineSpec& m) {
  require_pre(m.mode == OracleMode::Turing && m.query_alphabets.size() == 1,
              "guess_answers: requires a single-tape turing reducer");
  Symbol nat = natural_symbol();
  require_pre(!alphabet_contains(m.query_alphabets[0], nat),
              "guess_answers: query alphabet may not contain '~'");

  Builder b(m.name + "_guess", m.kind);
  b.m.mode = OracleMode::ManyOne;
  b.m.input_alphabet = m.input_alphabet;
  b.m.stack_alphabet = m.stack_alphabet;
  b.m.query_alphabets = {union_sorted(
      {m.query_alphabets[0], {bit_symbol(0), bit_symbol(1), nat}})};

  // Tags: -1 = no pending guessed bit, 0/1 = bit emitted, segment open.
  auto tagged = [&](State q, int tag) {
    std::string nm = m.states[q];
    if (tag >= 0) nm += tag ? "@1" : "@0";
    return b.st(nm);
  };
  for (size_t q = 0; q < m.states.size(); ++q) {
    State s = tagged(static_cast<State>(q), -1);
    if (m.accepting[q]) b.m.accepting[s] = 1;
    if (m.rejecting[q]) {
      b.m.rejecting[s] = 1;
      b.m.rejecting[tagged(static_cast<State>(q), 0)] = 1;
      b.m.rejecting[tagged(static_cast<State>(q), 1)] = 1;
    }
  }
  b.m.start = tagged(m.start, -1);

  int chain = 0;
  for (const Transition& t : m.transitions) {
    bool into_query = t.to == m.query_state;
    Symbol e = t.emits[0];
    for (int tag : {-1, 0, 1}) {
      State src = tagged(t.from, tag);
      std::string cn = "g" + std::to_string(chain++);
      if (!into_query) {
        if (e == kLambda) {
          b.rule(src, t.read, t.top, tagged(t.to, tag), t.push, {kLambda});
        } else if (tag < 0) {
          for (int bit : {0, 1}) {
            b.emit_chain(src, t.read, t.top, t.push, {bit_symbol(bit), e},
                         tagged(t.to, bit), cn + (bit ? "b1" : "b0"));
          }
        } else {
          b.rule(src, t.read, t.top, tagged(t.to, tag), t.push, {e});
        }
      } else {
        // Segment completes here; resume at the guessed branch.
        if (tag < 0) {
          for (int bit : {0, 1}) {
            std::vector<Symbol> toks{bit_symbol(bit)};
            if (e != kLambda) toks.push_back(e);
            toks.push_back(nat);
            State resume = tagged(bit ? m.yes_state : m.no_state, -1);
            b.emit_chain(src, t.read, t.top, t.push, toks, resume,
                         cn + (bit ? "q1" : "q0"));
          }
        } else {
          std::vector<Symbol> toks;
          if (e != kLambda) toks.push_back(e);
          toks.push_back(nat);
          State resume = tagged(tag ? m.yes_state : m.no_state, -1);
          b.emit_chain(src, t.read, t.top, t.push, toks, resume, cn + "q");
        }
      }
    }
  }
  return std::move(b.m);
}

namespace {

MachineSpec build_verifier(const MachineSpec& a, bool positive) {
  require_oracle_free_npda(a, "verifier");
  require_pre(!a.reads_cent(), "verifier: oracle machine may not read <cent>");
  auto v = check_normalized(a);
  require_pre(v.empty(),
              "verifier: oracle machine '" + a.name + "' is not normalized");
  Symbol nat = natural_symbol();
  Symbol b0 = bit_symbol(0), b1 = bit_symbol(1);

  Builder b(a.name + (positive ? "_pos" : "_neg"), Kind::Npda);
  b.m.input_alphabet = union_sorted({a.input_alphabet, {b0, b1, nat}});
  b.m.stack_alphabet = a.stack_alphabet;
  Symbol z0 = a.bottom_marker();

  State scan = b.st("scan"), skip = b.st("skip");
  b.m.start = scan;
  std::map<State, State> in;
  for (size_t q = 0; q < a.states.size(); ++q) {
    State s = b.st("v." + a.states[q]);
    in[static_cast<State>(q)] = s;
    if (a.rejecting[q]) b.m.rejecting[s] = 1;
    if (a.accepting[q] && !positive) b.m.accepting[s] = 1;
  }

  for (Symbol g : a.stack_alphabet) {
    b.rule(scan, positive ? b0 : b1, g, skip, {g});
    for (Symbol c : a.input_alphabet) b.rule(skip, c, g, skip, {g});
    b.rule(skip, nat, g, scan, {g});
    b.rule(scan, positive ? b1 : b0, g, in[a.start], {g});
    if (!positive) b.rule(scan, b0, g, skip, {g});  // uncommitted branch
  }
  for (const Transition& t : a.transitions) {
    Symbol rd = t.read == kDollar ? nat : t.read;
    b.rule(in[t.from], rd, t.top, in[t.to], t.push);
  }
  if (positive) {
    for (size_t q = 0; q < a.states.size(); ++q) {
      if (!a.accepting[q]) continue;
      b.rule(in[static_cast<State>(q)], kLambda, z0, scan, {z0});
    }
    State ok = b.st("ok");
    b.m.accepting[ok] = 1;
    b.rule(scan, kDollar, z0, ok, {z0});
  } else {
    State no = b.st("no");
    b.m.rejecting[no] = 1;
    b.rule(scan, kDollar, z0, no, {z0});
  }
  return std::move(b.m);
}

}  // namespace

MachineSpec positive_verifier(const MachineSpec& a) {
  return build_verifier(a, true);
}

MachineSpec negative_verifier(const MachineSpec& a) {
  return build_verifier(a, false);
}

ExprPtr guess_answers_oracle(const MachineSpec& a) {
  return intersect_expr(machine_expr(positive_verifier(a)),
                        complement_expr(machine_expr(negative_verifier(a))));
}

// ---------------------------------------------------------------------------
// Path encodings.

EncodePathResult encode_path_reducer(const MachineSpec& m) {
  require_pre(m.kind == Kind::Npda && m.mode != OracleMode::Turing,
              "encode_path_reducer: requires a query-free or many-one npda");
  require_pre(!m.reads_cent(),
              "encode_path_reducer: left-endmarker rules unsupported");
  uint32_t nrules = static_cast<uint32_t>(m.transitions.size());

  EncodePathResult out;
  {
    MachineSpec enc = m;
    enc.name = m.name + "_enc";
    enc.mode = OracleMode::ManyOne;
    Word idx_alpha;
    for (uint32_t i = 0; i < nrules; ++i) idx_alpha.push_back(index_symbol(i));
    enc.query_alphabets = {idx_alpha};
    for (uint32_t i = 0; i < nrules; ++i) {
      enc.transitions[i].emits = {index_symbol(i)};
    }
    out.encoder = std::move(enc);
  }

  Symbol nat = natural_symbol();
  Builder b(m.name + "_replay", Kind::Npda);
  b.m.stack_alphabet = m.stack_alphabet;
  std::set<Symbol> cols;
  auto column = [&](Symbol x, Symbol y) {
    Symbol c = track_symbol({x, y});
    cols.insert(c);
    return c;
  };
  auto mid = [&](State q) { return b.st(m.states[q]); };
  auto post = [&](State q) { return b.st(m.states[q] + "@p"); };
  b.m.start = mid(m.start);
  for (uint32_t i = 0; i < nrules; ++i) {
    const Transition& t = m.transitions[i];
    Symbol ti = index_symbol(i);
    if (t.read == kLambda) {
      b.rule(mid(t.from), column(nat, ti), t.top, mid(t.to), t.push);
      b.rule(post(t.from), column(nat, ti), t.top, post(t.to), t.push);
    } else if (t.read == kDollar) {
      b.rule(mid(t.from), column(nat, ti), t.top, post(t.to), t.push);
    } else {
      b.rule(mid(t.from), column(t.read, ti), t.top, mid(t.to), t.push);
    }
  }
  State sweep = b.st("sweep"), racc = b.st("racc");
  b.m.accepting[racc] = 1;
  Symbol pad = column(nat, nat);
  for (size_t q = 0; q < m.states.size(); ++q) {
    if (!m.accepting[q]) continue;
    for (State fs : {mid(static_cast<State>(q)), post(static_cast<State>(q))}) {
      for (Symbol g : m.stack_alphabet) {
        b.rule(fs, pad, g, sweep, {g});
        b.rule(fs, kDollar, g, racc, {g});
      }
    }
  }
  for (Symbol g : m.stack_alphabet) {
    b.rule(sweep, pad, g, sweep, {g});
    b.rule(sweep, kDollar, g, racc, {g});
  }
  Word alpha(cols.begin(), cols.end());
  std::sort(alpha.begin(), alpha.end(), [](Symbol a, Symbol c) {
    return symbol_name(a) < symbol_name(c);
  });
  b.m.input_alphabet = alpha;
  out.replayer = std::move(b.m);
  return out;
}

Word encode_track_string(const MachineSpec& m,
                         const std::vector<uint32_t>& rule_indices) {
  Symbol nat = natural_symbol();
  Word w;
  for (uint32_t i : rule_indices) {
    const Transition& t = m.transitions.at(i);
    Symbol x = (t.read == kLambda || t.read == kDollar || t.read == kCent)
                   ? nat
                   : t.read;
    w.push_back(track_symbol({x, index_symbol(i)}));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Closure constructions.

namespace {

// Imports a machine into a builder under a prefix, remapping its bottom
// marker to the shared bottom.  Returns the state map.
struct Imported {
  std::map<State, State> states;
  std::map<Symbol, Symbol> stack;
};

Imported import_into(Builder& b, const MachineSpec& m,
                     const std::string& prefix, Symbol shared_bottom,
                     bool lambdify_dollar, State redirect_accept_to = kNoState) {
  Imported im;
  im.stack[m.bottom_marker()] = shared_bottom;
  for (size_t i = 1; i < m.stack_alphabet.size(); ++i) {
    Symbol g = m.stack_alphabet[i];
    Symbol ng = intern_symbol(prefix + ":" + symbol_name(g));
    im.stack[g] = ng;
    if (!alphabet_contains(b.m.stack_alphabet, ng)) {
      b.m.stack_alphabet.push_back(ng);
    }
  }
  for (size_t q = 0; q < m.states.size(); ++q) {
    State s = b.st(prefix + "." + m.states[q]);
    im.states[static_cast<State>(q)] = s;
    if (m.rejecting[q]) b.m.rejecting[s] = 1;
  }
  for (const Transition& t : m.transitions) {
    Transition nt;
    nt.from = im.states[t.from];
    nt.read = (lambdify_dollar && t.read == kDollar) ? kLambda : t.read;
    nt.top = im.stack[t.top];
    State to = t.to;
    nt.to = (redirect_accept_to != kNoState && m.is_accepting(to))
                ? redirect_accept_to
                : im.states[to];
    for (Symbol g : t.push) nt.push.push_back(im.stack[g]);
    nt.emits = b.pad_emits({});
    b.m.transitions.push_back(std::move(nt));
  }
  return im;
}

void add_drain(Builder& b, State drain, Symbol bottom, State then) {
  for (Symbol g : b.m.stack_alphabet) {
    if (g == bottom) {
      b.rule(drain, kLambda, g, then, {g});
    } else {
      b.rule(drain, kLambda, g, drain, {});
    }
  }
}

}  // namespace

MachineSpec union_m(const MachineSpec& a, const MachineSpec& c) {
  require_oracle_free_npda(a, "union_m");
  require_oracle_free_npda(c, "union_m");
  Builder b(a.name + "_or_" + c.name, Kind::Npda);
  Symbol z = intern_symbol("Z");
  b.m.stack_alphabet.push_back(z);
  b.m.input_alphabet = union_sorted({a.input_alphabet, c.input_alphabet});
  State s0 = b.st("u0");
  b.m.start = s0;
  Imported ia = import_into(b, a, "1", z, false);
  Imported ic = import_into(b, c, "2", z, false);
  for (size_t q = 0; q < a.states.size(); ++q) {
    if (a.accepting[q]) b.m.accepting[ia.states[static_cast<State>(q)]] = 1;
  }
  for (size_t q = 0; q < c.states.size(); ++q) {
    if (c.accepting[q]) b.m.accepting[ic.states[static_cast<State>(q)]] = 1;
  }
  b.rule(s0, kLambda, z, ia.states[a.start], {z});
  b.rule(s0, kLambda, z, ic.states[c.start], {z});
  return std::move(b.m);
}

MachineSpec concat_m(const MachineSpec& a, const MachineSpec& c) {
  require_oracle_free_npda(a, "concat_m");
  require_oracle_free_npda(c, "concat_m");
  Builder b(a.name + "_cat_" + c.name, Kind::Npda);
  Symbol z = intern_symbol("Z");
  b.m.stack_alphabet.push_back(z);
  b.m.input_alphabet = union_sorted({a.input_alphabet, c.input_alphabet});
  State drain = b.st("dr");
  // First factor: '$'-decisions become silent, acceptance drains the stack
  // and hands over to the second factor.
  Imported ia = import_into(b, a, "1", z, true, drain);
  Imported ic = import_into(b, c, "2", z, false);
  b.m.start = ia.states[a.start];
  for (size_t q = 0; q < c.states.size(); ++q) {
    if (c.accepting[q]) b.m.accepting[ic.states[static_cast<State>(q)]] = 1;
  }
  add_drain(b, drain, z, ic.states[c.start]);
  if (a.is_accepting(a.start)) {
    b.rule(ia.states[a.start], kLambda, z, drain, {z});
  }
  return std::move(b.m);
}

MachineSpec star_m(const MachineSpec& a) {
  require_oracle_free_npda(a, "star_m");
  Builder b(a.name + "_star", Kind::Npda);
  Symbol z = intern_symbol("Z");
  b.m.stack_alphabet.push_back(z);
  b.m.input_alphabet = a.input_alphabet;
  State s0 = b.st("s0"), fin = b.st("fstar"), drain = b.st("dr");
  b.m.start = s0;
  b.m.accepting[fin] = 1;
  Imported ia = import_into(b, a, "1", z, true, drain);
  b.rule(s0, kDollar, z, fin, {z});
  b.rule(s0, kLambda, z, ia.states[a.start], {z});
  State loop = b.st("loop");
  add_drain(b, drain, z, loop);
  b.rule(loop, kLambda, z, ia.states[a.start], {z});
  b.rule(loop, kDollar, z, fin, {z});
  return std::move(b.m);
}

MachineSpec homomorphism_m(const MachineSpec& m,
                           const std::map<Symbol, Word>& h) {
  require_oracle_free_npda(m, "homomorphism_m");
  for (Symbol s : m.input_alphabet) {
    require_pre(h.count(s), "homomorphism_m: no image for '" +
                                symbol_name(s) + "'");
  }
  Builder b(m.name + "_hom", Kind::Npda);
  b.m.stack_alphabet = m.stack_alphabet;
  std::set<Symbol> alpha;
  for (const auto& [s, img] : h) alpha.insert(img.begin(), img.end());
  b.m.input_alphabet = union_sorted({Word(alpha.begin(), alpha.end())});
  for (size_t q = 0; q < m.states.size(); ++q) {
    State s = b.st(m.states[q]);
    if (m.accepting[q]) b.m.accepting[s] = 1;
    if (m.rejecting[q]) b.m.rejecting[s] = 1;
  }
  b.m.start = b.m.state_id(m.states[m.start]);
  auto map = [&](State q) { return b.m.state_id(m.states[q]); };
  int chain = 0;
  for (const Transition& t : m.transitions) {
    bool is_input =
        t.read != kLambda && t.read != kCent && t.read != kDollar;
    if (!is_input) {
      b.rule(map(t.from), t.read, t.top, map(t.to), t.push);
      continue;
    }
    const Word& img = h.at(t.read);
    if (img.empty()) {
      b.rule(map(t.from), kLambda, t.top, map(t.to), t.push);
      continue;
    }
    State cur = map(t.from);
    for (size_t j = 0; j < img.size(); ++j) {
      State next = (j + 1 == img.size())
                       ? map(t.to)
                       : b.fresh_state("h" + std::to_string(chain));
      if (j == 0) {
        b.rule(cur, img[j], t.top, next, t.push);
      } else {
        for (Symbol g : b.m.stack_alphabet) {
          b.rule(cur, img[j], g, next, {g});
        }
      }
      cur = next;
    }
    ++chain;
  }
  return std::move(b.m);
}

MachineSpec inv_homomorphism_m(const MachineSpec& m,
                               const std::map<Symbol, Word>& h) {
  require_oracle_free_npda(m, "inv_homomorphism_m");
  require_pre(!m.reads_cent(),
              "inv_homomorphism_m: left-endmarker rules unsupported");
  Builder b(m.name + "_invhom", Kind::Npda);
  b.m.stack_alphabet = m.stack_alphabet;
  Word domain;
  for (const auto& [s, img] : h) domain.push_back(s);
  b.m.input_alphabet = union_sorted({domain});

  // Composite states: plain q; q mid-simulation of h(sigma) at offset j;
  // q in the two '$' phases.
  auto base = [&](State q) { return b.st(m.states[q]); };
  auto at = [&](State q, Symbol sig, size_t j) {
    return b.st(m.states[q] + "@" + symbol_name(sig) + ":" +
                std::to_string(j));
  };
  auto dphase = [&](State q, int ph) {
    return b.st(m.states[q] + (ph == 0 ? "@d0" : "@d1"));
  };
  b.m.start = base(m.start);

  auto mark = [&](State mstate, State comp) {
    if (m.is_accepting(mstate)) b.m.accepting[comp] = 1;
    if (m.is_rejecting(mstate)) b.m.rejecting[comp] = 1;
  };
  auto m_by = rules_by_state(m);

  for (size_t q0 = 0; q0 < m.states.size(); ++q0) {
    State q = static_cast<State>(q0);
    mark(q, base(q));
    mark(q, dphase(q, 0));
    mark(q, dphase(q, 1));
    if (m.is_halting(q)) continue;
    // lambda-moves at the outer level.
    for (uint32_t ri : m_by[q]) {
      const Transition& t = m.transitions[ri];
      if (t.read == kLambda) {
        b.rule(base(q), kLambda, t.top, base(t.to), t.push);
        b.rule(dphase(q, 0), kLambda, t.top, dphase(t.to, 0), t.push);
        b.rule(dphase(q, 1), kLambda, t.top, dphase(t.to, 1), t.push);
      } else if (t.read == kDollar) {
        b.rule(dphase(q, 0), kLambda, t.top, dphase(t.to, 1), t.push);
      }
    }
    for (Symbol g : m.stack_alphabet) {
      b.rule(base(q), kDollar, g, dphase(q, 0), {g});
    }
    // Reading sigma simulates m over h(sigma).
    for (const auto& [sig, img] : h) {
      if (img.empty()) {
        for (Symbol g : m.stack_alphabet) {
          b.rule(base(q), sig, g, base(q), {g});
        }
        continue;
      }
      for (Symbol g : m.stack_alphabet) {
        b.rule(base(q), sig, g, at(q, sig, 0), {g});
      }
    }
  }
  // Mid-simulation states.
  for (const auto& [sig, img] : h) {
    if (img.empty()) continue;
    for (size_t j = 0; j < img.size(); ++j) {
      for (size_t q0 = 0; q0 < m.states.size(); ++q0) {
        State q = static_cast<State>(q0);
        State src = at(q, sig, j);
        mark(q, src);
        if (m.is_halting(q)) continue;
        for (uint32_t ri : m_by[q]) {
          const Transition& t = m.transitions[ri];
          if (t.read == kLambda) {
            b.rule(src, kLambda, t.top, at(t.to, sig, j), t.push);
          } else if (t.read == img[j]) {
            State next = (j + 1 == img.size()) ? base(t.to)
                                               : at(t.to, sig, j + 1);
            b.rule(src, kLambda, t.top, next, t.push);
          }
        }
      }
    }
  }
  return std::move(b.m);
}

MachineSpec reverse_m(const MachineSpec& m) {
  require_oracle_free_npda(m, "reverse_m");
  require_pre(!m.reads_cent(), "reverse_m: left-endmarker rules unsupported");
  auto v = check_normalized(m);
  require_pre(v.empty(), "reverse_m: '" + m.name + "' is not normalized: " +
                             (v.empty() ? "" : v.front()));
  Builder b(m.name + "_rev", Kind::Npda);
  b.m.stack_alphabet = m.stack_alphabet;
  b.m.input_alphabet = m.input_alphabet;
  Symbol z0 = m.bottom_marker();
  auto map = [&](State q) { return b.st(m.states[q]); };
  State s0 = b.st("r0"), fin = b.st("rf");
  b.m.start = s0;
  b.m.accepting[fin] = 1;
  for (size_t q = 0; q < m.states.size(); ++q) {
    if (m.accepting[q]) {
      b.rule(s0, kLambda, z0, map(static_cast<State>(q)), {z0});
    }
  }
  int chain = 0;
  for (const Transition& t : m.transitions) {
    if (m.is_rejecting(t.to)) continue;
    Symbol rd = t.read == kDollar ? kCent : t.read;
    if (t.push.empty()) {
      // Forward pop of t.top: backwards, push it back over any top.
      for (Symbol g : m.stack_alphabet) {
        if (t.top == z0 && g != z0) continue;  // Z0 stays at the bottom
        b.rule(map(t.to), rd, g, map(t.from), {t.top, g});
      }
    } else {
      State cur = map(t.to);
      for (size_t j = 0; j < t.push.size(); ++j) {
        bool last = j + 1 == t.push.size();
        State next =
            last ? map(t.from) : b.fresh_state("r" + std::to_string(chain));
        Word push = last ? Word{t.top} : Word{};
        b.rule(cur, j == 0 ? rd : kLambda, t.push[j], next, push);
        cur = next;
      }
      ++chain;
    }
  }
  b.rule(map(m.start), kDollar, z0, fin, {z0});
  return std::move(b.m);
}

MachineSpec substitute_m(const MachineSpec& m,
                         const std::map<Symbol, MachineSpec>& s) {
  require_oracle_free_npda(m, "substitute_m");
  for (Symbol sig : m.input_alphabet) {
    require_pre(s.count(sig), "substitute_m: no machine for '" +
                                  symbol_name(sig) + "'");
  }
  Builder b(m.name + "_subst", Kind::Npda);
  Symbol z = intern_symbol("Z");
  b.m.stack_alphabet.push_back(z);

  // Outer machine symbols and states.
  Imported im = import_into(b, m, "m", z, false);
  b.m.start = im.states[m.start];
  for (size_t q = 0; q < m.states.size(); ++q) {
    if (m.accepting[q]) b.m.accepting[im.states[static_cast<State>(q)]] = 1;
  }
  // Remove the imported copies of m's input-reading rules; they are
  // replaced by marker-guarded component simulations.
  {
    std::vector<Transition> kept;
    size_t imported = b.m.transitions.size();
    for (size_t i = 0; i < imported; ++i) {
      const Transition& t = b.m.transitions[i];
      bool is_input =
          t.read != kLambda && t.read != kCent && t.read != kDollar;
      if (!is_input) kept.push_back(t);
    }
    b.m.transitions = std::move(kept);
  }

  std::set<Symbol> alpha;
  for (const auto& [sig, ms] : s) {
    alpha.insert(ms.input_alphabet.begin(), ms.input_alphabet.end());
  }
  b.m.input_alphabet = Word(alpha.begin(), alpha.end());
  std::sort(b.m.input_alphabet.begin(), b.m.input_alphabet.end(),
            [](Symbol a, Symbol c) {
              return symbol_name(a) < symbol_name(c);
            });

  // One marker per (sigma, return state) pair.
  for (const auto& [sig, ms] : s) {
    require_oracle_free_npda(ms, "substitute_m component");
    auto vv = check_normalized(ms);
    require_pre(vv.empty(), "substitute_m: component '" + ms.name +
                                "' is not normalized");
    // Import component states and non-bottom stack symbols once per sigma.
    std::map<Symbol, Symbol> cstack;
    for (size_t i = 1; i < ms.stack_alphabet.size(); ++i) {
      Symbol g = ms.stack_alphabet[i];
      Symbol ng = intern_symbol("s" + symbol_name(sig) + ":" + symbol_name(g));
      cstack[g] = ng;
      b.m.stack_alphabet.push_back(ng);
    }
    std::map<State, State> cstates;
    for (size_t q = 0; q < ms.states.size(); ++q) {
      State cs = b.st("s" + symbol_name(sig) + "." + ms.states[q]);
      cstates[static_cast<State>(q)] = cs;
      if (ms.rejecting[q]) b.m.rejecting[cs] = 1;
    }

    std::vector<Symbol> markers;
    std::map<State, Symbol> marker_for;
    for (const Transition& t : m.transitions) {
      bool is_input =
          t.read != kLambda && t.read != kCent && t.read != kDollar;
      if (!is_input || t.read != sig) continue;
      if (!marker_for.count(t.to)) {
        Symbol k = intern_symbol("K" + symbol_name(sig) + ":" +
                                 m.states[t.to]);
        marker_for[t.to] = k;
        markers.push_back(k);
        b.m.stack_alphabet.push_back(k);
      }
      // Outer sigma-step becomes a silent move that applies the outer
      // stack effect, pushes the marker, and enters the component.
      Word push{marker_for[t.to]};
      for (Symbol g : t.push) push.push_back(im.stack[g]);
      b.rule(im.states[t.from], kLambda, im.stack[t.top],
             cstates[ms.start], push);
    }

    for (const Transition& t : ms.transitions) {
      Symbol rd = t.read == kDollar ? kLambda : t.read;
      if (t.top == ms.bottom_marker()) {
        // The marker is the component's bottom.
        for (Symbol k : markers) {
          Word push;
          for (size_t j = 0; j < t.push.size(); ++j) {
            Symbol g = t.push[j];
            push.push_back(g == ms.bottom_marker() ? k : cstack[g]);
          }
          b.rule(cstates[t.from], rd, k, cstates[t.to], push);
        }
      } else {
        Word push;
        for (Symbol g : t.push) {
          push.push_back(g == ms.bottom_marker() ? g : cstack[g]);
        }
        b.rule(cstates[t.from], rd, cstack[t.top], cstates[t.to], push);
      }
    }
    // Component acceptance pops the marker and resumes the outer machine.
    for (size_t q = 0; q < ms.states.size(); ++q) {
      if (!ms.accepting[q]) continue;
      for (const auto& [ret, k] : marker_for) {
        b.rule(cstates[static_cast<State>(q)], kLambda, k, im.states[ret], {});
      }
    }
  }
  return std::move(b.m);
}

// ---------------------------------------------------------------------------
// Reversal of a turing reducer: guess each oracle answer when leaving the
// (reversed) resumption state, write the reversed query word, then fire a
// real query against the reversed oracle and compare.

MachineSpec reverse_turing(const MachineSpec& m) {
  require_pre(m.mode == OracleMode::Turing && m.query_alphabets.size() == 1,
              "reverse_turing: requires a single-tape turing reducer");
  require_pre(!m.reads_cent(),
              "reverse_turing: left-endmarker rules unsupported");
  Symbol z0 = m.bottom_marker();

  Builder b(m.name + "_rev", Kind::Npda);
  b.m.mode = OracleMode::Turing;
  b.m.input_alphabet = m.input_alphabet;
  b.m.stack_alphabet = m.stack_alphabet;
  b.m.query_alphabets = m.query_alphabets;

  // Pending tag: the answer the backward pass assumed for the query word
  // currently being written (none / 0 / 1).
  auto tagged = [&](State q, int tag) {
    std::string nm = m.states[q];
    if (tag >= 0) nm += tag ? "@y" : "@n";
    return b.st(nm);
  };
  State qq = b.st("rq"), qy = b.st("ry"), qn = b.st("rn");
  b.m.query_state = qq;
  b.m.yes_state = qy;
  b.m.no_state = qn;
  State s0 = b.st("r0"), fin = b.st("rf");
  b.m.start = s0;
  b.m.accepting[fin] = 1;

  // Markers carried on the stack across a query: (checked guess, tag to
  // adopt afterwards).  resume_tag == 2 marks the final query before the
  // backward walk terminates.
  std::map<std::pair<int, int>, Symbol> markers;
  auto marker = [&](int checked, int resume_tag) {
    auto key = std::make_pair(checked, resume_tag);
    auto it = markers.find(key);
    if (it != markers.end()) return it->second;
    Symbol k = intern_symbol("Q" + std::string(checked ? "y" : "n") + ":" +
                             std::to_string(resume_tag));
    markers.emplace(key, k);
    b.m.stack_alphabet.push_back(k);
    return k;
  };

  for (size_t q = 0; q < m.states.size(); ++q) {
    if (m.accepting[q]) {
      b.rule(s0, kLambda, z0, tagged(static_cast<State>(q), -1), {z0});
    }
  }

  int chain = 0;
  // Undo one forward rule: pop its pushes top-first, re-push the matched
  // top, read the mirrored input symbol, re-emit the tape symbol.  The
  // emission order across the whole walk reverses every query word.
  auto mirror_rule = [&](const Transition& t, State src, State target) {
    Symbol rd = t.read == kDollar ? kCent : t.read;
    Symbol e = t.emits[0];
    if (t.push.empty()) {
      for (Symbol g : m.stack_alphabet) {
        if (t.top == z0 && g != z0) continue;
        b.rule(src, rd, g, target, {t.top, g}, {e});
      }
    } else {
      State cur = src;
      for (size_t j = 0; j < t.push.size(); ++j) {
        bool last = j + 1 == t.push.size();
        State next =
            last ? target : b.fresh_state("rv" + std::to_string(chain));
        Word push = last ? Word{t.top} : Word{};
        b.rule(cur, j == 0 ? rd : kLambda, t.push[j], next, push,
               j == 0 ? Word{e} : Word{});
        cur = next;
      }
      ++chain;
    }
  };

  for (const Transition& t : m.transitions) {
    if (m.is_rejecting(t.to)) continue;
    for (int tag : {-1, 0, 1}) {
      mirror_rule(t, tagged(t.to, tag), tagged(t.from, tag));
    }
  }
  // Backward crossings of the answer hop: at the yes/no states' backward
  // side the query word written since the previous crossing is complete.
  // Fire it (when one is pending), adopt the branch's answer as the new
  // pending guess, and continue from the query state's backward side.
  for (int guessed : {0, 1}) {
    State branch = guessed ? m.yes_state : m.no_state;
    for (int tag : {-1, 0, 1}) {
      State src = tagged(branch, tag);
      if (tag < 0) {
        for (Symbol g : m.stack_alphabet) {
          b.rule(src, kLambda, g, tagged(m.query_state, guessed), {g});
        }
      } else {
        Symbol k = marker(tag, guessed);
        State pre = b.fresh_state("rv" + std::to_string(chain++));
        for (Symbol g : m.stack_alphabet) {
          b.rule(src, kLambda, g, pre, {k, g});
        }
        b.rule(pre, kLambda, k, qq, {k});
      }
    }
  }
  // Backward termination at the forward start state: fire any pending
  // query, then consume the right endmarker.
  State rend = b.st("rend");
  for (int tag : {0, 1}) {
    Symbol k = marker(tag, 2);
    State park = b.st("rpark" + std::to_string(tag));
    b.rule(tagged(m.start, tag), kLambda, z0, park, {k, z0});
    b.rule(park, kLambda, k, qq, {k});
  }
  // Marker resolution: the oracle answer must match the checked guess;
  // afterwards the recorded tag applies at the query state's backward side.
  for (const auto& [key, k] : markers) {
    auto [checked, resume_tag] = key;
    State good = checked ? qy : qn;
    State target = resume_tag == 2 ? rend : tagged(m.query_state, resume_tag);
    b.rule(good, kLambda, k, target, {});
    // A mismatched answer has no rule: the path dies.
  }
  b.rule(tagged(m.start, -1), kDollar, z0, fin, {z0});
  b.rule(rend, kDollar, z0, fin, {z0});
  return std::move(b.m);
}

}  // namespace opda
