#include "opda/ppda.hpp"

#include <array>
#include <functional>

#include "opda/errors.hpp"

namespace opda {

namespace {

struct ProbWalker {
  const MachineSpec& m;
  const Word& w;
  const RunBounds& b;
  std::vector<std::vector<uint32_t>> by_state;
  Word stack;
  size_t pos;
  uint64_t steps = 0;
  Rational accept = 0, reject = 0;
  uint64_t paths = 0;
  std::vector<std::pair<State, Word>> window;  // repeat detection

  ProbWalker(const MachineSpec& mm, const Word& ww, const RunBounds& bb)
      : m(mm), w(ww), b(bb) {
    for (Symbol s : w) {
      if (!m.in_input_alphabet(s)) {
        throw InputAlphabetError("input symbol '" + symbol_name(s) +
                                 "' outside the alphabet of '" + m.name + "'");
      }
    }
    by_state.resize(m.states.size());
    for (uint32_t i = 0; i < m.transitions.size(); ++i) {
      by_state[m.transitions[i].from].push_back(i);
    }
    pos = m.reads_cent() ? 0 : 1;
    if (m.has_stack()) stack.push_back(m.bottom_marker());
  }

  Symbol cell(size_t p) const {
    size_t n = w.size();
    if (p == 0) return kCent;
    if (p <= n) return w[p - 1];
    if (p == n + 1) return kDollar;
    return kLambda;
  }

  bool applicable(const Transition& t) const {
    if (m.has_stack() && (stack.empty() || stack.back() != t.top)) return false;
    if (t.read == kLambda) return true;
    Symbol c = cell(pos);
    return c != kLambda && c == t.read;
  }

  void run(State q, const Rational& weight) {
    if (m.is_accepting(q)) {
      accept += weight;
      paths++;
      return;
    }
    if (m.is_rejecting(q)) {
      reject += weight;
      paths++;
      return;
    }
    if (steps >= b.max_steps || stack.size() > b.max_stack_height) {
      throw ResourceExceededError("ppda '" + m.name +
                                  "' hit its run bounds on '" +
                                  render_word(w) + "'");
    }
    std::vector<uint32_t> app;
    for (uint32_t i : by_state[q]) {
      if (applicable(m.transitions[i])) app.push_back(i);
    }
    if (app.empty()) {
      reject += weight;  // path dies without halting
      paths++;
      return;
    }
    if (app.size() > 1 || m.transitions[app[0]].group >= 0) {
      int32_t g = m.transitions[app[0]].group;
      Rational sum = 0;
      for (uint32_t i : app) {
        if (m.transitions[i].group != g || g < 0) {
          throw PreconditionError(
              "ppda '" + m.name + "': nondeterministic choice at state '" +
              m.states[q] + "' is not a probabilistic group");
        }
        sum += m.weights[i];
      }
      if (sum != 1) {
        throw PreconditionError("ppda '" + m.name + "': applicable group '" +
                                m.group_ids[g] + "' weights sum to " +
                                rational_str(sum));
      }
      for (uint32_t i : app) step(i, weight * m.weights[i]);
    } else {
      step(app[0], weight);
    }
  }

  void step(uint32_t idx, const Rational& weight) {
    const Transition& t = m.transitions[idx];
    size_t old_pos = pos;
    bool progress = t.read != kLambda;
    if (progress) pos++;
    Symbol popped = kLambda;
    size_t pushed = 0;
    if (m.has_stack()) {
      popped = stack.back();
      stack.pop_back();
      for (size_t i = t.push.size(); i-- > 0;) stack.push_back(t.push[i]);
      pushed = t.push.size();
    }
    steps++;
    size_t saved = window.size();
    if (progress) {
      window.emplace_back(kNoState, Word{});  // progress marker
    } else {
      for (size_t i = window.size(); i-- > 0;) {
        const auto& [s, st] = window[i];
        if (s == kNoState) break;
        if (s == t.to && st == stack) {
          throw ResourceExceededError("ppda '" + m.name +
                                      "' repeats a configuration on '" +
                                      render_word(w) + "'");
        }
      }
      window.emplace_back(t.to, stack);
    }

    run(t.to, weight);

    window.resize(saved);
    steps--;
    if (m.has_stack()) {
      stack.resize(stack.size() - pushed);
      stack.push_back(popped);
    }
    pos = old_pos;
  }
};

}  // namespace

ProbabilityResult exact_acceptance_probability(const MachineSpec& p,
                                               const Word& w,
                                               const RunBounds& b) {
  if (!p.query_alphabets.empty()) {
    throw PreconditionError("ppda simulation does not support query tapes");
  }
  ProbWalker walker(p, w, b);
  walker.run(p.start, Rational(1));
  ProbabilityResult r;
  r.accept = walker.accept;
  r.reject = walker.reject;
  r.paths = walker.paths;
  return r;
}

// ---------------------------------------------------------------------------
// The count-equality machine.

Word equal6_alphabet() {
  Word a;
  for (int i = 1; i <= 6; ++i) a.push_back(intern_symbol("a" + std::to_string(i)));
  a.push_back(hash_symbol());
  return a;
}

Word equal6_word(const std::vector<int>& counts) {
  Word w;
  for (int i = 0; i < 6; ++i) {
    Symbol s = intern_symbol("a" + std::to_string(i + 1));
    for (int c = 0; c < counts[i]; ++c) w.push_back(s);
  }
  return w;
}

bool equal6_reference(const Word& w) {
  std::array<long, 6> counts{};
  Symbol sep = hash_symbol();
  for (Symbol s : w) {
    if (s == sep) continue;
    const std::string& n = symbol_name(s);
    if (n.size() == 2 && n[0] == 'a' && n[1] >= '1' && n[1] <= '6') {
      counts[n[1] - '1']++;
    } else {
      return false;
    }
  }
  for (int i = 1; i < 6; ++i) {
    if (counts[i] != counts[0]) return false;
  }
  return true;
}

MachineSpec equal6_machine(int N) {
  if (N < 2) throw PreconditionError("equal6_machine: N must be at least 2");
  MachineSpec m;
  m.name = "equal6_N" + std::to_string(N);
  m.kind = Kind::Npda;
  m.input_alphabet = equal6_alphabet();
  Symbol z = intern_symbol("Z");
  Symbol one = intern_symbol("1");
  Symbol neg = intern_symbol("m");
  m.stack_alphabet = {z, one, neg};
  Symbol sep = hash_symbol();
  std::array<Symbol, 6> sym;
  for (int i = 0; i < 6; ++i) sym[i] = intern_symbol("a" + std::to_string(i + 1));

  const int base = N + 1;  // capped counts 0..N per symbol
  int64_t small_count = 1;
  for (int i = 0; i < 6; ++i) small_count *= base;

  // State layout: [0, small_count): capped count vectors;
  // then accept, reject, 25 draw states, and pop/annihilation chains.
  auto vec_id = [&](const std::array<int, 6>& v) {
    int64_t id = 0;
    for (int i = 5; i >= 0; --i) id = id * base + v[i];
    return static_cast<State>(id);
  };
  std::vector<std::string> names(small_count);
  {
    std::array<int, 6> v{};
    for (int64_t id = 0; id < small_count; ++id) {
      std::string nm = "c";
      for (int i = 0; i < 6; ++i) nm += std::to_string(v[i]);
      names[id] = std::move(nm);
      for (int i = 0; i < 6; ++i) {
        if (++v[i] < base) break;
        v[i] = 0;
      }
    }
  }
  m.states = std::move(names);
  auto add_named = [&](const std::string& nm) {
    m.states.push_back(nm);
    return static_cast<State>(m.states.size() - 1);
  };
  State acc = add_named("acc");
  State rej = add_named("rej");
  std::vector<State> draw(N * N);
  for (int x = 1; x <= N; ++x) {
    for (int y = 1; y <= N; ++y) {
      draw[(x - 1) * N + (y - 1)] =
          add_named("g" + std::to_string(x) + "_" + std::to_string(y));
    }
  }
  // Chain states for multi-symbol pops/annihilations in the drawn phase:
  // (x, y, sign, remaining).
  std::map<std::tuple<int, int, int, int>, State> chains;
  std::function<State(int, int, int, int)> chain = [&](int x, int y, int sign,
                                                       int rem) {
    auto key = std::make_tuple(x, y, sign, rem);
    auto it = chains.find(key);
    if (it != chains.end()) return it->second;
    State s = add_named("g" + std::to_string(x) + "_" + std::to_string(y) +
                        (sign > 0 ? "p" : "q") + std::to_string(rem));
    chains.emplace(key, s);
    return s;
  };

  auto rule = [&](State f, Symbol rd, Symbol top, State to, Word push,
                  int32_t group = -1, Rational weight = 0) {
    Transition t;
    t.from = f;
    t.read = rd;
    t.top = top;
    t.to = to;
    t.push = std::move(push);
    t.group = group;
    m.transitions.push_back(std::move(t));
    m.weights.push_back(std::move(weight));
  };

  auto repeat_push = [&](int count, Symbol unit, Symbol below) {
    Word p(count, unit);
    p.push_back(below);
    return p;
  };

  const Rational draw_weight = Rational(1) / (N * N);
  static const int coeff_sign[6] = {+1, +1, +1, -1, -1, -1};

  // Materialize every chain state up front; links reference one another.
  for (int x = 1; x <= N; ++x) {
    for (int y = 1; y <= N; ++y) {
      for (int sign : {+1, -1}) {
        for (int rem = 1; rem < N; ++rem) chain(x, y, sign, rem);
      }
    }
  }

  // Drawn phase: state knows (x, y); stack holds |balance| units (1 for
  // positive, m for deficit).
  for (int x = 1; x <= N; ++x) {
    for (int y = 1; y <= N; ++y) {
      State g = draw[(x - 1) * N + (y - 1)];
      int coeff_mag[6] = {1, x, y, 1, x, y};
      for (int i = 0; i < 6; ++i) {
        int wgt = coeff_mag[i];
        bool push_units = coeff_sign[i] > 0;
        Symbol mine = push_units ? one : neg;
        Symbol other = push_units ? neg : one;
        // Same-direction tops: pile on.
        rule(g, sym[i], z, g, repeat_push(wgt, mine, z));
        rule(g, sym[i], mine, g, repeat_push(wgt, mine, mine));
        // Opposite-direction top: annihilate one unit per step.
        State next = wgt == 1 ? g : chain(x, y, push_units ? +1 : -1, wgt - 1);
        rule(g, sym[i], other, next, {});
      }
      rule(g, sep, z, g, {z});
      rule(g, sep, one, g, {one});
      rule(g, sep, neg, g, {neg});
      rule(g, kDollar, z, acc, {z});
      rule(g, kDollar, one, rej, {one});
      rule(g, kDollar, neg, rej, {neg});
    }
  }
  // Annihilation chains: keep cancelling, or pile the remainder once the
  // opposing units run out.
  for (const auto& [key, s] : chains) {
    auto [x, y, sign, rem] = key;
    State g = draw[(x - 1) * N + (y - 1)];
    Symbol mine = sign > 0 ? one : neg;
    Symbol other = sign > 0 ? neg : one;
    State next = rem == 1 ? g : chain(x, y, sign, rem - 1);
    rule(s, kLambda, other, next, {});
    rule(s, kLambda, z, g, repeat_push(rem, mine, z));
  }
  m.accepting.assign(m.states.size(), 0);
  m.rejecting.assign(m.states.size(), 0);
  m.accepting[acc] = 1;
  m.rejecting[rej] = 1;

  // Small phase: exact capped counting, no stack activity.  The draw
  // happens at the first overflow, initializing the stack to the exact
  // balance accumulated so far.
  {
    std::array<int, 6> v{};
    for (int64_t id = 0; id < small_count; ++id) {
      State sv = static_cast<State>(id);
      for (int i = 0; i < 6; ++i) {
        if (v[i] < N) {
          std::array<int, 6> v2 = v;
          v2[i]++;
          rule(sv, sym[i], z, vec_id(v2), {z});
        } else {
          // Overflow: exact counts are v with v[i] -> N+1.
          int64_t c[6];
          for (int j = 0; j < 6; ++j) c[j] = v[j];
          c[i] = N + 1;
          int32_t group = static_cast<int32_t>(m.group_ids.size());
          m.group_ids.push_back("d" + std::to_string(id) + "_" +
                                std::to_string(i));
          for (int x = 1; x <= N; ++x) {
            for (int y = 1; y <= N; ++y) {
              int64_t f = (c[0] - c[3]) + x * (c[1] - c[4]) + y * (c[2] - c[5]);
              Word push;
              if (f > 0) push = repeat_push(static_cast<int>(f), one, z);
              else if (f < 0) push = repeat_push(static_cast<int>(-f), neg, z);
              else push = {z};
              rule(sv, sym[i], z, draw[(x - 1) * N + (y - 1)], std::move(push),
                   group, draw_weight);
            }
          }
        }
      }
      rule(sv, sep, z, sv, {z});
      bool equal = true;
      for (int i = 1; i < 6; ++i) equal = equal && v[i] == v[0];
      rule(sv, kDollar, z, equal ? acc : rej, {z});
      for (int i = 0; i < 6; ++i) {
        if (++v[i] < base) break;
        v[i] = 0;
      }
    }
  }
  m.start = vec_id({0, 0, 0, 0, 0, 0});
  return m;
}

ErrorScanReport error_scan(int lo, int hi, const MachineSpec& machine) {
  ErrorScanReport rep;
  const Rational twelve_25(12, 25), one_third(1, 3);
  std::vector<int> counts(6, lo);
  while (true) {
    Word w = equal6_word(counts);
    RunBounds b = RunBounds::for_input_length(w.size());
    ProbabilityResult pr = exact_acceptance_probability(machine, w, b);
    if (pr.accept + pr.reject != 1) rep.sums_exact = false;
    bool member = true;
    for (int i = 1; i < 6; ++i) member = member && counts[i] == counts[0];
    if (member) {
      rep.members++;
      if (pr.accept != 1) rep.members_all_one = false;
    } else {
      rep.nonmembers++;
      if (pr.accept > rep.max_nonmember_probability) {
        rep.max_nonmember_probability = pr.accept;
        rep.argmax_counts = counts;
      }
      if (pr.accept > twelve_25) {
        rep.over_12_25++;
        rep.within_12_25 = false;
      }
      if (pr.accept > one_third) {
        rep.over_1_3++;
        rep.within_1_3 = false;
      }
    }
    int i = 5;
    while (i >= 0 && ++counts[i] > hi) counts[i--] = lo;
    if (i < 0) break;
  }
  return rep;
}

}  // namespace opda
