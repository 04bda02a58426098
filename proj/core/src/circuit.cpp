#include "opda/circuit.hpp"

#include <fstream>
#include <sstream>

#include "opda/errors.hpp"
#include "opda/transforms.hpp"

namespace opda {

namespace {

int node_depth(const Circuit& c, uint32_t id, std::vector<int>& memo) {
  if (memo[id] >= 0) return memo[id];
  const auto& n = c.nodes[id];
  if (n.kind == Circuit::GateKind::Leaf) return memo[id] = 0;
  int best = 0;
  for (uint32_t ch : n.children) best = std::max(best, node_depth(c, ch, memo));
  return memo[id] = best + 1;
}

}  // namespace

int Circuit::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> memo(nodes.size(), -1);
  return node_depth(*this, top, memo);
}

bool Circuit::alternation_ok() const {
  if (nodes.empty()) return false;
  if (nodes[top].kind != GateKind::Or) return false;
  // Gates alternate kinds level to level and all leaves share one depth.
  int leaf_level = -1;
  bool ok = true;
  std::function<void(uint32_t, int)> walk = [&](uint32_t id, int level) {
    const Node& n = nodes[id];
    if (n.kind == GateKind::Leaf) {
      if (leaf_level < 0) leaf_level = level;
      if (leaf_level != level) ok = false;
      return;
    }
    for (uint32_t ch : n.children) {
      const Node& cn = nodes[ch];
      if (cn.kind != GateKind::Leaf && cn.kind == n.kind) ok = false;
      walk(ch, level + 1);
    }
  };
  walk(top, 0);
  return ok;
}

size_t Circuit::bottom_fanin() const {
  size_t best = 0;
  for (const Node& n : nodes) {
    if (n.kind == GateKind::Leaf) continue;
    bool bottom = true;
    for (uint32_t ch : n.children) {
      if (nodes[ch].kind != GateKind::Leaf) bottom = false;
    }
    if (bottom) best = std::max(best, n.children.size());
  }
  return best;
}

size_t Circuit::max_leaf_len() const {
  size_t best = 0;
  for (const Node& n : nodes) {
    if (n.kind == GateKind::Leaf) best = std::max(best, n.literal.size());
  }
  return best;
}

std::set<Word> Circuit::variables() const {
  std::set<Word> out;
  for (const Node& n : nodes) {
    if (n.kind == GateKind::Leaf) out.insert(n.literal);
  }
  return out;
}

bool eval_circuit(const Circuit& c,
                  const std::function<bool(const Word&)>& chi) {
  std::vector<int8_t> memo(c.nodes.size(), -1);
  std::function<bool(uint32_t)> go = [&](uint32_t id) -> bool {
    if (memo[id] >= 0) return memo[id] != 0;
    const auto& n = c.nodes[id];
    bool v;
    switch (n.kind) {
      case Circuit::GateKind::Leaf:
        v = chi(n.literal) == n.positive;
        break;
      case Circuit::GateKind::Or:
        v = false;
        for (uint32_t ch : n.children) {
          if (go(ch)) {
            v = true;
            break;
          }
        }
        break;
      case Circuit::GateKind::And:
        v = true;
        for (uint32_t ch : n.children) {
          if (!go(ch)) {
            v = false;
            break;
          }
        }
        break;
    }
    memo[id] = v ? 1 : 0;
    return v;
  };
  return go(c.top);
}

bool eval_circuit(const Circuit& c, const std::set<Word>& finite_oracle) {
  return eval_circuit(
      c, [&](const Word& w) { return finite_oracle.count(w) > 0; });
}

Circuit dual_circuit(const Circuit& c) {
  Circuit d = c;
  for (auto& n : d.nodes) {
    switch (n.kind) {
      case Circuit::GateKind::Or: n.kind = Circuit::GateKind::And; break;
      case Circuit::GateKind::And: n.kind = Circuit::GateKind::Or; break;
      case Circuit::GateKind::Leaf: n.positive = !n.positive; break;
    }
  }
  return d;
}

namespace {

struct Segment {
  bool guess = false;
  Word word;
};

std::vector<Segment> parse_guess_output(const Word& v) {
  Symbol nat = natural_symbol();
  Symbol zero = intern_symbol("0"), one = intern_symbol("1");
  std::vector<Segment> segs;
  size_t i = 0;
  while (i < v.size()) {
    if (v[i] != zero && v[i] != one) {
      throw PreconditionError("malformed guessed-answer encoding");
    }
    Segment s;
    s.guess = v[i] == one;
    ++i;
    while (i < v.size() && v[i] != nat) s.word.push_back(v[i++]);
    if (i == v.size()) {
      throw PreconditionError("guessed-answer encoding misses a separator");
    }
    ++i;  // separator
    segs.push_back(std::move(s));
  }
  return segs;
}

// Leaf lists of a depth-2 OR-of-ANDs circuit: one list per AND child.
std::vector<std::vector<std::pair<Word, bool>>> and_terms(const Circuit& c) {
  std::vector<std::vector<std::pair<Word, bool>>> out;
  const auto& topn = c.nodes[c.top];
  for (uint32_t ch : topn.children) {
    std::vector<std::pair<Word, bool>> leaves;
    for (uint32_t l : c.nodes[ch].children) {
      leaves.emplace_back(c.nodes[l].literal, c.nodes[l].positive);
    }
    out.push_back(std::move(leaves));
  }
  return out;
}

Circuit build_depth2(const MachineSpec& m, const Word& x, const RunBounds& b) {
  MachineSpec n1 = guess_answers(m);
  RunResult r = run_machine(n1, x, b);
  if (r.stats.exceeded_paths > 0 && r.valid_outputs.empty()) {
    throw ResourceExceededError("build_query_circuit: '" + m.name +
                                "' hit its run bounds on '" + render_word(x) +
                                "'");
  }
  Circuit c;
  std::vector<uint32_t> ands;
  for (const OutputTuple& out : r.valid_outputs) {
    auto segs = parse_guess_output(out[0]);
    std::vector<uint32_t> leaves;
    for (const Segment& s : segs) {
      leaves.push_back(c.add_leaf(s.word, s.guess));
    }
    ands.push_back(c.add_gate(Circuit::GateKind::And, std::move(leaves)));
  }
  c.top = c.add_gate(Circuit::GateKind::Or, std::move(ands));
  return c;
}

}  // namespace

Circuit build_query_circuit(const std::vector<MachineSpec>& chain,
                            const Word& x, const RunBounds& b) {
  if (chain.size() == 1) return build_depth2(chain[0], x, b);
  if (chain.size() != 2) {
    throw PreconditionError(
        "build_query_circuit: only chains of length 1 or 2 are supported");
  }
  const MachineSpec& m1 = chain[0];
  const MachineSpec& m2 = chain[1];
  MachineSpec n1 = guess_answers(m1);
  RunResult r = run_machine(n1, x, b);
  if (r.stats.exceeded_paths > 0 && r.valid_outputs.empty()) {
    throw ResourceExceededError("build_query_circuit: '" + m1.name +
                                "' hit its run bounds");
  }

  Circuit c;
  std::vector<uint32_t> mids;
  for (const OutputTuple& out : r.valid_outputs) {
    auto segs = parse_guess_output(out[0]);
    // Fixed OR blocks from guessed-positive segments (dualized inner
    // circuits assert membership in the complement); choice lists from
    // guessed-negative segments get distributed over the conjunction.
    std::vector<std::vector<std::pair<Word, bool>>> fixed_ors;
    std::vector<std::vector<std::vector<std::pair<Word, bool>>>> choice_sets;
    for (const Segment& s : segs) {
      Circuit inner = build_depth2(
          m2, s.word, RunBounds::for_input_length(s.word.size()));
      auto terms = and_terms(inner);
      if (s.guess) {
        // dual: one OR of flipped leaves per inner AND term
        for (auto& t : terms) {
          for (auto& lf : t) lf.second = !lf.second;
          fixed_ors.push_back(std::move(t));
        }
      } else {
        choice_sets.push_back(std::move(terms));
      }
    }
    // Enumerate one inner AND term per guessed-negative segment.
    std::vector<size_t> odo(choice_sets.size(), 0);
    bool possible = true;
    for (const auto& cs : choice_sets) possible = possible && !cs.empty();
    while (possible) {
      std::vector<uint32_t> and_children;
      for (const auto& leaves : fixed_ors) {
        std::vector<uint32_t> kids;
        for (const auto& [w, pos] : leaves) kids.push_back(c.add_leaf(w, pos));
        and_children.push_back(
            c.add_gate(Circuit::GateKind::Or, std::move(kids)));
      }
      for (size_t i = 0; i < choice_sets.size(); ++i) {
        for (const auto& [w, pos] : choice_sets[i][odo[i]]) {
          and_children.push_back(
              c.add_gate(Circuit::GateKind::Or, {c.add_leaf(w, pos)}));
        }
      }
      mids.push_back(
          c.add_gate(Circuit::GateKind::And, std::move(and_children)));
      if (choice_sets.empty()) break;
      size_t i = choice_sets.size();
      bool done = false;
      while (i > 0) {
        --i;
        if (++odo[i] < choice_sets[i].size()) break;
        odo[i] = 0;
        if (i == 0) done = true;
      }
      if (done) break;
    }
  }
  c.top = c.add_gate(Circuit::GateKind::Or, std::move(mids));
  return c;
}

std::string write_circuit(const Circuit& c) {
  std::ostringstream os;
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i];
    if (n.kind == Circuit::GateKind::Leaf) {
      os << "leaf " << i << ' ' << (n.positive ? '+' : '-') << " \""
         << render_word(n.literal) << "\"\n";
    } else {
      os << "gate " << i << ' '
         << (n.kind == Circuit::GateKind::Or ? "OR" : "AND");
      for (uint32_t ch : n.children) os << ' ' << ch;
      os << '\n';
    }
  }
  os << "top " << c.top << '\n';
  return os.str();
}

Circuit parse_circuit(std::istream& in, const std::string& origin) {
  Circuit c;
  std::string line;
  int lineno = 0;
  bool saw_top = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "leaf") {
      size_t id;
      std::string sign;
      if (!(ls >> id >> sign)) {
        throw ParseError(origin, lineno, "malformed leaf line");
      }
      std::string rest;
      std::getline(ls, rest);
      auto q1 = rest.find('"');
      auto q2 = rest.rfind('"');
      if (q1 == std::string::npos || q2 <= q1) {
        throw ParseError(origin, lineno, "leaf literal must be quoted");
      }
      std::string lit = rest.substr(q1 + 1, q2 - q1 - 1);
      Word w;
      if (lit.find(' ') != std::string::npos) {
        std::istringstream ts(lit);
        std::string tok;
        while (ts >> tok) w.push_back(intern_symbol(tok));
      } else {
        for (char ch : lit) w.push_back(intern_symbol(std::string(1, ch)));
      }
      if (c.nodes.size() <= id) c.nodes.resize(id + 1);
      Circuit::Node n;
      n.kind = Circuit::GateKind::Leaf;
      n.literal = std::move(w);
      n.positive = sign == "+";
      c.nodes[id] = std::move(n);
    } else if (head == "gate") {
      size_t id;
      std::string kind;
      if (!(ls >> id >> kind)) {
        throw ParseError(origin, lineno, "malformed gate line");
      }
      Circuit::Node n;
      if (kind == "OR") n.kind = Circuit::GateKind::Or;
      else if (kind == "AND") n.kind = Circuit::GateKind::And;
      else throw ParseError(origin, lineno, "unknown gate kind '" + kind + "'");
      uint32_t ch;
      while (ls >> ch) n.children.push_back(ch);
      if (c.nodes.size() <= id) c.nodes.resize(id + 1);
      c.nodes[id] = std::move(n);
    } else if (head == "top") {
      if (!(ls >> c.top)) throw ParseError(origin, lineno, "malformed top line");
      saw_top = true;
    } else {
      throw ParseError(origin, lineno, "unknown directive '" + head + "'");
    }
  }
  if (!saw_top) throw ParseError(origin, lineno, "missing top line");
  if (c.top >= c.nodes.size()) {
    throw ParseError(origin, lineno, "top gate out of range");
  }
  return c;
}

Circuit parse_circuit_string(const std::string& text,
                             const std::string& origin) {
  std::istringstream in(text);
  return parse_circuit(in, origin);
}

}  // namespace opda
