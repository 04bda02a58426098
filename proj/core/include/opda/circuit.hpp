#pragma once

#include <functional>
#include <iosfwd>
#include <set>
#include <vector>

#include "opda/machine.hpp"
#include "opda/simulate.hpp"

namespace opda {

// Leveled alternating OR/AND circuit over query-string literals.
struct Circuit {
  enum class GateKind { Or, And, Leaf };
  struct Node {
    GateKind kind = GateKind::Leaf;
    std::vector<uint32_t> children;
    Word literal;          // leaf only
    bool positive = true;  // leaf sign
  };
  std::vector<Node> nodes;
  uint32_t top = 0;

  uint32_t add(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<uint32_t>(nodes.size() - 1);
  }
  uint32_t add_leaf(Word literal, bool positive) {
    Node n;
    n.kind = GateKind::Leaf;
    n.literal = std::move(literal);
    n.positive = positive;
    return add(std::move(n));
  }
  uint32_t add_gate(GateKind k, std::vector<uint32_t> children) {
    Node n;
    n.kind = k;
    n.children = std::move(children);
    return add(std::move(n));
  }

  // Gate depth of the circuit (leaves excluded); the empty gate counts.
  int depth() const;
  // Gates strictly alternate OR/AND level to level, with OR on top.
  bool alternation_ok() const;
  size_t bottom_fanin() const;
  size_t max_leaf_len() const;
  std::set<Word> variables() const;  // distinct literal strings
};

bool eval_circuit(const Circuit& c,
                  const std::function<bool(const Word&)>& chi);
bool eval_circuit(const Circuit& c, const std::set<Word>& finite_oracle);

// Swap gate kinds and leaf signs: eval(dual(C), A) = !eval(C, A).
Circuit dual_circuit(const Circuit& c);

// Extracts the query circuit of a relativized decision.  chain holds 1 or
// 2 turing reducers; the 2-chain decides relative to the complement of the
// inner reducer's language, and inner subcircuits are dualized where the
// guessed answer asserts membership in that complement.  For every oracle
// A, eval(circuit, A) equals the relativized decision on x.
Circuit build_query_circuit(const std::vector<MachineSpec>& chain,
                            const Word& x, const RunBounds& b);

// Circuit text format: one gate per line, round-trips bit-exactly.
std::string write_circuit(const Circuit& c);
Circuit parse_circuit(std::istream& in, const std::string& origin);
Circuit parse_circuit_string(const std::string& text,
                             const std::string& origin = "<string>");

}  // namespace opda
