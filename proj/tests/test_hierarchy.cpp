#include "doctest.h"

#include <random>

#include "opda/circuit.hpp"
#include "opda/errors.hpp"
#include "opda/eval.hpp"
#include "opda/hierarchy.hpp"
#include "opda/machine_io.hpp"
#include "opda/transforms.hpp"
#include "opda/zoo.hpp"

using namespace opda;

namespace {

MachineSpec load(const std::string& rel) {
  return parse_machine_file(zoo::machine_dir() / rel);
}

RunBounds bfor(const Word& w) { return RunBounds::for_input_length(w.size()); }

}  // namespace

TEST_CASE("level expression shapes") {
  auto base = std::make_shared<const MachineSpec>(load("samples/anbn.m"));
  auto mt = std::make_shared<const MachineSpec>(load("samples/t_pass.m"));

  ExprPtr s1 = sigma_level_expr({}, machine_expr(base));
  CHECK(s1->tag == ExprTag::Machine);

  ExprPtr s2 = sigma_level_expr({mt}, machine_expr(base));
  REQUIRE(s2->tag == ExprTag::Turing);
  REQUIRE(s2->child->tag == ExprTag::Complement);
  CHECK(s2->child->child->tag == ExprTag::Machine);

  ExprPtr c1 = cfl_conj_expr({machine_expr(base)});
  CHECK(c1->tag == ExprTag::Machine);

  ExprPtr a = machine_expr(base), b = machine_expr(base);
  ExprPtr bh2 = bh_level_expr(2, {a, b});
  REQUIRE(bh2->tag == ExprTag::Intersect);
  CHECK(bh2->child2->tag == ExprTag::Complement);
}

TEST_CASE("sigma level one decides like the base machine") {
  Evaluator ev;
  MachineSpec base = load("samples/anbn.m");
  ExprPtr s1 = sigma_level_expr({}, machine_expr(base));
  for (const Word& w : enumerate_words(base.input_alphabet, 6)) {
    CHECK(ev.member(s1, w) ==
          (accepts(base, w, bfor(w)) == Verdict::Accept));
  }
}

TEST_CASE("decomposition templates") {
  BhDecomposition d4 = decompose_cfl_k(4);
  CHECK(d4.pairs == 2);
  CHECK_FALSE(d4.trailing);
  BhDecomposition d2 = decompose_cfl_k(2);
  CHECK(d2.pairs == 1);
  CHECK_FALSE(d2.trailing);
  BhDecomposition d5 = decompose_cfl_k(5);
  CHECK(d5.pairs == 2);
  CHECK(d5.trailing);

  // Filled template shapes: level 4 is a union of two difference pairs,
  // level 5 carries a trailing plain component.
  std::vector<ExprPtr> comps;
  for (int i = 0; i < 5; ++i) comps.push_back(dyck_expr(1));
  ExprPtr f4 = fill_decomposition(d4, {comps.begin(), comps.begin() + 4});
  REQUIRE(f4->tag == ExprTag::Union);
  CHECK(f4->child->tag == ExprTag::Intersect);
  CHECK(f4->child2->tag == ExprTag::Intersect);
  ExprPtr f5 = fill_decomposition(d5, comps);
  REQUIRE(f5->tag == ExprTag::Union);
  CHECK(f5->child->tag == ExprTag::Union);
  CHECK(f5->child2->tag == ExprTag::Dyck);
}

TEST_CASE("decomposition agrees with nesting on a decreasing chain") {
  // Components L_i = words with at least i ones form a decreasing chain,
  // for which the alternating nest equals the union of differences.
  Evaluator ev;
  Word alpha = make_word({"0", "1"});
  Symbol one = intern_symbol("1");
  auto level_set = [&](size_t k) {
    std::set<Word> s;
    for (const Word& w : enumerate_words(alpha, 6)) {
      size_t ones = 0;
      for (Symbol sy : w) {
        if (sy == one) ones++;
      }
      if (ones >= k) s.insert(w);
    }
    return finite_expr(std::move(s));
  };
  for (int level : {2, 4, 5}) {
    std::vector<ExprPtr> comps;
    for (int i = 1; i <= level; ++i) comps.push_back(level_set(i));
    ExprPtr nested = bh_level_expr(level, comps);
    ExprPtr split = fill_decomposition(decompose_cfl_k(level), comps);
    for (const Word& w : enumerate_words(alpha, 6)) {
      INFO("level " << level << " on " << render_word(w));
      CHECK(ev.member(nested, w) == ev.member(split, w));
    }
  }
}

TEST_CASE("quantified evaluation over the replay language") {
  Evaluator ev;
  MachineSpec m = load("samples/anbn.m");
  EncodePathResult ep = encode_path_reducer(m);
  LinearPoly p{1, 1};
  for (const Word& x : enumerate_words(m.input_alphabet, 5)) {
    INFO(render_word(x));
    CHECK(eval_quantified(ep.replayer, p, 1, x, ev) ==
          (accepts(m, x, bfor(x)) == Verdict::Accept));
  }
}

TEST_CASE("quantified evaluation edge cases") {
  Evaluator ev;
  // A machine over two-track columns that accepts nothing.
  MachineSpec nothing = parse_machine_string(
      "machine zero\nkind npda\ninput 0|a 1|a\nstack Z\nstart q0\naccept\n"
      "reject qr\n"
      "trans q0 0|a Z -> q0 ; push Z\n"
      "trans q0 1|a Z -> q0 ; push Z\n"
      "trans q0 <dollar> Z -> qr ; push Z\n"
      "end\n",
      "zero.m");
  LinearPoly p{1, 0};
  for (const Word& x : enumerate_words(make_word({"0", "1"}), 3)) {
    CHECK_FALSE(eval_quantified(nothing, p, 1, x, ev));
  }

  // A machine accepting every padded pairing of the input with any
  // witness: satisfiable exactly when the length bound allows x itself.
  MachineSpec anyw = parse_machine_string(
      "machine anyw\nkind npda\ninput 0|a 1|a\nstack Z\nstart q0\naccept qf\n"
      "reject\n"
      "trans q0 0|a Z -> q0 ; push Z\n"
      "trans q0 1|a Z -> q0 ; push Z\n"
      "trans q0 <dollar> Z -> qf ; push Z\n"
      "end\n",
      "anyw.m");
  Word x = make_word({"0", "1", "1"});
  CHECK(eval_quantified(anyw, LinearPoly{1, 0}, 1, x, ev));
  CHECK_FALSE(eval_quantified(anyw, LinearPoly{0, 2}, 1, x, ev));
}

TEST_CASE("quantifier budget violations are explicit errors") {
  Evaluator ev;
  MachineSpec m = load("samples/anbn.m");
  EncodePathResult ep = encode_path_reducer(m);
  Word x = make_word({"0", "0", "0"});
  CHECK_THROWS_AS(eval_quantified(ep.replayer, LinearPoly{20, 0}, 1, x, ev),
                  EnumerationBudgetError);
}

TEST_CASE("hand-built circuit evaluation and duality") {
  Circuit c;
  uint32_t l1 = c.add_leaf(make_word({"0"}), true);
  uint32_t l2 = c.add_leaf(make_word({"1"}), false);
  uint32_t a1 = c.add_gate(Circuit::GateKind::And, {l1});
  uint32_t a2 = c.add_gate(Circuit::GateKind::And, {l2});
  c.top = c.add_gate(Circuit::GateKind::Or, {a1, a2});

  std::set<Word> oracle = {make_word({"0"}), make_word({"1"})};
  CHECK(eval_circuit(c, oracle));
  CHECK(c.alternation_ok());
  CHECK(c.depth() == 2);

  Circuit d = dual_circuit(c);
  CHECK(eval_circuit(d, oracle) == !eval_circuit(c, oracle));
  Circuit dd = dual_circuit(d);
  CHECK(eval_circuit(dd, oracle) == eval_circuit(c, oracle));
  CHECK(write_circuit(dd) == write_circuit(c));
}

TEST_CASE("circuit text format round trips") {
  MachineSpec t = load("samples/t_two.m");
  Word x = make_word({"0", "1"});
  Circuit c = build_query_circuit({t}, x, bfor(x));
  std::string once = write_circuit(c);
  Circuit back = parse_circuit_string(once, "round");
  CHECK(write_circuit(back) == once);
}

TEST_CASE("zero-query acceptors compile to the constant-true circuit") {
  MachineSpec t = parse_machine_string(
      "machine tyes\nkind npda\noracle turing\ninput 0\nstack Z\nquery 0\n"
      "start q0\naccept qf\nreject qr\nquery-state qq\nyes-state qy\n"
      "no-state qn\n"
      "trans q0 0 Z -> q0 ; push Z ; emit -\n"
      "trans q0 <dollar> Z -> qf ; push Z ; emit -\n"
      "end\n",
      "tyes.m");
  Word x = make_word({"0"});
  Circuit c = build_query_circuit({t}, x, bfor(x));
  REQUIRE(c.nodes[c.top].kind == Circuit::GateKind::Or);
  REQUIRE(c.nodes[c.top].children.size() == 1);
  CHECK(c.nodes[c.nodes[c.top].children[0]].children.empty());
  CHECK(eval_circuit(c, std::set<Word>{}));
  CHECK(eval_circuit(c, std::set<Word>{x}));
}

TEST_CASE("single-query reducer yields one positive literal") {
  MachineSpec t = load("samples/t_pass.m");
  Word x = make_word({"0", "1"});
  Circuit c = build_query_circuit({t}, x, bfor(x));
  REQUIRE(c.nodes[c.top].children.size() == 1);
  const auto& andn = c.nodes[c.nodes[c.top].children[0]];
  REQUIRE(andn.children.size() == 1);
  const auto& leaf = c.nodes[andn.children[0]];
  CHECK(leaf.positive);
  CHECK(leaf.literal == x);
}

TEST_CASE("depth-two circuits decide like the turing reducer") {
  Evaluator ev;
  MachineSpec t = load("samples/t_two.m");
  Word theta = make_word({"0", "1"});
  std::vector<Word> universe = enumerate_words(theta, 4);
  std::mt19937 rng(20240811);
  for (int trial = 0; trial < 30; ++trial) {
    std::set<Word> oracle;
    for (const Word& w : universe) {
      if (rng() % 2) oracle.insert(w);
    }
    std::set<Word> owords(oracle.begin(), oracle.end());
    ExprPtr fin = finite_expr(std::move(owords));
    for (const Word& x : enumerate_words(t.input_alphabet, 4)) {
      Circuit c = build_query_circuit({t}, x, bfor(x));
      CHECK(c.alternation_ok());
      CHECK(eval_circuit(c, oracle) == ev.decide_turing(t, fin, x, bfor(x)));
    }
  }
}

TEST_CASE("depth-three circuits decide the two-reducer chain") {
  Evaluator ev;
  MachineSpec m1 = load("samples/t_pass.m");
  MachineSpec m2 = load("samples/t_two.m");
  Word theta = make_word({"0", "1"});
  std::vector<Word> universe = enumerate_words(theta, 4);
  std::mt19937 rng(20240812);
  for (int trial = 0; trial < 10; ++trial) {
    std::set<Word> oracle;
    for (const Word& w : universe) {
      if (rng() % 2) oracle.insert(w);
    }
    ExprPtr fin = finite_expr(std::set<Word>(oracle));
    ExprPtr ref = turing_expr(
        std::make_shared<const MachineSpec>(m1),
        complement_expr(turing_expr(std::make_shared<const MachineSpec>(m2),
                                    fin)));
    for (const Word& x : enumerate_words(m1.input_alphabet, 3)) {
      Circuit c = build_query_circuit({m1, m2}, x, bfor(x));
      CHECK(c.depth() <= 3);
      CHECK(eval_circuit(c, oracle) == ev.member(ref, x));
      Circuit d = dual_circuit(c);
      CHECK(eval_circuit(d, oracle) == !eval_circuit(c, oracle));
    }
  }
}

TEST_CASE("chains outside one or two reducers are rejected") {
  MachineSpec t = load("samples/t_pass.m");
  Word x;
  CHECK_THROWS_AS(build_query_circuit({t, t, t}, x, bfor(x)),
                  PreconditionError);
}
