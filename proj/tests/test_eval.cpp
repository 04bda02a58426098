#include "doctest.h"

#include "opda/errors.hpp"
#include "opda/eval.hpp"
#include "opda/machine_io.hpp"
#include "opda/transforms.hpp"
#include "opda/zoo.hpp"

using namespace opda;

namespace {

MachineSpec load(const std::string& rel) {
  return parse_machine_file(zoo::machine_dir() / rel);
}

Word wd(const std::string& text, const Word& alphabet) {
  return parse_word(text, alphabet);
}

}  // namespace

TEST_CASE("dyck membership and complement") {
  Evaluator ev;
  ExprPtr d1 = dyck_expr(1);
  Word w = make_word({"a1", "a1'"});
  CHECK(ev.member(d1, w));
  CHECK_FALSE(ev.member(complement_expr(d1), w));
  CHECK_FALSE(ev.member(d1, make_word({"a1'", "a1"})));
}

TEST_CASE("many-one membership through the doubled-word reduction") {
  Evaluator ev;
  ExprPtr dup2 = zoo::construction_expr("dup2");
  Word alpha = make_word({"0", "1"});
  CHECK(ev.member(dup2, wd("0101", alpha)));
  CHECK_FALSE(ev.member(dup2, wd("010", alpha)));
  CHECK_FALSE(ev.member(dup2, wd("0110", alpha)));
  CHECK(ev.member(dup2, wd("", alpha)));

  ExprPtr dup3 = zoo::construction_expr("dup3");
  CHECK(ev.member(dup3, wd("010101", alpha)));
  CHECK_FALSE(ev.member(dup3, wd("0101", alpha)));
}

TEST_CASE("decide_many_one cross-checked by set intersection") {
  Evaluator ev;
  MachineSpec red = load("zoo/dup2_red.m");
  ExprPtr oracle = machine_expr(load("zoo/eqrev.m"));
  for (const Word& x : enumerate_words(red.input_alphabet, 6)) {
    bool direct = ev.decide_many_one(red, oracle, x,
                                     RunBounds::for_input_length(x.size()));
    bool via_set = false;
    for (const auto& tup :
         valid_outputs(red, x, RunBounds::for_input_length(x.size()))) {
      if (ev.member(oracle, tup[0])) via_set = true;
    }
    CHECK(direct == via_set);
  }
}

TEST_CASE("turing reducer with finite oracles") {
  Evaluator ev;
  MachineSpec t = load("samples/t_pass.m");
  Word alpha = t.input_alphabet;
  ExprPtr just01 = finite_expr({wd("01", alpha)});
  RunBounds b = RunBounds::for_input_length(2);
  CHECK(ev.decide_turing(t, just01, wd("01", alpha), b));
  CHECK_FALSE(ev.decide_turing(t, complement_expr(just01), wd("01", alpha), b));
  CHECK_FALSE(ev.decide_turing(t, just01, wd("10", alpha), b));
}

TEST_CASE("flipped answers with the complemented oracle agree") {
  Evaluator ev;
  for (const char* rel : {"samples/t_pass.m", "samples/t_two.m"}) {
    MachineSpec t = load(rel);
    MachineSpec tf = flip_answers(t);
    CHECK(validate(tf).empty());
    ExprPtr a = machine_expr(load("samples/anbn.m"));
    ExprPtr na = complement_expr(a);
    for (const Word& x : enumerate_words(t.input_alphabet, 6)) {
      RunBounds b = RunBounds::for_input_length(x.size());
      CHECK(ev.decide_turing(t, a, x, b) == ev.decide_turing(tf, na, x, b));
    }
  }
}

TEST_CASE("flip_answers is an involution") {
  MachineSpec t = load("samples/t_two.m");
  MachineSpec back = flip_answers(flip_answers(t));
  CHECK(back.yes_state == t.yes_state);
  CHECK(back.no_state == t.no_state);
}

TEST_CASE("ktt with a one-bit table matches many-one semantics") {
  Evaluator ev;
  MachineSpec red = load("zoo/dup2_red.m");
  MachineSpec ktt_red = red;
  ktt_red.mode = OracleMode::Ktt;
  ktt_red.ktt_arity = 1;
  REQUIRE(validate(ktt_red).empty());
  MachineSpec z1 = load("samples/table_z1.m");
  MachineSpec z0 = load("samples/table_z0.m");
  ExprPtr oracle = machine_expr(load("zoo/eqrev.m"));
  for (const Word& x : enumerate_words(red.input_alphabet, 6)) {
    RunBounds b = RunBounds::for_input_length(x.size());
    bool mo = ev.decide_many_one(red, oracle, x, b);
    auto kt = ev.decide_ktt(ktt_red, z1, oracle, x, b);
    CHECK(mo == kt.accepted);
    // The negated table accepts when some output lands outside the oracle.
    bool some_out = false;
    for (const auto& tup : valid_outputs(red, x, b)) {
      if (!ev.member(oracle, tup[0])) some_out = true;
    }
    auto kf = ev.decide_ktt(ktt_red, z0, oracle, x, b);
    CHECK(kf.accepted == some_out);
  }
}

TEST_CASE("ktt with two copies of the input and an all-yes table") {
  // Reducer writes x on both tapes; the table accepts iff both answers are
  // yes, so the whole reduction decides membership of x itself.
  MachineSpec red = parse_machine_string(
      "machine both\nkind npda\noracle ktt 2\ninput 0 1\nstack Z\n"
      "query 0 1\nquery 0 1\nstart q0\naccept qf\nreject\n"
      "trans q0 0 Z -> q0 ; push Z ; emit 0 0\n"
      "trans q0 1 Z -> q0 ; push Z ; emit 1 1\n"
      "trans q0 <dollar> Z -> qf ; push Z ; emit - -\n"
      "end\n",
      "both.m");
  REQUIRE(validate(red).empty());
  Evaluator ev;
  MachineSpec z11 = load("samples/table_z11.m");
  ExprPtr a = machine_expr(load("samples/anbn.m"));
  for (const Word& x : enumerate_words(red.input_alphabet, 6)) {
    RunBounds b = RunBounds::for_input_length(x.size());
    auto kt = ev.decide_ktt(red, z11, a, x, b);
    CHECK(kt.accepted == ev.member(a, x));
    CHECK(kt.acc_nonempty);
  }
}

TEST_CASE("empty accepting set reports the totality diagnostic") {
  MachineSpec red = parse_machine_string(
      "machine never\nkind npda\noracle ktt 1\ninput 0\nstack Z\nquery 0\n"
      "start q0\naccept\nreject qr\n"
      "trans q0 0 Z -> q0 ; push Z ; emit 0\n"
      "trans q0 <dollar> Z -> qr ; push Z ; emit -\n"
      "end\n",
      "never.m");
  Evaluator ev;
  MachineSpec z1 = load("samples/table_z1.m");
  auto kt = ev.decide_ktt(red, z1, finite_expr({}), make_word({"0"}),
                          RunBounds::for_input_length(1));
  CHECK_FALSE(kt.accepted);
  CHECK_FALSE(kt.acc_nonempty);
}

TEST_CASE("table enumerates length-lexicographically") {
  Evaluator ev;
  auto rows = ev.table(dyck_expr(1), 2);
  REQUIRE(rows.size() == 7);
  std::vector<std::pair<std::string, bool>> got;
  for (const auto& [w, v] : rows) got.emplace_back(render_word(w), v);
  std::vector<std::pair<std::string, bool>> expect = {
      {"", true},        {"a1", false},     {"a1'", false},
      {"a1 a1", false},  {"a1 a1'", true},  {"a1' a1", false},
      {"a1' a1'", false}};
  CHECK(got == expect);

  for (const auto& [w, v] : ev.table(finite_expr({}), make_word({"0"}), 4)) {
    CHECK_FALSE(v);
  }
  ExprPtr e = machine_expr(load("samples/anbn.m"));
  ExprPtr taut = union_expr(e, complement_expr(e));
  for (const auto& [w, v] : ev.table(taut, 4)) CHECK(v);
}

TEST_CASE("reverse node evaluates on the reversed word") {
  Evaluator ev;
  ExprPtr m = machine_expr(load("samples/anbn.m"));
  ExprPtr r = reverse_expr(m);
  Word alpha = make_word({"0", "1"});
  for (const Word& w : enumerate_words(alpha, 7)) {
    CHECK(ev.member(r, w) == ev.member(m, reversed(w)));
  }
}

TEST_CASE("dyck-ext checks every track after deleting the padding") {
  Evaluator ev;
  ExprPtr e = dyck_ext_expr(2);
  auto col = [](const char* a, const char* b) {
    return track_symbol({intern_symbol(a), intern_symbol(b)});
  };
  Word good = {col("a1", "~"), col("a1'", "a1"), col("~", "a1'")};
  CHECK(ev.member(e, good));
  Word bad = {col("a1", "~"), col("a1", "a1"), col("~", "a1'")};
  CHECK_FALSE(ev.member(e, bad));
  CHECK(ev.member(e, {}));
}

TEST_CASE("resource bounds surface as errors, never as false") {
  // A machine that grows its stack forever on a lambda loop.
  MachineSpec m = parse_machine_string(
      "machine grower\nkind npda\ninput 0\nstack Z A\nstart q0\naccept qf\n"
      "reject\n"
      "trans q0 - Z -> q1 ; push A Z\n"
      "trans q1 - A -> q1 ; push A A\n"
      "end\n",
      "grower.m");
  Evaluator ev;
  ExprPtr e = machine_expr(m);
  CHECK_THROWS_AS(ev.member(e, Word{}), ResourceExceededError);
}

TEST_CASE("complement involutions over sampled expressions") {
  Evaluator ev;
  ExprPtr exprs[] = {zoo::construction_expr("dup2"), dyck_expr(1),
                     machine_expr(load("samples/anbn.m"))};
  for (const ExprPtr& e : exprs) {
    ExprPtr nn = complement_expr(complement_expr(e));
    for (const Word& w : enumerate_words(expr_alphabet(e), 4)) {
      CHECK(ev.member(nn, w) == ev.member(e, w));
      CHECK(ev.member(complement_expr(e), w) == !ev.member(e, w));
    }
  }
}

TEST_CASE("expression files round trip bit exactly") {
  for (const char* name :
       {"dup2", "dup3", "match", "sq", "comp", "prim", "mulprim", "dyck1"}) {
    auto path = zoo::machine_dir() / "zoo" / (std::string(name) + ".expr");
    ExprPtr e = parse_expr_file(path);
    std::string once = write_expr(e);
    ExprPtr again = parse_expr_string(once, path.parent_path(), "round");
    CHECK(write_expr(again) == once);
  }
}

TEST_CASE("zoo crosschecks agree at small lengths") {
  struct Probe {
    const char* name;
    size_t len;
  } probes[] = {{"dup2", 6},  {"dup3", 6},    {"match", 5},
                {"sq", 12},   {"comp", 13},   {"prim", 13},
                {"mulprim", 15}, {"dyck1", 5}, {"dyck2", 4}};
  for (const auto& p : probes) {
    Evaluator ev;
    auto rep = zoo::crosscheck(p.name, p.len, ev);
    INFO(p.name);
    if (rep.first_disagreement) {
      INFO("first disagreement: " << render_word(*rep.first_disagreement));
    }
    CHECK(rep.disagreements == 0);
    CHECK(rep.resource_incidents == 0);
    CHECK(rep.checked > 0);
  }
}

TEST_CASE("ktt expressions parse from the prefix format") {
  Evaluator ev;
  ExprPtr e = parse_expr_string(
      "(ktt \"samples/ktt_both.m\" \"samples/table_z11.m\" "
      "(machine \"samples/anbn.m\"))",
      zoo::machine_dir(), "<ktt>");
  REQUIRE(e->tag == ExprTag::Ktt);
  ExprPtr a = machine_expr(load("samples/anbn.m"));
  for (const Word& w : enumerate_words(make_word({"0", "1"}), 6)) {
    CHECK(ev.member(e, w) == ev.member(a, w));
  }
  std::string once = write_expr(e);
  ExprPtr back = parse_expr_string(once, zoo::machine_dir(), "<round>");
  CHECK(write_expr(back) == once);
}

TEST_CASE("composite and prime constructions complement each other") {
  Evaluator ev;
  ExprPtr comp = zoo::construction_expr("comp");
  ExprPtr prim = zoo::construction_expr("prim");
  Symbol zero = intern_symbol("0");
  // Lengths zero and one are neither prime nor composite; from two upward
  // the two constructions are pointwise complementary.
  for (size_t n = 0; n <= 20; ++n) {
    Word w(n, zero);
    bool c = ev.member(comp, w);
    bool p = ev.member(prim, w);
    if (n < 2) {
      CHECK_FALSE(c);
      CHECK_FALSE(p);
    } else {
      CHECK(c == !p);
    }
  }
}
