#include "doctest.h"

#include "opda/errors.hpp"
#include "opda/eval.hpp"
#include "opda/machine_io.hpp"
#include "opda/simulate.hpp"
#include "opda/transforms.hpp"
#include "opda/zoo.hpp"

using namespace opda;

namespace {

MachineSpec load(const std::string& rel) {
  return parse_machine_file(zoo::machine_dir() / rel);
}

RunBounds bounds_for(const Word& w) {
  return RunBounds::for_input_length(w.size());
}

Verdict run_accepts(const MachineSpec& m, const std::string& text) {
  Word w = parse_word(text, m.input_alphabet);
  return accepts(m, w, bounds_for(w));
}

// Test-side balanced-bracket oracle: a plain counter for one bracket pair.
bool counter_balanced(const std::string& tokens) {
  int depth = 0;
  std::istringstream in(tokens);
  std::string t;
  while (in >> t) {
    if (t == "a1") depth++;
    else if (t == "a1'") depth--;
    else return false;
    if (depth < 0) return false;
  }
  return depth == 0;
}

}  // namespace

TEST_CASE("machine file round trip is bit exact") {
  for (const char* rel :
       {"zoo/dup2_red.m", "zoo/eqrev.m", "zoo/dyck2.m", "samples/t_two.m",
        "samples/dfa_even1.m", "samples/coin.ppda"}) {
    MachineSpec m = load(rel);
    std::string once = write_machine(m);
    MachineSpec again = parse_machine_string(once, rel);
    CHECK(write_machine(again) == once);
  }
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_machine_string("machine broken\nkind npda\ntrans q0 0 -> q1\nend\n",
                         "broken.m");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("validate accepts a well-formed recognizer") {
  MachineSpec dyck1 = load("zoo/dyck1.m");
  CHECK(validate(dyck1).empty());
}

TEST_CASE("validate flags a state that is both accepting and rejecting") {
  MachineSpec m = parse_machine_string(
      "machine bad\nkind npda\ninput 0\nstack Z\nstart q0\n"
      "accept q1\nreject q1\n"
      "trans q0 0 Z -> q1 ; push Z\nend\n",
      "bad.m");
  auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("q1") != std::string::npos);
}

TEST_CASE("validate flags dfa nondeterminism") {
  MachineSpec m = parse_machine_string(
      "machine baddfa\nkind dfa\ninput 0 1\nstart q0\naccept qf\nreject qr\n"
      "trans q0 0 -> qf\n"
      "trans q0 0 -> qr\n"
      "trans q0 1 -> qr\n"
      "trans q0 <dollar> -> qr\n"
      "end\n",
      "baddfa.m");
  auto v = validate(m);
  bool determinism = false;
  for (const auto& s : v) {
    if (s.find("determinism") != std::string::npos) determinism = true;
  }
  CHECK(determinism);
}

TEST_CASE("validate flags a bottom marker pushed above position 0") {
  MachineSpec m = parse_machine_string(
      "machine badz\nkind npda\ninput 0\nstack Z A\nstart q0\naccept qf\n"
      "reject\n"
      "trans q0 0 A -> qf ; push Z A\nend\n",
      "badz.m");
  auto v = validate(m);
  REQUIRE(!v.empty());
  CHECK(v[0].find("bottom marker") != std::string::npos);
}

TEST_CASE("dyck1 recognizer decides matched pairs") {
  MachineSpec dyck1 = load("zoo/dyck1.m");
  CHECK(run_accepts(dyck1, "a1 a1'") == Verdict::Accept);
  CHECK(run_accepts(dyck1, "a1'") == Verdict::Reject);
  CHECK(run_accepts(dyck1, "a1 a1 a1' a1'") == Verdict::Accept);
  CHECK(run_accepts(dyck1, "") == Verdict::Accept);

  // Cross-check against the counter for every word up to length 6.
  MachineSpec flipped = flip_halting(dyck1);
  (void)flipped;
  std::vector<std::string> toks = {"a1", "a1'"};
  for (int len = 0; len <= 6; ++len) {
    std::vector<int> odo(len, 0);
    bool done = len == 0;
    do {
      std::string text;
      for (int i = 0; i < len; ++i) {
        if (i) text += ' ';
        text += toks[odo[i]];
      }
      CHECK((run_accepts(dyck1, text) == Verdict::Accept) ==
            counter_balanced(text));
      int i = len - 1;
      while (i >= 0 && ++odo[i] == 2) odo[i--] = 0;
      if (i < 0) break;
    } while (true);
    if (done) break;
  }
}

TEST_CASE("dup2 reducer enumerates split outputs") {
  MachineSpec red = load("zoo/dup2_red.m");
  Word w = parse_word("0101", red.input_alphabet);
  auto outs = valid_outputs(red, w, bounds_for(w));
  std::set<std::string> got;
  for (const auto& tup : outs) got.insert(render_word(tup[0]));
  std::set<std::string> expect = {"~0101", "0~101", "10~01", "010~1", "1010~"};
  CHECK(got == expect);

  Word empty;
  auto outs2 = valid_outputs(red, empty, bounds_for(empty));
  REQUIRE(outs2.size() == 1);
  CHECK(render_word(outs2.begin()->at(0)) == "~");
}

TEST_CASE("machine with no accepting path yields no outputs") {
  MachineSpec red = load("zoo/sq_red.m");
  Word w = parse_word("1", red.input_alphabet);
  CHECK(valid_outputs(red, w, bounds_for(w)).empty());
}

TEST_CASE("run_paths enumerates deterministic and branching machines") {
  MachineSpec dyck1 = load("zoo/dyck1.m");
  Word w = parse_word("a1 a1'", dyck1.input_alphabet);
  auto paths = run_paths(dyck1, w, bounds_for(w));
  CHECK(paths.size() == 1);  // deterministic: exactly one path

  MachineSpec branch = parse_machine_string(
      "machine b2\nkind npda\ninput 0\nstack Z\nstart q0\naccept qf\nreject\n"
      "trans q0 0 Z -> q1 ; push Z\n"
      "trans q0 0 Z -> q2 ; push Z\n"
      "trans q1 <dollar> Z -> qf ; push Z\n"
      "trans q2 <dollar> Z -> qf ; push Z\n"
      "end\n",
      "b2.m");
  Word zero = parse_word("0", branch.input_alphabet);
  CHECK(run_paths(branch, zero, bounds_for(zero)).size() == 2);

  MachineSpec red = load("zoo/dup2_red.m");
  Word x = parse_word("01", red.input_alphabet);
  size_t accepting = 0;
  for (const auto& p : run_paths(red, x, bounds_for(x))) {
    if (p.accepted) accepting++;
  }
  CHECK(accepting == 3);  // splits -|01, 0|1, 01|-
}

TEST_CASE("replaying an accepting path reproduces its configuration") {
  MachineSpec pal = load("samples/evenpal.m");
  for (const std::string& text : {"0110", "00", "011110"}) {
    Word w = parse_word(text, pal.input_alphabet);
    for (const auto& p : run_paths(pal, w, bounds_for(w))) {
      if (!p.accepted) continue;
      Configuration c = replay_path(pal, w, p.rule_indices);
      CHECK(c.state == p.final_config.state);
      CHECK(c.head_pos == p.final_config.head_pos);
      CHECK(c.stack == p.final_config.stack);
      CHECK(c.tapes == p.final_config.tapes);
      CHECK(c.steps == p.final_config.steps);
    }
  }
}

TEST_CASE("reachability acceptance equals path enumeration") {
  for (const char* rel :
       {"zoo/dyck1.m", "zoo/dyck2.m", "samples/anbn.m", "samples/evenpal.m",
        "zoo/eqrev.m", "zoo/dup2_red.m", "zoo/match_red.m", "zoo/sq_red.m",
        "zoo/prefixrev.m", "zoo/dup3_oracle.m"}) {
    MachineSpec m = load(rel);
    size_t cap = m.input_alphabet.size() > 2 ? 5 : 8;
    for (const Word& w : enumerate_words(m.input_alphabet, cap)) {
      CHECK(accepts(m, w, bounds_for(w)) ==
            accepts_reachability(m, w, bounds_for(w)));
    }
  }
}

TEST_CASE("reducers have outputs exactly when they accept") {
  for (const char* rel :
       {"zoo/dup2_red.m", "zoo/dup3_red.m", "zoo/match_red.m",
        "zoo/sq_red.m", "zoo/comp_red.m"}) {
    MachineSpec m = load(rel);
    for (const Word& w : enumerate_words(m.input_alphabet, 6)) {
      RunResult r = run_machine(m, w, bounds_for(w));
      CHECK((r.verdict == Verdict::Accept) == !r.valid_outputs.empty());
    }
  }
}

TEST_CASE("flip_halting is an involution and complements a dfa") {
  MachineSpec dfa = load("samples/dfa_even1.m");
  MachineSpec back = flip_halting(flip_halting(dfa));
  CHECK(back.accepting == dfa.accepting);
  CHECK(back.rejecting == dfa.rejecting);

  MachineSpec odd = flip_halting(dfa);
  for (const Word& w : enumerate_words(dfa.input_alphabet, 6)) {
    size_t ones = 0;
    for (Symbol s : w) {
      if (symbol_name(s) == "1") ones++;
    }
    CHECK((accepts(dfa, w, bounds_for(w)) == Verdict::Accept) ==
          (ones % 2 == 0));
    CHECK((accepts(odd, w, bounds_for(w)) == Verdict::Accept) ==
          (ones % 2 == 1));
  }

  MachineSpec dyck1 = load("zoo/dyck1.m");
  MachineSpec nd = flip_halting(dyck1);
  CHECK(run_accepts(nd, "a1 a1'") == Verdict::Reject);
}

TEST_CASE("exploration order does not affect outcomes") {
  MachineSpec red = load("zoo/dup2_red.m");
  MachineSpec shuffled = red;
  std::reverse(shuffled.transitions.begin(), shuffled.transitions.end());
  for (const Word& w : enumerate_words(red.input_alphabet, 5)) {
    CHECK(valid_outputs(red, w, bounds_for(w)) ==
          valid_outputs(shuffled, w, bounds_for(w)));
  }
}

TEST_CASE("a repeated configuration terminates the path") {
  MachineSpec m = parse_machine_string(
      "machine loop\nkind npda\ninput 0\nstack Z\nstart q0\naccept qf\n"
      "reject\n"
      "trans q0 - Z -> q1 ; push Z\n"
      "trans q1 - Z -> q0 ; push Z\n"
      "end\n",
      "loop.m");
  Word w;
  RunResult r = run_machine(m, w, bounds_for(w));
  CHECK(r.verdict == Verdict::Reject);
  CHECK(r.stats.repeated_configs > 0);
  CHECK(r.stats.exceeded_paths == 0);
}

TEST_CASE("input outside the alphabet raises an input-alphabet error") {
  MachineSpec m = load("samples/anbn.m");
  Word w = {intern_symbol("x")};
  CHECK_THROWS_AS(accepts(m, w, bounds_for(w)), InputAlphabetError);
}
