#include "opda/eval.hpp"

#include "opda/errors.hpp"
#include "opda/zoo.hpp"

namespace opda {

namespace {

constexpr uint64_t kEnumerationBudget = uint64_t(1) << 20;

bool word_over(const Word& w, const Word& alphabet) {
  for (Symbol s : w) {
    if (!alphabet_contains(alphabet, s)) return false;
  }
  return true;
}

}  // namespace

uint64_t count_words(const Word& alphabet, size_t max_len) {
  uint64_t total = 0, layer = 1;
  for (size_t len = 0; len <= max_len; ++len) {
    total += layer;
    if (total >= kEnumerationBudget) return total;
    if (layer > kEnumerationBudget) return kEnumerationBudget;
    layer *= alphabet.empty() ? 0 : alphabet.size();
    if (alphabet.empty()) break;
  }
  return total;
}

std::vector<Word> enumerate_words(const Word& alphabet, size_t max_len) {
  if (count_words(alphabet, max_len) >= kEnumerationBudget) {
    throw EnumerationBudgetError(
        "enumeration over " + std::to_string(alphabet.size()) +
        " symbols up to length " + std::to_string(max_len) +
        " exceeds the string budget");
  }
  std::vector<Word> out;
  out.emplace_back();
  if (alphabet.empty()) return out;
  for (size_t len = 1; len <= max_len; ++len) {
    std::vector<size_t> odo(len, 0);
    while (true) {
      Word w(len);
      for (size_t i = 0; i < len; ++i) w[i] = alphabet[odo[i]];
      out.push_back(std::move(w));
      size_t i = len;
      while (i > 0) {
        --i;
        if (++odo[i] < alphabet.size()) break;
        odo[i] = 0;
        if (i == 0) goto next_len;
      }
    }
  next_len:;
  }
  return out;
}

ExprPtr Evaluator::resolve_builtin(const std::string& name) {
  auto it = builtins_.find(name);
  if (it != builtins_.end()) return it->second;
  ExprPtr e = zoo::construction_expr(name);
  builtins_.emplace(name, e);
  return e;
}

bool Evaluator::member(const ExprPtr& e, const Word& w) {
  if (opt_.memoize) {
    auto key = std::make_pair(e, w);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool v = member_node(*e, w);
    memo_.emplace(std::move(key), v);
    return v;
  }
  return member_node(*e, w);
}

bool Evaluator::member_node(const LanguageExpr& e, const Word& w) {
  switch (e.tag) {
    case ExprTag::Machine: {
      Verdict v = accepts(*e.machine, w, bounds_for(w.size()));
      if (v == Verdict::ResourceExceeded) {
        throw ResourceExceededError("machine '" + e.machine->name +
                                    "' hit its run bounds on '" +
                                    render_word(w) + "'");
      }
      return v == Verdict::Accept;
    }
    case ExprTag::Builtin: {
      ExprPtr b = resolve_builtin(e.builtin_name);
      return member(b, w);
    }
    case ExprTag::FiniteSet:
      return e.finite_words.count(w) > 0;
    case ExprTag::Complement:
      return !member(e.child, w);
    case ExprTag::Intersect:
      return member(e.child, w) && member(e.child2, w);
    case ExprTag::Union:
      return member(e.child, w) || member(e.child2, w);
    case ExprTag::Reverse:
      return member(e.child, reversed(w));
    case ExprTag::Dyck:
      return dyck_balanced(w, e.dyck_d);
    case ExprTag::DyckExt: {
      // Every track, after deleting the padding symbol, must be balanced.
      std::vector<Word> tracks = split_tracks(w, e.dyck_d);
      if (tracks.empty() && e.dyck_d > 0 && !w.empty()) return false;
      if (tracks.empty()) tracks.resize(e.dyck_d);
      for (const Word& t : tracks) {
        if (!dyck_balanced(delete_natural(t), 0)) return false;
      }
      return true;
    }
    case ExprTag::ManyOne:
      return decide_many_one(*e.machine, e.child, w, bounds_for(w.size()));
    case ExprTag::Turing:
      return decide_turing(*e.machine, e.child, w, bounds_for(w.size()));
    case ExprTag::Ktt:
      return decide_ktt(*e.machine, *e.table, e.child, w, bounds_for(w.size()))
          .accepted;
  }
  throw PreconditionError("unhandled expression node");
}

bool Evaluator::decide_many_one(const MachineSpec& reducer,
                                const ExprPtr& oracle, const Word& x,
                                const RunBounds& b) {
  if (reducer.mode != OracleMode::ManyOne &&
      reducer.mode != OracleMode::None) {
    throw PreconditionError("decide_many_one requires a many-one reducer");
  }
  if (reducer.query_alphabets.size() != 1) {
    throw PreconditionError("many-one reducer needs exactly one query tape");
  }
  bool found = false;
  RunCallbacks cb;
  cb.on_accept = [&](const OutputTuple& tapes) {
    if (member(oracle, tapes[0])) {
      found = true;
      return false;
    }
    return true;
  };
  RunStats stats = explore(reducer, x, b, cb);
  if (found) return true;
  if (stats.exceeded_paths > 0) {
    throw ResourceExceededError("many-one reducer '" + reducer.name +
                                "' hit its run bounds on '" + render_word(x) +
                                "'");
  }
  return false;
}

bool Evaluator::decide_turing(const MachineSpec& reducer,
                              const ExprPtr& oracle, const Word& x,
                              const RunBounds& b) {
  if (reducer.mode != OracleMode::Turing) {
    throw PreconditionError("decide_turing requires a turing reducer");
  }
  const Word& oracle_alpha = expr_alphabet(oracle);
  bool found = false;
  RunCallbacks cb;
  cb.oracle = [&](const Word& y) {
    if (!word_over(y, oracle_alpha)) {
      throw PreconditionError("query word '" + render_word(y) +
                              "' is outside the oracle's alphabet");
    }
    return member(oracle, y);
  };
  cb.on_accept = [&](const OutputTuple&) {
    found = true;
    return false;
  };
  RunStats stats = explore(reducer, x, b, cb);
  if (found) return true;
  if (stats.exceeded_paths > 0) {
    throw ResourceExceededError("turing reducer '" + reducer.name +
                                "' hit its run bounds on '" + render_word(x) +
                                "'");
  }
  return false;
}

Evaluator::KttOutcome Evaluator::decide_ktt(const MachineSpec& reducer,
                                            const MachineSpec& table,
                                            const ExprPtr& oracle,
                                            const Word& x,
                                            const RunBounds& b) {
  if (reducer.mode != OracleMode::Ktt) {
    throw PreconditionError("decide_ktt requires a ktt reducer");
  }
  int k = reducer.ktt_arity;
  Symbol zero = intern_symbol("0"), one = intern_symbol("1");
  KttOutcome out;
  bool found = false;
  RunCallbacks cb;
  cb.on_accept = [&](const OutputTuple& tapes) {
    out.acc_nonempty = true;
    Word encoded = x;
    encoded.push_back(hash_symbol());
    for (int i = 0; i < k; ++i) {
      encoded.push_back(member(oracle, tapes[i]) ? one : zero);
    }
    Verdict v = accepts(table, encoded,
                        bounds_for(encoded.size()));
    if (v == Verdict::ResourceExceeded) {
      throw ResourceExceededError("truth table '" + table.name +
                                  "' hit its run bounds");
    }
    if (v == Verdict::Accept) {
      found = true;
      return false;
    }
    return true;
  };
  RunStats stats = explore(reducer, x, b, cb);
  if (found) {
    out.accepted = true;
    return out;
  }
  if (stats.exceeded_paths > 0) {
    throw ResourceExceededError("ktt reducer '" + reducer.name +
                                "' hit its run bounds on '" + render_word(x) +
                                "'");
  }
  out.accepted = false;
  return out;
}

std::vector<std::pair<Word, bool>> Evaluator::table(const ExprPtr& e,
                                                    size_t max_len) {
  ExprPtr resolved = e;
  if (e->tag == ExprTag::Builtin) resolved = resolve_builtin(e->builtin_name);
  return table(e, expr_alphabet(resolved), max_len);
}

std::vector<std::pair<Word, bool>> Evaluator::table(const ExprPtr& e,
                                                    const Word& alphabet,
                                                    size_t max_len) {
  std::vector<std::pair<Word, bool>> out;
  for (Word& w : enumerate_words(alphabet, max_len)) {
    bool v = member(e, w);
    out.emplace_back(std::move(w), v);
  }
  return out;
}

}  // namespace opda
