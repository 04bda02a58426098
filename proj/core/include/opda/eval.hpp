#pragma once

#include <map>
#include <vector>

#include "opda/expr.hpp"
#include "opda/simulate.hpp"

namespace opda {

// Recursive bounded membership decision over the oracle algebra.  Each
// oracle resolution runs with fresh bounds derived from the query word's
// length, which keeps the recursion well-founded.  Resource bound hits
// propagate as ResourceExceededError, never as a silent false.
class Evaluator {
 public:
  struct Options {
    uint64_t bounds_coeff = 64;
    bool memoize = true;
  };

  Evaluator() = default;
  explicit Evaluator(Options opt) : opt_(opt) {}

  bool member(const ExprPtr& e, const Word& w);

  bool decide_many_one(const MachineSpec& reducer, const ExprPtr& oracle,
                       const Word& x, const RunBounds& b);
  bool decide_turing(const MachineSpec& reducer, const ExprPtr& oracle,
                     const Word& x, const RunBounds& b);

  struct KttOutcome {
    bool accepted = false;
    // The totality condition ACC_M(x) != empty; false is reported as a
    // diagnostic, not a failure.
    bool acc_nonempty = false;
  };
  KttOutcome decide_ktt(const MachineSpec& reducer, const MachineSpec& table,
                        const ExprPtr& oracle, const Word& x,
                        const RunBounds& b);

  // Length-lexicographic membership table for all words of length
  // <= max_len over the expression's (or an explicit) alphabet.
  std::vector<std::pair<Word, bool>> table(const ExprPtr& e, size_t max_len);
  std::vector<std::pair<Word, bool>> table(const ExprPtr& e,
                                           const Word& alphabet,
                                           size_t max_len);

  RunBounds bounds_for(size_t len) const {
    return RunBounds::for_input_length(len, opt_.bounds_coeff);
  }

  const Options& options() const { return opt_; }

 private:
  bool member_node(const LanguageExpr& e, const Word& w);
  ExprPtr resolve_builtin(const std::string& name);

  Options opt_;
  // Keys hold the node itself so a recycled heap address can never alias a
  // previously memoized node.
  std::map<std::pair<ExprPtr, Word>, bool> memo_;
  std::map<std::string, ExprPtr> builtins_;
};

// Enumerates all words over `alphabet` with length <= max_len in
// length-lexicographic order (alphabet order as given).  Throws
// EnumerationBudgetError when the count would reach 2^20.
std::vector<Word> enumerate_words(const Word& alphabet, size_t max_len);
uint64_t count_words(const Word& alphabet, size_t max_len);

}  // namespace opda
