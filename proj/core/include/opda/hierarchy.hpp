#pragma once

#include <vector>

#include "opda/eval.hpp"
#include "opda/expr.hpp"

namespace opda {

struct LinearPoly {
  uint64_t a = 1;
  uint64_t b = 0;
  uint64_t operator()(uint64_t n) const { return a * n + b; }
};

// CFL-hierarchy level expressions.

// sigma level k: k-1 turing reducers stacked over a base machine, with a
// complement between consecutive levels.  sigma_1 is the base machine
// itself.
ExprPtr sigma_level_expr(
    const std::vector<std::shared_ptr<const MachineSpec>>& turing_chain,
    ExprPtr base);
ExprPtr pi_level_expr(
    const std::vector<std::shared_ptr<const MachineSpec>>& turing_chain,
    ExprPtr base);

// k-conjunctive closure: nested intersection of k components.
ExprPtr cfl_conj_expr(const std::vector<ExprPtr>& components);

// Boolean-hierarchy level: alternating intersection with a complement and
// union, one component per level.
ExprPtr bh_level_expr(int level, const std::vector<ExprPtr>& components);

// Union-of-differences template for a Boolean-hierarchy level: `pairs`
// difference pairs plus an optional trailing plain component.
struct BhDecomposition {
  int level = 0;
  int pairs = 0;
  bool trailing = false;
  int component_count() const { return 2 * pairs + (trailing ? 1 : 0); }
};
BhDecomposition decompose_cfl_k(int level);
ExprPtr fill_decomposition(const BhDecomposition& d,
                           const std::vector<ExprPtr>& components);

// Brute-force evaluation of the quantified characterization
//   exists x~ exists y1 forall y2 ... Qk yk
//     [ x = Ext(x~)  and  [x~, y1, ..., yk]^T in L(A) ]
// over a deterministic npda A whose input symbols are (k+1)-track columns.
// Enumeration is length-lexicographic with quantifier short-circuiting;
// a truncated block is an error, never an answer.
bool eval_quantified(const MachineSpec& A, const LinearPoly& p, int k,
                     const Word& x, Evaluator& ev);

}  // namespace opda
