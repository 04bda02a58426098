#include "opda/hierarchy.hpp"

#include "opda/errors.hpp"
#include "opda/transforms.hpp"

namespace opda {

ExprPtr sigma_level_expr(
    const std::vector<std::shared_ptr<const MachineSpec>>& turing_chain,
    ExprPtr base) {
  ExprPtr level = std::move(base);
  for (size_t i = turing_chain.size(); i-- > 0;) {
    level = turing_expr(turing_chain[i], complement_expr(std::move(level)));
  }
  return level;
}

ExprPtr pi_level_expr(
    const std::vector<std::shared_ptr<const MachineSpec>>& turing_chain,
    ExprPtr base) {
  return complement_expr(sigma_level_expr(turing_chain, std::move(base)));
}

ExprPtr cfl_conj_expr(const std::vector<ExprPtr>& components) {
  if (components.empty()) {
    throw PreconditionError("cfl_conj_expr: need at least one component");
  }
  ExprPtr e = components[0];
  for (size_t i = 1; i < components.size(); ++i) {
    e = intersect_expr(std::move(e), components[i]);
  }
  return e;
}

ExprPtr bh_level_expr(int level, const std::vector<ExprPtr>& components) {
  if (level < 1 || static_cast<int>(components.size()) != level) {
    throw PreconditionError("bh_level_expr: arity mismatch");
  }
  ExprPtr e = components[0];
  for (int i = 2; i <= level; ++i) {
    if (i % 2 == 0) {
      e = intersect_expr(std::move(e), complement_expr(components[i - 1]));
    } else {
      e = union_expr(std::move(e), components[i - 1]);
    }
  }
  return e;
}

BhDecomposition decompose_cfl_k(int level) {
  if (level < 1) throw PreconditionError("decompose_cfl_k: level must be >= 1");
  BhDecomposition d;
  d.level = level;
  d.pairs = level / 2;
  d.trailing = level % 2 == 1;
  return d;
}

ExprPtr fill_decomposition(const BhDecomposition& d,
                           const std::vector<ExprPtr>& components) {
  if (static_cast<int>(components.size()) != d.component_count()) {
    throw PreconditionError("fill_decomposition: arity mismatch");
  }
  ExprPtr e;
  for (int i = 0; i < d.pairs; ++i) {
    ExprPtr pair = intersect_expr(components[2 * i],
                                  complement_expr(components[2 * i + 1]));
    e = e ? union_expr(std::move(e), std::move(pair)) : std::move(pair);
  }
  if (d.trailing) {
    ExprPtr last = components[2 * d.pairs];
    e = e ? union_expr(std::move(e), std::move(last)) : std::move(last);
  }
  return e;
}

namespace {

// Splits a column alphabet into per-track alphabets, excluding the
// padding symbol.
std::vector<Word> track_alphabets(const MachineSpec& a, int width) {
  std::vector<std::set<std::string>> parts(width);
  for (Symbol col : a.input_alphabet) {
    const std::string& n = symbol_name(col);
    std::vector<std::string> ps(1);
    for (char c : n) {
      if (c == '|') ps.emplace_back();
      else ps.back() += c;
    }
    if (static_cast<int>(ps.size()) != width) {
      throw PreconditionError(
          "eval_quantified: column '" + n + "' does not have " +
          std::to_string(width) + " tracks");
    }
    for (int i = 0; i < width; ++i) {
      if (ps[i] != "~") parts[i].insert(ps[i]);
    }
  }
  std::vector<Word> out(width);
  for (int i = 0; i < width; ++i) {
    for (const auto& n : parts[i]) out[i].push_back(intern_symbol(n));
  }
  return out;
}

}  // namespace

bool eval_quantified(const MachineSpec& A, const LinearPoly& p, int k,
                     const Word& x, Evaluator& ev) {
  if (k < 1) throw PreconditionError("eval_quantified: k must be >= 1");
  if (!is_deterministic(A)) {
    throw PreconditionError("eval_quantified: '" + A.name +
                            "' is not deterministic");
  }
  int width = k + 1;
  uint64_t bound = p(x.size());
  std::vector<Word> thetas = track_alphabets(A, width);
  Symbol nat = natural_symbol();

  // Budget: each quantifier block enumerates alphabet^{<=p(n)} strings.
  std::vector<std::vector<Word>> domains(k);
  for (int i = 1; i <= k; ++i) {
    domains[i - 1] = enumerate_words(thetas[i], bound);
  }
  std::set<Word> extensions;
  if (x.size() > bound) return false;  // no extension fits
  extensions = natural_extensions(x, bound);

  std::set<Symbol> columns(A.input_alphabet.begin(), A.input_alphabet.end());
  auto combine = [&](const Word& xt, const std::vector<const Word*>& ys,
                     Word& out) -> bool {
    size_t len = xt.size();
    for (const Word* y : ys) len = std::max(len, y->size());
    out.clear();
    for (size_t pos = 0; pos < len; ++pos) {
      std::vector<Symbol> parts(width);
      parts[0] = pos < xt.size() ? xt[pos] : nat;
      for (int i = 1; i < width; ++i) {
        const Word& y = *ys[i - 1];
        parts[i] = pos < y.size() ? y[pos] : nat;
      }
      Symbol col = track_symbol(parts);
      if (!columns.count(col)) return false;  // not a word over L(A)'s alphabet
      out.push_back(col);
    }
    return true;
  };

  std::vector<const Word*> chosen(k, nullptr);
  Word combined;
  // Quantifier block i (1-based): existential when odd.
  std::function<bool(int, const Word&)> eval_block =
      [&](int i, const Word& xt) -> bool {
    if (i > k) {
      if (!combine(xt, chosen, combined)) return false;
      Verdict v = accepts(A, combined, ev.bounds_for(combined.size()));
      if (v == Verdict::ResourceExceeded) {
        throw ResourceExceededError(
            "eval_quantified: '" + A.name + "' hit its run bounds");
      }
      return v == Verdict::Accept;
    }
    bool existential = i % 2 == 1;
    for (const Word& y : domains[i - 1]) {
      chosen[i - 1] = &y;
      bool r = eval_block(i + 1, xt);
      if (existential && r) return true;
      if (!existential && !r) return false;
    }
    return !existential;
  };

  for (const Word& xt : extensions) {
    if (eval_block(1, xt)) return true;
  }
  return false;
}

}  // namespace opda
