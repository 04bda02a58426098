#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "opda/machine.hpp"

namespace opda {

enum class ExprTag {
  Machine,
  Builtin,
  FiniteSet,
  Complement,
  Intersect,
  Union,
  Reverse,
  Dyck,
  DyckExt,
  ManyOne,
  Turing,
  Ktt,
};

struct LanguageExpr;
using ExprPtr = std::shared_ptr<const LanguageExpr>;

// Algebraic oracle tree: the unit of recursive membership decision.
struct LanguageExpr {
  ExprTag tag = ExprTag::FiniteSet;
  std::shared_ptr<const MachineSpec> machine;  // Machine node or reducer
  std::shared_ptr<const MachineSpec> table;    // ktt truth table (dfa)
  std::string builtin_name;
  std::set<Word> finite_words;
  int dyck_d = 0;
  ExprPtr child;
  ExprPtr child2;
  Word alphabet;

  // File reference used when serializing machine-bearing nodes; set by the
  // parser and by transforms that write machine files.
  std::string machine_ref;
  std::string table_ref;
};

// Builders.  Each validates the structural invariants (reducer mode matches
// the node kind; reducer query alphabet equals the child's alphabet) and
// throws ValidationError on breach.
ExprPtr machine_expr(MachineSpec m);
ExprPtr machine_expr(std::shared_ptr<const MachineSpec> m);
ExprPtr builtin_expr(const std::string& name);
ExprPtr finite_expr(std::set<Word> words);
ExprPtr complement_expr(ExprPtr e);
ExprPtr intersect_expr(ExprPtr a, ExprPtr b);
ExprPtr union_expr(ExprPtr a, ExprPtr b);
ExprPtr reverse_expr(ExprPtr e);
ExprPtr dyck_expr(int d);
ExprPtr dyck_ext_expr(int d);
ExprPtr many_one_expr(std::shared_ptr<const MachineSpec> reducer, ExprPtr e);
ExprPtr many_one_expr(MachineSpec reducer, ExprPtr e);
ExprPtr turing_expr(std::shared_ptr<const MachineSpec> reducer, ExprPtr e);
ExprPtr turing_expr(MachineSpec reducer, ExprPtr e);
ExprPtr ktt_expr(std::shared_ptr<const MachineSpec> reducer,
                 std::shared_ptr<const MachineSpec> table, ExprPtr e);

// The alphabet a node's words range over (used by table and crosscheck).
const Word& expr_alphabet(const ExprPtr& e);

// Canonical Dyck alphabet a1 a1' a2 a2' ... ad ad'.
Word dyck_alphabet(int d);
Symbol dyck_open(int index);   // 1-based
Symbol dyck_close(int index);  // 1-based

// Balanced-bracket predicate over tokens aK / aK'.  d <= 0 accepts any
// bracket index.
bool dyck_balanced(const Word& w, int d);

// Track utilities: columns are single tokens joining per-track tokens
// with '|'.
Symbol track_symbol(const std::vector<Symbol>& parts);
std::vector<Word> split_tracks(const Word& w, int width);  // empty on arity mismatch

// Oracle-expression text format: parenthesized prefix, machine references
// resolved relative to the expression file.
ExprPtr parse_expr_file(const std::filesystem::path& path);
ExprPtr parse_expr_string(const std::string& text,
                          const std::filesystem::path& base_dir,
                          const std::string& origin = "<string>");
std::string write_expr(const ExprPtr& e);

}  // namespace opda
