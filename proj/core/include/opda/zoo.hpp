#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opda/expr.hpp"

namespace opda {

class Evaluator;

namespace zoo {

// A shipped example language: a direct reference predicate plus the layered
// reduction-chain construction, cross-checked against each other at bounded
// length.
struct Entry {
  std::string name;
  Word alphabet;
  // Input domain the crosscheck enumerates.
  enum class Domain { All, Unary, ZeroOneBlocks, HashPairs } domain =
      Domain::All;
  size_t test_max_len = 8;
  std::string summary;
};

const std::vector<Entry>& entries();
const Entry& entry(const std::string& name);  // throws PreconditionError

// Direct arithmetic/string predicate for the named language.
bool reference_member(const std::string& name, const Word& w);

// The layered construction as a LanguageExpr (loads machine files from the
// zoo directory).
ExprPtr construction_expr(const std::string& name);

// Directory holding the shipped machine and expression files.  Defaults to
// the build-time location; the OPDA_MACHINE_DIR environment variable
// overrides it.
std::filesystem::path machine_dir();

// Words the crosscheck enumerates for an entry, up to max_len.
std::vector<Word> domain_words(const Entry& e, size_t max_len);

struct CrosscheckReport {
  uint64_t checked = 0;
  uint64_t disagreements = 0;
  uint64_t resource_incidents = 0;
  std::optional<Word> first_disagreement;
  double seconds = 0.0;
};

CrosscheckReport crosscheck(const std::string& name, size_t max_len,
                            Evaluator& ev);

}  // namespace zoo
}  // namespace opda
