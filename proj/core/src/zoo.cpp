#include "opda/zoo.hpp"

#include <chrono>
#include <cstdlib>

#include "opda/errors.hpp"
#include "opda/eval.hpp"
#include "opda/ppda.hpp"

#ifndef OPDA_MACHINE_DIR_DEFAULT
#define OPDA_MACHINE_DIR_DEFAULT "machines"
#endif

namespace opda::zoo {

namespace {

Word binary_alphabet() { return make_word({"0", "1"}); }
Word unary_alphabet() { return make_word({"0"}); }

bool is_prime(size_t n) {
  if (n < 2) return false;
  for (size_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

bool is_composite(size_t n) { return n >= 4 && !is_prime(n); }

bool is_semiprime(size_t n) {
  for (size_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return is_prime(n / p);
  }
  return false;
}

}  // namespace

const std::vector<Entry>& entries() {
  static const std::vector<Entry> kEntries = [] {
    std::vector<Entry> e;
    e.push_back({"dup2", binary_alphabet(), Entry::Domain::All, 10,
                 "doubled words xx"});
    e.push_back({"dup3", binary_alphabet(), Entry::Domain::All, 10,
                 "tripled words xxx"});
    e.push_back({"match", make_word({"0", "1", "_"}), Entry::Domain::HashPairs,
                 8, "x _ w with x a substring of w"});
    e.push_back({"sq", binary_alphabet(), Entry::Domain::ZeroOneBlocks, 30,
                 "0^n 1^(n*n)"});
    e.push_back({"comp", unary_alphabet(), Entry::Domain::Unary, 30,
                 "unary composite lengths"});
    e.push_back({"prim", unary_alphabet(), Entry::Domain::Unary, 30,
                 "unary prime lengths"});
    e.push_back({"mulprim", unary_alphabet(), Entry::Domain::Unary, 40,
                 "unary semiprime lengths"});
    e.push_back({"dyck1", dyck_alphabet(1), Entry::Domain::All, 8,
                 "balanced strings, one bracket pair"});
    e.push_back({"dyck2", dyck_alphabet(2), Entry::Domain::All, 8,
                 "balanced strings, two bracket pairs"});
    return e;
  }();
  return kEntries;
}

const Entry& entry(const std::string& name) {
  for (const Entry& e : entries()) {
    if (e.name == name) return e;
  }
  throw PreconditionError("unknown zoo entry '" + name + "'");
}

bool reference_member(const std::string& name, const Word& w) {
  if (name == "dup2") {
    if (w.size() % 2) return false;
    size_t h = w.size() / 2;
    return std::equal(w.begin(), w.begin() + h, w.begin() + h);
  }
  if (name == "dup3") {
    if (w.size() % 3) return false;
    size_t t = w.size() / 3;
    return std::equal(w.begin(), w.begin() + t, w.begin() + t) &&
           std::equal(w.begin(), w.begin() + t, w.begin() + 2 * t);
  }
  if (name == "match") {
    Symbol sep = hash_symbol();
    size_t pos = 0;
    size_t cnt = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] == sep) {
        pos = i;
        cnt++;
      }
    }
    if (cnt != 1) return false;
    Word x(w.begin(), w.begin() + pos);
    Word v(w.begin() + pos + 1, w.end());
    if (x.empty()) return true;
    if (x.size() > v.size()) return false;
    for (size_t i = 0; i + x.size() <= v.size(); ++i) {
      if (std::equal(x.begin(), x.end(), v.begin() + i)) return true;
    }
    return false;
  }
  if (name == "sq") {
    Symbol zero = intern_symbol("0"), one = intern_symbol("1");
    size_t n = 0;
    size_t i = 0;
    while (i < w.size() && w[i] == zero) {
      ++n;
      ++i;
    }
    if (n == 0) return false;
    size_t ones = 0;
    while (i < w.size() && w[i] == one) {
      ++ones;
      ++i;
    }
    return i == w.size() && ones == n * n;
  }
  if (name == "comp") return is_composite(w.size());
  if (name == "prim") return is_prime(w.size());
  if (name == "mulprim") return is_semiprime(w.size());
  if (name == "dyck1") return dyck_balanced(w, 1);
  if (name == "dyck2") return dyck_balanced(w, 2);
  if (name == "equal6") return equal6_reference(w);
  throw PreconditionError("unknown zoo entry '" + name + "'");
}

std::filesystem::path machine_dir() {
  if (const char* env = std::getenv("OPDA_MACHINE_DIR")) {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(OPDA_MACHINE_DIR_DEFAULT);
}

ExprPtr construction_expr(const std::string& name) {
  entry(name);  // validates the name
  return parse_expr_file(machine_dir() / "zoo" / (name + ".expr"));
}

std::vector<Word> domain_words(const Entry& e, size_t max_len) {
  switch (e.domain) {
    case Entry::Domain::All:
      return enumerate_words(e.alphabet, max_len);
    case Entry::Domain::Unary: {
      std::vector<Word> out;
      Symbol zero = intern_symbol("0");
      for (size_t n = 0; n <= max_len; ++n) out.emplace_back(n, zero);
      return out;
    }
    case Entry::Domain::ZeroOneBlocks: {
      std::vector<Word> out;
      Symbol zero = intern_symbol("0"), one = intern_symbol("1");
      for (size_t len = 0; len <= max_len; ++len) {
        for (size_t a = 0; a <= len; ++a) {
          Word w(a, zero);
          w.resize(len, one);
          out.push_back(std::move(w));
        }
      }
      return out;
    }
    case Entry::Domain::HashPairs: {
      std::vector<Word> out;
      Word binary = binary_alphabet();
      Symbol sep = hash_symbol();
      for (size_t xl = 0; xl <= max_len; ++xl) {
        for (const Word& x : enumerate_words(binary, xl)) {
          if (x.size() != xl) continue;
          for (const Word& v : enumerate_words(binary, max_len - xl)) {
            Word w = x;
            w.push_back(sep);
            w.insert(w.end(), v.begin(), v.end());
            out.push_back(std::move(w));
          }
        }
      }
      return out;
    }
  }
  return {};
}

CrosscheckReport crosscheck(const std::string& name, size_t max_len,
                            Evaluator& ev) {
  const Entry& e = entry(name);
  ExprPtr construction = construction_expr(name);
  CrosscheckReport rep;
  auto t0 = std::chrono::steady_clock::now();
  for (const Word& w : domain_words(e, max_len)) {
    bool ref = reference_member(name, w);
    bool got;
    try {
      got = ev.member(construction, w);
    } catch (const ResourceExceededError&) {
      rep.resource_incidents++;
      rep.checked++;
      continue;
    }
    if (got != ref && !rep.first_disagreement) rep.first_disagreement = w;
    if (got != ref) rep.disagreements++;
    rep.checked++;
  }
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

}  // namespace opda::zoo
