#include "opda/expr.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "opda/errors.hpp"
#include "opda/machine_io.hpp"

namespace opda {

namespace {

Word sorted_by_name(std::set<Symbol> syms) {
  std::vector<std::string> names;
  for (Symbol s : syms) names.push_back(symbol_name(s));
  std::sort(names.begin(), names.end());
  Word out;
  for (const auto& n : names) out.push_back(intern_symbol(n));
  return out;
}

Word union_alphabet(const Word& a, const Word& b) {
  std::set<Symbol> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return sorted_by_name(std::move(s));
}

std::shared_ptr<LanguageExpr> node(ExprTag tag) {
  auto e = std::make_shared<LanguageExpr>();
  e->tag = tag;
  return e;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

void check_reducer(const MachineSpec& m, OracleMode mode, const ExprPtr& e,
                   const char* what) {
  validate_or_throw(m);
  require(m.mode == mode, std::string(what) + " node: reducer '" + m.name +
                              "' has the wrong oracle mode");
  // Track and builtin oracles resolve their alphabets lazily; the boundary
  // check applies only when the child's alphabet is concrete.
  if (expr_alphabet(e).empty()) return;
  for (const Word& qa : m.query_alphabets) {
    require(same_alphabet(qa, expr_alphabet(e)),
            std::string(what) + " node: query alphabet of '" + m.name +
                "' does not match the oracle's alphabet");
  }
}

}  // namespace

ExprPtr machine_expr(MachineSpec m) {
  return machine_expr(std::make_shared<const MachineSpec>(std::move(m)));
}

ExprPtr machine_expr(std::shared_ptr<const MachineSpec> m) {
  validate_or_throw(*m);
  require(m->mode == OracleMode::None,
          "machine node requires an oracle-free machine");
  auto e = node(ExprTag::Machine);
  e->machine = std::move(m);
  e->alphabet = e->machine->input_alphabet;
  return e;
}

ExprPtr builtin_expr(const std::string& name) {
  auto e = node(ExprTag::Builtin);
  e->builtin_name = name;
  // Alphabet resolved lazily through the zoo (see eval.cpp).
  return e;
}

ExprPtr finite_expr(std::set<Word> words) {
  auto e = node(ExprTag::FiniteSet);
  std::set<Symbol> syms;
  for (const Word& w : words) syms.insert(w.begin(), w.end());
  e->alphabet = sorted_by_name(std::move(syms));
  e->finite_words = std::move(words);
  return e;
}

ExprPtr complement_expr(ExprPtr c) {
  auto e = node(ExprTag::Complement);
  e->alphabet = expr_alphabet(c);
  e->child = std::move(c);
  return e;
}

ExprPtr intersect_expr(ExprPtr a, ExprPtr b) {
  auto e = node(ExprTag::Intersect);
  e->alphabet = union_alphabet(expr_alphabet(a), expr_alphabet(b));
  e->child = std::move(a);
  e->child2 = std::move(b);
  return e;
}

ExprPtr union_expr(ExprPtr a, ExprPtr b) {
  auto e = node(ExprTag::Union);
  e->alphabet = union_alphabet(expr_alphabet(a), expr_alphabet(b));
  e->child = std::move(a);
  e->child2 = std::move(b);
  return e;
}

ExprPtr reverse_expr(ExprPtr c) {
  auto e = node(ExprTag::Reverse);
  e->alphabet = expr_alphabet(c);
  e->child = std::move(c);
  return e;
}

Symbol dyck_open(int index) {
  return intern_symbol("a" + std::to_string(index));
}

Symbol dyck_close(int index) {
  return intern_symbol("a" + std::to_string(index) + "'");
}

Word dyck_alphabet(int d) {
  Word w;
  for (int i = 1; i <= d; ++i) {
    w.push_back(dyck_open(i));
    w.push_back(dyck_close(i));
  }
  return w;
}

ExprPtr dyck_expr(int d) {
  require(d >= 1, "dyck arity must be at least 1");
  auto e = node(ExprTag::Dyck);
  e->dyck_d = d;
  e->alphabet = dyck_alphabet(d);
  return e;
}

ExprPtr dyck_ext_expr(int d) {
  require(d >= 1, "dyck-ext arity must be at least 1");
  auto e = node(ExprTag::DyckExt);
  e->dyck_d = d;
  return e;
}

ExprPtr many_one_expr(std::shared_ptr<const MachineSpec> reducer, ExprPtr c) {
  check_reducer(*reducer, OracleMode::ManyOne, c, "many-one");
  auto e = node(ExprTag::ManyOne);
  e->machine = std::move(reducer);
  e->alphabet = e->machine->input_alphabet;
  e->child = std::move(c);
  return e;
}

ExprPtr many_one_expr(MachineSpec reducer, ExprPtr c) {
  return many_one_expr(std::make_shared<const MachineSpec>(std::move(reducer)),
                       std::move(c));
}

ExprPtr turing_expr(std::shared_ptr<const MachineSpec> reducer, ExprPtr c) {
  check_reducer(*reducer, OracleMode::Turing, c, "turing");
  auto e = node(ExprTag::Turing);
  e->machine = std::move(reducer);
  e->alphabet = e->machine->input_alphabet;
  e->child = std::move(c);
  return e;
}

ExprPtr turing_expr(MachineSpec reducer, ExprPtr c) {
  return turing_expr(std::make_shared<const MachineSpec>(std::move(reducer)),
                     std::move(c));
}

ExprPtr ktt_expr(std::shared_ptr<const MachineSpec> reducer,
                 std::shared_ptr<const MachineSpec> table, ExprPtr c) {
  check_reducer(*reducer, OracleMode::Ktt, c, "ktt");
  validate_or_throw(*table);
  require(table->kind == Kind::Dfa && table->query_alphabets.empty(),
          "ktt truth table must be a dfa without query tapes");
  auto e = node(ExprTag::Ktt);
  e->machine = std::move(reducer);
  e->table = std::move(table);
  e->alphabet = e->machine->input_alphabet;
  e->child = std::move(c);
  return e;
}

const Word& expr_alphabet(const ExprPtr& e) { return e->alphabet; }

namespace {

struct BracketInfo {
  int index = 0;     // 0 = not a bracket token
  bool close = false;
};

BracketInfo bracket_info(Symbol s) {
  const std::string& n = symbol_name(s);
  BracketInfo b;
  std::string_view v(n);
  if (v.size() >= 2 && v.back() == '\'') {
    b.close = true;
    v.remove_suffix(1);
  }
  if (v.size() < 2 || v[0] != 'a') return {};
  int idx = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] < '0' || v[i] > '9') return {};
    idx = idx * 10 + (v[i] - '0');
  }
  if (idx <= 0) return {};
  b.index = idx;
  return b;
}

}  // namespace

bool dyck_balanced(const Word& w, int d) {
  std::vector<int> open;
  for (Symbol s : w) {
    BracketInfo b = bracket_info(s);
    if (b.index == 0) return false;
    if (d > 0 && b.index > d) return false;
    if (!b.close) {
      open.push_back(b.index);
    } else {
      if (open.empty() || open.back() != b.index) return false;
      open.pop_back();
    }
  }
  return open.empty();
}

Symbol track_symbol(const std::vector<Symbol>& parts) {
  std::string n;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) n += '|';
    n += symbol_name(parts[i]);
  }
  return intern_symbol(n);
}

std::vector<Word> split_tracks(const Word& w, int width) {
  std::vector<Word> tracks(width);
  for (Symbol col : w) {
    const std::string& n = symbol_name(col);
    std::vector<std::string> parts(1);
    for (char c : n) {
      if (c == '|') parts.emplace_back();
      else parts.back() += c;
    }
    if (static_cast<int>(parts.size()) != width) return {};
    for (int i = 0; i < width; ++i) tracks[i].push_back(intern_symbol(parts[i]));
  }
  return tracks;
}

// ---------------------------------------------------------------------------
// Text format.

namespace {

struct SToken {
  enum Kind { LParen, RParen, Atom, String } kind;
  std::string text;
  int line;
};

std::vector<SToken> slex(const std::string& text, const std::string& origin) {
  std::vector<SToken> out;
  int line = 1;
  for (size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == ';' || c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      out.push_back({SToken::LParen, "(", line});
      ++i;
    } else if (c == ')') {
      out.push_back({SToken::RParen, ")", line});
      ++i;
    } else if (c == '"') {
      std::string s;
      ++i;
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\n') ++line;
        s += text[i++];
      }
      if (i == text.size()) throw ParseError(origin, line, "unterminated string");
      ++i;
      out.push_back({SToken::String, s, line});
    } else {
      std::string a;
      while (i < text.size() && !isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != '(' && text[i] != ')') {
        a += text[i++];
      }
      out.push_back({SToken::Atom, a, line});
    }
  }
  return out;
}

class ExprParser {
 public:
  ExprParser(std::vector<SToken> toks, std::filesystem::path base,
             std::string origin)
      : toks_(std::move(toks)), base_(std::move(base)),
        origin_(std::move(origin)) {}

  ExprPtr parse() {
    ExprPtr e = parse_node();
    if (pos_ != toks_.size()) {
      throw ParseError(origin_, toks_[pos_].line, "trailing tokens");
    }
    return e;
  }

 private:
  const SToken& peek() {
    if (pos_ >= toks_.size()) {
      throw ParseError(origin_, toks_.empty() ? 0 : toks_.back().line,
                       "unexpected end of expression");
    }
    return toks_[pos_];
  }
  SToken next() {
    const SToken& t = peek();
    ++pos_;
    return t;
  }
  void expect_rparen() {
    if (next().kind != SToken::RParen) {
      throw ParseError(origin_, toks_[pos_ - 1].line, "expected ')'");
    }
  }
  std::string expect_string(const char* what) {
    SToken t = next();
    if (t.kind != SToken::String) {
      throw ParseError(origin_, t.line, std::string("expected a quoted ") + what);
    }
    return t.text;
  }
  int expect_int() {
    SToken t = next();
    if (t.kind != SToken::Atom) throw ParseError(origin_, t.line, "expected a number");
    return std::stoi(t.text);
  }

  std::shared_ptr<const MachineSpec> load_machine(const std::string& ref,
                                                  int line) {
    try {
      return std::make_shared<const MachineSpec>(
          parse_machine_file(base_ / ref));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(origin_, line, "cannot load machine '" + ref +
                                          "': " + ex.what());
    }
  }

  ExprPtr parse_node() {
    SToken t = next();
    if (t.kind != SToken::LParen) {
      throw ParseError(origin_, t.line, "expected '('");
    }
    SToken head = next();
    if (head.kind != SToken::Atom) {
      throw ParseError(origin_, head.line, "expected an operator name");
    }
    const std::string& op = head.text;
    std::shared_ptr<LanguageExpr> out;
    if (op == "machine") {
      std::string ref = expect_string("machine file");
      auto e = std::const_pointer_cast<LanguageExpr>(
          std::static_pointer_cast<const LanguageExpr>(
              machine_expr(load_machine(ref, head.line))));
      e->machine_ref = ref;
      expect_rparen();
      return e;
    } else if (op == "builtin") {
      SToken n = next();
      if (n.kind != SToken::Atom) throw ParseError(origin_, n.line, "expected a name");
      expect_rparen();
      return builtin_expr(n.text);
    } else if (op == "finite") {
      std::set<Word> words;
      std::vector<std::string> texts;
      while (peek().kind == SToken::String) texts.push_back(next().text);
      expect_rparen();
      // Tokenize each string: whitespace-separated tokens when present,
      // otherwise one symbol per character.
      std::set<Symbol> alpha;
      std::vector<Word> parsed;
      for (const auto& s : texts) {
        Word w;
        if (s.find(' ') != std::string::npos) {
          std::istringstream in(s);
          std::string tok;
          while (in >> tok) w.push_back(intern_symbol(tok));
        } else {
          for (char c : s) w.push_back(intern_symbol(std::string(1, c)));
        }
        words.insert(w);
      }
      return finite_expr(std::move(words));
    } else if (op == "complement") {
      ExprPtr c = parse_node();
      expect_rparen();
      return complement_expr(std::move(c));
    } else if (op == "intersect") {
      ExprPtr a = parse_node();
      ExprPtr b = parse_node();
      expect_rparen();
      return intersect_expr(std::move(a), std::move(b));
    } else if (op == "union") {
      ExprPtr a = parse_node();
      ExprPtr b = parse_node();
      expect_rparen();
      return union_expr(std::move(a), std::move(b));
    } else if (op == "reverse") {
      ExprPtr c = parse_node();
      expect_rparen();
      return reverse_expr(std::move(c));
    } else if (op == "dyck") {
      int d = expect_int();
      expect_rparen();
      return dyck_expr(d);
    } else if (op == "dyck-ext") {
      int d = expect_int();
      expect_rparen();
      return dyck_ext_expr(d);
    } else if (op == "many-one" || op == "turing") {
      std::string ref = expect_string("reducer file");
      auto red = load_machine(ref, head.line);
      ExprPtr c = parse_node();
      expect_rparen();
      auto e = std::const_pointer_cast<LanguageExpr>(
          std::static_pointer_cast<const LanguageExpr>(
              op == "many-one" ? many_one_expr(red, std::move(c))
                               : turing_expr(red, std::move(c))));
      e->machine_ref = ref;
      return e;
    } else if (op == "ktt") {
      std::string ref = expect_string("reducer file");
      std::string tref = expect_string("truth-table file");
      auto red = load_machine(ref, head.line);
      auto tab = load_machine(tref, head.line);
      ExprPtr c = parse_node();
      expect_rparen();
      auto e = std::const_pointer_cast<LanguageExpr>(
          std::static_pointer_cast<const LanguageExpr>(
              ktt_expr(red, tab, std::move(c))));
      e->machine_ref = ref;
      e->table_ref = tref;
      return e;
    }
    throw ParseError(origin_, head.line, "unknown operator '" + op + "'");
  }

  std::vector<SToken> toks_;
  size_t pos_ = 0;
  std::filesystem::path base_;
  std::string origin_;
};

void write_node(std::ostream& os, const LanguageExpr& e) {
  auto mref = [&](const std::string& ref,
                  const std::shared_ptr<const MachineSpec>& m) {
    os << '"' << (ref.empty() ? m->name + ".m" : ref) << '"';
  };
  switch (e.tag) {
    case ExprTag::Machine:
      os << "(machine ";
      mref(e.machine_ref, e.machine);
      os << ')';
      return;
    case ExprTag::Builtin:
      os << "(builtin " << e.builtin_name << ')';
      return;
    case ExprTag::FiniteSet: {
      os << "(finite";
      for (const Word& w : e.finite_words) {
        os << " \"" << render_word(w) << '"';
      }
      os << ')';
      return;
    }
    case ExprTag::Complement:
      os << "(complement ";
      write_node(os, *e.child);
      os << ')';
      return;
    case ExprTag::Intersect:
    case ExprTag::Union:
      os << (e.tag == ExprTag::Intersect ? "(intersect " : "(union ");
      write_node(os, *e.child);
      os << ' ';
      write_node(os, *e.child2);
      os << ')';
      return;
    case ExprTag::Reverse:
      os << "(reverse ";
      write_node(os, *e.child);
      os << ')';
      return;
    case ExprTag::Dyck:
      os << "(dyck " << e.dyck_d << ')';
      return;
    case ExprTag::DyckExt:
      os << "(dyck-ext " << e.dyck_d << ')';
      return;
    case ExprTag::ManyOne:
    case ExprTag::Turing:
      os << (e.tag == ExprTag::ManyOne ? "(many-one " : "(turing ");
      mref(e.machine_ref, e.machine);
      os << ' ';
      write_node(os, *e.child);
      os << ')';
      return;
    case ExprTag::Ktt:
      os << "(ktt ";
      mref(e.machine_ref, e.machine);
      os << ' ';
      os << '"' << (e.table_ref.empty() ? e.table->name + ".m" : e.table_ref)
         << '"';
      os << ' ';
      write_node(os, *e.child);
      os << ')';
      return;
  }
}

}  // namespace

ExprPtr parse_expr_string(const std::string& text,
                          const std::filesystem::path& base_dir,
                          const std::string& origin) {
  ExprParser p(slex(text, origin), base_dir, origin);
  return p.parse();
}

ExprPtr parse_expr_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_expr_string(ss.str(), path.parent_path(), path.string());
}

std::string write_expr(const ExprPtr& e) {
  std::ostringstream os;
  write_node(os, *e);
  os << '\n';
  return os.str();
}

}  // namespace opda
