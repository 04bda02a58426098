#include "opda/machine_io.hpp"

#include <fstream>
#include <sstream>

#include "opda/errors.hpp"

namespace opda {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Symbol read_slot(const std::string& tok) {
  if (tok == "-") return kLambda;
  return intern_symbol(tok);
}

Rational parse_weight(const std::string& text, const std::string& origin,
                      int line) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(text);
    return Rational(boost::multiprecision::cpp_int(text.substr(0, slash)),
                    boost::multiprecision::cpp_int(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ParseError(origin, line, "malformed weight '" + text + "'");
  }
}

}  // namespace

Rational parse_rational(const std::string& text) {
  return parse_weight(text, "<rational>", 0);
}

MachineSpec parse_machine(std::istream& in, const std::string& origin) {
  MachineSpec m;
  bool saw_machine = false, saw_end = false, saw_trans = false;
  bool has_groups = false;
  std::string line;
  int lineno = 0;

  auto err = [&](const std::string& msg) -> ParseError {
    return ParseError(origin, lineno, msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];

    if (head == "machine") {
      if (toks.size() != 2) throw err("expected: machine <name>");
      m.name = toks[1];
      saw_machine = true;
    } else if (head == "kind") {
      if (toks.size() != 2) throw err("expected: kind dfa|nfa|npda");
      if (toks[1] == "dfa") m.kind = Kind::Dfa;
      else if (toks[1] == "nfa") m.kind = Kind::Nfa;
      else if (toks[1] == "npda") m.kind = Kind::Npda;
      else throw err("unknown kind '" + toks[1] + "'");
    } else if (head == "oracle") {
      if (toks.size() < 2) throw err("expected: oracle <mode>");
      if (toks[1] == "none") m.mode = OracleMode::None;
      else if (toks[1] == "many-one") m.mode = OracleMode::ManyOne;
      else if (toks[1] == "turing") m.mode = OracleMode::Turing;
      else if (toks[1] == "ktt") {
        if (toks.size() != 3) throw err("expected: oracle ktt <k>");
        m.mode = OracleMode::Ktt;
        m.ktt_arity = std::stoi(toks[2]);
      } else throw err("unknown oracle mode '" + toks[1] + "'");
    } else if (head == "input") {
      for (size_t i = 1; i < toks.size(); ++i)
        m.input_alphabet.push_back(intern_symbol(toks[i]));
    } else if (head == "stack") {
      if (toks.size() < 2) throw err("stack line needs a bottom marker");
      for (size_t i = 1; i < toks.size(); ++i)
        m.stack_alphabet.push_back(intern_symbol(toks[i]));
    } else if (head == "query") {
      Word alpha;
      for (size_t i = 1; i < toks.size(); ++i)
        alpha.push_back(intern_symbol(toks[i]));
      m.query_alphabets.push_back(std::move(alpha));
    } else if (head == "start") {
      if (toks.size() != 2) throw err("expected: start <state>");
      m.start = m.add_state(toks[1]);
    } else if (head == "accept") {
      for (size_t i = 1; i < toks.size(); ++i)
        m.accepting[m.add_state(toks[i])] = 1;
    } else if (head == "reject") {
      for (size_t i = 1; i < toks.size(); ++i)
        m.rejecting[m.add_state(toks[i])] = 1;
    } else if (head == "query-state") {
      if (toks.size() != 2) throw err("expected: query-state <state>");
      m.query_state = m.add_state(toks[1]);
    } else if (head == "yes-state") {
      if (toks.size() != 2) throw err("expected: yes-state <state>");
      m.yes_state = m.add_state(toks[1]);
    } else if (head == "no-state") {
      if (toks.size() != 2) throw err("expected: no-state <state>");
      m.no_state = m.add_state(toks[1]);
    } else if (head == "trans") {
      saw_trans = true;
      // trans q read [top] -> p [; push ...] [; emit ...] [; group id w]
      std::vector<std::vector<std::string>> clauses(1);
      for (size_t i = 1; i < toks.size(); ++i) {
        if (toks[i] == ";") clauses.emplace_back();
        else clauses.back().push_back(toks[i]);
      }
      const auto& headc = clauses[0];
      size_t arrow = 0;
      while (arrow < headc.size() && headc[arrow] != "->") ++arrow;
      if (arrow == headc.size() || arrow + 2 != headc.size())
        throw err("expected: trans <q> <read> [<top>] -> <p>");
      Transition t;
      size_t fields = arrow;
      bool with_stack = (m.kind == Kind::Npda);
      if (with_stack ? fields != 3 : fields != 2)
        throw err(with_stack ? "npda trans needs <q> <read> <top>"
                             : "stackless trans needs <q> <read>");
      t.from = m.add_state(headc[0]);
      const std::string& rd = headc[1];
      if (rd == "-") t.read = kLambda;
      else if (rd == "<cent>") t.read = kCent;
      else if (rd == "<dollar>") t.read = kDollar;
      else t.read = intern_symbol(rd);
      if (with_stack) t.top = read_slot(headc[2]);
      t.to = m.add_state(headc[arrow + 1]);

      bool saw_push = false, saw_emit = false;
      int32_t group = -1;
      Rational weight;
      for (size_t ci = 1; ci < clauses.size(); ++ci) {
        const auto& c = clauses[ci];
        if (c.empty()) throw err("empty clause");
        if (c[0] == "push") {
          if (!with_stack) throw err("push clause on a stackless machine");
          if (saw_push) throw err("duplicate push clause");
          saw_push = true;
          if (c.size() == 2 && c[1] == "-") {
            // pop
          } else {
            for (size_t i = 1; i < c.size(); ++i)
              t.push.push_back(intern_symbol(c[i]));
          }
        } else if (c[0] == "emit") {
          if (saw_emit) throw err("duplicate emit clause");
          saw_emit = true;
          for (size_t i = 1; i < c.size(); ++i)
            t.emits.push_back(read_slot(c[i]));
        } else if (c[0] == "group") {
          if (c.size() != 3) throw err("expected: group <id> <p>/<q>");
          auto it = std::find(m.group_ids.begin(), m.group_ids.end(), c[1]);
          if (it == m.group_ids.end()) {
            group = static_cast<int32_t>(m.group_ids.size());
            m.group_ids.push_back(c[1]);
          } else {
            group = static_cast<int32_t>(it - m.group_ids.begin());
          }
          weight = parse_weight(c[2], origin, lineno);
          has_groups = true;
        } else {
          throw err("unknown clause '" + c[0] + "'");
        }
      }
      if (with_stack && !saw_push) throw err("npda trans needs a push clause");
      if (!saw_emit && !m.query_alphabets.empty())
        throw err("machine with query tapes needs an emit clause");
      if (t.emits.size() != m.query_alphabets.size())
        throw err("emit clause must name one slot per query tape");
      t.group = group;
      m.transitions.push_back(std::move(t));
      if (has_groups) {
        m.weights.resize(m.transitions.size());
        if (group >= 0) m.weights.back() = weight;
      } else if (!m.weights.empty()) {
        m.weights.resize(m.transitions.size());
      }
    } else if (head == "end") {
      saw_end = true;
      break;
    } else {
      throw err("unknown directive '" + head + "'");
    }
    if (saw_trans && (head == "input" || head == "stack" || head == "query"))
      throw err("header line after transitions");
  }
  if (!saw_machine) throw ParseError(origin, lineno, "missing machine line");
  if (!saw_end) throw ParseError(origin, lineno, "missing end line");
  if (!m.weights.empty()) m.weights.resize(m.transitions.size());
  if (m.states.empty()) throw ParseError(origin, lineno, "machine has no states");
  return m;
}

MachineSpec parse_machine_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string(), 0, "cannot open file");
  }
  return parse_machine(in, path.string());
}

MachineSpec parse_machine_string(const std::string& text,
                                 const std::string& origin) {
  std::istringstream in(text);
  return parse_machine(in, origin);
}

namespace {

std::string slot_name(Symbol s) {
  if (s == kLambda) return "-";
  if (s == kCent) return "<cent>";
  if (s == kDollar) return "<dollar>";
  return symbol_name(s);
}

void write_tokens(std::ostream& os, const std::string& head, const Word& w) {
  os << head;
  for (Symbol s : w) os << ' ' << symbol_name(s);
  os << '\n';
}

}  // namespace

std::string write_machine(const MachineSpec& m) {
  std::ostringstream os;
  os << "machine " << m.name << '\n';
  os << "kind " << kind_name(m.kind) << '\n';
  os << "oracle " << oracle_mode_name(m.mode, m.ktt_arity) << '\n';
  write_tokens(os, "input", m.input_alphabet);
  if (m.kind == Kind::Npda) write_tokens(os, "stack", m.stack_alphabet);
  for (const Word& qa : m.query_alphabets) write_tokens(os, "query", qa);
  os << "start " << m.states.at(m.start) << '\n';
  os << "accept";
  for (size_t q = 0; q < m.states.size(); ++q)
    if (m.accepting[q]) os << ' ' << m.states[q];
  os << '\n';
  os << "reject";
  for (size_t q = 0; q < m.states.size(); ++q)
    if (m.rejecting[q]) os << ' ' << m.states[q];
  os << '\n';
  if (m.mode == OracleMode::Turing) {
    os << "query-state " << m.states.at(m.query_state) << '\n';
    os << "yes-state " << m.states.at(m.yes_state) << '\n';
    os << "no-state " << m.states.at(m.no_state) << '\n';
  }
  for (size_t i = 0; i < m.transitions.size(); ++i) {
    const Transition& t = m.transitions[i];
    os << "trans " << m.states[t.from] << ' ' << slot_name(t.read);
    if (m.kind == Kind::Npda) os << ' ' << symbol_name(t.top);
    os << " -> " << m.states[t.to];
    if (m.kind == Kind::Npda) {
      os << " ; push";
      if (t.push.empty()) {
        os << " -";
      } else {
        for (Symbol s : t.push) os << ' ' << symbol_name(s);
      }
    }
    if (!m.query_alphabets.empty()) {
      os << " ; emit";
      for (Symbol s : t.emits) os << ' ' << slot_name(s);
    }
    if (t.group >= 0) {
      os << " ; group " << m.group_ids[t.group] << ' '
         << rational_str(m.weights[i]);
    }
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

void write_machine_file(const MachineSpec& m,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string(), 0, "cannot open file for writing");
  out << write_machine(m);
}

Word parse_word(const std::string& text, const Word& alphabet) {
  bool single = !alphabet.empty();
  for (Symbol s : alphabet) {
    if (symbol_name(s).size() != 1) {
      single = false;
      break;
    }
  }
  Word w;
  if (single) {
    for (char c : text) {
      if (c == ' ' || c == '\t') continue;
      std::string tok(1, c);
      Symbol s = intern_symbol(tok);
      if (!alphabet_contains(alphabet, s)) {
        throw InputAlphabetError("symbol '" + tok +
                                 "' is outside the input alphabet");
      }
      w.push_back(s);
    }
  } else {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      Symbol s = intern_symbol(tok);
      if (!alphabet_contains(alphabet, s)) {
        throw InputAlphabetError("symbol '" + tok +
                                 "' is outside the input alphabet");
      }
      w.push_back(s);
    }
  }
  return w;
}

}  // namespace opda
