#include "opda/symbols.hpp"

#include <mutex>
#include <unordered_map>

namespace opda {

namespace {

struct Table {
  std::mutex mu;
  std::vector<std::string> names;
  std::unordered_map<std::string, Symbol> ids;

  Table() {
    for (const char* s : {"<lambda>", "<cent>", "<dollar>"}) {
      Symbol id = static_cast<Symbol>(names.size());
      names.emplace_back(s);
      ids.emplace(s, id);
    }
  }
};

Table& table() {
  static Table t;
  return t;
}

}  // namespace

Symbol intern_symbol(std::string_view name) {
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.mu);
  auto it = t.ids.find(std::string(name));
  if (it != t.ids.end()) return it->second;
  Symbol id = static_cast<Symbol>(t.names.size());
  t.names.emplace_back(name);
  t.ids.emplace(t.names.back(), id);
  return id;
}

const std::string& symbol_name(Symbol s) {
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.mu);
  return t.names.at(s);
}

bool is_reserved_token(std::string_view name) {
  return name == "<lambda>" || name == "<cent>" || name == "<dollar>" ||
         name == "<natural>" || name == "<hash>";
}

Symbol natural_symbol() {
  static Symbol s = intern_symbol("~");
  return s;
}

Symbol hash_symbol() {
  static Symbol s = intern_symbol("_");
  return s;
}

Word make_word(std::initializer_list<std::string_view> tokens) {
  Word w;
  w.reserve(tokens.size());
  for (auto t : tokens) w.push_back(intern_symbol(t));
  return w;
}

Word word_from_tokens(const std::vector<std::string>& tokens) {
  Word w;
  w.reserve(tokens.size());
  for (const auto& t : tokens) w.push_back(intern_symbol(t));
  return w;
}

std::string render_word(const Word& w) {
  bool single = true;
  for (Symbol s : w) {
    if (symbol_name(s).size() != 1) {
      single = false;
      break;
    }
  }
  return render_word(w, !single);
}

std::string render_word(const Word& w, bool force_spaced) {
  std::string out;
  for (size_t i = 0; i < w.size(); ++i) {
    if (force_spaced && i > 0) out += ' ';
    out += symbol_name(w[i]);
  }
  return out;
}

Word reversed(const Word& w) { return Word(w.rbegin(), w.rend()); }

Word delete_natural(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Symbol s : w) {
    if (s != natural_symbol()) out.push_back(s);
  }
  return out;
}

}  // namespace opda
