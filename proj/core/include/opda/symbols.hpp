#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace opda {

// Symbols are interned process-wide; a Symbol is an index into the table.
using Symbol = uint32_t;

// Pre-interned sentinels.  They never appear in alphabets: <lambda> marks
// "no symbol" slots in transitions, <cent>/<dollar> are the endmarkers the
// engine adds around every input.
inline constexpr Symbol kLambda = 0;
inline constexpr Symbol kCent = 1;
inline constexpr Symbol kDollar = 2;

// A string over interned symbols.
using Word = std::vector<Symbol>;

Symbol intern_symbol(std::string_view name);
const std::string& symbol_name(Symbol s);

// The five reserved spellings that may never be used as alphabet symbols.
bool is_reserved_token(std::string_view name);

// Canonical padding symbol (the track/extension filler) and the canonical
// separator used in truth-table encodings.  Ordinary tokens, usable in
// alphabets.
Symbol natural_symbol();   // "~"
Symbol hash_symbol();      // "_"

Word make_word(std::initializer_list<std::string_view> tokens);
Word word_from_tokens(const std::vector<std::string>& tokens);

// Renders a word: single-character tokens are juxtaposed when the whole
// word consists of them, otherwise tokens are space-separated.  The empty
// word renders as "".
std::string render_word(const Word& w);
std::string render_word(const Word& w, bool force_spaced);

Word reversed(const Word& w);

// Deletes every occurrence of the padding symbol "~".
Word delete_natural(const Word& w);

}  // namespace opda
