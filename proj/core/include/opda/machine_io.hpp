#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "opda/machine.hpp"

namespace opda {

// Machine-definition text format.  Whitespace-tokenized, '#' starts a
// comment to end of line, '-' denotes lambda in transition slots.  Parse
// errors report line numbers.  parse(write(m)) reproduces m bit-exactly.
MachineSpec parse_machine(std::istream& in, const std::string& origin);
MachineSpec parse_machine_file(const std::filesystem::path& path);
MachineSpec parse_machine_string(const std::string& text,
                                 const std::string& origin = "<string>");

std::string write_machine(const MachineSpec& m);
void write_machine_file(const MachineSpec& m,
                        const std::filesystem::path& path);

// Parses an input word against a machine's input alphabet: if every
// alphabet token is a single character the text is read char-by-char,
// otherwise it is split on whitespace.  Throws InputAlphabetError on
// unknown symbols.
Word parse_word(const std::string& text, const Word& alphabet);

}  // namespace opda
