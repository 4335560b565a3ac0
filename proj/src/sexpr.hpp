#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fdb::detail {

/// Minimal s-expression: an atom or a list.  Atoms remember whether they
/// were double-quoted so value parsing can keep quoted text as strings.
struct Sexpr {
  bool is_list = false;
  bool quoted = false;
  std::string atom;
  std::vector<Sexpr> items;
  std::size_t line = 1, col = 1;
};

/// Parses exactly one expression; trailing content is an error.  Quoted
/// atoms support \" and \\ escapes.  Throws ParseError with line:col.
Sexpr parse_sexpr(const std::string& text);

/// Escapes and quotes an atom if needed (whitespace, parens, quotes,
/// empty, or forceQuote).
std::string quote_atom(const std::string& text, bool forceQuote);

}  // namespace fdb::detail
