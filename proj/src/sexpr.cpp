#include "sexpr.hpp"

#include "fdb/errors.hpp"

namespace fdb::detail {
namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  Sexpr read() {
    skip_space();
    Sexpr e = read_expr();
    skip_space();
    if (!eof()) fail("trailing content after expression");
    return e;
  }

 private:
  Sexpr read_expr() {
    if (eof()) fail("unexpected end of input");
    Sexpr e;
    e.line = line_;
    e.col = col_;
    char c = peek();
    if (c == '(') {
      get();
      e.is_list = true;
      for (;;) {
        skip_space();
        if (eof()) fail("unclosed '('");
        if (peek() == ')') {
          get();
          return e;
        }
        e.items.push_back(read_expr());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      get();
      e.quoted = true;
      for (;;) {
        if (eof()) fail("unclosed string");
        char d = get();
        if (d == '"') return e;
        if (d == '\\') {
          if (eof()) fail("dangling escape");
          char esc = get();
          if (esc != '"' && esc != '\\') fail("unknown escape");
          e.atom += esc;
        } else {
          e.atom += d;
        }
      }
    }
    while (!eof() && !is_space(peek()) && peek() != '(' && peek() != ')' &&
           peek() != '"')
      e.atom += get();
    return e;
  }

  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_space() {
    while (!eof() && is_space(peek())) get();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1, col_ = 1;
};

}  // namespace

Sexpr parse_sexpr(const std::string& text) { return Reader(text).read(); }

std::string quote_atom(const std::string& text, bool forceQuote) {
  bool need = forceQuote || text.empty();
  for (char c : text)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' ||
        c == ')' || c == '"' || c == '\\')
      need = true;
  if (!need) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace fdb::detail
