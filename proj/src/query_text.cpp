#include "fdb/query_text.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "fdb/errors.hpp"

namespace fdb {

namespace {

struct Tok {
  enum Kind { Ident, Int, Str, Punct, End };
  Kind kind = End;
  std::string text;
  int line = 1, col = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  Lexer(const std::string& text, std::string file)
      : text_(text), file_(std::move(file)) {}

  std::vector<Tok> run() {
    std::vector<Tok> out;
    for (;;) {
      skip_space();
      Tok t = next();
      out.push_back(t);
      if (t.kind == Tok::End) return out;
    }
  }

  [[noreturn]] void fail(int line, int col, const std::string& msg) const {
    std::string where = file_.empty() ? "" : file_ + ":";
    throw ParseError(where + std::to_string(line) + ":" + std::to_string(col) +
                     ": " + msg);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++pos_, ++line_, col_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_, ++col_;
      } else {
        return;
      }
    }
  }

  Tok next() {
    Tok t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) return t;

    char c = text_[pos_];
    if (ident_start(c)) {
      t.kind = Tok::Ident;
      while (pos_ < text_.size() && ident_char(text_[pos_])) take(t);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      t.kind = Tok::Int;
      if (c == '-') take(t);
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        take(t);
      return t;
    }
    if (c == '"') {
      t.kind = Tok::Str;
      ++pos_, ++col_;
      while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n')
        take(t);
      if (pos_ >= text_.size() || text_[pos_] != '"')
        fail(t.line, t.col, "unterminated string constant");
      ++pos_, ++col_;
      return t;
    }

    t.kind = Tok::Punct;
    static const char* two[] = {"!=", "<=", ">="};
    for (const char* op : two)
      if (text_.compare(pos_, 2, op) == 0) {
        take(t);
        take(t);
        return t;
      }
    if (std::string("();,.=<>").find(c) != std::string::npos) {
      take(t);
      return t;
    }
    fail(t.line, t.col, std::string("unexpected character '") + c + "'");
  }

  void take(Tok& t) { t.text += text_[pos_++], ++col_; }

  const std::string& text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& text, std::string file)
      : lex_(text, std::move(file)), toks_(lex_.run()) {}

  Query run() {
    Query q;
    expect_keyword("RELATIONS");
    parse_atoms(q);
    if (accept_keyword("WHERE")) parse_conditions(q);
    if (accept_keyword("PROJECT")) parse_projection(q);
    if (peek().kind != Tok::End)
      fail(peek(), "expected WHERE, PROJECT, or end of query");
    return q;
  }

 private:
  const Tok& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Tok& advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Tok& t, const std::string& msg) const {
    lex_.fail(t.line, t.col, msg);
  }

  bool accept_punct(const char* p) {
    if (peek().kind == Tok::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_punct(const char* p, const char* what) {
    if (!accept_punct(p))
      fail(peek(), std::string("expected '") + p + "' " + what);
  }
  bool accept_keyword(const char* kw) {
    if (peek().kind == Tok::Ident && peek().text == kw) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_keyword(const char* kw) {
    if (!accept_keyword(kw))
      fail(peek(), std::string("expected ") + kw);
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident)
      fail(peek(), std::string("expected ") + what);
    return advance().text;
  }

  static bool is_keyword(const std::string& s) {
    return s == "RELATIONS" || s == "WHERE" || s == "PROJECT" || s == "AND";
  }

  void parse_atoms(Query& q) {
    std::set<std::string> seen;
    for (;;) {
      const Tok& nameTok = peek();
      std::string name = expect_ident("a relation name");
      if (is_keyword(name)) fail(nameTok, name + " cannot name a relation");
      if (!seen.insert(name).second)
        fail(nameTok, "relation " + name + " listed twice");
      expect_punct("(", "before the column list");
      QueryAtom atom{name, name, {}};
      std::set<std::string> cols;
      for (;;) {
        const Tok& colTok = peek();
        std::string col = expect_ident("a column name");
        if (!cols.insert(col).second)
          fail(colTok, "column " + col + " listed twice in " + name);
        atom.columns.push_back(std::move(col));
        if (!accept_punct(",")) break;
      }
      expect_punct(")", "after the column list");
      q.atoms.push_back(std::move(atom));
      if (!accept_punct(";")) break;
      // A trailing ';' before WHERE/PROJECT or the end is harmless.
      if (peek().kind != Tok::Ident || is_keyword(peek().text)) break;
    }
  }

  Attribute parse_attr(const Query& q) {
    const Tok& atomTok = peek();
    std::string atom = expect_ident("an attribute reference R.A");
    expect_punct(".", "in the attribute reference");
    const Tok& colTok = peek();
    std::string col = expect_ident("a column name after '.'");
    const QueryAtom* found = q.find_atom(atom);
    if (!found) fail(atomTok, "relation " + atom + " is not listed under RELATIONS");
    bool has = false;
    for (const std::string& c : found->columns) has = has || c == col;
    if (!has) fail(colTok, atom + " has no column " + col);
    return Attribute{atom, col};
  }

  bool rhs_is_attr() const {
    return peek().kind == Tok::Ident && !is_keyword(peek().text) &&
           peek(1).kind == Tok::Punct && peek(1).text == ".";
  }

  void parse_conditions(Query& q) {
    do {
      Attribute lhs = parse_attr(q);
      const Tok& opTok = peek();
      static const std::set<std::string> kOps = {"=", "!=", "<", "<=", ">", ">="};
      if (opTok.kind != Tok::Punct || !kOps.count(opTok.text))
        fail(opTok, "expected a comparison operator");
      std::string op = advance().text;

      if (rhs_is_attr()) {
        const Tok& rhsTok = peek();
        Attribute rhs = parse_attr(q);
        if (op != "=")
          fail(opTok, "attributes join with '=' only");
        if (lhs == rhs)
          fail(rhsTok, "attribute compared with itself");
        q.equalities.emplace_back(std::move(lhs), std::move(rhs));
      } else {
        const Tok& t = peek();
        Value v;
        if (t.kind == Tok::Int)
          v = Value::parse(advance().text);
        else if (t.kind == Tok::Str)
          v = Value::string(advance().text);
        else if (t.kind == Tok::Ident && !is_keyword(t.text))
          v = Value::string(advance().text);
        else
          fail(t, "expected a constant or attribute reference");
        q.constants.push_back({std::move(lhs), parse_cmp_op(op), v});
      }
    } while (accept_keyword("AND"));
  }

  void parse_projection(Query& q) {
    do {
      q.projection.push_back(parse_attr(q));
    } while (accept_punct(","));
  }

  Lexer lex_;
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string& s) {
  if (s.empty() || Value::is_integer_literal(s)) return true;
  if (!ident_start(s[0])) return true;
  for (char c : s)
    if (!ident_char(c)) return true;
  return false;
}

std::string render_value(const Value& v) {
  if (v.is_int()) return v.to_string();
  const std::string& s = v.as_string();
  return needs_quotes(s) ? "\"" + s + "\"" : s;
}

}  // namespace

Query parse_query_text(const std::string& text) {
  return Parser(text, "").run();
}

Query load_query_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open query file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parser(buf.str(), path).run();
}

std::string render_query_text(const Query& q) {
  std::ostringstream os;
  os << "RELATIONS ";
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    const QueryAtom& a = q.atoms[i];
    if (a.name != a.relation)
      throw SemanticError("atom " + a.name + " aliases relation " +
                          a.relation + ", which the text format cannot say");
    os << (i ? "; " : "") << a.name << "(";
    for (std::size_t c = 0; c < a.columns.size(); ++c)
      os << (c ? "," : "") << a.columns[c];
    os << ")";
  }
  os << "\n";

  bool any = false;
  for (const auto& [l, r] : q.equalities) {
    os << (any ? " AND " : "WHERE ") << l.qualified() << " = " << r.qualified();
    any = true;
  }
  for (const ConstPredicate& p : q.constants) {
    os << (any ? " AND " : "WHERE ") << p.attr.qualified() << " "
       << to_string(p.op) << " " << render_value(p.constant);
    any = true;
  }
  if (any) os << "\n";

  for (std::size_t i = 0; i < q.projection.size(); ++i)
    os << (i ? ", " : "PROJECT ") << q.projection[i].qualified();
  if (!q.projection.empty()) os << "\n";
  return os.str();
}

}  // namespace fdb
