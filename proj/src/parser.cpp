#include "impverif/syntax.hpp"

#include <cctype>
#include <set>

namespace impverif {

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

const std::set<std::string> kKeywords = {"let",   "in",     "if",      "then",  "else", "ifnp", "alloc",
                                         "mkarray", "assert", "alias", "autoalias", "int", "ref",
                                         "true",  "false"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '$'; }

std::vector<Token> lex(const std::string& s) {
  static const char* two[] = {"<=", ">=", "!=", ":=", "->", "&&", "||", "=>", "++"};
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Int, s.substr(i, j - i), pos});
      adv(j - i);
      continue;
    }
    // `_` alone is the nondeterministic integer; `_x` is an identifier.
    if (ident_start(c) || c == '$') {
      size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word = s.substr(i, j - i);
      out.push_back({word == "_" ? Tok::Sym : Tok::Ident, word, pos});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char* t : two) {
      if (s.compare(i, 2, t) == 0) {
        out.push_back({Tok::Sym, t, pos});
        adv(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("{}()[]<>=,;:+-*/|!").find(c) != std::string::npos) {
      out.push_back({Tok::Sym, std::string(1, c), pos});
      adv(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

std::optional<Cmp> cmp_of(const std::string& t) {
  if (t == "=") return Cmp::Eq;
  if (t == "!=") return Cmp::Ne;
  if (t == "<") return Cmp::Lt;
  if (t == "<=") return Cmp::Le;
  if (t == ">") return Cmp::Gt;
  if (t == ">=") return Cmp::Ge;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Program program() {
    Program p;
    std::set<std::string> names;
    while (peek().kind == Tok::Ident) {
      Def d = def();
      if (!names.insert(d.name).second) throw ParseError("duplicate function '" + d.name + "'", d.pos);
      p.defs.push_back(std::move(d));
    }
    p.main = block();
    expect_end();
    return p;
  }

  Formula formula_only() {
    Formula f = formula();
    expect_end();
    return f;
  }

 private:
  std::vector<Token> toks_;
  size_t k_ = 0;

  const Token& peek(size_t ahead = 0) const { return toks_[std::min(k_ + ahead, toks_.size() - 1)]; }
  bool is_sym(const std::string& s, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Sym && t.text == s;
  }
  bool is_kw(const std::string& s) const {
    const Token& t = peek();
    return t.kind == Tok::Ident && t.text == s;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError("expected " + what + ", got " + got, t.pos);
  }

  void expect_sym(const std::string& s) {
    if (!is_sym(s)) fail("'" + s + "'");
    ++k_;
  }
  void expect_kw(const std::string& s) {
    if (!is_kw(s)) fail("'" + s + "'");
    ++k_;
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("end of input");
  }

  std::string ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text)) fail("identifier");
    ++k_;
    return t.text;
  }

  BigInt integer() {
    const Token& t = peek();
    if (t.kind != Tok::Int) fail("integer");
    ++k_;
    return BigInt(t.text);
  }

  bool at_ident() const { return peek().kind == Tok::Ident && !kKeywords.count(peek().text); }

  Operand operand() {
    if (is_sym("-") && peek(1).kind == Tok::Int) {
      ++k_;
      return Operand::lit(-integer());
    }
    if (peek().kind == Tok::Int) return Operand::lit(integer());
    if (at_ident()) return Operand::var(ident());
    fail("variable or integer");
  }

  SimpleType stype() {
    expect_kw("int");
    SimpleType t;
    while (is_kw("ref")) {
      ++k_;
      ++t.ref_depth;
    }
    return t;
  }

  std::vector<std::pair<std::string, SimpleType>> binds() {
    std::vector<std::pair<std::string, SimpleType>> out;
    if (!at_ident()) return out;
    while (true) {
      std::string x = ident();
      expect_sym(":");
      out.emplace_back(x, stype());
      if (!is_sym(",")) break;
      ++k_;
    }
    return out;
  }

  Def def() {
    Def d;
    d.pos = peek().pos;
    d.name = ident();
    expect_sym("(");
    std::set<std::string> seen;
    if (!is_sym(")")) {
      while (true) {
        SourcePos pp = peek().pos;
        std::string x = ident();
        if (!seen.insert(x).second) throw ParseError("duplicate parameter '" + x + "'", pp);
        d.params.push_back(x);
        if (!is_sym(",")) break;
        ++k_;
      }
    }
    expect_sym(")");
    if (is_sym("[")) {
      ++k_;
      FunAnnot a;
      expect_sym("<");
      a.pre = binds();
      expect_sym(">");
      expect_sym("->");
      expect_sym("<");
      a.post = binds();
      expect_sym("|");
      a.ret = stype();
      expect_sym(">");
      expect_sym("]");
      d.annot = std::move(a);
    }
    d.body = block();
    return d;
  }

  ExprPtr block() {
    expect_sym("{");
    ExprPtr e = expr();
    expect_sym("}");
    return e;
  }

  ExprPtr expr() {
    SourcePos pos = peek().pos;
    if (is_kw("let")) {
      ++k_;
      std::string x = ident();
      expect_sym("=");
      if (is_kw("alloc") || is_kw("mkarray")) {
        ++k_;
        BigInt n = integer();
        expect_kw("in");
        return mk_mkarray(x, n, expr(), pos);
      }
      Rhs r = rhs();
      expect_kw("in");
      return mk_let(x, std::move(r), expr(), pos);
    }
    if (is_kw("if")) {
      ++k_;
      Cond c;
      c.a = operand();
      auto cmp = peek().kind == Tok::Sym ? cmp_of(peek().text) : std::nullopt;
      if (!cmp) fail("comparison operator");
      ++k_;
      c.cmp = *cmp;
      c.b = operand();
      expect_kw("then");
      ExprPtr t = block();
      expect_kw("else");
      ExprPtr f = block();
      return mk_if(std::move(c), t, f, pos);
    }
    if (is_kw("ifnp")) {
      ++k_;
      std::string x = ident();
      expect_kw("then");
      ExprPtr t = block();
      expect_kw("else");
      ExprPtr f = block();
      return mk_ifnp(x, t, f, pos);
    }
    if (is_kw("assert")) {
      ++k_;
      expect_sym("(");
      Formula phi = formula();
      expect_sym(")");
      expect_sym(";");
      return mk_assert(phi, expr(), pos);
    }
    if (is_kw("alias") || is_kw("autoalias")) {
      bool automatic = peek().text == "autoalias";
      ++k_;
      expect_sym("(");
      std::string x = ident();
      expect_sym("=");
      if (is_sym("*")) {
        if (automatic) fail("pointer addition");
        ++k_;
        std::string y = ident();
        expect_sym(")");
        expect_sym(";");
        return mk_alias_deref(x, y, expr(), pos);
      }
      std::string y = ident();
      if (!is_sym("+") && !is_sym("++")) fail("'+'");
      ++k_;
      std::string z = ident();
      expect_sym(")");
      expect_sym(";");
      return mk_alias_addptr(x, y, z, expr(), automatic, pos);
    }
    if (is_sym("{")) return block();
    if (at_ident() && is_sym(":=", 1)) {
      std::string x = ident();
      ++k_;
      Operand src = operand();
      expect_sym(";");
      return mk_assign(x, std::move(src), expr(), pos);
    }
    Operand o = operand();
    if (o.is_var()) return mk_var(o.name(), pos);
    return mk_int(o.value(), pos);
  }

  Rhs rhs() {
    if (is_sym("_")) {
      ++k_;
      return rhs_nondet();
    }
    if (is_sym("{")) return rhs_sub(block());
    if (is_sym("*")) {
      ++k_;
      return rhs_deref(ident());
    }
    if (is_sym("-") && peek(1).kind != Tok::Int) {
      ++k_;
      return rhs_neg(operand());
    }
    if (at_ident() && is_sym("(", 1)) {
      std::string f = ident();
      ++k_;
      std::vector<Operand> args;
      if (!is_sym(")")) {
        while (true) {
          args.push_back(operand());
          if (!is_sym(",")) break;
          ++k_;
        }
      }
      expect_sym(")");
      return rhs_call(f, std::move(args));
    }
    Operand a = operand();
    if (is_sym("++")) {
      ++k_;
      if (!a.is_var()) fail("pointer variable");
      return rhs_addptr(a.name(), ident());
    }
    for (BinOpKind op : {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul, BinOpKind::Div}) {
      if (is_sym(binop_symbol(op))) {
        ++k_;
        return rhs_binop(op, a, operand());
      }
    }
    return a.is_var() ? rhs_var(a.name()) : rhs_int(a.value());
  }

  // Formulas: implication is right-associative and binds loosest.
  Formula formula() {
    Formula lhs = disjunction();
    if (is_sym("=>")) {
      ++k_;
      return Formula::implies(lhs, formula());
    }
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> fs{conjunction()};
    while (is_sym("||")) {
      ++k_;
      fs.push_back(conjunction());
    }
    return fs.size() == 1 ? fs[0] : Formula::disj(fs);
  }

  Formula conjunction() {
    std::vector<Formula> fs{unary()};
    while (is_sym("&&")) {
      ++k_;
      fs.push_back(unary());
    }
    return fs.size() == 1 ? fs[0] : Formula::conj(fs);
  }

  Formula unary() {
    if (is_sym("!")) {
      ++k_;
      return Formula::negate(unary());
    }
    if (is_kw("true")) {
      ++k_;
      return Formula::top();
    }
    if (is_kw("false")) {
      ++k_;
      return Formula::bottom();
    }
    if (is_sym("(")) {
      // Either a parenthesized formula or an atom starting with a parenthesized term.
      size_t save = k_;
      try {
        ++k_;
        Formula f = formula();
        expect_sym(")");
        const Token& t = peek();
        bool term_continues = t.kind == Tok::Sym && (cmp_of(t.text) || t.text == "+" || t.text == "-" ||
                                                     t.text == "*");
        if (!term_continues) return f;
      } catch (const ParseError&) {
      }
      k_ = save;
    }
    return atom();
  }

  Formula atom() {
    Term l = term();
    auto c = peek().kind == Tok::Sym ? cmp_of(peek().text) : std::nullopt;
    if (!c) fail("comparison operator");
    ++k_;
    Term r = term();
    return Formula::atom(l, *c, r);
  }

  Term term() {
    Term t = product();
    while (is_sym("+") || is_sym("-")) {
      bool plus = peek().text == "+";
      ++k_;
      Term u = product();
      if (plus)
        t += u;
      else
        t -= u;
    }
    return t;
  }

  Term product() {
    SourcePos pos = peek().pos;
    Term t = factor();
    while (is_sym("*")) {
      ++k_;
      t = t * factor();
      if (t.degree() > 1) throw ParseError("nonlinear term", pos);
    }
    return t;
  }

  Term factor() {
    if (is_sym("-")) {
      ++k_;
      return -factor();
    }
    if (peek().kind == Tok::Int) return Term(integer());
    if (is_sym("(")) {
      ++k_;
      Term t = term();
      expect_sym(")");
      return t;
    }
    return Term::var(ident());
  }
};

}  // namespace

Program parse(const std::string& text) { return Parser(text).program(); }

Formula parse_formula(const std::string& text) { return Parser(text).formula_only(); }

}  // namespace impverif
