#include "sysm/parser.hpp"

#include <cctype>
#include <vector>

namespace sysm {

namespace {

enum class Tk {
  Ident, Nat, Sym,        // Sym carries the brace-delimited body
  LParen, RParen, LBrack, RBrack, Comma, Dot, Bang, At, Colon,
  Tilde, Plus, AndOp, OrOp, ImpOp, EqEq, Le, Lt, Eq, NegInf, End
};

struct Tok {
  Tk k;
  std::string s;
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t i = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void err(const std::string& m) { throw ParseError(m, line, col); }

  void adv() {
    if (i < src.size() && src[i] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    i++;
  }

  std::vector<Tok> lex() {
    std::vector<Tok> out;
    while (i < src.size()) {
      char c = src[i];
      int L = line, C = col;
      if (isspace((unsigned char)c)) {
        adv();
        continue;
      }
      if (c == '#') {  // line comment
        while (i < src.size() && src[i] != '\n') adv();
        continue;
      }
      auto push = [&](Tk k, std::string s = "") { out.push_back({k, std::move(s), L, C}); };
      if (isdigit((unsigned char)c)) {
        std::string n;
        while (i < src.size() && isdigit((unsigned char)src[i])) {
          n += src[i];
          adv();
        }
        push(Tk::Nat, n);
        continue;
      }
      if (isalpha((unsigned char)c) || c == '_' || c == '$') {
        std::string id;
        while (i < src.size() &&
               (isalnum((unsigned char)src[i]) || src[i] == '_' || src[i] == '\'' ||
                src[i] == '$')) {
          id += src[i];
          adv();
        }
        if (id == "sym" && i < src.size() && src[i] == '{') {
          adv();
          std::string body;
          int depth = 1;
          while (i < src.size() && depth > 0) {
            if (src[i] == '{') depth++;
            if (src[i] == '}') {
              depth--;
              if (depth == 0) break;
            }
            body += src[i];
            adv();
          }
          if (depth != 0) err("unterminated sym{...}");
          adv();  // closing brace
          push(Tk::Sym, body);
          continue;
        }
        push(Tk::Ident, id);
        continue;
      }
      switch (c) {
        case '(': adv(); push(Tk::LParen); break;
        case ')': adv(); push(Tk::RParen); break;
        case '[': adv(); push(Tk::LBrack); break;
        case ']': adv(); push(Tk::RBrack); break;
        case ',': adv(); push(Tk::Comma); break;
        case '.': adv(); push(Tk::Dot); break;
        case '!': adv(); push(Tk::Bang); break;
        case '@': adv(); push(Tk::At); break;
        case ':': adv(); push(Tk::Colon); break;
        case '~': adv(); push(Tk::Tilde); break;
        case '+': adv(); push(Tk::Plus); break;
        case '/':
          adv();
          if (i < src.size() && src[i] == '\\') {
            adv();
            push(Tk::AndOp);
          } else
            err("expected /\\");
          break;
        case '\\':
          adv();
          if (i < src.size() && src[i] == '/') {
            adv();
            push(Tk::OrOp);
          } else
            err("expected \\/");
          break;
        case '=':
          adv();
          if (i < src.size() && src[i] == '>') {
            adv();
            push(Tk::ImpOp);
          } else if (i < src.size() && src[i] == '=') {
            adv();
            push(Tk::EqEq);
          } else
            push(Tk::Eq);
          break;
        case '<':
          adv();
          if (i < src.size() && src[i] == '=') {
            adv();
            push(Tk::Le);
          } else
            push(Tk::Lt);
          break;
        case '-': {
          adv();
          std::string id;
          while (i < src.size() && isalpha((unsigned char)src[i])) {
            id += src[i];
            adv();
          }
          if (id == "inf")
            push(Tk::NegInf);
          else
            err("unexpected '-'");
          break;
        }
        default: err(std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Tk::End, "", line, col});
    return out;
  }
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {
      "lam", "tylam", "comp", "ret", "act", "letc", "lete", "seqc", "seqe",
      "fix", "capp", "if", "then", "else", "true", "false", "forall",
      "exists", "on", "appf", "TT", "FF", "b", "unt", "Pi", "All", "PiC",
      "tcmp", "sym"};
  return kw.count(s) > 0;
}

// l<digits> / tid<digits> literals
bool lit_suffix_nat(const std::string& s, size_t off, BigNat& out) {
  if (off >= s.size()) return false;
  for (size_t j = off; j < s.size(); j++)
    if (!isdigit((unsigned char)s[j])) return false;
  out = BigNat(s.substr(off));
  return true;
}

SymP parse_sym_str(const std::string& text);

struct Parser {
  std::vector<Tok> ts;
  size_t p = 0;

  explicit Parser(const std::string& text) { ts = Lexer(text).lex(); }

  const Tok& cur() const { return ts[p]; }
  bool at(Tk k) const { return ts[p].k == k; }
  bool atIdent(const std::string& s) const { return ts[p].k == Tk::Ident && ts[p].s == s; }
  [[noreturn]] void err(const std::string& m) { throw ParseError(m, cur().line, cur().col); }
  Tok eat(Tk k, const std::string& what) {
    if (!at(k)) err("expected " + what);
    return ts[p++];
  }
  bool opt(Tk k) {
    if (at(k)) {
      p++;
      return true;
    }
    return false;
  }
  std::string ident(const std::string& what) {
    if (!at(Tk::Ident)) err("expected " + what);
    auto s = ts[p].s;
    if (is_keyword(s)) err("reserved word '" + s + "' used as " + what);
    p++;
    return s;
  }

  // ---- expressions ----
  bool expr_atom_start() const {
    const Tok& t = cur();
    if (t.k == Tk::Nat || t.k == Tk::NegInf || t.k == Tk::LParen || t.k == Tk::Sym)
      return true;
    if (t.k != Tk::Ident) return false;
    if (t.s == "then" || t.s == "else" || t.s == "on") return false;
    if (is_keyword(t.s))
      return t.s == "true" || t.s == "false" || t.s == "lam" || t.s == "tylam" ||
             t.s == "comp";
    return true;
  }

  ExprP expr() {
    auto e = expr_app();
    while (at(Tk::Plus)) {
      p++;
      e = mk::plus(e, expr_app());
    }
    return e;
  }

  ExprP expr_app() {
    auto e = expr_atom();
    for (;;) {
      if (at(Tk::Bang)) {
        p++;
        e = mk::tyapp(e);
      } else if (expr_atom_start()) {
        e = mk::app(e, expr_atom());
      } else {
        break;
      }
    }
    return e;
  }

  ExprP expr_atom() {
    const Tok& t = cur();
    if (t.k == Tk::Nat) {
      p++;
      return mk::cnat(BigNat(t.s));
    }
    if (t.k == Tk::NegInf) {
      p++;
      return mk::cneginf();
    }
    if (t.k == Tk::Sym) {
      p++;
      return mk::csym(parse_sym_str(t.s));
    }
    if (t.k == Tk::LParen) {
      p++;
      auto e = expr();
      eat(Tk::RParen, "')'");
      return e;
    }
    if (t.k == Tk::Ident) {
      if (t.s == "true") {
        p++;
        return mk::cbool(true);
      }
      if (t.s == "false") {
        p++;
        return mk::cbool(false);
      }
      if (t.s == "lam" || t.s == "tylam") {
        bool ty = t.s == "tylam";
        p++;
        auto x = ident("binder");
        eat(Tk::Dot, "'.'");
        auto body = expr();
        return ty ? mk::tylam(x, body) : mk::lam(x, body);
      }
      if (t.s == "comp") {
        p++;
        eat(Tk::LParen, "'('");
        auto c = comp();
        eat(Tk::RParen, "')'");
        return mk::comp(c);
      }
      BigNat n;
      if (t.s.size() > 1 && t.s[0] == 'l' && lit_suffix_nat(t.s, 1, n)) {
        p++;
        return mk::cloc(n);
      }
      if (t.s.size() > 3 && t.s.rfind("tid", 0) == 0 && lit_suffix_nat(t.s, 3, n)) {
        p++;
        return mk::ctid(n);
      }
      return mk::var(ident("expression"));
    }
    err("expected expression");
  }

  // ---- computations ----
  CompP comp() {
    const Tok& t = cur();
    if (t.k == Tk::LParen) {
      p++;
      auto c = comp();
      eat(Tk::RParen, "')'");
      return c;
    }
    if (t.k != Tk::Ident) err("expected computation");
    const std::string& s = t.s;
    if (s == "ret") {
      p++;
      return mk::ret(expr());
    }
    if (s == "act") {
      p++;
      eat(Tk::LParen, "'('");
      auto head = ident("action symbol");
      std::vector<ExprP> args;
      int tyArgs = 0;
      for (;;) {
        if (at(Tk::Bang)) {
          p++;
          tyArgs++;
        } else if (expr_atom_start()) {
          if (tyArgs > 0) err("action arguments after type instantiation");
          args.push_back(expr_atom());
        } else {
          break;
        }
      }
      eat(Tk::RParen, "')'");
      return mk::act(head, std::move(args), tyArgs);
    }
    if (s == "letc" || s == "lete") {
      bool isC = s == "letc";
      p++;
      eat(Tk::LParen, "'('");
      CompP c1;
      ExprP e1;
      if (isC)
        c1 = comp();
      else
        e1 = expr();
      eat(Tk::Comma, "','");
      auto x = ident("binder");
      eat(Tk::Dot, "'.'");
      auto c2 = comp();
      eat(Tk::RParen, "')'");
      return isC ? mk::letc(c1, x, c2) : mk::lete(e1, x, c2);
    }
    if (s == "seqc" || s == "seqe") {
      bool isC = s == "seqc";
      p++;
      eat(Tk::LParen, "'('");
      CompP c1;
      ExprP e1;
      if (isC)
        c1 = comp();
      else
        e1 = expr();
      eat(Tk::Comma, "','");
      auto c2 = comp();
      eat(Tk::RParen, "')'");
      return isC ? mk::seqc(c1, c2) : mk::seqe(e1, c2);
    }
    if (s == "fix") {
      p++;
      auto f = ident("fix name");
      eat(Tk::LParen, "'('");
      auto x = ident("argument binder");
      eat(Tk::RParen, "')'");
      eat(Tk::Dot, "'.'");
      return mk::fix(f, x, comp());
    }
    if (s == "capp") {
      p++;
      eat(Tk::LParen, "'('");
      auto c = comp();
      eat(Tk::Comma, "','");
      auto e = expr();
      eat(Tk::RParen, "')'");
      return mk::fixapp(c, e);
    }
    if (s == "if") {
      p++;
      auto cond = expr();
      if (!atIdent("then")) err("expected 'then'");
      p++;
      auto c1 = comp();
      if (!atIdent("else")) err("expected 'else'");
      p++;
      auto c2 = comp();
      return mk::cif(cond, c1, c2);
    }
    err("expected computation");
  }

  // ---- types ----
  TypeP type() {
    const Tok& t = cur();
    if (t.k == Tk::LParen) {
      p++;
      auto ty = type();
      eat(Tk::RParen, "')'");
      return ty;
    }
    if (t.k != Tk::Ident) err("expected type");
    if (t.s == "b") {
      p++;
      return mk::base();
    }
    if (t.s == "unt") {
      p++;
      return mk::unt();
    }
    if (t.s == "Pi") {
      p++;
      auto x = ident("binder");
      eat(Tk::Colon, "':'");
      auto dom = type();
      eat(Tk::Dot, "'.'");
      auto cod = type();
      return mk::pi(x, dom, cod);
    }
    if (t.s == "All") {
      p++;
      auto X = ident("type binder");
      eat(Tk::Dot, "'.'");
      return mk::tall(X, type());
    }
    if (t.s == "tcmp") {
      p++;
      eat(Tk::LParen, "'('");
      auto ct = comp_type_plain();
      eat(Tk::RParen, "')'");
      return mk::compt(ct);
    }
    return mk::tyvar(ident("type"));
  }

  CompType comp_type_plain() {
    CompType ct;
    ct.u1 = ident("time binder");
    eat(Tk::Dot, "'.'");
    ct.u2 = ident("time binder");
    eat(Tk::Dot, "'.'");
    ct.i = ident("thread binder");
    eat(Tk::Dot, "'.'");
    eat(Tk::LParen, "'('");
    ct.x = ident("return binder");
    eat(Tk::Colon, "':'");
    ct.retTy = type();
    eat(Tk::Dot, "'.'");
    ct.partial = formula();
    eat(Tk::Comma, "','");
    ct.inv = formula();
    eat(Tk::RParen, "')'");
    return ct;
  }

  ClosedCompType closed_comp_type() {
    if (at(Tk::LParen)) {
      p++;
      auto ct = closed_comp_type();
      eat(Tk::RParen, "')'");
      return ct;
    }
    if (atIdent("PiC")) {
      p++;
      ClosedCompType ct;
      ct.isFixPi = true;
      ct.argBinder = ident("binder");
      eat(Tk::Colon, "':'");
      ct.argTy = type();
      eat(Tk::Dot, "'.'");
      ct.inner = comp_type_plain();
      return ct;
    }
    ClosedCompType ct;
    ct.inner = comp_type_plain();
    return ct;
  }

  // ---- formulas ----
  FormP formula() { return f_imp(); }

  FormP f_imp() {
    auto a = f_or();
    if (at(Tk::ImpOp)) {
      p++;
      return mk::fimp(a, f_imp());
    }
    return a;
  }
  FormP f_or() {
    auto a = f_and();
    while (at(Tk::OrOp)) {
      p++;
      a = mk::forr(a, f_and());
    }
    return a;
  }
  FormP f_and() {
    auto a = f_unary();
    while (at(Tk::AndOp)) {
      p++;
      a = mk::fand(a, f_unary());
    }
    return a;
  }
  FormP f_unary() {
    if (at(Tk::Tilde)) {
      p++;
      return mk::fnot(f_unary());
    }
    return f_postfix();
  }
  FormP f_postfix() {
    auto a = f_primary();
    for (;;) {
      if (at(Tk::At)) {
        p++;
        a = mk::at(a, expr_app());
      } else if (atIdent("on")) {
        p++;
        bool loOpen;
        if (opt(Tk::LParen))
          loOpen = true;
        else if (opt(Tk::LBrack))
          loOpen = false;
        else
          err("expected '(' or '[' after 'on'");
        auto lo = expr();
        eat(Tk::Comma, "','");
        auto hi = expr();
        bool hiOpen;
        if (opt(Tk::RParen))
          hiOpen = true;
        else if (opt(Tk::RBrack))
          hiOpen = false;
        else
          err("expected ')' or ']' closing interval");
        a = mk::oninterval(a, lo, hi, loOpen, hiOpen);
      } else {
        break;
      }
    }
    return a;
  }

  FormP f_primary() {
    const Tok& t = cur();
    if (t.k == Tk::Ident) {
      if (t.s == "TT") {
        p++;
        return mk::top();
      }
      if (t.s == "FF") {
        p++;
        return mk::bot();
      }
      if (t.s == "forall" || t.s == "exists") {
        bool fa = t.s == "forall";
        p++;
        auto x = ident("binder");
        eat(Tk::Colon, "':'");
        auto ty = type();
        eat(Tk::Dot, "'.'");
        auto body = formula();
        return fa ? mk::forall(x, ty, body) : mk::exists(x, ty, body);
      }
      if (t.s == "appf") {
        p++;
        eat(Tk::LParen, "'('");
        auto f = formula();
        eat(Tk::Comma, "','");
        auto e = expr();
        eat(Tk::RParen, "')'");
        return mk::appf(f, e);
      }
    }
    // comparison atom? (expr op expr)
    {
      size_t save = p;
      try {
        auto a = expr();
        if (at(Tk::EqEq)) {
          p++;
          return mk::eq(a, expr());
        }
        if (at(Tk::Lt)) {
          p++;
          return mk::lt(a, expr());
        }
        if (at(Tk::Le)) {
          p++;
          return mk::le(a, expr());
        }
        if (at(Tk::Eq)) {
          p++;
          return mk::teq(a, expr());
        }
      } catch (const ParseError&) {
      }
      p = save;
    }
    if (at(Tk::Ident) && !is_keyword(cur().s)) {
      auto name = ident("predicate");
      std::vector<ExprP> args;
      if (opt(Tk::LParen)) {
        if (!at(Tk::RParen)) {
          args.push_back(expr());
          while (opt(Tk::Comma)) args.push_back(expr());
        }
        eat(Tk::RParen, "')'");
      }
      return mk::pred(name, std::move(args));
    }
    if (at(Tk::LParen)) {
      p++;
      auto f = formula();
      eat(Tk::RParen, "')'");
      return f;
    }
    err("expected formula");
  }
};

// mini-parser for symbolic terms (the body of sym{...})
struct SymParser {
  const std::string& s;
  size_t i = 0;
  explicit SymParser(const std::string& t) : s(t) {}
  [[noreturn]] void err(const std::string& m) { throw ParseError(m + " in sym term", 1, (int)i); }
  void ws() {
    while (i < s.size() && isspace((unsigned char)s[i])) i++;
  }
  void expect(char c) {
    ws();
    if (i >= s.size() || s[i] != c) err(std::string("expected '") + c + "'");
    i++;
  }
  SymP term() {
    ws();
    if (i >= s.size()) err("empty term");
    char c = s[i];
    if (c == '@') {
      i++;
      std::string n;
      while (i < s.size() && (isalnum((unsigned char)s[i]) || s[i] == '_')) n += s[i++];
      return mk::satom(n);
    }
    if (isdigit((unsigned char)c)) {
      std::string n;
      while (i < s.size() && isdigit((unsigned char)s[i])) n += s[i++];
      return mk::snat(BigNat(n));
    }
    if (c == '(') {
      i++;
      auto a = term();
      ws();
      if (i + 1 < s.size() && s[i] == '|' && s[i + 1] == '|') {
        i += 2;
        auto b = term();
        expect(')');
        return mk::scat(a, b);
      }
      err("expected '||'");
    }
    if (c == 'H') {
      i++;
      expect('(');
      auto a = term();
      expect(')');
      return mk::shash(a);
    }
    if (c == 'C' && i + 1 < s.size() && s[i + 1] == 'H') {
      i += 2;
      ws();
      if (i >= s.size() || s[i] != '{') err("expected '{'");
      i++;
      std::string body;
      int depth = 1;
      while (i < s.size()) {
        if (s[i] == '{') depth++;
        if (s[i] == '}') {
          depth--;
          if (depth == 0) break;
        }
        body += s[i++];
      }
      if (depth != 0) err("unterminated CH{...}");
      i++;
      return mk::scodehash(body);
    }
    if (c == 'E' || c == 'M') {
      bool enc = c == 'E';
      i++;
      expect('(');
      auto k = term();
      expect(',');
      auto b = term();
      expect(')');
      return enc ? mk::senc(k, b) : mk::smac(k, b);
    }
    if (c == 'K') {
      i++;
      expect('(');
      ws();
      std::string n;
      while (i < s.size() && isdigit((unsigned char)s[i])) n += s[i++];
      if (n.empty()) err("expected key id");
      expect(')');
      return mk::skey(BigNat(n));
    }
    err("unrecognized term");
  }
};

SymP parse_sym_str(const std::string& text) {
  SymParser sp(text);
  auto t = sp.term();
  sp.ws();
  if (sp.i != text.size()) sp.err("trailing input");
  return t;
}

template <typename F>
auto parse_all(const std::string& text, F f) {
  Parser ps(text);
  auto r = f(ps);
  if (!ps.at(Tk::End)) ps.err("trailing input");
  return r;
}

}  // namespace

ExprP parse_expr(const std::string& text) {
  return parse_all(text, [](Parser& p) { return p.expr(); });
}
CompP parse_comp(const std::string& text) {
  return parse_all(text, [](Parser& p) { return p.comp(); });
}
FormP parse_formula(const std::string& text) {
  return parse_all(text, [](Parser& p) { return p.formula(); });
}
TypeP parse_type(const std::string& text) {
  return parse_all(text, [](Parser& p) { return p.type(); });
}
ClosedCompType parse_comp_type(const std::string& text) {
  return parse_all(text, [](Parser& p) { return p.closed_comp_type(); });
}
SymP parse_sym(const std::string& text) { return parse_sym_str(text); }

Program parse_program(const std::string& text) {
  Program out;
  Parser ps(text);
  size_t save = ps.p;
  try {
    out.c = ps.comp();
    if (!ps.at(Tk::End)) throw ParseError("trailing", 0, 0);
  } catch (const ParseError&) {
    ps.p = save;
    out.c = nullptr;
    out.e = ps.expr();
    if (!ps.at(Tk::End)) ps.err("trailing input");
  }
  auto free = out.c ? fv(out.c) : fv(out.e);
  if (!free.empty())
    throw ParseError("unbound variable '" + *free.begin() + "'", 1, 1);
  return out;
}

}  // namespace sysm
