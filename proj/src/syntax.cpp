#include "sysm/syntax.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>

namespace sysm {

namespace mk {

ExprP var(const std::string& n) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Var;
  e->name = n;
  return e;
}
static ExprP constE(BaseValue v) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Const;
  e->val = std::move(v);
  return e;
}
ExprP cbool(bool b) {
  return constE({b ? BaseValue::K::True : BaseValue::K::False, 0, nullptr});
}
ExprP cnat(const BigNat& n) { return constE({BaseValue::K::Nat, n, nullptr}); }
ExprP cloc(const BigNat& id) { return constE({BaseValue::K::Loc, id, nullptr}); }
ExprP ctid(const BigNat& id) { return constE({BaseValue::K::ThreadId, id, nullptr}); }
ExprP cneginf() { return constE({BaseValue::K::NegInf, 0, nullptr}); }
ExprP csym(SymP s) { return constE({BaseValue::K::Sym, 0, std::move(s)}); }
ExprP lam(const std::string& x, ExprP body) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Lam;
  e->name = x;
  e->a = std::move(body);
  return e;
}
ExprP tylam(const std::string& X, ExprP body) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::TyLam;
  e->name = X;
  e->a = std::move(body);
  return e;
}
ExprP app(ExprP f, ExprP a) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::App;
  e->a = std::move(f);
  e->b = std::move(a);
  return e;
}
ExprP tyapp(ExprP f) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::TyApp;
  e->a = std::move(f);
  return e;
}
ExprP comp(CompP c) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Comp;
  e->comp = std::move(c);
  return e;
}
ExprP plus(ExprP a, ExprP b) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Plus;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

CompP act(const std::string& head, std::vector<ExprP> args, int tyArgs) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::Act;
  c->act = {head, std::move(args), tyArgs};
  return c;
}
CompP ret(ExprP e) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::Ret;
  c->e = std::move(e);
  return c;
}
CompP fix(const std::string& f, const std::string& x, CompP body) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::Fix;
  c->f = f;
  c->x = x;
  c->c1 = std::move(body);
  return c;
}
CompP fixapp(CompP cf, ExprP e) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::FixApp;
  c->c1 = std::move(cf);
  c->e = std::move(e);
  return c;
}
CompP letc(CompP c1, const std::string& x, CompP c2) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::LetC;
  c->c1 = std::move(c1);
  c->x = x;
  c->c2 = std::move(c2);
  return c;
}
CompP lete(ExprP e, const std::string& x, CompP c2) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::LetE;
  c->e = std::move(e);
  c->x = x;
  c->c2 = std::move(c2);
  return c;
}
CompP seqc(CompP c1, CompP c2) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::SeqC;
  c->c1 = std::move(c1);
  c->c2 = std::move(c2);
  return c;
}
CompP seqe(ExprP e, CompP c2) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::SeqE;
  c->e = std::move(e);
  c->c2 = std::move(c2);
  return c;
}
CompP cif(ExprP cond, CompP then, CompP els) {
  auto c = std::make_shared<Computation>();
  c->k = Computation::K::If;
  c->e = std::move(cond);
  c->c1 = std::move(then);
  c->c2 = std::move(els);
  return c;
}

FormP pred(const std::string& name, std::vector<ExprP> args) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Pred;
  f->name = name;
  f->args = std::move(args);
  return f;
}
FormP eq(ExprP a, ExprP b) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Eq;
  f->e1 = std::move(a);
  f->e2 = std::move(b);
  return f;
}
FormP appf(FormP g, ExprP e) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::AppF;
  f->f1 = std::move(g);
  f->e1 = std::move(e);
  return f;
}
FormP top() {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Top;
  return f;
}
FormP bot() {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Bot;
  return f;
}
FormP fnot(FormP g) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Not;
  f->f1 = std::move(g);
  return f;
}
static FormP bin(Formula::K k, FormP a, FormP b) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormP fand(FormP a, FormP b) { return bin(Formula::K::And, std::move(a), std::move(b)); }
FormP forr(FormP a, FormP b) { return bin(Formula::K::Or, std::move(a), std::move(b)); }
FormP fimp(FormP a, FormP b) { return bin(Formula::K::Imp, std::move(a), std::move(b)); }
static FormP quant(Formula::K k, const std::string& x, TypeP ty, FormP body) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  f->name = x;
  f->ty = std::move(ty);
  f->f1 = std::move(body);
  return f;
}
FormP forall(const std::string& x, TypeP ty, FormP body) {
  return quant(Formula::K::Forall, x, std::move(ty), std::move(body));
}
FormP exists(const std::string& x, TypeP ty, FormP body) {
  return quant(Formula::K::Exists, x, std::move(ty), std::move(body));
}
FormP at(FormP g, ExprP u) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::At;
  f->f1 = std::move(g);
  f->e1 = std::move(u);
  return f;
}
FormP oninterval(FormP g, ExprP lo, ExprP hi, bool loOpen, bool hiOpen) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::OnInterval;
  f->f1 = std::move(g);
  f->e1 = std::move(lo);
  f->e2 = std::move(hi);
  f->loOpen = loOpen;
  f->hiOpen = hiOpen;
  return f;
}
FormP tcmp(Formula::Cmp op, ExprP a, ExprP b) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::TimeCmp;
  f->cmp = op;
  f->e1 = std::move(a);
  f->e2 = std::move(b);
  return f;
}
FormP lt(ExprP a, ExprP b) { return tcmp(Formula::Cmp::Lt, std::move(a), std::move(b)); }
FormP le(ExprP a, ExprP b) { return tcmp(Formula::Cmp::Le, std::move(a), std::move(b)); }
FormP teq(ExprP a, ExprP b) { return tcmp(Formula::Cmp::Eq, std::move(a), std::move(b)); }
FormP conj(std::vector<FormP> fs) {
  if (fs.empty()) return top();
  FormP acc = fs.back();
  for (size_t i = fs.size() - 1; i-- > 0;) acc = fand(fs[i], acc);
  return acc;
}

TypeP tyvar(const std::string& X) {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::TyVar;
  t->name = X;
  return t;
}
TypeP base() {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::Base;
  return t;
}
TypeP unt() {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::Untyped;
  return t;
}
TypeP pi(const std::string& x, TypeP dom, TypeP cod) {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::Pi;
  t->name = x;
  t->dom = std::move(dom);
  t->cod = std::move(cod);
  return t;
}
TypeP tall(const std::string& X, TypeP body) {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::Forall;
  t->name = X;
  t->cod = std::move(body);
  return t;
}
TypeP compt(const CompType& ct) {
  auto t = std::make_shared<TypeExpr>();
  t->k = TypeExpr::K::CompT;
  t->ct = std::make_shared<CompType>(ct);
  return t;
}

SymP satom(const std::string& n) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Atom;
  s->name = n;
  return s;
}
SymP snat(const BigNat& n) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Nat;
  s->n = n;
  return s;
}
SymP scat(SymP a, SymP b) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Cat;
  s->a = std::move(a);
  s->b = std::move(b);
  return s;
}
SymP shash(SymP a) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Hash;
  s->a = std::move(a);
  return s;
}
SymP scodehash(const std::string& t) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::CodeHash;
  s->name = t;
  return s;
}
SymP senc(SymP key, SymP body) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Enc;
  s->a = std::move(key);
  s->b = std::move(body);
  return s;
}
SymP smac(SymP key, SymP body) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Mac;
  s->a = std::move(key);
  s->b = std::move(body);
  return s;
}
SymP skey(const BigNat& id) {
  auto s = std::make_shared<SymTerm>();
  s->k = SymTerm::K::Key;
  s->n = id;
  return s;
}

}  // namespace mk

// ---------------- printing ----------------

std::string print_sym(const SymP& s) {
  if (!s) return "?";
  switch (s->k) {
    case SymTerm::K::Atom: return "@" + s->name;
    case SymTerm::K::Nat: return s->n.str();
    case SymTerm::K::Cat: return "(" + print_sym(s->a) + "||" + print_sym(s->b) + ")";
    case SymTerm::K::Hash: return "H(" + print_sym(s->a) + ")";
    case SymTerm::K::CodeHash: return "CH{" + s->name + "}";
    case SymTerm::K::Enc: return "E(" + print_sym(s->a) + "," + print_sym(s->b) + ")";
    case SymTerm::K::Mac: return "M(" + print_sym(s->a) + "," + print_sym(s->b) + ")";
    case SymTerm::K::Key: return "K(" + s->n.str() + ")";
  }
  return "?";
}

std::string print_base(const BaseValue& v) {
  switch (v.k) {
    case BaseValue::K::True: return "true";
    case BaseValue::K::False: return "false";
    case BaseValue::K::ThreadId: return "tid" + v.n.str();
    case BaseValue::K::Loc: return "l" + v.n.str();
    case BaseValue::K::Nat: return v.n.str();
    case BaseValue::K::NegInf: return "-inf";
    case BaseValue::K::Sym: return "sym{" + print_sym(v.sym) + "}";
  }
  return "?";
}

namespace {

struct Printer {
  bool canonical;
  int counter = 0;
  std::map<std::string, std::vector<std::string>> env;  // binder -> rename stack
  std::string out;

  explicit Printer(bool canon) : canonical(canon) {}

  std::string push(const std::string& x) {
    if (!canonical) return x;
    std::string nn = "v" + std::to_string(counter++);
    env[x].push_back(nn);
    return nn;
  }
  void pop(const std::string& x) {
    if (!canonical) return;
    env[x].pop_back();
  }
  // reserve a canonical name now, bring it into scope later (for binders whose
  // annotation is printed between the binder occurrence and its scope)
  std::string reserve(const std::string& x) {
    return canonical ? "v" + std::to_string(counter++) : x;
  }
  void bind(const std::string& x, const std::string& nn) {
    if (canonical) env[x].push_back(nn);
  }
  std::string look(const std::string& x) {
    if (!canonical) return x;
    auto it = env.find(x);
    // free variables get a marker so they cannot collide with v<N> binders
    if (it == env.end() || it->second.empty())
      return x[0] == '$' ? x : "$" + x;
    return it->second.back();
  }

  void pe(const ExprP& e) {
    if (!e) { out += "?"; return; }
    switch (e->k) {
      case Expr::K::Var: out += look(e->name); break;
      case Expr::K::Const: out += print_base(e->val); break;
      case Expr::K::Lam: {
        out += "(lam ";
        auto x = push(e->name);
        out += x;
        out += ". ";
        pe(e->a);
        pop(e->name);
        out += ")";
        break;
      }
      case Expr::K::TyLam: {
        out += "(tylam ";
        auto x = push(e->name);
        out += x;
        out += ". ";
        pe(e->a);
        pop(e->name);
        out += ")";
        break;
      }
      case Expr::K::App:
        out += "(";
        pe(e->a);
        out += " ";
        pe(e->b);
        out += ")";
        break;
      case Expr::K::TyApp:
        out += "(";
        pe(e->a);
        out += " !)";
        break;
      case Expr::K::Comp:
        out += "comp(";
        pc(e->comp);
        out += ")";
        break;
      case Expr::K::Plus:
        out += "(";
        pe(e->a);
        out += " + ";
        pe(e->b);
        out += ")";
        break;
    }
  }

  void pc(const CompP& c) {
    if (!c) { out += "?"; return; }
    switch (c->k) {
      case Computation::K::Act: {
        out += "act(";
        out += c->act.head;
        for (auto& a : c->act.args) {
          out += " ";
          pe(a);
        }
        for (int i = 0; i < c->act.tyArgs; i++) out += " !";
        out += ")";
        break;
      }
      case Computation::K::Ret:
        out += "ret(";
        pe(c->e);
        out += ")";
        break;
      case Computation::K::Fix: {
        out += "(fix ";
        auto f = push(c->f);
        auto x = push(c->x);
        out += f;
        out += "(";
        out += x;
        out += "). ";
        pc(c->c1);
        pop(c->x);
        pop(c->f);
        out += ")";
        break;
      }
      case Computation::K::FixApp:
        out += "capp(";
        pc(c->c1);
        out += ", ";
        pe(c->e);
        out += ")";
        break;
      case Computation::K::LetC: {
        out += "letc(";
        pc(c->c1);
        out += ", ";
        auto x = push(c->x);
        out += x;
        out += ". ";
        pc(c->c2);
        pop(c->x);
        out += ")";
        break;
      }
      case Computation::K::LetE: {
        out += "lete(";
        pe(c->e);
        out += ", ";
        auto x = push(c->x);
        out += x;
        out += ". ";
        pc(c->c2);
        pop(c->x);
        out += ")";
        break;
      }
      case Computation::K::SeqC:
        out += "seqc(";
        pc(c->c1);
        out += ", ";
        pc(c->c2);
        out += ")";
        break;
      case Computation::K::SeqE:
        out += "seqe(";
        pe(c->e);
        out += ", ";
        pc(c->c2);
        out += ")";
        break;
      case Computation::K::If:
        out += "(if ";
        pe(c->e);
        out += " then ";
        pc(c->c1);
        out += " else ";
        pc(c->c2);
        out += ")";
        break;
    }
  }

  void pt(const TypeP& t) {
    if (!t) { out += "?"; return; }
    switch (t->k) {
      case TypeExpr::K::TyVar: out += look(t->name); break;
      case TypeExpr::K::Base: out += "b"; break;
      case TypeExpr::K::Untyped: out += "unt"; break;
      case TypeExpr::K::Pi: {
        out += "(Pi ";
        // binder scope: cod only; dom is printed before the binder enters scope
        auto nn = reserve(t->name);
        out += nn;
        out += ":";
        pt(t->dom);
        out += ". ";
        bind(t->name, nn);
        pt(t->cod);
        pop(t->name);
        out += ")";
        break;
      }
      case TypeExpr::K::Forall: {
        out += "(All ";
        auto x = push(t->name);
        out += x;
        out += ". ";
        pt(t->cod);
        pop(t->name);
        out += ")";
        break;
      }
      case TypeExpr::K::CompT:
        out += "tcmp(";
        pct(*t->ct);
        out += ")";
        break;
    }
  }

  void pct(const CompType& ct) {
    auto u1 = reserve(ct.u1);
    auto u2 = reserve(ct.u2);
    auto i = reserve(ct.i);
    auto xs = reserve(ct.x);
    out += u1;
    out += ".";
    out += u2;
    out += ".";
    out += i;
    out += ".(";
    out += xs;
    out += ":";
    pt(ct.retTy);  // retTy: none of u1/u2/i/x in scope
    out += ". ";
    bind(ct.u1, u1);
    bind(ct.u2, u2);
    bind(ct.i, i);
    bind(ct.x, xs);
    pf(ct.partial);
    pop(ct.x);
    out += ", ";
    pf(ct.inv);
    out += ")";
    pop(ct.i);
    pop(ct.u2);
    pop(ct.u1);
  }

  void pf(const FormP& f) {
    if (!f) { out += "?"; return; }
    switch (f->k) {
      case Formula::K::Pred: {
        out += f->name;
        if (!f->args.empty()) {
          out += "(";
          for (size_t i = 0; i < f->args.size(); i++) {
            if (i) out += ", ";
            pe(f->args[i]);
          }
          out += ")";
        }
        break;
      }
      case Formula::K::Eq:
        out += "(";
        pe(f->e1);
        out += " == ";
        pe(f->e2);
        out += ")";
        break;
      case Formula::K::AppF:
        out += "appf(";
        pf(f->f1);
        out += ", ";
        pe(f->e1);
        out += ")";
        break;
      case Formula::K::Top: out += "TT"; break;
      case Formula::K::Bot: out += "FF"; break;
      case Formula::K::Not:
        out += "~";
        pf_atom(f->f1);
        break;
      case Formula::K::And:
        out += "(";
        pf(f->f1);
        out += " /\\ ";
        pf(f->f2);
        out += ")";
        break;
      case Formula::K::Or:
        out += "(";
        pf(f->f1);
        out += " \\/ ";
        pf(f->f2);
        out += ")";
        break;
      case Formula::K::Imp:
        out += "(";
        pf(f->f1);
        out += " => ";
        pf(f->f2);
        out += ")";
        break;
      case Formula::K::Forall:
      case Formula::K::Exists: {
        out += "(";
        out += (f->k == Formula::K::Forall) ? "forall " : "exists ";
        auto nn = reserve(f->name);
        out += nn;
        out += ":";
        pt(f->ty);
        out += ". ";
        bind(f->name, nn);
        pf(f->f1);
        pop(f->name);
        out += ")";
        break;
      }
      case Formula::K::At:
        out += "(";
        pf(f->f1);
        out += " @ ";
        pe(f->e1);
        out += ")";
        break;
      case Formula::K::OnInterval:
        out += "(";
        pf(f->f1);
        out += " on ";
        out += f->loOpen ? "(" : "[";
        pe(f->e1);
        out += ",";
        pe(f->e2);
        out += f->hiOpen ? ")" : "]";
        out += ")";
        break;
      case Formula::K::TimeCmp:
        out += "(";
        pe(f->e1);
        out += f->cmp == Formula::Cmp::Lt ? " < " : f->cmp == Formula::Cmp::Le ? " <= " : " = ";
        pe(f->e2);
        out += ")";
        break;
    }
  }
  void pf_atom(const FormP& f) {
    // ~ argument: parenthesize unless already self-delimited
    if (f && (f->k == Formula::K::Pred || f->k == Formula::K::Top || f->k == Formula::K::Bot)) {
      bool wrap = f->k == Formula::K::Pred && f->args.empty();
      if (wrap) out += "(";
      pf(f);
      if (wrap) out += ")";
    } else {
      pf(f);
    }
  }
};

}  // namespace

std::string print(const ExprP& e, bool canonical) {
  Printer p(canonical);
  p.pe(e);
  return p.out;
}
std::string print(const CompP& c, bool canonical) {
  Printer p(canonical);
  p.pc(c);
  return p.out;
}
std::string print(const FormP& f, bool canonical) {
  Printer p(canonical);
  p.pf(f);
  return p.out;
}
std::string print(const TypeP& t, bool canonical) {
  Printer p(canonical);
  p.pt(t);
  return p.out;
}
std::string print(const ClosedCompType& ct, bool canonical) {
  Printer p(canonical);
  if (ct.isFixPi) {
    p.out += "(PiC ";
    auto nn = p.reserve(ct.argBinder);
    p.out += nn;
    p.out += ":";
    p.pt(ct.argTy);
    p.out += ". ";
    p.bind(ct.argBinder, nn);
    p.pct(ct.inner);
    p.pop(ct.argBinder);
    p.out += ")";
  } else {
    p.pct(ct.inner);
  }
  return p.out;
}

bool alpha_eq(const ExprP& a, const ExprP& b) { return print(a, true) == print(b, true); }
bool alpha_eq(const CompP& a, const CompP& b) { return print(a, true) == print(b, true); }
bool alpha_eq(const FormP& a, const FormP& b) { return print(a, true) == print(b, true); }
bool alpha_eq(const TypeP& a, const TypeP& b) { return print(a, true) == print(b, true); }
bool sym_eq(const SymP& a, const SymP& b) {
  if (!a || !b) return a == b;
  return print_sym(a) == print_sym(b);
}

// ---------------- free variables ----------------

namespace {
struct FvCtx {
  std::set<std::string> bound;
  std::set<std::string> free;
  void hit(const std::string& n) {
    if (!bound.count(n)) free.insert(n);
  }
  template <typename F>
  void scoped(const std::string& x, F f) {
    bool had = bound.count(x) > 0;
    bound.insert(x);
    f();
    if (!had) bound.erase(x);
  }
};

void fvE(const ExprP& e, FvCtx& c);
void fvC(const CompP& cm, FvCtx& c);
void fvF(const FormP& f, FvCtx& c);
void fvT(const TypeP& t, FvCtx& c);

void fvE(const ExprP& e, FvCtx& c) {
  if (!e) return;
  switch (e->k) {
    case Expr::K::Var: c.hit(e->name); break;
    case Expr::K::Const: break;
    case Expr::K::Lam:
    case Expr::K::TyLam:
      c.scoped(e->name, [&] { fvE(e->a, c); });
      break;
    case Expr::K::App:
    case Expr::K::Plus:
      fvE(e->a, c);
      fvE(e->b, c);
      break;
    case Expr::K::TyApp: fvE(e->a, c); break;
    case Expr::K::Comp: fvC(e->comp, c); break;
  }
}
void fvC(const CompP& cm, FvCtx& c) {
  if (!cm) return;
  switch (cm->k) {
    case Computation::K::Act:
      for (auto& a : cm->act.args) fvE(a, c);
      break;
    case Computation::K::Ret: fvE(cm->e, c); break;
    case Computation::K::Fix:
      c.scoped(cm->f, [&] { c.scoped(cm->x, [&] { fvC(cm->c1, c); }); });
      break;
    case Computation::K::FixApp:
      fvC(cm->c1, c);
      fvE(cm->e, c);
      break;
    case Computation::K::LetC:
      fvC(cm->c1, c);
      c.scoped(cm->x, [&] { fvC(cm->c2, c); });
      break;
    case Computation::K::LetE:
      fvE(cm->e, c);
      c.scoped(cm->x, [&] { fvC(cm->c2, c); });
      break;
    case Computation::K::SeqC:
      fvC(cm->c1, c);
      fvC(cm->c2, c);
      break;
    case Computation::K::SeqE:
      fvE(cm->e, c);
      fvC(cm->c2, c);
      break;
    case Computation::K::If:
      fvE(cm->e, c);
      fvC(cm->c1, c);
      fvC(cm->c2, c);
      break;
  }
}
void fvCT(const CompType& ct, FvCtx& c) {
  fvT(ct.retTy, c);
  c.scoped(ct.u1, [&] {
    c.scoped(ct.u2, [&] {
      c.scoped(ct.i, [&] {
        c.scoped(ct.x, [&] { fvF(ct.partial, c); });
        fvF(ct.inv, c);
      });
    });
  });
}
void fvT(const TypeP& t, FvCtx& c) {
  if (!t) return;
  switch (t->k) {
    case TypeExpr::K::TyVar:
    case TypeExpr::K::Base:
    case TypeExpr::K::Untyped: break;
    case TypeExpr::K::Pi:
      fvT(t->dom, c);
      c.scoped(t->name, [&] { fvT(t->cod, c); });
      break;
    case TypeExpr::K::Forall: fvT(t->cod, c); break;
    case TypeExpr::K::CompT: fvCT(*t->ct, c); break;
  }
}
void fvF(const FormP& f, FvCtx& c) {
  if (!f) return;
  switch (f->k) {
    case Formula::K::Pred:
      for (auto& a : f->args) fvE(a, c);
      break;
    case Formula::K::Eq:
    case Formula::K::TimeCmp:
      fvE(f->e1, c);
      fvE(f->e2, c);
      break;
    case Formula::K::AppF:
      fvF(f->f1, c);
      fvE(f->e1, c);
      break;
    case Formula::K::Top:
    case Formula::K::Bot: break;
    case Formula::K::Not: fvF(f->f1, c); break;
    case Formula::K::And:
    case Formula::K::Or:
    case Formula::K::Imp:
      fvF(f->f1, c);
      fvF(f->f2, c);
      break;
    case Formula::K::Forall:
    case Formula::K::Exists:
      fvT(f->ty, c);
      c.scoped(f->name, [&] { fvF(f->f1, c); });
      break;
    case Formula::K::At:
      fvF(f->f1, c);
      fvE(f->e1, c);
      break;
    case Formula::K::OnInterval:
      fvF(f->f1, c);
      fvE(f->e1, c);
      fvE(f->e2, c);
      break;
  }
}
}  // namespace

std::set<std::string> fv(const ExprP& e) {
  FvCtx c;
  fvE(e, c);
  return c.free;
}
std::set<std::string> fv(const CompP& cm) {
  FvCtx c;
  fvC(cm, c);
  return c.free;
}
std::set<std::string> fv(const FormP& f) {
  FvCtx c;
  fvF(f, c);
  return c.free;
}
std::set<std::string> fv(const TypeP& t) {
  FvCtx c;
  fvT(t, c);
  return c.free;
}

namespace {
void faE(const ExprP& e, std::set<std::string>& out);
void faC(const CompP& c, std::set<std::string>& out) {
  if (!c) return;
  switch (c->k) {
    case Computation::K::Act:
      out.insert(c->act.head);
      for (auto& a : c->act.args) faE(a, out);
      break;
    case Computation::K::Ret: faE(c->e, out); break;
    case Computation::K::Fix: faC(c->c1, out); break;
    case Computation::K::FixApp:
      faC(c->c1, out);
      faE(c->e, out);
      break;
    case Computation::K::LetC:
    case Computation::K::SeqC:
      faC(c->c1, out);
      faC(c->c2, out);
      break;
    case Computation::K::LetE:
    case Computation::K::SeqE:
      faE(c->e, out);
      faC(c->c2, out);
      break;
    case Computation::K::If:
      faE(c->e, out);
      faC(c->c1, out);
      faC(c->c2, out);
      break;
  }
}
void faE(const ExprP& e, std::set<std::string>& out) {
  if (!e) return;
  switch (e->k) {
    case Expr::K::Var:
    case Expr::K::Const: break;
    case Expr::K::Lam:
    case Expr::K::TyLam:
    case Expr::K::TyApp: faE(e->a, out); break;
    case Expr::K::App:
    case Expr::K::Plus:
      faE(e->a, out);
      faE(e->b, out);
      break;
    case Expr::K::Comp: faC(e->comp, out); break;
  }
}
}  // namespace

std::set<std::string> free_actions(const ExprP& e) {
  std::set<std::string> out;
  faE(e, out);
  return out;
}
std::set<std::string> free_actions(const CompP& c) {
  std::set<std::string> out;
  faC(c, out);
  return out;
}

// ---------------- substitution ----------------

std::string fresh(const std::string& base) {
  static std::atomic<uint64_t> ctr{0};
  auto stem = base.substr(0, base.find('#'));
  if (stem.empty()) stem = "x";
  return stem + "#" + std::to_string(++ctr);
}

namespace {

// Returns possibly renamed binder; adjusts s in place (caller passes a copy).
std::string adjust_binder(Sub& s, const std::string& x) {
  s.erase(x);
  bool capture = false;
  for (auto& [k, v] : s) {
    (void)k;
    if (fv(v).count(x)) {
      capture = true;
      break;
    }
  }
  if (!capture) return x;
  auto x2 = fresh(x);
  s[x] = mk::var(x2);
  return x2;
}

bool touches(const Sub& s, const std::set<std::string>& vars) {
  for (auto& v : vars)
    if (s.count(v)) return true;
  return false;
}

}  // namespace

ExprP subst(const ExprP& e, const Sub& s) {
  if (!e || s.empty()) return e;
  switch (e->k) {
    case Expr::K::Var: {
      auto it = s.find(e->name);
      return it == s.end() ? e : it->second;
    }
    case Expr::K::Const: return e;
    case Expr::K::Lam:
    case Expr::K::TyLam: {
      Sub s2 = s;
      auto x2 = adjust_binder(s2, e->name);
      auto body = subst(e->a, s2);
      if (x2 == e->name && body == e->a) return e;
      return e->k == Expr::K::Lam ? mk::lam(x2, body) : mk::tylam(x2, body);
    }
    case Expr::K::App: {
      auto a = subst(e->a, s), b = subst(e->b, s);
      return (a == e->a && b == e->b) ? e : mk::app(a, b);
    }
    case Expr::K::TyApp: {
      auto a = subst(e->a, s);
      return a == e->a ? e : mk::tyapp(a);
    }
    case Expr::K::Comp: {
      auto c = subst(e->comp, s);
      return c == e->comp ? e : mk::comp(c);
    }
    case Expr::K::Plus: {
      auto a = subst(e->a, s), b = subst(e->b, s);
      return (a == e->a && b == e->b) ? e : mk::plus(a, b);
    }
  }
  return e;
}

CompP subst(const CompP& c, const Sub& s) {
  if (!c || s.empty()) return c;
  switch (c->k) {
    case Computation::K::Act: {
      std::vector<ExprP> args;
      bool changed = false;
      for (auto& a : c->act.args) {
        auto a2 = subst(a, s);
        changed |= a2 != a;
        args.push_back(a2);
      }
      return changed ? mk::act(c->act.head, std::move(args), c->act.tyArgs) : c;
    }
    case Computation::K::Ret: {
      auto e = subst(c->e, s);
      return e == c->e ? c : mk::ret(e);
    }
    case Computation::K::Fix: {
      Sub s2 = s;
      auto f2 = adjust_binder(s2, c->f);
      auto x2 = adjust_binder(s2, c->x);
      auto body = subst(c->c1, s2);
      if (f2 == c->f && x2 == c->x && body == c->c1) return c;
      return mk::fix(f2, x2, body);
    }
    case Computation::K::FixApp: {
      auto c1 = subst(c->c1, s);
      auto e = subst(c->e, s);
      return (c1 == c->c1 && e == c->e) ? c : mk::fixapp(c1, e);
    }
    case Computation::K::LetC: {
      auto c1 = subst(c->c1, s);
      Sub s2 = s;
      auto x2 = adjust_binder(s2, c->x);
      auto c2 = subst(c->c2, s2);
      if (c1 == c->c1 && x2 == c->x && c2 == c->c2) return c;
      return mk::letc(c1, x2, c2);
    }
    case Computation::K::LetE: {
      auto e = subst(c->e, s);
      Sub s2 = s;
      auto x2 = adjust_binder(s2, c->x);
      auto c2 = subst(c->c2, s2);
      if (e == c->e && x2 == c->x && c2 == c->c2) return c;
      return mk::lete(e, x2, c2);
    }
    case Computation::K::SeqC: {
      auto c1 = subst(c->c1, s), c2 = subst(c->c2, s);
      return (c1 == c->c1 && c2 == c->c2) ? c : mk::seqc(c1, c2);
    }
    case Computation::K::SeqE: {
      auto e = subst(c->e, s);
      auto c2 = subst(c->c2, s);
      return (e == c->e && c2 == c->c2) ? c : mk::seqe(e, c2);
    }
    case Computation::K::If: {
      auto e = subst(c->e, s);
      auto c1 = subst(c->c1, s), c2 = subst(c->c2, s);
      return (e == c->e && c1 == c->c1 && c2 == c->c2) ? c : mk::cif(e, c1, c2);
    }
  }
  return c;
}

CompType subst_ct(const CompType& ct, const Sub& s) {
  CompType out = ct;
  out.retTy = subst(ct.retTy, s);
  Sub s2 = s;
  out.u1 = adjust_binder(s2, ct.u1);
  out.u2 = adjust_binder(s2, ct.u2);
  out.i = adjust_binder(s2, ct.i);
  out.inv = subst(ct.inv, s2);
  Sub s3 = s2;
  out.x = adjust_binder(s3, ct.x);
  out.partial = subst(ct.partial, s3);
  return out;
}

TypeP subst(const TypeP& t, const Sub& s) {
  if (!t || s.empty()) return t;
  switch (t->k) {
    case TypeExpr::K::TyVar:
    case TypeExpr::K::Base:
    case TypeExpr::K::Untyped: return t;
    case TypeExpr::K::Pi: {
      auto dom = subst(t->dom, s);
      Sub s2 = s;
      auto x2 = adjust_binder(s2, t->name);
      auto cod = subst(t->cod, s2);
      if (dom == t->dom && x2 == t->name && cod == t->cod) return t;
      return mk::pi(x2, dom, cod);
    }
    case TypeExpr::K::Forall: {
      auto cod = subst(t->cod, s);
      return cod == t->cod ? t : mk::tall(t->name, cod);
    }
    case TypeExpr::K::CompT: {
      if (!touches(s, fv(t))) return t;
      return mk::compt(subst_ct(*t->ct, s));
    }
  }
  return t;
}

FormP subst(const FormP& f, const Sub& s) {
  if (!f || s.empty()) return f;
  switch (f->k) {
    case Formula::K::Pred: {
      std::vector<ExprP> args;
      bool changed = false;
      for (auto& a : f->args) {
        auto a2 = subst(a, s);
        changed |= a2 != a;
        args.push_back(a2);
      }
      return changed ? mk::pred(f->name, std::move(args)) : f;
    }
    case Formula::K::Eq:
    case Formula::K::TimeCmp: {
      auto a = subst(f->e1, s), b = subst(f->e2, s);
      if (a == f->e1 && b == f->e2) return f;
      return f->k == Formula::K::Eq ? mk::eq(a, b) : mk::tcmp(f->cmp, a, b);
    }
    case Formula::K::AppF: {
      auto g = subst(f->f1, s);
      auto e = subst(f->e1, s);
      return (g == f->f1 && e == f->e1) ? f : mk::appf(g, e);
    }
    case Formula::K::Top:
    case Formula::K::Bot: return f;
    case Formula::K::Not: {
      auto g = subst(f->f1, s);
      return g == f->f1 ? f : mk::fnot(g);
    }
    case Formula::K::And:
    case Formula::K::Or:
    case Formula::K::Imp: {
      auto a = subst(f->f1, s), b = subst(f->f2, s);
      if (a == f->f1 && b == f->f2) return f;
      return f->k == Formula::K::And ? mk::fand(a, b)
           : f->k == Formula::K::Or ? mk::forr(a, b)
                                    : mk::fimp(a, b);
    }
    case Formula::K::Forall:
    case Formula::K::Exists: {
      auto ty = subst(f->ty, s);
      Sub s2 = s;
      auto x2 = adjust_binder(s2, f->name);
      auto body = subst(f->f1, s2);
      if (ty == f->ty && x2 == f->name && body == f->f1) return f;
      return f->k == Formula::K::Forall ? mk::forall(x2, ty, body)
                                        : mk::exists(x2, ty, body);
    }
    case Formula::K::At: {
      auto g = subst(f->f1, s);
      auto u = subst(f->e1, s);
      return (g == f->f1 && u == f->e1) ? f : mk::at(g, u);
    }
    case Formula::K::OnInterval: {
      auto g = subst(f->f1, s);
      auto lo = subst(f->e1, s), hi = subst(f->e2, s);
      if (g == f->f1 && lo == f->e1 && hi == f->e2) return f;
      return mk::oninterval(g, lo, hi, f->loOpen, f->hiOpen);
    }
  }
  return f;
}

ExprP subst1(const ExprP& e, const std::string& x, const ExprP& r) {
  return subst(e, Sub{{x, r}});
}
CompP subst1(const CompP& c, const std::string& x, const ExprP& r) {
  return subst(c, Sub{{x, r}});
}
FormP subst1(const FormP& f, const std::string& x, const ExprP& r) {
  return subst(f, Sub{{x, r}});
}
TypeP subst1(const TypeP& t, const std::string& x, const ExprP& r) {
  return subst(t, Sub{{x, r}});
}

TypeP subst_tyvar(const TypeP& t, const std::string& X, const TypeP& r) {
  if (!t) return t;
  switch (t->k) {
    case TypeExpr::K::TyVar: return t->name == X ? r : t;
    case TypeExpr::K::Base:
    case TypeExpr::K::Untyped: return t;
    case TypeExpr::K::Pi: {
      auto dom = subst_tyvar(t->dom, X, r);
      auto cod = subst_tyvar(t->cod, X, r);
      return (dom == t->dom && cod == t->cod) ? t : mk::pi(t->name, dom, cod);
    }
    case TypeExpr::K::Forall: {
      if (t->name == X) return t;
      auto cod = subst_tyvar(t->cod, X, r);
      return cod == t->cod ? t : mk::tall(t->name, cod);
    }
    case TypeExpr::K::CompT: {
      CompType ct = *t->ct;
      ct.retTy = subst_tyvar(ct.retTy, X, r);
      ct.partial = subst_tyvar(ct.partial, X, r);
      ct.inv = subst_tyvar(ct.inv, X, r);
      return mk::compt(ct);
    }
  }
  return t;
}

FormP subst_tyvar(const FormP& f, const std::string& X, const TypeP& r) {
  if (!f) return f;
  switch (f->k) {
    case Formula::K::Forall:
    case Formula::K::Exists: {
      auto ty = subst_tyvar(f->ty, X, r);
      auto body = subst_tyvar(f->f1, X, r);
      if (ty == f->ty && body == f->f1) return f;
      return f->k == Formula::K::Forall ? mk::forall(f->name, ty, body)
                                        : mk::exists(f->name, ty, body);
    }
    case Formula::K::Not: {
      auto g = subst_tyvar(f->f1, X, r);
      return g == f->f1 ? f : mk::fnot(g);
    }
    case Formula::K::And:
    case Formula::K::Or:
    case Formula::K::Imp: {
      auto a = subst_tyvar(f->f1, X, r), b = subst_tyvar(f->f2, X, r);
      if (a == f->f1 && b == f->f2) return f;
      return f->k == Formula::K::And ? mk::fand(a, b)
           : f->k == Formula::K::Or ? mk::forr(a, b)
                                    : mk::fimp(a, b);
    }
    case Formula::K::At: {
      auto g = subst_tyvar(f->f1, X, r);
      return g == f->f1 ? f : mk::at(g, f->e1);
    }
    case Formula::K::OnInterval: {
      auto g = subst_tyvar(f->f1, X, r);
      return g == f->f1 ? f : mk::oninterval(g, f->e1, f->e2, f->loOpen, f->hiOpen);
    }
    default: return f;
  }
}

// ---------------- AST paths ----------------

namespace {
std::vector<int> parse_path(const std::string& path) {
  std::vector<int> ix;
  size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      i++;
      continue;
    }
    size_t j = i;
    while (j < path.size() && path[j] != '/') j++;
    ix.push_back(std::stoi(path.substr(i, j - i)));
    i = j;
  }
  return ix;
}

std::optional<NodeRef> walkE(const Expr* e, const std::vector<int>& ix, size_t d);
std::optional<NodeRef> walkC(const Computation* c, const std::vector<int>& ix, size_t d);

std::optional<NodeRef> walkE(const Expr* e, const std::vector<int>& ix, size_t d) {
  if (!e) return std::nullopt;
  if (d == ix.size()) return NodeRef{e, nullptr};
  int i = ix[d];
  switch (e->k) {
    case Expr::K::Lam:
    case Expr::K::TyLam:
    case Expr::K::TyApp:
      if (i == 0) return walkE(e->a.get(), ix, d + 1);
      return std::nullopt;
    case Expr::K::App:
    case Expr::K::Plus:
      if (i == 0) return walkE(e->a.get(), ix, d + 1);
      if (i == 1) return walkE(e->b.get(), ix, d + 1);
      return std::nullopt;
    case Expr::K::Comp:
      if (i == 0) return walkC(e->comp.get(), ix, d + 1);
      return std::nullopt;
    default: return std::nullopt;
  }
}

std::optional<NodeRef> walkC(const Computation* c, const std::vector<int>& ix, size_t d) {
  if (!c) return std::nullopt;
  if (d == ix.size()) return NodeRef{nullptr, c};
  int i = ix[d];
  switch (c->k) {
    case Computation::K::Act:
      if (i >= 0 && i < (int)c->act.args.size())
        return walkE(c->act.args[i].get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::Ret:
      if (i == 0) return walkE(c->e.get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::Fix:
      if (i == 0) return walkC(c->c1.get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::FixApp:
      if (i == 0) return walkC(c->c1.get(), ix, d + 1);
      if (i == 1) return walkE(c->e.get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::LetC:
    case Computation::K::SeqC:
      if (i == 0) return walkC(c->c1.get(), ix, d + 1);
      if (i == 1) return walkC(c->c2.get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::LetE:
    case Computation::K::SeqE:
      if (i == 0) return walkE(c->e.get(), ix, d + 1);
      if (i == 1) return walkC(c->c2.get(), ix, d + 1);
      return std::nullopt;
    case Computation::K::If:
      if (i == 0) return walkE(c->e.get(), ix, d + 1);
      if (i == 1) return walkC(c->c1.get(), ix, d + 1);
      if (i == 2) return walkC(c->c2.get(), ix, d + 1);
      return std::nullopt;
  }
  return std::nullopt;
}
}  // namespace

std::optional<NodeRef> node_at_path(const CompP& root, const std::string& path) {
  return walkC(root.get(), parse_path(path), 0);
}
std::optional<NodeRef> node_at_path(const ExprP& root, const std::string& path) {
  return walkE(root.get(), parse_path(path), 0);
}

}  // namespace sysm
