#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sysm {

using BigNat = boost::multiprecision::cpp_int;

struct Expr;
struct Computation;
struct Formula;
struct TypeExpr;
struct SymTerm;
struct CompType;

using ExprP = std::shared_ptr<const Expr>;
using CompP = std::shared_ptr<const Computation>;
using FormP = std::shared_ptr<const Formula>;
using TypeP = std::shared_ptr<const TypeExpr>;
using SymP = std::shared_ptr<const SymTerm>;

// Symbolic message terms (Dolev-Yao). Equality is structural; Hash/Enc/Mac
// behave as injective constructors. CodeHash stores the canonical print of
// the hashed program, so CodeHash(a) == CodeHash(b) iff alpha_eq(a, b).
struct SymTerm {
  enum class K { Atom, Nat, Cat, Hash, CodeHash, Enc, Mac, Key };
  K k{};
  std::string name;  // Atom name / CodeHash text
  BigNat n;          // Nat value / Key id
  SymP a, b;         // Cat(a,b); Hash(a); Enc(key=a,body=b); Mac(key=a,body=b)
};

struct BaseValue {
  enum class K { True, False, ThreadId, Loc, Nat, NegInf, Sym };
  K k{};
  BigNat n;  // ThreadId / Loc / Nat payload
  SymP sym;  // Sym payload (memoir world values)
};

struct Expr {
  enum class K { Var, Const, Lam, TyLam, App, TyApp, Comp, Plus };
  K k{};
  std::string name;  // Var name; Lam/TyLam binder
  BaseValue val;     // Const
  ExprP a, b;        // Lam body=a; App fun=a,arg=b; TyApp fun=a; Plus a,b
  CompP comp;        // Comp
};

struct Action {
  std::string head;
  std::vector<ExprP> args;
  int tyArgs = 0;  // number of type instantiations `a !` (types erased at runtime)
};

struct Computation {
  enum class K { Act, Ret, Fix, FixApp, LetC, LetE, SeqC, SeqE, If };
  K k{};
  Action act;
  ExprP e;           // Ret e; LetE e; SeqE e; If cond; FixApp arg
  std::string f, x;  // Fix(f, x); LetC/LetE binder x
  CompP c1, c2;      // Fix body=c1; FixApp fn=c1; LetC(c1,x.c2); If then=c1,else=c2
};

struct Formula {
  enum class K {
    Pred, Eq, AppF, Top, Bot, Not, And, Or, Imp,
    Forall, Exists, At, OnInterval, TimeCmp
  };
  enum class Cmp { Lt, Le, Eq };
  K k{};
  std::string name;          // Pred name; quantifier binder
  std::vector<ExprP> args;   // Pred
  ExprP e1, e2;              // Eq(e1,e2); TimeCmp(e1,e2); At time=e1; OnInterval lo=e1,hi=e2; AppF arg=e1
  Cmp cmp{};
  TypeP ty;                  // quantifier annotation (b / unt / Pi over those)
  FormP f1, f2;              // Not/quantifier/At/OnInterval body=f1; And/Or/Imp f1,f2
  bool loOpen = true, hiOpen = false;  // OnInterval bracket shape
};

// u1.u2.i.(x:retTy. partial, inv)
struct CompType {
  std::string u1, u2, i, x;
  TypeP retTy;
  FormP partial;
  FormP inv;
};

// Plain computation type, or (fix types) Pi argBinder:argTy. inner
struct ClosedCompType {
  bool isFixPi = false;
  std::string argBinder;
  TypeP argTy;
  CompType inner;
};

struct TypeExpr {
  enum class K { TyVar, Base, Untyped, Pi, Forall, CompT };
  K k{};
  std::string name;  // TyVar; Pi binder; Forall binder
  TypeP dom, cod;    // Pi dom/cod; Forall body=cod
  std::shared_ptr<const CompType> ct;  // CompT
};

struct KindBinder {
  bool isType = false;
  std::string name;
  TypeP ty;  // for expression binders
};

// kact(eta) under a telescope of Pi/Forall binders
struct ActionKind {
  std::vector<KindBinder> binders;
  CompType eta;
};

using Signature = std::map<std::string, ActionKind>;

// ---- constructors ----
namespace mk {
ExprP var(const std::string& n);
ExprP cbool(bool b);
ExprP cnat(const BigNat& n);
ExprP cloc(const BigNat& id);
ExprP ctid(const BigNat& id);
ExprP cneginf();
ExprP csym(SymP s);
ExprP lam(const std::string& x, ExprP body);
ExprP tylam(const std::string& X, ExprP body);
ExprP app(ExprP f, ExprP a);
ExprP tyapp(ExprP f);
ExprP comp(CompP c);
ExprP plus(ExprP a, ExprP b);

CompP act(const std::string& head, std::vector<ExprP> args = {}, int tyArgs = 0);
CompP ret(ExprP e);
CompP fix(const std::string& f, const std::string& x, CompP body);
CompP fixapp(CompP c, ExprP e);
CompP letc(CompP c1, const std::string& x, CompP c2);
CompP lete(ExprP e, const std::string& x, CompP c2);
CompP seqc(CompP c1, CompP c2);
CompP seqe(ExprP e, CompP c2);
CompP cif(ExprP cond, CompP then, CompP els);

FormP pred(const std::string& name, std::vector<ExprP> args);
FormP eq(ExprP a, ExprP b);
FormP appf(FormP f, ExprP e);
FormP top();
FormP bot();
FormP fnot(FormP f);
FormP fand(FormP a, FormP b);
FormP forr(FormP a, FormP b);
FormP fimp(FormP a, FormP b);
FormP forall(const std::string& x, TypeP ty, FormP body);
FormP exists(const std::string& x, TypeP ty, FormP body);
FormP at(FormP f, ExprP u);
FormP oninterval(FormP f, ExprP lo, ExprP hi, bool loOpen = true, bool hiOpen = false);
FormP tcmp(Formula::Cmp op, ExprP a, ExprP b);
FormP lt(ExprP a, ExprP b);
FormP le(ExprP a, ExprP b);
FormP teq(ExprP a, ExprP b);
FormP conj(std::vector<FormP> fs);  // right-nested; empty -> top

TypeP tyvar(const std::string& X);
TypeP base();
TypeP unt();
TypeP pi(const std::string& x, TypeP dom, TypeP cod);
TypeP tall(const std::string& X, TypeP body);
TypeP compt(const CompType& ct);

SymP satom(const std::string& n);
SymP snat(const BigNat& n);
SymP scat(SymP a, SymP b);
SymP shash(SymP a);
SymP scodehash(const std::string& canonicalText);
SymP senc(SymP key, SymP body);
SymP smac(SymP key, SymP body);
SymP skey(const BigNat& id);
}  // namespace mk

// ---- printing ----
// canonical=true renames binders to position-determined names; this string is
// the identity used by alpha_eq, code_hash and trace files.
std::string print(const ExprP& e, bool canonical = false);
std::string print(const CompP& c, bool canonical = false);
std::string print(const FormP& f, bool canonical = false);
std::string print(const TypeP& t, bool canonical = false);
std::string print(const ClosedCompType& ct, bool canonical = false);
std::string print_sym(const SymP& s);
std::string print_base(const BaseValue& v);

bool alpha_eq(const ExprP& a, const ExprP& b);
bool alpha_eq(const CompP& a, const CompP& b);
bool alpha_eq(const FormP& a, const FormP& b);
bool alpha_eq(const TypeP& a, const TypeP& b);
bool sym_eq(const SymP& a, const SymP& b);

// ---- free variables / free actions ----
std::set<std::string> fv(const ExprP& e);
std::set<std::string> fv(const CompP& c);
std::set<std::string> fv(const FormP& f);
std::set<std::string> fv(const TypeP& t);
std::set<std::string> free_actions(const ExprP& e);
std::set<std::string> free_actions(const CompP& c);

// ---- substitution (capture-avoiding, parallel) ----
using Sub = std::map<std::string, ExprP>;
ExprP subst(const ExprP& e, const Sub& s);
CompP subst(const CompP& c, const Sub& s);
FormP subst(const FormP& f, const Sub& s);
TypeP subst(const TypeP& t, const Sub& s);
CompType subst_ct(const CompType& ct, const Sub& s);
ExprP subst1(const ExprP& e, const std::string& x, const ExprP& r);
CompP subst1(const CompP& c, const std::string& x, const ExprP& r);
FormP subst1(const FormP& f, const std::string& x, const ExprP& r);
TypeP subst1(const TypeP& t, const std::string& x, const ExprP& r);

// type-variable substitution (for Forall/TyApp instantiation)
TypeP subst_tyvar(const TypeP& t, const std::string& X, const TypeP& r);
FormP subst_tyvar(const FormP& f, const std::string& X, const TypeP& r);

std::string fresh(const std::string& base);

// ---- AST paths ("/0/1"; "" is the root) ----
// child order: Lam/TyLam/TyApp/Comp: 0; App/Plus: 0,1; Ret: 0; Fix: 0;
// FixApp: 0=c,1=e; LetC/SeqC: 0,1; LetE/SeqE: 0=e,1=c; If: 0=cond,1=then,2=else;
// Act: i = i-th argument.
struct NodeRef {
  const Expr* e = nullptr;
  const Computation* c = nullptr;
};
std::optional<NodeRef> node_at_path(const CompP& root, const std::string& path);
std::optional<NodeRef> node_at_path(const ExprP& root, const std::string& path);

}  // namespace sysm
