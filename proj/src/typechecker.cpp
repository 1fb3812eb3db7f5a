#include "sysm/typechecker.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace sysm {

namespace {

using Win = TypeChecker::Win;
using Ctx = TypeChecker::Ctx;
using CK = Computation::K;
using TK = TypeExpr::K;

struct Inst {
  TypeP retTy;
  FormP partial;
  FormP inv;
};

// substitute concrete window names for a computation type's binders
Inst inst_ct_at(const CompType& ct, const Win& w, const std::string& x) {
  Sub s;
  if (ct.u1 != w.u1) s[ct.u1] = mk::var(w.u1);
  if (ct.u2 != w.u2) s[ct.u2] = mk::var(w.u2);
  if (ct.i != w.i) s[ct.i] = mk::var(w.i);
  Inst out;
  out.retTy = subst(ct.retTy, s);
  out.inv = subst(ct.inv, s);
  Sub sp = s;
  if (ct.x != x) sp[ct.x] = mk::var(x);
  out.partial = subst(ct.partial, sp);
  return out;
}

CompType freshen_ct(const CompType& ct) {
  CompType out;
  out.u1 = fresh(ct.u1);
  out.u2 = fresh(ct.u2);
  out.i = fresh(ct.i);
  out.x = fresh(ct.x);
  auto in = inst_ct_at(ct, {out.u1, out.u2, out.i}, out.x);
  out.retTy = in.retTy;
  out.partial = in.partial;
  out.inv = in.inv;
  return out;
}

// substitute an argument for a free variable of the type's formulas
CompType subst_ct_arg(const CompType& ct, const std::string& x,
                      const ExprP& e) {
  CompType out = ct;
  auto fve = fv(e);
  if (fve.count(ct.u1) || fve.count(ct.u2) || fve.count(ct.i) ||
      fve.count(ct.x))
    out = freshen_ct(ct);
  Sub s{{x, e}};
  out.retTy = subst(out.retTy, s);
  out.partial = subst(out.partial, s);
  out.inv = subst(out.inv, s);
  return out;
}

// pin the start boundary to an enclosing window; the tail segment of a
// sequencing keeps the whole computation's endpoint formulas
CompType pin_start(const CompType& ct, const std::string& u1name) {
  CompType out = ct;
  if (ct.u1 != u1name) {
    Sub s{{ct.u1, mk::var(u1name)}};
    out.retTy = subst(out.retTy, s);
    out.partial = subst(out.partial, s);
    out.inv = subst(out.inv, s);
  }
  out.u1 = fresh("uz");
  return out;
}

bool ct_alpha_eq(const CompType& a, const CompType& b) {
  return alpha_eq(mk::compt(a), mk::compt(b));
}

void flat_and(const FormP& f, std::vector<FormP>& out) {
  if (f->k == Formula::K::And) {
    flat_and(f->f1, out);
    flat_and(f->f2, out);
  } else {
    out.push_back(f);
  }
}

bool is_var(const ExprP& e, const std::string& n) {
  return e && e->k == Expr::K::Var && e->name == n;
}

std::string show_seq(const Sequent& s) {
  std::string out;
  for (auto& h : s.delta) {
    out += print(h);
    out += ";  ";
  }
  out += "|- " + print(s.goal);
  return out;
}

}  // namespace

bool qualifier_eq(const Qualifier& a, const Qualifier& b) {
  if (a.inv != b.inv) return false;
  if (!a.inv) return true;
  auto canon = [](const Qualifier& q) {
    Sub s;
    if (q.ub != "#ub") s[q.ub] = mk::var("#ub");
    if (q.ue != "#ue") s[q.ue] = mk::var("#ue");
    if (q.i != "#i") s[q.i] = mk::var("#i");
    return subst(q.phi, s);
  };
  return alpha_eq(canon(a), canon(b));
}

bool cnfn(const TypeP& tau, const Qualifier& phi) {
  if (!tau || !phi.inv) return false;
  switch (tau->k) {
    case TK::Base:
      return true;
    case TK::Pi:
      return cnfn(tau->dom, phi) && cnfn(tau->cod, phi);
    case TK::CompT: {
      const CompType& ct = *tau->ct;
      if (fv(ct.partial).count(ct.x)) return false;
      Qualifier qp{true, ct.u1, ct.u2, ct.i, ct.partial};
      Qualifier qi{true, ct.u1, ct.u2, ct.i, ct.inv};
      return qualifier_eq(qp, phi) && qualifier_eq(qi, phi) &&
             cnfn(ct.retTy, phi);
    }
    default:
      return false;
  }
}

bool silent_allowlisted(const FormP& phi, const std::string& ub,
                        const std::string& ue, const std::string& i,
                        const std::map<std::string, int>& eventArity) {
  using K = Formula::K;
  std::vector<FormP> cs;
  flat_and(phi, cs);
  for (auto& c : cs) {
    if (c->k == K::Top) continue;
    std::set<std::string> bound;
    FormP g = c;
    while (g->k == K::Forall) {
      bound.insert(g->name);
      g = g->f1;
    }
    if (g->k != K::Imp) return false;
    std::vector<FormP> ante;
    flat_and(g->f1, ante);
    // the guarded time variable: ub R t and t R ue with strict/lax bounds
    std::string tv;
    for (auto& lo : ante) {
      if (lo->k != K::TimeCmp || lo->cmp == Formula::Cmp::Eq) continue;
      if (!is_var(lo->e1, ub) || lo->e2->k != Expr::K::Var) continue;
      const std::string& cand = lo->e2->name;
      if (!bound.count(cand) || cand == ub || cand == ue) continue;
      for (auto& hi : ante) {
        if (hi->k != K::TimeCmp || hi->cmp == Formula::Cmp::Eq) continue;
        if (is_var(hi->e1, cand) && is_var(hi->e2, ue)) tv = cand;
      }
    }
    if (tv.empty()) return false;
    auto event_at = [&](const FormP& p) {
      if (!p || p->k != K::Pred) return false;
      auto it = eventArity.find(p->name);
      if (it == eventArity.end() || (int)p->args.size() != it->second)
        return false;
      return is_var(p->args.front(), i) && is_var(p->args.back(), tv);
    };
    bool ok = false;
    for (auto& a : ante)
      if (event_at(a)) ok = true;
    if (!ok && g->f2->k == K::Not && event_at(g->f2->f1)) ok = true;
    if (!ok) return false;
  }
  return true;
}

Signature heap_signature() {
  Signature s;
  auto F = [](const std::string& t) { return parse_formula(t); };
  {
    ActionKind k;
    k.binders.push_back({false, "e", mk::unt()});
    CompType ct;
    ct.u1 = "u1";
    ct.u2 = "u2";
    ct.i = "i";
    ct.x = "x";
    ct.retTy = mk::unt();
    ct.partial = F(
        "(forall l:unt. forall v:unt. ((eval(e, l) /\\ mem(l, v, u2)) =>"
        " x == v))"
        " /\\ (forall l:unt. (eval(e, l) => Read(i, l, x, u2)))"
        " /\\ (forall u:b. forall l:unt. forall w:unt."
        " (((u1 < u /\\ u <= u2) /\\ Read(i, l, w, u)) => eval(e, l)))"
        " /\\ (forall u:b. forall l:unt. forall w:unt."
        " ((u1 < u /\\ u <= u2) => ~Write(i, l, w, u)))");
    ct.inv = F(
        "(forall u:b. forall l:unt. forall w:unt."
        " ((u1 < u /\\ u <= u2) => ~Write(i, l, w, u)))"
        " /\\ (forall u:b. forall l:unt. forall w:unt."
        " (((u1 < u /\\ u <= u2) /\\ Read(i, l, w, u)) => eval(e, l)))");
    k.eta = ct;
    s["read"] = k;
  }
  {
    ActionKind k;
    k.binders.push_back({false, "y", mk::unt()});
    k.binders.push_back({false, "w", mk::unt()});
    CompType ct;
    ct.u1 = "u1";
    ct.u2 = "u2";
    ct.i = "i";
    ct.x = "x";
    ct.retTy = mk::unt();
    ct.partial = F(
        "x == w"
        " /\\ (forall l:unt. (eval(y, l) => Write(i, l, w, u2)))"
        " /\\ (forall u:b. forall l:unt. forall v:unt."
        " ((u1 < u /\\ u <= u2) => ~Read(i, l, v, u)))"
        " /\\ (forall u:b. forall l:unt. forall v:unt."
        " (((u1 < u /\\ u <= u2) /\\ Write(i, l, v, u)) => eval(y, l)))");
    ct.inv = F(
        "(forall u:b. forall l:unt. forall v:unt."
        " ((u1 < u /\\ u <= u2) => ~Read(i, l, v, u)))"
        " /\\ (forall u:b. forall l:unt. forall v:unt."
        " (((u1 < u /\\ u <= u2) /\\ Write(i, l, v, u)) => eval(y, l)))");
    k.eta = ct;
    s["write"] = k;
  }
  return s;
}

std::string TypeReport::render() const {
  std::string out;
  for (auto& o : obligations) {
    out += o.ok ? "PASS " : "FAIL ";
    out += (o.path.empty() ? "/" : o.path) + " " + o.rule;
    if (!o.ok && !o.detail.empty()) out += ": " + o.detail;
    out += "\n";
  }
  out += ok ? "TYPECHECK PASS\n" : "TYPECHECK FAIL\n";
  return out;
}

TypeChecker::TypeChecker(const AnnotatedProgram& p, ProverOptions o,
                         const Registry* reg)
    : prog(p), opt(o) {
  static const Registry heap = heap_registry();
  const Registry& r = reg ? *reg : heap;
  for (auto& [n, d] : r)
    if (d.kind == PredicateDef::Kind::Event) eventArity[n] = d.arity;
}

const Annotation* TypeChecker::annot(const std::string& path) const {
  auto it = prog.annotations.find(path);
  return it == prog.annotations.end() ? nullptr : &it->second;
}

bool TypeChecker::record(const std::string& path, const std::string& rule,
                         bool ok, const std::string& detail) {
  obligations.push_back({path, rule, ok, detail});
  return ok;
}

bool TypeChecker::discharge(const std::string& path, const std::string& tag,
                            Sequent s) {
  if (s.goal->k == Formula::K::Top) return record(path, tag, true);
  for (auto& h : s.delta)
    if (alpha_eq(h, s.goal)) return record(path, tag, true);
  if (const Annotation* a = annot(path)) {
    auto it = a->scripts.find(tag);
    if (it != a->scripts.end()) {
      auto r = check_proof(s, it->second, opt);
      return record(path, tag, r.ok,
                    r.ok ? "" : r.error + "  [" + show_seq(s) + "]");
    }
  }
  auto p = auto_prove(s, opt.autoDepth, opt);
  return record(path, tag, p != nullptr,
                p ? "" : "not proved: " + show_seq(s));
}

bool TypeChecker::entail(const Ctx& ctx, const std::string& path,
                         const std::string& tag,
                         const std::vector<FormP>& hyps, const FormP& goal,
                         const std::map<std::string, TypeP>& extraL) {
  Sequent s;
  s.theta = ctx.theta;
  s.gammaL = ctx.gammaL;
  for (auto& [n, t] : extraL) s.gammaL[n] = t;
  s.gamma = ctx.gamma;
  s.delta = ctx.delta;
  for (auto& h : hyps)
    if (h && h->k != Formula::K::Top) s.delta.push_back(h);
  s.goal = goal;
  s.sig = &prog.sig;
  return discharge(path, tag, std::move(s));
}

FormP TypeChecker::no_events(const Win& w) const {
  std::vector<FormP> blocks;
  for (auto& [name, ar] : eventArity) {
    std::vector<std::pair<std::string, TypeP>> binders{{"t", mk::base()}};
    std::vector<ExprP> args{mk::var(w.i)};
    for (int j = 0; j + 2 < ar; j++) {
      std::string a = "a" + std::to_string(j);
      binders.push_back({a, mk::unt()});
      args.push_back(mk::var(a));
    }
    args.push_back(mk::var("t"));
    FormP guard = mk::fand(mk::lt(mk::var(w.u1), mk::var("t")),
                           mk::le(mk::var("t"), mk::var(w.u2)));
    FormP blk = mk::fimp(guard, mk::fnot(mk::pred(name, args)));
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
      blk = mk::forall(it->first, it->second, blk);
    blocks.push_back(blk);
  }
  return mk::conj(blocks);
}

std::optional<CompType> TypeChecker::check_action_kind(Ctx& ctx,
                                                       const std::string& path,
                                                       const Action& a) {
  auto it = prog.sig.find(a.head);
  if (it == prog.sig.end()) {
    record(path, "act-kind", false, "unknown action: " + a.head);
    return std::nullopt;
  }
  std::vector<KindBinder> binders = it->second.binders;
  CompType eta = freshen_ct(it->second.eta);
  size_t argi = 0;
  int tyleft = a.tyArgs;
  for (size_t bi = 0; bi < binders.size(); bi++) {
    auto& b = binders[bi];
    if (b.isType) {
      if (tyleft <= 0) {
        record(path, "act-kind", false, "missing type instantiation");
        return std::nullopt;
      }
      tyleft--;
      continue;
    }
    if (argi >= a.args.size()) {
      record(path, "act-kind", false, "under-applied action");
      return std::nullopt;
    }
    ExprP arg = a.args[argi];
    if (!check_expr(ctx, path + "/" + std::to_string(argi), arg, b.ty))
      return std::nullopt;
    argi++;
    Sub s{{b.name, arg}};
    for (size_t j = bi + 1; j < binders.size(); j++)
      if (!binders[j].isType) binders[j].ty = subst(binders[j].ty, s);
    eta = subst_ct_arg(eta, b.name, arg);
  }
  if (argi != a.args.size() || tyleft != 0) {
    record(path, "act-kind", false, "argument count mismatch");
    return std::nullopt;
  }
  return eta;
}

bool TypeChecker::check_silent_judgment(Ctx& ctx, const std::string& path,
                                        const std::string& tag, const Win& w,
                                        const FormP& phi) {
  if (!phi || phi->k == Formula::K::Top) return record(path, tag, true);
  if (silent_allowlisted(phi, w.u1, w.u2, w.i, eventArity))
    return record(path, tag, true);
  Sequent s;
  s.theta = ctx.theta;
  s.gammaL = ctx.gammaL;
  s.gamma = ctx.gamma;
  s.delta = ctx.delta;
  s.goal = phi;
  s.sig = &prog.sig;
  return discharge(path, tag, std::move(s));
}

bool TypeChecker::check_eq_rule(Ctx& ctx, const std::string& path,
                                const ExprP& e, const ExprP& to,
                                const TypeP& tau) {
  bool ok = true;
  if (alpha_eq(e, to)) {
    record(path, "eq", true);
  } else {
    Sequent s;
    s.theta = ctx.theta;
    s.gammaL = ctx.gammaL;
    s.gamma = ctx.gamma;
    s.delta = ctx.delta;
    s.goal = mk::eq(e, to);
    s.sig = &prog.sig;
    ok &= discharge(path, "eq", std::move(s));
  }
  ok &= check_expr(ctx, path, to, tau);
  return ok;
}

bool TypeChecker::check_confine(Ctx ctx, const std::string& path,
                                const ExprP& e, const TypeP& tau,
                                const Qualifier& q) {
  bool ok = true;
  // 1. trace composability: pointwise shape, else a gluing script
  if (check_trace_composable_shape(q.phi, q.ub, q.ue, q.i)) {
    record(path, "confine-composable", true);
  } else {
    std::string um = fresh("um");
    Sequent s;
    s.theta = {q.ub, um, q.ue};
    s.gammaL[q.i] = mk::base();
    s.delta = {mk::le(mk::var(q.ub), mk::var(um)),
               mk::le(mk::var(um), mk::var(q.ue)),
               subst(q.phi, Sub{{q.ue, mk::var(um)}}),
               subst(q.phi, Sub{{q.ub, mk::var(um)}})};
    s.goal = q.phi;
    s.sig = &prog.sig;
    ok &= discharge(path, "confine-composable", std::move(s));
  }
  // 2. the invariant holds over silent segments
  Ctx sctx;
  sctx.theta = {q.ub, q.ue};
  sctx.gammaL[q.i] = mk::base();
  sctx.delta.push_back(mk::le(mk::var(q.ub), mk::var(q.ue)));
  ok &= check_silent_judgment(sctx, path, "confine-silent",
                              Win{q.ub, q.ue, q.i}, q.phi);
  // 3. the invariant mentions the binder triple only
  auto fvp = fv(q.phi);
  fvp.erase(q.ub);
  fvp.erase(q.ue);
  fvp.erase(q.i);
  ok &= record(path, "confine-wf", fvp.empty(),
               fvp.empty() ? "" : "stray variable: " + *fvp.begin());
  // 4. no actions in the subject
  auto fa = free_actions(e);
  ok &= record(path, "confine-actions", fa.empty(),
               fa.empty() ? "" : "CONTAINS_ACTIONS: " + *fa.begin());
  // 5. free variables come from the program context
  bool closed = true;
  std::string missing;
  for (auto& x : fv(e))
    if (!ctx.gamma.count(x)) {
      closed = false;
      missing = x;
    }
  ok &= record(path, "confine-fv", closed,
               closed ? "" : "escaping variable: " + missing);
  // 6. the ascribed type and the used context entries confine
  ok &= record(path, "confine-type", cnfn(tau, q),
               "type does not confine at the invariant");
  for (auto& x : fv(e)) {
    auto it = ctx.gamma.find(x);
    if (it == ctx.gamma.end()) continue;
    ok &= record(path, "confine-ctx-" + x, cnfn(it->second, q),
                 "context entry does not confine: " + x);
  }
  return ok;
}

std::optional<TypeP> TypeChecker::synth_expr(Ctx& ctx, const std::string& path,
                                             const ExprP& e) {
  using K = Expr::K;
  switch (e->k) {
    case K::Var: {
      auto it = ctx.gamma.find(e->name);
      if (it != ctx.gamma.end()) return it->second;
      auto jt = ctx.gammaL.find(e->name);
      if (jt != ctx.gammaL.end()) return jt->second;
      return std::nullopt;
    }
    case K::Const:
      return mk::base();
    case K::Plus: {
      auto a = synth_expr(ctx, path + "/0", e->a);
      auto b = synth_expr(ctx, path + "/1", e->b);
      if (a && b && (*a)->k == TK::Base && (*b)->k == TK::Base)
        return mk::base();
      return std::nullopt;
    }
    case K::App: {
      auto f = synth_expr(ctx, path + "/0", e->a);
      if (!f || (*f)->k != TK::Pi) return std::nullopt;
      size_t mark = obligations.size();
      if (!check_expr(ctx, path + "/1", e->b, (*f)->dom)) {
        obligations.resize(mark);
        return std::nullopt;
      }
      return subst1((*f)->cod, (*f)->name, e->b);
    }
    case K::TyApp: {
      auto f = synth_expr(ctx, path + "/0", e->a);
      if (!f || (*f)->k != TK::Forall) return std::nullopt;
      const Annotation* a = annot(path);
      if (!a || !a->exprTy) return std::nullopt;  // erased instantiation
      return subst_tyvar((*f)->cod, (*f)->name, a->exprTy);
    }
    case K::Comp: {
      const Annotation* a = annot(path);
      if (!a || !a->compTy || a->compTy->isFixPi) return std::nullopt;
      TypeP t = mk::compt(a->compTy->inner);
      if (!check_expr(ctx, path, e, t)) return std::nullopt;
      return t;
    }
    case K::Lam:
    case K::TyLam: {
      const Annotation* a = annot(path);
      if (!a || !a->exprTy) return std::nullopt;
      if (!check_expr(ctx, path, e, a->exprTy)) return std::nullopt;
      return a->exprTy;
    }
  }
  return std::nullopt;
}

bool TypeChecker::check_expr(Ctx ctx, const std::string& path, const ExprP& e,
                             const TypeP& tau) {
  using K = Expr::K;
  if (!tau) return record(path, "expr", false, "missing type");
  if (tau->k == TK::Untyped) return true;  // untyped values need no premise
  size_t mark = obligations.size();
  bool structural = false;
  std::string why = "no applicable rule";
  switch (e->k) {
    case K::Var: {
      TypeP found;
      auto it = ctx.gamma.find(e->name);
      if (it != ctx.gamma.end()) found = it->second;
      if (!found) {
        auto jt = ctx.gammaL.find(e->name);
        if (jt != ctx.gammaL.end()) found = jt->second;
      }
      if (found && alpha_eq(found, tau))
        structural = true;
      else
        why = found ? "variable type mismatch: " + e->name
                    : "unbound variable: " + e->name;
      break;
    }
    case K::Const:
      structural = tau->k == TK::Base;
      why = "constants have type b";
      break;
    case K::Plus:
      if (tau->k == TK::Base)
        structural = check_expr(ctx, path + "/0", e->a, tau) &&
                     check_expr(ctx, path + "/1", e->b, tau);
      else
        why = "sums have type b";
      break;
    case K::Lam:
      if (tau->k == TK::Pi) {
        Ctx c2 = ctx;
        TypeP cod = tau->cod;
        if (e->name != tau->name)
          cod = subst1(cod, tau->name, mk::var(e->name));
        c2.gamma[e->name] = tau->dom;
        structural = check_expr(c2, path + "/0", e->a, cod);
      } else {
        why = "a function needs a Pi type";
      }
      break;
    case K::TyLam:
      if (tau->k == TK::Forall) {
        TypeP body = tau->cod;
        if (e->name != tau->name)
          body = subst_tyvar(body, tau->name, mk::tyvar(e->name));
        structural = check_expr(ctx, path + "/0", e->a, body);
      } else {
        why = "a type abstraction needs an All type";
      }
      break;
    case K::Comp:
      if (tau->k == TK::CompT) {
        structural = comp_intro(ctx, path, e->comp, *tau->ct);
      } else {
        why = "a suspended computation needs a tcmp type";
      }
      break;
    case K::App:
    case K::TyApp: {
      auto t = synth_expr(ctx, path, e);
      if (t && alpha_eq(*t, tau))
        structural = true;
      else
        why = t ? "synthesized " + print(*t) + ", wanted " + print(tau)
                : "cannot synthesize a type for the application head";
      break;
    }
  }
  if (structural) return true;
  const Annotation* a = annot(path);
  if (a && (a->eqTo || a->confine)) obligations.resize(mark);
  if (a && a->eqTo) return check_eq_rule(ctx, path, e, a->eqTo, tau);
  if (a && a->confine) {
    if (!ctx.q.inv || !qualifier_eq(*a->confine, ctx.q))
      return record(path, "confine", false,
                    "confine site outside a matching Inv context");
    return check_confine(ctx, path, e, tau, *a->confine);
  }
  return record(path, "expr", false, why);
}

bool TypeChecker::comp_intro(Ctx ctx, const std::string& path, const CompP& c,
                             const CompType& declared) {
  CompType inner = declared;
  bool weaken = false;
  if (const Annotation* a = annot(path))
    if (a->compTy && !a->compTy->isFixPi &&
        !ct_alpha_eq(a->compTy->inner, declared)) {
      inner = a->compTy->inner;
      weaken = true;
    }
  Win w{fresh("u1"), fresh("u2"), fresh("i")};
  Ctx c2 = ctx;
  c2.theta.push_back(w.u1);
  c2.theta.push_back(w.u2);
  c2.gammaL[w.i] = mk::base();
  if (!ctx.u.empty())
    c2.delta.push_back(mk::le(mk::var(ctx.u), mk::var(w.u1)));
  c2.delta.push_back(mk::le(mk::var(w.u1), mk::var(w.u2)));
  c2.u = w.u1;
  bool ok = check_comp(c2, path + "/0", c, w, inner);
  if (weaken) {
    std::string xv = fresh(declared.x);
    auto di = inst_ct_at(declared, w, xv);
    auto ii = inst_ct_at(inner, w, xv);
    if (!(alpha_eq(di.retTy, ii.retTy) || di.retTy->k == TK::Untyped))
      ok &= record(path, "comp-result-type", false, "result type mismatch");
    ok &= entail(c2, path, "comp-weaken-partial", {ii.partial}, di.partial,
                 {{xv, di.retTy}});
    ok &= entail(c2, path, "comp-weaken-inv", {ii.inv}, di.inv);
  }
  return ok;
}

void TypeChecker::apply_qual(Ctx& ctx, const std::string& path,
                             bool recordIt) {
  const Annotation* a = annot(path);
  if (a && a->qual && !qualifier_eq(*a->qual, ctx.q)) {
    if (recordIt)
      record(path, "seqcomp-qual", ctx.gamma.empty(),
             "mixed qualifiers require an empty program variable context");
    ctx.q = *a->qual;
  }
}

std::optional<CompType> TypeChecker::act_kind(Ctx& ctx,
                                              const std::string& path,
                                              const Action& a) {
  auto it = kindMemo.find(path);
  if (it != kindMemo.end()) return it->second;
  auto k = check_action_kind(ctx, path, a);
  kindMemo[path] = k;
  return k;
}

std::optional<CompType> TypeChecker::child_ct(Ctx& ctx,
                                              const std::string& path,
                                              const CompP& c) {
  auto memo = ctMemo.find(path);
  if (memo != ctMemo.end()) return memo->second;
  std::optional<CompType> out;
  const Annotation* a = annot(path);
  if (a && a->compTy && !a->compTy->isFixPi) {
    out = a->compTy->inner;
  } else if (c->k == CK::Act) {
    out = act_kind(ctx, path, c->act);
  } else if (c->k == CK::Ret) {
    CompType ct;
    ct.u1 = fresh("u1");
    ct.u2 = fresh("u2");
    ct.i = fresh("i");
    ct.x = fresh("x");
    auto t = synth_expr(ctx, path + "/0", c->e);
    ct.retTy = t ? *t : mk::unt();
    FormP ne = no_events({ct.u1, ct.u2, ct.i});
    ct.partial = mk::fand(mk::eq(mk::var(ct.x), c->e), ne);
    ct.inv = ne;
    out = ct;
  }
  ctMemo[path] = out;
  return out;
}

// resolves the type of the head of a sequencing node: the first computation
// of letc/seqc, or the computation type of the sequenced expression
std::optional<CompType> TypeChecker::seq_head_ct(Ctx& ctx,
                                                 const std::string& path,
                                                 const Computation& c,
                                                 bool recordErr) {
  std::string hp = path + "/0";
  if (c.k == CK::LetC || c.k == CK::SeqC) {
    auto out = child_ct(ctx, hp, c.c1);
    if (!out && recordErr)
      record(path, "seqc", false,
             "missing annotation for the first segment");
    return out;
  }
  auto memo = ctMemo.find(hp);
  if (memo != ctMemo.end()) return memo->second;
  std::optional<CompType> out;
  Ctx ce = ctx;
  auto te = synth_expr(ce, hp, c.e);
  if (!te) {
    const Annotation* ae = annot(hp);
    if (ae && ae->exprTy && check_expr(ce, hp, c.e, ae->exprTy))
      te = ae->exprTy;
  }
  if (te && (*te)->k == TK::CompT)
    out = *(*te)->ct;
  else if (recordErr)
    record(path, "seqe", false,
           "cannot type the sequenced expression as a computation");
  ctMemo[hp] = out;
  return out;
}

bool TypeChecker::check_comp_partial(Ctx ctx, const std::string& path,
                                     const CompP& c, const Win& w,
                                     const CompType& ct) {
  apply_qual(ctx, path, true);
  ctx.u = w.u1;
  std::string xv = fresh(ct.x);
  auto I = inst_ct_at(ct, w, xv);
  std::map<std::string, TypeP> xL{{xv, I.retTy}};
  const Annotation* a = annot(path);
  switch (c->k) {
    case CK::Act: {
      auto rawKind = act_kind(ctx, path, c->act);
      if (!rawKind) return false;
      auto K = inst_ct_at(*rawKind, w, xv);
      bool ok = true;
      if (!(I.retTy->k == TK::Untyped || alpha_eq(I.retTy, K.retTy)))
        ok &= record(path, "act-result-type", false,
                     "action returns " + print(K.retTy));
      FormP sil = a && a->silent ? a->silent : mk::top();
      ok &= check_silent_judgment(ctx, path, "act-silent", w, sil);
      FormP derived = sil->k == Formula::K::Top ? K.partial
                                                : mk::fand(K.partial, sil);
      ok &= entail(ctx, path, "act-partial", {derived}, I.partial, xL);
      return ok;
    }
    case CK::Ret: {
      Ctx ce = ctx;
      ce.u = w.u2;
      bool ok = check_expr(ce, path + "/0", c->e, I.retTy);
      FormP sil = a && a->silent ? a->silent : no_events(w);
      ok &= check_silent_judgment(ctx, path, "ret-silent", w, sil);
      FormP derived = mk::fand(mk::eq(mk::var(xv), c->e), sil);
      ok &= entail(ctx, path, "ret-partial", {derived}, I.partial, xL);
      return ok;
    }
    case CK::LetC:
    case CK::SeqC:
    case CK::LetE:
    case CK::SeqE: {
      auto ct1o = seq_head_ct(ctx, path, *c, true);
      if (!ct1o) return false;
      return seq_tail(ctx, path, *c, w, ct, *ct1o, true);
    }
    case CK::If: {
      Ctx ce = ctx;
      bool ok = check_expr(ce, path + "/0", c->e, mk::base());
      ok &= if_branch(ctx, path, c->e, c->c1, 1, w, ct, true);
      ok &= if_branch(ctx, path, c->e, c->c2, 2, w, ct, true);
      return ok;
    }
    case CK::FixApp: {
      auto cct = fixapp_pi(path);
      if (!cct)
        return record(path, "capp", false,
                      "missing Pi annotation for the applied fixpoint");
      bool ok = true;
      if (c->c1->k != CK::Fix)
        return record(path, "capp", false,
                      "computation application needs a literal fixpoint");
      if (!checkedFix.count(path + "/0")) {
        checkedFix.insert(path + "/0");
        ok &= check_fix(ctx, path + "/0", *c->c1, *cct);
      }
      Ctx ce = ctx;
      ok &= check_expr(ce, path + "/1", c->e, cct->argTy);
      CompType eta = subst_ct_arg(cct->inner, cct->argBinder, c->e);
      auto IE = inst_ct_at(eta, w, xv);
      if (!(I.retTy->k == TK::Untyped || alpha_eq(I.retTy, IE.retTy)))
        ok &= record(path, "capp-result-type", false, "result type mismatch");
      ok &= entail(ctx, path, "capp-partial", {IE.partial}, I.partial, xL);
      return ok;
    }
    case CK::Fix:
      return record(path, "fix", false,
                    "a bare fixpoint has a Pi type; apply it");
  }
  return false;
}

bool TypeChecker::check_comp_invariant(Ctx ctx, const std::string& path,
                                       const CompP& c, const Win& w,
                                       const CompType& ct) {
  apply_qual(ctx, path, false);
  ctx.u = w.u1;
  std::string xv = fresh(ct.x);
  auto I = inst_ct_at(ct, w, xv);
  switch (c->k) {
    case CK::Act: {
      auto kind = act_kind(ctx, path, c->act);
      if (!kind) return false;
      auto K = inst_ct_at(*kind, w, fresh(kind->x));
      return entail(ctx, path, "act-inv", {K.inv}, I.inv);
    }
    case CK::Ret:
      return check_silent_judgment(ctx, path, "reti", w, I.inv);
    case CK::LetC:
    case CK::SeqC:
    case CK::LetE:
    case CK::SeqE: {
      auto ct1o = seq_head_ct(ctx, path, *c, false);
      if (!ct1o) return false;
      return seq_tail(ctx, path, *c, w, ct, *ct1o, false);
    }
    case CK::If: {
      bool ok = if_branch(ctx, path, c->e, c->c1, 1, w, ct, false);
      ok &= if_branch(ctx, path, c->e, c->c2, 2, w, ct, false);
      return ok;
    }
    case CK::FixApp: {
      auto cct = fixapp_pi(path);
      if (!cct || c->c1->k != CK::Fix) return false;
      CompType eta = subst_ct_arg(cct->inner, cct->argBinder, c->e);
      auto IE = inst_ct_at(eta, w, fresh(eta.x));
      return entail(ctx, path, "capp-inv", {IE.inv}, I.inv);
    }
    case CK::Fix:
      return false;
  }
  return false;
}

// shared sequencing logic for letc/seqc/lete/seqe in both judgments
bool TypeChecker::seq_tail(Ctx& ctx, const std::string& path,
                           const Computation& c, const Win& w,
                           const CompType& ct, const CompType& ct1,
                           bool partialMode) {
  std::string xv = fresh(ct.x);
  auto I = inst_ct_at(ct, w, xv);
  std::map<std::string, TypeP> xL{{xv, I.retTy}};
  bool isLet = c.k == CK::LetC || c.k == CK::LetE;
  bool headIsComp = c.k == CK::LetC || c.k == CK::SeqC;
  std::string um = fresh("um");
  Win w1{w.u1, um, w.i};
  Win w2{um, w.u2, w.i};
  Ctx cx1 = ctx;
  cx1.theta.push_back(um);
  cx1.delta.push_back(mk::le(mk::var(w.u1), mk::var(um)));
  bool ok = true;
  if (headIsComp) {
    if (partialMode)
      ok &= check_comp_partial(cx1, path + "/0", c.c1, w1, ct1);
    else
      ok &= check_comp_invariant(cx1, path + "/0", c.c1, w1, ct1);
  }
  // bind the head's result and postcondition for the tail
  std::string xb = isLet ? c.x : fresh("xr");
  CompP tail = c.c2;
  Ctx cx2 = cx1;
  cx2.delta.push_back(mk::le(mk::var(um), mk::var(w.u2)));
  if (isLet && (cx2.gamma.count(xb) || cx2.gammaL.count(xb))) {
    std::string nb = fresh(xb);
    tail = subst1(tail, xb, mk::var(nb));
    xb = nb;
  }
  auto I1 = inst_ct_at(ct1, w1, xb);
  if (isLet)
    cx2.gamma[xb] = I1.retTy;
  else
    cx2.gammaL[xb] = I1.retTy;
  cx2.delta.push_back(I1.partial);
  const Annotation* a2 = annot(path + "/1");
  bool annotated = a2 && a2->compTy && !a2->compTy->isFixPi;
  if (partialMode) {
    if (annotated) {
      CompType ct2 = a2->compTy->inner;
      ok &= check_comp_partial(cx2, path + "/1", tail, w2, ct2);
      std::string xv2 = fresh(ct2.x);
      auto I2 = inst_ct_at(ct2, w2, xv2);
      if (!(I.retTy->k == TK::Untyped || alpha_eq(I.retTy, I2.retTy)))
        ok &= record(path, "seq-result-type", false, "result type mismatch");
      FormP p2 = subst(I2.partial, Sub{{xv2, mk::var(xv)}});
      ok &= entail(cx2, path, "seq-final", {p2}, I.partial, xL);
    } else {
      ok &= check_comp_partial(cx2, path + "/1", tail, w2,
                               pin_start(ct, w.u1));
    }
  } else {
    // case 1: the head is still running at the endpoint
    auto I1full = inst_ct_at(ct1, w, fresh(ct1.x));
    ok &= entail(ctx, path, "seqci-case1", {I1full.inv}, I.inv);
    if (annotated) {
      CompType ct2 = a2->compTy->inner;
      ok &= check_comp_invariant(cx2, path + "/1", tail, w2, ct2);
      std::string xv2 = fresh(ct2.x);
      auto I2 = inst_ct_at(ct2, w2, xv2);
      // case 2: the head returned, the tail is running
      ok &= entail(cx2, path, "seqci-case2", {I2.inv}, I.inv);
      // case 3: both segments completed, trailing steps silent
      const Annotation* a = annot(path);
      FormP sil = a && a->silent ? a->silent : mk::top();
      if (sil->k != Formula::K::Top)
        ok &= check_silent_judgment(cx2, path, "seqci-silent", w2, sil);
      ok &= entail(cx2, path, "seqci-case3", {I2.partial, sil}, I.inv,
                   {{xv2, I2.retTy}});
    } else {
      ok &= check_comp_invariant(cx2, path + "/1", tail, w2, ct);
      auto I2 = inst_ct_at(ct, w2, fresh(ct.x));
      ok &= entail(cx2, path, "seqci-case2", {I2.inv}, I.inv);
    }
  }
  return ok;
}

bool TypeChecker::if_branch(Ctx ctx, const std::string& path,
                            const ExprP& cond, const CompP& branch, int idx,
                            const Win& w, const CompType& ct,
                            bool partialMode) {
  std::string bp = path + "/" + std::to_string(idx);
  // branch hypothesis: the condition evaluates to the taken constant
  ctx.delta.push_back(mk::pred("eval", {cond, mk::cbool(idx == 1)}));
  const Annotation* ab = annot(bp);
  if (ab && ab->compTy && !ab->compTy->isFixPi) {
    CompType bt = ab->compTy->inner;
    bool ok = partialMode ? check_comp_partial(ctx, bp, branch, w, bt)
                          : check_comp_invariant(ctx, bp, branch, w, bt);
    std::string xv = fresh(ct.x);
    auto I = inst_ct_at(ct, w, xv);
    auto Ib = inst_ct_at(bt, w, xv);
    std::string side = idx == 1 ? "if-then-" : "if-else-";
    if (partialMode) {
      if (!(I.retTy->k == TK::Untyped || alpha_eq(I.retTy, Ib.retTy)))
        ok &= record(path, side + "result-type", false,
                     "result type mismatch");
      ok &= entail(ctx, path, side + "partial", {Ib.partial}, I.partial,
                   {{xv, I.retTy}});
    } else {
      ok &= entail(ctx, path, side + "inv", {Ib.inv}, I.inv);
    }
    return ok;
  }
  return partialMode ? check_comp_partial(ctx, bp, branch, w, ct)
                     : check_comp_invariant(ctx, bp, branch, w, ct);
}

std::optional<ClosedCompType> TypeChecker::fixapp_pi(
    const std::string& path) const {
  const Annotation* af = annot(path + "/0");
  if (af && af->compTy && af->compTy->isFixPi) return *af->compTy;
  const Annotation* a = annot(path);
  if (a && a->compTy && a->compTy->isFixPi) return *a->compTy;
  return std::nullopt;
}

bool TypeChecker::check_fix(Ctx ctx, const std::string& path,
                            const Computation& fx,
                            const ClosedCompType& cct) {
  if (!cct.isFixPi)
    return record(path, "fix", false, "fixpoint needs a Pi computation type");
  CompType eta = cct.inner;
  const Annotation* a = annot(path);
  FormP phi0 = a && a->fix0 ? a->fix0 : eta.inv;
  CompType etaH = eta;
  etaH.inv = phi0;
  // the declared type may not smuggle unbound names
  auto fvt = fv(mk::pi(cct.argBinder, cct.argTy, mk::compt(etaH)));
  std::string stray;
  for (auto& x : fvt)
    if (!ctx.gamma.count(x) && !ctx.gammaL.count(x) &&
        std::find(ctx.theta.begin(), ctx.theta.end(), x) == ctx.theta.end())
      stray = x;
  bool ok = record(path, "fix-wf", stray.empty(),
                   stray.empty() ? "" : "stray variable: " + stray);
  Ctx cb = ctx;
  cb.gamma[fx.x] = cct.argTy;
  cb.gamma[fx.f] = mk::pi(cct.argBinder, cct.argTy, mk::compt(etaH));
  CompType bodyT = subst_ct_arg(etaH, cct.argBinder, mk::var(fx.x));
  Win wf{fresh("u1"), fresh("u2"), fresh("i")};
  cb.theta.push_back(wf.u1);
  cb.theta.push_back(wf.u2);
  cb.gammaL[wf.i] = mk::base();
  cb.delta.push_back(mk::le(mk::var(wf.u1), mk::var(wf.u2)));
  cb.u = wf.u1;
  ok &= check_comp(cb, path + "/0", fx.c1, wf, bodyT);
  auto Ih = inst_ct_at(bodyT, wf, fresh(bodyT.x));
  if (!alpha_eq(phi0, eta.inv)) {
    auto Id = inst_ct_at(subst_ct_arg(eta, cct.argBinder, mk::var(fx.x)), wf,
                         fresh(eta.x));
    ok &= entail(cb, path, "fix-weaken", {Ih.inv}, Id.inv);
  }
  ok &= check_silent_judgment(cb, path, "fix-nonentry", wf, Ih.inv);
  return ok;
}

bool TypeChecker::check_comp(const Ctx& ctx, const std::string& path,
                             const CompP& c, const Win& w,
                             const CompType& ct) {
  bool ok = check_comp_partial(ctx, path, c, w, ct);
  ok &= check_comp_invariant(ctx, path, c, w, ct);
  return ok;
}

TypeReport TypeChecker::run() {
  const Annotation* ra = annot("");
  bool ok = true;
  Ctx ctx;
  ctx.delta = prog.assumptions;
  if (prog.prog.c) {
    if (!ra || !ra->compTy) {
      ok = record("", "root", false, "missing root type annotation");
    } else if (ra->compTy->isFixPi) {
      if (prog.prog.c->k == CK::Fix) {
        checkedFix.insert("");
        std::string u0 = fresh("u0");
        ctx.theta.push_back(u0);
        ctx.u = u0;
        if (ra->qual) ctx.q = *ra->qual;
        ok = check_fix(ctx, "", *prog.prog.c, *ra->compTy);
      } else {
        ok = record("", "root", false,
                    "Pi computation type on a non-fixpoint program");
      }
    } else {
      CompType ct = ra->compTy->inner;
      // the declared assertions may mention the binder quadruple only
      auto fvs = fv(mk::compt(ct));
      for (auto& hyp : prog.assumptions)
        for (auto& x : fv(hyp)) fvs.erase(x);
      ok = record("", "wf-root", fvs.empty(),
                  fvs.empty() ? "" : "stray variable: " + *fvs.begin());
      Win w{fresh("u1"), fresh("u2"), fresh("i")};
      ctx.theta = {w.u1, w.u2};
      ctx.gammaL[w.i] = mk::base();
      ctx.delta.push_back(mk::le(mk::var(w.u1), mk::var(w.u2)));
      ctx.u = w.u1;
      if (ra->qual) ctx.q = *ra->qual;
      ok &= check_comp(ctx, "", prog.prog.c, w, ct);
    }
  } else {
    TypeP t;
    if (ra && ra->exprTy)
      t = ra->exprTy;
    else if (ra && ra->compTy && !ra->compTy->isFixPi)
      t = mk::compt(ra->compTy->inner);
    if (!t) {
      ok = record("", "root", false, "missing root type annotation");
    } else {
      std::string u0 = fresh("u0");
      ctx.theta.push_back(u0);
      ctx.u = u0;
      if (ra && ra->qual) ctx.q = *ra->qual;
      ok = check_expr(ctx, "", prog.prog.e, t);
    }
  }
  TypeReport rep;
  rep.obligations = obligations;
  rep.ok = ok;
  for (auto& o : rep.obligations) rep.ok = rep.ok && o.ok;
  return rep;
}

TypeReport typecheck(const AnnotatedProgram& p, std::optional<ProverOptions> opt,
                     const Registry* reg) {
  ProverOptions o;
  if (opt) {
    o = *opt;
  } else {
    o.autoDepth = 8;
    o.autoBudget = 30000;
  }
  TypeChecker tc(p, o, reg);
  return tc.run();
}

// ---- sidecar files ----

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

AnnotatedProgram parse_annotated(const std::string& programText,
                                 const std::string& sidecarText,
                                 const Signature& sig) {
  AnnotatedProgram out;
  out.prog = parse_program(programText);
  out.sig = sig;
  std::vector<std::string> lines;
  {
    std::istringstream in(sidecarText);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  for (size_t li = 0; li < lines.size(); li++) {
    std::string line = trim(lines[li]);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "assume") {
      std::string rest;
      std::getline(ls, rest);
      out.assumptions.push_back(parse_formula(trim(rest)));
      continue;
    }
    if (kw != "at")
      throw std::runtime_error("sidecar line " + std::to_string(li + 1) +
                               ": expected 'at' or 'assume'");
    std::string path, what;
    ls >> path >> what;
    if (path == "/") path = "";
    Annotation& a = out.annotations[path];
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);
    if (what == "ctype") {
      a.compTy = parse_comp_type(rest);
    } else if (what == "type") {
      a.exprTy = parse_type(rest);
    } else if (what == "eq") {
      a.eqTo = parse_expr(rest);
    } else if (what == "silent") {
      a.silent = parse_formula(rest);
    } else if (what == "fix0") {
      a.fix0 = parse_formula(rest);
    } else if (what == "qual" || what == "confine") {
      std::istringstream qs(rest);
      Qualifier q;
      q.inv = true;
      qs >> q.ub >> q.ue >> q.i;
      std::string phi;
      std::getline(qs, phi);
      q.phi = parse_formula(trim(phi));
      if (what == "qual")
        a.qual = q;
      else
        a.confine = q;
    } else if (what == "script") {
      // "at <path> script <tag> <<<" ... ">>>"
      std::istringstream rs(rest);
      std::string tag, open;
      rs >> tag >> open;
      if (open != "<<<")
        throw std::runtime_error("sidecar line " + std::to_string(li + 1) +
                                 ": expected '<<<'");
      std::string body;
      size_t j = li + 1;
      for (; j < lines.size() && trim(lines[j]) != ">>>"; j++)
        body += lines[j] + "\n";
      if (j == lines.size())
        throw std::runtime_error("sidecar: unterminated script block");
      li = j;
      a.scripts[tag] = parse_proof(body);
    } else {
      throw std::runtime_error("sidecar line " + std::to_string(li + 1) +
                               ": unknown directive " + what);
    }
  }
  return out;
}

}  // namespace sysm
