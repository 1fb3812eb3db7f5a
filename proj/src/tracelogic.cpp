#include "sysm/tracelogic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace sysm {

std::optional<TimeVal> as_time(const ExprP& e) {
  if (e->k != Expr::K::Const) return std::nullopt;
  if (e->val.k == BaseValue::K::Nat) return TimeVal{false, e->val.n};
  if (e->val.k == BaseValue::K::NegInf) return TimeVal{true, 0};
  return std::nullopt;
}

const Configuration& Valuation::config_at(const TimeVal& u) const {
  if (u.neginf || u.n == 0 || trace->steps.empty()) return trace->initial;
  if (u.n > (BigNat)trace->steps.size()) return trace->steps.back().after;
  return trace->steps[u.n.convert_to<size_t>() - 1].after;
}

namespace {
void collect_consts(const ExprP& e, std::map<std::string, ExprP>& out) {
  if (!e) return;
  switch (e->k) {
    case Expr::K::Const: out.emplace(print(e, true), e); break;
    case Expr::K::Lam:
    case Expr::K::TyLam:
    case Expr::K::TyApp: collect_consts(e->a, out); break;
    case Expr::K::App:
    case Expr::K::Plus:
      collect_consts(e->a, out);
      collect_consts(e->b, out);
      break;
    case Expr::K::Comp: break;  // suspended code contributes no base data
    default: break;
  }
}
}  // namespace

Valuation build_valuation(const Trace& t, const Registry& r) {
  Valuation v;
  v.trace = &t;
  v.reg = &r;
  std::map<std::string, ExprP> b, u;
  auto addB = [&](const ExprP& e) { b.emplace(print(e, true), e); };
  auto addU = [&](const ExprP& e) {
    if (e) u.emplace(print(e, true), e);
  };
  addB(mk::cnat(0));
  addB(mk::cneginf());
  for (auto& th : t.initial.threads) addB(mk::ctid(th->id));
  if (auto* hs = dynamic_cast<const HeapState*>(t.initial.store.get()))
    for (auto& [loc, val] : hs->heap) {
      addB(mk::cloc(loc));
      addU(val);
    }
  for (auto& st : t.steps) {
    addB(mk::cnat(st.u));
    addB(mk::ctid(st.ev.thread));
    if (st.ev.k == StepEvent::K::ActOk || st.ev.k == StepEvent::K::ActStuck) {
      for (auto& a : st.ev.args) {
        collect_consts(a, b);
        addU(a);
      }
      if (st.ev.result) {
        collect_consts(st.ev.result, b);
        addU(st.ev.result);
      }
    }
    if (st.ev.returned) addU(st.ev.returned);
    if (st.ev.spawned) addU(mk::comp(st.ev.spawned));
    if (st.ev.k == StepEvent::K::ActOk)
      v.events[st.ev.action].push_back(
          {st.u, st.ev.thread, st.ev.args, st.ev.result});
    if (auto* hs = dynamic_cast<const HeapState*>(st.after.store.get()))
      for (auto& [loc, val] : hs->heap) {
        addB(mk::cloc(loc));
        addU(val);
      }
  }
  for (auto& [k2, e] : b) v.uB.push_back(e);
  for (auto& [k2, e] : u) v.uU.push_back(e);
  return v;
}

// ---- abbreviation expansion ----
namespace {
FormP expand(const FormP& f);

FormP push_at(const FormP& f, const ExprP& u) {
  using K = Formula::K;
  switch (f->k) {
    case K::Pred: {
      auto args = f->args;
      args.push_back(u);
      return mk::pred(f->name, std::move(args));
    }
    case K::Eq:
    case K::TimeCmp:
    case K::Top:
    case K::Bot: return expand(f);
    case K::Not: return mk::fnot(push_at(f->f1, u));
    case K::And: return mk::fand(push_at(f->f1, u), push_at(f->f2, u));
    case K::Or: return mk::forr(push_at(f->f1, u), push_at(f->f2, u));
    case K::Imp: return mk::fimp(push_at(f->f1, u), push_at(f->f2, u));
    case K::Forall:
    case K::Exists: {
      std::string x = f->name;
      FormP body = f->f1;
      if (fv(u).count(x)) {
        auto x2 = fresh(x);
        body = subst1(body, x, mk::var(x2));
        x = x2;
      }
      auto b2 = push_at(body, u);
      return f->k == K::Forall ? mk::forall(x, f->ty, b2)
                               : mk::exists(x, f->ty, b2);
    }
    case K::At: return push_at(f->f1, f->e1);  // inner time wins
    case K::OnInterval: return push_at(expand(f), u);
    case K::AppF: return mk::at(expand(f), u);
  }
  return f;
}

FormP expand(const FormP& f) {
  using K = Formula::K;
  switch (f->k) {
    case K::Pred:
    case K::Eq:
    case K::TimeCmp:
    case K::Top:
    case K::Bot: return f;
    case K::Not: return mk::fnot(expand(f->f1));
    case K::And: return mk::fand(expand(f->f1), expand(f->f2));
    case K::Or: return mk::forr(expand(f->f1), expand(f->f2));
    case K::Imp: return mk::fimp(expand(f->f1), expand(f->f2));
    case K::Forall: return mk::forall(f->name, f->ty, expand(f->f1));
    case K::Exists: return mk::exists(f->name, f->ty, expand(f->f1));
    case K::At: return push_at(f->f1, f->e1);
    case K::OnInterval: {
      auto uv = fresh("u");
      auto lo = f->loOpen ? mk::lt(f->e1, mk::var(uv))
                          : mk::le(f->e1, mk::var(uv));
      auto hi = f->hiOpen ? mk::lt(mk::var(uv), f->e2)
                          : mk::le(mk::var(uv), f->e2);
      return mk::forall(uv, mk::base(),
                        mk::fimp(mk::fand(lo, hi), push_at(f->f1, mk::var(uv))));
    }
    case K::AppF: return mk::appf(expand(f->f1), f->e1);
  }
  return f;
}
}  // namespace

FormP expand_abbrev(const FormP& f) { return expand(f); }

// ---- satisfaction ----
namespace {
struct Evaluator {
  const Valuation& v;
  SatOptions opt;

  void warn(const std::string& m) {
    if (opt.warnings) opt.warnings->push_back(m);
  }

  ExprP norm(const ExprP& e, bool& exhausted) {
    auto r = normalize(e, opt.fuel);
    exhausted |= r.exhausted;
    return r.e;
  }

  // value of event field j of predicate def d for event ev
  ExprP field(const PredicateDef& d, const Valuation::Ev& ev, size_t j) {
    if (j == 0) return mk::ctid(ev.thread);
    size_t nargs = ev.args.size();
    if (j <= nargs) return ev.args[j - 1];
    if (d.includeResult && j == nargs + 1) return ev.result;
    return mk::cnat(ev.u);  // time position
  }

  bool event_atom(const PredicateDef& d, const std::vector<ExprP>& args) {
    bool ex = false;
    std::vector<ExprP> na;
    for (auto& a : args) na.push_back(norm(a, ex));
    if (ex) return false;
    auto tu = as_time(na.back());
    if (!tu || tu->neginf) return false;
    auto it = v.events.find(d.fromAction);
    if (it == v.events.end()) return false;
    for (auto& ev : it->second) {
      if ((BigNat)ev.u != tu->n) continue;
      bool ok = true;
      for (size_t j = 0; j + 1 < na.size() && ok; j++)
        ok = print(na[j], true) == print(field(d, ev, j), true);
      if (ok) return true;
    }
    return false;
  }

  bool atom(const FormP& f) {
    auto it = v.reg->find(f->name);
    if (it == v.reg->end())
      throw std::runtime_error("UNKNOWN_PREDICATE: " + f->name);
    const auto& d = it->second;
    // structural predicates are time independent: a trailing time argument
    // introduced by @-expansion is ignored
    auto args = f->args;
    if (d.kind == PredicateDef::Kind::Structural &&
        (int)args.size() == d.arity + 1)
      args.pop_back();
    if ((int)args.size() != d.arity)
      throw std::runtime_error("predicate arity mismatch: " + f->name);
    switch (d.kind) {
      case PredicateDef::Kind::Event: return event_atom(d, args);
      case PredicateDef::Kind::State: {
        bool ex = false;
        std::vector<ExprP> na;
        for (size_t j = 0; j + 1 < args.size(); j++)
          na.push_back(norm(args[j], ex));
        auto tu = as_time(norm(args.back(), ex));
        if (ex || !tu) return false;
        return d.stateEval(v, *tu, na, opt.fuel);
      }
      case PredicateDef::Kind::Structural:
        return d.structEval(v, args, opt.fuel);
    }
    return false;
  }

  // collects top-level conjuncts
  void conjuncts(const FormP& f, std::vector<FormP>& out) {
    if (f->k == Formula::K::And) {
      conjuncts(f->f1, out);
      conjuncts(f->f2, out);
    } else {
      out.push_back(f);
    }
  }

  // witnesses for x drawn from event fields of a positive atom mentioning x
  std::optional<std::vector<ExprP>> trigger(const FormP& hay,
                                            const std::string& x) {
    std::vector<FormP> cs;
    conjuncts(hay, cs);
    for (auto& c : cs) {
      if (c->k != Formula::K::Pred) continue;
      auto it = v.reg->find(c->name);
      if (it == v.reg->end() || it->second.kind != PredicateDef::Kind::Event)
        continue;
      for (size_t j = 0; j < c->args.size(); j++) {
        if (c->args[j]->k != Expr::K::Var || c->args[j]->name != x) continue;
        std::map<std::string, ExprP> vals;
        auto evs = v.events.find(it->second.fromAction);
        if (evs != v.events.end())
          for (auto& ev : evs->second) {
            auto e = field(it->second, ev, j);
            if (e) vals.emplace(print(e, true), e);
          }
        std::vector<ExprP> out;
        for (auto& [k2, e] : vals) out.push_back(e);
        return out;
      }
    }
    return std::nullopt;
  }

  // Joint witnesses for a block of quantified variables, drawn per event of a
  // positive atom that mentions several of them. Only values occurring as
  // fields of some event can satisfy the atom, so instantiating the covered
  // variables from events (and keeping the rest quantified) is exact.
  struct BlockHit {
    std::vector<Sub> assigns;
    std::set<std::string> covered;
  };
  std::optional<BlockHit> block_trigger(const FormP& hay,
                                        const std::vector<std::string>& xs) {
    std::vector<FormP> cs;
    conjuncts(hay, cs);
    const Formula* best = nullptr;
    const PredicateDef* bestDef = nullptr;
    std::set<std::string> bestCover;
    for (auto& c : cs) {
      if (c->k != Formula::K::Pred) continue;
      auto it = v.reg->find(c->name);
      if (it == v.reg->end() || it->second.kind != PredicateDef::Kind::Event)
        continue;
      std::set<std::string> cover;
      for (auto& a : c->args)
        if (a->k == Expr::K::Var &&
            std::find(xs.begin(), xs.end(), a->name) != xs.end())
          cover.insert(a->name);
      if (cover.size() > bestCover.size()) {
        best = c.get();
        bestDef = &it->second;
        bestCover = std::move(cover);
      }
    }
    if (!best) return std::nullopt;
    BlockHit hit;
    hit.covered = bestCover;
    std::set<std::string> seen;
    auto evs = v.events.find(bestDef->fromAction);
    if (evs == v.events.end()) return hit;
    for (auto& ev : evs->second) {
      Sub s;
      bool ok = true;
      for (size_t j = 0; j < best->args.size() && ok; j++) {
        auto& a = best->args[j];
        if (a->k != Expr::K::Var || !bestCover.count(a->name)) continue;
        auto e = field(*bestDef, ev, j);
        if (!e) {
          ok = false;
        } else if (auto it2 = s.find(a->name); it2 != s.end()) {
          ok = print(it2->second, true) == print(e, true);
        } else {
          s[a->name] = e;
        }
      }
      if (!ok) continue;
      std::string key;
      for (auto& [n, e] : s) key += n + "=" + print(e, true) + ";";
      if (seen.insert(key).second) hit.assigns.push_back(std::move(s));
    }
    return hit;
  }

  const std::vector<ExprP>& universe(const TypeP& ty) {
    if (ty && ty->k == TypeExpr::K::Base) return v.uB;
    return v.uU;
  }

  bool ev(const FormP& f) {
    using K = Formula::K;
    switch (f->k) {
      case K::Top: return true;
      case K::Bot: return false;
      case K::Not: return !ev(f->f1);
      case K::And: return ev(f->f1) && ev(f->f2);
      case K::Or: return ev(f->f1) || ev(f->f2);
      case K::Imp: return !ev(f->f1) || ev(f->f2);
      case K::Pred: return atom(f);
      case K::Eq: {
        bool ex = false;
        auto a = norm(f->e1, ex), b2 = norm(f->e2, ex);
        return !ex && alpha_eq(a, b2);
      }
      case K::TimeCmp: {
        bool ex = false;
        auto a = as_time(norm(f->e1, ex)), b2 = as_time(norm(f->e2, ex));
        if (ex || !a || !b2) return false;
        switch (f->cmp) {
          case Formula::Cmp::Lt: return *a < *b2;
          case Formula::Cmp::Le: return *a < *b2 || *a == *b2;
          case Formula::Cmp::Eq: return *a == *b2;
        }
        return false;
      }
      case K::Forall: {
        if (opt.useTriggers) {
          // maximal block of nested foralls over a guarded implication
          std::vector<std::pair<std::string, TypeP>> binders;
          std::set<std::string> names;
          FormP cur = f;
          while (cur->k == K::Forall && !names.count(cur->name)) {
            names.insert(cur->name);
            binders.emplace_back(cur->name, cur->ty);
            cur = cur->f1;
          }
          if (cur->k == K::Imp) {
            std::vector<std::string> xs;
            for (auto& [n, ty] : binders) xs.push_back(n);
            if (auto hit = block_trigger(cur->f1, xs)) {
              for (auto& s : hit->assigns) {
                FormP g = subst(cur, s);
                for (auto it = binders.rbegin(); it != binders.rend(); ++it)
                  if (!hit->covered.count(it->first))
                    g = mk::forall(it->first, it->second, g);
                if (!ev(g)) return false;
              }
              return true;
            }
          }
        }
        const auto& dom = universe(f->ty);
        if (dom.empty()) warn("QUANTIFIER_UNIVERSE_EMPTY: forall " + f->name);
        for (auto& w : dom)
          if (!ev(subst1(f->f1, f->name, w))) return false;
        return true;
      }
      case K::Exists: {
        if (opt.useTriggers) {
          std::vector<std::pair<std::string, TypeP>> binders;
          std::set<std::string> names;
          FormP cur = f;
          while (cur->k == K::Exists && !names.count(cur->name)) {
            names.insert(cur->name);
            binders.emplace_back(cur->name, cur->ty);
            cur = cur->f1;
          }
          std::vector<std::string> xs;
          for (auto& [n, ty] : binders) xs.push_back(n);
          if (auto hit = block_trigger(cur, xs)) {
            for (auto& s : hit->assigns) {
              FormP g = subst(cur, s);
              for (auto it = binders.rbegin(); it != binders.rend(); ++it)
                if (!hit->covered.count(it->first))
                  g = mk::exists(it->first, it->second, g);
              if (ev(g)) return true;
            }
            return false;
          }
        }
        const auto& dom = universe(f->ty);
        if (dom.empty()) warn("QUANTIFIER_UNIVERSE_EMPTY: exists " + f->name);
        for (auto& w : dom)
          if (ev(subst1(f->f1, f->name, w))) return true;
        return false;
      }
      case K::At:
      case K::OnInterval:
        return ev(expand_abbrev(f));
      case K::AppF:
        throw std::runtime_error("appf atom cannot be evaluated on a trace");
    }
    return false;
  }
};
}  // namespace

bool sat(const Valuation& v, const FormP& closed, const SatOptions& opt) {
  Evaluator e{v, opt};
  return e.ev(expand_abbrev(closed));
}

// ---- the brute-force oracle: rebuilds everything per call, no indexes ----
namespace {
struct NaiveEval {
  const Trace& t;
  const Registry& r;
  long long fuel;
  std::vector<ExprP> uB, uU;
  Valuation shim;  // only for state/structural callbacks

  NaiveEval(const Trace& t2, const Registry& r2, long long f)
      : t(t2), r(r2), fuel(f) {
    std::map<std::string, ExprP> b, u;
    b.emplace("0", mk::cnat(0));
    b.emplace(print(mk::cneginf(), true), mk::cneginf());
    for (auto& th : t.initial.threads)
      b.emplace(print(mk::ctid(th->id), true), mk::ctid(th->id));
    auto scanStore = [&](const WStateP& s) {
      if (auto* hs = dynamic_cast<const HeapState*>(s.get()))
        for (auto& [loc, val] : hs->heap) {
          b.emplace(print(mk::cloc(loc), true), mk::cloc(loc));
          u.emplace(print(val, true), val);
        }
    };
    scanStore(t.initial.store);
    std::function<void(const ExprP&)> leaves = [&](const ExprP& e) {
      if (!e) return;
      if (e->k == Expr::K::Const) b.emplace(print(e, true), e);
      if (e->k != Expr::K::Comp) {
        if (e->a) leaves(e->a);
        if (e->b) leaves(e->b);
      }
    };
    for (auto& st : t.steps) {
      b.emplace(print(mk::cnat(st.u), true), mk::cnat(st.u));
      b.emplace(print(mk::ctid(st.ev.thread), true), mk::ctid(st.ev.thread));
      for (auto& a : st.ev.args) {
        leaves(a);
        u.emplace(print(a, true), a);
      }
      if (st.ev.result) {
        leaves(st.ev.result);
        u.emplace(print(st.ev.result, true), st.ev.result);
      }
      if (st.ev.returned) u.emplace(print(st.ev.returned, true), st.ev.returned);
      if (st.ev.spawned) {
        auto ce = mk::comp(st.ev.spawned);
        u.emplace(print(ce, true), ce);
      }
      scanStore(st.after.store);
    }
    for (auto& [k2, e] : b) uB.push_back(e);
    for (auto& [k2, e] : u) uU.push_back(e);
    shim.trace = &t;
    shim.reg = &r;
  }

  bool atom(const FormP& f) {
    auto it = r.find(f->name);
    if (it == r.end())
      throw std::runtime_error("UNKNOWN_PREDICATE: " + f->name);
    const auto& d = it->second;
    auto args = f->args;
    if (d.kind == PredicateDef::Kind::Structural &&
        (int)args.size() == d.arity + 1)
      args.pop_back();
    if ((int)args.size() != d.arity)
      throw std::runtime_error("predicate arity mismatch: " + f->name);
    std::vector<ExprP> na;
    bool ex = false;
    for (auto& a : args) {
      auto nr = normalize(a, fuel);
      ex |= nr.exhausted;
      na.push_back(nr.e);
    }
    if (d.kind == PredicateDef::Kind::Structural)
      return d.structEval(shim, args, fuel);
    if (ex) return false;
    auto tu = as_time(na.back());
    if (!tu) return false;
    if (d.kind == PredicateDef::Kind::State) {
      na.pop_back();
      return d.stateEval(shim, *tu, na, fuel);
    }
    if (tu->neginf) return false;
    for (auto& st : t.steps) {  // raw scan, no index
      if (st.ev.k != StepEvent::K::ActOk || st.ev.action != d.fromAction)
        continue;
      if ((BigNat)st.u != tu->n) continue;
      std::vector<ExprP> fields{mk::ctid(st.ev.thread)};
      for (auto& a : st.ev.args) fields.push_back(a);
      if (d.includeResult) fields.push_back(st.ev.result);
      bool ok = true;
      for (size_t j = 0; j + 1 < na.size() && ok; j++)
        ok = alpha_eq(na[j], fields[j]);
      if (ok) return true;
    }
    return false;
  }

  bool ev(const FormP& f) {
    using K = Formula::K;
    switch (f->k) {
      case K::Top: return true;
      case K::Bot: return false;
      case K::Not: return !ev(f->f1);
      case K::And: return ev(f->f1) && ev(f->f2);
      case K::Or: return ev(f->f1) || ev(f->f2);
      case K::Imp: return !ev(f->f1) || ev(f->f2);
      case K::Pred: return atom(f);
      case K::Eq: {
        auto a = normalize(f->e1, fuel), b2 = normalize(f->e2, fuel);
        return !a.exhausted && !b2.exhausted && alpha_eq(a.e, b2.e);
      }
      case K::TimeCmp: {
        auto a = normalize(f->e1, fuel), b2 = normalize(f->e2, fuel);
        if (a.exhausted || b2.exhausted) return false;
        auto ta = as_time(a.e), tb = as_time(b2.e);
        if (!ta || !tb) return false;
        if (f->cmp == Formula::Cmp::Lt) return *ta < *tb;
        if (f->cmp == Formula::Cmp::Le) return *ta < *tb || *ta == *tb;
        return *ta == *tb;
      }
      case K::Forall: {
        const auto& dom =
            f->ty && f->ty->k == TypeExpr::K::Base ? uB : uU;
        for (auto& w : dom)
          if (!ev(subst1(f->f1, f->name, w))) return false;
        return true;
      }
      case K::Exists: {
        const auto& dom =
            f->ty && f->ty->k == TypeExpr::K::Base ? uB : uU;
        for (auto& w : dom)
          if (ev(subst1(f->f1, f->name, w))) return true;
        return false;
      }
      case K::At:
      case K::OnInterval: return ev(expand_abbrev(f));
      case K::AppF:
        throw std::runtime_error("appf atom cannot be evaluated on a trace");
    }
    return false;
  }
};
}  // namespace

bool sat_naive(const Trace& t, const Registry& r, const FormP& closed,
               long long fuel) {
  NaiveEval n(t, r, fuel);
  return n.ev(expand_abbrev(closed));
}

bool sat_start(const Trace& t, const BigNat& threadId, const CompP& c,
               const TimeVal& u) {
  Valuation v;
  v.trace = &t;
  const Configuration& cfg = v.config_at(u);
  auto* th = cfg.thread(threadId);
  return th && !th->stuck && th->stack.empty() && th->fc && alpha_eq(th->fc, c);
}

// ---- composable-shape recognition ----
namespace {
bool mentions(const FormP& f, const std::string& x) { return fv(f).count(x); }

bool is_var(const ExprP& e, const std::string& x) {
  return e->k == Expr::K::Var && e->name == x;
}

// guard conjunct pair: ub < u (or <=) and u <= ue (or <)
bool interval_guard(const FormP& g, const std::string& ub,
                    const std::string& ue, std::string& timeVar) {
  if (g->k != Formula::K::And) return false;
  auto a = g->f1, b = g->f2;
  auto lower = [&](const FormP& f, std::string& u) {
    if (f->k != Formula::K::TimeCmp) return false;
    if (f->cmp == Formula::Cmp::Eq) return false;
    if (!is_var(f->e1, ub) || f->e2->k != Expr::K::Var) return false;
    u = f->e2->name;
    return true;
  };
  auto upper = [&](const FormP& f, const std::string& u) {
    if (f->k != Formula::K::TimeCmp) return false;
    if (f->cmp == Formula::Cmp::Eq) return false;
    return is_var(f->e1, u) && is_var(f->e2, ue);
  };
  std::string u;
  if (lower(a, u) && upper(b, u)) {
    timeVar = u;
    return true;
  }
  if (lower(b, u) && upper(a, u)) {
    timeVar = u;
    return true;
  }
  return false;
}
}  // namespace

bool check_trace_composable_shape(const FormP& phi, const std::string& ub,
                                  const std::string& ue,
                                  const std::string& i) {
  using K = Formula::K;
  (void)i;  // the thread variable may appear anywhere
  if (phi->k == K::Top) return true;
  if (phi->k == K::And)
    return check_trace_composable_shape(phi->f1, ub, ue, i) &&
           check_trace_composable_shape(phi->f2, ub, ue, i);
  if (phi->k == K::OnInterval)
    return is_var(phi->e1, ub) && is_var(phi->e2, ue) && phi->loOpen &&
           !phi->hiOpen && !mentions(phi->f1, ub) && !mentions(phi->f1, ue);
  // forall block ending in an interval-guarded implication
  std::set<std::string> bound;
  FormP g = phi;
  while (g->k == K::Forall) {
    bound.insert(g->name);
    g = g->f1;
  }
  if (bound.empty() || g->k != K::Imp) return false;
  std::string timeVar;
  if (!interval_guard(g->f1, ub, ue, timeVar)) return false;
  if (!bound.count(timeVar)) return false;
  if (timeVar == ub || timeVar == ue) return false;
  return !mentions(g->f2, ub) && !mentions(g->f2, ue);
}

// ---- standard registries ----
void add_core_predicates(Registry& r) {
  PredicateDef ev;
  ev.name = "eval";
  ev.arity = 2;
  ev.kind = PredicateDef::Kind::Structural;
  ev.structEval = [](const Valuation&, const std::vector<ExprP>& a,
                     long long fuel) {
    auto x = normalize(a[0], fuel), y = normalize(a[1], fuel);
    return !x.exhausted && !y.exhausted && alpha_eq(x.e, y.e);
  };
  r[ev.name] = ev;

  PredicateDef st;
  st.name = "start";
  st.arity = 3;  // start(i, comp(c), u)
  st.kind = PredicateDef::Kind::State;
  st.stateEval = [](const Valuation& v, const TimeVal& u,
                    const std::vector<ExprP>& a, long long) {
    if (a[0]->k != Expr::K::Const || a[0]->val.k != BaseValue::K::ThreadId)
      return false;
    if (a[1]->k != Expr::K::Comp) return false;
    return sat_start(*v.trace, a[0]->val.n, a[1]->comp, u);
  };
  r[st.name] = st;

  PredicateDef sk;
  sk.name = "stuck";
  sk.arity = 2;
  sk.kind = PredicateDef::Kind::State;
  sk.stateEval = [](const Valuation& v, const TimeVal& u,
                    const std::vector<ExprP>& a, long long) {
    if (a[0]->k != Expr::K::Const || a[0]->val.k != BaseValue::K::ThreadId)
      return false;
    auto* th = v.config_at(u).thread(a[0]->val.n);
    return th && th->stuck;
  };
  r[sk.name] = sk;
}

Registry heap_registry() {
  Registry r;
  add_core_predicates(r);
  PredicateDef wr;
  wr.name = "Write";
  wr.arity = 4;  // Write(i, l, v, u)
  wr.kind = PredicateDef::Kind::Event;
  wr.fromAction = "write";
  r[wr.name] = wr;
  PredicateDef rd;
  rd.name = "Read";
  rd.arity = 4;  // Read(i, l, v, u), v = value read
  rd.kind = PredicateDef::Kind::Event;
  rd.fromAction = "read";
  rd.includeResult = true;
  r[rd.name] = rd;
  PredicateDef mem;
  mem.name = "mem";
  mem.arity = 3;  // mem(l, v, u)
  mem.kind = PredicateDef::Kind::State;
  mem.stateEval = [](const Valuation& v, const TimeVal& u,
                     const std::vector<ExprP>& a, long long fuel) {
    if (a[0]->k != Expr::K::Const || a[0]->val.k != BaseValue::K::Loc)
      return false;
    auto* hs = dynamic_cast<const HeapState*>(v.config_at(u).store.get());
    if (!hs) return false;
    auto it = hs->heap.find(a[0]->val.n);
    if (it == hs->heap.end()) return false;
    auto stored = normalize(it->second, fuel);
    return !stored.exhausted && alpha_eq(stored.e, a[1]);
  };
  r[mem.name] = mem;
  return r;
}

}  // namespace sysm
