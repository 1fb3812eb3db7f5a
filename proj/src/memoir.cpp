#include "sysm/memoir.hpp"

#include <algorithm>

#include "sysm/parser.hpp"
#include <functional>
#include <random>
#include <sstream>

namespace sysm {

namespace {

std::optional<BigNat> as_nat(const ExprP& e) {
  if (e && e->k == Expr::K::Const && e->val.k == BaseValue::K::Nat)
    return e->val.n;
  return std::nullopt;
}

const TpmState* tpm(const WStateP& s) {
  return dynamic_cast<const TpmState*>(s.get());
}

SymP pcr_value(const TpmState& s, const BigNat& p) {
  auto it = s.pcrs.find(p);
  return it == s.pcrs.end() ? mk::snat(0) : it->second;
}

// every symbolic constant syntactically inside a term
void syms_in(const ExprP& e, std::vector<SymP>& out);
void syms_in(const CompP& c, std::vector<SymP>& out) {
  if (!c) return;
  for (auto& a : c->act.args) syms_in(a, out);
  syms_in(c->e, out);
  syms_in(c->c1, out);
  syms_in(c->c2, out);
}
void syms_in(const ExprP& e, std::vector<SymP>& out) {
  if (!e) return;
  if (e->k == Expr::K::Const && e->val.k == BaseValue::K::Sym)
    out.push_back(e->val.sym);
  syms_in(e->a, out);
  syms_in(e->b, out);
  syms_in(e->comp, out);
}

// visible subterms: pairing is transparent, Hash/Enc/Mac are opaque
bool sym_contains(const SymP& m, const SymP& s) {
  if (!m || !s) return false;
  if (sym_eq(m, s)) return true;
  if (m->k == SymTerm::K::Cat)
    return sym_contains(m->a, s) || sym_contains(m->b, s);
  return false;
}

bool hash_prefix_sym(const SymP& h1, const SymP& h2) {
  if (!h1 || !h2) return false;
  if (sym_eq(h1, h2)) return true;
  if (h2->k == SymTerm::K::Hash && h2->a && h2->a->k == SymTerm::K::Cat)
    return hash_prefix_sym(h1, h2->a->a);
  return false;
}

// ---- derivability (Dolev-Yao with atomic keys) ----
struct Knowledge {
  std::map<std::string, SymP> an;  // analyzed terms by print
  bool add(const SymP& s) {
    if (!s) return false;
    return an.emplace(print_sym(s), s).second;
  }
  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<SymP> cur;
      for (auto& [k, v] : an) cur.push_back(v);
      for (auto& s : cur) {
        if (s->k == SymTerm::K::Cat) {
          changed |= add(s->a);
          changed |= add(s->b);
        } else if (s->k == SymTerm::K::Enc && an.count(print_sym(s->a))) {
          changed |= add(s->b);
        }
      }
    }
  }
  // analyzed, public, or built from derivable parts; keys are never guessed
  bool derivable(const SymP& s) const {
    if (!s) return false;
    if (an.count(print_sym(s))) return true;
    switch (s->k) {
      case SymTerm::K::Atom:
      case SymTerm::K::Nat:
      case SymTerm::K::CodeHash: return true;
      case SymTerm::K::Hash: return derivable(s->a);
      case SymTerm::K::Cat:
      case SymTerm::K::Enc:
      case SymTerm::K::Mac: return derivable(s->a) && derivable(s->b);
      case SymTerm::K::Key: return false;
    }
    return false;
  }
};

// what thread j can derive from its program text and its actions through u
Knowledge knowledge_at(const Trace& t, const BigNat& j, const TimeVal& u) {
  Knowledge k;
  std::vector<SymP> seeds;
  for (auto& th : t.initial.threads)
    if (th->id == j) syms_in(th->fc, seeds);
  for (auto& st : t.steps) {
    if (!u.neginf && BigNat(st.u) > u.n) break;
    if (u.neginf) break;
    if (st.ev.k == StepEvent::K::Spawn && st.ev.thread == j)
      syms_in(st.ev.spawned, seeds);
    if (st.ev.k == StepEvent::K::ActOk && st.ev.thread == j) {
      for (auto& a : st.ev.args) syms_in(a, seeds);
      syms_in(st.ev.result, seeds);
    }
  }
  for (auto& s : seeds) k.add(s);
  k.close();
  return k;
}

const ExprP INIT_ATOM = mk::csym(mk::satom("INIT"));
const BigNat NLOC = 1;

}  // namespace

SymP to_sym(const ExprP& g) {
  if (g && g->k == Expr::K::Const) {
    switch (g->val.k) {
      case BaseValue::K::Sym: return g->val.sym;
      case BaseValue::K::Nat: return mk::snat(g->val.n);
      case BaseValue::K::True: return mk::satom("true");
      case BaseValue::K::False: return mk::satom("false");
      case BaseValue::K::ThreadId:
        return mk::satom("tid" + g->val.n.str());
      case BaseValue::K::Loc: return mk::satom("loc" + g->val.n.str());
      case BaseValue::K::NegInf: return mk::satom("neginf");
    }
  }
  return mk::scodehash(print(g, true));
}

SymP tpm_extend(const SymP& cur, const SymP& v) {
  return mk::shash(mk::scat(cur, v));
}

SymP ll_measurement(const ExprP& module) {
  return tpm_extend(mk::shash(mk::snat(-1)), to_sym(module));
}

SymP memoir_shash(const ExprP& module, const ExprP& service) {
  return tpm_extend(ll_measurement(module), to_sym(service));
}

// ---- world ----
WStateP TpmWorld::initial_state() const { return std::make_shared<TpmState>(); }

bool TpmWorld::schedulable(const WStateP& sp, const BigNat& tid) const {
  auto* s = tpm(sp);
  if (!s) return true;
  return s->session ? *s->session == tid : true;
}

NextResult TpmWorld::next(const WStateP& sp, const std::string& head,
                          const std::vector<ExprP>& args, const BigNat& thread,
                          const BigNat& freshTid) const {
  const auto* s = tpm(sp);
  NextResult stuck{sp, nullptr, {}};
  if (!s) return stuck;
  if (s->exited.count(thread)) return stuck;  // the session is over for good
  auto ns = [&] { return std::make_shared<TpmState>(*s); };

  if (head == "reset_pcr" && args.size() == 1) {
    auto p = as_nat(args[0]);
    if (!p || *p == 17) return stuck;  // PCR17 resets only via late launch
    auto n = ns();
    n->pcrs[*p] = mk::snat(0);
    return {n, mk::cnat(0), {}};
  }
  if (head == "extend_pcr" && args.size() == 2) {
    auto p = as_nat(args[0]);
    if (!p) return stuck;
    auto n = ns();
    n->pcrs[*p] = tpm_extend(pcr_value(*s, *p), to_sym(args[1]));
    return {n, mk::csym(n->pcrs[*p]), {}};
  }
  if (head == "verify_pcr" && args.size() == 2) {
    auto p = as_nat(args[0]);
    if (!p || !sym_eq(pcr_value(*s, *p), to_sym(args[1]))) return stuck;
    return {sp, mk::cnat(0), {}};
  }
  // permission to touch a guarded location: the bound PCR must match now
  auto perm_ok = [&](const BigNat& loc) {
    auto it = s->nvram.find(loc);
    if (it == s->nvram.end() || !it->second.hasPerm) return true;
    return sym_eq(pcr_value(*s, it->second.permPcr), it->second.permVal);
  };
  if (head == "set_nv_perms" && args.size() == 2) {
    auto loc = as_nat(args[0]);
    auto p = as_nat(args[1]);
    if (!loc || !p || !perm_ok(*loc)) return stuck;
    auto n = ns();
    auto& nv = n->nvram[*loc];
    if (!nv.val) nv.val = mk::snat(0);
    nv.hasPerm = true;
    nv.permPcr = *p;
    nv.permVal = pcr_value(*s, *p);
    return {n, mk::cnat(0), {}};
  }
  if (head == "nv_write" && args.size() == 2) {
    auto loc = as_nat(args[0]);
    if (!loc || !perm_ok(*loc)) return stuck;
    auto n = ns();
    auto& nv = n->nvram[*loc];
    nv.val = to_sym(args[1]);
    return {n, mk::csym(nv.val), {}};
  }
  if (head == "nv_read" && args.size() == 1) {
    auto loc = as_nat(args[0]);
    if (!loc || !s->nvram.count(*loc) || !perm_ok(*loc)) return stuck;
    return {sp, mk::csym(s->nvram.at(*loc).val), {}};
  }
  if (head == "ll_enter" && args.size() == 2) {
    if (s->session) return stuck;  // sessions do not nest
    auto n = ns();
    n->pcrs[17] = ll_measurement(args[0]);
    n->sessionChain = n->pcrs[17];
    n->session = freshTid;
    n->llThreads.insert(freshTid);
    auto z = fresh("z");
    CompP body = mk::lete(mk::app(args[0], args[1]), z, mk::ret(mk::var(z)));
    return {n, mk::ctid(freshTid), {body}};
  }
  if (head == "ll_exit" && args.empty()) {
    if (!s->session || *s->session != thread) return stuck;
    auto n = ns();
    n->session.reset();
    n->exited.insert(thread);
    return {n, mk::cnat(0), {}};
  }
  if (head == "session_chain" && args.empty()) {
    if (!s->session || *s->session != thread || !s->sessionChain) return stuck;
    return {sp, mk::csym(s->sessionChain), {}};
  }
  if (head == "encrypt" && args.size() == 2)
    return {sp, mk::csym(mk::senc(to_sym(args[0]), to_sym(args[1]))), {}};
  if (head == "decrypt" && args.size() == 2) {
    auto c = to_sym(args[1]);
    if (c->k != SymTerm::K::Enc || !sym_eq(c->a, to_sym(args[0])))
      return stuck;
    return {sp, mk::csym(c->b), {}};
  }
  if (head == "mac" && args.size() == 3)
    return {sp,
            mk::csym(mk::smac(to_sym(args[0]),
                              mk::scat(to_sym(args[1]), to_sym(args[2])))),
            {}};
  if (head == "verify_mac" && args.size() == 4) {
    auto want = mk::smac(to_sym(args[0]),
                         mk::scat(to_sym(args[1]), to_sym(args[2])));
    if (!sym_eq(to_sym(args[3]), want)) return stuck;
    return {sp, mk::cnat(0), {}};
  }
  if (head == "hash" && args.size() == 1)
    return {sp, mk::csym(mk::shash(to_sym(args[0]))), {}};
  if (head == "pair" && args.size() == 2)
    return {sp, mk::csym(mk::scat(to_sym(args[0]), to_sym(args[1]))), {}};
  if ((head == "fst" || head == "snd") && args.size() == 1) {
    auto c = to_sym(args[0]);
    if (c->k != SymTerm::K::Cat) return stuck;
    return {sp, mk::csym(head == "fst" ? c->a : c->b), {}};
  }
  if (head == "sym_eq" && args.size() == 2)
    return {sp, mk::cbool(sym_eq(to_sym(args[0]), to_sym(args[1]))), {}};
  if (head == "is_init" && args.size() == 1)
    return {sp, mk::cbool(sym_eq(to_sym(args[0]), mk::satom("INIT"))), {}};
  if (head == "gen_key" && args.empty()) {
    auto n = ns();
    auto k = mk::skey(n->nextKey);
    n->nextKey += 1;
    return {n, mk::csym(k), {}};
  }
  if (head == "send" && args.size() == 1) {
    auto n = ns();
    n->netlog.push_back(to_sym(args[0]));
    return {n, mk::cnat(0), {}};
  }
  if (head == "receive" && args.empty()) {
    if (s->netlog.empty()) return stuck;
    return {sp, mk::csym(s->netlog.back()), {}};
  }
  if (head == "abort") return stuck;
  // service markers record protocol phases; only the active session may flag
  if ((head == "service_init" && args.size() == 4) ||
      (head == "service_try" && args.size() == 4) ||
      (head == "service_invoke" && args.size() == 5)) {
    if (!s->session || *s->session != thread) return stuck;
    return {sp, mk::cnat(0), {}};
  }
  return stuck;
}

// ---- predicates ----
Registry memoir_registry() {
  Registry r;
  add_core_predicates(r);
  auto event = [&](const std::string& name, const std::string& action,
                   int actionArgs, bool withResult) {
    PredicateDef d;
    d.name = name;
    d.kind = PredicateDef::Kind::Event;
    d.fromAction = action;
    d.includeResult = withResult;
    d.arity = 1 + actionArgs + (withResult ? 1 : 0) + 1;
    r[name] = d;
  };
  event("ResetPCR", "reset_pcr", 1, false);
  event("ExtendPCR", "extend_pcr", 2, false);
  event("VerifyPCR", "verify_pcr", 2, false);
  event("SetNVPerms", "set_nv_perms", 2, false);
  event("NVWrite", "nv_write", 2, false);
  event("NVRead", "nv_read", 1, true);
  event("LLEnter", "ll_enter", 2, true);
  event("LLExit", "ll_exit", 0, false);
  event("Encrypt", "encrypt", 2, false);
  event("Decrypt", "decrypt", 2, false);
  event("MAC", "mac", 3, false);
  event("VerifyMAC", "verify_mac", 4, false);
  event("Hashed", "hash", 1, false);
  event("New", "gen_key", 0, true);
  event("Send", "send", 1, false);
  event("Receive", "receive", 0, true);
  event("service_init", "service_init", 4, false);
  event("service_try", "service_try", 4, false);
  event("service_invoke", "service_invoke", 5, false);

  PredicateDef vp;
  vp.name = "valpcr";
  vp.arity = 3;  // valpcr(p, h, u)
  vp.kind = PredicateDef::Kind::State;
  vp.stateEval = [](const Valuation& v, const TimeVal& u,
                    const std::vector<ExprP>& a, long long) {
    auto p = as_nat(a[0]);
    auto* s = tpm(v.config_at(u).store);
    return p && s && sym_eq(pcr_value(*s, *p), to_sym(a[1]));
  };
  r[vp.name] = vp;

  PredicateDef np;
  np.name = "NVPerms";
  np.arity = 4;  // NVPerms(loc, p, h, u)
  np.kind = PredicateDef::Kind::State;
  np.stateEval = [](const Valuation& v, const TimeVal& u,
                    const std::vector<ExprP>& a, long long) {
    auto loc = as_nat(a[0]);
    auto p = as_nat(a[1]);
    auto* s = tpm(v.config_at(u).store);
    if (!loc || !p || !s) return false;
    auto it = s->nvram.find(*loc);
    return it != s->nvram.end() && it->second.hasPerm &&
           it->second.permPcr == *p && sym_eq(it->second.permVal, to_sym(a[2]));
  };
  r[np.name] = np;

  PredicateDef nv;
  nv.name = "valNV";
  nv.arity = 3;  // valNV(loc, m, u)
  nv.kind = PredicateDef::Kind::State;
  nv.stateEval = [](const Valuation& v, const TimeVal& u,
                    const std::vector<ExprP>& a, long long) {
    auto loc = as_nat(a[0]);
    auto* s = tpm(v.config_at(u).store);
    if (!loc || !s) return false;
    auto it = s->nvram.find(*loc);
    return it != s->nvram.end() && it->second.val &&
           sym_eq(it->second.val, to_sym(a[1]));
  };
  r[nv.name] = nv;

  PredicateDef has;
  has.name = "Has";
  has.arity = 3;  // Has(j, s, u)
  has.kind = PredicateDef::Kind::State;
  auto cache =
      std::make_shared<std::map<std::string, std::shared_ptr<Knowledge>>>();
  has.stateEval = [cache](const Valuation& v, const TimeVal& u,
                          const std::vector<ExprP>& a, long long) {
    if (a[0]->k != Expr::K::Const || a[0]->val.k != BaseValue::K::ThreadId)
      return false;
    std::ostringstream key;
    key << v.trace << ":" << a[0]->val.n << ":"
        << (u.neginf ? "-inf" : u.n.str());
    auto it = cache->find(key.str());
    if (it == cache->end()) {
      auto k = std::make_shared<Knowledge>(
          knowledge_at(*v.trace, a[0]->val.n, u));
      it = cache->emplace(key.str(), k).first;
    }
    return it->second->derivable(to_sym(a[1]));
  };
  r[has.name] = has;

  PredicateDef hp;
  hp.name = "hash_prefix";
  hp.arity = 2;
  hp.kind = PredicateDef::Kind::Structural;
  hp.structEval = [](const Valuation&, const std::vector<ExprP>& a,
                     long long fuel) {
    auto x = normalize(a[0], fuel), y = normalize(a[1], fuel);
    return !x.exhausted && !y.exhausted &&
           hash_prefix_sym(to_sym(x.e), to_sym(y.e));
  };
  r[hp.name] = hp;

  PredicateDef ct;
  ct.name = "Contains";
  ct.arity = 2;
  ct.kind = PredicateDef::Kind::Structural;
  ct.structEval = [](const Valuation&, const std::vector<ExprP>& a,
                     long long fuel) {
    auto x = normalize(a[0], fuel), y = normalize(a[1], fuel);
    return !x.exhausted && !y.exhausted &&
           sym_contains(to_sym(x.e), to_sym(y.e));
  };
  r[ct.name] = ct;
  return r;
}

// ---- action kinds ----
std::string memoir_pcr_invariant(const std::string& u1, const std::string& u2,
                                 const std::string& i) {
  std::string win = "(" + u1 + " < u /\\ u <= " + u2 + ")";
  return "(forall u:b. forall p:unt. (" + win + " => ~ResetPCR(" + i +
         ", p, u))) /\\ (forall u:b. forall p:unt. forall v:unt. ((" + win +
         " /\\ ExtendPCR(" + i + ", p, v, u)) => p == 17))";
}

Signature memoir_signature() {
  Signature s;
  // During one action's window the only event the thread performs is that
  // action, so a non-extend kind satisfies the extend clause vacuously;
  // stating it in the policy's form keeps the sequencing glue by alpha
  // equality. extend_pcr itself gets the clause in terms of its target.
  auto clauses = [](const std::string& concl) {
    return parse_formula(
        "(forall u:b. forall p:unt. ((u1 < u /\\ u <= u2) =>"
        " ~ResetPCR(i, p, u)))"
        " /\\ (forall u:b. forall p:unt. forall v:unt."
        " (((u1 < u /\\ u <= u2) /\\ ExtendPCR(i, p, v, u)) => " +
        concl + "))");
  };
  auto kind = [&](const std::string& head, int nargs, TypeP retTy,
                  const std::string& eventFact, const std::string& concl) {
    ActionKind k;
    for (int n = 0; n < nargs; n++)
      k.binders.push_back({false, "a" + std::to_string(n + 1), mk::unt()});
    CompType ct;
    ct.u1 = "u1";
    ct.u2 = "u2";
    ct.i = "i";
    ct.x = "x";
    ct.retTy = retTy;
    FormP cl = clauses(concl);
    ct.inv = cl;
    ct.partial =
        eventFact.empty() ? cl : mk::fand(parse_formula(eventFact), cl);
    k.eta = ct;
    s[head] = k;
  };
  const std::string P = "p == 17";
  kind("extend_pcr", 2, mk::unt(), "ExtendPCR(i, a1, a2, u2)", "p == a1");
  kind("verify_pcr", 2, mk::unt(), "VerifyPCR(i, a1, a2, u2)", P);
  kind("set_nv_perms", 2, mk::unt(), "SetNVPerms(i, a1, a2, u2)", P);
  kind("nv_write", 2, mk::unt(), "NVWrite(i, a1, a2, u2)", P);
  kind("nv_read", 1, mk::unt(), "NVRead(i, a1, x, u2)", P);
  kind("ll_exit", 0, mk::unt(), "LLExit(i, u2)", P);
  kind("encrypt", 2, mk::unt(), "Encrypt(i, a1, a2, u2)", P);
  kind("decrypt", 2, mk::unt(), "Decrypt(i, a1, a2, u2)", P);
  kind("mac", 3, mk::unt(), "MAC(i, a1, a2, a3, u2)", P);
  kind("verify_mac", 4, mk::unt(), "VerifyMAC(i, a1, a2, a3, a4, u2)", P);
  kind("hash", 1, mk::unt(), "Hashed(i, a1, u2)", P);
  kind("gen_key", 0, mk::unt(), "New(i, x, u2)", P);
  kind("send", 1, mk::unt(), "Send(i, a1, u2)", P);
  kind("receive", 0, mk::unt(), "Receive(i, x, u2)", P);
  kind("service_init", 4, mk::unt(), "service_init(i, a1, a2, a3, a4, u2)", P);
  kind("service_try", 4, mk::unt(), "service_try(i, a1, a2, a3, a4, u2)", P);
  kind("service_invoke", 5, mk::unt(),
       "service_invoke(i, a1, a2, a3, a4, a5, u2)", P);
  kind("session_chain", 0, mk::unt(), "", P);
  kind("is_init", 1, mk::base(), "", P);
  kind("sym_eq", 2, mk::base(), "", P);
  kind("pair", 2, mk::unt(), "", P);
  kind("fst", 1, mk::unt(), "", P);
  kind("snd", 1, mk::unt(), "", P);
  kind("abort", 0, mk::unt(), "", P);
  return s;
}

namespace {
// typechecker path of the first letc head that is an if (the snapshot
// freshness dispatch); such heads need their own ctype annotation
std::string if_head_path(const CompP& c, const std::string& path) {
  if (!c) return "";
  using CK = Computation::K;
  switch (c->k) {
    case CK::LetC:
    case CK::SeqC: {
      if (c->c1 && c->c1->k == CK::If) return path + "/0";
      auto r = if_head_path(c->c1, path + "/0");
      return r.empty() ? if_head_path(c->c2, path + "/1") : r;
    }
    case CK::LetE:
    case CK::SeqE:
      return if_head_path(c->c2, path + "/1");
    case CK::If: {
      auto r = if_head_path(c->c1, path + "/1");
      return r.empty() ? if_head_path(c->c2, path + "/2") : r;
    }
    default:
      return "";
  }
}
}  // namespace

std::pair<std::string, std::string> memoir_runmodule_annotated() {
  std::string phiI = memoir_pcr_invariant("u1", "u2", "i");
  std::string phiJ = memoir_pcr_invariant("v1", "v2", "j");
  std::string phiK = memoir_pcr_invariant("w1", "w2", "k");
  std::string svcTy =
      "Pi a:unt. tcmp(v1.v2.j.(x:unt. " + phiJ + ", " + phiJ + "))";
  std::string sidecar = "at / type Pi sv:(" + svcTy +
                        "). tcmp(u1.u2.i.(x:unt. TT, " + phiI + "))\n";
  ExprP rm = memoir_runmodule(false);
  std::string pick = if_head_path(rm->comp, "/0/0");
  if (!pick.empty())
    sidecar +=
        "at " + pick + " ctype w1.w2.k.(x:unt. " + phiK + ", " + phiK + ")\n";
  return {print(rm), sidecar};
}

// ---- programs ----
ExprP memoir_service() {
  using namespace mk;
  return lam(
      "a", comp(letc(
               act("is_init", {var("a")}), "bi",
               cif(var("bi"), ret(csym(satom("st0"))),
                   letc(act("fst", {var("a")}), "st",
                        letc(act("snd", {var("a")}), "rq",
                             letc(act("pair", {var("st"), var("rq")}), "ns",
                                  ret(var("ns")))))))));
}

ExprP memoir_runmodule(bool weakened) {
  using namespace mk;
  auto A = [](const std::string& h, std::vector<ExprP> as = {}) {
    return act(h, std::move(as));
  };
  ExprP sv = var("sv");

  CompP initTail =
      seqc(A("service_init", {var("sk0"), sv, var("sst0"), cnat(NLOC)}),
           letc(A("encrypt", {var("sk0"), var("sst0")}), "enc0",
                letc(A("mac", {var("sk0"), var("enc0"), cnat(0)}), "au0",
                     letc(A("pair", {cnat(0), var("au0")}), "t1",
                          letc(A("pair", {var("enc0"), var("t1")}), "snap0",
                               seqc(A("send", {var("snap0")}),
                                    seqc(A("ll_exit"),
                                         ret(var("snap0")))))))));
  CompP initBr = seqc(
      A("extend_pcr", {cnat(17), sv}),
      letc(A("session_chain"), "mch",
           letc(A("pair", {var("mch"), sv}), "pr",
                letc(A("hash", {var("pr")}), "sh",
                     seqc(A("verify_pcr", {cnat(17), var("sh")}),
                          letc(A("gen_key"), "sk0",
                               seqc(A("set_nv_perms", {cnat(NLOC), cnat(17)}),
                                    letc(A("pair", {var("sk0"), cnat(0)}),
                                         "nv0",
                                         seqc(A("nv_write",
                                                {cnat(NLOC), var("nv0")}),
                                              seqc(A("extend_pcr",
                                                     {cnat(17), cnat(0)}),
                                                   lete(app(sv, INIT_ATOM),
                                                        "sst0",
                                                        initTail)))))))))));

  CompP dec = A("decrypt", {var("sk"), var("enc")});
  CompP pick = weakened
                   ? dec
                   : cif(var("e1"), dec, cif(var("e2"), dec, A("abort")));
  CompP execTail = letc(
      A("pair", {var("sst"), var("req")}), "arg",
      lete(app(sv, var("arg")), "nst",
           letc(A("encrypt", {var("sk"), var("nst")}), "enc2",
                letc(A("mac", {var("sk"), var("enc2"), var("ns")}), "au2",
                     letc(A("pair", {var("ns"), var("au2")}), "t2",
                          letc(A("pair", {var("enc2"), var("t2")}), "snap2",
                               seqc(A("service_invoke",
                                      {var("sk"), sv, var("sst"), var("nst"),
                                       cnat(NLOC)}),
                                    seqc(A("send", {var("snap2")}),
                                         seqc(A("ll_exit"),
                                              ret(var("snap2")))))))))));
  CompP execMid = letc(
      A("sym_eq", {var("tag"), var("hs")}), "e1",
      letc(A("sym_eq", {var("tg2"), var("hs")}), "e2",
           letc(pick, "sst",
                letc(A("pair", {var("hs"), var("req")}), "pr2",
                     letc(A("hash", {var("pr2")}), "ns",
                          letc(A("pair", {var("sk"), var("ns")}), "nv2",
                               seqc(A("nv_write", {cnat(NLOC), var("nv2")}),
                                    seqc(A("extend_pcr", {cnat(17), cnat(0)}),
                                         seqc(A("service_try",
                                                {var("sk"), sv, var("sst"),
                                                 cnat(NLOC)}),
                                              execTail)))))))));
  CompP execBr = letc(
      A("fst", {var("call")}), "snap",
      letc(A("snd", {var("call")}), "req",
           seqc(A("extend_pcr", {cnat(17), sv}),
                letc(A("nv_read", {cnat(NLOC)}), "nv",
                     letc(A("fst", {var("nv")}), "sk",
                          letc(A("snd", {var("nv")}), "hs",
                               letc(A("fst", {var("snap")}), "enc",
                                    letc(A("snd", {var("snap")}), "rest",
                                         letc(A("fst", {var("rest")}), "tag",
                                              letc(A("snd", {var("rest")}),
                                                   "au",
                                                   seqc(A("verify_mac",
                                                          {var("sk"),
                                                           var("enc"),
                                                           var("tag"),
                                                           var("au")}),
                                                        letc(A("pair",
                                                               {var("tag"),
                                                                var("req")}),
                                                             "pr1",
                                                             letc(A("hash",
                                                                    {var(
                                                                        "pr1")}),
                                                                  "tg2",
                                                                  execMid)))))))))))));

  CompP body = letc(A("receive"), "call",
                    letc(A("is_init", {var("call")}), "isi",
                         cif(var("isi"), initBr, execBr)));
  return lam("sv", comp(body));
}

CompP memoir_driver(const ExprP& module, const ExprP& service,
                    const std::vector<ExprP>& requests, int replayIndex,
                    ExprP altServiceLast, ExprP altModuleLast) {
  using namespace mk;
  size_t total = 1 + requests.size() + (replayIndex >= 0 ? 1 : 0);
  std::function<CompP(size_t, const std::string&)> go =
      [&](size_t idx, const std::string& prev) -> CompP {
    if (idx == total)
      return ret(prev.empty() ? cnat(0) : var(prev));
    bool last = idx + 1 == total;
    ExprP mod = (last && altModuleLast) ? altModuleLast : module;
    ExprP svc = (last && altServiceLast) ? altServiceLast : service;
    std::string snapName = "s" + std::to_string(idx);
    CompP recv = letc(act("receive"), snapName, go(idx + 1, snapName));
    CompP enter = letc(act("ll_enter", {mod, svc}), fresh("t"), recv);
    if (idx == 0) return seqc(act("send", {INIT_ATOM}), enter);
    bool isReplay = replayIndex >= 0 && idx == total - 1;
    std::string from =
        isReplay ? "s" + std::to_string(replayIndex) : prev;
    ExprP req = isReplay ? csym(satom("replayreq"))
                         : requests[idx - 1];
    std::string callName = fresh("c");
    return letc(act("pair", {var(from), req}), callName,
                seqc(act("send", {var(callName)}), enter));
  };
  return go(0, "");
}

CompP memoir_chaos_adversary(uint64_t seed, int len) {
  using namespace mk;
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % (uint64_t)n); };
  std::vector<std::string> vars;
  auto arg = [&]() -> ExprP {
    switch (pick(5)) {
      case 0: return csym(satom(pick(2) ? "x1" : "guess"));
      case 1: return cnat(pick(5));
      case 2:
      case 3:
        if (!vars.empty()) return var(vars[(size_t)pick((int)vars.size())]);
        [[fallthrough]];
      default: return csym(satom("noise"));
    }
  };
  ExprP tiny = lam("s", comp(seqc(act("extend_pcr", {cnat(17), var("s")}),
                                  seqc(act("ll_exit"), ret(cnat(0))))));
  std::function<CompP(int)> go = [&](int k) -> CompP {
    if (k <= 0) return ret(cnat(0));
    CompP a;
    bool binds = false;
    switch (pick(14)) {
      case 0: a = act("send", {arg()}); break;
      case 1: a = act("receive"); binds = true; break;
      case 2: a = act("extend_pcr", {cnat(pick(2) ? 17 : 16), arg()}); break;
      case 3: a = act("reset_pcr", {cnat(16)}); break;
      case 4: a = act("nv_read", {cnat(pick(2) + 1)}); binds = true; break;
      case 5: a = act("nv_write", {cnat(2), arg()}); break;
      case 6: a = act("set_nv_perms", {cnat(2), cnat(16)}); break;
      case 7: a = act("gen_key"); binds = true; break;
      case 8: a = act("encrypt", {arg(), arg()}); binds = true; break;
      case 9: a = act("hash", {arg()}); binds = true; break;
      case 10: a = act("pair", {arg(), arg()}); binds = true; break;
      case 11: a = act(pick(2) ? "fst" : "snd", {arg()}); binds = true; break;
      case 12: a = act("sym_eq", {arg(), arg()}); binds = true; break;
      default: a = act("ll_enter", {tiny, arg()}); binds = true; break;
    }
    if (binds) {
      auto x = fresh("m");
      vars.push_back(x);
      return letc(a, x, go(k - 1));
    }
    return seqc(a, go(k - 1));
  };
  return go(len);
}

// ---- axioms ----
namespace {

struct Ev {
  long long u;
  BigNat thread;
  std::string head;
  std::vector<ExprP> args;
  ExprP result;
};

const Configuration& cfg_at(const Trace& t, long long u) {
  return u == 0 ? t.initial : t.steps[(size_t)u - 1].after;
}
const TpmState* state_at(const Trace& t, long long u) {
  return tpm(cfg_at(t, u).store);
}

// value sent or stored outside the protected location reveals a term
bool private_upto(const Trace& t, const std::vector<Ev>& evs, const SymP& s,
                  long long u) {
  for (auto& e : evs) {
    if (e.u > u) break;
    if (e.head == "send" && sym_contains(to_sym(e.args[0]), s)) return false;
    if (e.head == "nv_write" && as_nat(e.args[0]) &&
        *as_nat(e.args[0]) != NLOC && sym_contains(to_sym(e.args[1]), s))
      return false;
  }
  (void)t;
  return true;
}

}  // namespace

std::vector<AxiomVerdict> check_axioms(const Trace& t) {
  std::vector<AxiomVerdict> out;
  const long long N = (long long)t.steps.size();
  auto fail = [&](std::vector<AxiomVerdict>& v, const std::string& name,
                  const std::string& why) {
    for (auto& a : v)
      if (a.name == name) {
        if (a.ok) {
          a.ok = false;
          a.witness = why;
        }
        return;
      }
  };
  const char* names[] = {"PCRInit",  "LLHonest", "LLAct1", "LLAct2",
                         "LLExit",   "SetPerms", "GetPerms", "NVPerms",
                         "New3",     "PrivateInit", "POS",  "Shared",
                         "Init",     "MAC*",     "NVRAMRead*"};
  for (auto* n : names) out.push_back({n, true, ""});

  auto* s0 = state_at(t, 0);
  if (!s0) {
    for (auto& a : out) {
      a.ok = false;
      a.witness = "trace was not produced by the tpm world";
    }
    return out;
  }
  for (auto& [p, h] : s0->pcrs)
    if (!sym_eq(h, mk::snat(0)))
      fail(out, "PCRInit", "pcr " + p.str() + " not zero initially");

  std::vector<Ev> evs;
  for (auto& st : t.steps)
    if (st.ev.k == StepEvent::K::ActOk)
      evs.push_back({st.u, st.ev.thread, st.ev.action, st.ev.args,
                     st.ev.result});

  for (auto& st : t.steps) {
    if (st.ev.k != StepEvent::K::ActOk) continue;
    auto* before = state_at(t, st.u - 1);
    auto* after = state_at(t, st.u);
    auto at = " at " + std::to_string(st.u);

    if (before->session && *before->session != st.ev.thread)
      fail(out, "LLAct1", "non-session thread acted" + at);
    if (before->exited.count(st.ev.thread))
      fail(out, "LLAct2", "exited session thread acted" + at);

    if (st.ev.action == "ll_enter") {
      // the spawn step right after must carry the honest wrapper
      bool ok = false;
      if (st.ev.result && st.ev.result->k == Expr::K::Const) {
        BigNat j = st.ev.result->val.n;
        for (auto& sp : t.steps)
          if (sp.u > st.u && sp.ev.k == StepEvent::K::Spawn &&
              sp.ev.thread == j) {
            auto z = fresh("z");
            ok = alpha_eq(sp.ev.spawned,
                          mk::lete(mk::app(st.ev.args[0], st.ev.args[1]), z,
                                   mk::ret(mk::var(z))));
            break;
          }
      }
      if (!ok) fail(out, "LLHonest", "spawned body is not app(f, x)" + at);
    }
    if (st.ev.action == "set_nv_perms") {
      auto loc = as_nat(st.ev.args[0]);
      auto p = as_nat(st.ev.args[1]);
      auto it = after->nvram.find(*loc);
      if (it == after->nvram.end() || !it->second.hasPerm ||
          it->second.permPcr != *p ||
          !sym_eq(it->second.permVal, pcr_value(*before, *p)))
        fail(out, "SetPerms", "permission not bound to current pcr" + at);
    }
    if (st.ev.action == "nv_read" || st.ev.action == "nv_write" ||
        st.ev.action == "set_nv_perms") {
      auto loc = as_nat(st.ev.args[0]);
      auto it = before->nvram.find(*loc);
      if (it != before->nvram.end() && it->second.hasPerm &&
          !sym_eq(pcr_value(*before, it->second.permPcr), it->second.permVal))
        fail(out, "GetPerms", "guarded access with mismatched pcr" + at);
    }
    if (st.ev.action == "service_init" || st.ev.action == "service_try" ||
        st.ev.action == "service_invoke") {
      if (!before->session || *before->session != st.ev.thread)
        fail(out, "Init", "service marker outside a session" + at);
    }
    if (st.ev.action == "verify_mac") {
      bool prior = false;
      for (auto& e : evs) {
        if (e.u >= st.u) break;
        if (e.head == "mac" && alpha_eq(e.args[0], st.ev.args[0]) &&
            alpha_eq(e.args[1], st.ev.args[1]) &&
            alpha_eq(e.args[2], st.ev.args[2]))
          prior = true;
      }
      if (!prior) {
        auto k = knowledge_at(t, st.ev.thread, TimeVal{false, st.u});
        if (!k.derivable(to_sym(st.ev.args[0])))
          fail(out, "MAC*", "mac verified with no prior mac and no key" + at);
      }
    }
    if (st.ev.action == "nv_read") {
      auto loc = as_nat(st.ev.args[0]);
      SymP expect = mk::snat(0);
      for (auto& e : evs) {
        if (e.u >= st.u) break;
        if (e.head == "nv_write" && as_nat(e.args[0]) &&
            *as_nat(e.args[0]) == *loc)
          expect = to_sym(e.args[1]);
      }
      if (!sym_eq(to_sym(st.ev.result), expect))
        fail(out, "NVRAMRead*", "read does not match the last write" + at);
    }
  }

  // permissions change only through set_nv_perms on that location
  for (long long u = 1; u <= N; ++u) {
    auto* a = state_at(t, u - 1);
    auto* b = state_at(t, u);
    std::set<BigNat> locs;
    for (auto& [l, x] : a->nvram) locs.insert(l);
    for (auto& [l, x] : b->nvram) locs.insert(l);
    for (auto& l : locs) {
      auto pa = a->nvram.find(l), pb = b->nvram.find(l);
      bool ha = pa != a->nvram.end() && pa->second.hasPerm;
      bool hb = pb != b->nvram.end() && pb->second.hasPerm;
      bool same = ha == hb &&
                  (!ha || (pa->second.permPcr == pb->second.permPcr &&
                           sym_eq(pa->second.permVal, pb->second.permVal)));
      if (same) continue;
      auto& st = t.steps[(size_t)u - 1];
      if (st.ev.k != StepEvent::K::ActOk || st.ev.action != "set_nv_perms" ||
          !as_nat(st.ev.args[0]) || *as_nat(st.ev.args[0]) != l)
        fail(out, "NVPerms",
             "permission changed without set_nv_perms at " + std::to_string(u));
    }
  }

  // chain-extension of a measured session value traces back to that session
  std::vector<std::pair<SymP, long long>> measured;  // (chain, enter time)
  for (auto& e : evs)
    if (e.head == "ll_enter")
      measured.emplace_back(ll_measurement(e.args[0]), e.u);
  for (long long u = 0; u <= N; ++u) {
    auto* s = state_at(t, u);
    auto cur = pcr_value(*s, 17);
    for (auto& [chain, ue] : measured) {
      if (u < ue || !hash_prefix_sym(chain, cur)) continue;
      bool active = s->session && s->sessionChain &&
                    sym_eq(s->sessionChain, chain);
      if (active) continue;
      bool explained = false;
      for (long long w = ue; w <= u && !explained; ++w) {
        auto& st = t.steps[(size_t)w - 1];
        if (w >= 1 && st.ev.k == StepEvent::K::ActOk &&
            st.ev.action == "ll_exit") {
          auto* bw = state_at(t, w - 1);
          if (bw->sessionChain && sym_eq(bw->sessionChain, chain) &&
              hash_prefix_sym(pcr_value(*state_at(t, w), 17), cur))
            explained = true;
        }
      }
      if (!explained)
        fail(out, "LLExit",
             "measured chain persists with no exit at " + std::to_string(u));
    }
  }

  // key freshness and secrecy discipline
  std::vector<Ev> keys;
  for (auto& e : evs)
    if (e.head == "gen_key") keys.push_back(e);
  for (size_t i = 0; i < keys.size(); ++i) {
    auto ki = to_sym(keys[i].result);
    for (size_t j = i + 1; j < keys.size(); ++j)
      if (sym_eq(ki, to_sym(keys[j].result)))
        fail(out, "New3", "duplicate generated key");
    for (auto& e : evs) {
      if (e.u >= keys[i].u) break;
      for (auto& a : e.args) {
        std::vector<SymP> ss;
        syms_in(a, ss);
        for (auto& s : ss)
          if (sym_contains(s, ki))
            fail(out, "New3", "generated key appeared before creation");
      }
    }
    if (!private_upto(t, evs, ki, keys[i].u))
      fail(out, "PrivateInit", "key public at creation");

    // last time the key is still private (monotone once lost)
    long long lastPrivate = -1;
    for (long long u = 0; u <= N; ++u)
      if (private_upto(t, evs, ki, u)) lastPrivate = u;
    if (lastPrivate < N) {
      long long u3 = lastPrivate + 1;
      auto& st = t.steps[(size_t)u3 - 1];
      bool culprit =
          st.ev.k == StepEvent::K::ActOk &&
          ((st.ev.action == "send" &&
            sym_contains(to_sym(st.ev.args[0]), ki)) ||
           (st.ev.action == "nv_write" && as_nat(st.ev.args[0]) &&
            *as_nat(st.ev.args[0]) != NLOC &&
            sym_contains(to_sym(st.ev.args[1]), ki)));
      if (!culprit)
        fail(out, "Shared",
             "privacy lost without a revealing step at " + std::to_string(u3));
    }
    // while private, possession needs creation or a protected-location read
    std::set<std::string> seenThreads;
    for (auto& e : evs) seenThreads.insert(e.thread.str());
    for (auto& th : t.initial.threads) seenThreads.insert(th->id.str());
    for (auto& ts : seenThreads) {
      BigNat j(ts);
      if (j == keys[i].thread) continue;
      long long firstHas = -1;
      for (auto& e : evs) {
        if (e.thread != j || e.u > lastPrivate) continue;
        auto k = knowledge_at(t, j, TimeVal{false, e.u});
        if (k.derivable(ki)) {
          firstHas = e.u;
          break;
        }
      }
      if (firstHas < 0) continue;
      bool viaRead = false;
      for (auto& e : evs)
        if (e.thread == j && e.u <= firstHas && e.head == "nv_read" &&
            as_nat(e.args[0]) && *as_nat(e.args[0]) == NLOC &&
            sym_contains(to_sym(e.result), ki))
          viaRead = true;
      if (!viaRead)
        fail(out, "POS", "thread " + ts + " holds a private key it neither " +
                             "generated nor read");
    }
  }
  return out;
}

// ---- properties ----
std::vector<std::pair<std::string, FormP>> memoir_properties(
    const ExprP& module, const ExprP& service) {
  using namespace mk;
  auto B = base();
  auto U = unt();
  ExprP SH = csym(memoir_shash(module, service));
  ExprP NL = cnat(NLOC);
  auto V = [](const char* n) { return var(n); };

  // pcr-protection: whenever PCR17 holds the measured service chain, a
  // session of this module is open
  FormP noExit = forall(
      "u3", B,
      fimp(pred("LLExit", {V("j"), V("u3")}),
           fnot(fand(le(V("u1"), V("u3")), lt(V("u3"), V("u"))))));
  FormP enter = exists(
      "ic", B,
      exists("j", B,
             exists("sx", U,
                    exists("u1", B,
                           fand(pred("LLEnter", {V("ic"), module, V("sx"),
                                                 V("j"), V("u1")}),
                                fand(le(V("u1"), V("u")), noExit))))));
  FormP pcrProt =
      forall("u", B, fimp(pred("valpcr", {cnat(17), SH, V("u")}), enter));

  // nvram-protection: once the module binds the location inside a session,
  // the permission never changes
  FormP nvProt = forall(
      "ui", B,
      forall("i", B,
             fimp(fand(pred("SetNVPerms", {V("i"), NL, cnat(17), V("ui")}),
                       pred("valpcr", {cnat(17), SH, V("ui")})),
                  forall("u", B,
                         fimp(lt(V("ui"), V("u")),
                              pred("NVPerms", {NL, cnat(17), SH, V("u")}))))));

  FormP initG = pred("service_init",
                     {V("ii"), V("sk"), service, V("s0"), NL, V("ui")});
  auto quantInit = [&](FormP body) {
    return forall("ui", B,
                  forall("ii", B,
                         forall("sk", U,
                                forall("s0", U, fimp(initG, body)))));
  };

  // key-secrecy: only the creator session and protected-location readers
  // ever hold the service key
  FormP secretBody = forall(
      "j", B,
      forall("u", B,
             fimp(fand(lt(V("ui"), V("u")),
                       pred("Has", {V("j"), V("sk"), V("u")})),
                  forr(eq(V("j"), V("ii")),
                       exists("m", U,
                              exists("u2", B,
                                     fand(pred("NVRead", {V("j"), NL, V("m"),
                                                          V("u2")}),
                                          fand(le(V("u2"), V("u")),
                                               pred("Contains",
                                                    {V("m"), V("sk")})))))))));
  FormP secrecy = quantInit(secretBody);

  // summary-state: the authenticated summary determines the snapshot body
  FormP ssBody = forall(
      "j", B,
      forall(
          "u", B,
          forall("e1", U,
                 forall("tg", U,
                        fimp(pred("MAC", {V("j"), V("sk"), V("e1"), V("tg"),
                                          V("u")}),
                             forall("j2", B,
                                    forall("u2", B,
                                           forall("e2", U,
                                                  fimp(pred("MAC",
                                                            {V("j2"), V("sk"),
                                                             V("e2"), V("tg"),
                                                             V("u2")}),
                                                       eq(V("e1"),
                                                          V("e2")))))))))));
  FormP summaryState = quantInit(ssBody);

  // state-continuity: every tried state is the latest committed one
  FormP someOrigin = forr(
      exists("j", B,
             exists("sp", U,
                    pred("service_invoke", {V("j"), V("sk"), service, V("sp"),
                                            V("st"), NL, V("u2")}))),
      forr(exists("j", B, pred("service_try", {V("j"), V("sk"), service,
                                               V("st"), NL, V("u2")})),
           exists("j", B, pred("service_init", {V("j"), V("sk"), service,
                                                V("st"), NL, V("u2")}))));
  FormP noLaterInvoke = forall(
      "u3", B,
      forall("j2", B,
             forall("x1", U,
                    forall("x2", U,
                           fimp(pred("service_invoke",
                                     {V("j2"), V("sk"), service, V("x1"),
                                      V("x2"), NL, V("u3")}),
                                fnot(fand(lt(V("u2"), V("u3")),
                                          le(V("u3"), V("u")))))))));
  FormP contBody = forall(
      "u", B,
      forall("i2", B,
             forall("st", U,
                    fimp(fand(lt(V("ui"), V("u")),
                              pred("service_try", {V("i2"), V("sk"), service,
                                                   V("st"), NL, V("u")})),
                         exists("u2", B,
                                fand(lt(V("u2"), V("u")),
                                     fand(someOrigin, noLaterInvoke)))))));
  FormP continuity = quantInit(contBody);

  return {{"pcr-protection", pcrProt},
          {"nvram-protection", nvProt},
          {"key-secrecy", secrecy},
          {"summary-state", summaryState},
          {"state-continuity", continuity}};
}

// ---- scenarios ----
ScenarioResult run_memoir_scenario(const MemoirScenario& sc) {
  using A = MemoirScenario::Attack;
  ScenarioResult res;
  res.name = sc.name;

  ExprP module = memoir_runmodule(sc.weakened);
  ExprP service = memoir_service();
  std::vector<ExprP> reqs;
  for (int i = 1; i <= sc.invocations; ++i)
    reqs.push_back(mk::csym(mk::satom("r" + std::to_string(i))));

  int replay = sc.attack == A::Rollback ? 0 : -1;
  ExprP altSvc, altMod;
  if (sc.attack == A::MaliciousService)
    altSvc = mk::lam("a", mk::comp(mk::ret(mk::var("a"))));
  if (sc.attack == A::ForeignModule)
    altMod = mk::lam(
        "s", mk::comp(mk::letc(mk::act("nv_read", {mk::cnat(NLOC)}), "z",
                               mk::ret(mk::var("z")))));

  std::vector<std::pair<BigNat, CompP>> threads{
      {0, memoir_driver(module, service, reqs, replay, altSvc, altMod)}};
  if (sc.attack == A::NvramProbe)
    threads.emplace_back(
        1, mk::letc(mk::act("nv_read", {mk::cnat(NLOC)}), "z",
                    mk::ret(mk::var("z"))));
  if (sc.attack == A::CryptoForge)
    threads.emplace_back(
        1, mk::letc(mk::act("receive"), "m",
                    mk::letc(mk::act("fst", {mk::var("m")}), "en",
                             mk::letc(mk::act("decrypt",
                                              {mk::csym(mk::satom("guess")),
                                               mk::var("en")}),
                                      "d", mk::ret(mk::var("d"))))));
  if (sc.withAdversary)
    threads.emplace_back(BigNat(threads.size()),
                         memoir_chaos_adversary(sc.seed));

  TpmWorld w;
  Schedule sched = threads.size() > 1 ? make_schedule_seeded(sc.seed)
                                      : make_schedule_round_robin();
  res.trace = run(threads, w, sched, sc.fuel, sc.seed);

  res.axioms = check_axioms(res.trace);
  for (auto& a : res.axioms)
    if (!a.ok) {
      res.ok = false;
      res.detail += "axiom " + a.name + ": " + a.witness + "; ";
    }
  Registry reg = memoir_registry();
  Valuation val = build_valuation(res.trace, reg);
  for (auto& [name, f] : memoir_properties(module, service)) {
    bool holds = sat(val, f);
    res.properties.emplace_back(name, holds);
    bool want = !sc.expectFail.count(name);
    if (holds != want) {
      res.ok = false;
      res.detail += "property " + name + (holds ? " held" : " failed") +
                    " unexpectedly; ";
    }
  }
  return res;
}

std::vector<MemoirScenario> memoir_suite() {
  using A = MemoirScenario::Attack;
  std::vector<MemoirScenario> v;
  v.push_back({"honest-1", false, 1, A::None, false, 0, 600, {}});
  v.push_back({"honest-3", false, 3, A::None, false, 0, 1200, {}});
  v.push_back({"honest-adversary", false, 2, A::None, true, 7, 1200, {}});
  v.push_back({"rollback-intact", false, 1, A::Rollback, false, 0, 1200, {}});
  v.push_back({"rollback-weakened", true, 1, A::Rollback, false, 0, 1200,
               {"state-continuity"}});
  v.push_back(
      {"malicious-service", false, 1, A::MaliciousService, false, 0, 1200, {}});
  v.push_back(
      {"foreign-module", false, 1, A::ForeignModule, false, 0, 1200, {}});
  v.push_back({"nvram-probe", false, 1, A::NvramProbe, false, 3, 900, {}});
  v.push_back({"crypto-forge", false, 1, A::CryptoForge, false, 5, 900, {}});
  return v;
}

ScenarioReport run_scenarios() {
  ScenarioReport rep;
  for (auto& sc : memoir_suite()) {
    auto r = run_memoir_scenario(sc);
    std::string line = "scenario " + r.name + ": " +
                       (r.ok ? "PASS" : "FAIL " + r.detail);
    rep.lines.push_back(line);
    rep.ok = rep.ok && r.ok;
  }
  rep.lines.push_back(rep.ok ? "SCENARIOS PASS" : "SCENARIOS FAIL");
  return rep;
}

std::string ScenarioReport::render() const {
  std::string s;
  for (auto& l : lines) s += l + "\n";
  return s;
}

MemoirScenario parse_scenario(const std::string& text) {
  using A = MemoirScenario::Attack;
  MemoirScenario sc;
  sc.name = "unnamed";
  std::istringstream in(text);
  std::string line;
  auto boolean = [](const std::string& v) { return v == "true" || v == "1"; };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, val;
    ls >> key >> val;
    if (key == "name") sc.name = val;
    else if (key == "weakened") sc.weakened = boolean(val);
    else if (key == "invocations") sc.invocations = std::stoi(val);
    else if (key == "seed") sc.seed = std::stoull(val);
    else if (key == "fuel") sc.fuel = std::stoll(val);
    else if (key == "adversary") sc.withAdversary = boolean(val);
    else if (key == "expectfail") sc.expectFail.insert(val);
    else if (key == "attack") {
      if (val == "none") sc.attack = A::None;
      else if (val == "rollback") sc.attack = A::Rollback;
      else if (val == "malicious-service") sc.attack = A::MaliciousService;
      else if (val == "foreign-module") sc.attack = A::ForeignModule;
      else if (val == "nvram-probe") sc.attack = A::NvramProbe;
      else if (val == "crypto-forge") sc.attack = A::CryptoForge;
      else throw std::runtime_error("unknown attack: " + val);
    } else {
      throw std::runtime_error("unknown scenario key: " + key);
    }
  }
  return sc;
}

}  // namespace sysm
