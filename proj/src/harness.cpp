#include "sysm/harness.hpp"

#include <algorithm>
#include <random>

namespace sysm {

namespace {

const Configuration& config_at(const Trace& t, long long u) {
  return u == 0 ? t.initial : t.steps[static_cast<size_t>(u - 1)].after;
}

struct Located {
  bool found = false;
  long long uB = 0;
  size_t baseDepth = 0;
  std::vector<uint64_t> baseFrames;
  bool returned = false;
  long long uE = 0;
  ExprP value;
};

// The computation starts at the first configuration whose subject focus is
// the computation itself; it returns at the step that pops a frame that was
// already on the stack then. A whole-thread computation (empty base stack)
// instead halts at the first ret-with-empty-stack configuration.
Located locate(const Trace& t, const BigNat& tid, const CompP& comp,
               bool useFrameIds) {
  Located L;
  const long long N = static_cast<long long>(t.steps.size());
  for (long long u = 0; u <= N && !L.found; ++u) {
    auto* th = config_at(t, u).thread(tid);
    if (th && !th->stuck && th->fc && !th->fe && alpha_eq(th->fc, comp)) {
      L.found = true;
      L.uB = u;
      L.baseDepth = th->stack.size();
      for (auto& fr : th->stack) L.baseFrames.push_back(fr.frameId);
    }
  }
  if (!L.found) return L;
  if (L.baseDepth == 0) {
    for (long long u = L.uB; u <= N; ++u) {
      auto* th = config_at(t, u).thread(tid);
      if (th && !th->stuck && th->stack.empty() && th->fc &&
          th->fc->k == Computation::K::Ret) {
        L.returned = true;
        L.uE = u;
        L.value = normalize(th->fc->e, 100000).e;
        break;
      }
    }
    return L;
  }
  for (long long u = L.uB + 1; u <= N; ++u) {
    auto& st = t.steps[static_cast<size_t>(u - 1)];
    if (st.ev.thread != tid) continue;
    bool popsBase;
    if (useFrameIds) {
      popsBase = st.ev.poppedFrame &&
                 std::find(L.baseFrames.begin(), L.baseFrames.end(),
                           *st.ev.poppedFrame) != L.baseFrames.end();
    } else {
      auto* th = st.after.thread(tid);
      popsBase = th && th->stack.size() < L.baseDepth;
    }
    if (popsBase) {
      L.returned = true;
      L.uE = u;
      L.value = st.ev.returned;
      break;
    }
  }
  return L;
}

Verdict check_impl(const Trace& t, const PostconditionSpec& spec,
                   const Registry& reg, bool naive, const SatOptions& opt,
                   long long naiveFuel) {
  Verdict v;
  if (spec.compType.isFixPi) {
    v.detail = "fix types have no direct trace interpretation; apply first";
    return v;
  }
  auto L = locate(t, spec.subjectThread, spec.comp, !naive);
  if (!L.found) {
    v.detail = "SUBJECT_NOT_FOUND";
    return v;
  }
  v.found = true;
  v.returned = L.returned;
  v.uB = L.uB;
  v.uE = L.returned ? L.uE : static_cast<long long>(t.steps.size());
  v.value = L.value;
  v.ok = true;

  const CompType& ct = spec.compType.inner;
  Valuation val;
  if (!naive) val = build_valuation(t, reg);
  auto holds = [&](const FormP& f) {
    return naive ? sat_naive(t, reg, f, naiveFuel) : sat(val, f, opt);
  };
  Sub common{{ct.u1, mk::cnat(L.uB)},
             {ct.i, mk::ctid(spec.subjectThread)}};

  if (spec.which != PostKind::Invariant && L.returned) {
    Sub s = common;
    s[ct.u2] = mk::cnat(L.uE);
    s[ct.x] = L.value;
    if (!holds(subst(ct.partial, s))) {
      v.ok = false;
      v.detail = "partial postcondition fails at return time " +
                 std::to_string(L.uE);
      return v;
    }
  }
  if (spec.which != PostKind::Partial) {
    for (long long u = L.uB; u <= v.uE; ++u) {
      Sub s = common;
      s[ct.u2] = mk::cnat(u);
      if (L.returned) s[ct.x] = L.value;
      if (!holds(subst(ct.inv, s))) {
        v.ok = false;
        v.detail = "invariant fails at prefix time " + std::to_string(u);
        return v;
      }
    }
  }
  return v;
}

// weighted adversary term generator
struct Gen {
  std::mt19937_64 rng;
  const AdversaryProfile& p;
  int budget;

  Gen(const AdversaryProfile& prof) : rng(prof.seed), p(prof),
                                      budget(prof.sizeBudget) {}
  int pick(int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); }
  std::string iface() {
    return p.interfaces[static_cast<size_t>(pick(
        static_cast<int>(p.interfaces.size())))].first;
  }
  ExprP arg() {
    switch (pick(6)) {
      case 0: return mk::cnat(pick(4));
      case 1: return mk::cbool(pick(2) == 0);
      case 2: return mk::cloc(pick(3));
      case 3:
        if (!p.interfaces.empty()) return mk::var(iface());
        [[fallthrough]];
      default: return mk::cnat(pick(8));
    }
  }
  CompP gen() {
    if (--budget <= 0) return mk::ret(arg());
    if (p.allowRawActions && pick(100) < 30) {
      CompP a = pick(2) == 0
                    ? mk::act("write", {mk::cloc(pick(3)), mk::cnat(pick(5))})
                    : mk::act("read", {mk::cloc(pick(3))});
      return mk::seqc(a, gen());
    }
    int w = pick(100);
    if (w < 40 && !p.interfaces.empty())
      return mk::lete(mk::app(mk::var(iface()), arg()), fresh("a"), gen());
    if (w < 70) {
      auto head = gen();
      return pick(2) == 0 ? mk::letc(head, fresh("a"), gen())
                          : mk::seqc(head, gen());
    }
    if (w < 85) {
      auto x = fresh("a");
      return mk::lete(mk::app(mk::lam(x, mk::comp(gen())), arg()), fresh("a"),
                      mk::ret(mk::cbool(true)));
    }
    if (w < 95) return mk::ret(arg());
    auto f = fresh("f"), x = fresh("x");
    return mk::fixapp(mk::fix(f, x, mk::ret(mk::var(x))), arg());
  }
};

}  // namespace

Verdict check_postconditions_on_trace(const Trace& t,
                                      const PostconditionSpec& spec,
                                      const Registry& reg,
                                      const SatOptions& opt) {
  return check_impl(t, spec, reg, false, opt, 0);
}

Verdict check_postconditions_naive(const Trace& t,
                                   const PostconditionSpec& spec,
                                   const Registry& reg, long long fuel) {
  return check_impl(t, spec, reg, true, {}, fuel);
}

ExprP generate_adversary(const AdversaryProfile& p) {
  Gen g(p);
  auto e = mk::comp(g.gen());
  if (!p.allowRawActions) {
    if (!free_actions(e).empty())
      throw std::runtime_error("confined adversary generated an action");
    std::set<std::string> names;
    for (auto& [n, v] : p.interfaces) names.insert(n);
    for (auto& x : fv(e))
      if (!names.count(x))
        throw std::runtime_error("confined adversary escaped its interfaces");
  }
  return e;
}

CompP adversary_computation(const AdversaryProfile& p) {
  auto e = generate_adversary(p);
  Sub s;
  for (auto& [n, v] : p.interfaces) s[n] = v;
  e = subst(e, s);
  if (e->k == Expr::K::Comp) return e->comp;
  auto x = fresh("a");
  return mk::lete(e, x, mk::ret(mk::var(x)));
}

std::string CampaignReport::render() const {
  std::string out;
  for (auto& l : lines) out += l + "\n";
  out += "runs=" + std::to_string(runs) +
         " violations=" + std::to_string(violations) +
         " soundness_alarms=" + std::to_string(soundnessAlarms) +
         " expected_negatives=" + std::to_string(expectedNegatives) + "\n";
  out += soundnessAlarms == 0 ? "CAMPAIGN PASS\n" : "CAMPAIGN FAIL\n";
  return out;
}

CampaignReport fuzz_robust_safety(const AnnotatedProgram& program,
                                  const std::vector<PostconditionSpec>& specs,
                                  const std::vector<AdversaryProfile>& profiles,
                                  uint64_t nSeeds, long long fuel,
                                  const Registry* reg, const World* world,
                                  uint64_t seedStart) {
  CampaignReport rep;
  if (!program.prog.c) {
    rep.lines.push_back("program is not a computation; campaign aborted");
    return rep;
  }
  auto tr = typecheck(program, {}, reg);
  rep.typechecked = tr.ok;
  if (!tr.ok) {
    rep.lines.push_back("typecheck failed; campaign aborted");
    return rep;
  }
  Registry regv = reg ? *reg : heap_registry();
  HeapWorld defaultWorld;
  const World& w = world ? *world : defaultWorld;
  // a sentinel frame under the subject makes its return observable
  auto xf = fresh("xfin");
  CompP subject = mk::letc(program.prog.c, xf, mk::ret(mk::var(xf)));
  for (uint64_t s = seedStart; s < nSeeds; ++s) {
    for (auto& prof0 : profiles) {
      AdversaryProfile prof = prof0;
      prof.seed = prof0.seed ^ (s * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
      CompP adv = adversary_computation(prof);
      Trace t = run({{0, subject}, {1, adv}}, w, make_schedule_seeded(s),
                    fuel, s);
      ++rep.runs;
      for (auto& spec : specs) {
        Verdict v = check_postconditions_on_trace(t, spec, regv);
        if (!v.found || v.ok) continue;
        ++rep.violations;
        bool expected = prof.allowRawActions;
        if (expected)
          ++rep.expectedNegatives;
        else
          ++rep.soundnessAlarms;
        rep.lines.push_back(
            std::string(expected ? "EXPECTED_NEGATIVE" : "SOUNDNESS_ALARM") +
            " seed=" + std::to_string(s) + " profile=" + prof.name + " " +
            v.detail + " | repro: sysm fuzz --seeds " + std::to_string(s) +
            ":" + std::to_string(s + 1) + " --fuel " + std::to_string(fuel) +
            " --profile " + prof.name);
      }
    }
  }
  return rep;
}

}  // namespace sysm
