#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sysm/parser.hpp"
#include "sysm/semantics.hpp"
#include "sysm/tracelogic.hpp"

using namespace sysm;

namespace {

using Threads = std::vector<std::pair<BigNat, CompP>>;

Trace demo_trace() {
  HeapWorld w;
  Threads ts{{1, parse_comp("letc(act(write l0 0), z. ret z)")}};
  return run(ts, w, make_schedule_round_robin(), 10);
}

// random closed formulas over the heap predicates
struct FormulaGen {
  Gen& g;
  std::vector<std::string> bVars, uVars;

  ExprP bTerm() {
    std::vector<ExprP> pool;
    for (auto& v : bVars) pool.push_back(mk::var(v));
    pool.push_back(mk::cnat(BigNat(g.pick(6))));
    pool.push_back(mk::cloc(BigNat(g.pick(4))));
    pool.push_back(mk::ctid(BigNat(1 + g.pick(3))));
    pool.push_back(mk::cneginf());
    return pool[g.pick((int)pool.size())];
  }
  ExprP uTerm() {
    std::vector<ExprP> pool;
    for (auto& v : uVars) pool.push_back(mk::var(v));
    pool.push_back(mk::cnat(BigNat(g.pick(6))));
    pool.push_back(mk::cbool(g.pick(2) == 0));
    pool.push_back(mk::plus(mk::cnat(BigNat(g.pick(3))), mk::cnat(BigNat(g.pick(3)))));
    return pool[g.pick((int)pool.size())];
  }
  // timeless atoms are used under @/on, which supply the time argument
  FormP atom(bool timeless) {
    switch (g.pick(7)) {
      case 0: {
        std::vector<ExprP> a{bTerm(), bTerm(), uTerm()};
        if (!timeless) a.push_back(bTerm());
        return mk::pred("Write", std::move(a));
      }
      case 1: {
        std::vector<ExprP> a{bTerm(), bTerm(), uTerm()};
        if (!timeless) a.push_back(bTerm());
        return mk::pred("Read", std::move(a));
      }
      case 2: {
        std::vector<ExprP> a{bTerm(), uTerm()};
        if (!timeless) a.push_back(bTerm());
        return mk::pred("mem", std::move(a));
      }
      case 3: return mk::pred("eval", {uTerm(), uTerm()});
      case 4: {
        std::vector<ExprP> a{bTerm()};
        if (!timeless) a.push_back(bTerm());
        return mk::pred("stuck", std::move(a));
      }
      case 5: return mk::eq(uTerm(), uTerm());
      default: {
        auto op = static_cast<Formula::Cmp>(g.pick(3));
        return mk::tcmp(op, bTerm(), bTerm());
      }
    }
  }
  FormP form(int depth, int quants, bool timeless = false) {
    if (depth <= 0) return atom(timeless);
    switch (g.pick(9)) {
      case 0: return mk::fnot(form(depth - 1, quants, timeless));
      case 1:
        return mk::fand(form(depth - 1, quants, timeless),
                        form(depth - 1, quants, timeless));
      case 2:
        return mk::forr(form(depth - 1, quants, timeless),
                        form(depth - 1, quants, timeless));
      case 3:
        return mk::fimp(form(depth - 1, quants, timeless),
                        form(depth - 1, quants, timeless));
      case 4:
      case 5: {
        if (quants <= 0) return atom(timeless);
        bool isB = g.pick(3) != 0;
        auto x = fresh(isB ? "qb" : "qu");
        (isB ? bVars : uVars).push_back(x);
        auto body = form(depth - 1, quants - 1, timeless);
        (isB ? bVars : uVars).pop_back();
        auto ty = isB ? mk::base() : mk::unt();
        return g.pick(2) ? mk::forall(x, ty, body) : mk::exists(x, ty, body);
      }
      case 6: return mk::at(form(depth - 1, quants, true), bTerm());
      case 7: {
        auto lo = bTerm(), hi = bTerm();
        return mk::oninterval(form(depth - 1, quants, true), lo, hi,
                              g.pick(2) == 0, g.pick(2) == 0);
      }
      default: return atom(timeless);
    }
  }
};

}  // namespace

TEST_CASE("event atoms hold exactly at their step") {
  auto tr = demo_trace();
  auto reg = heap_registry();
  auto v = build_valuation(tr, reg);
  // the write fires at u=2 (after the letc frame push at u=1)
  CHECK(sat(v, parse_formula("Write(tid1, l0, 0, 2)")));
  CHECK(!sat(v, parse_formula("Write(tid1, l0, 0, 1)")));
  CHECK(!sat(v, parse_formula("Write(tid1, l1, 0, 2)")));
  CHECK(sat(v, parse_formula("exists u:b. Write(tid1, l0, 0, u)")));
  CHECK(sat(v, parse_formula("~(exists u:b. exists l:b. exists y:unt. Read(tid1, l, y, u))")));
  CHECK(sat(v, parse_formula("exists u:b. (Write(tid1, l0, 0) @ u)")));
}

TEST_CASE("state predicates: mem, stuck, start") {
  HeapWorld w;
  Threads ts{{1, parse_comp("letc(act(write l1 9), z. letc(act(read l7), y. ret y))")}};
  auto tr = run(ts, w, make_schedule_round_robin(), 20);
  auto reg = heap_registry();
  auto v = build_valuation(tr, reg);
  CHECK(sat(v, parse_formula("mem(l1, 1, 0)")));       // initial store
  CHECK(sat(v, parse_formula("mem(l1, 1) @ -inf")));   // pre-initial = initial
  CHECK(sat(v, parse_formula("mem(l1, 9, 2)")));       // after the write
  CHECK(!sat(v, parse_formula("mem(l1, 1, 2)")));
  CHECK(sat(v, parse_formula("exists u:b. stuck(tid1, u)")));  // read l7
  CHECK(!sat(v, parse_formula("stuck(tid1, 0)")));
  // start: initial configuration only
  TimeVal t0{false, 0};
  CHECK(sat_start(tr, 1, ts[0].second, t0));
  CHECK(sat_start(tr, 1, parse_comp("letc(act(write l1 9), q. letc(act(read l7), r. ret r))"), t0));
  CHECK(!sat_start(tr, 1, parse_comp("ret 0"), t0));
  CHECK(!sat_start(tr, 1, ts[0].second, TimeVal{false, 1}));  // frame pushed
  auto ce = mk::comp(ts[0].second);
  CHECK(sat(v, mk::pred("start", {mk::ctid(1), ce, mk::cnat(0)})));
}

TEST_CASE("eval predicate and equality atoms normalize") {
  auto tr = demo_trace();
  auto reg = heap_registry();
  auto v = build_valuation(tr, reg);
  CHECK(sat(v, parse_formula("eval((lam x. x) 5, 5)")));
  CHECK(sat(v, parse_formula("((2 + 3) == 5)")));
  CHECK(sat(v, parse_formula("(lam x. x) == (lam y. y)")));
  CHECK(!sat(v, parse_formula("eval((lam x. x x) (lam x. x x), 0)")));  // diverges
  CHECK(sat(v, parse_formula("(-inf < 0 /\\ (0 < 1 /\\ 1 <= 1))")));
  CHECK(!sat(v, parse_formula("(true < 1)")));  // non-time operand
}

TEST_CASE("abbreviation expansion follows the table") {
  auto u = mk::var("u");
  auto p = parse_formula("P(x)"), q = parse_formula("Q");
  auto both = expand_abbrev(mk::at(mk::fand(p, q), u));
  CHECK(print(both) == "(P(x, u) /\\ Q(u))");
  auto inner = expand_abbrev(mk::at(mk::at(p, mk::var("u'")), u));
  CHECK(print(inner) == "P(x, u')");
  CHECK(print(expand_abbrev(mk::at(mk::top(), u))) == "TT");
  auto iv = expand_abbrev(parse_formula("(P(x) on (a, c])"));
  REQUIRE(iv->k == Formula::K::Forall);
  CHECK(iv->f1->k == Formula::K::Imp);
  // quantifier capture: @u pushed under a binder named u renames the binder
  auto cap = expand_abbrev(mk::at(parse_formula("forall u:b. P(u)"), u));
  REQUIRE(cap->k == Formula::K::Forall);
  CHECK(cap->name != "u");
  CHECK(fv(cap) == std::set<std::string>{"u"});
}

TEST_CASE("expansion preserves satisfaction") {
  HeapWorld w;
  Gen g(71);
  for (int trial = 0; trial < 60; trial++) {
    Threads ts;
    int n = 1 + g.pick(2);
    for (int i = 0; i < n; i++)
      ts.emplace_back(i + 1, mk::letc(g.heap_comp(3), "z", parse_comp("ret z")));
    auto tr = run(ts, w, make_schedule_seeded(g.rng()), 20);
    auto reg = heap_registry();
    auto v = build_valuation(tr, reg);
    FormulaGen fg{g, {}, {}};
    auto f = fg.form(3, 2);
    CHECK(sat(v, f) == sat(v, expand_abbrev(f)));
  }
}

TEST_CASE("indexed sat agrees with the naive full-universe evaluator") {
  HeapWorld w;
  Gen g(81);
  auto reg = heap_registry();
  for (int trial = 0; trial < 300; trial++) {
    Threads ts;
    int n = 1 + g.pick(2);
    for (int i = 0; i < n; i++)
      ts.emplace_back(i + 1, mk::letc(g.heap_comp(3), "z", parse_comp("ret z")));
    auto tr = run(ts, w, make_schedule_seeded(g.rng()), 20);
    auto v = build_valuation(tr, reg);
    FormulaGen fg{g, {}, {}};
    auto f = fg.form(3, 2);
    bool a = sat(v, f);
    bool b = sat_naive(tr, reg, f);
    if (a != b) {  // print the counterexample before failing
      MESSAGE("formula: " << print(f));
      MESSAGE("trace:\n" << write_trace(tr));
    }
    CHECK(a == b);
  }
}

TEST_CASE("event predicate bijection with ActOk steps") {
  HeapWorld w;
  Gen g(91);
  auto reg = heap_registry();
  for (int trial = 0; trial < 30; trial++) {
    Threads ts{{1, mk::letc(g.heap_comp(4), "z", parse_comp("ret z"))},
               {2, mk::letc(g.heap_comp(4), "z", parse_comp("ret z"))}};
    auto tr = run(ts, w, make_schedule_seeded(g.rng()), 40);
    auto v = build_valuation(tr, reg);
    for (auto& st : tr.steps) {
      if (st.ev.k != StepEvent::K::ActOk) continue;
      std::vector<ExprP> args{mk::ctid(st.ev.thread)};
      for (auto& a : st.ev.args) args.push_back(a);
      std::string pname = st.ev.action == "write" ? "Write" : "Read";
      if (pname == "Read") args.push_back(st.ev.result);
      args.push_back(mk::cnat(st.u));
      CHECK(sat(v, mk::pred(pname, args)));
      // same atom one step earlier must be false
      auto before = args;
      before.back() = mk::cnat(st.u - 1);
      CHECK(!sat(v, mk::pred(pname, before)));
    }
  }
}

TEST_CASE("unknown predicates are rejected") {
  auto tr = demo_trace();
  auto reg = heap_registry();
  auto v = build_valuation(tr, reg);
  CHECK_THROWS_AS(sat(v, parse_formula("Mystery(1)")), std::runtime_error);
  CHECK_THROWS_AS(sat(v, parse_formula("mem(l0, 0)")), std::runtime_error);  // arity
}

TEST_CASE("composable shape recognition") {
  auto ok = parse_formula(
      "forall u:b. forall l:b. forall v:unt. "
      "((ub < u /\\ u <= ue) => ~Write(i, l, v, u))");
  CHECK(check_trace_composable_shape(ok, "ub", "ue", "i"));
  CHECK(!check_trace_composable_shape(parse_formula("FF"), "ub", "ue", "i"));
  CHECK(check_trace_composable_shape(parse_formula("TT"), "ub", "ue", "i"));
  // interval-length assertion is genuinely non-composable
  CHECK(!check_trace_composable_shape(parse_formula("ue = (ub + 5)"), "ub",
                                      "ue", "i"));
  // the on-interval abbreviation of a pointwise body is accepted
  auto on = parse_formula("((~(exists l:b. exists v:unt. Write(i, l, v))) on (ub, ue])");
  CHECK(check_trace_composable_shape(on, "ub", "ue", "i"));
  // endpoint mentioned in the body: rejected
  auto bad = parse_formula("forall u:b. ((ub < u /\\ u <= ue) => ub < ue)");
  CHECK(!check_trace_composable_shape(bad, "ub", "ue", "i"));
  // conjunction of composable parts
  CHECK(check_trace_composable_shape(mk::fand(ok, parse_formula("TT")), "ub",
                                     "ue", "i"));
}

TEST_CASE("trigger-friendly guarded formulas evaluate fast and correctly") {
  HeapWorld w;
  // a long trace with many writes
  std::string prog = "act(read l0)";
  CompP body = parse_comp("ret 0");
  for (int i = 0; i < 30; i++)
    body = mk::seqc(mk::act("write", {mk::cloc(i % 4), mk::cnat(i)}), body);
  Threads ts{{1, mk::letc(body, "z", parse_comp("ret z"))}};
  auto tr = run(ts, w, make_schedule_round_robin(), 200);
  auto reg = heap_registry();
  auto v = build_valuation(tr, reg);
  auto f = parse_formula(
      "forall l:b. forall x:unt. forall u:b. "
      "(Write(tid1, l, x, u) => (mem(l, x, u) /\\ 0 < u))");
  SatOptions withT, noT;
  noT.useTriggers = false;
  CHECK(sat(v, f, withT));
  CHECK(sat(v, f, noT));
  auto g2 = parse_formula("exists u:b. exists x:unt. (Write(tid1, l2, x, u) /\\ x == 2)");
  CHECK(sat(v, g2, withT) == sat(v, g2, noT));
}
