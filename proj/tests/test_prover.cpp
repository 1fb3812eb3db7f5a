#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "sysm/parser.hpp"
#include "sysm/prover.hpp"
#include "sysm/syntax.hpp"

using namespace sysm;

namespace {

Sequent seq(std::vector<std::string> hyps, const std::string& goal,
            std::vector<std::string> theta = {}) {
  Sequent s;
  s.theta = std::move(theta);
  for (auto& h : hyps) s.delta.push_back(parse_formula(h));
  s.goal = parse_formula(goal);
  return s;
}

bool ok(const Sequent& s, const ProofP& p) { return check_proof(s, p).ok; }

OrderAtom oa(Formula::Cmp c, ExprP l, ExprP r) { return {c, l, r}; }

// structural mutation: rebuild the tree with node `target` replaced
ProofP replace_at(const ProofP& p, int target, int& cur,
                  const std::function<ProofP(const ProofP&)>& f) {
  if (cur == target) {
    cur++;
    return f(p);
  }
  cur++;
  auto q = std::make_shared<ProofScript>(*p);
  for (auto& s : q->subs) s = replace_at(s, target, cur, f);
  return q;
}

ProofP corrupt_arity(const ProofP& p) {
  auto q = std::make_shared<ProofScript>(*p);
  if (q->subs.empty())
    q->subs.push_back(mkp::init());
  else
    q->subs.pop_back();
  return q;
}

}  // namespace

TEST_CASE("axiom and propositional rules") {
  auto s = seq({"P"}, "P");
  CHECK(ok(s, mkp::init()));
  CHECK_FALSE(ok(seq({"Q"}, "P"), mkp::init()));

  // |- P /\ Q => P
  auto s2 = seq({}, "(P /\\ Q) => P");
  auto p2 = mkp::impI(mkp::andE(1, parse_formula("P /\\ Q"), mkp::init()));
  CHECK(ok(s2, p2));
  // wrong projection index
  auto bad = mkp::impI(mkp::andE(2, parse_formula("P /\\ Q"), mkp::init()));
  auto r = check_proof(s2, bad);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("/0") != std::string::npos);

  CHECK(ok(seq({}, "TT"), mkp::topI()));
  CHECK(ok(seq({"FF"}, "P"), mkp::botE()));
  CHECK_FALSE(ok(seq({}, "P"), mkp::botE()));

  // cut: from P and P => Q conclude Q
  auto s3 = seq({"P", "P => Q"}, "Q");
  auto p3 = mkp::cut(parse_formula("Q"),
                     mkp::impE(parse_formula("P"), mkp::init(), mkp::init()),
                     mkp::init());
  CHECK(ok(s3, p3));

  // disjunction: P \/ Q, P => R, Q => R |- R
  auto s4 = seq({"P \\/ Q", "P => R", "Q => R"}, "R");
  auto mp = [](const char* a) {
    return mkp::impE(parse_formula(a), mkp::init(), mkp::init());
  };
  auto p4 = mkp::orE(parse_formula("P \\/ Q"), mkp::init(), mp("P"), mp("Q"));
  CHECK(ok(s4, p4));

  // negation: P, ~P |- FF
  auto s5 = seq({"P", "~P"}, "FF");
  CHECK(ok(s5, mkp::notE(parse_formula("P"), mkp::init(), mkp::init())));
  // ~I: |- ~(P /\ ~P)
  auto s6 = seq({}, "~(P /\\ ~P)");
  auto inner = mkp::cut(
      parse_formula("P"),
      mkp::andE(1, parse_formula("P /\\ ~P"), mkp::init()),
      mkp::cut(parse_formula("~P"),
               mkp::andE(2, parse_formula("P /\\ ~P"), mkp::init()),
               mkp::notE(parse_formula("P"), mkp::init(), mkp::init())));
  CHECK(ok(s6, mkp::notI(inner)));
}

TEST_CASE("quantifier rules") {
  // forall x:unt. P(x) |- P(0)
  auto all = parse_formula("forall x:unt. P(x)");
  auto s = seq({"forall x:unt. P(x)"}, "P(0)");
  CHECK(ok(s, mkp::forallE(all, mk::cnat(0), mkp::init())));
  // instantiated body must match the goal
  CHECK_FALSE(ok(seq({"forall x:unt. P(x)"}, "P(1)"),
                 mkp::forallE(all, mk::cnat(0), mkp::init())));

  // type discipline: forall x:b needs a time-sorted term
  auto allb = parse_formula("forall x:b. P(x)");
  auto sb = seq({"forall x:b. P(x)"}, "P(lam y. y)");
  CHECK_FALSE(ok(sb, mkp::forallE(allb, parse_expr("lam y. y"), mkp::init())));
  CHECK(ok(seq({"forall x:b. P(x)"}, "P(3)"),
           mkp::forallE(allb, mk::cnat(3), mkp::init())));

  // |- forall x:unt. (P(x) => P(x))
  auto sg = seq({}, "forall x:unt. (P(x) => P(x))");
  CHECK(ok(sg, mkp::forallI("w", mkp::impI(mkp::init()))));
  // freshness: binder may not collide with existing names
  auto scol = seq({"P(w)"}, "forall x:unt. (P(x) => P(x))");
  CHECK_FALSE(ok(scol, mkp::forallI("w", mkp::impI(mkp::init()))));

  // P(0) |- exists x:unt. P(x)
  auto se = seq({"P(0)"}, "exists x:unt. P(x)");
  CHECK(ok(se, mkp::existsI(mk::cnat(0), mkp::init())));

  // exists x:unt. P(x), forall x:unt. (P(x) => Q) |- Q
  auto sx = seq({"exists x:unt. P(x)", "forall x:unt. (P(x) => Q)"}, "Q");
  auto ex = parse_formula("exists x:unt. P(x)");
  auto allimp = parse_formula("forall x:unt. (P(x) => Q)");
  auto body = mkp::cut(
      parse_formula("P(w') => Q"),
      mkp::forallE(allimp, mk::var("w'"), mkp::init()),
      mkp::impE(parse_formula("P(w')"), mkp::init(), mkp::init()));
  CHECK(ok(sx, mkp::existsE(ex, "w'", mkp::init(), body)));
}

TEST_CASE("equality rules") {
  // beta-normalization backs reflexivity
  CHECK(ok(seq({}, "((lam x. x) 0) == 0"), mkp::eqRefl()));
  CHECK(ok(seq({}, "(lam x. x) == (lam y. y)"), mkp::eqRefl()));
  CHECK_FALSE(ok(seq({}, "0 == 1"), mkp::eqRefl()));

  auto s = seq({"a == m"}, "m == a");
  CHECK(ok(s, mkp::eqSym(mkp::init())));

  auto st = seq({"a == m", "m == c"}, "a == c");
  CHECK(ok(st, mkp::eqTrans(mk::var("m"), mkp::init(), mkp::init())));

  auto ss = seq({"a == m", "P(a, a)"}, "P(m, m)");
  CHECK(ok(ss, mkp::eqSubst("x", parse_formula("P(x, x)"),
                            parse_formula("a == m"), mkp::init(),
                            mkp::init())));
  // template mismatch
  CHECK_FALSE(ok(seq({"a == m", "P(a, a)"}, "P(m, a)"),
                 mkp::eqSubst("x", parse_formula("P(x, x)"),
                              parse_formula("a == m"), mkp::init(),
                              mkp::init())));

  CHECK(ok(seq({}, "1 < (1 + 1)"), mkp::structEval()));
  CHECK(ok(seq({}, "-inf < 0"), mkp::structEval()));
  CHECK_FALSE(ok(seq({}, "2 < 1"), mkp::structEval()));
}

TEST_CASE("ordering solver examples") {
  auto v = [](const char* n) { return mk::var(n); };
  using C = Formula::Cmp;
  CHECK(solve_ordering({oa(C::Le, v("u0"), v("u1")), oa(C::Lt, v("u1"), v("u2"))},
                       oa(C::Lt, v("u0"), v("u2"))));
  CHECK_FALSE(solve_ordering({}, oa(C::Lt, v("u"), v("u"))));
  CHECK(solve_ordering({}, oa(C::Le, v("u"), v("u"))));
  CHECK(solve_ordering({oa(C::Lt, v("a"), v("b"))},
                       oa(C::Le, mk::plus(v("a"), mk::cnat(1)), v("b"))));
  CHECK(solve_ordering({}, oa(C::Le, mk::cnat(0), v("u"))));  // naturals
  CHECK(solve_ordering({}, oa(C::Lt, mk::cneginf(), v("u"))));
  CHECK_FALSE(solve_ordering({oa(C::Le, v("a"), v("b"))},
                             oa(C::Lt, v("a"), v("b"))));
  CHECK(solve_ordering({oa(C::Eq, v("a"), v("b")), oa(C::Eq, v("b"), v("c"))},
                       oa(C::Eq, v("a"), v("c"))));
}

TEST_CASE("time entailment with propositional goals") {
  auto s = seq({"a <= m", "m <= c", "a < u", "u <= c"}, "TT",
               {"a", "m", "c", "u"});
  CHECK(time_entails(s.delta,
                     parse_formula("(a < u /\\ u <= m) \\/ (m < u /\\ u <= c)")));
  CHECK_FALSE(time_entails(s.delta, parse_formula("a < u /\\ u <= m")));
  CHECK(time_entails(s.delta, parse_formula("~(c < a)")));
  CHECK(time_entails(s.delta, parse_formula("u == m \\/ ~(u == m)")));
  // goal FF needs inconsistent hypotheses
  CHECK_FALSE(time_entails(s.delta, mk::bot()));
  std::vector<FormP> bad = {parse_formula("a < m"), parse_formula("m < a")};
  CHECK(time_entails(bad, mk::bot()));
  // TimeArith as a proof leaf
  CHECK(ok(seq({"a < m"}, "a < (m + 1)"), mkp::timeArith()));
  CHECK_FALSE(ok(seq({"a < m"}, "P"), mkp::timeArith()));
}

namespace {

// brute-force oracle: terms are (varIdx, offset) with varIdx -1 for
// constants; -inf is the constant -1, below every natural
struct BTerm {
  int v;
  long long off;
};
struct BAtom {
  Formula::Cmp cmp;
  BTerm l, r;
};

bool batom_holds(const BAtom& a, const std::vector<long long>& vals) {
  long long x = a.l.v < 0 ? a.l.off : vals[a.l.v] + a.l.off;
  long long y = a.r.v < 0 ? a.r.off : vals[a.r.v] + a.r.off;
  switch (a.cmp) {
    case Formula::Cmp::Lt: return x < y;
    case Formula::Cmp::Le: return x <= y;
    case Formula::Cmp::Eq: return x == y;
  }
  return false;
}

bool brute_entails(const std::vector<BAtom>& assume, const BAtom& goal,
                   int nv, long long hi) {
  std::vector<long long> vals(nv, 0);
  while (true) {
    bool all = true;
    for (auto& a : assume)
      if (!batom_holds(a, vals)) {
        all = false;
        break;
      }
    if (all && !batom_holds(goal, vals)) return false;
    int j = 0;
    while (j < nv && vals[j] == hi) vals[j++] = 0;
    if (j == nv) return true;
    vals[j]++;
  }
}

ExprP bterm_expr(const BTerm& t, const std::vector<std::string>& names) {
  if (t.v < 0)
    return t.off < 0 ? mk::cneginf() : mk::cnat((unsigned long long)t.off);
  if (t.off == 0) return mk::var(names[t.v]);
  return mk::plus(mk::var(names[t.v]), mk::cnat((unsigned long long)t.off));
}

}  // namespace

TEST_CASE("ordering solver agrees with brute force") {
  std::mt19937_64 rng(20260823);
  std::vector<std::string> names = {"t0", "t1", "t2", "t3", "t4", "t5"};
  int disagreements = 0, entailedCount = 0;
  for (int iter = 0; iter < 1000; iter++) {
    int nv, maxc, natoms;
    long long hi;
    while (true) {
      nv = 1 + (int)(rng() % 6);
      maxc = (int)(rng() % 11);
      natoms = (int)(rng() % 6);
      // every feasible system has a model with values below this bound
      hi = (long long)(nv + 1) * (maxc + 1) + 2;
      double cost = 1;
      for (int j = 0; j < nv; j++) cost *= (double)(hi + 1);
      if (cost <= 2e6) break;
    }
    auto mkterm = [&]() -> BTerm {
      unsigned r = rng() % 10;
      if (r < 5) return {(int)(rng() % nv), 0};
      if (r < 7) return {(int)(rng() % nv), (long long)(rng() % (maxc + 1))};
      if (r < 9) return {-1, (long long)(rng() % (maxc + 1))};
      return {-1, -1};  // -inf
    };
    auto mkatom = [&]() -> BAtom {
      Formula::Cmp c =
          std::array{Formula::Cmp::Lt, Formula::Cmp::Le,
                     Formula::Cmp::Eq}[rng() % 3];
      return {c, mkterm(), mkterm()};
    };
    std::vector<BAtom> assume;
    for (int j = 0; j < natoms; j++) assume.push_back(mkatom());
    BAtom goal = mkatom();

    std::vector<OrderAtom> sa;
    for (auto& a : assume)
      sa.push_back({a.cmp, bterm_expr(a.l, names), bterm_expr(a.r, names)});
    OrderAtom sg{goal.cmp, bterm_expr(goal.l, names), bterm_expr(goal.r, names)};

    bool got = solve_ordering(sa, sg);
    bool want = brute_entails(assume, goal, nv, hi);
    if (got != want) disagreements++;
    if (want) entailedCount++;
  }
  CHECK(disagreements == 0);
  CHECK(entailedCount > 50);   // the corpus exercises both outcomes
  CHECK(entailedCount < 950);
}

TEST_CASE("auto prover basics") {
  auto auto_ok = [](const Sequent& s, int depth = 4) {
    auto p = auto_prove(s, depth);
    return p && check_proof(s, p).ok;
  };
  CHECK(auto_ok(seq({}, "TT")));
  CHECK(auto_ok(seq({"phi0", "phi0 => phi"}, "phi")));
  CHECK(auto_ok(seq({}, "(P /\\ Q) => (Q /\\ P)")));
  CHECK(auto_ok(seq({"P \\/ Q", "P => R", "Q => R"}, "R")));
  CHECK(auto_ok(seq({"P /\\ (Q /\\ R)"}, "R")));
  CHECK(auto_ok(seq({"a < m", "m < c"}, "a + 1 < c + 1", {"a", "m", "c"})));
  CHECK(auto_ok(seq({"forall x:unt. P(x)", "P(0) => Q"}, "Q")));
  CHECK(auto_ok(seq({"P(0)"}, "exists x:unt. P(x)")));
  CHECK(auto_ok(seq({"exists x:unt. P(x)", "forall y:unt. (P(y) => Q)"}, "Q")));
  CHECK(auto_ok(seq({}, "exists u:b. u0 <= u", {"u0"})));
  CHECK(auto_ok(seq({}, "((lam x. x) 4) == 4")));
  CHECK_FALSE(auto_prove(seq({}, "P"), 4));
  CHECK_FALSE(auto_prove(seq({"P => Q"}, "P"), 4));
}

TEST_CASE("auto prover resolves interval unions") {
  // two adjacent guarded invariants cover a larger interval
  auto s = seq({"forall u:b. ((a < u /\\ u <= m) => psi(u))",
                "forall u:b. ((m < u /\\ u <= c) => psi(u))",
                "a <= m", "m <= c"},
               "forall u:b. ((a < u /\\ u <= c) => psi(u))", {"a", "m", "c"});
  auto p = auto_prove(s, 5);
  REQUIRE(p);
  CHECK(check_proof(s, p).ok);

  // gap between the segments: not provable
  auto s2 = seq({"forall u:b. ((a < u /\\ u <= m) => psi(u))",
                 "forall u:b. ((m + 1 < u /\\ u <= c) => psi(u))",
                 "a <= m", "m <= c"},
                "forall u:b. ((a < u /\\ u <= c) => psi(u))", {"a", "m", "c"});
  CHECK_FALSE(auto_prove(s2, 5));
}

TEST_CASE("auto prover equality closure and rewriting") {
  auto auto_ok = [](const Sequent& s, int depth = 4) {
    auto p = auto_prove(s, depth);
    return p && check_proof(s, p).ok;
  };
  // chains through hypothesis equalities, with symmetry
  CHECK(auto_ok(seq({"a == m", "c == m"}, "a == c")));
  CHECK_FALSE(auto_prove(seq({"a == m"}, "a == c"), 4));
  // rewriting predicate arguments through the closure
  CHECK(auto_ok(seq({"a == m", "m == c", "P(c, d)"}, "P(a, d)")));
  // closure modulo normalization
  CHECK(auto_ok(seq({"((lam x. x) a) == c", "P(c)"}, "P(a)")));
  // rewriting after instantiating a guarded fact
  auto s = seq({"y == x", "forall l:unt. (eval(e0, l) => read(i0, l, x, u2))"},
               "forall l:unt. (eval(e0, l) => read(i0, l, y, u2))",
               {"u2"});
  CHECK(auto_ok(s, 5));
}

TEST_CASE("auto prover ex falso and backward chaining") {
  auto auto_ok = [](const Sequent& s, int depth = 4) {
    auto p = auto_prove(s, depth);
    return p && check_proof(s, p).ok;
  };
  CHECK(auto_ok(seq({"~P", "P"}, "Q")));
  CHECK(auto_ok(seq({"forall l:unt. ~write(j0, l, 0, u1)",
                     "write(j0, l1, 0, u1)"},
                    "Q", {"u1"})));
  // backward chaining binds antecedent-only variables against delta
  auto s = seq({"mem(l1, v1, u3)", "u2 <= u3",
                "forall l:unt. forall v:unt. forall t:b. forall t2:b. "
                "((mem(l, v, t2) /\\ t <= t2) => mem(l, v, t))"},
               "mem(l1, v1, u2)", {"u2", "u3"});
  CHECK(auto_ok(s, 5));
}

TEST_CASE("auto prover localizes events to segment windows") {
  // reads in the first window are ruled out, reads in the second are pinned
  // to a known location with an earlier write, and the third window carries
  // the conclusion directly
  std::vector<std::string> hyps = {
      "u0 <= um", "um <= u1", "u1 <= u2", "u2 <= u3",
      "forall l:unt. forall w:unt. forall u:b. "
      "((u0 < u /\\ u <= u1) => ~read(i0, l, w, u))",
      "forall l:unt. forall w:unt. forall u:b. "
      "(((u1 < u /\\ u <= u2) /\\ read(i0, l, w, u)) => eval(x0, l))",
      "forall l:unt. (eval(x0, l) => write(i0, l, 0, um))",
      "forall l:unt. forall w:unt. forall u:b. "
      "(((u2 < u /\\ u <= u3) /\\ read(i0, l, w, u)) => "
      "(exists up:b. exists v:unt. (up < u /\\ write(i0, l, v, up))))"};
  std::string goal =
      "forall u:b. forall l:unt. forall w:unt. "
      "(((u0 < u /\\ u <= u3) /\\ read(i0, l, w, u)) => "
      "(exists up:b. exists v:unt. (up < u /\\ write(i0, l, v, up))))";
  auto s = seq(hyps, goal, {"u0", "um", "u1", "u2", "u3"});
  auto p = auto_prove(s, 8);
  REQUIRE(p);
  CHECK(check_proof(s, p).ok);

  // without the write fact the middle window cannot be discharged
  auto hyps2 = hyps;
  hyps2.erase(hyps2.begin() + 6);
  ProverOptions tight;
  tight.autoBudget = 10000;
  CHECK_FALSE(
      auto_prove(seq(hyps2, goal, {"u0", "um", "u1", "u2", "u3"}), 5, tight));
}

TEST_CASE("auto prover chains frame reasoning through equalities") {
  // a backward frame axiom plus a global no-write assumption push a memory
  // fact to an earlier time, then equalities close the goal
  std::vector<std::string> hyps = {
      "u0 <= u1", "u1 < u2", "u2 < u3", "y == x",
      "forall j:unt. forall l:unt. forall w:unt. forall u:b. "
      "~write(j, l, w, u)",
      "forall l:unt. forall v:unt. forall t:b. forall t2:b. "
      "((mem(l, v, t2) /\\ t <= t2) => mem(l, v, t))",
      "forall l:unt. forall v:unt. ((eval(l0, l) /\\ mem(l, v, u2)) => "
      "x == v)"};
  std::string goal =
      "forall l:unt. forall v:unt. ((eval(l0, l) /\\ mem(l, v, u3)) => "
      "y == v)";
  auto s = seq(hyps, goal, {"u0", "u1", "u2", "u3"});
  auto p = auto_prove(s, 8);
  REQUIRE(p);
  CHECK(check_proof(s, p).ok);
}

TEST_CASE("auto prover self-consistency on random sequents") {
  std::mt19937_64 rng(7);
  std::vector<std::string> atoms = {"P", "Q", "R", "t0 < t1", "t1 <= t2",
                                    "t0 < t2", "t2 < t0", "P => Q"};
  int found = 0;
  for (int iter = 0; iter < 1000; iter++) {
    std::function<FormP(int)> gen = [&](int d) -> FormP {
      if (d == 0 || rng() % 3 == 0)
        return parse_formula(atoms[rng() % atoms.size()]);
      switch (rng() % 4) {
        case 0: return mk::fand(gen(d - 1), gen(d - 1));
        case 1: return mk::forr(gen(d - 1), gen(d - 1));
        case 2: return mk::fimp(gen(d - 1), gen(d - 1));
        default: return mk::fnot(gen(d - 1));
      }
    };
    Sequent s;
    s.theta = {"t0", "t1", "t2"};
    int nh = (int)(rng() % 4);
    for (int j = 0; j < nh; j++) s.delta.push_back(gen(2));
    s.goal = gen(2);
    auto p = auto_prove(s, 3);
    if (p) {
      found++;
      auto r = check_proof(s, p);
      if (!r.ok) {
        CAPTURE(print(s.goal));
        CAPTURE(print_proof(p));
        CAPTURE(r.error);
      }
      REQUIRE(r.ok);
    }
  }
  CHECK(found > 100);  // the search is not degenerate
}

TEST_CASE("honest rule") {
  auto c = parse_comp("letc(act(read l0), x. ret x)");
  Sequent s;
  s.theta = {"u0"};
  s.delta = {mk::pred("start", {mk::ctid(1), mk::comp(c), mk::var("u0")})};
  auto inv = parse_formula("prot(i', v1, v2)");
  s.goal = parse_formula(
      "forall w:b. (u0 < w => prot(tid1, u0, w))");
  HonestData d{mk::ctid(1), c, mk::var("u0"), "v1", "v2", "i'", inv};
  HonestOracle yes = [](const CompP&, const CompType&) { return true; };
  HonestOracle no = [](const CompP&, const CompType&) { return false; };
  ProverOptions opt;
  opt.honest = &yes;
  CHECK(check_proof(s, mkp::honest(d), opt).ok);
  opt.honest = &no;
  CHECK_FALSE(check_proof(s, mkp::honest(d), opt).ok);
  opt.honest = &yes;
  // missing start fact
  Sequent s2 = s;
  s2.delta.clear();
  CHECK_FALSE(check_proof(s2, mkp::honest(d), opt).ok);
  // nonempty program context
  Sequent s3 = s;
  s3.gamma["z"] = mk::unt();
  CHECK_FALSE(check_proof(s3, mkp::honest(d), opt).ok);
  // conclusion shape: guard must be u0 < w
  Sequent s4 = s;
  s4.goal = parse_formula("forall w:b. (w < u0 => prot(tid1, u0, w))");
  CHECK_FALSE(check_proof(s4, mkp::honest(d), opt).ok);
  // wrong body substitution
  Sequent s5 = s;
  s5.goal = parse_formula("forall w:b. (u0 < w => prot(tid1, w, u0))");
  CHECK_FALSE(check_proof(s5, mkp::honest(d), opt).ok);
}

TEST_CASE("script files round-trip") {
  auto c = parse_comp("ret true");
  HonestData d{mk::ctid(2), c, mk::var("u0"), "v1", "v2", "i'",
               parse_formula("prot(i', v1, v2)")};
  std::vector<ProofP> scripts = {
      mkp::init(),
      mkp::impI(mkp::andE(1, parse_formula("P /\\ Q"), mkp::init())),
      mkp::cut(parse_formula("Q"),
               mkp::impE(parse_formula("P"), mkp::init(), mkp::init()),
               mkp::init()),
      mkp::forallI("w", mkp::existsI(mk::var("w"), mkp::timeArith())),
      mkp::forallE(parse_formula("forall x:b. P(x)"), mk::cnat(3),
                   mkp::init()),
      mkp::existsE(parse_formula("exists x:unt. P(x)"), "w", mkp::init(),
                   mkp::init()),
      mkp::orE(parse_formula("P \\/ Q"), mkp::init(), mkp::orI(2, mkp::init()),
               mkp::autoLeaf()),
      mkp::eqTrans(mk::var("m"), mkp::eqRefl(), mkp::eqSym(mkp::init())),
      mkp::eqSubst("x", parse_formula("P(x, x)"), parse_formula("a == m"),
                   mkp::init(), mkp::structEval()),
      mkp::notE(parse_formula("P"), mkp::init(), mkp::notI(mkp::botE())),
      mkp::honest(d),
  };
  for (auto& p : scripts) {
    auto text = print_proof(p);
    auto q = parse_proof(text);
    CHECK(print_proof(q) == text);
    CHECK(proof_size(q) == proof_size(p));
  }
  CHECK_THROWS_AS(parse_proof("(frobnicate)"), ParseError);
  CHECK_THROWS_AS(parse_proof("(init) (init)"), ParseError);
  CHECK_THROWS_AS(parse_proof("(cut {P} (init)"), ParseError);
}

TEST_CASE("every node perturbation of a valid proof is rejected") {
  struct Case {
    Sequent s;
    ProofP p;
  };
  std::vector<Case> cases;
  {
    auto s = seq({}, "(P /\\ Q) => P");
    cases.push_back(
        {s, mkp::impI(mkp::andE(1, parse_formula("P /\\ Q"), mkp::init()))});
  }
  {
    auto s = seq({"P", "P => Q"}, "Q");
    cases.push_back(
        {s, mkp::cut(parse_formula("Q"),
                     mkp::impE(parse_formula("P"), mkp::init(), mkp::init()),
                     mkp::init())});
  }
  {
    auto s = seq({"P \\/ Q", "P => R", "Q => R"}, "R");
    auto mp = [](const char* a) {
      return mkp::impE(parse_formula(a), mkp::init(), mkp::init());
    };
    cases.push_back(
        {s, mkp::orE(parse_formula("P \\/ Q"), mkp::init(), mp("P"), mp("Q"))});
  }
  {
    auto s = seq({"exists x:unt. P(x)", "forall x:unt. (P(x) => Q)"}, "Q");
    auto body = mkp::cut(
        parse_formula("P(w') => Q"),
        mkp::forallE(parse_formula("forall x:unt. (P(x) => Q)"), mk::var("w'"),
                     mkp::init()),
        mkp::impE(parse_formula("P(w')"), mkp::init(), mkp::init()));
    cases.push_back(
        {s, mkp::existsE(parse_formula("exists x:unt. P(x)"), "w'",
                         mkp::init(), body)});
  }
  {
    auto s = seq({"a == m", "m == c"}, "a == c");
    cases.push_back(
        {s, mkp::eqTrans(mk::var("m"), mkp::init(), mkp::init())});
  }
  for (auto& tc : cases) {
    REQUIRE(check_proof(tc.s, tc.p).ok);
    int n = proof_size(tc.p);
    for (int j = 0; j < n; j++) {
      int cur = 0;
      auto bad = replace_at(tc.p, j, cur, corrupt_arity);
      CHECK_FALSE(check_proof(tc.s, bad).ok);
    }
  }
  // semantic perturbations on top of the structural ones
  auto s = seq({}, "(P /\\ Q) => P");
  auto p = mkp::impI(mkp::andE(1, parse_formula("P /\\ Q"), mkp::init()));
  int cur = 0;
  auto flip = replace_at(p, 1, cur, [](const ProofP& q) {
    auto r = std::make_shared<ProofScript>(*q);
    r->idx = 2;
    return r;
  });
  CHECK_FALSE(check_proof(s, flip).ok);
  cur = 0;
  auto wrongPhi = replace_at(p, 1, cur, [](const ProofP& q) {
    auto r = std::make_shared<ProofScript>(*q);
    r->phi = parse_formula("P /\\ R");
    return r;
  });
  CHECK_FALSE(check_proof(s, wrongPhi).ok);
}

TEST_CASE("auto leaves are re-derived during checking") {
  auto s = seq({"phi0", "phi0 => phi"}, "phi");
  CHECK(check_proof(s, mkp::autoLeaf()).ok);
  CHECK_FALSE(check_proof(seq({}, "phi"), mkp::autoLeaf()).ok);
  // nested inside a script
  auto s2 = seq({"P /\\ Q"}, "Q /\\ P");
  CHECK(check_proof(s2, mkp::andI(mkp::autoLeaf(), mkp::autoLeaf())).ok);
}
