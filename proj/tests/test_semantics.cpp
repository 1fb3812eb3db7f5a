#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <map>
#include <set>

#include "gen.hpp"
#include "sysm/parser.hpp"
#include "sysm/semantics.hpp"

using namespace sysm;

namespace {

// independent recursive normalizer used as the reduction oracle
ExprP nf(const ExprP& e, long long& budget) {
  if (budget-- <= 0) throw std::runtime_error("budget");
  switch (e->k) {
    case Expr::K::App: {
      auto f = nf(e->a, budget);
      if (f->k == Expr::K::Lam) return nf(subst1(f->a, f->name, e->b), budget);
      return mk::app(f, e->b);
    }
    case Expr::K::TyApp: {
      auto f = nf(e->a, budget);
      if (f->k == Expr::K::TyLam) return nf(f->a, budget);
      return mk::tyapp(f);
    }
    case Expr::K::Plus: {
      auto a = nf(e->a, budget);
      auto b = nf(e->b, budget);
      if (a->k == Expr::K::Const && a->val.k == BaseValue::K::Nat &&
          b->k == Expr::K::Const && b->val.k == BaseValue::K::Nat)
        return mk::cnat(a->val.n + b->val.n);
      return mk::plus(a, b);
    }
    default: return e;
  }
}

std::shared_ptr<World> heap_factory(const std::string& id) {
  if (id == "heap") return std::make_shared<HeapWorld>();
  return nullptr;
}

using Threads = std::vector<std::pair<BigNat, CompP>>;

}  // namespace

TEST_CASE("single reduction steps") {
  auto s1 = beta_step(parse_expr("(lam x. x) true"));
  REQUIRE(s1);
  CHECK(print(*s1) == "true");
  auto s2 = beta_step(parse_expr("(tylam X. 5) !"));
  REQUIRE(s2);
  CHECK(print(*s2) == "5");
  CHECK(!beta_step(parse_expr("true false")));  // non-function head: normal
  CHECK(!beta_step(parse_expr("lam x. (lam y. y) x")));  // no reduction under lam
  auto s3 = beta_step(parse_expr("(2 + 3)"));
  REQUIRE(s3);
  CHECK(print(*s3) == "5");
  // leftmost-outermost: the outer redex fires even if the argument diverges
  auto omega = "((lam x. x x) (lam x. x x))";
  auto s4 = beta_step(parse_expr(std::string("(lam x. true) ") + omega));
  REQUIRE(s4);
  CHECK(print(*s4) == "true");
}

TEST_CASE("normalization with fuel") {
  auto r = normalize(parse_expr("(lam x. lam y. x) 1 2"), 10);
  CHECK(!r.exhausted);
  CHECK(print(r.e) == "1");
  auto omega = normalize(parse_expr("(lam x. x x) (lam x. x x)"), 100);
  CHECK(omega.exhausted);
  auto stuckApp = normalize(parse_expr("true 7"), 10);
  CHECK(!stuckApp.exhausted);
  CHECK(print(stuckApp.e) == "(true 7)");
}

TEST_CASE("normalize agrees with a recursive oracle on random terms") {
  Gen g(11);
  int compared = 0;
  for (int t = 0; t < 400 && compared < 200; t++) {
    auto e = g.expr(4);
    long long budget = 3000;
    ExprP oracle;
    try {
      oracle = nf(e, budget);
    } catch (const std::runtime_error&) {
      continue;
    }
    auto r = normalize(e, 3000);
    if (r.exhausted) continue;
    CHECK(print(r.e, true) == print(oracle, true));
    compared++;
  }
  CHECK(compared >= 200);
}

TEST_CASE("thread step: heap actions and returns") {
  HeapWorld w;
  auto store = w.initial_state();
  uint64_t fc = 0;
  // act(read l0) under a frame pops with the stored value
  ThreadState t;
  t.id = 1;
  t.stack.push_back({"x", parse_comp("ret x"), 99});
  t.fc = parse_comp("act(read l0)");
  auto so = thread_step(w, store, t, 2, fc);
  CHECK(so.ev.k == StepEvent::K::ActOk);
  CHECK(print(so.ev.result) == "0");
  CHECK(so.thread->stack.empty());
  CHECK(print(so.thread->fc) == "ret(0)");
  CHECK(so.ev.poppedFrame == 99);
  // reading an unallocated location is stuck, permanently
  t.fc = parse_comp("act(read l9)");
  t.stack = {{"x", parse_comp("ret x"), 1}};
  so = thread_step(w, store, t, 2, fc);
  CHECK(so.ev.k == StepEvent::K::ActStuck);
  CHECK(so.thread->stuck);
  CHECK(!runnable(*so.thread));
  // ret under a frame substitutes into the continuation
  ThreadState t2;
  t2.id = 1;
  t2.stack.push_back({"x", parse_comp("ret (x + 1)"), 5});
  t2.fc = parse_comp("ret 41");
  so = thread_step(w, store, t2, 2, fc);
  CHECK(so.ev.k == StepEvent::K::Silent);
  CHECK(so.ev.rule == "R-Ret");
  CHECK(print(so.thread->fc) == "ret((41 + 1))");
}

TEST_CASE("ret with an empty stack idles instead of stepping") {
  HeapWorld w;
  Threads ts{{1, parse_comp("ret(true)")}};
  auto tr = run(ts, w, make_schedule_round_robin(), 10);
  CHECK(tr.steps.empty());
  ThreadState idle;
  idle.fc = parse_comp("act(write l0 1)");
  CHECK(!runnable(idle));  // act also pops a frame, so it idles bare
}

TEST_CASE("two writers interleave with distinct times") {
  HeapWorld w;
  Threads ts{{1, parse_comp("letc(act(write l0 0), z. ret z)")},
             {2, parse_comp("letc(act(write l1 0), z. ret z)")}};
  auto tr = run(ts, w, make_schedule_round_robin(), 100);
  std::vector<long long> writeTimes;
  for (auto& st : tr.steps) {
    if (st.ev.k == StepEvent::K::ActOk && st.ev.action == "write")
      writeTimes.push_back(st.u);
  }
  REQUIRE(writeTimes.size() == 2);
  CHECK(writeTimes[0] != writeTimes[1]);
}

TEST_CASE("explicit schedules run in the given order and skip finished threads") {
  HeapWorld w;
  Threads ts{{1, parse_comp("letc(act(write l0 1), z. ret z)")},
             {2, parse_comp("letc(act(write l0 2), z. ret z)")}};
  auto tr = run(ts, w, make_schedule_explicit({1, 2, 1, 2, 3, 1, 2}), 100);
  std::vector<int> order;
  for (auto& st : tr.steps) order.push_back(st.ev.thread.convert_to<int>());
  // each thread finishes in two steps (frame push, then the popping act);
  // the later 3 and the trailing picks hit finished threads and are skipped
  CHECK(order == std::vector<int>{1, 2, 1, 2});
  auto& heap = static_cast<const HeapState&>(*tr.steps.back().after.store);
  CHECK(print(heap.heap.at(0)) == "2");
}

TEST_CASE("seeded schedules replay identically") {
  HeapWorld w;
  Gen g(21);
  for (int trial = 0; trial < 20; trial++) {
    Threads ts{{1, g.heap_comp(3)}, {2, g.heap_comp(3)}, {3, g.heap_comp(3)}};
    uint64_t seed = g.rng();
    auto a = run(ts, w, make_schedule_seeded(seed), 60, seed);
    auto b = run(ts, w, make_schedule_seeded(seed), 60, seed);
    CHECK(write_trace(a) == write_trace(b));
  }
}

TEST_CASE("fixpoint unrolling and lete entry") {
  HeapWorld w;
  // one unrolled iteration: write l0 x, read it back, recurse on x+1
  auto c = parse_comp(
      "capp(fix f(x). seqc(act(write x 0), seqc(act(read x), "
      "lete(f (x+1), z. ret z))), l0)");
  Threads ts{{1, mk::letc(c, "r", parse_comp("ret r"))}};
  auto tr = run(ts, w, make_schedule_round_robin(), 40);
  int fixes = 0, writes = 0, entries = 0;
  for (auto& st : tr.steps) {
    if (st.ev.k == StepEvent::K::Silent && st.ev.rule == "R-Fix") fixes++;
    if (st.ev.k == StepEvent::K::Silent && st.ev.rule == "R-SeqE3") entries++;
    if (st.ev.k == StepEvent::K::ActOk && st.ev.action == "write") writes++;
  }
  CHECK(fixes >= 2);     // the recursion unrolls repeatedly
  CHECK(entries >= 1);   // f (x+1) reduces to a suspended computation
  CHECK(writes >= 1);
  // the second iteration writes to (l0 + 1), which is not a location, so the
  // world rejects it and the thread ends stuck
  bool sawStuck = false;
  for (auto& st : tr.steps) sawStuck |= st.ev.k == StepEvent::K::ActStuck;
  CHECK(sawStuck);
}

TEST_CASE("if normalizes its condition in place then branches") {
  HeapWorld w;
  Threads ts{
      {1, parse_comp("if (lam x. x) true then act(write l0 7) else ret 0")}};
  // wrap so the act can pop
  ts[0].second = mk::letc(ts[0].second, "z", parse_comp("ret z"));
  auto tr = run(ts, w, make_schedule_round_robin(), 20);
  int ifSteps = 0;
  bool wrote = false;
  for (auto& st : tr.steps) {
    if (st.ev.k == StepEvent::K::Silent && st.ev.rule == "If-branch") ifSteps++;
    if (st.ev.k == StepEvent::K::ActOk && st.ev.action == "write") wrote = true;
  }
  CHECK(ifSteps == 2);  // one beta step on the condition + branch selection
  CHECK(wrote);
  // non-boolean condition: stuck
  Threads bad{{1, parse_comp("if 5 then ret 0 else ret 1")}};
  auto tb = run(bad, w, make_schedule_round_robin(), 20);
  REQUIRE(!tb.steps.empty());
  CHECK(!runnable(*tb.steps.back().after.thread(1)));
}

TEST_CASE("trace invariants on random runs") {
  HeapWorld w;
  Gen g(31);
  for (int trial = 0; trial < 150; trial++) {
    Threads ts;
    int n = 1 + g.pick(3);
    for (int i = 0; i < n; i++)
      ts.emplace_back(i + 1, mk::letc(g.comp(3), "z", parse_comp("ret z")));
    uint64_t seed = g.rng();
    auto tr = run(ts, w, make_schedule_seeded(seed), 50, seed);
    // times are 1..N, no gaps
    for (size_t i = 0; i < tr.steps.size(); i++)
      CHECK(tr.steps[i].u == (long long)i + 1);
    // stuck absorption: after a thread's stuck-entry, it never appears again
    std::set<std::string> stuckThreads;
    for (auto& st : tr.steps) {
      auto id = st.ev.thread.str();
      CHECK(!stuckThreads.count(id));
      auto* t = st.after.thread(st.ev.thread);
      REQUIRE(t);
      if (t->stuck) stuckThreads.insert(id);
    }
    // frame discipline: each frame id pushed once, popped at most once,
    // and pops match the top of the pushing thread's stack history
    std::map<uint64_t, int> pushes, pops;
    for (auto& st : tr.steps) {
      if (st.ev.pushedFrame) pushes[*st.ev.pushedFrame]++;
      if (st.ev.poppedFrame) pops[*st.ev.poppedFrame]++;
    }
    for (auto& [id, n2] : pushes) CHECK(n2 == 1);
    for (auto& [id, n2] : pops) {
      CHECK(n2 == 1);
      CHECK(pushes.count(id) == 1);
    }
    // determinism
    auto tr2 = run(ts, w, make_schedule_seeded(seed), 50, seed);
    CHECK(write_trace(tr) == write_trace(tr2));
  }
}

TEST_CASE("heap reads agree with a naive replay oracle") {
  HeapWorld w;
  Gen g(41);
  for (int trial = 0; trial < 100; trial++) {
    Threads ts;
    int n = 1 + g.pick(3);
    for (int i = 0; i < n; i++)
      ts.emplace_back(i + 1, mk::letc(g.heap_comp(4), "z", parse_comp("ret z")));
    auto tr = run(ts, w, make_schedule_seeded(g.rng()), 80);
    for (size_t i = 0; i < tr.steps.size(); i++) {
      auto& ev = tr.steps[i].ev;
      if (ev.k != StepEvent::K::ActOk || ev.action != "read") continue;
      // oracle: latest earlier write to the same location, else initial heap
      ExprP expect;
      auto loc = print(ev.args[0], true);
      for (size_t j = 0; j < i; j++) {
        auto& pv = tr.steps[j].ev;
        if (pv.k == StepEvent::K::ActOk && pv.action == "write" &&
            print(pv.args[0], true) == loc)
          expect = pv.args[1];
      }
      if (!expect) expect = w.init.at(ev.args[0]->val.n);
      CHECK(print(ev.result, true) == print(expect, true));
    }
  }
}

TEST_CASE("per-thread event sequences are schedule independent when conflict free") {
  HeapWorld w;
  // three threads touching disjoint locations
  Threads ts{{1, parse_comp("letc(act(write l0 5), z. letc(act(read l0), y. ret y))")},
             {2, parse_comp("letc(act(write l1 6), z. ret z)")},
             {3, parse_comp("letc(act(read l2), z. ret z)")}};
  auto project = [](const Trace& tr) {
    std::map<std::string, std::vector<std::string>> per;
    for (auto& st : tr.steps) {
      if (st.ev.k != StepEvent::K::ActOk) continue;
      per[st.ev.thread.str()].push_back(st.ev.action + " " +
                                        print(st.ev.result, true));
    }
    return per;
  };
  // reference: enumerate every schedule prefix of length 4, completed
  // round-robin, plus random seeds below
  std::map<std::string, std::vector<std::string>> ref;
  for (int a = 1; a <= 3; a++)
    for (int b = 1; b <= 3; b++)
      for (int c = 1; c <= 3; c++)
        for (int d = 1; d <= 3; d++) {
          std::vector<BigNat> sched{a, b, c, d, 1, 2, 3, 1, 2, 3,
                                    1, 2, 3, 1, 2, 3};
          auto tr = run(ts, w, make_schedule_explicit(sched), 100);
          auto pj = project(tr);
          for (auto& [id, evs] : pj) {
            if (!ref.count(id))
              ref[id] = evs;
            else
              CHECK(ref[id] == evs);
          }
        }
  // plus 200 random seeds
  Gen g(51);
  for (int trial = 0; trial < 200; trial++) {
    auto tr = run(ts, w, make_schedule_seeded(g.rng()), 100);
    for (auto& [id, evs] : project(tr)) CHECK(ref.at(id) == evs);
  }
}

TEST_CASE("trace files round trip bit-exactly through replay") {
  HeapWorld w;
  Gen g(61);
  for (int trial = 0; trial < 60; trial++) {
    Threads ts;
    int n = 1 + g.pick(3);
    for (int i = 0; i < n; i++)
      ts.emplace_back(i + 1, mk::letc(g.heap_comp(3), "z", parse_comp("ret z")));
    uint64_t seed = g.rng();
    auto tr = run(ts, w, make_schedule_seeded(seed), 60, seed);
    auto text = write_trace(tr);
    auto back = read_trace(text, heap_factory);
    CHECK(write_trace(back) == text);
  }
  // tampered traces are rejected
  Threads ts{{1, parse_comp("letc(act(read l0), z. ret z)")}};
  auto tr = run(ts, w, make_schedule_round_robin(), 10, 0);
  auto text = write_trace(tr);
  auto pos = text.find("result=0");
  REQUIRE(pos != std::string::npos);
  auto bad = text;
  bad.replace(pos, 8, "result=9");
  CHECK_THROWS_AS(read_trace(bad, heap_factory), std::runtime_error);
  CHECK_THROWS_AS(read_trace(text, [](const std::string&) {
                    return std::shared_ptr<World>();
                  }),
                  std::runtime_error);
}
