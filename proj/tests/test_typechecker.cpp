#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sysm/typechecker.hpp"

using namespace sysm;

namespace {

ProverOptions fast_neg() {
  ProverOptions o;
  o.autoDepth = 5;
  o.autoBudget = 8000;
  return o;
}

const char* NO_WRITE_INV =
    "forall u:b. forall l:unt. forall w:unt."
    " ((u1 < u /\\ u <= u2) => ~Write(i, l, w, u))";

AnnotatedProgram readlet(const std::string& partial, const std::string& inv) {
  std::string sidecar = "at / ctype u1.u2.i.(x:unt. " + partial + ", " + inv +
                        ")\n"
                        "assume forall l:unt. forall v:unt. forall t:b."
                        " forall t2:b. ((mem(l, v, t2) /\\ t <= t2) =>"
                        " mem(l, v, t))\n"
                        "assume forall j:b. forall l:unt. forall w:unt."
                        " forall u:b. ~Write(j, l, w, u)\n";
  return parse_annotated("letc(act(read l0), y. ret y)", sidecar,
                         heap_signature());
}

bool has_fail(const TypeReport& r, const std::string& rule) {
  for (auto& o : r.obligations)
    if (!o.ok && o.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("cnfn follows the three confine rules") {
  Qualifier q{true, "ub", "ue", "i",
              parse_formula("forall u:b. forall l:unt. forall w:unt."
                            " ((ub < u /\\ u <= ue) => ~Write(i, l, w, u))")};
  CHECK(cnfn(parse_type("b"), q));
  CHECK_FALSE(cnfn(parse_type("unt"), q));
  std::string phi =
      "forall u:b. forall l:unt. forall w:unt."
      " ((ub < u /\\ u <= ue) => ~Write(i, l, w, u))";
  std::string good = "tcmp(ub.ue.i.(x:b. " + phi + ", " + phi + "))";
  CHECK(cnfn(parse_type(good), q));
  CHECK(cnfn(parse_type("Pi g:" + good + ". " + good), q));
  // binder renaming is up to alpha
  std::string renamed =
      "tcmp(a.e.j.(x:b. forall u:b. forall l:unt. forall w:unt."
      " ((a < u /\\ u <= e) => ~Write(j, l, w, u)), forall u:b."
      " forall l:unt. forall w:unt. ((a < u /\\ u <= e) =>"
      " ~Write(j, l, w, u))))";
  CHECK(cnfn(parse_type(renamed), q));
  // a tcmp whose partial slot differs from the invariant does not confine
  std::string bad = "tcmp(ub.ue.i.(x:b. TT, " + phi + "))";
  CHECK_FALSE(cnfn(parse_type(bad), q));
}

TEST_CASE("silent allowlist recognizes event-guarded window blocks") {
  std::map<std::string, int> ev{{"Read", 4}, {"Write", 4}};
  // a silent thread performs no events
  CHECK(silent_allowlisted(
      parse_formula("forall t:b. forall l:unt. forall w:unt."
                    " ((ub < t /\\ t <= ue) => ~Read(i, l, w, t))"),
      "ub", "ue", "i", ev));
  // vacuous when the antecedent asserts an event by the silent thread
  CHECK(silent_allowlisted(
      parse_formula("forall t:b. forall l:unt. forall w:unt."
                    " (((ub < t /\\ t <= ue) /\\ Read(i, l, w, t)) =>"
                    " (exists up:b. up < t))"),
      "ub", "ue", "i", ev));
  // another thread's events are not covered
  CHECK_FALSE(silent_allowlisted(
      parse_formula("forall t:b. forall l:unt. forall w:unt."
                    " ((ub < t /\\ t <= ue) => ~Read(j, l, w, t))"),
      "ub", "ue", "i", ev));
  // an unguarded block is not covered
  CHECK_FALSE(silent_allowlisted(
      parse_formula("forall t:b. forall l:unt. forall w:unt."
                    " ~Read(i, l, w, t)"),
      "ub", "ue", "i", ev));
  // facts that are not about events are not covered
  CHECK_FALSE(silent_allowlisted(
      parse_formula("forall t:b. forall l:unt. ((ub < t /\\ t <= ue) =>"
                    " mem(l, 0, t))"),
      "ub", "ue", "i", ev));
}

TEST_CASE("ret of a constant checks against its equational type") {
  auto ap = parse_annotated("ret true",
                            "at / ctype u1.u2.i.(x:b. x == true /\\ TT, TT)\n",
                            heap_signature());
  auto rep = typecheck(ap);
  INFO(rep.render());
  CHECK(rep.ok);
  // strengthening the postcondition beyond the program flips the verdict
  auto bad = parse_annotated("ret true",
                             "at / ctype u1.u2.i.(x:b. x == false, TT)\n",
                             heap_signature());
  auto rep2 = typecheck(bad, fast_neg());
  CHECK_FALSE(rep2.ok);
  CHECK(has_fail(rep2, "ret-partial"));
}

TEST_CASE("read-let checks at the memory-content type with a no-write "
          "invariant") {
  auto ap = readlet(
      "forall l:unt. forall v:unt. ((eval(l0, l) /\\ mem(l, v, u2)) =>"
      " x == v)",
      NO_WRITE_INV);
  auto rep = typecheck(ap);
  INFO(rep.render());
  CHECK(rep.ok);
}

TEST_CASE("read-let mutations are rejected with localized diagnostics") {
  // an unsupported postcondition
  auto ap = readlet("x == 0", NO_WRITE_INV);
  auto rep = typecheck(ap, fast_neg());
  CHECK_FALSE(rep.ok);
  CHECK(has_fail(rep, "ret-partial"));

  // a writing program against the no-write invariant
  auto wr = parse_annotated(
      "letc(act(write l0 0), y. ret y)",
      std::string("at / ctype u1.u2.i.(x:unt. TT, ") + NO_WRITE_INV + ")\n",
      heap_signature());
  auto rep2 = typecheck(wr, fast_neg());
  CHECK_FALSE(rep2.ok);
  // the head's invariant feeds the first gluing window
  CHECK(has_fail(rep2, "seqci-case1"));
}

TEST_CASE("fixpoint loop checks: bottom partial, every read preceded by an "
          "own write") {
  std::string inv =
      "forall u:b. forall l:unt. forall w:unt."
      " (((u1 < u /\\ u <= u2) /\\ Read(i, l, w, u)) =>"
      " (exists up:b. exists v:unt. (up < u /\\ Write(i, l, v, up))))";
  std::string prog =
      "fix f(x). seqc(act(write x 0), seqc(act(read x),"
      " lete(f (x + 1), z. ret z)))";
  auto ap = parse_annotated(
      prog, "at / ctype PiC x:b. u1.u2.i.(y:unt. FF, " + inv + ")\n",
      heap_signature());
  auto rep = typecheck(ap);
  INFO(rep.render());
  CHECK(rep.ok);

  // dropping the write leaves the middle window unjustified
  std::string broken =
      "fix f(x). seqc(act(read x), lete(f (x + 1), z. ret z))";
  auto bad = parse_annotated(
      broken, "at / ctype PiC x:b. u1.u2.i.(y:unt. FF, " + inv + ")\n",
      heap_signature());
  auto rep2 = typecheck(bad, fast_neg());
  CHECK_FALSE(rep2.ok);
}

TEST_CASE("confine accepts action-free closed terms at pointwise invariant "
          "types") {
  AnnotatedProgram ap;
  ap.prog = parse_program("ret true");
  ap.sig = heap_signature();
  ProverOptions opt;
  TypeChecker tc(ap, opt);
  std::string phi =
      "forall u:b. forall l:unt. forall w:unt."
      " ((ub < u /\\ u <= ue) => ~Write(i, l, w, u))";
  Qualifier q{true, "ub", "ue", "i", parse_formula(phi)};
  std::string cty = "tcmp(ub.ue.i.(x:b. " + phi + ", " + phi + "))";
  TypeP tau = parse_type("Pi g:" + cty + ". " + cty);
  TypeChecker::Ctx ctx;
  ctx.q = q;
  CHECK(tc.check_confine(ctx, "", parse_expr("lam g. g"), tau, q));

  // an embedded action is flagged
  TypeChecker tc2(ap, opt);
  CHECK_FALSE(tc2.check_confine(ctx, "",
                                parse_expr("comp (act(write l0 0))"),
                                parse_type(cty), q));
  bool sawActions = false;
  for (auto& o : tc2.obligations)
    if (o.rule == "confine-actions" && !o.ok) sawActions = true;
  CHECK(sawActions);

  // an escaping free variable is flagged
  TypeChecker tc3(ap, opt);
  CHECK_FALSE(tc3.check_confine(ctx, "", parse_expr("lam g. h"), tau, q));
}

TEST_CASE("eq rule accepts provably equal twins and nothing else") {
  AnnotatedProgram ap;
  ap.prog = parse_program("ret true");
  ap.sig = heap_signature();
  TypeChecker tc(ap, fast_neg());
  TypeChecker::Ctx ctx;
  ctx.gamma["service"] = parse_type("Pi x:b. b");
  ctx.gamma["srvc"] = parse_type("unt");
  ctx.delta.push_back(parse_formula("srvc == service"));
  CHECK(tc.check_eq_rule(ctx, "", parse_expr("srvc"), parse_expr("service"),
                         parse_type("Pi x:b. b")));
  TypeChecker tc2(ap, fast_neg());
  ctx.delta.clear();
  CHECK_FALSE(tc2.check_eq_rule(ctx, "", parse_expr("srvc"),
                                parse_expr("service"),
                                parse_type("Pi x:b. b")));
}

TEST_CASE("action kinds reject unknown heads and arity mismatches") {
  AnnotatedProgram ap;
  ap.prog = parse_program("ret true");
  ap.sig = heap_signature();
  TypeChecker tc(ap, fast_neg());
  TypeChecker::Ctx ctx;
  auto c1 = parse_comp("act(launch l0)");
  CHECK_FALSE(tc.check_action_kind(ctx, "", c1->act).has_value());
  auto c2 = parse_comp("act(read l0 l1)");
  CHECK_FALSE(tc.check_action_kind(ctx, "", c2->act).has_value());
  auto c3 = parse_comp("act(read l0)");
  auto k = tc.check_action_kind(ctx, "", c3->act);
  REQUIRE(k.has_value());
  // the location argument is substituted into the kind's assertions
  CHECK(print(k->partial).find("l0") != std::string::npos);
}

TEST_CASE("if branches check under the matching eval hypothesis") {
  auto ap = parse_annotated(
      "if true then ret 1 else ret 0",
      "at / ctype u1.u2.i.(x:b. x == 1 \\/ x == 0, TT)\n",
      heap_signature());
  auto rep = typecheck(ap);
  INFO(rep.render());
  CHECK(rep.ok);
}

TEST_CASE("report prints one verdict line per obligation") {
  auto ap = parse_annotated("ret true",
                            "at / ctype u1.u2.i.(x:b. x == true /\\ TT, TT)\n",
                            heap_signature());
  auto rep = typecheck(ap);
  auto text = rep.render();
  size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == rep.obligations.size() + 1);
  CHECK(text.find("TYPECHECK PASS") != std::string::npos);
  for (auto& o : rep.obligations) CHECK(text.find(o.rule) != std::string::npos);
}
