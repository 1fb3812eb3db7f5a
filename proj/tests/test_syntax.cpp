#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sysm/parser.hpp"
#include "sysm/syntax.hpp"

using namespace sysm;

TEST_CASE("parse of printed term is alpha-equal: expressions") {
  Gen g(1);
  for (int t = 0; t < 300; t++) {
    auto e = g.expr(4);
    auto back = parse_expr(print(e));
    CHECK(alpha_eq(e, back));
    // canonical print is itself parseable and alpha-equal
    auto canon = parse_expr(print(e, true));
    CHECK(alpha_eq(e, canon));
    CHECK(print(e, true) == print(canon, true));
  }
}

TEST_CASE("parse of printed term is alpha-equal: computations") {
  Gen g(2);
  for (int t = 0; t < 300; t++) {
    auto c = g.comp(4);
    auto back = parse_comp(print(c));
    CHECK(alpha_eq(c, back));
    CHECK(alpha_eq(c, parse_comp(print(c, true))));
  }
}

TEST_CASE("alpha equivalence ignores binder names, distinguishes structure") {
  auto a = parse_expr("lam x. lam y. (x y)");
  auto b = parse_expr("lam u. lam v. (u v)");
  auto c = parse_expr("lam u. lam v. (v u)");
  CHECK(alpha_eq(a, b));
  CHECK(!alpha_eq(a, c));
  CHECK(alpha_eq(a, a));
  CHECK(alpha_eq(b, a));  // symmetric
  auto d = parse_expr("lam p. lam q. (p q)");
  CHECK((alpha_eq(a, b) && alpha_eq(b, d) && alpha_eq(a, d)));  // transitive
}

TEST_CASE("substitution is capture avoiding") {
  // (lam y. x)[y/x] must not capture: result is lam y'. y with y' != y
  auto t = parse_expr("lam y. x");
  auto r = subst1(t, "x", mk::var("y"));
  CHECK(r->k == Expr::K::Lam);
  CHECK(r->name != "y");
  CHECK(r->a->k == Expr::K::Var);
  CHECK(r->a->name == "y");
  // substituting a bound variable is a no-op
  auto t2 = parse_expr("lam x. x");
  CHECK(alpha_eq(subst1(t2, "x", mk::cnat(BigNat(5))), t2));
  // parallel substitution is simultaneous, not sequential
  auto t3 = parse_expr("(x + y)");
  Sub s{{"x", mk::var("y")}, {"y", mk::var("x")}};
  CHECK(print(subst(t3, s)) == "(y + x)");
}

TEST_CASE("free variables of substitution result are contained in expected set") {
  Gen g(3);
  for (int t = 0; t < 200; t++) {
    auto e = g.expr(4);
    auto r = g.expr(2);
    auto out = subst1(e, "x", r);
    auto fe = fv(e), fr = fv(r), fo = fv(out);
    std::set<std::string> expect = fe;
    expect.erase("x");
    if (fe.count("x"))
      for (auto& v : fr) expect.insert(v);
    for (auto& v : fo) CHECK(expect.count(v) == 1);
    if (!fe.count("x")) CHECK(alpha_eq(out, e));
  }
}

TEST_CASE("free actions are collected through every computation form") {
  auto c = parse_comp(
      "letc(act(read l0), x. seqc(act(write x 0), "
      "if x then ret(comp(act(send x))) else act(extend 17 x)))");
  auto fa = free_actions(c);
  CHECK(fa == std::set<std::string>{"read", "write", "send", "extend"});
  CHECK(free_actions(parse_comp("ret(lam x. x)")).empty());
}

TEST_CASE("reference programs parse") {
  auto p1 = parse_program("ret(true)");
  CHECK(p1.c);
  CHECK(p1.c->k == Computation::K::Ret);

  auto p2 = parse_program("comp(letc(act(read l0), x. ret x))");
  CHECK(p2.e);
  CHECK(p2.e->k == Expr::K::Comp);

  auto p3 = parse_program(
      "fix f(x). seqc(act(write x 0), seqc(act(read x), lete(f (x+1), z. ret z)))");
  CHECK(p3.c);
  CHECK(p3.c->k == Computation::K::Fix);
  CHECK(alpha_eq(p3.c, parse_comp(print(p3.c))));

  CHECK_THROWS_AS(parse_program("ret x"), ParseError);  // unbound variable
  CHECK_THROWS_AS(parse_program("ret(lam. x)"), ParseError);
}

TEST_CASE("formula round trip") {
  const char* samples[] = {
      "TT",
      "FF",
      "(TT /\\ ~FF)",
      "(mem(l0, 5, u) => (u < v \\/ u = v))",
      "forall x:b. exists u:unt. (eval(x, u) @ u)",
      "(Write(i, l, v) on (ub, ue])",
      "(Read(i) on [0, ue))",
      "((x + 1) == y)",
      "(start(i, comp(ret(true)), 0) => -inf <= u)",
      "appf((forall y:b. y == x), 3)",
  };
  for (auto s : samples) {
    auto f = parse_formula(s);
    auto back = parse_formula(print(f));
    CHECK(alpha_eq(f, back));
    CHECK(print(f, true) == print(back, true));
  }
  auto f = parse_formula("forall x:unt. (P(x) => Q(x))");
  CHECK(alpha_eq(f, parse_formula("forall z:unt. (P(z) => Q(z))")));
  CHECK(!alpha_eq(f, parse_formula("forall z:unt. (Q(z) => P(z))")));
}

TEST_CASE("formula substitution respects quantifier binding") {
  auto f = parse_formula("forall x:unt. P(x, y)");
  auto r = subst1(f, "y", mk::var("x"));
  CHECK(r->k == Formula::K::Forall);
  CHECK(r->name != "x");  // renamed to avoid capturing the substituted x
  CHECK(alpha_eq(subst1(f, "x", mk::cnat(BigNat(7))), f));
}

TEST_CASE("type round trip") {
  const char* samples[] = {
      "b",
      "unt",
      "(Pi x:b. (Pi y:unt. b))",
      "(All X. (Pi x:X. X))",
      "tcmp(u1.u2.i.(x:b. x == true, TT))",
  };
  for (auto s : samples) {
    auto t = parse_type(s);
    CHECK(alpha_eq(t, parse_type(print(t))));
  }
  auto ct = parse_comp_type("PiC y:b. u1.u2.i.(x:b. x == y, TT)");
  CHECK(ct.isFixPi);
  CHECK(ct.inner.x == "x");
  auto back = parse_comp_type(print(ct));
  CHECK(print(back) == print(ct));
  CHECK(print(parse_comp_type("u1.u2.i.(x:unt. TT, TT)")).find("PiC") ==
        std::string::npos);
}

TEST_CASE("type variable substitution instantiates quantifier annotations") {
  auto t = parse_type("(All X. (Pi x:X. X))");
  auto inst = subst_tyvar(t->cod, "X", mk::base());
  CHECK(print(inst) == print(parse_type("(Pi x:b. b)")));
  auto f = parse_formula("forall x:X. P(x)");
  auto fi = subst_tyvar(f, "X", mk::unt());
  CHECK(print(fi) == print(parse_formula("forall x:unt. P(x)")));
}

TEST_CASE("symbolic terms round trip and compare structurally") {
  const char* samples[] = {
      "@nSummary", "42", "(@a||(1||2))", "H((@k||@m))", "E(K(3),@m)",
      "M(K(0),(@tag||7))", "CH{ret(true)}",
  };
  for (auto s : samples) {
    auto t = parse_sym(s);
    CHECK(sym_eq(t, parse_sym(print_sym(t))));
  }
  CHECK(!sym_eq(parse_sym("H(@a)"), parse_sym("H(@b)")));
  CHECK(sym_eq(parse_sym("(@a||@b)"), parse_sym("( @a || @b )")));
  // sym constants embed in expressions
  auto e = parse_expr("sym{E(K(1),(@st||@tag))}");
  CHECK(e->k == Expr::K::Const);
  CHECK(alpha_eq(e, parse_expr(print(e))));
}

TEST_CASE("code hash identifies programs up to alpha equivalence") {
  auto a = parse_comp("letc(act(read l0), x. ret x)");
  auto b = parse_comp("letc(act(read l0), q. ret q)");
  auto c = parse_comp("letc(act(read l1), x. ret x)");
  CHECK(sym_eq(mk::scodehash(print(a, true)), mk::scodehash(print(b, true))));
  CHECK(!sym_eq(mk::scodehash(print(a, true)), mk::scodehash(print(c, true))));
}

TEST_CASE("node paths address mutation points") {
  auto c = parse_comp("letc(act(read l0), x. seqc(act(write x 0), ret x))");
  auto root = node_at_path(c, "");
  REQUIRE(root);
  CHECK(root->c == c.get());
  auto rd = node_at_path(c, "/0");
  REQUIRE(rd);
  REQUIRE(rd->c);
  CHECK(rd->c->k == Computation::K::Act);
  auto arg = node_at_path(c, "/1/0/1");  // second argument of the write
  REQUIRE(arg);
  REQUIRE(arg->e);
  CHECK(print(ExprP(c, arg->e)) == "0");
  CHECK(!node_at_path(c, "/7"));
}

TEST_CASE("parse errors carry positions and reject reserved words") {
  CHECK_THROWS_AS(parse_expr("lam ret. x"), ParseError);
  CHECK_THROWS_AS(parse_comp("letc(ret 1, x ret x)"), ParseError);
  CHECK_THROWS_AS(parse_formula("forall x. P"), ParseError);
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("(x"), ParseError);
  CHECK_THROWS_AS(parse_sym("H(@a"), ParseError);
  try {
    parse_expr("lam x.\n  @");
    CHECK(false);
  } catch (const ParseError& pe) {
    CHECK(pe.line == 2);
  }
}
