#pragma once

#include <random>
#include <string>

#include "sysm/syntax.hpp"

// random term generator shared by the test suites
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}
  int pick(int n) { return (int)(rng() % n); }
  std::string var_name() {
    static const char* names[] = {"x", "y", "z", "w"};
    return names[pick(4)];
  }
  sysm::ExprP expr(int depth) {
    using namespace sysm;
    if (depth <= 0) {
      switch (pick(5)) {
        case 0: return mk::var(var_name());
        case 1: return mk::cbool(pick(2) == 0);
        case 2: return mk::cnat(BigNat(pick(100)));
        case 3: return mk::cloc(BigNat(pick(4)));
        default: return mk::ctid(BigNat(pick(4)));
      }
    }
    switch (pick(8)) {
      case 0: return mk::lam(var_name(), expr(depth - 1));
      case 1: return mk::app(expr(depth - 1), expr(depth - 1));
      case 2: return mk::plus(expr(depth - 1), expr(depth - 1));
      case 3: return mk::tylam("X", expr(depth - 1));
      case 4: return mk::tyapp(expr(depth - 1));
      case 5: return mk::comp(comp(depth - 1));
      default: return expr(0);
    }
  }
  sysm::CompP comp(int depth) {
    using namespace sysm;
    if (depth <= 0) return mk::ret(expr(0));
    switch (pick(8)) {
      case 0: return mk::ret(expr(depth - 1));
      case 1: return mk::act("write", {expr(0), expr(0)});
      case 2: return mk::letc(comp(depth - 1), var_name(), comp(depth - 1));
      case 3: return mk::lete(expr(depth - 1), var_name(), comp(depth - 1));
      case 4: return mk::seqc(comp(depth - 1), comp(depth - 1));
      case 5: return mk::seqe(expr(depth - 1), comp(depth - 1));
      case 6: return mk::cif(expr(depth - 1), comp(depth - 1), comp(depth - 1));
      default: {
        auto f = var_name(), x = var_name();
        return mk::fixapp(mk::fix(f, x, comp(depth - 1)), expr(depth - 1));
      }
    }
  }
  // closed computation over the heap interface, suitable for running
  sysm::CompP heap_comp(int depth) {
    using namespace sysm;
    auto leaf = [&]() -> ExprP {
      switch (pick(3)) {
        case 0: return mk::cnat(BigNat(pick(50)));
        case 1: return mk::cloc(BigNat(pick(4)));
        default: return mk::cbool(pick(2) == 0);
      }
    };
    if (depth <= 0) return mk::ret(leaf());
    switch (pick(6)) {
      case 0: return mk::act("read", {mk::cloc(BigNat(pick(4)))});
      case 1: return mk::act("write", {mk::cloc(BigNat(pick(4))), leaf()});
      case 2:
        return mk::letc(heap_comp(depth - 1), "x", heap_comp(depth - 1));
      case 3: return mk::seqc(heap_comp(depth - 1), heap_comp(depth - 1));
      case 4:
        return mk::cif(mk::cbool(pick(2) == 0), heap_comp(depth - 1),
                       heap_comp(depth - 1));
      default: return mk::ret(leaf());
    }
  }
};
