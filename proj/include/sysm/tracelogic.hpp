#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sysm/semantics.hpp"
#include "sysm/syntax.hpp"

namespace sysm {

// Predicates are registered per world. Event predicates hold exactly at the
// time of the matching ActOk step; their argument order is
// (thread, action args..., result if included, time).
struct Valuation;
struct TimeVal;
struct PredicateDef {
  enum class Kind { Event, State, Structural };
  std::string name;
  int arity = 0;
  Kind kind = Kind::Event;
  std::string fromAction;
  bool includeResult = false;
  // State: (valuation, time, args-without-time, fuel);
  // Structural: (valuation, args, fuel)
  std::function<bool(const Valuation&, const TimeVal&,
                     const std::vector<ExprP>&, long long)>
      stateEval;
  std::function<bool(const Valuation&, const std::vector<ExprP>&, long long)>
      structEval;
};
using Registry = std::map<std::string, PredicateDef>;

// Read/Write/mem plus the world-independent eval/start/stuck predicates
Registry heap_registry();
void add_core_predicates(Registry& r);

// logical time: -inf < 0 < 1 < ... ; 0 and -inf name the initial configuration
struct TimeVal {
  bool neginf = false;
  BigNat n;
  bool operator<(const TimeVal& o) const {
    if (neginf) return !o.neginf;
    if (o.neginf) return false;
    return n < o.n;
  }
  bool operator==(const TimeVal& o) const {
    return neginf == o.neginf && (neginf || n == o.n);
  }
};
std::optional<TimeVal> as_time(const ExprP& normalForm);

struct Valuation {
  const Trace* trace = nullptr;
  const Registry* reg = nullptr;
  struct Ev {
    long long u;
    BigNat thread;
    std::vector<ExprP> args;
    ExprP result;
  };
  std::map<std::string, std::vector<Ev>> events;  // by action head, time order
  std::vector<ExprP> uB, uU;  // bounded quantifier universes

  const Configuration& config_at(const TimeVal& u) const;
};
Valuation build_valuation(const Trace& t, const Registry& r);

struct SatOptions {
  long long fuel = 10000;
  bool useTriggers = true;
  std::vector<std::string>* warnings = nullptr;
};

// expands @/on-interval into the core connectives; @u appended to predicate
// atoms as a final time argument
FormP expand_abbrev(const FormP& f);

bool sat(const Valuation& v, const FormP& closed, const SatOptions& opt = {});
// independent evaluator: no event index, no triggers, fresh recursion over the
// raw trace; used as the equivalence oracle
bool sat_naive(const Trace& t, const Registry& r, const FormP& closed,
               long long fuel = 10000);

bool sat_start(const Trace& t, const BigNat& threadId, const CompP& c,
               const TimeVal& u);

// recognizes invariants that are pointwise in time (forall block, interval
// guard on one quantified time variable, body free of the endpoints), which
// compose across adjacent intervals by construction
bool check_trace_composable_shape(const FormP& phi, const std::string& ub,
                                  const std::string& ue, const std::string& i);

}  // namespace sysm
