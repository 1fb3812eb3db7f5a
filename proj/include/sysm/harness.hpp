#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sysm/semantics.hpp"
#include "sysm/syntax.hpp"
#include "sysm/tracelogic.hpp"
#include "sysm/typechecker.hpp"

namespace sysm {

struct AdversaryProfile {
  std::string name = "confined";
  std::vector<std::pair<std::string, ExprP>> interfaces;
  int sizeBudget = 24;
  bool allowRawActions = false;  // chaos mode
  uint64_t seed = 0;
};

enum class PostKind { Partial, Invariant, Both };

struct PostconditionSpec {
  BigNat subjectThread = 0;
  CompP comp;
  ClosedCompType compType;  // must be closed and non-Pi
  PostKind which = PostKind::Both;
};

struct Verdict {
  bool found = false;  // the computation started on the subject thread
  bool returned = false;
  bool ok = false;
  long long uB = 0, uE = 0;  // located interval (uE = return or trace end)
  ExprP value;               // returned value, when any
  std::string detail;        // SUBJECT_NOT_FOUND / first counterexample time
};

// Locates where spec.comp executes on spec.subjectThread via the trace's
// frame ids, then checks the declared partial/invariant assertions with the
// interval endpoints, thread id and returned value substituted in. Partial
// assertions are vacuous when the computation never returns (fuel ran out);
// invariants are checked at every prefix from start through return inclusive.
Verdict check_postconditions_on_trace(const Trace& t,
                                      const PostconditionSpec& spec,
                                      const Registry& reg,
                                      const SatOptions& opt = {});
// Oracle twin: no frame ids (return = stack dropping below its starting
// depth), no event index (sat_naive), full rescan per prefix.
Verdict check_postconditions_naive(const Trace& t,
                                   const PostconditionSpec& spec,
                                   const Registry& reg, long long fuel = 10000);

// Seeded random closed term over lam/app/comp/letc/lete/ret/fix/if and the
// profile interfaces (free variables name interfaces only). Chaos profiles
// may also inject raw actions over the heap signature.
ExprP generate_adversary(const AdversaryProfile& p);
// The same term with the interface values substituted in and coerced to a
// runnable computation.
CompP adversary_computation(const AdversaryProfile& p);

struct CampaignReport {
  bool typechecked = false;
  long long runs = 0;
  long long violations = 0;
  long long soundnessAlarms = 0;
  long long expectedNegatives = 0;
  std::vector<std::string> lines;  // one line per violation, with repro command
  std::string render() const;
};

// Runs the typechecked program against generated adversaries under seeded
// schedules and checks every spec on every trace. A violation with a confined
// adversary is a SOUNDNESS_ALARM (it falsifies this implementation); a chaos
// adversary breaking a globally quantified invariant is EXPECTED_NEGATIVE.
CampaignReport fuzz_robust_safety(const AnnotatedProgram& program,
                                  const std::vector<PostconditionSpec>& specs,
                                  const std::vector<AdversaryProfile>& profiles,
                                  uint64_t nSeeds, long long fuel,
                                  const Registry* reg = nullptr,
                                  const World* world = nullptr,
                                  uint64_t seedStart = 0);

}  // namespace sysm
