#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sysm/parser.hpp"
#include "sysm/prover.hpp"
#include "sysm/syntax.hpp"
#include "sysm/tracelogic.hpp"

namespace sysm {

// Inv(ub.ue.i.phi); inv=false is the plain structural qualifier
struct Qualifier {
  bool inv = false;
  std::string ub, ue, i;
  FormP phi;
};
bool qualifier_eq(const Qualifier& a, const Qualifier& b);

// Per-node annotations keyed by AST path. Declarative premises that the rules
// would otherwise have to guess (intermediate postconditions, silent-segment
// formulas, the fix auxiliary invariant, Eq twins, Confine sites) live here.
struct Annotation {
  std::optional<ClosedCompType> compTy;   // declared computation type
  TypeP exprTy;                           // declared expression type
  ExprP eqTo;                             // Eq rule: the structurally typed twin
  FormP silent;                           // silent-segment formula
  FormP fix0;                             // fix auxiliary invariant
  std::optional<Qualifier> qual;          // qualifier switch for the subtree
  std::optional<Qualifier> confine;       // Confine site
  std::map<std::string, ProofP> scripts;  // obligation tag -> proof script
};

struct AnnotatedProgram {
  Program prog;
  Signature sig;
  std::map<std::string, Annotation> annotations;  // AST path -> annotation
  std::vector<FormP> assumptions;                 // ambient hypotheses
};

struct Obligation {
  std::string path;
  std::string rule;
  bool ok = false;
  std::string detail;  // failing sequent or error text
};

struct TypeReport {
  bool ok = true;
  std::vector<Obligation> obligations;
  std::string render() const;  // one line per obligation
};

// action kinds for the heap world's read/write
Signature heap_signature();

// confine relation: Base always, Pi componentwise, tcmp when both assertion
// slots are exactly phi (up to renaming of the binder triple) and the result
// type confines; everything else (unt, type variables, All) does not confine
bool cnfn(const TypeP& tau, const Qualifier& phi);

// Sound silent-segment schemas: conjunctions of universally closed guarded
// blocks over (ub, ue] where either the antecedent contains an event atom
// performed by thread i at the guarded time, or the conclusion negates one.
// A silent thread performs no events, so both are vacuously / directly true.
bool silent_allowlisted(const FormP& phi, const std::string& ub,
                        const std::string& ue, const std::string& i,
                        const std::map<std::string, int>& eventArity);

class TypeChecker {
 public:
  // eventArity (predicate name -> arity) is taken from reg's Event entries;
  // reg defaults to heap_registry()
  TypeChecker(const AnnotatedProgram& prog, ProverOptions opt,
              const Registry* reg = nullptr);

  struct Win {
    std::string u1, u2, i;
  };
  struct Ctx {
    std::string u;  // expression-typing time variable
    std::vector<std::string> theta;
    std::map<std::string, TypeP> gammaL;
    std::map<std::string, TypeP> gamma;
    std::vector<FormP> delta;
    Qualifier q;
  };

  bool check_expr(Ctx ctx, const std::string& path, const ExprP& e,
                  const TypeP& tau);
  std::optional<TypeP> synth_expr(Ctx& ctx, const std::string& path,
                                  const ExprP& e);
  bool check_eq_rule(Ctx& ctx, const std::string& path, const ExprP& e,
                     const ExprP& to, const TypeP& tau);
  bool check_confine(Ctx ctx, const std::string& path, const ExprP& e,
                     const TypeP& tau, const Qualifier& phi);
  // returns the kind instantiated with the action's arguments
  std::optional<CompType> check_action_kind(Ctx& ctx, const std::string& path,
                                            const Action& a);
  bool check_silent_judgment(Ctx& ctx, const std::string& path,
                             const std::string& tag, const Win& w,
                             const FormP& phi);
  bool check_comp_partial(Ctx ctx, const std::string& path, const CompP& c,
                          const Win& w, const CompType& ct);
  bool check_comp_invariant(Ctx ctx, const std::string& path, const CompP& c,
                            const Win& w, const CompType& ct);
  bool check_comp(const Ctx& ctx, const std::string& path, const CompP& c,
                  const Win& w, const CompType& ct);
  bool check_fix(Ctx ctx, const std::string& path, const Computation& fx,
                 const ClosedCompType& cct);

  // whole-program driver; fills obligations and returns the report
  TypeReport run();

  std::vector<Obligation> obligations;

 private:
  const AnnotatedProgram& prog;
  ProverOptions opt;
  std::map<std::string, int> eventArity;
  std::set<std::string> checkedFix;

  const Annotation* annot(const std::string& path) const;
  bool record(const std::string& path, const std::string& rule, bool ok,
              const std::string& detail = "");
  bool discharge(const std::string& path, const std::string& tag, Sequent s);
  bool entail(const Ctx& ctx, const std::string& path, const std::string& tag,
              const std::vector<FormP>& hyps, const FormP& goal,
              const std::map<std::string, TypeP>& extraL = {});
  FormP no_events(const Win& w) const;
  bool comp_intro(Ctx ctx, const std::string& path, const CompP& c,
                  const CompType& declared);
  void apply_qual(Ctx& ctx, const std::string& path, bool recordIt);
  std::optional<CompType> act_kind(Ctx& ctx, const std::string& path,
                                   const Action& a);
  std::optional<CompType> child_ct(Ctx& ctx, const std::string& path,
                                   const CompP& c);
  std::optional<CompType> seq_head_ct(Ctx& ctx, const std::string& path,
                                      const Computation& c, bool recordErr);
  bool seq_tail(Ctx& ctx, const std::string& path, const Computation& c,
                const Win& w, const CompType& ct, const CompType& ct1,
                bool partialMode);
  bool if_branch(Ctx ctx, const std::string& path, const ExprP& cond,
                 const CompP& branch, int idx, const Win& w,
                 const CompType& ct, bool partialMode);
  std::optional<ClosedCompType> fixapp_pi(const std::string& path) const;
  std::map<std::string, std::optional<CompType>> ctMemo, kindMemo;
};

// opt defaults to a budget tuned for the shipped obligation corpus
TypeReport typecheck(const AnnotatedProgram& p,
                     std::optional<ProverOptions> opt = {},
                     const Registry* reg = nullptr);

// sidecar annotation files (.syst); throws std::runtime_error on bad input
AnnotatedProgram parse_annotated(const std::string& programText,
                                 const std::string& sidecarText,
                                 const Signature& sig);

}  // namespace sysm
