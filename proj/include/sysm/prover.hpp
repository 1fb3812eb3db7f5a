#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sysm/syntax.hpp"

namespace sysm {

// Theta: time variables (type b); GammaL/Gamma: logical / program variables;
// Delta: hypotheses. Sigma is carried for well-formedness only.
struct Sequent {
  std::vector<std::string> theta;
  std::map<std::string, TypeP> gammaL;
  std::map<std::string, TypeP> gamma;
  std::vector<FormP> delta;
  FormP goal;
  const Signature* sig = nullptr;

  bool bound(const std::string& x) const;
  std::set<std::string> names() const;  // everything a fresh var must avoid
};

struct ProofScript;
using ProofP = std::shared_ptr<const ProofScript>;

struct HonestData {
  ExprP thread;   // I
  CompP comp;     // c
  ExprP time;     // u
  std::string u1, u2, i;  // invariant binders
  FormP inv;      // the invariant formula
};

struct ProofScript {
  enum class K {
    Init, TopI, BotE, Cut, NotI, NotE, AndI, AndE, OrI, OrE,
    ImpI, ImpE, ForallI, ForallE, ExistsI, ExistsE,
    EqRefl, EqSym, EqTrans, EqSubst, StructEval, TimeArith, Auto, Honest
  };
  K k{};
  FormP phi;    // Cut/NotE/AndE/OrE/ImpE/ForallE/ExistsE principal formula;
                // EqSubst template
  FormP phi2;   // EqSubst equality a == b
  ExprP term;   // ForallE/ExistsI instantiation; EqTrans middle term
  std::string var;  // ForallI/ExistsE/EqSubst variable
  int idx = 0;      // AndE / OrI projection (1 or 2)
  std::vector<ProofP> subs;
  std::shared_ptr<HonestData> honest;
};

namespace mkp {
ProofP init();
ProofP topI();
ProofP botE();
ProofP cut(FormP phi, ProofP p1, ProofP p2);
ProofP notI(ProofP p);
ProofP notE(FormP phi, ProofP p1, ProofP p2);
ProofP andI(ProofP p1, ProofP p2);
ProofP andE(int i, FormP conj, ProofP p);
ProofP orI(int i, ProofP p);
ProofP orE(FormP disj, ProofP p1, ProofP p2, ProofP p3);
ProofP impI(ProofP p);
ProofP impE(FormP ante, ProofP pImp, ProofP pAnte);
ProofP forallI(const std::string& x, ProofP p);
ProofP forallE(FormP all, ExprP t, ProofP p);
ProofP existsI(ExprP t, ProofP p);
ProofP existsE(FormP ex, const std::string& x, ProofP p1, ProofP p2);
ProofP eqRefl();
ProofP eqSym(ProofP p);
ProofP eqTrans(ExprP mid, ProofP p1, ProofP p2);
ProofP eqSubst(const std::string& x, FormP tmpl, FormP eq, ProofP pEq,
               ProofP pInst);
ProofP structEval();
ProofP timeArith();
ProofP autoLeaf();
ProofP honest(HonestData d);
}  // namespace mkp

// validates an invariant-typing derivation for rule Honest without making the
// prover depend on the type checker
using HonestOracle =
    std::function<bool(const CompP& c, const CompType& invType)>;

struct CheckResult {
  bool ok = false;
  std::string error;  // includes a /path/into/the/script on rejection
};

struct ProverOptions {
  long long fuel = 10000;   // normalization fuel for equality leaves
  int autoDepth = 5;        // depth for Auto leaves
  long long autoBudget = 40000;  // node budget per auto search iteration
  const HonestOracle* honest = nullptr;
};

CheckResult check_proof(const Sequent& s, const ProofP& p,
                        const ProverOptions& opt = {});

// ---- ordering fragment ----
// terms: time variables (naturals), natural constants, -inf, var + constant
struct OrderAtom {
  Formula::Cmp cmp{};
  ExprP lhs, rhs;
};
bool solve_ordering(const std::vector<OrderAtom>& assume,
                    const OrderAtom& goal);
// decides Delta |= goal for goal built from ordering atoms with the
// propositional connectives; assumptions contribute their positive
// conjunctive ordering atoms
bool time_entails(const std::vector<FormP>& delta, const FormP& goal);

ProofP auto_prove(const Sequent& s, int depth,
                  const ProverOptions& opt = {});

// ---- script files (.sysp) ----
std::string print_proof(const ProofP& p);
ProofP parse_proof(const std::string& text);

// script mutation points for the rejection tests: number of nodes, and a
// structural path to each
int proof_size(const ProofP& p);
ProofP proof_node_at(const ProofP& p, int index);

}  // namespace sysm
