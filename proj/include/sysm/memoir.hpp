#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sysm/semantics.hpp"
#include "sysm/syntax.hpp"
#include "sysm/tracelogic.hpp"

namespace sysm {

// ---- TPM world ----
// PCRs hold symbolic hash chains; NVRAM locations carry an optional
// (pcr, value) permission; at most one late-launch session is active and the
// scheduler blocks every other thread while it runs.
struct TpmNV {
  SymP val;
  bool hasPerm = false;
  BigNat permPcr;
  SymP permVal;
};
struct TpmState : WState {
  std::map<BigNat, SymP> pcrs;  // absent = default 0
  std::map<BigNat, TpmNV> nvram;
  std::optional<BigNat> session;  // active late-launch thread
  SymP sessionChain;              // PCR17 value measured at ll_enter
  std::set<BigNat> llThreads;     // threads spawned by ll_enter
  std::set<BigNat> exited;        // ll threads whose session ended
  std::vector<SymP> netlog;       // public network, append only
  BigNat nextKey = 0;
};

struct TpmWorld : World {
  std::string id() const override { return "tpm"; }
  WStateP initial_state() const override;
  NextResult next(const WStateP& s, const std::string& head,
                  const std::vector<ExprP>& args, const BigNat& thread,
                  const BigNat& freshTid) const override;
  bool schedulable(const WStateP& s, const BigNat& tid) const override;
};

// ground expression -> symbolic message; code (lam/comp/...) becomes its
// CodeHash, so hashing or measuring a program is hashing its canonical text
SymP to_sym(const ExprP& ground);
SymP tpm_extend(const SymP& cur, const SymP& v);  // Hash(cur || v)
// PCR17 right after ll_enter(f, x): hash_chain(-1, code_hash(f))
SymP ll_measurement(const ExprP& module);
// PCR17 after runmodule measures its service
SymP memoir_shash(const ExprP& module, const ExprP& service);

// event/state/structural predicates for TPM traces
Registry memoir_registry();

// Action kinds for the TPM world. Every kind carries the PCR-protection
// invariant: the acting thread resets no PCR and only ever extends the
// measurement register (17, the platform policy the kinds are specialized
// to); extend_pcr's own kind is parameterized by the target register, so a
// program touching any other PCR fails to glue.
Signature memoir_signature();
// that invariant over an explicit binder triple, as annotation text
std::string memoir_pcr_invariant(const std::string& u1, const std::string& u2,
                                 const std::string& i);
// runmodule plus the sidecar declaring it at
//   Pi sv:(confined service type). tcmp(u1.u2.i.(x:unt. TT, pcr-protection))
// parse with memoir_signature() and typecheck against memoir_registry()
std::pair<std::string, std::string> memoir_runmodule_annotated();

// ---- the case study programs ----
// runmodule as a module value for ll_enter(runmodule, service): reads its
// call (INIT or (snapshot, request) pair) from the network log, then follows
// the initialize / execute phases. weakened=true drops the snapshot
// freshness comparison (the rollback-vulnerable variant).
ExprP memoir_runmodule(bool weakened = false);
// append-only store service: INIT -> atom "empty", (state, req) -> state||req
ExprP memoir_service();

// platform driver: sends each call, enters a session, collects the snapshot.
// replayIndex >= 0 appends one extra call replaying that snapshot with a
// fresh request; altServiceLast / altModuleLast swap the values the final
// session is entered with.
CompP memoir_driver(const ExprP& module, const ExprP& service,
                    const std::vector<ExprP>& requests, int replayIndex = -1,
                    ExprP altServiceLast = nullptr,
                    ExprP altModuleLast = nullptr);

// seeded adversary thread over raw TPM actions (probes, forgeries, noise)
CompP memoir_chaos_adversary(uint64_t seed, int len = 12);

// ---- axioms and properties ----
struct AxiomVerdict {
  std::string name;
  bool ok = true;
  std::string witness;
};
// direct trace checks of the late-launch / NVRAM / secrecy axioms the model
// must realize; the two reconstructed ones are named MAC* and NVRAMRead*
std::vector<AxiomVerdict> check_axioms(const Trace& t);

// named closed formulas checked by sat: pcr-protection, nvram-protection,
// key-secrecy, summary-state, state-continuity
std::vector<std::pair<std::string, FormP>> memoir_properties(
    const ExprP& module, const ExprP& service);

// ---- scenarios ----
struct MemoirScenario {
  std::string name;
  bool weakened = false;
  int invocations = 1;
  enum class Attack {
    None,
    Rollback,
    MaliciousService,
    ForeignModule,
    NvramProbe,
    CryptoForge
  } attack = Attack::None;
  bool withAdversary = false;  // add a seeded chaos thread
  uint64_t seed = 0;
  long long fuel = 600;
  // properties expected to fail on this scenario (all others must hold)
  std::set<std::string> expectFail;
};

struct ScenarioResult {
  std::string name;
  Trace trace;
  std::vector<std::pair<std::string, bool>> properties;
  std::vector<AxiomVerdict> axioms;
  bool ok = true;  // axioms hold and property verdicts match expectations
  std::string detail;
};
ScenarioResult run_memoir_scenario(const MemoirScenario& sc);

std::vector<MemoirScenario> memoir_suite();  // the shipped scenario set

struct ScenarioReport {
  bool ok = true;
  std::vector<std::string> lines;
  std::string render() const;
};
ScenarioReport run_scenarios();

// .syms scenario files; throws std::runtime_error on bad input
MemoirScenario parse_scenario(const std::string& text);

}  // namespace sysm
