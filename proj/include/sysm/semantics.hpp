#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sysm/syntax.hpp"

namespace sysm {

// ---- call-by-name reduction ----
// Leftmost-outermost: redexes are (lam x. e) a, (tylam X. e) !, and n1 + n2 on
// natural literals; congruence descends into function position (and both sides
// of +) only. Applications with a non-function head are normal forms.
std::optional<ExprP> beta_step(const ExprP& e);

struct NormResult {
  ExprP e;
  long long used = 0;
  bool exhausted = false;
};
NormResult normalize(const ExprP& e, long long fuel);

// ---- worlds ----
struct WState {
  virtual ~WState() = default;
};
using WStateP = std::shared_ptr<const WState>;

struct NextResult {
  WStateP state;
  ExprP value;  // null means the action is stuck
  std::vector<CompP> spawns;
};

struct World {
  virtual ~World() = default;
  virtual std::string id() const = 0;
  virtual WStateP initial_state() const = 0;
  // args are normalized ground expressions; freshTid is the id the first
  // spawned thread would receive.
  virtual NextResult next(const WStateP& s, const std::string& head,
                          const std::vector<ExprP>& args, const BigNat& thread,
                          const BigNat& freshTid) const = 0;
  virtual bool schedulable(const WStateP&, const BigNat&) const { return true; }
};

// heap: locations -> expressions; read off the map is stuck; write allocates
struct HeapState : WState {
  std::map<BigNat, ExprP> heap;
};
struct HeapWorld : World {
  std::map<BigNat, ExprP> init;
  HeapWorld();  // prepopulates l0 -> 0, l1 -> 1, l2 -> 2
  std::string id() const override { return "heap"; }
  WStateP initial_state() const override;
  NextResult next(const WStateP& s, const std::string& head,
                  const std::vector<ExprP>& args, const BigNat& thread,
                  const BigNat& freshTid) const override;
};

// ---- threads / configurations ----
struct Frame {
  std::string binder;
  CompP cont;
  uint64_t frameId = 0;
};

struct ThreadState {
  BigNat id;
  bool stuck = false;
  std::vector<Frame> stack;
  CompP fc;  // exactly one of fc / fe is the focus
  ExprP fe;
};
using ThreadP = std::shared_ptr<const ThreadState>;

// a thread idles (is not runnable) when stuck, or when ret/act faces an empty
// stack: both rules pop the continuation frame
bool runnable(const ThreadState& t);

struct Configuration {
  WStateP store;
  std::vector<ThreadP> threads;  // sorted by id
  const ThreadState* thread(const BigNat& id) const;
};

// ---- trace ----
struct StepEvent {
  enum class K { ActOk, ActStuck, Silent, Spawn };
  K k{};
  BigNat thread;
  std::string action;       // ActOk / ActStuck head
  std::vector<ExprP> args;  // normalized ground action arguments
  ExprP result;             // ActOk result
  std::string rule;         // Silent rule name
  CompP spawned;            // Spawn body (Spawn.thread = the new id)
  // frame bookkeeping used by the postcondition checker
  std::optional<uint64_t> pushedFrame, poppedFrame;
  ExprP returned;  // expression handed to the popped frame
};

struct Step {
  long long u = 0;
  StepEvent ev;
  Configuration after;
};

struct Trace {
  Configuration initial;  // state at time 0
  std::vector<Step> steps;  // stamped 1..N
  uint64_t seed = 0;
  long long fuel = 0;
  std::string worldId;
};

// ---- scheduling ----
struct Schedule {
  enum class K { RoundRobin, Seeded, Explicit };
  K k = K::RoundRobin;
  uint64_t seed = 0;
  std::vector<BigNat> order;

  std::mt19937_64 rng;
  BigNat rrLast = -1;
  size_t exIdx = 0;
  // picks from the (sorted, nonempty) runnable set; nullopt ends the run
  std::optional<BigNat> pick(const std::vector<BigNat>& runnableIds);
};
Schedule make_schedule_round_robin();
Schedule make_schedule_seeded(uint64_t seed);
Schedule make_schedule_explicit(std::vector<BigNat> order);

// one reduction of the selected thread; deterministic given (store, thread)
struct StepOut {
  WStateP store;
  ThreadP thread;
  StepEvent ev;
  std::vector<std::pair<BigNat, CompP>> spawned;
};
StepOut thread_step(const World& world, const WStateP& store,
                    const ThreadState& t, const BigNat& freshTid,
                    uint64_t& frameCounter);

Trace run(const std::vector<std::pair<BigNat, CompP>>& threads,
          const World& world, Schedule sched, long long fuel,
          uint64_t seedLabel = 0);

// ---- trace files ----
std::string write_trace(const Trace& t);
// Re-executes the recorded schedule under the named world and checks that the
// reproduced events match the file bit-exactly; throws std::runtime_error on
// mismatch or unknown world.
using WorldFactory = std::function<std::shared_ptr<World>(const std::string& id)>;
Trace read_trace(const std::string& text, const WorldFactory& make_world);

}  // namespace sysm
