#include "sysm/semantics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sysm/parser.hpp"

namespace sysm {

namespace {
constexpr long long ACT_ARG_FUEL = 4096;

std::optional<BigNat> as_nat(const ExprP& e) {
  if (e->k == Expr::K::Const && e->val.k == BaseValue::K::Nat) return e->val.n;
  return std::nullopt;
}
std::optional<BigNat> as_loc(const ExprP& e) {
  if (e->k == Expr::K::Const && e->val.k == BaseValue::K::Loc) return e->val.n;
  return std::nullopt;
}
}  // namespace

std::optional<ExprP> beta_step(const ExprP& e) {
  switch (e->k) {
    case Expr::K::App:
      if (e->a->k == Expr::K::Lam) return subst1(e->a->a, e->a->name, e->b);
      if (auto f = beta_step(e->a)) return mk::app(*f, e->b);
      return std::nullopt;
    case Expr::K::TyApp:
      if (e->a->k == Expr::K::TyLam) return e->a->a;
      if (auto f = beta_step(e->a)) return mk::tyapp(*f);
      return std::nullopt;
    case Expr::K::Plus: {
      auto na = as_nat(e->a), nb = as_nat(e->b);
      if (na && nb) return mk::cnat(*na + *nb);
      if (auto a = beta_step(e->a)) return mk::plus(*a, e->b);
      if (auto b = beta_step(e->b)) return mk::plus(e->a, *b);
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

NormResult normalize(const ExprP& e, long long fuel) {
  NormResult r{e, 0, false};
  while (true) {
    auto s = beta_step(r.e);
    if (!s) return r;
    if (r.used >= fuel) {
      r.exhausted = true;
      return r;
    }
    r.e = *s;
    r.used++;
  }
}

// ---- heap world ----
HeapWorld::HeapWorld() {
  init[0] = mk::cnat(0);
  init[1] = mk::cnat(1);
  init[2] = mk::cnat(2);
}
WStateP HeapWorld::initial_state() const {
  auto s = std::make_shared<HeapState>();
  s->heap = init;
  return s;
}
NextResult HeapWorld::next(const WStateP& sp, const std::string& head,
                           const std::vector<ExprP>& args, const BigNat&,
                           const BigNat&) const {
  const auto& s = static_cast<const HeapState&>(*sp);
  if (head == "read" && args.size() == 1) {
    if (auto l = as_loc(args[0])) {
      auto it = s.heap.find(*l);
      if (it != s.heap.end()) return {sp, it->second, {}};
    }
    return {sp, nullptr, {}};
  }
  if (head == "write" && args.size() == 2) {
    if (auto l = as_loc(args[0])) {
      auto ns = std::make_shared<HeapState>(s);
      ns->heap[*l] = args[1];
      return {ns, args[1], {}};
    }
    return {sp, nullptr, {}};
  }
  return {sp, nullptr, {}};
}

// ---- threads ----
bool runnable(const ThreadState& t) {
  if (t.stuck) return false;
  if (t.fc && t.stack.empty() &&
      (t.fc->k == Computation::K::Ret || t.fc->k == Computation::K::Act))
    return false;
  return true;
}

const ThreadState* Configuration::thread(const BigNat& id) const {
  for (auto& t : threads)
    if (t->id == id) return t.get();
  return nullptr;
}

StepOut thread_step(const World& world, const WStateP& store,
                    const ThreadState& t, const BigNat& freshTid,
                    uint64_t& frameCounter) {
  StepOut out;
  out.store = store;
  auto nt = std::make_shared<ThreadState>(t);
  StepEvent ev;
  ev.thread = t.id;
  auto silent = [&](const char* r) {
    ev.k = StepEvent::K::Silent;
    ev.rule = r;
  };
  auto to_stuck = [&] {
    nt->stuck = true;
    silent("R-Stuck");
  };
  auto pop_with = [&](const ExprP& value) {
    Frame fr = nt->stack.back();
    nt->stack.pop_back();
    nt->fc = subst1(fr.cont, fr.binder, value);
    nt->fe = nullptr;
    ev.poppedFrame = fr.frameId;
    ev.returned = value;
  };
  auto push_frame = [&](const std::string& binder, const CompP& cont) {
    Frame fr{binder.empty() ? fresh("_seq") : binder, cont, ++frameCounter};
    nt->stack.push_back(fr);
    ev.pushedFrame = fr.frameId;
  };

  if (t.stuck) {
    silent("R-Stuck");
  } else if (t.fe) {
    if (t.fe->k == Expr::K::Comp) {
      nt->fc = t.fe->comp;
      nt->fe = nullptr;
      silent("R-SeqE3");
    } else if (auto s = beta_step(t.fe)) {
      nt->fe = *s;
      silent("R-SeqE2");
    } else {
      to_stuck();  // normal form that is not a suspended computation
    }
  } else {
    const Computation& c = *t.fc;
    switch (c.k) {
      case Computation::K::Ret:
        if (nt->stack.empty()) {
          to_stuck();  // not runnable; defensive
        } else {
          pop_with(c.e);
          silent("R-Ret");
        }
        break;
      case Computation::K::LetC:
      case Computation::K::SeqC:
        push_frame(c.k == Computation::K::LetC ? c.x : "", c.c2);
        nt->fc = c.c1;
        silent("R-SeqC");
        break;
      case Computation::K::LetE:
      case Computation::K::SeqE:
        push_frame(c.k == Computation::K::LetE ? c.x : "", c.c2);
        nt->fc = nullptr;
        nt->fe = c.e;
        silent("R-SeqE1");
        break;
      case Computation::K::Fix:
        to_stuck();  // an unapplied fixpoint has no rule
        break;
      case Computation::K::FixApp:
        if (c.c1->k == Computation::K::Fix) {
          const Computation& fx = *c.c1;
          auto z = fresh("z");
          auto unrolled =
              mk::lam(z, mk::comp(mk::fixapp(c.c1, mk::var(z))));
          nt->fc = subst(fx.c1, Sub{{fx.f, unrolled}, {fx.x, c.e}});
          silent("R-Fix");
        } else {
          to_stuck();
        }
        break;
      case Computation::K::If:
        if (c.e->k == Expr::K::Const &&
            (c.e->val.k == BaseValue::K::True ||
             c.e->val.k == BaseValue::K::False)) {
          nt->fc = c.e->val.k == BaseValue::K::True ? c.c1 : c.c2;
          silent("If-branch");
        } else if (auto s = beta_step(c.e)) {
          nt->fc = mk::cif(*s, c.c1, c.c2);
          silent("If-branch");
        } else {
          to_stuck();
        }
        break;
      case Computation::K::Act: {
        if (nt->stack.empty()) {
          to_stuck();  // not runnable; defensive
          break;
        }
        std::vector<ExprP> ground;
        bool exhausted = false;
        for (auto& a : c.act.args) {
          auto nr = normalize(a, ACT_ARG_FUEL);
          if (nr.exhausted) exhausted = true;
          ground.push_back(nr.e);
        }
        ev.action = c.act.head;
        ev.args = ground;
        if (exhausted) {
          ev.k = StepEvent::K::ActStuck;
          nt->stuck = true;
          break;
        }
        auto res = world.next(store, c.act.head, ground, t.id, freshTid);
        if (!res.value) {
          ev.k = StepEvent::K::ActStuck;
          nt->stuck = true;
          out.store = res.state;
          break;
        }
        ev.k = StepEvent::K::ActOk;
        ev.result = res.value;
        out.store = res.state;
        pop_with(res.value);
        BigNat nid = freshTid;
        for (auto& sc : res.spawns) {
          out.spawned.emplace_back(nid, sc);
          nid += 1;
        }
        break;
      }
    }
  }
  out.thread = nt;
  out.ev = ev;
  return out;
}

// ---- schedules ----
std::optional<BigNat> Schedule::pick(const std::vector<BigNat>& ids) {
  switch (k) {
    case K::RoundRobin: {
      for (auto& id : ids)
        if (id > rrLast) {
          rrLast = id;
          return id;
        }
      rrLast = ids.front();
      return ids.front();
    }
    case K::Seeded: {
      auto i = (size_t)(rng() % ids.size());
      return ids[i];
    }
    case K::Explicit: {
      while (exIdx < order.size()) {
        auto id = order[exIdx++];
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) return id;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Schedule make_schedule_round_robin() { return Schedule{}; }
Schedule make_schedule_seeded(uint64_t seed) {
  Schedule s;
  s.k = Schedule::K::Seeded;
  s.seed = seed;
  s.rng.seed(seed);
  return s;
}
Schedule make_schedule_explicit(std::vector<BigNat> order) {
  Schedule s;
  s.k = Schedule::K::Explicit;
  s.order = std::move(order);
  return s;
}

Trace run(const std::vector<std::pair<BigNat, CompP>>& threads,
          const World& world, Schedule sched, long long fuel,
          uint64_t seedLabel) {
  Trace tr;
  tr.seed = seedLabel;
  tr.fuel = fuel;
  tr.worldId = world.id();
  Configuration cfg;
  cfg.store = world.initial_state();
  for (auto& [id, c] : threads) {
    auto t = std::make_shared<ThreadState>();
    t->id = id;
    t->fc = c;
    cfg.threads.push_back(t);
  }
  std::sort(cfg.threads.begin(), cfg.threads.end(),
            [](const ThreadP& a, const ThreadP& b) { return a->id < b->id; });
  tr.initial = cfg;
  uint64_t frameCtr = 0;
  for (long long step = 0; step < fuel; step++) {
    std::vector<BigNat> ids;
    for (auto& t : cfg.threads)
      if (runnable(*t) && world.schedulable(cfg.store, t->id))
        ids.push_back(t->id);
    if (ids.empty()) break;
    auto pick = sched.pick(ids);
    if (!pick) break;
    BigNat freshTid = cfg.threads.back()->id + 1;
    const ThreadState* t = cfg.thread(*pick);
    auto so = thread_step(world, cfg.store, *t, freshTid, frameCtr);
    cfg.store = so.store;
    for (auto& tp : cfg.threads)
      if (tp->id == *pick) tp = so.thread;
    tr.steps.push_back({(long long)tr.steps.size() + 1, so.ev, cfg});
    for (auto& [nid, nc] : so.spawned) {
      auto nt = std::make_shared<ThreadState>();
      nt->id = nid;
      nt->fc = nc;
      cfg.threads.push_back(nt);
      StepEvent sev;
      sev.k = StepEvent::K::Spawn;
      sev.thread = nid;
      sev.spawned = nc;
      tr.steps.push_back({(long long)tr.steps.size() + 1, sev, cfg});
    }
  }
  return tr;
}

// ---- trace files ----
namespace {
std::string render_args(const std::vector<ExprP>& args) {
  std::string s = "[";
  for (size_t i = 0; i < args.size(); i++) {
    if (i) s += ", ";
    s += print(args[i], true);
  }
  return s + "]";
}

std::string render_step(const Step& st) {
  std::ostringstream o;
  o << "u=" << st.u << " thread=" << st.ev.thread << " event=";
  switch (st.ev.k) {
    case StepEvent::K::ActOk:
      o << st.ev.action << " args=" << render_args(st.ev.args)
        << " result=" << print(st.ev.result, true);
      break;
    case StepEvent::K::ActStuck:
      o << st.ev.action << " args=" << render_args(st.ev.args)
        << " result=stuck";
      break;
    case StepEvent::K::Silent:
      o << "silent args=[] result=silent:" << st.ev.rule;
      break;
    case StepEvent::K::Spawn:
      o << "spawn args=[" << print(st.ev.spawned, true) << "] result=spawn";
      break;
  }
  return o.str();
}
}  // namespace

std::string write_trace(const Trace& t) {
  std::ostringstream o;
  o << "# seed=" << t.seed << " fuel=" << t.fuel << " world=" << t.worldId
    << "\n";
  for (auto& th : t.initial.threads)
    o << "# thread=" << th->id << " init=" << print(th->fc, true) << "\n";
  for (auto& st : t.steps) o << render_step(st) << "\n";
  return o.str();
}

Trace read_trace(const std::string& text, const WorldFactory& make_world) {
  std::istringstream in(text);
  std::string line;
  uint64_t seed = 0;
  long long fuel = 0;
  std::string worldId;
  std::vector<std::pair<BigNat, CompP>> inits;
  struct Rec {
    std::string line;
    BigNat thread;
    bool isSpawn;
  };
  std::vector<Rec> recs;
  auto field = [&](const std::string& l, const std::string& key) {
    auto p = l.find(key + "=");
    if (p == std::string::npos)
      throw std::runtime_error("trace line missing " + key + ": " + l);
    p += key.size() + 1;
    auto q = l.find(' ', p);
    return l.substr(p, q == std::string::npos ? q : q - p);
  };
  bool headerSeen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto tp = line.find("thread=");
      if (line.find("seed=") != std::string::npos && tp == std::string::npos) {
        seed = std::stoull(field(line, "seed"));
        fuel = std::stoll(field(line, "fuel"));
        worldId = field(line, "world");
        headerSeen = true;
      } else if (tp != std::string::npos) {
        BigNat id(field(line, "thread"));
        auto ip = line.find("init=");
        if (ip == std::string::npos)
          throw std::runtime_error("bad thread header: " + line);
        inits.emplace_back(id, parse_comp(line.substr(ip + 5)));
      }
      continue;
    }
    Rec r;
    r.line = line;
    r.thread = BigNat(field(line, "thread"));
    r.isSpawn = line.find(" event=spawn ") != std::string::npos;
    recs.push_back(std::move(r));
  }
  if (!headerSeen) throw std::runtime_error("trace file missing header");
  auto world = make_world(worldId);
  if (!world) throw std::runtime_error("unknown world: " + worldId);

  // replay the recorded schedule and require bit-exact agreement
  Trace tr;
  tr.seed = seed;
  tr.fuel = fuel;
  tr.worldId = worldId;
  Configuration cfg;
  cfg.store = world->initial_state();
  for (auto& [id, c] : inits) {
    auto t = std::make_shared<ThreadState>();
    t->id = id;
    t->fc = c;
    cfg.threads.push_back(t);
  }
  std::sort(cfg.threads.begin(), cfg.threads.end(),
            [](const ThreadP& a, const ThreadP& b) { return a->id < b->id; });
  tr.initial = cfg;
  uint64_t frameCtr = 0;
  std::vector<std::pair<BigNat, CompP>> pendingSpawns;
  for (auto& r : recs) {
    if (r.isSpawn) {
      if (pendingSpawns.empty() || pendingSpawns.front().first != r.thread)
        throw std::runtime_error("unexpected spawn record: " + r.line);
      auto [nid, nc] = pendingSpawns.front();
      pendingSpawns.erase(pendingSpawns.begin());
      auto nt = std::make_shared<ThreadState>();
      nt->id = nid;
      nt->fc = nc;
      cfg.threads.push_back(nt);
      StepEvent sev;
      sev.k = StepEvent::K::Spawn;
      sev.thread = nid;
      sev.spawned = nc;
      Step st{(long long)tr.steps.size() + 1, sev, cfg};
      if (render_step(st) != r.line)
        throw std::runtime_error("trace replay mismatch at: " + r.line);
      tr.steps.push_back(std::move(st));
      continue;
    }
    if (!pendingSpawns.empty())
      throw std::runtime_error("missing spawn record before: " + r.line);
    const ThreadState* t = cfg.thread(r.thread);
    if (!t) throw std::runtime_error("unknown thread in: " + r.line);
    BigNat freshTid = cfg.threads.back()->id + 1;
    auto so = thread_step(*world, cfg.store, *t, freshTid, frameCtr);
    cfg.store = so.store;
    for (auto& tp : cfg.threads)
      if (tp->id == r.thread) tp = so.thread;
    Step st{(long long)tr.steps.size() + 1, so.ev, cfg};
    if (render_step(st) != r.line)
      throw std::runtime_error("trace replay mismatch at: " + r.line +
                               " (got: " + render_step(st) + ")");
    tr.steps.push_back(std::move(st));
    pendingSpawns = so.spawned;
  }
  if (!pendingSpawns.empty())
    throw std::runtime_error("trace ends with spawns unrecorded");
  return tr;
}

}  // namespace sysm
