"""Single-site Metropolis-Hastings under four execution strategies.

``lightweight``   choice database, every proposal re-runs the whole program
``caching``       callsite cache, re-runs from the root, reusing cached calls
``cps``           choice database, resumes from the changed choice's continuation
``c3``            cache plus continuations: resume, reuse and exit early

Every engine consumes the chain's random stream in the same order per
proposal: one uniform to select the choice, the proposal draw, fresh draws in
execution order, then one uniform for the accept test.  With
``deterministic=True`` selection indexes into the lexicographically sorted
addresses, so all four engines make identical decisions for a given seed.
"""

from __future__ import annotations

import math
import os
import random
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from . import erp as _erp
from .cachert import (
    AdaptiveStats, CacheRuntime, ChoiceNode, Counters, Equivalence, FunctionNode,
    ObserveNode, UNSET,
)
from .errors import C3Error, EnumerationError, InitializationFailure, Reject
from .lang import Expr, Handlers, eval_direct, parse, value_repr
from .address import Address
from .machine import HostCont, Machine, ensure_recursion_limit
from .transform import for_engine

NEG_INF = -math.inf

ENGINES = ("lightweight", "caching", "cps", "c3")
ALIASES = {
    "lw": "lightweight", "lightweight": "lightweight", "lightweight-mh": "lightweight",
    "co": "caching", "caching": "caching", "caching-only": "caching",
    "cps": "cps", "cps-only": "cps", "continuations": "cps",
    "c3": "c3",
}


def engine_name(name: str) -> str:
    try:
        return ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown engine {name!r}; expected one of {', '.join(ENGINES)}") from None


def deterministic_default() -> bool:
    return os.environ.get("C3_DETERMINISTIC", "") == "1"


def _okey(k):
    """Sort key that orders mixed query keys deterministically."""
    c = k.__class__
    if c is bool or c is int or c is float:
        return (0, k, "")
    if c is str:
        return (1, 0, k)
    if c is tuple:
        return (2, 0, tuple(_okey(x) for x in k))
    return (3, 0, value_repr(k))


def observable(query: dict, retval):
    """What a sample records: sorted query items, else the return value."""
    if query:
        return tuple((k, query[k]) for k in sorted(query, key=_okey))
    return retval


def _log(x):
    return math.log(x) if x > 0 else NEG_INF


@dataclass
class ProposalRecord:
    index: int
    address: Optional[tuple]
    erp: Optional[str]
    old_value: object
    new_value: object
    fwd: float
    rev: float
    fresh: float        # F: summed prior scores of choices created
    stale: float        # R: summed prior scores of choices removed
    score_before: float
    score_after: float
    n_before: int
    n_after: int
    log_alpha: float
    accepted: bool
    counters: dict = field(default_factory=dict)


class Engine:
    """One MH chain.  Subclasses implement the re-execution strategy."""

    kind = ""

    def __init__(self, program, seed: int = 0, rng: random.Random | None = None,
                 deterministic: bool | None = None, max_init_tries: int = 1000):
        ast = parse(program) if isinstance(program, str) else program
        self.ast: Expr = ast
        self.rng = rng if rng is not None else random.Random(seed)
        if deterministic is None:
            deterministic = deterministic_default()
        self.deterministic = deterministic or deterministic_default()
        self.max_init_tries = max_init_tries
        self.transformed = for_engine(ast, self.kind)
        self.proposals = 0
        self.accepted = 0
        self._sorted_version = None
        self._sorted: list = []
        self.init_tries = 0

    # interface ---------------------------------------------------------------

    def init(self):
        ensure_recursion_limit()
        for attempt in range(1, self.max_init_tries + 1):
            self.init_tries = attempt
            try:
                self._init_once()
                return self
            except Reject:
                continue
        raise InitializationFailure(
            f"no trace with finite score after {self.max_init_tries} attempt(s)")

    def step(self, force_reject: bool = False) -> ProposalRecord:
        n = self.num_choices()
        self.proposals += 1
        if n == 0:
            rec = ProposalRecord(self.proposals, None, None, None, None, 0.0, 0.0, 0.0, 0.0,
                                 self.score, self.score, 0, 0, 0.0, True, Counters().as_dict())
            self._boundary()
            return rec
        u = self.rng.random()
        handle = self._select(u, n)
        name, params, old = self._choice_info(handle)
        new, fwd, rev = _erp.propose(name, params, old, self.rng)
        l_before = self.score
        self._begin()
        try:
            self._propose(handle, new)
            l_after = self._proposed_score()
            n_after = self._proposed_count()
            F, R = math.fsum(self._fresh()), math.fsum(self._stale())
            log_alpha = (l_after - l_before) + math.log(n) - math.log(n_after) + (rev - fwd) + (R - F)
        except Reject:
            l_after, n_after, F, R = NEG_INF, n, 0.0, 0.0
            F = math.fsum(self._fresh())
            log_alpha = NEG_INF
        u2 = self.rng.random()
        accept = (not force_reject) and _log(u2) < log_alpha
        counters = self._finish(accept)
        if accept:
            self.accepted += 1
        self._boundary()
        return ProposalRecord(self.proposals, self._path_of(handle), name, old, new, fwd, rev,
                              F, R, l_before, l_after, n, n_after, log_alpha, accept, counters)

    def observable(self):
        return observable(self.query_table(), self.retval)

    # helpers -------------------------------------------------------------------

    def _select(self, u: float, n: int):
        items = self._choice_items()
        if not self.deterministic:
            return items[int(u * n)]
        v = self._structure_version()
        if v != self._sorted_version:
            self._sorted = sorted(items, key=lambda h: h.address.path())
            self._sorted_version = v
        return self._resolve(self._sorted[int(u * n)])

    def _resolve(self, handle):
        return handle

    @staticmethod
    def _path_of(handle):
        return handle.address.path()

    def _boundary(self):
        pass

    def recompute_score(self) -> float:
        raise NotImplementedError

    def trace_state(self) -> str:
        """Engine-independent summary of the current trace."""
        choices, observes = self._trace_parts()
        lines = ["choices"]
        for path, name, params, value, score in sorted(choices):
            lines.append(f"  {list(path)} {name} {value_repr(params)} {value_repr(value)} {score!r}")
        lines.append("observes")
        for path, name, score in sorted(observes):
            lines.append(f"  {list(path)} {name} {score!r}")
        q = self.query_table()
        lines.append("query " + " ".join(
            f"{value_repr(k)}={value_repr(q[k])}" for k in sorted(q, key=_okey)))
        lines.append("retval " + value_repr(self.retval))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Choice-database engines


class ChoiceRec:
    __slots__ = ("address", "erp", "params", "value", "score", "k", "pos")

    def __init__(self, address, erp, params, value, score, k, pos):
        self.address = address
        self.erp = erp
        self.params = params
        self.value = value
        self.score = score
        self.k = k
        self.pos = pos


class ObsRec:
    __slots__ = ("address", "erp", "params", "value", "score")

    def __init__(self, address, erp, params, value, score):
        self.address = address
        self.erp = erp
        self.params = params
        self.value = value
        self.score = score


class QueryRec:
    __slots__ = ("address", "key", "value", "score")

    def __init__(self, address, key, value):
        self.address = address
        self.key = key
        self.value = value
        self.score = 0.0


class _Trace:
    """An immutable-once-built execution record."""

    __slots__ = ("db", "obs", "events", "score", "query", "choices", "retval")

    def __init__(self, db, obs, events, retval):
        self.db = db
        self.obs = obs
        self.events = events
        self.retval = retval
        self.score = math.fsum(r.score for r in events)
        q = {}
        choices = []
        for r in events:
            c = r.__class__
            if c is ChoiceRec:
                choices.append(r)
            elif c is QueryRec:
                q[r.key] = r.value
        self.query = q
        self.choices = choices


class TraceEngine(Engine):
    """Lightweight MH (full re-run) and CPS-only (resume from continuation)."""

    def __init__(self, program, kind: str = "lightweight", **kw):
        self.kind = kind
        super().__init__(program, **kw)
        self.machine = Machine(self.transformed, self)
        self.eq = Equivalence()
        self.counters = Counters()
        self.root_addr = Address()
        self.trace: _Trace | None = None
        self._structure = 0

    # -- runtime interface used by the compiled program ----------------------

    def _sample(self, addr, k, name, params):
        e = _erp.get(name)
        if len(params) != e.nparams:
            raise _erp.ErpParamError(f"{name}: expected {e.nparams} parameter(s), got {len(params)}")
        old = self._old_db.get(addr)
        if addr is self._override_addr:
            value = self._override_value
            e.check(params)
            s = e.logp(params, value)
        elif old is not None and old.erp == name:
            value = old.value
            if old.params is params or self.eq.seq_equal(old.params, params):
                s = old.score
            else:
                e.check(params)
                s = e.logp(params, value)
                self.counters.rescored += 1
        else:
            e.check(params)
            value = e.draw(params, self.rng)
            s = e.logp(params, value)
            self._fresh_scores.append(s)
            self.counters.fresh += 1
        ev = self._events
        rec = ChoiceRec(addr, name, params, value, s, k, len(ev))
        ev.append(rec)
        self._new_db[addr] = rec
        if s == NEG_INF:
            raise Reject()
        return value

    def sample(self, addr, name, params):
        return self._sample(addr, None, name, params)

    def sample_k(self, addr, k, name, params):
        return (k, (self._sample(addr, k, name, params),))

    def observe(self, addr, name, params, value):
        e = _erp.get(name)
        if len(params) != e.nparams:
            raise _erp.ErpParamError(f"{name}: expected {e.nparams} parameter(s), got {len(params)}")
        old = self._old_obs.get(addr)
        eq = self.eq
        if (old is not None and old.erp == name and eq.seq_equal(old.params, params)
                and (old.value is value or eq.shallow_equal(old.value, value))):
            s = old.score
        else:
            e.check(params)
            s = e.logp(params, value)
        rec = ObsRec(addr, name, params, value, s)
        self._events.append(rec)
        self._new_obs[addr] = rec
        if s == NEG_INF:
            raise Reject()
        return value

    def observe_k(self, addr, k, name, params, value):
        return (k, (self.observe(addr, name, params, value),))

    def query_add(self, addr, key, value):
        self._events.append(QueryRec(addr, key, value))
        return value

    def query_add_k(self, addr, k, key, value):
        return (k, (self.query_add(addr, key, value),))

    def cache_call(self, *a):
        raise C3Error("cache intrinsic in a choice-database engine")

    cache_call_k = cache_call

    # -- runs -----------------------------------------------------------------

    def _start_run(self, old: _Trace | None, prefix=()):
        self._old_db = old.db if old is not None else {}
        self._old_obs = old.obs if old is not None else {}
        self._events = list(prefix)
        self._new_db = {r.address: r for r in self._events if r.__class__ is ChoiceRec}
        self._new_obs = {r.address: r for r in self._events if r.__class__ is ObsRec}
        self._fresh_scores = []
        self._retval = UNSET

    def _halt(self, v):
        self._retval = v
        return None

    def _run_from_start(self):
        m = self.machine
        if m.cps:
            m.start(self.root_addr, HostCont(self._halt, "halt"))
        else:
            self._retval = m.run_direct(self.root_addr)

    def _build(self) -> _Trace:
        return _Trace(self._new_db, self._new_obs, self._events, self._retval)

    def _init_once(self):
        self._override_addr = None
        self.counters = Counters()
        self.machine.frames = set()
        self.eq.reset()
        self._start_run(None)
        self._run_from_start()
        self.trace = self._build()
        self._structure += 1

    # -- Engine hooks ---------------------------------------------------------

    @property
    def score(self) -> float:
        return self.trace.score

    @property
    def retval(self):
        return self.trace.retval

    def query_table(self) -> dict:
        return self.trace.query

    def num_choices(self) -> int:
        return len(self.trace.db)

    def _choice_items(self):
        return self.trace.choices

    def _structure_version(self):
        return self._structure

    def _choice_info(self, rec):
        return rec.erp, rec.params, rec.value

    def _resolve(self, rec):
        # records are rebuilt on every accepted run; the sorted cache only
        # fixes the address order
        return self.trace.db[rec.address]

    def _begin(self):
        self.counters = Counters()
        self.machine.frames = set()
        self.machine.bodies = 0
        self.eq.reset()
        self._candidate = None

    def _propose(self, rc: ChoiceRec, new):
        old = self.trace
        self._override_addr = rc.address
        self._override_value = new
        try:
            if self.kind == "lightweight":
                self._start_run(old)
                self._run_from_start()
            else:
                self._start_run(old, old.events[:rc.pos])
                s = _erp.score(rc.erp, rc.params, new)
                rec = ChoiceRec(rc.address, rc.erp, rc.params, new, s, rc.k, rc.pos)
                self._events.append(rec)
                self._new_db[rc.address] = rec
                if s == NEG_INF:
                    raise Reject()
                self.machine.run((rc.k, (new,)))
        finally:
            self._override_addr = None
        self._candidate = self._build()

    def _proposed_score(self):
        return self._candidate.score

    def _proposed_count(self):
        return len(self._candidate.db)

    def _fresh(self):
        return self._fresh_scores

    def _stale(self):
        old = self.trace
        new_db = self._new_db
        if self.kind == "lightweight" or self._candidate is None:
            recs = old.choices
        else:
            recs = [r for r in old.events[self._override_pos_hint():] if r.__class__ is ChoiceRec]
        out = []
        for r in recs:
            n = new_db.get(r.address)
            if n is None or n.erp != r.erp:
                out.append(r.score)
        self.counters.stale = len(out)
        return out

    def _override_pos_hint(self):
        return self._last_rc_pos

    def step(self, force_reject: bool = False) -> ProposalRecord:
        return super().step(force_reject)

    def _select(self, u, n):
        rc = super()._select(u, n)
        self._last_rc_pos = rc.pos
        return rc

    def _finish(self, accept: bool) -> dict:
        c = self.counters
        if accept:
            cand = self._candidate
            if cand.db.keys() != self.trace.db.keys():
                self._structure += 1
            self.trace = cand
        self._candidate = None
        frames = self.machine.frames
        frames.discard(self.root_addr)
        c.nodes_executed = len(frames)
        c.bodies = self.machine.bodies
        return c.as_dict()

    def recompute_score(self) -> float:
        return math.fsum(r.score for r in self.trace.events)

    def _trace_parts(self):
        choices = [(r.address.path(), r.erp, r.params, r.value, r.score) for r in self.trace.choices]
        observes = [(r.address.path(), r.erp, r.score)
                    for r in self.trace.events if r.__class__ is ObsRec]
        return choices, observes


# ---------------------------------------------------------------------------
# Cache engines


class CacheEngine(Engine):
    """Caching-only (direct style, re-run from root) and C3 (CPS, resume)."""

    def __init__(self, program, kind: str = "c3", adaptive: AdaptiveStats | bool = True, **kw):
        self.kind = kind
        super().__init__(program, **kw)
        if isinstance(adaptive, AdaptiveStats):
            stats = adaptive
        else:
            stats = AdaptiveStats(enabled=bool(adaptive))
        self.rt = CacheRuntime(self.rng, stats)
        self.machine = Machine(self.transformed, self.rt)
        self.newly_uncached: list = []

    @property
    def adaptive(self) -> AdaptiveStats:
        return self.rt.adaptive

    def _init_once(self):
        rt = self.rt
        rt.reset()
        rt.counters = Counters()
        self.machine.frames = set()
        rt.eq.reset()
        rt.start_root()
        m = self.machine
        if m.cps:
            m.start(rt.root_addr, HostCont(rt.halt_k, "halt"))
        else:
            rt.exit_root(m.run_direct(rt.root_addr))
        rt.adaptive.end_init()

    @property
    def score(self) -> float:
        return self.rt.score

    @property
    def retval(self):
        return self.rt.retval

    def query_table(self) -> dict:
        return {k: v for k, (v, _a) in self.rt.query.items()}

    def num_choices(self) -> int:
        return len(self.rt.table)

    def _choice_items(self):
        return self.rt.table.items

    def _structure_version(self):
        return self.rt.table.version

    def _choice_info(self, node):
        return node.erp, node.params, node.value

    def _begin(self):
        rt = self.rt
        rt.counters = Counters()
        self.machine.frames = set()
        self.machine.bodies = 0
        rt.begin()

    def _propose(self, rc: ChoiceNode, new):
        rt = self.rt
        rt.set_choice_value(rc, new)
        if self.machine.cps:
            rt.exited_early = False
            rt.propagate(rc)
        else:
            rt.mark_dirty_path(rc)
            rt.start_root()
            rt.exit_root(self.machine.run_direct(rt.root_addr))

    def _proposed_score(self):
        return self.rt.score

    def _proposed_count(self):
        return len(self.rt.table)

    def _fresh(self):
        return self.rt.fresh

    def _stale(self):
        return self.rt.stale

    def _finish(self, accept: bool) -> dict:
        rt = self.rt
        c = rt.counters
        c.stale = len(rt.stale)
        staged = rt.staged_nodes
        if accept:
            rt.commit()
        else:
            rt.rollback()
        frames = self.machine.frames
        frames.discard(rt.root_addr)
        c.nodes_executed = len(frames)
        c.bodies = self.machine.bodies
        d = c.as_dict()
        d["staged_nodes"] = staged
        return d

    def _boundary(self):
        self.newly_uncached = self.rt.adaptive.boundary()

    def recompute_score(self) -> float:
        return self.rt.recompute_score()

    def serialize(self) -> str:
        return self.rt.serialize()

    def _trace_parts(self):
        choices, observes = [], []
        for n in self.rt.iter_nodes():
            c = n.__class__
            if c is ChoiceNode:
                choices.append((n.address.path(), n.erp, n.params, n.value, n.score))
            elif c is ObserveNode:
                observes.append((n.address.path(), n.erp, n.score))
        return choices, observes


def make_engine(program, engine: str, seed: int = 0, **kw) -> Engine:
    kind = engine_name(engine)
    if kind in ("lightweight", "cps"):
        kw.pop("adaptive", None)
        return TraceEngine(program, kind=kind, seed=seed, **kw)
    return CacheEngine(program, kind=kind, seed=seed, **kw)


# ---------------------------------------------------------------------------
# Chains


@dataclass
class ChainResult:
    engine: str
    samples: list
    records: list
    accept_rate: float
    mean_counters: dict
    wall_seconds: float
    iterations: int
    init_seconds: float = 0.0
    score_checks: list = field(default_factory=list)

    @property
    def proposals_per_second(self) -> float:
        return self.iterations / self.wall_seconds if self.wall_seconds > 0 else math.inf


def run_chain(program, engine: str, iterations: int, thin: int = 1, burn: int = 0,
              seed: int = 0, keep_records: bool = False, check_score_every: int = 0,
              **kw) -> ChainResult:
    """Run one chain; a sample is taken at step ``i`` when ``i > burn`` and
    ``i % thin == 0``."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    t0 = time.perf_counter()
    eng = make_engine(program, engine, seed=seed, **kw).init()
    t1 = time.perf_counter()
    samples, records, checks = [], [], []
    totals: dict = defaultdict(float)
    accepted = 0
    for i in range(1, iterations + 1):
        rec = eng.step()
        accepted += rec.accepted
        for k, v in rec.counters.items():
            totals[k] += v
        if keep_records:
            records.append(rec)
        if i > burn and i % thin == 0:
            samples.append(eng.observable())
        if check_score_every and i % check_score_every == 0:
            checks.append((i, eng.score, eng.recompute_score()))
    t2 = time.perf_counter()
    means = {k: v / iterations for k, v in totals.items()}
    return ChainResult(eng.kind, samples, records, accepted / iterations, means,
                       t2 - t1, iterations, t1 - t0, checks)


# ---------------------------------------------------------------------------
# Cross-engine comparison


@dataclass
class Comparison:
    ok: bool
    proposals: int
    divergence: Optional[int] = None
    message: str = ""
    score_checks: int = 0


def _records_match(a: ProposalRecord, b: ProposalRecord, tol: float) -> str:
    if a.address != b.address:
        return f"address {a.address} != {b.address}"
    if a.accepted != b.accepted:
        return f"accept {a.accepted} != {b.accepted}"
    la, lb = a.log_alpha, b.log_alpha
    if not (la == lb or (math.isfinite(la) and math.isfinite(lb) and abs(la - lb) <= tol)):
        return f"log alpha {la!r} != {lb!r}"
    return ""


def compare_engines(program, iterations: int, seed: int = 0, engines=ENGINES,
                    check_state: bool = True, tol: float = 1e-9, score_every: int = 100,
                    score_tol: float = 1e-6, factories: dict | None = None) -> Comparison:
    """Step engines in lockstep and report the first divergence.

    The first engine is the reference.  ``factories`` may override how an
    engine is built (used to inject faulty engines in tests).
    """
    built = []
    for name in engines:
        if factories and name in factories:
            eng = factories[name](program, seed)
        else:
            eng = make_engine(program, name, seed=seed, deterministic=True)
        built.append((name, eng.init()))
    ref_name, ref = built[0]
    checks = 0
    state0 = ref.trace_state() if check_state else None
    for name, eng in built[1:]:
        if check_state and eng.trace_state() != state0:
            return Comparison(False, 0, 0, f"{name}: initial trace differs from {ref_name}")
    for i in range(1, iterations + 1):
        recs = [(name, eng.step()) for name, eng in built]
        _, r0 = recs[0]
        sample0 = ref.observable()
        state0 = ref.trace_state() if check_state else None
        for (name, r), (_, eng) in zip(recs[1:], built[1:]):
            why = _records_match(r0, r, tol)
            if not why and eng.observable() != sample0:
                why = "samples differ"
            if not why and check_state and eng.trace_state() != state0:
                why = "trace state differs"
            if why:
                return Comparison(False, i, i, f"{name} vs {ref_name} at proposal {i}: {why}")
        if score_every and i % score_every == 0:
            for name, eng in built:
                checks += 1
                if abs(eng.score - eng.recompute_score()) > score_tol:
                    return Comparison(False, i, i, f"{name}: running score drifted at proposal {i}")
    return Comparison(True, iterations, None, "all engines agree", checks)


# ---------------------------------------------------------------------------
# Exact enumeration


class _Prune(Exception):
    pass


class _EnumHandler(Handlers):
    def __init__(self, trail):
        self.trail = trail
        self.pos = 0
        self.logw = 0.0
        self.query = {}

    def sample(self, name, params):
        e = _erp.get(name)
        if len(params) != e.nparams:
            raise _erp.ErpParamError(f"{name}: expected {e.nparams} parameter(s)")
        e.check(params)
        if not e.discrete:
            raise EnumerationError(f"cannot enumerate continuous distribution {name}")
        if self.pos < len(self.trail):
            slot = self.trail[self.pos]
        else:
            slot = [0, list(e.support_of(params))]
            self.trail.append(slot)
        self.pos += 1
        v = slot[1][slot[0]]
        s = e.logp(params, v)
        if s == NEG_INF:
            raise _Prune()
        self.logw += s
        return v

    def observe(self, name, params, value):
        s = _erp.score(name, params, value)
        if s == NEG_INF:
            raise _Prune()
        self.logw += s
        return value

    def query_add(self, key, value):
        self.query[key] = value
        return value


def enumerate_program(program, max_paths: int = 10 ** 6) -> dict:
    """Exact distribution over the observable, by depth-first enumeration."""
    ast = parse(program) if isinstance(program, str) else program
    trail: list = []
    weights: dict = defaultdict(list)
    paths = 0
    while True:
        paths += 1
        if paths > max_paths:
            raise EnumerationError(f"more than {max_paths} execution paths")
        h = _EnumHandler(trail)
        try:
            ret = eval_direct(ast, handlers=h)
            weights[observable(h.query, ret)].append(h.logw)
        except _Prune:
            pass
        del trail[h.pos:]
        while trail and trail[-1][0] + 1 >= len(trail[-1][1]):
            trail.pop()
        if not trail:
            break
        trail[-1][0] += 1
    if not weights:
        raise EnumerationError("every execution path has zero probability")
    top = max(max(ws) for ws in weights.values())
    mass = {k: math.fsum(math.exp(w - top) for w in ws) for k, ws in weights.items()}
    total = math.fsum(mass.values())
    return {k: m / total for k, m in mass.items()}


def empirical(samples) -> dict:
    counts: dict = defaultdict(int)
    for s in samples:
        counts[s] += 1
    n = len(samples)
    return {k: c / n for k, c in counts.items()}


def tv_distance(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
