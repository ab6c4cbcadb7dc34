"""Callsite cache runtime.

The cache is a tree with one :class:`FunctionNode` per dynamic call and leaf
nodes for random choices, observations and query writes.  Children are kept
in execution order: while a node runs, ``children[:next_child]`` are exactly
the children visited so far in this execution.

All mutations made during a proposal go through an undo log, so a rejected
proposal is rolled back exactly.  Nothing outside the nodes actually visited
is copied.
"""

from __future__ import annotations

import math

from . import erp as _erp
from .address import Address
from .errors import Reject
from .lang import Closure, value_repr
from .machine import HostCont

NEG_INF = -math.inf


class _Unset:
    __slots__ = ()

    def __repr__(self):
        return "UNSET"


UNSET = _Unset()
_MISSING = object()


# ---------------------------------------------------------------------------
# Nodes


class FunctionNode:
    __slots__ = ("address", "parent", "index", "reachable", "site", "fn", "args",
                 "retval", "k", "entered", "children", "next_child", "dirty", "exit")

    def __init__(self, address, parent, site):
        self.address = address
        self.parent = parent
        self.index = 0
        self.reachable = True
        self.site = site
        self.fn = None
        self.args = ()
        self.retval = UNSET
        self.k = None
        self.entered = False
        self.children: list = []
        self.next_child = 0
        self.dirty = False
        self.exit = None


class ChoiceNode:
    __slots__ = ("address", "parent", "index", "reachable", "erp", "params", "value", "score", "k")

    def __init__(self, address, parent, erp, params, value, score, k):
        self.address = address
        self.parent = parent
        self.index = 0
        self.reachable = True
        self.erp = erp
        self.params = params
        self.value = value
        self.score = score
        self.k = k


class ObserveNode:
    __slots__ = ("address", "parent", "index", "reachable", "erp", "params", "value", "score")

    def __init__(self, address, parent, erp, params, value, score):
        self.address = address
        self.parent = parent
        self.index = 0
        self.reachable = True
        self.erp = erp
        self.params = params
        self.value = value
        self.score = score


class QueryNode:
    __slots__ = ("address", "parent", "index", "reachable", "key")

    def __init__(self, address, parent, key):
        self.address = address
        self.parent = parent
        self.index = 0
        self.reachable = True
        self.key = key


# ---------------------------------------------------------------------------
# Choice table


class ChoiceTable:
    """Live choices with O(1) add, remove and uniform pick.

    Removal swaps the last element into the hole; the undo operations replay
    that exactly so a rollback restores the original order.
    """

    __slots__ = ("items", "pos", "version")

    def __init__(self):
        self.items: list = []
        self.pos: dict = {}
        self.version = 0

    def __len__(self):
        return len(self.items)

    def __contains__(self, addr):
        return addr in self.pos

    def add(self, node):
        self.pos[node.address] = len(self.items)
        self.items.append(node)
        self.version += 1

    def remove(self, node) -> int:
        p = self.pos.pop(node.address)
        last = self.items.pop()
        if last is not node:
            self.items[p] = last
            self.pos[last.address] = p
        self.version += 1
        return p

    def undo_add(self, node):
        assert self.items[-1] is node
        self.items.pop()
        del self.pos[node.address]
        self.version += 1

    def undo_remove(self, entry):
        node, p = entry
        if p == len(self.items):
            self.items.append(node)
        else:
            moved = self.items[p]
            self.items.append(moved)
            self.pos[moved.address] = len(self.items) - 1
            self.items[p] = node
        self.pos[node.address] = p
        self.version += 1


def _restore_key(entry):
    d, key, old = entry
    if old is _MISSING:
        d.pop(key, None)
    else:
        d[key] = old


# ---------------------------------------------------------------------------
# Equality


def _same_float(a, b):
    return a == b and (a != 0.0 or math.copysign(1.0, a) == math.copysign(1.0, b))


class Equivalence:
    """Shallow value equality plus closure equivalence by tag.

    Closure results are memoized until :meth:`reset`; the compared objects are
    kept alive so their ids stay unique for the lifetime of the memo.
    """

    def __init__(self):
        self.memo: dict = {}
        self.keep: list = []
        self.active: set = set()

    def reset(self):
        self.memo.clear()
        self.keep.clear()

    def shallow_equal(self, a, b) -> bool:
        if a is b:
            return True
        c = a.__class__
        if c is not b.__class__:
            return False
        if c is float:
            return _same_float(a, b)
        if c is int or c is str or c is bool:
            return a == b
        if c is Closure:
            return self.fn_equiv(a, b)
        return False

    def seq_equal(self, xs, ys) -> bool:
        if len(xs) != len(ys):
            return False
        se = self.shallow_equal
        for x, y in zip(xs, ys):
            if not (x is y or se(x, y)):
                return False
        return True

    def fn_equiv(self, a, b) -> bool:
        if a is b:
            return True
        if a.__class__ is not Closure or b.__class__ is not Closure:
            return False
        if a.lambda_id != b.lambda_id or a.is_cont or b.is_cont:
            return False
        key = (id(a), id(b))
        r = self.memo.get(key)
        if r is not None:
            return r
        if key in self.active:
            return True  # coinductive: assume equal while the cycle is open
        top = not self.active
        self.active.add(key)
        try:
            sa, sb = a.snapshot, b.snapshot
            r = sa.keys() == sb.keys() and all(self.shallow_equal(sa[n], sb[n]) for n in sa)
        finally:
            self.active.discard(key)
        # a True found under an open assumption is only final at top level
        if top or not r:
            self.memo[key] = r
            self.keep.append((a, b))
        return r


# ---------------------------------------------------------------------------
# Adaptive caching


class AdaptiveStats:
    """Per-callsite bookkeeping for switching caching off.

    A callsite is un-cached once it has been reached in at least ``n``
    proposals, visited ``m`` times in a row without a short-circuit, and has
    never short-circuited at all.  Visits made by the initial run do not count.
    The decision is taken at proposal boundaries and is permanent.
    """

    def __init__(self, n: int = 10, m: int = 50, enabled: bool = True):
        self.n = n
        self.m = m
        self.enabled = enabled
        self.proposals = 0
        self.seen: dict = {}        # callsite -> proposals that reached it
        self.fruitless: dict = {}   # callsite -> visits since last short-circuit
        self.productive: set = set()
        self.disabled: set = set()
        self.disabled_at: dict = {}
        self._reached: set = set()

    def cached(self, site) -> bool:
        return site not in self.disabled

    def visit(self, site):
        self._reached.add(site)
        self.fruitless[site] = self.fruitless.get(site, 0) + 1

    def short_circuit(self, site):
        self._reached.add(site)
        self.fruitless[site] = 0
        self.productive.add(site)

    def end_init(self):
        """Forget the initial run; it is not a proposal."""
        self.fruitless.clear()
        self._reached.clear()

    def proposals_seen(self, site) -> int:
        return self.seen.get(site, 0)

    def boundary(self) -> list:
        """Close a proposal; returns callsites newly un-cached."""
        self.proposals += 1
        seen = self.seen
        newly = []
        for s in self._reached:
            k = seen[s] = seen.get(s, 0) + 1
            if (self.enabled and k >= self.n and self.fruitless[s] >= self.m
                    and s not in self.productive and s not in self.disabled):
                self.disabled.add(s)
                self.disabled_at[s] = self.proposals
                newly.append(s)
        self._reached = set()
        return sorted(newly)


class Counters:
    __slots__ = ("bodies", "cache_calls", "entry_sc", "exit_sc", "rescored",
                 "bypasses", "nodes_created", "fresh", "stale", "nodes_executed")

    def __init__(self):
        for f in self.__slots__:
            setattr(self, f, 0)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__slots__}


# ---------------------------------------------------------------------------
# Runtime


class CacheRuntime:
    """The cache intrinsics, shared by the caching-only and C3 engines.

    ``current`` plays the role of the node stack: the top is ``current`` and
    the rest of the stack is its parent chain, so restoring the stack for a
    proposal is a pointer assignment.
    """

    def __init__(self, rng, adaptive: AdaptiveStats | None = None):
        self.rng = rng
        self.machine = None
        self.adaptive = adaptive if adaptive is not None else AdaptiveStats()
        self.eq = Equivalence()
        self.counters = Counters()
        self.reset()

    def reset(self):
        self.root_addr = Address()
        self.root = FunctionNode(self.root_addr, None, None)
        self.nodes: dict = {self.root_addr: self.root}
        self.table = ChoiceTable()
        self.query: dict = {}
        self.score = 0.0
        self.retval = UNSET
        self.current = None
        self.exited_early = False
        self.log = None
        self._cowed: set = set()
        self._touched: set = set()
        self.fresh: list = []
        self.stale: list = []

    # -- staging -------------------------------------------------------------

    def begin(self):
        self.log = []
        self._cowed = set()
        self._touched = set()
        self.fresh = []
        self.stale = []
        self.eq.reset()
        self._saved = (self.score, self.retval, self.exited_early)

    def commit(self):
        self.log = None
        self.current = None
        self._cowed = set()

    def rollback(self):
        log = self.log
        self.log = None
        for entry in reversed(log):
            if len(entry) == 3:
                setattr(entry[0], entry[1], entry[2])
            else:
                entry[0](entry[1])
        self.score, self.retval, self.exited_early = self._saved
        self.current = None
        self._cowed = set()

    @property
    def staged_nodes(self) -> int:
        return len(self._touched)

    def _set(self, obj, attr, value):
        log = self.log
        if log is not None:
            old = getattr(obj, attr)
            if old is value:
                return
            log.append((obj, attr, old))
            self._touched.add(obj)
        setattr(obj, attr, value)

    def _cow(self, node) -> list:
        log = self.log
        if log is not None and node not in self._cowed:
            log.append((node, "children", node.children))
            node.children = list(node.children)
            self._cowed.add(node)
            self._touched.add(node)
        return node.children

    def _dict_set(self, d, key, value):
        if self.log is not None:
            self.log.append((_restore_key, (d, key, d.get(key, _MISSING))))
        d[key] = value

    def _dict_del(self, d, key):
        if self.log is not None:
            self.log.append((_restore_key, (d, key, d[key])))
        del d[key]

    def _table_add(self, node):
        self.table.add(node)
        if self.log is not None:
            self.log.append((self.table.undo_add, node))

    def _table_remove(self, node):
        p = self.table.remove(node)
        if self.log is not None:
            self.log.append((self.table.undo_remove, (node, p)))

    # -- tree maintenance ----------------------------------------------------

    def _attach(self, node, parent):
        """Make ``node`` the next visited child of ``parent``."""
        i = parent.next_child
        ch = parent.children
        if not (node.parent is parent and i < len(ch) and ch[i] is node):
            ch = self._cow(parent)
            if node.parent is parent:
                j = ch.index(node)
                del ch[j]
                if j < i:
                    i -= 1
            else:
                old = node.parent
                if old is not None:
                    self._cow(old).remove(node)
                self._set(node, "parent", parent)
            ch.insert(i, node)
        log = self.log
        if log is None:
            node.index = i
            node.reachable = True
            parent.next_child = i + 1
            return
        touched = self._touched
        if node.index != i:
            log.append((node, "index", node.index))
            touched.add(node)
            node.index = i
        if node.reachable is not True:
            log.append((node, "reachable", node.reachable))
            touched.add(node)
            node.reachable = True
        if parent.next_child != i + 1:
            log.append((parent, "next_child", parent.next_child))
            touched.add(parent)
            parent.next_child = i + 1

    def _new_child(self, node, parent):
        self._dict_set(self.nodes, node.address, node)
        ch = self._cow(parent)
        i = parent.next_child
        ch.insert(i, node)
        node.index = i
        self._set(parent, "next_child", i + 1)

    def mark_unreachable(self, node, start):
        ch = node.children
        if start >= len(ch):
            return
        log = self.log
        for c in ch[start:]:
            if c.reachable:
                if log is not None:
                    log.append((c, "reachable", True))
                    self._touched.add(c)
                c.reachable = False

    def remove_unreachables(self, node):
        ch = node.children
        for c in ch:
            if not c.reachable:
                break
        else:
            return
        keep = [c for c in ch if c.reachable]
        gone = [c for c in ch if not c.reachable]
        if self.log is not None and node not in self._cowed:
            self.log.append((node, "children", ch))
            self._cowed.add(node)
            self._touched.add(node)
        node.children = keep
        self._delete_subtrees(gone, node)

    def _delete_subtrees(self, gone, parent):
        stack = [(c, parent) for c in gone]
        nodes, query = self.nodes, self.query
        while stack:
            n, owner = stack.pop()
            if n.parent is not owner:
                continue  # re-parented elsewhere during this execution
            if nodes.get(n.address) is n:
                self._dict_del(nodes, n.address)
            c = n.__class__
            if c is ChoiceNode:
                self._table_remove(n)
                self.score -= n.score
                self.stale.append(n.score)
                self.counters.stale += 1
            elif c is ObserveNode:
                self.score -= n.score
            elif c is QueryNode:
                entry = query.get(n.key)
                if entry is not None and entry[1] is n.address:
                    self._dict_del(query, n.key)
            else:
                stack.extend((k, n) for k in n.children)

    def _remove_node(self, n):
        """Detach a single node (erp changed at its address)."""
        parent = n.parent
        ch = self._cow(parent)
        j = ch.index(n)
        del ch[j]
        if j < parent.next_child:
            self._set(parent, "next_child", parent.next_child - 1)
        self._delete_subtrees([n], parent)

    def _frame(self, addr):
        self.machine.frames.add(addr)

    # -- function calls ------------------------------------------------------

    def _lookup_fn(self, addr, parent, site):
        node = self.nodes.get(addr)
        if node is not None and node.__class__ is FunctionNode:
            self._attach(node, parent)
            return node
        if node is not None:
            self._remove_node(node)
        node = FunctionNode(addr, parent, site)
        node.exit = HostCont(self._exit_fn(node), "exit")
        self.counters.nodes_created += 1
        self._new_child(node, parent)
        return node

    def _exit_fn(self, node):
        def on_exit(retval):
            return self.exit_k(node, retval)
        return on_exit

    def _can_reuse(self, node, fn, args) -> bool:
        return (node.retval is not UNSET and not node.dirty
                and self.eq.fn_equiv(node.fn, fn) and self.eq.seq_equal(node.args, args))

    def _enter(self, node, fn, args):
        self.adaptive.visit(node.site)
        self._set(node, "fn", fn)
        self._set(node, "args", args)
        self.mark_unreachable(node, 0)
        self._set(node, "next_child", 0)
        self._set(node, "entered", True)
        if node.dirty:
            self._set(node, "dirty", False)
        self.current = node

    def cache_call_k(self, addr, k, fn, args, site):
        c = self.counters
        c.cache_calls += 1
        if site not in self.adaptive.disabled:
            parent = self.current
            node = self._lookup_fn(addr, parent, site)
            self._set(node, "k", k)
            if self._can_reuse(node, fn, args):
                c.entry_sc += 1
                self.adaptive.short_circuit(site)
                self._frame(addr)
                return (k, (node.retval,))
            self._enter(node, fn, args)
            return (fn, (addr, node.exit, *args))
        c.bypasses += 1
        return (fn, (addr, k, *args))

    def exit_k(self, node, retval):
        parent = node.parent
        self.current = parent
        self.remove_unreachables(node)
        self._frame(node.address)
        old = node.retval
        rveq = old is not UNSET and (old is retval or self.eq.shallow_equal(retval, old))
        if rveq and not node.entered:
            self.counters.exit_sc += 1
            self.adaptive.short_circuit(node.site)
            return self.kexit()
        self._set(node, "entered", False)
        if not rveq:
            self.mark_unreachable(parent, node.index + 1)
            self._set(node, "retval", retval)
        self._set(parent, "next_child", node.index + 1)
        return (node.k, (retval,))

    def cache_call(self, addr, fn, args, site):
        """Direct-style counterpart of :meth:`cache_call_k`."""
        c = self.counters
        c.cache_calls += 1
        m = self.machine
        if site in self.adaptive.disabled:
            c.bypasses += 1
            return m.call(fn, addr, args)
        parent = self.current
        node = self._lookup_fn(addr, parent, site)
        if self._can_reuse(node, fn, args):
            c.entry_sc += 1
            self.adaptive.short_circuit(site)
            self._frame(addr)
            return node.retval
        self._enter(node, fn, args)
        retval = m.call(fn, addr, args)
        self.current = parent
        self.remove_unreachables(node)
        old = node.retval
        rveq = old is not UNSET and (old is retval or self.eq.shallow_equal(retval, old))
        self._set(node, "entered", False)
        if not rveq:
            self.mark_unreachable(parent, node.index + 1)
            self._set(node, "retval", retval)
        self._set(parent, "next_child", node.index + 1)
        return retval

    def kexit(self):
        self.exited_early = True
        return None

    # -- leaves --------------------------------------------------------------

    def _sample(self, addr, k, name, params):
        e = _erp.get(name)
        if len(params) != e.nparams:
            raise _erp.ErpParamError(f"{name}: expected {e.nparams} parameter(s), got {len(params)}")
        parent = self.current
        node = self.nodes.get(addr)
        if node is not None and (node.__class__ is not ChoiceNode or node.erp != name):
            self._remove_node(node)
            node = None
        if node is None:
            e.check(params)
            value = e.draw(params, self.rng)
            s = e.logp(params, value)
            node = ChoiceNode(addr, parent, name, params, value, s, k)
            self._new_child(node, parent)
            self._table_add(node)
            self.score += s
            self.fresh.append(s)
            self.counters.fresh += 1
            self.counters.nodes_created += 1
            if s == NEG_INF:
                raise Reject()
            return value
        self._attach(node, parent)
        self._set(node, "k", k)
        if not (node.params is params or self.eq.seq_equal(node.params, params)):
            e.check(params)
            s = e.logp(params, node.value)
            self.counters.rescored += 1
            self.score += s - node.score
            self._set(node, "params", params)
            self._set(node, "score", s)
            if s == NEG_INF:
                raise Reject()
        return node.value

    def sample_k(self, addr, k, name, params):
        return (k, (self._sample(addr, k, name, params),))

    def sample(self, addr, name, params):
        return self._sample(addr, None, name, params)

    def _observe(self, addr, name, params, value):
        e = _erp.get(name)
        if len(params) != e.nparams:
            raise _erp.ErpParamError(f"{name}: expected {e.nparams} parameter(s), got {len(params)}")
        parent = self.current
        node = self.nodes.get(addr)
        if node is not None and node.__class__ is not ObserveNode:
            self._remove_node(node)
            node = None
        if node is None:
            e.check(params)
            s = e.logp(params, value)
            node = ObserveNode(addr, parent, name, params, value, s)
            self._new_child(node, parent)
            self.score += s
            if s == NEG_INF:
                raise Reject()
            return value
        self._attach(node, parent)
        eq = self.eq
        if not (node.erp == name and eq.seq_equal(node.params, params)
                and (node.value is value or eq.shallow_equal(node.value, value))):
            e.check(params)
            s = e.logp(params, value)
            self.score += s - node.score
            self._set(node, "erp", name)
            self._set(node, "params", params)
            self._set(node, "value", value)
            self._set(node, "score", s)
            if s == NEG_INF:
                raise Reject()
        return value

    def observe_k(self, addr, k, name, params, value):
        return (k, (self._observe(addr, name, params, value),))

    def observe(self, addr, name, params, value):
        return self._observe(addr, name, params, value)

    def _query_add(self, addr, key, value):
        parent = self.current
        node = self.nodes.get(addr)
        if node is not None and node.__class__ is not QueryNode:
            self._remove_node(node)
            node = None
        q = self.query
        if node is None:
            node = QueryNode(addr, parent, key)
            self._new_child(node, parent)
        else:
            self._attach(node, parent)
            if not (node.key is key or self.eq.shallow_equal(node.key, key)):
                entry = q.get(node.key)
                if entry is not None and entry[1] is addr:
                    self._dict_del(q, node.key)
                self._set(node, "key", key)
        entry = q.get(key)
        if entry is None or entry[1] is not addr or not (
                entry[0] is value or self.eq.shallow_equal(entry[0], value)):
            self._dict_set(q, key, (value, addr))
        return value

    def query_add_k(self, addr, k, key, value):
        return (k, (self._query_add(addr, key, value),))

    def query_add(self, addr, key, value):
        return self._query_add(addr, key, value)

    # -- whole-program runs and proposals ------------------------------------

    def halt_k(self, retval):
        self.exit_root(retval)
        return None

    def start_root(self):
        root = self.root
        self.current = root
        self.mark_unreachable(root, 0)
        self._set(root, "next_child", 0)

    def exit_root(self, retval):
        self.current = None
        self.remove_unreachables(self.root)
        self._set(self.root, "retval", retval)
        self.retval = retval

    def propagate(self, rc: ChoiceNode):
        """Resume the program from choice ``rc`` (CPS engines)."""
        parent = rc.parent
        self.current = parent
        self.mark_unreachable(parent, rc.index + 1)
        if not rc.reachable:
            self._set(rc, "reachable", True)
        self._set(parent, "next_child", rc.index + 1)
        self.machine.run((rc.k, (rc.value,)))

    def mark_dirty_path(self, rc):
        n = rc.parent
        while n is not None:
            if not n.dirty:
                self._set(n, "dirty", True)
            n = n.parent

    def set_choice_value(self, rc, value):
        e = _erp.get(rc.erp)
        s = e.logp(rc.params, value)
        self.score += s - rc.score
        self._set(rc, "value", value)
        self._set(rc, "score", s)
        if s == NEG_INF:
            raise Reject()

    # -- inspection ----------------------------------------------------------

    def iter_nodes(self):
        """Pre-order walk of the tree (iterative)."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            if n.__class__ is FunctionNode:
                stack.extend(reversed(n.children))

    def stack_depth(self) -> int:
        d = 0
        n = self.current
        while n is not None:
            d += 1
            n = n.parent
        return d

    def recompute_score(self) -> float:
        total = 0.0
        for n in self.iter_nodes():
            if n.__class__ is ChoiceNode or n.__class__ is ObserveNode:
                total += n.score
        return total

    def serialize(self) -> str:
        """Canonical dump of every piece of cache state."""
        out = []
        for n in self.iter_nodes():
            c = n.__class__
            common = (f"{n.address!r} i={n.index} r={int(n.reachable)} "
                      f"p={id(n.parent)}")
            if c is FunctionNode:
                out.append(
                    f"F {common} id={id(n)} e={int(n.entered)} d={int(n.dirty)} "
                    f"nc={n.next_child} site={n.site} fn={_vsum(n.fn)} "
                    f"args=({' '.join(_vsum(a) for a in n.args)}) ret={_vsum(n.retval)} "
                    f"k={id(n.k)} ch={id(n.children)}:{len(n.children)}")
            elif c is ChoiceNode:
                out.append(f"C {common} {n.erp} params=({' '.join(_vsum(a) for a in n.params)}) "
                           f"v={_vsum(n.value)} s={n.score!r} k={id(n.k)}")
            elif c is ObserveNode:
                out.append(f"O {common} {n.erp} params=({' '.join(_vsum(a) for a in n.params)}) "
                           f"v={_vsum(n.value)} s={n.score!r}")
            else:
                out.append(f"Q {common} key={_vsum(n.key)}")
        out.append("table " + " ".join(repr(n.address) for n in self.table.items))
        out.append("pos " + " ".join(f"{a!r}:{p}" for a, p in
                                     sorted(self.table.pos.items(), key=lambda x: x[0].path())))
        out.append("query " + " ".join(
            f"{_vsum(k)}={_vsum(v)}@{a!r}" for k, (v, a) in
            sorted(self.query.items(), key=lambda x: value_repr(x[0]))))
        out.append("index " + " ".join(sorted(repr(a) for a in self.nodes)))
        out.append(f"score {self.score!r} ret {_vsum(self.retval)} early {int(self.exited_early)}")
        return "\n".join(out)

    def dump_tree(self) -> str:
        """Indented, human-readable tree: address, reachability, value summary."""
        lines = []
        stack = [(self.root, 0)]
        while stack:
            n, depth = stack.pop()
            pad = "  " * depth
            mark = "+" if n.reachable else "-"
            c = n.__class__
            if c is FunctionNode:
                lines.append(f"{pad}{mark} fn {n.address!r} ret={_short(n.retval)}")
                stack.extend((k, depth + 1) for k in reversed(n.children))
            elif c is ChoiceNode:
                lines.append(f"{pad}{mark} {n.erp} {n.address!r} = {_short(n.value)} "
                             f"score={n.score:.6g}")
            elif c is ObserveNode:
                lines.append(f"{pad}{mark} observe {n.address!r} score={n.score:.6g}")
            else:
                lines.append(f"{pad}{mark} query {n.address!r} key={_short(n.key)}")
        return "\n".join(lines)


def _vsum(v) -> str:
    """Value summary that distinguishes compound objects by identity."""
    if v is UNSET:
        return "UNSET"
    c = v.__class__
    if c is Closure:
        return f"<fn {v.lambda_id}@{id(v)}>"
    if c is tuple:
        return f"<list {len(v)}@{id(v)}>"
    if c is HostCont:
        return f"<host@{id(v)}>"
    if v is None:
        return "None"
    return value_repr(v)


def _short(v, limit: int = 40) -> str:
    if v is UNSET:
        return "?"
    s = value_repr(v) if not isinstance(v, Closure) else repr(v)
    return s if len(s) <= limit else s[: limit - 3] + "..."
