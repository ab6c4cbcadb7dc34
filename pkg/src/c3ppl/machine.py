"""Compiled evaluators for transformed programs.

Two back ends share one closure representation:

* direct style: each AST node compiles to a Python function ``env -> value``;
  calls recurse on the host stack.
* CPS: trivial nodes compile as above, serious nodes compile to
  ``env -> jump`` where a jump is ``(callee, args)`` or ``None`` to halt.  A
  trampoline loop dispatches jumps, so host stack depth stays constant.

Intrinsics (``cache``, ``sample``, ``observe``, ``query-add``) are delegated to
a runtime object supplied by the inference engine.  The machine also records
which frame addresses execute code, which is the engines' unit of work.
"""

from __future__ import annotations

import sys

from .lang import (
    PRIMOPS, Apply, CacheApply, Closure, EvalError, Extend, If, KCall, Lambda,
    Let, Literal, Observe, PrimOp, QueryAdd, Sample, Tag, Var, value_repr,
)
from .transform import ADDR, TransformedProgram, closure_free_vars

_MISSING = object()


class HostCont:
    """A continuation implemented by the runtime rather than the program."""

    __slots__ = ("fn", "name")

    def __init__(self, fn, name: str = ""):
        self.fn = fn
        self.name = name

    def __repr__(self):
        return f"<host continuation {self.name}>"


class NoRuntime:
    """Runtime for deterministic programs: every intrinsic is an error."""

    def _fail(self, *args):
        raise EvalError("probabilistic construct without an inference runtime")

    cache_call = sample = observe = query_add = _fail
    cache_call_k = sample_k = observe_k = query_add_k = _fail


class PlainCache(NoRuntime):
    """Treats ``cache`` as an ordinary call; used to check semantics of the
    caching pass in isolation."""

    def __init__(self):
        self.machine = None

    def cache_call(self, addr, fn, args, site):
        return self.machine.call(fn, addr, args)

    def cache_call_k(self, addr, k, fn, args, site):
        return (fn, (addr, k) + tuple(args))


def ensure_recursion_limit(n: int = 20000):
    if sys.getrecursionlimit() < n:
        sys.setrecursionlimit(n)


class Machine:
    """Executes one transformed program against a runtime."""

    def __init__(self, program: TransformedProgram, runtime=None):
        self.program = program
        self.rt = runtime if runtime is not None else NoRuntime()
        if hasattr(self.rt, "machine"):
            self.rt.machine = self
        self.cps = program.cps
        self.frames: set = set()
        self.bodies = 0
        if self.cps:
            self.code = self._serious(program.ast)
        else:
            self.code = self._direct(program.ast)

    # -- entry points --------------------------------------------------------

    def initial_env(self, root_addr=None, halt=None) -> dict:
        env = {}
        if self.program.addressed:
            env[ADDR] = root_addr
        if self.cps:
            env["%k"] = halt
        return env

    def run_direct(self, root_addr=None):
        ensure_recursion_limit()
        return self.code(self.initial_env(root_addr))

    def start(self, root_addr, halt):
        """Run a CPS program from the beginning until it halts."""
        self.run(self.code(self.initial_env(root_addr, halt)))

    def run(self, jump):
        """Trampoline: dispatch jumps until one is ``None``."""
        frames_add = self.frames.add
        bodies = 0
        try:
            while jump is not None:
                f, args = jump
                c = f.__class__
                if c is Closure:
                    env = f.env.copy()
                    if f.is_cont:
                        env[f.params[0]] = args[0]
                        if f.frame is not None:
                            frames_add(env[f.frame])
                    else:
                        params = f.params
                        if len(args) != len(params) + 2:
                            raise EvalError(
                                f"arity mismatch: expected {len(params)} argument(s), "
                                f"got {len(args) - 2}")
                        if f.addr_param is not None:
                            env[f.addr_param] = args[0]
                            frames_add(args[0])
                        env[f.k_param] = args[1]
                        i = 2
                        for p in params:
                            env[p] = args[i]
                            i += 1
                        bodies += 1
                    jump = f.code(env)
                elif c is HostCont:
                    jump = f.fn(*args)
                else:
                    raise EvalError(f"cannot apply non-function {value_repr(f)}")
        finally:
            self.bodies += bodies

    def call(self, f, addr, args):
        """Direct-style application of a user closure."""
        if f.__class__ is not Closure or f.is_cont:
            raise EvalError(f"cannot apply non-function {value_repr(f)}")
        params = f.params
        if len(args) != len(params):
            raise EvalError(f"arity mismatch: expected {len(params)} argument(s), got {len(args)}")
        env = f.env.copy()
        for p, v in zip(params, args):
            env[p] = v
        if f.addr_param is not None:
            env[f.addr_param] = addr
            self.frames.add(addr)
        self.bodies += 1
        return f.code(env)

    # -- compilation: trivial / direct ----------------------------------------

    def _direct(self, e):
        t = type(e)
        if t is Literal:
            v = e.value
            return lambda env: v
        if t is Var:
            n = e.name
            return lambda env: env[n]
        if t is Extend:
            base = self._direct(e.base)
            site = e.site_id
            return lambda env: base(env).extend(site)
        if t is PrimOp:
            return self._primop(e)
        if t in (Lambda, Tag):
            return self._lambda(e)
        if t is If:
            return self._if(e, self._direct)
        if t is Let:
            return self._let_direct(e)
        if t is Apply:
            return self._apply_direct(e)
        if t is CacheApply:
            return self._cache_direct(e)
        if t is Sample:
            return self._sample_direct(e)
        if t is Observe:
            return self._observe_direct(e)
        if t is QueryAdd:
            return self._query_direct(e)
        raise EvalError(f"cannot compile {t.__name__} in direct style")

    def _primop(self, e):
        fn = PRIMOPS[e.op][0]
        op = e.op
        args = [self._direct(a) for a in e.args]

        def wrap(exc):
            return EvalError(f"{op}: {exc}")

        if len(args) == 1:
            a0, = args

            def prim1(env):
                try:
                    return fn(a0(env))
                except (TypeError, ValueError, OverflowError, IndexError) as exc:
                    raise wrap(exc) from None
            return prim1
        if len(args) == 2:
            a0, a1 = args

            def prim2(env):
                try:
                    return fn(a0(env), a1(env))
                except (TypeError, ValueError, OverflowError, IndexError) as exc:
                    raise wrap(exc) from None
            return prim2

        def primn(env):
            try:
                return fn(*[a(env) for a in args])
            except (TypeError, ValueError, OverflowError, IndexError) as exc:
                raise wrap(exc) from None
        return primn

    def _lambda(self, e):
        tagged = type(e) is Tag
        lam = e.fn if tagged else e
        fvs = closure_free_vars(lam)
        body = self._serious(lam.body) if self.cps else self._direct(lam.body)
        lid, params = lam.lambda_id, lam.params
        ap, kp, is_cont, frame = lam.addr_param, lam.k_param, lam.is_cont, lam.frame

        def make(env):
            d = {n: env[n] for n in fvs}
            return Closure(lid, d, d, params, body, ap, kp, is_cont, frame, tagged)
        return make

    def _if(self, e, comp):
        cond = self._direct(e.cond)
        then = comp(e.then)
        else_ = comp(e.else_)

        def if_(env):
            c = cond(env)
            if c is True:
                return then(env)
            if c is False:
                return else_(env)
            raise EvalError(f"if: condition must be a boolean, got {value_repr(c)}")
        return if_

    def _let_direct(self, e):
        name, rec = e.name, e.rec
        bound = self._direct(e.bound)
        body = self._direct(e.body)

        def let(env):
            old = env.get(name, _MISSING)
            if rec:
                env[name] = None
                v = bound(env)
                if v.__class__ is Closure and name in v.env:
                    v.env[name] = v
            else:
                v = bound(env)
            env[name] = v
            r = body(env)
            if old is _MISSING:
                del env[name]
            else:
                env[name] = old
            return r
        return let

    def _operands(self, exprs):
        return [self._direct(a) for a in exprs]

    def _addr(self, e):
        return self._direct(e.addr) if e.addr is not None else (lambda env: None)

    def _apply_direct(self, e):
        callee = self._direct(e.callee)
        args = self._operands(e.args)
        addr = self._addr(e)
        call = self.call

        def apply(env):
            f = callee(env)
            return call(f, addr(env), [a(env) for a in args])
        return apply

    def _cache_direct(self, e):
        callee = self._direct(e.callee)
        args = self._operands(e.args)
        addr = self._addr(e)
        site = e.callsite_id
        rt = self.rt

        def cache(env):
            f = callee(env)
            return rt.cache_call(addr(env), f, [a(env) for a in args], site)
        return cache

    def _sample_direct(self, e):
        params = self._operands(e.params)
        addr = self._addr(e)
        name = e.erp
        rt = self.rt
        return lambda env: rt.sample(addr(env), name, tuple([p(env) for p in params]))

    def _observe_direct(self, e):
        params = self._operands(e.params)
        value = self._direct(e.value)
        addr = self._addr(e)
        name = e.erp
        rt = self.rt
        return lambda env: rt.observe(addr(env), name, tuple([p(env) for p in params]), value(env))

    def _query_direct(self, e):
        key = self._direct(e.key)
        value = self._direct(e.value)
        addr = self._addr(e)
        rt = self.rt
        return lambda env: rt.query_add(addr(env), key(env), value(env))

    # -- compilation: serious / CPS ------------------------------------------

    def _serious(self, e):
        t = type(e)
        if t is KCall:
            k = self._direct(e.k)
            v = self._direct(e.value)
            return lambda env: (k(env), (v(env),))
        if t is If:
            return self._if(e, self._serious)
        if t is Let:
            return self._let_cps(e)
        if t is Apply:
            callee = self._direct(e.callee)
            args = self._operands(e.args)
            addr = self._addr(e)
            k = self._direct(e.k)
            return lambda env: (callee(env), (addr(env), k(env), *[a(env) for a in args]))
        if t is CacheApply:
            callee = self._direct(e.callee)
            args = self._operands(e.args)
            addr = self._addr(e)
            k = self._direct(e.k)
            site = e.callsite_id
            rt = self.rt
            return lambda env: rt.cache_call_k(addr(env), k(env), callee(env),
                                               [a(env) for a in args], site)
        if t is Sample:
            params = self._operands(e.params)
            addr = self._addr(e)
            k = self._direct(e.k)
            name = e.erp
            rt = self.rt
            return lambda env: rt.sample_k(addr(env), k(env), name,
                                           tuple([p(env) for p in params]))
        if t is Observe:
            params = self._operands(e.params)
            value = self._direct(e.value)
            addr = self._addr(e)
            k = self._direct(e.k)
            name = e.erp
            rt = self.rt
            return lambda env: rt.observe_k(addr(env), k(env), name,
                                            tuple([p(env) for p in params]), value(env))
        if t is QueryAdd:
            key = self._direct(e.key)
            value = self._direct(e.value)
            addr = self._addr(e)
            k = self._direct(e.k)
            rt = self.rt
            return lambda env: rt.query_add_k(addr(env), k(env), key(env), value(env))
        raise EvalError(f"cannot compile {t.__name__} in CPS")

    def _let_cps(self, e):
        # each activation owns its env dict and control never returns to a
        # CPS let, so bindings need no restore
        name, rec = e.name, e.rec
        bound = self._direct(e.bound)
        body = self._serious(e.body)

        def let(env):
            if rec:
                env[name] = None
                v = bound(env)
                if v.__class__ is Closure and name in v.env:
                    v.env[name] = v
            else:
                v = bound(env)
            env[name] = v
            return body(env)
        return let


def run_deterministic(program: TransformedProgram, root_addr=None):
    """Evaluate a transformed program that makes no random choices.

    ``cache`` behaves as a plain call.  Direct-style programs recurse on the
    host stack; wrap in :func:`c3ppl.lang.run_deep` for deep recursion.
    """
    from .address import root as new_root

    rt = PlainCache()
    m = Machine(program, rt)
    addr = root_addr if root_addr is not None else new_root()
    if not m.cps:
        return m.run_direct(addr)
    out = {}

    def halt(v):
        out["v"] = v
        return None
    m.start(addr, HostCont(halt, "halt"))
    return out["v"]
