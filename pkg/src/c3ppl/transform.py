"""Compile-time passes: caching, function tagging, addressing and CPS.

Each pass is a pure function from AST to AST.  They compose in the fixed order
caching -> tagging -> addressing -> CPS; the engines enable different subsets
(see :data:`PIPELINES`).

Names introduced by the passes start with ``%`` so they can never collide with
surface identifiers:

    %a    current address (parameter of every function, bound at top level
          to the chain's root address)
    %k    current continuation (parameter of every function after CPS)
    %vN   continuation parameters
    %jN   join points: continuations bound once and shared by both arms of
          an ``if`` or pulled out of a ``let`` scope
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable

from .lang import (
    Apply, CacheApply, Expr, Extend, If, KCall, Lambda, Let, Literal, Observe,
    PrimOp, QueryAdd, Sample, Tag, Var, free_vars_ordered, walk,
)

ADDR = "%a"
KONT = "%k"

PASS_ORDER = ("caching", "tagging", "addressing", "cps")

PIPELINES = {
    "lightweight": ("addressing",),
    "caching": ("caching", "tagging", "addressing"),
    "cps": ("addressing", "cps"),
    "c3": ("caching", "tagging", "addressing", "cps"),
}


def _map(e: Expr, f: Callable[[Expr], Expr]) -> Expr:
    """Rebuild ``e`` with ``f`` applied to each immediate subexpression."""
    t = type(e)
    if t in (Literal, Var):
        return e
    if t is Lambda:
        return replace(e, body=f(e.body))
    if t in (Apply, CacheApply):
        return replace(e, callee=f(e.callee), args=tuple(f(a) for a in e.args),
                       addr=None if e.addr is None else f(e.addr),
                       k=None if e.k is None else f(e.k))
    if t is If:
        return If(f(e.cond), f(e.then), f(e.else_))
    if t is Let:
        return Let(e.name, f(e.bound), f(e.body), e.rec)
    if t is PrimOp:
        return PrimOp(e.op, tuple(f(a) for a in e.args))
    if t is Sample:
        return replace(e, params=tuple(f(p) for p in e.params))
    if t is Observe:
        return replace(e, params=tuple(f(p) for p in e.params), value=f(e.value))
    if t is QueryAdd:
        return replace(e, key=f(e.key), value=f(e.value))
    if t is Tag:
        return replace(e, fn=f(e.fn))
    if t is Extend:
        return replace(e, base=f(e.base))
    if t is KCall:
        return KCall(f(e.k), f(e.value))
    raise TypeError(f"unknown node {t.__name__}")


def caching_transform(e: Expr) -> Expr:
    """Route every user-function call through the ``cache`` intrinsic."""
    def go(x):
        if type(x) is Apply:
            return CacheApply(go(x.callee), tuple(go(a) for a in x.args),
                              x.callsite_id, x.addr, x.k)
        return _map(x, go)
    return go(e)


def tagging_transform(e: Expr) -> Expr:
    """Wrap every lambda so its closures carry (lambda id, free-var snapshot)."""
    def go(x):
        if type(x) is Tag:
            return replace(x, fn=_map(x.fn, go))
        if type(x) is Lambda and not x.is_cont:
            return Tag(_map(x, go), x.lambda_id, x.free_vars)
        return _map(x, go)
    return go(e)


def addressing_transform(e: Expr) -> Expr:
    """Thread an explicit address through every function and intrinsic."""
    here = Var(ADDR)

    def go(x):
        t = type(x)
        if t is Lambda and not x.is_cont:
            return replace(x, body=go(x.body), addr_param=ADDR)
        if t in (Apply, CacheApply):
            return replace(x, callee=go(x.callee), args=tuple(go(a) for a in x.args),
                           addr=Extend(here, x.callsite_id))
        if t in (Sample, Observe, QueryAdd):
            return replace(_map(x, go), addr=Extend(here, x.site_id))
        return _map(x, go)
    return go(e)


# ---------------------------------------------------------------------------
# CPS


_TRIVIAL = (Literal, Var, Lambda, Tag, Extend)


def is_trivial(e: Expr) -> bool:
    t = type(e)
    if t in _TRIVIAL:
        return True
    if t is PrimOp:
        return all(is_trivial(a) for a in e.args)
    return False


class _Cps:
    def __init__(self, addressed: bool):
        self.counter = itertools.count()
        self.frame = ADDR if addressed else None

    def fresh(self, prefix):
        return f"%{prefix}{next(self.counter)}"

    def cont(self, param, body):
        return Lambda((param,), body, -1, (), is_cont=True, frame=self.frame)

    def cont_from(self, ctx):
        v = self.fresh("v")
        return self.cont(v, ctx(Var(v)))

    def lam(self, x: Lambda) -> Lambda:
        return replace(x, body=self.tail(x.body, Var(KONT)), k_param=KONT)

    def triv(self, x):
        t = type(x)
        if t in (Literal, Var, Extend):
            return x
        if t is Lambda:
            return self.lam(x)
        if t is Tag:
            return replace(x, fn=self.lam(x.fn))
        if t is PrimOp:
            return PrimOp(x.op, tuple(self.triv(a) for a in x.args))
        raise TypeError(t)

    def values(self, xs, ctx):
        """Convert a left-to-right sequence of expressions to trivial form."""
        xs = list(xs)
        out: list = []

        def step(i):
            if i == len(xs):
                return ctx(tuple(out))
            x = xs[i]
            if is_trivial(x):
                out.append(self.triv(x))
                return step(i + 1)

            def rest(v):
                out.append(v)
                return step(i + 1)
            return self.value(x, rest)
        return step(0)

    def bind_k(self, k, build):
        """Name a continuation lambda before it is duplicated or scoped over."""
        if type(k) is Var:
            return build(k)
        j = self.fresh("j")
        return Let(j, k, build(Var(j)))

    def value(self, x, ctx):
        """``x`` in non-tail position; ``ctx`` builds the code that uses its value."""
        if is_trivial(x):
            return ctx(self.triv(x))
        t = type(x)
        if t is PrimOp:
            return self.values(x.args, lambda vs: ctx(PrimOp(x.op, vs)))
        if t in (If, Let):
            # reify the context once, outside any binder of x
            j = self.fresh("j")
            return Let(j, self.cont_from(ctx), self.tail(x, Var(j)))
        return self.serious(x, self.cont_from(ctx))

    def tail(self, x, k):
        """``x`` in tail position with continuation expression ``k``."""
        if is_trivial(x):
            return KCall(k, self.triv(x))
        t = type(x)
        if t is PrimOp:
            return self.values(x.args, lambda vs: KCall(k, PrimOp(x.op, vs)))
        if t is If:
            return self.bind_k(k, lambda kv: self.value(
                x.cond, lambda c: If(c, self.tail(x.then, kv), self.tail(x.else_, kv))))
        if t is Let:
            def build(kv):
                if is_trivial(x.bound):
                    return Let(x.name, self.triv(x.bound), self.tail(x.body, kv), x.rec)
                return self.tail(x.bound, self.cont(x.name, self.tail(x.body, kv)))
            return self.bind_k(k, build)
        return self.serious(x, k)

    def serious(self, x, k):
        """Calls and intrinsics: evaluate operands, then pass ``k`` explicitly."""
        t = type(x)
        if t in (Apply, CacheApply):
            return self.values((x.callee,) + x.args, lambda vs: replace(
                x, callee=vs[0], args=vs[1:], k=k))
        if t is Sample:
            return self.values(x.params, lambda vs: replace(x, params=vs, k=k))
        if t is Observe:
            return self.values(x.params + (x.value,), lambda vs: replace(
                x, params=vs[:-1], value=vs[-1], k=k))
        if t is QueryAdd:
            return self.values((x.key, x.value), lambda vs: replace(
                x, key=vs[0], value=vs[1], k=k))
        raise TypeError(f"cps: unexpected {t.__name__}")


def cps_transform(e: Expr) -> Expr:
    """Convert to continuation-passing style.

    The result is a serious expression whose free variable ``%k`` is the
    top-level continuation; ``%a`` is free too when the input was addressed.
    Continuation lambdas are marked ``is_cont`` and record the address
    variable of the function frame they resume.
    """
    addressed = any(type(x) is Extend for x in walk(e))
    return _Cps(addressed).tail(e, Var(KONT))


_PASSES = {
    "caching": caching_transform,
    "tagging": tagging_transform,
    "addressing": addressing_transform,
    "cps": cps_transform,
}


@dataclass(frozen=True)
class TransformedProgram:
    ast: Expr
    callsite_count: int
    lambda_count: int
    passes: tuple
    stages: tuple = ()  # (pass name, AST after that pass)

    @property
    def cps(self) -> bool:
        return "cps" in self.passes

    @property
    def addressed(self) -> bool:
        return "addressing" in self.passes


def run_pipeline(ast: Expr, passes) -> TransformedProgram:
    """Apply the given passes in canonical order."""
    passes = tuple(passes)
    unknown = set(passes) - set(PASS_ORDER)
    if unknown:
        raise ValueError(f"unknown pass(es): {sorted(unknown)}")
    if "caching" in passes and not {"tagging", "addressing"} <= set(passes):
        raise ValueError("caching requires the tagging and addressing passes")
    ordered = tuple(p for p in PASS_ORDER if p in passes)
    callsites = sum(1 for x in walk(ast) if type(x) is Apply)
    lambdas = sum(1 for x in walk(ast) if type(x) is Lambda)
    stages = []
    out = ast
    for p in ordered:
        out = _PASSES[p](out)
        stages.append((p, out))
    return TransformedProgram(out, callsites, lambdas, ordered, tuple(stages))


def for_engine(ast: Expr, engine: str) -> TransformedProgram:
    return run_pipeline(ast, PIPELINES[engine])


def closure_free_vars(lam: Lambda) -> tuple:
    """Variables a compiled closure for ``lam`` must capture."""
    fv = free_vars_ordered(lam)
    if lam.is_cont and lam.frame is not None and lam.frame not in fv:
        fv = fv + (lam.frame,)
    return fv
