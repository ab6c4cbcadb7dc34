"""Structural addresses.

An address is a path of SourceIds from the chain's root.  Addresses are
interned as a tree of linked objects: ``a.extend(site)`` always returns the
same child object, so equality is identity and hashing is O(1) regardless of
depth.  Each chain owns one root; addresses from different roots compare
through :meth:`Address.path`.
"""

from __future__ import annotations

_MEMO_DEPTH = 512


class Address:
    __slots__ = ("parent", "site", "depth", "_kids", "_path", "__weakref__")

    def __init__(self, parent: "Address | None" = None, site: int | None = None):
        self.parent = parent
        self.site = site
        self.depth = 0 if parent is None else parent.depth + 1
        self._kids: dict = {}
        self._path = () if parent is None else None

    def extend(self, site: int) -> "Address":
        kid = self._kids.get(site)
        if kid is None:
            kid = self._kids[site] = Address(self, site)
        return kid

    def path(self) -> tuple:
        p = self._path
        if p is None:
            sites = []
            node = self
            while node._path is None:
                sites.append(node.site)
                node = node.parent
            sites.reverse()
            p = node._path + tuple(sites)
            # memoizing very deep paths would cost O(depth^2) memory
            if self.depth <= _MEMO_DEPTH:
                self._path = p
        return p

    def __len__(self):
        return self.depth

    def __repr__(self):
        return "[" + ",".join(map(str, self.path())) + "]"


def root() -> Address:
    return Address()
