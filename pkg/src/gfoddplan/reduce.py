"""Model-checking reduction over a set of focus states."""
from __future__ import annotations

from typing import Sequence

from .diagram import ZERO, Gfodd, Leaf, mk, normalize
from .evaluate import edge_bit, eval_ve, mask_to_edges
from .relational import Interpretation


def marked_edges(f: Gfodd, states: Sequence[Interpretation]) -> int:
    """Union of the edge sets the evaluator marks on each state (as a bitmask)."""
    mask = 0
    for s in states:
        mask |= eval_ve(f, s).edge_mask
    return mask


def reduce_with_report(f: Gfodd, states: Sequence[Interpretation]):
    """Reduced diagram plus the list of edges redirected to the zero leaf."""
    if not states:
        raise ValueError("reduction needs at least one focus state")
    if f.is_constant:
        return f, []
    mask = marked_edges(f, states)
    num = f.node_ids
    removed = []
    memo: dict = {}
    for n in reversed(f.nodes):
        if type(n) is Leaf:
            memo[id(n)] = n
            continue
        k = num[id(n)]
        hi = memo[id(n.hi)] if mask & edge_bit(k, True) else ZERO
        lo = memo[id(n.lo)] if mask & edge_bit(k, False) else ZERO
        if not mask & edge_bit(k, True):
            removed.append((k, "t"))
        if not mask & edge_bit(k, False):
            removed.append((k, "f"))
        memo[id(n)] = mk(n.atom, hi, lo)
    g = normalize(Gfodd(f.prefix, memo[id(f.root)], validate=False))
    return g, sorted(removed)


def reduce_on(f: Gfodd, states: Sequence[Interpretation]) -> Gfodd:
    """Redirect every edge no focus-state evaluation uses to 0, then normalize.

    The result agrees with ``f`` on every focus state and is a pointwise lower
    bound elsewhere.
    """
    return reduce_with_report(f, states)[0]


def all_focus_states(domain, shops: int = 2) -> list[Interpretation]:
    """Every consistent state of ``domain`` with ``shops`` objects per scaled sort."""
    from .errors import EmptyDomainError
    if shops < 1:
        raise EmptyDomainError("focus states need at least one object per scaled sort")
    return domain.enumerate_states(shops)


__all__ = ["reduce_on", "reduce_with_report", "marked_edges", "all_focus_states", "mask_to_edges"]
