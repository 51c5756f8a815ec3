"""Straight-line form: definition discipline, ordering, and split counts.

A conjunction of relational constraints is *straight-line* when every
variable has at most one defining equation and the definitions can be
ordered so each right-hand side mentions only source variables or
variables defined earlier.  Equivalently: definitions are unique and the
use-definition graph is acyclic.  This module produces that ordering (or
a minimal witness of failure) and computes the per-variable split
counts that drive the decision procedure and the dimension parameter.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional

from .constraints import ConcatEq, Lit, Problem, RelAtom, Var, problem_wellformed


class NotStraightLine(ValueError):
    """The relational constraints are not in straight-line form."""


class MultiplyDefined(NotStraightLine):
    def __init__(self, var: str) -> None:
        super().__init__(f"variable {var!r} has more than one defining equation")
        self.var = var


class CyclicDefinition(NotStraightLine):
    def __init__(self, cycle: tuple[str, ...]) -> None:
        shown = " -> ".join(cycle)
        super().__init__(f"definitions form a cycle: {shown}")
        self.cycle = cycle


@dataclass(frozen=True)
class DependencyGraph:
    """The result of a successful straight-line check.

    ``order`` lists every string variable in a valid evaluation order
    (ties broken by declaration position, so it is canonical).
    ``defining`` maps each non-source variable to its equation; ``uses``
    maps it to the distinct variables its right-hand side mentions, in
    first-occurrence order.
    """

    order: tuple[str, ...]
    sources: tuple[str, ...]
    defining: Mapping[str, RelAtom]
    uses: Mapping[str, tuple[str, ...]]

    def is_source(self, var: str) -> bool:
        return var not in self.defining


def check_straightline(problem: Problem) -> DependencyGraph:
    """Verify straight-line form and return the canonical ordering.

    :raises MultiplyDefined: if some variable has two defining equations.
    :raises CyclicDefinition: if definitions are mutually recursive; the
        exception carries a shortest cycle, first variable repeated at
        the end.
    :raises ValueError: if the problem is not well-formed at all.
    """
    errors = problem_wellformed(problem)
    if errors:
        raise ValueError("; ".join(errors))

    defining: dict[str, RelAtom] = {}
    for rel in problem.relations:
        if rel.lhs in defining:
            raise MultiplyDefined(rel.lhs)
        defining[rel.lhs] = rel

    uses: dict[str, tuple[str, ...]] = {}
    for var, rel in defining.items():
        if isinstance(rel, ConcatEq):
            used = tuple(
                dict.fromkeys(
                    item.name for item in rel.items if isinstance(item, Var)
                )
            )
        else:
            used = (rel.arg,)
        uses[var] = used

    decl_index = {v: i for i, v in enumerate(problem.str_vars)}
    pending = {v: len(uses.get(v, ())) for v in problem.str_vars}
    dependents: dict[str, list[str]] = {v: [] for v in problem.str_vars}
    for var in problem.str_vars:
        for used in uses.get(var, ()):
            dependents[used].append(var)

    ready = [decl_index[v] for v in problem.str_vars if pending[v] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        var = problem.str_vars[heapq.heappop(ready)]
        order.append(var)
        for dependent in dependents[var]:
            pending[dependent] -= 1
            if pending[dependent] == 0:
                heapq.heappush(ready, decl_index[dependent])

    if len(order) < len(problem.str_vars):
        raise CyclicDefinition(_shortest_cycle(problem, uses, pending))

    sources = tuple(v for v in problem.str_vars if v not in defining)
    return DependencyGraph(tuple(order), sources, defining, uses)


def _shortest_cycle(
    problem: Problem,
    uses: dict[str, tuple[str, ...]],
    pending: dict[str, int],
) -> tuple[str, ...]:
    """A shortest definition cycle among the unresolvable variables.

    Deterministic: candidate start variables are tried in declaration
    order and the breadth-first search expands dependencies in
    declaration order, so the same problem always reports the same
    witness.
    """
    decl_index = {v: i for i, v in enumerate(problem.str_vars)}
    residual = {v for v, n in pending.items() if n > 0}

    def deps(var: str) -> list[str]:
        return sorted(
            (u for u in uses.get(var, ()) if u in residual),
            key=decl_index.__getitem__,
        )

    for start in sorted(residual, key=decl_index.__getitem__):
        parent: dict[str, str] = {}
        queue = deque([start])
        found = None
        while queue and found is None:
            var = queue.popleft()
            for nxt in deps(var):
                if nxt == start:
                    found = var
                    break
                if nxt not in parent:
                    parent[nxt] = var
                    queue.append(nxt)
        if found is not None:
            path = [found]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return (start, *path[1:], start) if len(path) > 1 else (start, start)
    raise AssertionError("no cycle among residual variables")


@dataclass(frozen=True)
class SplitCounts:
    """Per-variable upper bounds on how many pieces a value may be cut into.

    Sources count 1.  A transducer image inherits its argument's count.
    A concatenation sums the counts of its variable occurrences (each
    occurrence separately); literal pieces add 1 each only when
    ``count_literals`` is set, which is the convention used for the
    dimension statistic's constant-counting mode.
    """

    counts: Mapping[str, int]
    count_literals: bool


def split_counts(
    problem: Problem,
    graph: Optional[DependencyGraph] = None,
    count_literals: bool = False,
) -> SplitCounts:
    if graph is None:
        graph = check_straightline(problem)
    counts: dict[str, int] = {}
    for var in graph.order:
        rel = graph.defining.get(var)
        if rel is None:
            counts[var] = 1
        elif isinstance(rel, ConcatEq):
            total = 0
            for item in rel.items:
                if isinstance(item, Var):
                    total += counts[item.name]
                elif count_literals and isinstance(item, Lit):
                    total += 1
            counts[var] = total
        else:
            counts[var] = counts[rel.arg]
    return SplitCounts(counts, count_literals)


def dimension(problem: Problem, count_constants: bool = False) -> int:
    """The largest split count over all variables (0 for variable-free input).

    This is the fragment's complexity dial: solving is exponential only
    in this number.  With ``count_constants`` the literal pieces of
    concatenations are tallied too, matching the coarser statistic
    sometimes quoted for benchmark families.
    """
    counts = split_counts(problem, count_literals=count_constants).counts
    return max(counts.values(), default=0)
