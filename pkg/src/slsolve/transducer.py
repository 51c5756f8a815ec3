"""Finite-state transducers (rational relations) over a shared alphabet.

Transitions carry a pair of *words* (input, output); authoring-friendly
machines like the HTML escapers write multi-character outputs directly.
:func:`transducer_normalize` rewrites any machine into the one-sided
single-character form the algebra below expects, and every image
operation normalizes its argument first, so callers may hand over either
form.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional

from .automata import (
    EPSILON,
    Alphabet,
    Nfa,
    nfa_eps_eliminate,
    nfa_from_word,
    nfa_trim,
)


@dataclass(frozen=True)
class Transducer:
    """A finite-state transducer with word-labelled transitions.

    States are ``range(n_states)``; each transition is
    ``(source, input_word, output_word, target)`` where either word may
    be empty.  A machine is *normalized* when every transition has at
    most one non-empty side, that side is a single character, and no
    transition is empty on both sides.
    """

    alphabet: Alphabet
    n_states: int
    transitions: tuple[tuple[int, str, str, int], ...]
    initial: int
    finals: frozenset[int]

    def __post_init__(self) -> None:
        if not (0 <= self.initial < self.n_states):
            raise ValueError("initial state out of range")
        for q, ins, outs, r in self.transitions:
            if not (0 <= q < self.n_states and 0 <= r < self.n_states):
                raise ValueError(f"transition {(q, ins, outs, r)} out of range")
            self.alphabet.check_word(ins)
            self.alphabet.check_word(outs)
        for f in self.finals:
            if not (0 <= f < self.n_states):
                raise ValueError("final state out of range")

    @property
    def is_normalized(self) -> bool:
        return all(
            (len(ins) == 1 and outs == EPSILON)
            or (ins == EPSILON and len(outs) == 1)
            for _, ins, outs, _ in self.transitions
        )

    def _key(self, t: tuple[int, str, str, int]) -> tuple:
        q, ins, outs, r = t
        return (q, len(ins), ins, len(outs), outs, r)

    @cached_property
    def arcs(self) -> dict[int, list[tuple[str, str, int]]]:
        out: dict[int, list[tuple[str, str, int]]] = {
            q: [] for q in range(self.n_states)
        }
        for q, ins, outs, r in sorted(set(self.transitions), key=self._key):
            out[q].append((ins, outs, r))
        return out

    @cached_property
    def input_arcs(self) -> dict[int, dict[str, list[tuple[str, int]]]]:
        """Arcs grouped by input word (normalized machines: char or epsilon)."""
        out: dict[int, dict[str, list[tuple[str, int]]]] = {
            q: {} for q in range(self.n_states)
        }
        for q, arcs in self.arcs.items():
            for ins, outs, r in arcs:
                out[q].setdefault(ins, []).append((outs, r))
        return out


def sorted_rules(
    transitions: Iterable[tuple[int, str, str, int]],
) -> tuple[tuple[int, str, str, int], ...]:
    return tuple(
        sorted(
            set(transitions),
            key=lambda t: (t[0], len(t[1]), t[1], len(t[2]), t[2], t[3]),
        )
    )


def identity_transducer(alphabet: Alphabet) -> Transducer:
    """Copies its input through unchanged."""
    rules = tuple((0, c, c, 0) for c in alphabet)
    return Transducer(alphabet, 1, rules, 0, frozenset({0}))


def erase_transducer(alphabet: Alphabet, chars: str) -> Transducer:
    """Deletes every occurrence of the given characters, copying the rest."""
    erased = set(chars)
    rules = tuple(
        (0, c, EPSILON if c in erased else c, 0) for c in alphabet
    )
    return Transducer(alphabet, 1, rules, 0, frozenset({0}))


def transducer_normalize(t: Transducer) -> Transducer:
    """Split word labels into single-character one-sided moves.

    Word labels are decomposed through intermediate states, and those
    states are shared aggressively — transitions from one state share a
    trie over their output words, and copy-style transitions (output
    ending in the consumed character) funnel through one state per
    (character, target) pair.  Sharing matters: sanitizer-style machines
    with one word-labeled rule per alphabet letter would otherwise blow
    up by an alphabet factor.  Fully-empty transitions are then removed
    by a closure pass (they act as epsilons), and the result is trimmed.
    The recognized relation is unchanged: within one original
    transition, input and output are unordered, so emitting before
    consuming is a legal decomposition.  Already-normalized machines are
    returned unchanged.
    """
    if t.is_normalized:
        return t
    chain: list[tuple[int, str, str, int]] = []
    empty: list[tuple[int, int]] = []
    n = t.n_states
    fresh: dict[tuple, int] = {}

    def state_for(key: tuple) -> int:
        nonlocal n
        if key not in fresh:
            fresh[key] = n
            n += 1
        return fresh[key]

    def emit_via_trie(q: int, word: str) -> int:
        """Emit ``word`` from ``q`` through the per-state output trie."""
        here = q
        for i, ch in enumerate(word):
            nxt = state_for(("pre", q, word[: i + 1]))
            chain.append((here, EPSILON, ch, nxt))
            here = nxt
        return here

    def emit_to(source: int, word: str, r: int) -> None:
        """Emit ``word`` from ``source``, ending exactly at ``r``."""
        if word == EPSILON:
            if source != r:
                empty.append((source, r))
            return
        here = source
        for i in range(len(word) - 1):
            nxt = state_for(("sfx", word[i + 1 :], r))
            chain.append((here, EPSILON, word[i], nxt))
            here = nxt
        chain.append((here, EPSILON, word[-1], r))

    for q, ins, outs, r in sorted(set(t.transitions), key=t._key):
        if ins == EPSILON and outs == EPSILON:
            empty.append((q, r))
        elif ins == EPSILON:
            emit_to(q, outs, r)
        elif len(ins) == 1:
            if outs != EPSILON and outs[-1] == ins:
                prefix_end = emit_via_trie(q, outs[:-1])
                echo = state_for(("echo", ins, r))
                chain.append((prefix_end, ins, EPSILON, echo))
                chain.append((echo, EPSILON, ins, r))
            else:
                prefix_end = emit_via_trie(q, outs)
                chain.append((prefix_end, ins, EPSILON, r))
        else:
            here = emit_via_trie(q, outs)
            for i in range(len(ins) - 1):
                nxt = state_for(("cons", q, outs, ins, i))
                chain.append((here, ins[i], EPSILON, nxt))
                here = nxt
            chain.append((here, ins[-1], EPSILON, r))

    # Deduplicate: trie sharing makes identical arcs common.
    chain = sorted(set(chain))

    # Remove the empty-on-both-sides transitions exactly like NFA epsilons.
    fwd: dict[int, set[int]] = {q: set() for q in range(n)}
    for q, r in empty:
        fwd[q].add(r)
    by_state: dict[int, list[tuple[str, str, int]]] = {q: [] for q in range(n)}
    for q, a, b, r in chain:
        by_state[q].append((a, b, r))

    def closure(q: int) -> set[int]:
        seen = {q}
        stack = [q]
        while stack:
            p = stack.pop()
            for r in fwd[p]:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return seen

    rules: list[tuple[int, str, str, int]] = []
    finals: set[int] = set()
    for q in range(n):
        cl = closure(q)
        if cl & t.finals:
            finals.add(q)
        for p in cl:
            for a, b, r in by_state[p]:
                rules.append((q, a, b, r))

    normalized = Transducer(t.alphabet, n, sorted_rules(rules), t.initial, frozenset(finals))
    return transducer_trim(normalized)


def transducer_trim(t: Transducer) -> Transducer:
    """Drop states that are unreachable or cannot reach acceptance."""
    fwd: dict[int, set[int]] = {q: set() for q in range(t.n_states)}
    rev: dict[int, set[int]] = {q: set() for q in range(t.n_states)}
    for q, _, _, r in t.transitions:
        fwd[q].add(r)
        rev[r].add(q)
    reach = {t.initial}
    queue = deque(reach)
    while queue:
        q = queue.popleft()
        for r in fwd[q]:
            if r not in reach:
                reach.add(r)
                queue.append(r)
    co = set(t.finals)
    queue = deque(co)
    while queue:
        q = queue.popleft()
        for p in rev[q]:
            if p not in co:
                co.add(p)
                queue.append(p)
    keep = sorted((reach & co) | {t.initial})
    kept = set(keep)
    remap = {q: i for i, q in enumerate(keep)}
    rules = tuple(
        (remap[q], a, b, remap[r])
        for q, a, b, r in t.transitions
        if q in kept and r in kept
    )
    return Transducer(
        t.alphabet,
        len(keep),
        sorted_rules(rules),
        remap[t.initial],
        frozenset(remap[f] for f in t.finals if f in kept),
    )


def transducer_slice(t: Transducer, source: int, target: int) -> Transducer:
    """Same rules, re-anchored to run from ``source`` to ``target``."""
    return replace(t, initial=source, finals=frozenset({target}))


def _image(
    t: Transducer, a: Nfa, forward: bool, within: Optional[Nfa] = None
) -> Nfa:
    """Shared lazy product behind pre/post image.

    ``forward=True`` computes the post-image (outputs compatible with an
    input in ``a``); ``forward=False`` the pre-image.  The free side of
    the transducer becomes the letters of the result, the bound side is
    matched against ``a``.

    Product arcs whose free side is empty would be epsilon transitions
    of the result; instead of materialising them they are folded away
    during the walk with a memoised silent closure per (transducer,
    bound) state pair, so the result is epsilon-free from the start.

    ``within``, when given, is intersected in on the fly: its states
    ride along on the free side, and moves it cannot follow are never
    expanded.  A small bounding automaton therefore prunes the whole
    exploration rather than filtering a fully built product after the
    fact.
    """
    if t.alphabet != a.alphabet:
        raise ValueError("alphabet mismatch")
    if within is not None and within.alphabet != t.alphabet:
        raise ValueError("alphabet mismatch")
    t = t if t.is_normalized else transducer_normalize(t)
    a = nfa_eps_eliminate(a)
    w = nfa_eps_eliminate(within) if within is not None else None

    t_arcs = t.arcs
    a_by_sym = a.arcs_by_symbol
    closures: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}

    def closure_of(ts: int, as_: int) -> tuple[tuple[int, int], ...]:
        """All (transducer, bound) pairs reachable by free-empty arcs."""
        got = closures.get((ts, as_))
        if got is not None:
            return got
        seen = {(ts, as_)}
        stack = [(ts, as_)]
        while stack:
            q, s = stack.pop()
            for ins, outs, tr in t_arcs[q]:
                bound, free = (ins, outs) if forward else (outs, ins)
                if free != EPSILON:
                    continue
                if bound == EPSILON:
                    targets = ((tr, s),)
                else:
                    targets = tuple(
                        (tr, s2) for s2 in a_by_sym[s].get(bound, ())
                    )
                for nxt in targets:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
        got = tuple(sorted(seen))
        closures[(ts, as_)] = got
        return got

    start = (t.initial, a.initial, w.initial if w is not None else -1)
    ids = {start: 0}
    order = [start]
    queue = deque([start])
    transitions: list[tuple[int, str, int]] = []
    finals = set()
    while queue:
        state = queue.popleft()
        ts, as_, ws = state
        sid = ids[state]
        cl = closure_of(ts, as_)
        if any(q in t.finals and s in a.finals for q, s in cl):
            if w is None or ws in w.finals:
                finals.add(sid)
        for q, s in cl:
            for ins, outs, tr in t_arcs[q]:
                bound, free = (ins, outs) if forward else (outs, ins)
                if free == EPSILON:
                    continue
                if w is None:
                    w_targets: tuple[int, ...] = (-1,)
                else:
                    w_targets = w.arcs_by_symbol[ws].get(free, ())
                    if not w_targets:
                        continue
                if bound == EPSILON:
                    ta_targets = ((tr, s),)
                else:
                    ta_targets = tuple(
                        (tr, s2) for s2 in a_by_sym[s].get(bound, ())
                    )
                for pair in ta_targets:
                    for wt in w_targets:
                        nxt = (pair[0], pair[1], wt)
                        nid = ids.get(nxt)
                        if nid is None:
                            nid = ids[nxt] = len(order)
                            order.append(nxt)
                            queue.append(nxt)
                        transitions.append((sid, free, nid))
    product = Nfa(
        t.alphabet, len(order), tuple(set(transitions)), 0, frozenset(finals)
    )
    return nfa_trim(product)


def post_image(t: Transducer, a: Nfa) -> Nfa:
    """NFA for { y : (x, y) in the relation for some x accepted by ``a`` }."""
    return _image(t, a, forward=True)


def pre_image(t: Transducer, a: Nfa) -> Nfa:
    """NFA for { x : (x, y) in the relation for some y accepted by ``a`` }."""
    return _image(t, a, forward=False)


def pre_image_within(t: Transducer, a: Nfa, within: Nfa) -> Nfa:
    """``pre_image(t, a)`` intersected with ``within``, fused into one walk.

    Equivalent to ``nfa_intersect(within, pre_image(t, a))`` but the
    bounding automaton prunes during product construction, which matters
    when the unrestricted pre-image would be large.
    """
    return _image(t, a, forward=False, within=within)


def apply_function(t: Transducer, word: str) -> Nfa:
    """NFA of all outputs the transducer can produce on the given input."""
    return post_image(t, nfa_from_word(word, t.alphabet))


def transducer_membership(t: Transducer, x: str, y: str) -> bool:
    """Does the relation contain the pair ``(x, y)``?

    Breadth-first search over positions ``(i, j)`` and states; every
    move of a normalized machine advances ``i + j``, so the search space
    is finite.
    """
    t = t if t.is_normalized else transducer_normalize(t)
    t.alphabet.check_word(x)
    t.alphabet.check_word(y)
    start = (0, 0, t.initial)
    seen = {start}
    queue = deque([start])
    while queue:
        i, j, q = queue.popleft()
        if i == len(x) and j == len(y) and q in t.finals:
            return True
        for ins, outs, r in t.arcs[q]:
            if ins != EPSILON:
                if i < len(x) and x[i] == ins:
                    nxt = (i + 1, j, r)
                else:
                    continue
            else:
                if j < len(y) and y[j] == outs:
                    nxt = (i, j + 1, r)
                else:
                    continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False
