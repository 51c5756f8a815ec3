"""Finite-state machinery: alphabets and nondeterministic automata.

Everything downstream (regular constraints, transducer images, the
decision procedure itself) reduces to a small algebra over these
machines, so the operations here are written for determinism first:
states are dense ints, iteration is id-ordered, and every constructed
machine depends only on its inputs, never on hash order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

#: The empty word, used as the epsilon label on transitions.
EPSILON = ""


@dataclass(frozen=True)
class Alphabet:
    """An ordered finite alphabet of single characters.

    The order is significant: shortest-witness extraction breaks length
    ties lexicographically *in alphabet order*, which is the declaration
    order of the problem's ``alphabet`` directive, not codepoint order.
    """

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        seen = set()
        for s in self.symbols:
            if len(s) != 1:
                raise ValueError(f"alphabet symbol must be a single character: {s!r}")
            if s in seen:
                raise ValueError(f"duplicate alphabet symbol: {s!r}")
            seen.add(s)

    @staticmethod
    def of(chars: Iterable[str]) -> "Alphabet":
        return Alphabet(tuple(chars))

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: str) -> int:
        return self._index[symbol]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def check_word(self, word: str) -> None:
        for ch in word:
            if ch not in self._index:
                raise ValueError(f"character {ch!r} not in alphabet")


@dataclass(frozen=True)
class Nfa:
    """A nondeterministic finite automaton with a single initial state.

    States are exactly ``range(n_states)``.  Transitions carry either a
    single alphabet character or :data:`EPSILON`.  The transition tuple
    is kept sorted by (source, symbol index, target) so that two equal
    machines compare equal and all iteration is reproducible.
    """

    alphabet: Alphabet
    n_states: int
    transitions: tuple[tuple[int, str, int], ...]
    initial: int
    finals: frozenset[int]

    def __post_init__(self) -> None:
        if not (0 <= self.initial < self.n_states):
            raise ValueError("initial state out of range")
        for q, sym, r in self.transitions:
            if not (0 <= q < self.n_states and 0 <= r < self.n_states):
                raise ValueError(f"transition {(q, sym, r)} out of range")
            if sym != EPSILON and sym not in self.alphabet:
                raise ValueError(f"transition symbol {sym!r} not in alphabet")
        for f in self.finals:
            if not (0 <= f < self.n_states):
                raise ValueError("final state out of range")

    def _sym_key(self, sym: str) -> int:
        return -1 if sym == EPSILON else self.alphabet.index(sym)

    @cached_property
    def arcs(self) -> dict[int, list[tuple[str, int]]]:
        """Outgoing arcs per state, epsilon first, then alphabet order."""
        idx = self.alphabet._index
        decorated = {
            (q, -1 if sym == EPSILON else idx[sym], r): (q, sym, r)
            for q, sym, r in self.transitions
        }
        out: dict[int, list[tuple[str, int]]] = {q: [] for q in range(self.n_states)}
        for key in sorted(decorated):
            q, sym, r = decorated[key]
            out[q].append((sym, r))
        return out

    @cached_property
    def arcs_by_symbol(self) -> dict[int, dict[str, tuple[int, ...]]]:
        out: dict[int, dict[str, list[int]]] = {q: {} for q in range(self.n_states)}
        for q, arcs in self.arcs.items():
            for sym, r in arcs:
                out[q].setdefault(sym, []).append(r)
        return {
            q: {sym: tuple(rs) for sym, rs in by_sym.items()}
            for q, by_sym in out.items()
        }

    @cached_property
    def has_epsilon(self) -> bool:
        return any(sym == EPSILON for _, sym, _ in self.transitions)

    def eps_closure(self, states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            q = stack.pop()
            for sym, r in self.arcs[q]:
                if sym == EPSILON and r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)

    def step(self, states: frozenset[int], symbol: str) -> frozenset[int]:
        """One closed move: epsilon-closure after reading ``symbol``."""
        nxt = set()
        for q in states:
            for r in self.arcs_by_symbol[q].get(symbol, ()):
                nxt.add(r)
        return self.eps_closure(nxt)

    def run(self, word: str) -> frozenset[int]:
        states = self.eps_closure({self.initial})
        for ch in word:
            states = self.step(states, ch)
            if not states:
                break
        return states


def sorted_transitions(
    alphabet: Alphabet, transitions: Iterable[tuple[int, str, int]]
) -> tuple[tuple[int, str, int], ...]:
    idx = alphabet._index
    decorated = {
        (q, -1 if sym == EPSILON else idx[sym], r): (q, sym, r)
        for q, sym, r in transitions
    }
    return tuple(decorated[key] for key in sorted(decorated))


def nfa_from_word(word: str, alphabet: Alphabet) -> Nfa:
    """The automaton accepting exactly ``word`` (a straight chain)."""
    alphabet.check_word(word)
    transitions = tuple((i, ch, i + 1) for i, ch in enumerate(word))
    return Nfa(alphabet, len(word) + 1, transitions, 0, frozenset({len(word)}))


def nfa_none(alphabet: Alphabet) -> Nfa:
    """The automaton accepting nothing."""
    return Nfa(alphabet, 1, (), 0, frozenset())


def nfa_universal(alphabet: Alphabet) -> Nfa:
    """The automaton accepting every word."""
    transitions = tuple((0, s, 0) for s in alphabet)
    return Nfa(alphabet, 1, transitions, 0, frozenset({0}))


def nfa_membership(nfa: Nfa, word: str) -> bool:
    return bool(nfa.run(word) & nfa.finals)


def nfa_eps_eliminate(nfa: Nfa) -> Nfa:
    """A language-equivalent automaton with no epsilon transitions.

    States are preserved; each state inherits the non-epsilon arcs and
    finality of its epsilon-closure.
    """
    if not nfa.has_epsilon:
        return nfa
    transitions: list[tuple[int, str, int]] = []
    finals = set()
    for q in range(nfa.n_states):
        closure = nfa.eps_closure({q})
        if closure & nfa.finals:
            finals.add(q)
        for p in closure:
            for sym, r in nfa.arcs[p]:
                if sym != EPSILON:
                    transitions.append((q, sym, r))
    return Nfa(
        nfa.alphabet,
        nfa.n_states,
        sorted_transitions(nfa.alphabet, transitions),
        nfa.initial,
        frozenset(finals),
    )


def nfa_trim(nfa: Nfa) -> Nfa:
    """Restrict to states both reachable and co-reachable, renumbered densely.

    The initial state is always kept (possibly as a dead state) so the
    result is well-formed even for the empty language.
    """
    fwd: dict[int, set[int]] = {q: set() for q in range(nfa.n_states)}
    rev: dict[int, set[int]] = {q: set() for q in range(nfa.n_states)}
    for q, _, r in nfa.transitions:
        fwd[q].add(r)
        rev[r].add(q)
    reach = {nfa.initial}
    queue = deque([nfa.initial])
    while queue:
        q = queue.popleft()
        for r in fwd[q]:
            if r not in reach:
                reach.add(r)
                queue.append(r)
    co = set(nfa.finals)
    queue = deque(co)
    while queue:
        q = queue.popleft()
        for p in rev[q]:
            if p not in co:
                co.add(p)
                queue.append(p)
    keep = sorted((reach & co) | {nfa.initial})
    remap = {q: i for i, q in enumerate(keep)}
    kept = set(keep)
    transitions = tuple(
        (remap[q], sym, remap[r])
        for q, sym, r in nfa.transitions
        if q in kept and r in kept
    )
    return Nfa(
        nfa.alphabet,
        len(keep),
        sorted_transitions(nfa.alphabet, transitions),
        remap[nfa.initial],
        frozenset(remap[f] for f in nfa.finals if f in kept),
    )


def nfa_reduce(nfa: Nfa) -> Nfa:
    """Shrink the machine without changing its language.

    Quotients by forward bisimulation: states with the same acceptance
    status and, symbol for symbol, the same set of successor classes are
    merged, repeatedly, until stable.  Chained products (images of
    images, intersections of intersections) leave many states behind
    that differ in history but not in future behaviour; folding them
    keeps the sizes from compounding across a pipeline.
    """
    if nfa.has_epsilon:
        nfa = nfa_eps_eliminate(nfa)
    nfa = nfa_trim(nfa)
    n = nfa.n_states
    if n <= 1:
        return nfa
    idx = nfa.alphabet._index
    succ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for q, sym, r in nfa.transitions:
        succ[q].append((idx[sym], r))
    block = [1 if q in nfa.finals else 0 for q in range(n)]
    n_blocks = len(set(block))
    while True:
        sigs: dict[tuple[int, frozenset[tuple[int, int]]], int] = {}
        new_block = [0] * n
        for q in range(n):
            sig = (block[q], frozenset((s, block[r]) for s, r in succ[q]))
            bid = sigs.get(sig)
            if bid is None:
                bid = sigs[sig] = len(sigs)
            new_block[q] = bid
        stable = len(sigs) == n_blocks
        block = new_block
        n_blocks = len(sigs)
        if stable:
            break
    if n_blocks == n:
        return nfa
    transitions = sorted_transitions(
        nfa.alphabet,
        ((block[q], sym, block[r]) for q, sym, r in nfa.transitions),
    )
    return Nfa(
        nfa.alphabet,
        n_blocks,
        transitions,
        block[nfa.initial],
        frozenset(block[f] for f in nfa.finals),
    )


def nfa_intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product automaton for the intersection, built lazily and trimmed.

    Only pairs reachable from the initial pair are materialised; the
    result is then trimmed of non-co-reachable pairs.  Pair ids are
    assigned in BFS discovery order.
    """
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    a = nfa_eps_eliminate(a)
    b = nfa_eps_eliminate(b)
    start = (a.initial, b.initial)
    ids: dict[tuple[int, int], int] = {start: 0}
    order = [start]
    queue = deque([start])
    transitions: list[tuple[int, str, int]] = []
    while queue:
        pair = queue.popleft()
        qa, qb = pair
        arcs_b = b.arcs_by_symbol[qb]
        for sym, dests_a in a.arcs_by_symbol[qa].items():
            dests_b = arcs_b.get(sym)
            if not dests_b:
                continue
            for ra in dests_a:
                for rb in dests_b:
                    nxt = (ra, rb)
                    if nxt not in ids:
                        ids[nxt] = len(order)
                        order.append(nxt)
                        queue.append(nxt)
                    transitions.append((ids[pair], sym, ids[nxt]))
    finals = frozenset(
        ids[p] for p in order if p[0] in a.finals and p[1] in b.finals
    )
    product = Nfa(
        a.alphabet,
        len(order),
        sorted_transitions(a.alphabet, transitions),
        0,
        finals,
    )
    return nfa_trim(product)


def nfa_concat(parts: Sequence[Nfa]) -> Nfa:
    """Language concatenation, in order; epsilon-free and trimmed.

    An empty sequence denotes the empty word's language, which is not
    expressible without an alphabet, so at least one part is required.
    """
    if not parts:
        raise ValueError("nfa_concat needs at least one part")
    alphabet = parts[0].alphabet
    transitions: list[tuple[int, str, int]] = []
    offset = 0
    offsets = []
    for part in parts:
        if part.alphabet != alphabet:
            raise ValueError("alphabet mismatch")
        offsets.append(offset)
        transitions += [(q + offset, sym, r + offset) for q, sym, r in part.transitions]
        offset += part.n_states
    for prev, part, pstart in zip(parts, parts[1:], offsets[1:]):
        prev_off = pstart - prev.n_states
        for f in prev.finals:
            transitions.append((f + prev_off, EPSILON, pstart + part.initial))
    glued = Nfa(
        alphabet,
        offset,
        sorted_transitions(alphabet, transitions),
        parts[0].initial,
        frozenset(f + offsets[-1] for f in parts[-1].finals),
    )
    return nfa_trim(nfa_eps_eliminate(glued))


def nfa_union(a: Nfa, b: Nfa) -> Nfa:
    """Disjoint union under a fresh initial state with epsilon branches."""
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    off_a, off_b = 1, 1 + a.n_states
    transitions = [(0, EPSILON, off_a + a.initial), (0, EPSILON, off_b + b.initial)]
    transitions += [(q + off_a, sym, r + off_a) for q, sym, r in a.transitions]
    transitions += [(q + off_b, sym, r + off_b) for q, sym, r in b.transitions]
    finals = frozenset(
        {f + off_a for f in a.finals} | {f + off_b for f in b.finals}
    )
    return Nfa(
        a.alphabet,
        1 + a.n_states + b.n_states,
        sorted_transitions(a.alphabet, transitions),
        0,
        finals,
    )


def nfa_determinize(nfa: Nfa) -> Nfa:
    """Complete subset-construction DFA (includes the sink subset)."""
    nfa = nfa_eps_eliminate(nfa)
    start = frozenset({nfa.initial})
    ids: dict[frozenset[int], int] = {start: 0}
    order = [start]
    queue = deque([start])
    transitions: list[tuple[int, str, int]] = []
    while queue:
        subset = queue.popleft()
        for sym in nfa.alphabet:
            nxt = frozenset(
                r for q in subset for r in nfa.arcs_by_symbol[q].get(sym, ())
            )
            if nxt not in ids:
                ids[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            transitions.append((ids[subset], sym, ids[nxt]))
    finals = frozenset(ids[s] for s in order if s & nfa.finals)
    return Nfa(
        nfa.alphabet,
        len(order),
        sorted_transitions(nfa.alphabet, transitions),
        0,
        finals,
    )


def nfa_complement(nfa: Nfa) -> Nfa:
    """Accept exactly the words the input rejects."""
    dfa = nfa_determinize(nfa)
    return replace(
        dfa, finals=frozenset(range(dfa.n_states)) - dfa.finals
    )


def nfa_is_empty(nfa: Nfa) -> bool:
    reach = {nfa.initial}
    queue = deque(reach)
    while queue:
        q = queue.popleft()
        if q in nfa.finals:
            return False
        for _, r in nfa.arcs[q]:
            if r not in reach:
                reach.add(r)
                queue.append(r)
    return nfa.initial not in nfa.finals and not (reach & nfa.finals)


def nfa_nonempty_shortest(nfa: Nfa) -> Optional[str]:
    """The length-then-lex least accepted word, or None if the language is empty.

    Lexicographic order follows the alphabet's declared symbol order.
    Runs in polynomial time: a reverse BFS computes each state's distance
    to acceptance, then the word is built greedily one symbol at a time.
    """
    nfa = nfa_eps_eliminate(nfa)
    rev: dict[int, set[int]] = {q: set() for q in range(nfa.n_states)}
    for q, _, r in nfa.transitions:
        rev[r].add(q)
    inf = nfa.n_states + 1
    dist = [inf] * nfa.n_states
    queue = deque()
    for f in sorted(nfa.finals):
        dist[f] = 0
        queue.append(f)
    while queue:
        q = queue.popleft()
        for p in rev[q]:
            if dist[p] == inf:
                dist[p] = dist[q] + 1
                queue.append(p)
    if dist[nfa.initial] == inf:
        return None
    word = []
    states = {nfa.initial}
    remaining = dist[nfa.initial]
    while remaining > 0:
        chosen = None
        for sym in nfa.alphabet:
            nxt = {
                r
                for q in states
                for r in nfa.arcs_by_symbol[q].get(sym, ())
                if dist[r] == remaining - 1
            }
            if nxt:
                chosen = (sym, nxt)
                break
        assert chosen is not None, "distance bookkeeping broken"
        word.append(chosen[0])
        states = chosen[1]
        remaining -= 1
    return "".join(word)


def nfa_slice(nfa: Nfa, source: int, target: int) -> Nfa:
    """Same transition structure, re-anchored to run from one state to another."""
    return replace(nfa, initial=source, finals=frozenset({target}))


def nfa_multi_slice(nfa: Nfa, sources: Iterable[int], targets: Iterable[int]) -> Nfa:
    """Re-anchor with several start and several end states.

    A fresh initial state (the last id) carries epsilon arcs to every
    requested source, keeping the single-initial invariant.
    """
    sources = sorted(set(sources))
    fresh = nfa.n_states
    transitions = nfa.transitions + tuple((fresh, EPSILON, s) for s in sources)
    return Nfa(
        nfa.alphabet,
        nfa.n_states + 1,
        sorted_transitions(nfa.alphabet, transitions),
        fresh,
        frozenset(targets),
    )


def nfa_reachable_sets(nfa: Nfa) -> list[frozenset[int]]:
    """For each state, the set of states reachable from it (reflexive)."""
    fwd: dict[int, set[int]] = {q: set() for q in range(nfa.n_states)}
    for q, _, r in nfa.transitions:
        fwd[q].add(r)
    out = []
    for q in range(nfa.n_states):
        seen = {q}
        queue = deque([q])
        while queue:
            p = queue.popleft()
            for r in fwd[p]:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        out.append(frozenset(seen))
    return out


def nfa_enumerate(
    nfa: Nfa, max_len: int, limit: Optional[int] = None
) -> list[str]:
    """Accepted words of length at most ``max_len``, shortest-then-lex order.

    Exponential in ``max_len`` by nature; intended for oracles and tests.
    With ``limit`` set, stops as soon as that many words have been found
    (useful as a cheap "is this language too big to enumerate" probe).
    """
    nfa = nfa_eps_eliminate(nfa)
    # Prune prefixes that cannot reach acceptance within the length budget.
    rev: dict[int, set[int]] = {q: set() for q in range(nfa.n_states)}
    for q, _, r in nfa.transitions:
        rev[r].add(q)
    inf = nfa.n_states + 1
    dist = [inf] * nfa.n_states
    queue = deque()
    for f in sorted(nfa.finals):
        dist[f] = 0
        queue.append(f)
    while queue:
        q = queue.popleft()
        for p in rev[q]:
            if dist[p] == inf:
                dist[p] = dist[q] + 1
                queue.append(p)

    out: list[str] = []
    start = frozenset({nfa.initial})
    level: list[tuple[str, frozenset[int]]] = [("", start)]
    if start & nfa.finals:
        out.append("")
    for length in range(max_len):
        if limit is not None and len(out) >= limit:
            break
        budget = max_len - length - 1
        nxt_level: list[tuple[str, frozenset[int]]] = []
        for word, states in level:
            for sym in nfa.alphabet:
                nxt = frozenset(
                    r
                    for q in states
                    for r in nfa.arcs_by_symbol[q].get(sym, ())
                    if dist[r] <= budget
                )
                if not nxt:
                    continue
                nxt_level.append((word + sym, nxt))
                if nxt & nfa.finals:
                    out.append(word + sym)
                    if limit is not None and len(out) >= limit:
                        return out
        level = nxt_level
        if not level:
            break
    return out
