"""Bounded decision support for the extended constraint layers.

The core solver handles concatenations, transducer applications, and
regular membership exactly.  Everything on top of that — linear
constraints over lengths, letter counts, and integer variables,
character-position equalities, index-of bindings, and string
disequalities — is decided here by a bounded search:

1. The extension constraints are *lowered* onto the same piece
   decomposition the core solver uses.  Lengths become sums of
   per-piece length counters, character positions become per-piece
   position counters plus linear linking equations, index-of becomes a
   run of character equalities (plus, for first-occurrence, a
   match-tracking monitor), and a disequality becomes a choice between
   "lengths differ" and "some shared position differs".  Choices that
   cannot be expressed as counters — which piece a position lands on,
   which character sits there, how a disequality is discharged — are
   enumerated up front as *scenarios*.

2. For each branch of the core search, the forest of piece automata and
   segment transducers is turned into a lazy multi-track product
   automaton whose moves emit one letter on one track at a time.

3. A breadth-first walk explores (product state, counter state) pairs,
   counters capped at the integer bound.  Whenever the walk stands on an
   accepting product state it tries to discharge the lowered
   constraints from the counters; integer variables not pinned by a
   linking equation are enumerated up to the bound.

A satisfying walk reconstructs a full model, which is verified against
the original problem before being reported.  A negative answer is
definitive (``unsat``) only when no rejection depended on a capped
counter or on the integer bound; otherwise it is reported as
``unsat-within-bounds``.  Exploration is metered, and exhausting the
meter yields ``resource-limit`` rather than an answer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterator, Optional, Sequence, Union

from .automata import Alphabet, nfa_eps_eliminate
from .constraints import (
    And,
    Assignment,
    BoolTree,
    CharAtom,
    CharConst,
    CharPos,
    CountTerm,
    Disequality,
    IndexOfAtom,
    IntTerm,
    Leaf,
    LenTerm,
    LinearAtom,
    Lit,
    Not,
    Or,
    Problem,
    TransducerEq,
    Var,
    evaluate,
    tree_eval_indexed,
    tree_leaves,
)
from .solver import (
    AcForest,
    NodeId,
    Shape,
    Verdict,
    _branch_forests,
    _propagate,
    _join_model,
    normalize_regular,
    split_concat,
)
from .straightline import DependencyGraph
from .transducer import Transducer, transducer_normalize


class ResourceLimit(RuntimeError):
    """Raised when an explicitly capped construction outgrows its cap."""


# ---------------------------------------------------------------------------
# Lowered constraint vocabulary


@dataclass(frozen=True)
class PieceLen:
    """The length of one piece (forest node)."""

    node: NodeId


@dataclass(frozen=True)
class PieceCount:
    """How many times ``char`` occurs in one piece."""

    node: NodeId
    char: str


LoweredTerm = Union[PieceLen, PieceCount, IntTerm]


@dataclass(frozen=True)
class LoweredLinear:
    """``sum(coeff * term) <= bound`` over piece counters and int variables."""

    terms: tuple[tuple[int, LoweredTerm], ...]
    bound: int


@dataclass(frozen=True)
class LinkEq:
    """``value(index) + shift == const + sum(len(node)) + position(term)``.

    The right-hand side is a position inside some variable's value,
    assembled from literal offsets (``const``), the lengths of the
    pieces that precede the landing segment (``nodes``, kept with
    multiplicity), and — when the position lands inside a piece — that
    piece's frozen position counter (``term`` indexes the scenario's
    term list; None means the position inside a literal is already part
    of ``const``).
    """

    index: Union[str, int]
    shift: int
    term: Optional[int]
    const: int
    nodes: tuple[NodeId, ...]


@dataclass(frozen=True)
class PastEnd:
    """``value(index) >= const + sum(len(node)) + 1`` — past a value's end."""

    index: Union[str, int]
    const: int
    nodes: tuple[NodeId, ...]


@dataclass(frozen=True)
class MonitorPiece:
    """One piece-zone obligation of a first-occurrence monitor.

    ``comp`` indexes the scenario's match-tracker list.  A pre-landing
    zone must finish in ``exit_state`` without ever completing a match;
    the landing zone instead requires its first completion to sit
    exactly where the bound character term froze (``landing_term``).
    """

    comp: int
    exit_state: Optional[int]
    landing_term: Optional[int]


@dataclass(frozen=True)
class Monitor:
    """First-occurrence obligations that need runtime tracking."""

    pieces: tuple[MonitorPiece, ...]


@dataclass(frozen=True)
class Scenario:
    """One fully guessed way of discharging the non-regular constraints.

    ``terms`` lists the character-position trackers the walk must run:
    each is a (node, guessed character) pair whose counter freezes at a
    position holding that character.  ``comps`` lists match trackers
    (node, needle, entry state) for first-occurrence monitors.  The
    remaining fields are checked when the walk stands on an accepting
    state: linking equations, forced-zero indices, past-the-end
    requirements, and extra lowered linear trees (conjoined with the
    problem's own).
    """

    terms: tuple[tuple[NodeId, str], ...]
    links: tuple[LinkEq, ...]
    zeros: tuple[Union[str, int], ...]
    past_ends: tuple[PastEnd, ...]
    extra: tuple[BoolTree, ...]
    comps: tuple[tuple[NodeId, str, int], ...]
    monitors: tuple[Monitor, ...]


_EMPTY_SCENARIO = Scenario((), (), (), (), (), (), ())


def _merge_scenarios(parts: Sequence[Scenario]) -> Scenario:
    """Concatenate scenario pieces, re-indexing term and comp references."""
    terms: list[tuple[NodeId, str]] = []
    links: list[LinkEq] = []
    zeros: list[Union[str, int]] = []
    past_ends: list[PastEnd] = []
    extra: list[BoolTree] = []
    comps: list[tuple[NodeId, str, int]] = []
    monitors: list[Monitor] = []
    for part in parts:
        t_off = len(terms)
        c_off = len(comps)
        terms.extend(part.terms)
        zeros.extend(part.zeros)
        past_ends.extend(part.past_ends)
        extra.extend(part.extra)
        comps.extend(part.comps)
        for link in part.links:
            links.append(
                LinkEq(
                    link.index,
                    link.shift,
                    None if link.term is None else link.term + t_off,
                    link.const,
                    link.nodes,
                )
            )
        for mon in part.monitors:
            monitors.append(
                Monitor(
                    tuple(
                        MonitorPiece(
                            mp.comp + c_off,
                            mp.exit_state,
                            None
                            if mp.landing_term is None
                            else mp.landing_term + t_off,
                        )
                        for mp in mon.pieces
                    )
                )
            )
    return Scenario(
        tuple(terms),
        tuple(links),
        tuple(zeros),
        tuple(past_ends),
        tuple(extra),
        tuple(comps),
        tuple(monitors),
    )


# ---------------------------------------------------------------------------
# Integer-term lowering


def _len_parts(shape: Shape) -> tuple[list[NodeId], int]:
    """A variable's length as (piece nodes with multiplicity, literal total)."""
    return list(shape.slots), sum(len(lit) for lit in shape.literals)


def _linear_lower(atom: LinearAtom, shapes: dict[str, Shape]) -> LoweredLinear:
    coeffs: dict[LoweredTerm, int] = {}
    bound = atom.bound

    def add(term: LoweredTerm, coeff: int) -> None:
        coeffs[term] = coeffs.get(term, 0) + coeff

    for coeff, term in atom.terms:
        if isinstance(term, LenTerm):
            nodes, lit_len = _len_parts(shapes[term.var])
            for node in nodes:
                add(PieceLen(node), coeff)
            bound -= coeff * lit_len
        elif isinstance(term, CountTerm):
            shape = shapes[term.var]
            for node in shape.slots:
                add(PieceCount(node, term.char), coeff)
            bound -= coeff * sum(lit.count(term.char) for lit in shape.literals)
        else:
            add(term, coeff)
    terms = tuple((c, t) for t, c in coeffs.items() if c != 0)
    return LoweredLinear(terms, bound)


def lower_integer_terms(
    tree: Optional[BoolTree], shapes: dict[str, Shape]
) -> Optional[BoolTree]:
    """Rewrite length/count terms over whole variables into per-piece sums.

    The tree's shape is preserved; each linear leaf becomes a
    :class:`LoweredLinear` leaf whose terms are piece counters and
    integer variables, with literal contributions folded into the bound.
    """
    if tree is None:
        return None
    if isinstance(tree, Leaf):
        atom = tree.atom
        assert isinstance(atom, LinearAtom)
        return Leaf(_linear_lower(atom, shapes))
    if isinstance(tree, Not):
        return Not(lower_integer_terms(tree.child, shapes))
    cls = And if isinstance(tree, And) else Or
    return cls(tuple(lower_integer_terms(c, shapes) for c in tree.children))


def _length_differs(left: str, right: str, shapes: dict[str, Shape]) -> BoolTree:
    """``|left| != |right|`` as a disjunction of two lowered inequalities."""
    l_nodes, l_lit = _len_parts(shapes[left])
    r_nodes, r_lit = _len_parts(shapes[right])
    coeffs: dict[LoweredTerm, int] = {}
    for node in l_nodes:
        coeffs[PieceLen(node)] = coeffs.get(PieceLen(node), 0) + 1
    for node in r_nodes:
        coeffs[PieceLen(node)] = coeffs.get(PieceLen(node), 0) - 1
    terms = tuple((c, t) for t, c in coeffs.items() if c != 0)
    neg_terms = tuple((-c, t) for c, t in terms)
    diff = l_lit - r_lit
    # terms + diff <= -1   or   -(terms + diff) <= -1
    return Or(
        (
            Leaf(LoweredLinear(terms, -1 - diff)),
            Leaf(LoweredLinear(neg_terms, -1 + diff)),
        )
    )


# ---------------------------------------------------------------------------
# Character-position lowering


@dataclass(frozen=True)
class _SideSpec:
    """One resolved side of a character comparison.

    ``char`` is the character the side denotes when it is statically
    known (literal landings and constants); None means the side is a
    walk term whose character is still to be guessed.  ``link`` carries
    the position equation for landings; out-of-range resolutions carry a
    ``zero`` or ``past_end`` requirement instead.
    """

    char: Optional[str]
    term_node: Optional[NodeId] = None
    link: Optional[LinkEq] = None
    zero: Optional[Union[str, int]] = None
    past_end: Optional[PastEnd] = None


def _side_landings(side: CharPos, shapes: dict[str, Shape]) -> Iterator[_SideSpec]:
    """Every way the side's position can land inside its variable's layout."""
    shape = shapes[side.var]
    lit_prefix = 0
    for i, lit in enumerate(shape.literals):
        for k in range(1, len(lit) + 1):
            yield _SideSpec(
                char=lit[k - 1],
                link=LinkEq(
                    side.index, 0, None, lit_prefix + k, tuple(shape.slots[:i])
                ),
            )
        lit_prefix += len(lit)
        if i < len(shape.slots):
            node = shape.slots[i]
            yield _SideSpec(
                char=None,
                term_node=node,
                link=LinkEq(side.index, 0, 0, lit_prefix, tuple(shape.slots[:i])),
            )


def _side_out_of_range(
    side: CharPos, shapes: dict[str, Shape]
) -> Iterator[_SideSpec]:
    """Resolutions that place the side's position outside its variable."""
    if not isinstance(side.index, int):
        yield _SideSpec(char=None, zero=side.index)
    nodes, lit_len = _len_parts(shapes[side.var])
    yield _SideSpec(char=None, past_end=PastEnd(side.index, lit_len, tuple(nodes)))


def _spec_scenario(spec: _SideSpec, gamma: Optional[str]) -> Scenario:
    """Materialize one side resolution as a scenario fragment.

    Term references are fragment-local (index 0); merging re-indexes.
    """
    terms: tuple[tuple[NodeId, str], ...] = ()
    links: tuple[LinkEq, ...] = ()
    zeros: tuple[Union[str, int], ...] = ()
    past_ends: tuple[PastEnd, ...] = ()
    if spec.term_node is not None:
        assert gamma is not None and spec.link is not None
        terms = ((spec.term_node, gamma),)
        links = (spec.link,)
    elif spec.link is not None:
        links = (spec.link,)
    if spec.zero is not None:
        zeros = (spec.zero,)
    if spec.past_end is not None:
        past_ends = (spec.past_end,)
    return Scenario(terms, links, zeros, past_ends, (), (), ())


def _char_leaf_scenarios(
    atom: CharAtom, value: bool, shapes: dict[str, Shape], alphabet: Alphabet
) -> Iterator[Scenario]:
    """All ways one character-equality occurrence can take a truth value.

    A true occurrence binds both sides in range with equal characters; a
    false one either pushes a positional side out of range (index zero
    or past the end) or binds both sides in range with distinct
    characters.
    """

    def in_range(side: CharConst | CharPos) -> list[_SideSpec]:
        if isinstance(side, CharConst):
            return [_SideSpec(char=side.char)]
        return list(_side_landings(side, shapes))

    def char_options(spec: _SideSpec) -> tuple[str, ...]:
        return alphabet.symbols if spec.char is None else (spec.char,)

    if value:
        for left in in_range(atom.left):
            for right in in_range(atom.right):
                for ch in char_options(left):
                    if right.char is not None and right.char != ch:
                        continue
                    if left.char is not None and left.char != ch:
                        continue
                    yield _merge_scenarios(
                        [_spec_scenario(left, ch), _spec_scenario(right, ch)]
                    )
        return

    for side in (atom.left, atom.right):
        if isinstance(side, CharPos):
            for spec in _side_out_of_range(side, shapes):
                yield _spec_scenario(spec, None)
    for left in in_range(atom.left):
        for right in in_range(atom.right):
            for ch_l in char_options(left):
                for ch_r in char_options(right):
                    if ch_l == ch_r:
                        continue
                    yield _merge_scenarios(
                        [_spec_scenario(left, ch_l), _spec_scenario(right, ch_r)]
                    )


def lower_char_constraints(
    tree: Optional[BoolTree], shapes: dict[str, Shape], alphabet: Alphabet
) -> Iterator[Scenario]:
    """Enumerate scenarios discharging the character-equality tree.

    Truth values are assigned per leaf occurrence (all-true first,
    descending), filtered through the tree, and each assignment expands
    into the cross product of its leaves' landing/guess choices.
    """
    if tree is None:
        yield _EMPTY_SCENARIO
        return
    leaves = tree_leaves(tree)
    for values in iter_product((True, False), repeat=len(leaves)):
        if not tree_eval_indexed(tree, values):
            continue
        per_leaf = []
        for leaf, value in zip(leaves, values):
            atom = leaf.atom
            assert isinstance(atom, CharAtom)
            per_leaf.append(
                list(_char_leaf_scenarios(atom, value, shapes, alphabet))
            )
        for combo in iter_product(*per_leaf):
            yield _merge_scenarios(combo)


def lower_disequalities(
    diseqs: Sequence[Disequality],
    shapes: dict[str, Shape],
    alphabet: Alphabet,
) -> Iterator[Scenario]:
    """Enumerate scenarios discharging every string disequality.

    Each disequality independently picks one witness: either the two
    lengths differ (a lowered linear disjunction) or a shared fresh
    position holds distinct characters, both in range.  Fresh position
    names are internal (not legal identifiers) so they can never collide
    with declared integer variables.
    """

    def alternatives(idx: int, diseq: Disequality) -> Iterator[Scenario]:
        yield Scenario(
            (), (), (), (), (_length_differs(diseq.left, diseq.right, shapes),), (), ()
        )
        position = f"%d{idx}"
        atom = CharAtom(CharPos(diseq.left, position), CharPos(diseq.right, position))
        for scenario in _char_leaf_scenarios(atom, False, shapes, alphabet):
            if scenario.zeros or scenario.past_ends:
                continue  # the char-difference witness needs both in range
            yield scenario

    per_diseq = [list(alternatives(i, d)) for i, d in enumerate(diseqs)]
    for combo in iter_product(*per_diseq):
        yield _merge_scenarios(combo)


# ---------------------------------------------------------------------------
# Index-of lowering


def _kmp_delta(needle: str, alphabet: Alphabet) -> list[dict[str, int]]:
    """Deterministic match automaton: state = length of matched prefix."""
    p = len(needle)
    fail = [0] * (p + 1)
    k = 0
    for i in range(1, p):
        while k and needle[i] != needle[k]:
            k = fail[k]
        if needle[i] == needle[k]:
            k += 1
        fail[i + 1] = k
    delta: list[dict[str, int]] = []
    for q in range(p + 1):
        row: dict[str, int] = {}
        for ch in alphabet:
            k = q if q < p else fail[q]
            while k and needle[k] != ch:
                k = fail[k]
            if needle[k] == ch:
                k += 1
            row[ch] = k
        delta.append(row)
    return delta


def _run_literal(
    delta: list[dict[str, int]], p: int, entry: int, text: str
) -> tuple[int, Optional[int]]:
    """Run the match automaton over a literal; (exit, first completion pos)."""
    q = entry
    first: Optional[int] = None
    for i, ch in enumerate(text):
        q = delta[q][ch]
        if q == p and first is None:
            first = i + 1
    return q, first


def _occurrence_positions(needle: str, hay: str) -> list[int]:
    out = []
    start = 0
    while True:
        idx = hay.find(needle, start)
        if idx < 0:
            return out
        out.append(idx + 1)
        start = idx + 1


def _indexof_var_scenarios(
    atom: IndexOfAtom, shapes: dict[str, Shape], alphabet: Alphabet
) -> Iterator[Scenario]:
    assert isinstance(atom.haystack, Var)
    shape = shapes[atom.haystack.name]
    needle = atom.needle
    p = len(needle)

    # Layout zones, in order: ("lit", text) and ("piece", node, slot index).
    zones: list[tuple] = []
    for i, lit in enumerate(shape.literals):
        zones.append(("lit", lit, i))
        if i < len(shape.slots):
            zones.append(("piece", shape.slots[i], i))

    def zone_link(
        z: int, inner: Union[int, None], char_idx: int, term_slot: Optional[int]
    ) -> LinkEq:
        """value(result) + char_idx == position of the char in the layout."""
        kind = zones[z][0]
        slot_idx = zones[z][2]
        nodes = tuple(shape.slots[:slot_idx])
        lit_upto = slot_idx + (1 if kind == "piece" else 0)
        const = sum(len(shape.literals[j]) for j in range(lit_upto))
        if kind == "lit":
            assert inner is not None
            return LinkEq(atom.result, char_idx, None, const + inner, nodes)
        return LinkEq(atom.result, char_idx, term_slot, const, nodes)

    # Every assignment of the needle's characters to zones.  Inconsistent
    # assignments are harmless — their linking equations cannot all hold —
    # so only static character mismatches are filtered here.
    def char_placements(char_idx: int) -> list[tuple]:
        ch = needle[char_idx]
        out: list[tuple] = []
        for z, zone in enumerate(zones):
            if zone[0] == "lit":
                for k in range(1, len(zone[1]) + 1):
                    if zone[1][k - 1] == ch:
                        out.append((z, k))
            else:
                out.append((z, None))
        return out

    for placement in iter_product(*(char_placements(i) for i in range(p))):
        if any(placement[i][0] > placement[i + 1][0] for i in range(p - 1)):
            continue  # later needle characters cannot land in earlier zones
        terms: list[tuple[NodeId, str]] = []
        links: list[LinkEq] = []
        for i, (z, inner) in enumerate(placement):
            if zones[z][0] == "lit":
                links.append(zone_link(z, inner, i, None))
            else:
                term_slot = len(terms)
                terms.append((zones[z][1], needle[i]))
                links.append(zone_link(z, None, i, term_slot))
        base = Scenario(tuple(terms), tuple(links), (), (), (), (), ())
        if not atom.first:
            yield base
            continue

        # First occurrence: everything before the match's final character
        # must be completion-free.  Literal zones are checked statically
        # once the match-automaton state entering them is fixed; piece
        # zones contribute runtime trackers, and their exit states are
        # enumerated so the chain stays statically known.
        landing_z, landing_inner = placement[p - 1]
        delta = _kmp_delta(needle, alphabet)

        def chains(
            z: int, entry: int, comps: list, pieces: list
        ) -> Iterator[tuple[list, list]]:
            if z == landing_z:
                if zones[z][0] == "lit":
                    _, first = _run_literal(delta, p, entry, zones[z][1])
                    if first == landing_inner:
                        yield comps, pieces
                else:
                    comp = (zones[z][1], needle, entry)
                    yield (
                        comps + [comp],
                        pieces + [MonitorPiece(len(comps), None, len(terms) - 1)],
                    )
                return
            if zones[z][0] == "lit":
                nxt, first = _run_literal(delta, p, entry, zones[z][1])
                if first is None:
                    yield from chains(z + 1, nxt, comps, pieces)
                return
            comp = (zones[z][1], needle, entry)
            for exit_state in range(p + 1):
                yield from chains(
                    z + 1,
                    exit_state,
                    comps + [comp],
                    pieces + [MonitorPiece(len(comps), exit_state, None)],
                )

        for comps, pieces in chains(0, 0, [], []):
            yield Scenario(
                tuple(terms),
                tuple(links),
                (),
                (),
                (),
                tuple(comps),
                (Monitor(tuple(pieces)),),
            )


def lower_indexof(
    atoms: Sequence[IndexOfAtom], shapes: dict[str, Shape], alphabet: Alphabet
) -> Iterator[Scenario]:
    """Enumerate scenarios discharging every index-of binding.

    An anywhere binding becomes one character term per needle letter at
    consecutive positions; a first-occurrence binding additionally
    requires the prefix before the match to be occurrence-free, tracked
    per piece zone.  Constant haystacks resolve statically.
    """

    def one(atom: IndexOfAtom) -> Iterator[Scenario]:
        if isinstance(atom.haystack, Lit):
            positions = _occurrence_positions(atom.needle, atom.haystack.text)
            if atom.first:
                positions = positions[:1]
            for pos in positions:
                yield Scenario(
                    (), (LinkEq(atom.result, 0, None, pos, ()),), (), (), (), (), ()
                )
            return
        yield from _indexof_var_scenarios(atom, shapes, alphabet)

    per_atom = [list(one(a)) for a in atoms]
    for combo in iter_product(*per_atom):
        yield _merge_scenarios(combo)


def enumerate_scenarios(
    problem: Problem, shapes: dict[str, Shape]
) -> Iterator[Scenario]:
    """The full scenario stream: chars × disequalities × index-of."""
    for chars in lower_char_constraints(problem.chars, shapes, problem.alphabet):
        for diseq in lower_disequalities(
            problem.disequalities, shapes, problem.alphabet
        ):
            for idx in lower_indexof(problem.indexofs, shapes, problem.alphabet):
                yield _merge_scenarios([chars, diseq, idx])


# ---------------------------------------------------------------------------
# The tree-solution automaton


class MultiTrackAutomaton:
    """Lazy product automaton over a forest's solution tuples.

    One track per forest node.  A move emits a single letter on a single
    track: the track's own automaton steps on it, the input side of
    every segment transducer hanging below the track steps with it, and
    — unless the track is a root — the letter must simultaneously be
    produced by an output move of the segment above.  Projections of
    accepted runs onto tracks are therefore exactly the forest's
    solution tuples.
    """

    def __init__(self, forest: AcForest) -> None:
        self.forest = forest
        self.tracks: tuple[NodeId, ...] = forest.order
        self._index = {node: i for i, node in enumerate(self.tracks)}
        self._nfas = [
            nfa_eps_eliminate(forest.nfas[node]) if forest.nfas[node].has_epsilon
            else forest.nfas[node]
            for node in self.tracks
        ]
        # Edges in a fixed order: by parent track, then child track.
        self._edges: list[tuple[int, int, Transducer]] = []
        for node in self.tracks:
            for child, machine in forest.children[node]:
                if not machine.is_normalized:
                    machine = transducer_normalize(machine)
                self._edges.append(
                    (self._index[node], self._index[child], machine)
                )
        self._out_edges: list[list[int]] = [[] for _ in self.tracks]
        self._parent_edge: list[Optional[int]] = [None] * len(self.tracks)
        for e, (pi, ci, _machine) in enumerate(self._edges):
            self._out_edges[pi].append(e)
            self._parent_edge[ci] = e
        # Per-edge rule maps: state -> char -> targets.
        self._in_map: list[list[dict[str, tuple[int, ...]]]] = []
        self._out_map: list[list[dict[str, tuple[int, ...]]]] = []
        for _pi, _ci, machine in self._edges:
            ins: list[dict[str, list[int]]] = [{} for _ in range(machine.n_states)]
            outs: list[dict[str, list[int]]] = [{} for _ in range(machine.n_states)]
            for q, a, b, r in machine.transitions:
                if a:
                    ins[q].setdefault(a, []).append(r)
                else:
                    outs[q].setdefault(b, []).append(r)
            self._in_map.append(
                [{c: tuple(v) for c, v in row.items()} for row in ins]
            )
            self._out_map.append(
                [{c: tuple(v) for c, v in row.items()} for row in outs]
            )
        self.alphabet = (
            self._nfas[0].alphabet if self._nfas else None
        )

    @property
    def n_tracks(self) -> int:
        return len(self.tracks)

    def initial(self) -> tuple[int, ...]:
        nfa_part = tuple(nfa.initial for nfa in self._nfas)
        edge_part = tuple(machine.initial for _p, _c, machine in self._edges)
        return nfa_part + edge_part

    def is_final(self, state: tuple[int, ...]) -> bool:
        n = len(self._nfas)
        return all(
            state[i] in nfa.finals for i, nfa in enumerate(self._nfas)
        ) and all(
            state[n + e] in machine.finals
            for e, (_p, _c, machine) in enumerate(self._edges)
        )

    def moves(
        self, state: tuple[int, ...]
    ) -> Iterator[tuple[int, str, tuple[int, ...]]]:
        """All (track, letter, successor) moves, in deterministic order."""
        n = len(self._nfas)
        for i, nfa in enumerate(self._nfas):
            arcs = nfa.arcs_by_symbol[state[i]]
            parent = self._parent_edge[i]
            for ch in nfa.alphabet:
                nfa_targets = arcs.get(ch, ())
                if not nfa_targets:
                    continue
                if parent is not None:
                    cause = self._out_map[parent][state[n + parent]].get(ch, ())
                    if not cause:
                        continue
                else:
                    cause = (-1,)
                edge_choices = []
                dead = False
                for e in self._out_edges[i]:
                    targets = self._in_map[e][state[n + e]].get(ch, ())
                    if not targets:
                        dead = True
                        break
                    edge_choices.append((e, targets))
                if dead:
                    continue
                for nfa_t in nfa_targets:
                    for cause_t in cause:
                        for combo in iter_product(
                            *(targets for _e, targets in edge_choices)
                        ):
                            nxt = list(state)
                            nxt[i] = nfa_t
                            if parent is not None:
                                nxt[n + parent] = cause_t
                            for (e, _ts), tgt in zip(edge_choices, combo):
                                nxt[n + e] = tgt
                            yield i, ch, tuple(nxt)

    def accepted_tuples(
        self, max_len: int, state_cap: int = 100_000
    ) -> set[tuple[str, ...]]:
        """All solution tuples with every component at most ``max_len`` long.

        Exhaustive search for differential testing; raises
        :class:`ResourceLimit` when the walk outgrows ``state_cap``.
        """
        start = (self.initial(), ("",) * self.n_tracks)
        seen = {start}
        queue = deque([start])
        found: set[tuple[str, ...]] = set()
        while queue:
            state, words = queue.popleft()
            if self.is_final(state):
                found.add(words)
            for track, ch, nxt in self.moves(state):
                if len(words[track]) >= max_len:
                    continue
                grown = words[:track] + (words[track] + ch,) + words[track + 1 :]
                item = (nxt, grown)
                if item not in seen:
                    if len(seen) >= state_cap:
                        raise ResourceLimit(
                            f"tuple enumeration exceeded {state_cap} states"
                        )
                    seen.add(item)
                    queue.append(item)
        return found


def build_tree_solution_automaton(forest: AcForest) -> MultiTrackAutomaton:
    """The multi-track automaton whose runs are the forest's solutions."""
    return MultiTrackAutomaton(forest)


# ---------------------------------------------------------------------------
# The counting walk


@dataclass(frozen=True)
class LoweredProblem:
    """Everything one bounded walk needs, already split-aligned."""

    automaton: MultiTrackAutomaton
    scenario: Scenario
    int_tree: Optional[BoolTree]
    int_vars: tuple[str, ...]
    alphabet: Alphabet


class Budget:
    """A mutable work meter shared across walks of one solve call."""

    def __init__(self, limit: int) -> None:
        self.remaining = limit

    def charge(self, amount: int = 1) -> bool:
        self.remaining -= amount
        return self.remaining >= 0


@dataclass(frozen=True)
class WalkResult:
    status: str  # "sat" | "unsat" | "within" | "resource"
    node_words: Optional[dict[NodeId, str]] = None
    int_values: Optional[dict[str, int]] = None


class _Saturated(Exception):
    """A needed counter was capped; the outcome is bound-dependent."""


def _definite_caps(
    trees: Sequence[BoolTree],
) -> dict[Union[NodeId, tuple[NodeId, str]], int]:
    """Hard ceilings on piece counters implied by mandatory linear leaves.

    A leaf in a purely conjunctive position must hold in every model, so
    ``c*counter <= bound`` with every other coefficient nonnegative caps
    the counter at ``bound // c``.  Walk states past a cap can never
    accept (counters only grow), so they are pruned outright.
    """
    caps: dict[Union[NodeId, tuple[NodeId, str]], int] = {}

    def leaf_caps(atom: LoweredLinear) -> None:
        if any(coeff < 0 for coeff, _t in atom.terms):
            return
        for coeff, term in atom.terms:
            if coeff <= 0 or isinstance(term, IntTerm):
                continue
            key: Union[NodeId, tuple[NodeId, str]]
            if isinstance(term, PieceLen):
                key = term.node
            else:
                key = (term.node, term.char)
            cap = atom.bound // coeff
            caps[key] = min(caps.get(key, cap), cap)

    def visit(tree: BoolTree, positive: bool) -> None:
        if isinstance(tree, Leaf):
            if positive:
                atom = tree.atom
                assert isinstance(atom, LoweredLinear)
                leaf_caps(atom)
        elif isinstance(tree, Not):
            visit(tree.child, not positive)
        elif isinstance(tree, And):
            if positive:
                for child in tree.children:
                    visit(child, True)
            elif len(tree.children) == 1:
                visit(tree.children[0], False)
        else:
            assert isinstance(tree, Or)
            if not positive:
                for child in tree.children:
                    visit(child, False)
            elif len(tree.children) == 1:
                visit(tree.children[0], True)

    for tree in trees:
        visit(tree, True)
    return caps


def counter_walk_solve(
    lowered: LoweredProblem, int_bound: int, budget: Budget
) -> WalkResult:
    """Breadth-first walk over (product state, capped counters).

    Counters are exact up to ``int_bound`` and saturate above it; every
    acceptance check that would depend on a saturated value abandons
    that state and weakens an eventual negative verdict to
    within-bounds.  Position trackers freeze nondeterministically on a
    letter equal to their guessed character, making frozen values
    1-based positions.  The first satisfying state found (breadth-first,
    deterministic move order) is reconstructed into per-node words.
    """
    mta = lowered.automaton
    scenario = lowered.scenario
    cap = int_bound
    top = cap + 1  # saturation marker

    # --- watched counters -------------------------------------------------
    len_nodes: dict[NodeId, None] = {}
    count_keys: dict[tuple[NodeId, str], None] = {}

    def watch_tree(tree: Optional[BoolTree]) -> None:
        if tree is None:
            return
        for leaf in tree_leaves(tree):
            atom = leaf.atom
            assert isinstance(atom, LoweredLinear)
            for _c, term in atom.terms:
                if isinstance(term, PieceLen):
                    len_nodes.setdefault(term.node)
                elif isinstance(term, PieceCount):
                    count_keys.setdefault((term.node, term.char))

    watch_tree(lowered.int_tree)
    for tree in scenario.extra:
        watch_tree(tree)
    for link in scenario.links:
        for node in link.nodes:
            len_nodes.setdefault(node)
    for pe in scenario.past_ends:
        for node in pe.nodes:
            len_nodes.setdefault(node)
    for node, _needle, _entry in scenario.comps:
        len_nodes.setdefault(node)

    len_order = [n for n in mta.tracks if n in len_nodes]
    len_idx = {n: i for i, n in enumerate(len_order)}
    count_order = sorted(
        count_keys, key=lambda k: (mta.tracks.index(k[0]), k[1])
    )
    count_idx = {k: i for i, k in enumerate(count_order)}
    track_len = [len_idx.get(node) for node in mta.tracks]
    track_counts: list[list[tuple[str, int]]] = [
        [(ch, count_idx[(node, ch)]) for (n2, ch) in count_order if n2 == node]
        for node in mta.tracks
    ]
    track_terms: list[list[int]] = [
        [t for t, (n2, _g) in enumerate(scenario.terms) if n2 == node]
        for node in mta.tracks
    ]
    deltas: dict[str, list[dict[str, int]]] = {}
    for _n, needle, _e in scenario.comps:
        if needle not in deltas:
            deltas[needle] = _kmp_delta(needle, lowered.alphabet)

    mandatory = list(scenario.extra)
    if lowered.int_tree is not None:
        mandatory.append(lowered.int_tree)
    hard_caps = _definite_caps(mandatory)
    len_caps = [hard_caps.get(node) for node in mta.tracks]
    count_caps = {
        count_idx[key]: hard_caps[key] for key in count_order if key in hard_caps
    }
    track_comps: list[list[int]] = [
        [c for c, (n2, _nd, _e) in enumerate(scenario.comps) if n2 == node]
        for node in mta.tracks
    ]

    def bump(value: int) -> int:
        return value + 1 if value <= cap else top

    # --- the walk ---------------------------------------------------------
    init = (
        mta.initial(),
        (0,) * len(len_order),
        (0,) * len(count_order),
        tuple((0, 0) for _ in scenario.terms),
        tuple((entry, -1) for _n, _needle, entry in scenario.comps),
    )
    parents: dict[tuple, Optional[tuple]] = {init: None}
    queue = deque([init])
    touched = False

    # --- acceptance -------------------------------------------------------
    def raw_counter(term: LoweredTerm, state: tuple) -> int:
        """The stored (possibly saturated) counter for a piece term."""
        _prod, lens, counts, _terms, _comps = state
        if isinstance(term, PieceLen):
            return lens[len_idx[term.node]]
        assert isinstance(term, PieceCount)
        return counts[count_idx[(term.node, term.char)]]

    def leaf_value(
        atom: LoweredLinear, ints: dict[str, int], state: tuple
    ) -> Optional[bool]:
        """Three-valued: a saturated counter stands for any value >= top."""
        lo = hi = 0
        lo_open = hi_open = False
        for coeff, term in atom.terms:
            if isinstance(term, IntTerm):
                lo += coeff * ints[term.var]
                hi += coeff * ints[term.var]
                continue
            v = raw_counter(term, state)
            if v < top:
                lo += coeff * v
                hi += coeff * v
            elif coeff > 0:
                lo += coeff * top
                hi_open = True
            else:
                hi += coeff * top
                lo_open = True
        if not hi_open and hi <= atom.bound:
            return True
        if not lo_open and lo > atom.bound:
            return False
        return None

    def tree3(
        tree: BoolTree, ints: dict[str, int], state: tuple
    ) -> Optional[bool]:
        if isinstance(tree, Leaf):
            atom = tree.atom
            assert isinstance(atom, LoweredLinear)
            return leaf_value(atom, ints, state)
        if isinstance(tree, Not):
            value = tree3(tree.child, ints, state)
            return None if value is None else not value
        values = [tree3(c, ints, state) for c in tree.children]
        if isinstance(tree, And):
            if False in values:
                return False
            return None if None in values else True
        assert isinstance(tree, Or)
        if True in values:
            return True
        return None if None in values else False

    def lens_sum(nodes: tuple[NodeId, ...], lens: tuple[int, ...]) -> int:
        total = 0
        for node in nodes:
            v = lens[len_idx[node]]
            if v >= top:
                raise _Saturated
            total += v
        return total

    def try_accept(state: tuple) -> Optional[WalkResult]:
        nonlocal touched
        prod, lens, counts, terms, comps = state
        if not mta.is_final(prod):
            return None
        for y, z in terms:
            if z != 1:
                return None
        try:
            for y, _z in terms:
                if y >= top:
                    raise _Saturated

            # First-occurrence monitors (exact, so checked before anything
            # that could abandon the state on a saturated counter).
            for mon in scenario.monitors:
                for mp in mon.pieces:
                    q, first = comps[mp.comp]
                    if mp.landing_term is None:
                        if first != -1 or q != mp.exit_state:
                            return None
                    else:
                        if first == -1:
                            return None
                        if first >= top:
                            raise _Saturated
                        if first != terms[mp.landing_term][0]:
                            return None

            # Linking equations pin integer values (or check constants).
            ints: dict[str, int] = {}

            def bind(index: Union[str, int], value: int) -> bool:
                if isinstance(index, int):
                    return index == value
                if index in ints:
                    return ints[index] == value
                if value < 0:
                    return False
                ints[index] = value
                return True

            for link in scenario.links:
                pos = link.const + lens_sum(link.nodes, lens)
                if link.term is not None:
                    pos += terms[link.term][0]
                if not bind(link.index, pos - link.shift):
                    return None
            for index in scenario.zeros:
                if not bind(index, 0):
                    return None

            lower: dict[str, int] = {}
            for pe in scenario.past_ends:
                need = lens_sum(pe.nodes, lens) + pe.const + 1
                if isinstance(pe.index, int):
                    if pe.index < need:
                        return None
                elif pe.index in ints:
                    if ints[pe.index] < need:
                        return None
                else:
                    lower[pe.index] = max(lower.get(pe.index, 0), need)

            # Free integers: enumerate within the bound.
            free = [v for v in lowered.int_vars if v not in ints]
            ranges = []
            for var in free:
                lo = lower.get(var, 0)
                if lo > int_bound:
                    raise _Saturated
                ranges.append(range(lo, int_bound + 1))
            trees = list(scenario.extra)
            if lowered.int_tree is not None:
                trees.append(lowered.int_tree)
            saw_unknown = False
            for combo in iter_product(*ranges):
                if not budget.charge():
                    return WalkResult("resource")
                candidate = dict(ints)
                candidate.update(zip(free, combo))
                values = [tree3(t, candidate, state) for t in trees]
                if all(v is True for v in values):
                    words = _reconstruct(state)
                    return WalkResult("sat", words, candidate)
                if None in values:
                    saw_unknown = True
            if saw_unknown:
                touched = True
            # Exhausting a free variable's range is bound-dependent only
            # if some constraint actually reads that variable.
            free_set = set(free)
            for tree in trees:
                for leaf in tree_leaves(tree):
                    for _c, term in leaf.atom.terms:
                        if isinstance(term, IntTerm) and term.var in free_set:
                            touched = True
            return None
        except _Saturated:
            touched = True
            return None

    def _reconstruct(state: tuple) -> dict[NodeId, str]:
        letters: list[list[str]] = [[] for _ in mta.tracks]
        cur = state
        while True:
            step = parents[cur]
            if step is None:
                break
            prev, track, ch = step
            letters[track].append(ch)
            cur = prev
        return {
            node: "".join(reversed(letters[i]))
            for i, node in enumerate(mta.tracks)
        }

    # --- main loop --------------------------------------------------------
    while queue:
        state = queue.popleft()
        result = try_accept(state)
        if result is not None:
            return result
        prod, lens, counts, terms, comps = state
        n_tracks = mta.n_tracks
        for track, ch, nxt_prod in mta.moves(prod):
            new_lens = lens
            li = track_len[track]
            if li is not None:
                grown = bump(lens[li])
                cap_here = len_caps[track]
                if cap_here is not None and grown > cap_here:
                    continue  # mandatory length ceiling: state can never accept
                new_lens = lens[:li] + (grown,) + lens[li + 1 :]
            new_counts = counts
            dead = False
            for ch2, ci in track_counts[track]:
                if ch2 == ch:
                    grown = bump(new_counts[ci])
                    cap_here = count_caps.get(ci)
                    if cap_here is not None and grown > cap_here:
                        dead = True
                        break
                    new_counts = (
                        new_counts[:ci] + (grown,) + new_counts[ci + 1 :]
                    )
            if dead:
                continue
            new_comps = comps
            for c in track_comps[track]:
                q, first = new_comps[c]
                needle = scenario.comps[c][1]
                q2 = deltas[needle][q][ch]
                if q2 == len(needle) and first == -1:
                    assert li is not None
                    first = new_lens[li]
                new_comps = new_comps[:c] + ((q2, first),) + new_comps[c + 1 :]

            # Position trackers: bump while unfrozen, optionally freeze on
            # a matching letter (after the bump, so positions are 1-based).
            alternatives: list[list[tuple[int, int]]] = []
            for t in track_terms[track]:
                y, z = terms[t]
                if z:
                    alternatives.append([(y, z)])
                else:
                    y2 = bump(y)
                    options = [(y2, 0)]
                    if scenario.terms[t][1] == ch:
                        options.append((y2, 1))
                    alternatives.append(options)
            tset = track_terms[track]
            for combo in iter_product(*alternatives):
                new_terms = list(terms)
                for t, pair in zip(tset, combo):
                    new_terms[t] = pair
                nxt = (nxt_prod, new_lens, new_counts, tuple(new_terms), new_comps)
                if nxt not in parents:
                    if not budget.charge():
                        return WalkResult("resource")
                    parents[nxt] = (state, track, ch)
                    queue.append(nxt)

    return WalkResult("within" if touched else "unsat")


# ---------------------------------------------------------------------------
# Orchestration


def default_int_bound(problem: Problem) -> int:
    """A bound scaled to the problem's machine sizes, within sane limits."""
    product = 1
    if problem.regular is not None:
        for leaf in tree_leaves(problem.regular):
            product *= leaf.atom.nfa.n_states  # type: ignore[union-attr]
            if product > 1_048_576:
                return 1_048_576
    for rel in problem.relations:
        if isinstance(rel, TransducerEq):
            product *= transducer_normalize(rel.transducer).n_states
            if product > 1_048_576:
                return 1_048_576
    return max(64, product)


def solve_extended(
    problem: Problem,
    graph: DependencyGraph,
    *,
    int_bound: Optional[int] = None,
    resource_limit: int = 2_000_000,
    stats: Optional[dict] = None,
) -> Verdict:
    """Decide a problem with extension constraints, bounded by ``int_bound``.

    Reuses the core solver's branch enumeration for the string skeleton;
    each surviving branch is crossed with every lowering scenario and
    walked.  The first satisfying walk wins; otherwise the weakest
    caveat seen anywhere (resource exhaustion, then bound dependence)
    qualifies the negative answer.
    """
    bound = default_int_bound(problem) if int_bound is None else int_bound
    shapes = split_concat(problem, graph)
    int_tree = lower_integer_terms(problem.integers, shapes)
    scenarios = list(enumerate_scenarios(problem, shapes))
    budget = Budget(resource_limit)

    norm_ts = {
        idx: transducer_normalize(rel.transducer)
        for idx, rel in enumerate(problem.relations)
        if isinstance(rel, TransducerEq)
    }
    seg_cache: dict = {}
    any_within = False
    any_resource = False
    walks = branches = forests = 0

    def note() -> None:
        if stats is not None:
            stats["membership-branches"] = branches
            stats["forests"] = forests
            stats["scenarios"] = len(scenarios)
            stats["walks"] = walks
            stats["budget-left"] = budget.remaining

    for _values, var_nfas in normalize_regular(problem):
        branches += 1
        for forest in _branch_forests(
            problem, graph, shapes, var_nfas, norm_ts, seg_cache
        ):
            forests += 1
            feasible = _propagate(forest)
            if feasible is None:
                continue
            refined = AcForest(
                forest.order, feasible, forest.children, forest.parent
            )
            mta = build_tree_solution_automaton(refined)
            for scenario in scenarios:
                walks += 1
                lowered = LoweredProblem(
                    mta, scenario, int_tree, problem.int_vars, problem.alphabet
                )
                result = counter_walk_solve(lowered, bound, budget)
                if result.status == "sat":
                    assert result.node_words is not None
                    assert result.int_values is not None
                    model: Assignment = _join_model(
                        problem, shapes, result.node_words
                    )
                    for var in problem.int_vars:
                        model[var] = result.int_values.get(var, 0)
                    if not evaluate(problem, model):
                        raise RuntimeError(
                            "internal error: extended model failed verification"
                        )
                    note()
                    return Verdict("sat", model=model)
                if result.status == "within":
                    any_within = True
                elif result.status == "resource":
                    any_resource = True
            if any_resource:
                break
        if any_resource:
            break

    note()
    if any_resource:
        return Verdict("resource-limit", int_bound=bound)
    if any_within:
        return Verdict("unsat-within-bounds", int_bound=bound)
    return Verdict("unsat")
