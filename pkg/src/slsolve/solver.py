"""The decision procedure for straight-line string constraints.

Solving runs in three stages:

1. *Membership normalization*: every satisfying truth assignment of the
   regular-constraint tree is enumerated; under one assignment each
   variable gets a single constraint automaton (intersection of the
   positive leaves and complements of the negative ones).

2. *Splitting*: each variable's value is cut into the pieces induced by
   the concatenation structure.  The piece boundaries inside a
   constraint automaton, and the intermediate transducer states at piece
   boundaries of a transducer application, are enumerated explicitly —
   this is the only exponential dial, and it is exponential in the
   problem's dimension, not its size.

3. *Forest solving*: under fixed choices the remaining problem is a
   forest whose nodes are value pieces and whose edges are transducer
   segments; emptiness propagates bottom-up through pre-images, and a
   concrete model is read back top-down through shortest witnesses.

String-only problems are decided completely.  Problems with integer,
character, index-of, or disequality constraints are routed to
:mod:`slsolve.extensions`, which replaces stage 3 with a counter walk
over a bounded integer space.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterator, Optional

from .automata import (
    EPSILON,
    Nfa,
    nfa_complement,
    nfa_concat,
    nfa_eps_eliminate,
    nfa_from_word,
    nfa_intersect,
    nfa_is_empty,
    nfa_multi_slice,
    nfa_nonempty_shortest,
    nfa_reduce,
    nfa_trim,
    nfa_universal,
)
from .constraints import (
    And,
    Assignment,
    ConcatEq,
    Leaf,
    Lit,
    Problem,
    RegAtom,
    TransducerEq,
    Var,
    evaluate,
    tree_eval_indexed,
    tree_leaves,
)
from .straightline import DependencyGraph, check_straightline
from .transducer import (
    Transducer,
    apply_function,
    post_image,
    pre_image_within,
    transducer_normalize,
    transducer_trim,
)

#: A piece of some variable's value: (variable name, piece index).
NodeId = tuple[str, int]


@dataclass(frozen=True)
class Verdict:
    """Outcome of a solve call.

    ``status`` is one of ``"sat"``, ``"unsat"``, ``"unsat-within-bounds"``
    (a refutation that only covers integer values up to ``int_bound``)
    or ``"resource-limit"``.  ``model`` is present exactly when the
    status is ``"sat"``.
    """

    status: str
    model: Optional[Assignment] = None
    int_bound: Optional[int] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


@dataclass(frozen=True)
class Shape:
    """How a variable's value decomposes into literals and pieces.

    ``literals`` has one more entry than ``slots``; the value reads
    ``literals[0] + piece(slots[0]) + literals[1] + ...``.  Slots refer
    to *primary* nodes — pieces of source variables or of transducer
    images — so a concatenation-defined variable shares its pieces with
    the variables it is built from rather than owning copies.
    """

    literals: tuple[str, ...]
    slots: tuple[NodeId, ...]


@dataclass
class AcForest:
    """One fully-split branch: piece automata plus transducer segments.

    ``nfas`` holds each node's constraint automaton (already the
    intersection of every piece constraint that lands on the node).
    ``children`` maps a node to the image pieces that depend on it, each
    through one transducer segment; a node has at most one parent, and
    parents always belong to strictly earlier variables, so the edges
    form a forest rooted at parentless pieces.
    """

    order: tuple[NodeId, ...]
    nfas: dict[NodeId, Nfa]
    children: dict[NodeId, list[tuple[NodeId, Transducer]]]
    parent: dict[NodeId, tuple[NodeId, Transducer]]


def fold_constant_relations(problem: Problem) -> Problem:
    """Rewrite variable-free concatenations as regular constraints.

    ``x = "ab"`` pins ``x`` to a one-word language; treating it as a
    membership constraint (and ``x`` as a source variable) keeps every
    remaining equation genuinely relational.  Problems built by the
    parser arrive in this form already; folding here makes the solver
    indifferent to how a problem was constructed.
    """
    constant = [
        rel
        for rel in problem.relations
        if isinstance(rel, ConcatEq)
        and not any(isinstance(item, Var) for item in rel.items)
    ]
    if not constant:
        return problem
    keep = tuple(rel for rel in problem.relations if rel not in constant)
    extra = [
        Leaf(
            RegAtom(
                rel.lhs,
                nfa_from_word(
                    "".join(item.text for item in rel.items if isinstance(item, Lit)),
                    problem.alphabet,
                ),
            )
        )
        for rel in constant
    ]
    parts = ([problem.regular] if problem.regular is not None else []) + extra
    regular = parts[0] if len(parts) == 1 else And(tuple(parts))
    return Problem(
        alphabet=problem.alphabet,
        str_vars=problem.str_vars,
        int_vars=problem.int_vars,
        relations=keep,
        regular=regular,
        integers=problem.integers,
        chars=problem.chars,
        indexofs=problem.indexofs,
        disequalities=problem.disequalities,
    )


# ---------------------------------------------------------------------------
# Stage 1: membership normalization


def normalize_regular(
    problem: Problem,
) -> Iterator[tuple[tuple[bool, ...], dict[str, Nfa]]]:
    """Yield (leaf truth vector, per-variable automaton) per branch.

    Leaf occurrences are indexed in traversal order; vectors are tried
    all-true first, descending in binary order, and only vectors that
    satisfy the constraint tree are yielded.  Under one vector each
    variable's automaton is the intersection of its positively assigned
    leaves with the complements of its negatively assigned ones (the
    full language when a variable is unconstrained).  Complements are
    built lazily, once per leaf, so branches that never falsify a leaf
    never pay for determinization.
    """
    tree = problem.regular
    leaves = tree_leaves(tree) if tree is not None else []
    universal = nfa_universal(problem.alphabet)
    complements: dict[int, Nfa] = {}

    for values in iter_product((True, False), repeat=len(leaves)):
        if tree is not None and not tree_eval_indexed(tree, values):
            continue
        var_nfas: dict[str, Nfa] = {v: universal for v in problem.str_vars}
        for idx, (leaf, value) in enumerate(zip(leaves, values)):
            atom = leaf.atom
            assert isinstance(atom, RegAtom)
            if value:
                factor = atom.nfa
            else:
                if idx not in complements:
                    complements[idx] = nfa_complement(atom.nfa)
                factor = complements[idx]
            var_nfas[atom.var] = nfa_intersect(var_nfas[atom.var], factor)
        yield values, var_nfas


# ---------------------------------------------------------------------------
# Stage 2: shapes and splitting


def split_concat(
    problem: Problem, graph: Optional[DependencyGraph] = None
) -> dict[str, Shape]:
    """The piece decomposition of every variable.

    Source variables own a single piece; transducer images own one piece
    per piece of their argument; concatenations splice the shapes of
    their items, merging adjacent literals.  The resulting slot lists
    identify each piece of a defined variable with the piece of the
    primary variable it coincides with.
    """
    if graph is None:
        graph = check_straightline(problem)
    shapes: dict[str, Shape] = {}
    for var in graph.order:
        rel = graph.defining.get(var)
        if rel is None:
            shapes[var] = Shape(("", ""), ((var, 0),))
        elif isinstance(rel, TransducerEq):
            m = len(shapes[rel.arg].slots)
            shapes[var] = Shape(("",) * (m + 1), tuple((var, k) for k in range(m)))
        else:
            literals = [""]
            slots: list[NodeId] = []
            for item in rel.items:
                if isinstance(item, Lit):
                    literals[-1] += item.text
                else:
                    sub = shapes[item.name]
                    literals[-1] += sub.literals[0]
                    for k, slot in enumerate(sub.slots):
                        slots.append(slot)
                        literals.append(sub.literals[k + 1])
            shapes[var] = Shape(tuple(literals), tuple(slots))
    return shapes


def primary_nodes(
    problem: Problem, graph: DependencyGraph, shapes: dict[str, Shape]
) -> tuple[NodeId, ...]:
    """All forest nodes, grouped by owner in straight-line order."""
    out: list[NodeId] = []
    for var in graph.order:
        rel = graph.defining.get(var)
        if rel is None or isinstance(rel, TransducerEq):
            out.extend((var, k) for k in range(len(shapes[var].slots)))
    return tuple(out)


def _word_step(nfa: Nfa, states: frozenset[int], word: str) -> frozenset[int]:
    """States reachable from ``states`` by reading ``word`` (no epsilons)."""
    for ch in word:
        states = frozenset(
            r for q in states for r in nfa.arcs_by_symbol[q].get(ch, ())
        )
        if not states:
            break
    return states


def _pieces_for(
    nfa: Nfa, shape: Shape, cuts: tuple[int, ...]
) -> Optional[list[Nfa]]:
    """Slice a variable's automaton into per-piece automata for given cuts.

    ``cuts[j]`` is the automaton state reached exactly when piece ``j``
    ends.  The literal gaps of the shape are consumed inside the slices
    (as multiple entry states), so only piece boundaries are ever
    enumerated.  Returns None as soon as any slice is empty.
    """
    if nfa.has_epsilon:
        nfa = nfa_eps_eliminate(nfa)
    m = len(shape.slots)
    pieces: list[Nfa] = []
    for j in range(m):
        if j == 0:
            starts = _word_step(nfa, frozenset({nfa.initial}), shape.literals[0])
        else:
            starts = _word_step(nfa, frozenset({cuts[j - 1]}), shape.literals[j])
        if not starts:
            return None
        if j < m - 1:
            finals: frozenset[int] = frozenset({cuts[j]})
        else:
            finals = frozenset(
                q
                for q in range(nfa.n_states)
                if _word_step(nfa, frozenset({q}), shape.literals[m]) & nfa.finals
            )
        if not finals:
            return None
        piece = nfa_trim(nfa_eps_eliminate(nfa_multi_slice(nfa, starts, finals)))
        if nfa_is_empty(piece):
            return None
        pieces.append(piece)
    return pieces


def _segment_machine(
    t: Transducer,
    lit_in: str,
    from_state: int,
    to_states: frozenset[int],
    post_lit: str,
) -> Transducer:
    """The transducer segment relating one argument piece to one image piece.

    Behaves like ``t`` run from ``from_state`` into ``to_states``,
    except that the literal ``lit_in`` is consumed invisibly before the
    piece input begins and ``post_lit`` invisibly after it ends — their
    transduction output still appears, only the input side is dropped.
    ``t`` must be normalized; the result is normalized (and trimmed), so
    an empty relation shows up as an empty final-state set.
    """
    assert t.is_normalized
    pre = len(lit_in)
    post = len(post_lit)
    rows = pre + 1 + post

    # Row layout: rows 0..pre-1 are literal-prefix progress, row ``pre``
    # is the piece zone, rows pre+1..pre+post are literal-suffix
    # progress.  Output moves are available in every row.
    def sid(row: int, q: int) -> int:
        return row * t.n_states + q

    rules: list[tuple[int, str, str, int]] = []
    for q, ins, outs, r in t.transitions:
        if ins == EPSILON:
            for row in range(rows):
                rules.append((sid(row, q), EPSILON, outs, sid(row, r)))
        else:
            for i in range(pre):
                if lit_in[i] == ins:
                    rules.append((sid(i, q), EPSILON, EPSILON, sid(i + 1, r)))
            rules.append((sid(pre, q), ins, outs, sid(pre, r)))
            for j in range(post):
                if post_lit[j] == ins:
                    rules.append(
                        (sid(pre + j, q), EPSILON, EPSILON, sid(pre + j + 1, r))
                    )
    raw = Transducer(
        t.alphabet,
        rows * t.n_states,
        tuple(sorted(set(rules))),
        sid(0, from_state),
        frozenset(sid(rows - 1, q) for q in to_states),
    )
    # Trim before normalizing: literal rows are mostly unreachable, and
    # the closure pass inside normalize is what their count would hurt.
    return transducer_normalize(transducer_trim(raw))


#: Ranges larger than this fall back to the plain membership automaton.
_RANGE_STATE_CAP = 400

#: Below this many raw cut combinations the blind search is cheap enough
#: that building a boundary filter would not pay for itself.
_FILTER_THRESHOLD = 256

#: Abandon a boundary filter whose product exploration grows past this.
_FILTER_STATE_CAP = 400_000


def _var_ranges(
    problem: Problem,
    graph: DependencyGraph,
    shapes: dict[str, Shape],
    var_nfas: dict[str, Nfa],
    norm_by_var: dict[str, Transducer],
) -> dict[str, Nfa]:
    """Forward value overapproximations along the definition chain.

    ``ranges[v]`` accepts every value ``v`` can take in a solution of
    this branch (usually more).  Only variables that feed an unsplit
    transducer image are computed — those images use their range as a
    node refinement, which is what lets propagation refute boundary
    choices early instead of deep in a pre-image chain.  Oversized
    results fall back to the membership automaton to keep later products
    small.
    """
    needed: set[str] = set()
    stack = [
        var
        for var in graph.order
        if isinstance(graph.defining.get(var), TransducerEq)
        and len(shapes[var].slots) == 1
    ]
    while stack:
        var = stack.pop()
        if var in needed:
            continue
        needed.add(var)
        rel = graph.defining.get(var)
        if isinstance(rel, TransducerEq):
            stack.append(rel.arg)
        elif isinstance(rel, ConcatEq):
            stack.extend(item.name for item in rel.items if isinstance(item, Var))

    ranges: dict[str, Nfa] = {}
    for var in graph.order:
        if var not in needed:
            continue
        rel = graph.defining.get(var)
        if rel is None:
            ranges[var] = var_nfas[var]
            continue
        if isinstance(rel, TransducerEq):
            image = post_image(norm_by_var[var], ranges[rel.arg])
            cur = nfa_intersect(var_nfas[var], image)
        else:
            parts = [
                ranges[item.name]
                if isinstance(item, Var)
                else nfa_from_word(item.text, problem.alphabet)
                for item in rel.items
            ]
            if not parts:
                parts = [nfa_from_word("", problem.alphabet)]
            cur = nfa_intersect(var_nfas[var], nfa_concat(parts))
        cur = nfa_reduce(cur)
        ranges[var] = var_nfas[var] if cur.n_states > _RANGE_STATE_CAP else cur
    return ranges


def _boundary_filter(
    t: Transducer,
    a_img: Nfa,
    arg_shape: Shape,
    zone_langs: list[Nfa],
) -> Optional[list[set[tuple[int, int]]]]:
    """Joint boundary states that lie on some accepting run of a split.

    For ``y = T(x)`` with the argument split into ``m`` pieces, explores
    one product of: position within the argument's literal/piece layout,
    the state of ``t``, the state of ``y``'s automaton ``a_img`` (driven
    by ``t``'s output), and — inside piece zones — the state of that
    zone's current language refinement.  Element ``j`` of the result is
    the set of ``(transducer state, image-automaton state)`` pairs
    observable at inner boundary ``j`` on at least one accepting run;
    cut choices outside these sets cannot possibly yield a solution.

    A sound filter only: zone languages are refinements known so far,
    so surviving pairs may still fail full propagation.  Returns None
    when the exploration exceeds the state cap (caller falls back to
    blind enumeration).
    """
    assert t.is_normalized
    if a_img.has_epsilon:
        a_img = nfa_eps_eliminate(a_img)
    zones = [
        nfa_eps_eliminate(z) if z.has_epsilon else z for z in zone_langs
    ]
    m = len(arg_shape.slots)
    lits = arg_shape.literals

    in_rules: list[dict[str, list[int]]] = [{} for _ in range(t.n_states)]
    out_rules: list[list[tuple[str, int]]] = [[] for _ in range(t.n_states)]
    for q, ins, outs, r in t.transitions:
        if ins == EPSILON:
            out_rules[q].append((outs, r))
        else:
            in_rules[q].setdefault(ins, []).append(r)

    def make_pre(j: int, i: int, q: int, s: int) -> tuple:
        if i == len(lits[j]):
            return ("main", j, q, s, zones[j].initial)
        return ("pre", j, i, q, s)

    def make_post(i: int, q: int, s: int) -> tuple:
        if i == len(lits[m]):
            return ("end", q, s)
        return ("post", i, q, s)

    def successors(state: tuple) -> Iterator[tuple]:
        kind = state[0]
        if kind == "pre":
            _, j, i, q, s = state
            for q2 in in_rules[q].get(lits[j][i], ()):
                yield make_pre(j, i + 1, q2, s)
            for b, q2 in out_rules[q]:
                for s2 in a_img.arcs_by_symbol[s].get(b, ()):
                    yield ("pre", j, i, q2, s2)
        elif kind == "main":
            _, j, q, s, r = state
            zone = zones[j]
            zone_arcs = zone.arcs_by_symbol[r]
            for ch, q2s in in_rules[q].items():
                for r2 in zone_arcs.get(ch, ()):
                    for q2 in q2s:
                        yield ("main", j, q2, s, r2)
            for b, q2 in out_rules[q]:
                for s2 in a_img.arcs_by_symbol[s].get(b, ()):
                    yield ("main", j, q2, s2, r)
            if r in zone.finals:
                if j < m - 1:
                    yield ("bnd", j, q, s)
                else:
                    yield make_post(0, q, s)
        elif kind == "bnd":
            _, j, q, s = state
            yield make_pre(j + 1, 0, q, s)
        elif kind == "post":
            _, i, q, s = state
            for q2 in in_rules[q].get(lits[m][i], ()):
                yield make_post(i + 1, q2, s)
            for b, q2 in out_rules[q]:
                for s2 in a_img.arcs_by_symbol[s].get(b, ()):
                    yield ("post", i, q2, s2)
        else:
            _, q, s = state
            for b, q2 in out_rules[q]:
                for s2 in a_img.arcs_by_symbol[s].get(b, ()):
                    yield ("end", q2, s2)

    start = make_pre(0, 0, t.initial, a_img.initial)
    preds: dict[tuple, list[tuple]] = {start: []}
    queue = [start]
    accepting: list[tuple] = []
    while queue:
        state = queue.pop()
        if state[0] == "end" and state[1] in t.finals and state[2] in a_img.finals:
            accepting.append(state)
        for nxt in successors(state):
            known = preds.get(nxt)
            if known is None:
                if len(preds) > _FILTER_STATE_CAP:
                    return None
                preds[nxt] = [state]
                queue.append(nxt)
            else:
                known.append(state)

    alive: set[tuple] = set(accepting)
    queue = list(accepting)
    while queue:
        state = queue.pop()
        for prev in preds[state]:
            if prev not in alive:
                alive.add(prev)
                queue.append(prev)

    out: list[set[tuple[int, int]]] = [set() for _ in range(m - 1)]
    for state in alive:
        if state[0] == "bnd":
            out[state[1]].add((state[2], state[3]))
    return out


def _branch_forests(
    problem: Problem,
    graph: DependencyGraph,
    shapes: dict[str, Shape],
    var_nfas: dict[str, Nfa],
    norm_ts: dict[int, Transducer],
    seg_cache: dict[tuple[int, int, int, Optional[int]], Transducer],
) -> Iterator[AcForest]:
    """Enumerate the cut-resolved forests of one membership branch.

    Choice points (variables whose automata need real cuts, transducer
    applications over split arguments) are explored depth-first with
    state ids ascending; forced choices are resolved up front.  A branch
    dies as soon as any piece automaton or segment relation is empty, or
    as soon as the pieces landing on one node have an empty
    intersection.  Two refinements keep the search small: unsplit
    transducer images pin their node to the forward range of their
    definition chain, and split applications enumerate only boundary
    pairs that a one-shot reachability filter leaves alive.
    """
    primary = primary_nodes(problem, graph, shapes)
    universal = nfa_universal(problem.alphabet)
    nodes: dict[NodeId, Nfa] = {}
    edges: list[tuple[NodeId, NodeId, Transducer]] = []

    def add_pieces(shape: Shape, pieces: list[Nfa]) -> Optional[list[tuple[NodeId, Optional[Nfa]]]]:
        """Intersect pieces onto their nodes; None (after undo) if one empties."""
        saved: list[tuple[NodeId, Optional[Nfa]]] = []
        for j, piece in enumerate(pieces):
            node = shape.slots[j]
            old = nodes.get(node)
            saved.append((node, old))
            new = piece if old is None else nfa_intersect(old, piece)
            if nfa_is_empty(new):
                undo(saved)
                return None
            nodes[node] = new
        return saved

    def undo(saved: list[tuple[NodeId, Optional[Nfa]]]) -> None:
        for node, old in reversed(saved):
            if old is None:
                nodes.pop(node, None)
            else:
                nodes[node] = old

    def rel_segments(
        idx: int, rel: TransducerEq, d: tuple[int, ...]
    ) -> Optional[list[tuple[NodeId, NodeId, Transducer]]]:
        t = norm_ts[idx]
        arg_shape = shapes[rel.arg]
        m = len(arg_shape.slots)
        out: list[tuple[NodeId, NodeId, Transducer]] = []
        for k in range(m):
            from_state = t.initial if k == 0 else d[k - 1]
            to_key = d[k] if k < m - 1 else None
            key = (idx, k, from_state, to_key)
            seg = seg_cache.get(key)
            if seg is None:
                to_states = frozenset({d[k]}) if k < m - 1 else t.finals
                post_lit = arg_shape.literals[m] if k == m - 1 else ""
                seg = _segment_machine(
                    t, arg_shape.literals[k], from_state, to_states, post_lit
                )
                seg_cache[key] = seg
            if not seg.finals:
                return None
            out.append((arg_shape.slots[k], (rel.lhs, k), seg))
        return out

    image_rel_idx: dict[str, int] = {
        rel.lhs: idx
        for idx, rel in enumerate(problem.relations)
        if isinstance(rel, TransducerEq)
    }
    norm_by_var = {
        rel.lhs: norm_ts[idx]
        for idx, rel in enumerate(problem.relations)
        if isinstance(rel, TransducerEq)
    }

    # Pin unsplit transducer images to their forward range.
    ranges = _var_ranges(problem, graph, shapes, var_nfas, norm_by_var)
    for var in graph.order:
        rel = graph.defining.get(var)
        if isinstance(rel, TransducerEq) and len(shapes[var].slots) == 1:
            rng = ranges.get(var)
            if rng is not None and rng is not var_nfas[var]:
                if nfa_is_empty(rng):
                    return
                nodes[(var, 0)] = rng

    # Forced choices next; any emptiness kills the whole branch.
    chosen: dict[str, tuple[int, ...]] = {}
    levels: list[tuple[str, object]] = []
    for var in graph.order:
        shape = shapes[var]
        nfa = var_nfas[var]
        if len(shape.slots) >= 2 and nfa.n_states > 1:
            levels.append(("var", var))
        else:
            chosen[var] = (0,) * (len(shape.slots) - 1)
            pieces = _pieces_for(nfa, shape, chosen[var])
            if pieces is None or add_pieces(shape, pieces) is None:
                return

    filters: dict[int, list[set[tuple[int, int]]]] = {}
    for idx, rel in enumerate(problem.relations):
        if not isinstance(rel, TransducerEq):
            continue
        arg_shape = shapes[rel.arg]
        m = len(arg_shape.slots)
        if m < 2:
            continue
        t = norm_ts[idx]
        a_img = var_nfas[rel.lhs]
        if (t.n_states * a_img.n_states) ** (m - 1) <= _FILTER_THRESHOLD:
            continue
        zone_langs = [
            nodes.get(arg_shape.slots[j], universal) for j in range(m)
        ]
        pairs = _boundary_filter(t, a_img, arg_shape, zone_langs)
        if pairs is None:
            continue
        if any(not v for v in pairs):
            return
        filters[idx] = pairs

    for idx, rel in enumerate(problem.relations):
        if not isinstance(rel, TransducerEq):
            continue
        m = len(shapes[rel.arg].slots)
        if m >= 2 and norm_ts[idx].n_states > 1:
            levels.append(("rel", idx))
        else:
            segs = rel_segments(idx, rel, (0,) * (m - 1))
            if segs is None:
                return
            edges.extend(segs)

    def assemble() -> AcForest:
        children: dict[NodeId, list[tuple[NodeId, Transducer]]] = {
            n: [] for n in primary
        }
        parent: dict[NodeId, tuple[NodeId, Transducer]] = {}
        for pn, cn, machine in edges:
            children[pn].append((cn, machine))
            parent[cn] = (pn, machine)
        nfas = {n: nodes.get(n, universal) for n in primary}
        return AcForest(order=primary, nfas=nfas, children=children, parent=parent)

    def rec(i: int) -> Iterator[AcForest]:
        if i == len(levels):
            yield assemble()
            return
        kind, payload = levels[i]
        if kind == "var":
            var = payload
            assert isinstance(var, str)
            shape = shapes[var]
            nfa = var_nfas[var]
            n_cuts = len(shape.slots) - 1
            pairs = filters.get(image_rel_idx.get(var, -1))
            if pairs is None:
                cut_iter = iter_product(range(nfa.n_states), repeat=n_cuts)
            else:
                cut_iter = iter_product(
                    *(sorted({c for _d, c in pairs[j]}) for j in range(n_cuts))
                )
            for cuts in cut_iter:
                pieces = _pieces_for(nfa, shape, cuts)
                if pieces is None:
                    continue
                saved = add_pieces(shape, pieces)
                if saved is None:
                    continue
                chosen[var] = cuts
                yield from rec(i + 1)
                del chosen[var]
                undo(saved)
        else:
            idx = payload
            assert isinstance(idx, int)
            rel = problem.relations[idx]
            assert isinstance(rel, TransducerEq)
            m = len(shapes[rel.arg].slots)
            pairs = filters.get(idx)
            if pairs is None:
                d_iter = iter_product(range(norm_ts[idx].n_states), repeat=m - 1)
            else:
                cuts = chosen[rel.lhs]
                d_iter = iter_product(
                    *(
                        sorted({d for d, c in pairs[j] if c == cuts[j]})
                        for j in range(m - 1)
                    )
                )
            for d in d_iter:
                segs = rel_segments(idx, rel, d)
                if segs is None:
                    continue
                edges.extend(segs)
                yield from rec(i + 1)
                del edges[-len(segs):]

    yield from rec(0)


# ---------------------------------------------------------------------------
# Stage 3: forest propagation and witness extraction


def _propagate(forest: AcForest) -> Optional[dict[NodeId, Nfa]]:
    """Shrink each node's language to values extendable through all edges.

    Processes nodes in reverse straight-line order (children before
    parents), intersecting each parent with the pre-image of each
    child's feasible language through the connecting segment.  Returns
    None if any node empties, otherwise the feasible language per node.
    """
    feasible: dict[NodeId, Nfa] = {}
    for node in reversed(forest.order):
        cur = forest.nfas[node]
        for child, machine in forest.children[node]:
            cur = nfa_reduce(pre_image_within(machine, feasible[child], cur))
            if nfa_is_empty(cur):
                return None
        cur = nfa_reduce(cur)
        if nfa_is_empty(cur):
            return None
        feasible[node] = cur
    return feasible


def _extract(forest: AcForest, feasible: dict[NodeId, Nfa]) -> dict[NodeId, str]:
    """Read one concrete value per node out of a feasible forest.

    Parentless nodes take the shortest word of their language; a
    transducer-image node takes the shortest word compatible with both
    its language and the image of its parent's already-chosen value.
    Propagation guarantees these sets are non-empty.
    """
    value: dict[NodeId, str] = {}
    for node in forest.order:
        if node in forest.parent:
            pnode, machine = forest.parent[node]
            lang = nfa_intersect(apply_function(machine, value[pnode]), feasible[node])
            word = nfa_nonempty_shortest(lang)
        else:
            word = nfa_nonempty_shortest(feasible[node])
        if word is None:
            raise RuntimeError(
                "internal error: extraction failed on a non-empty forest"
            )
        value[node] = word
    return value


def _join_model(
    problem: Problem, shapes: dict[str, Shape], value: dict[NodeId, str]
) -> Assignment:
    model: Assignment = {}
    for var in problem.str_vars:
        shape = shapes[var]
        parts = [shape.literals[0]]
        for j, slot in enumerate(shape.slots):
            parts.append(value[slot])
            parts.append(shape.literals[j + 1])
        model[var] = "".join(parts)
    return model


def solve(
    problem: Problem,
    *,
    int_bound: Optional[int] = None,
    resource_limit: int = 2_000_000,
    stats: Optional[dict] = None,
) -> Verdict:
    """Decide a straight-line problem; produce a model when satisfiable.

    Raises :class:`slsolve.straightline.NotStraightLine` (or ValueError
    for ill-formed input) rather than guessing on problems outside the
    fragment.  For string-only problems the answer is definitive.  When
    integer, character, index-of or disequality constraints are present
    the search is exhaustive only up to ``int_bound`` (a default is
    derived from the problem when None), so the negative answer weakens
    to ``unsat-within-bounds`` unless the bound provably covers all
    integers; ``resource_limit`` caps the size of that bounded walk,
    yielding ``resource-limit`` when exceeded.

    Models returned are always verified against the original problem
    before being reported.  A ``stats`` dict, when supplied, is filled
    with deterministic search counters.
    """
    check_straightline(problem)
    folded = fold_constant_relations(problem)
    graph = check_straightline(folded)
    if folded.has_extensions:
        from .extensions import solve_extended

        return solve_extended(
            folded,
            graph,
            int_bound=int_bound,
            resource_limit=resource_limit,
            stats=stats,
        )

    shapes = split_concat(folded, graph)
    norm_ts = {
        idx: transducer_normalize(rel.transducer)
        for idx, rel in enumerate(folded.relations)
        if isinstance(rel, TransducerEq)
    }
    seg_cache: dict[tuple[int, int, int, Optional[int]], Transducer] = {}
    branches = forests = feasible_forests = 0

    def note() -> None:
        if stats is not None:
            stats["membership-branches"] = branches
            stats["forests"] = forests
            stats["feasible-forests"] = feasible_forests

    for _values, var_nfas in normalize_regular(folded):
        branches += 1
        for forest in _branch_forests(
            folded, graph, shapes, var_nfas, norm_ts, seg_cache
        ):
            forests += 1
            feasible = _propagate(forest)
            if feasible is None:
                continue
            feasible_forests += 1
            model = _join_model(folded, shapes, _extract(forest, feasible))
            if not evaluate(problem, model):
                raise RuntimeError(
                    "internal error: extracted model failed verification"
                )
            note()
            return Verdict("sat", model=model)
    note()
    return Verdict("unsat")


# ---------------------------------------------------------------------------
# Static model-size bound


def max_model_bound(problem: Problem) -> int:
    """A length every satisfiable instance has a model within.

    Mirrors the solver's own extraction: bounds the automaton sizes a
    feasible forest can reach (piece intersections, segment pre-images)
    and converts them to word lengths through the shortest-witness rule
    (an automaton with *n* states accepts a word shorter than *n* if it
    accepts anything).  The result is usually loose but always sound for
    models this solver reports, which makes it usable as an enumeration
    cap.  Integer variables are not covered.
    """
    folded = fold_constant_relations(problem)
    graph = check_straightline(folded)
    shapes = split_concat(folded, graph)

    tree = folded.regular
    leaves = tree_leaves(tree) if tree is not None else []
    need_neg = [False] * len(leaves)
    if tree is not None:
        for values in iter_product((True, False), repeat=len(leaves)):
            if tree_eval_indexed(tree, values):
                for i, val in enumerate(values):
                    if not val:
                        need_neg[i] = True

    base: dict[str, int] = {v: 1 for v in folded.str_vars}
    for i, leaf in enumerate(leaves):
        atom = leaf.atom
        assert isinstance(atom, RegAtom)
        states = atom.nfa.n_states
        if need_neg[i]:
            states = max(states, nfa_complement(atom.nfa).n_states)
        base[atom.var] *= states

    contrib: dict[NodeId, list[str]] = {}
    for var in folded.str_vars:
        for slot in shapes[var].slots:
            contrib.setdefault(slot, []).append(var)

    rel_factor: dict[int, int] = {}
    child_edges: dict[NodeId, list[tuple[NodeId, int]]] = {}
    parent_edge: dict[NodeId, tuple[NodeId, int]] = {}
    for idx, rel in enumerate(folded.relations):
        if not isinstance(rel, TransducerEq):
            continue
        arg_shape = shapes[rel.arg]
        lit_len = sum(len(s) for s in arg_shape.literals)
        rel_factor[idx] = transducer_normalize(rel.transducer).n_states * (
            lit_len + 1
        )
        for k, slot in enumerate(arg_shape.slots):
            child = (rel.lhs, k)
            child_edges.setdefault(slot, []).append((child, idx))
            parent_edge[child] = (slot, idx)

    primary = primary_nodes(folded, graph, shapes)
    f_bound: dict[NodeId, int] = {}
    for node in reversed(primary):
        states = 1
        for var in contrib.get(node, ()):
            states *= base[var] + 1
        for child, idx in child_edges.get(node, ()):
            states *= rel_factor[idx] * f_bound[child]
        f_bound[node] = states

    length: dict[NodeId, int] = {}
    for node in primary:
        if node in parent_edge:
            pnode, idx = parent_edge[node]
            length[node] = (length[pnode] + 1) * rel_factor[idx] * f_bound[node] - 1
        else:
            length[node] = f_bound[node] - 1

    best = 0
    for var in folded.str_vars:
        shape = shapes[var]
        total = sum(len(s) for s in shape.literals)
        total += sum(length[slot] for slot in shape.slots)
        best = max(best, total)
    return best
