"""The package's worked example: holonomies on combinatorial graphs paired
with face flux operators (the DPG model).

Geometry is replaced by incidence data.  Atomic edges are indivisible
oriented curve segments; edges are reduced words of signed atoms; a graph is
a set of pairwise atom-disjoint edges; a face is a map assigning each atom
its signed crossing/touching number, from which the flux action on any edge
follows by linearity.  Every construction below is exact and deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import ratlin
from .errors import DimensionMismatchError, PqkError
from .frames import DofId, ReducedFrame
from .ratlin import Fraction
from .systems import (
    MomentumOperator,
    OpProbe,
    OrderEdge,
    OrderWitness,
    Probes,
    SpanProbe,
    SystemLabel,
    compose_witnesses,
    select_independent_dofs,
)

Sign = int


@dataclass(frozen=True)
class AtomicEdge:
    """An indivisible oriented edge between two nodes."""

    id: str
    source: str
    target: str
    loop: bool = False

    def __post_init__(self):
        if self.loop and self.source != self.target:
            raise ValueError(f"loop atom {self.id!r} must close on one node")
        if not self.loop and self.source == self.target:
            raise ValueError(f"atom {self.id!r} closes on itself but is not a loop")


@dataclass(frozen=True)
class EdgeWord:
    """A reduced composable word of signed atoms, traversed in order."""

    letters: tuple[tuple[str, Sign], ...]

    def __post_init__(self):
        letters = tuple((str(a), int(s)) for a, s in self.letters)
        if not letters:
            raise ValueError("an edge word needs at least one letter")
        if any(s not in (-1, 1) for _, s in letters):
            raise ValueError("letter signs must be +1 or -1")
        atoms = [a for a, _ in letters]
        if len(set(atoms)) != len(atoms):
            raise ValueError(f"edge word repeats an atom: {atoms}")
        object.__setattr__(self, "letters", letters)

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.letters)

    def inverse(self) -> "EdgeWord":
        return EdgeWord(tuple((a, -s) for a, s in reversed(self.letters)))


def word(*letters) -> EdgeWord:
    """Shorthand: word('a', '-b', 'c') -> a, then b reversed, then c."""
    out = []
    for entry in letters:
        if isinstance(entry, tuple):
            out.append(entry)
        elif entry.startswith("-"):
            out.append((entry[1:], -1))
        else:
            out.append((entry, 1))
    return EdgeWord(tuple(out))


def dof_id(w: EdgeWord) -> DofId:
    """Canonical identifier of the holonomy d.o.f. of an oriented word."""
    return "hol:" + ".".join(("-" if s < 0 else "") + a for a, s in w.letters)


def _word_key(w: EdgeWord) -> tuple:
    return tuple((a, 0 if s > 0 else 1) for a, s in w.letters)


def canonical(w: EdgeWord) -> EdgeWord:
    """The lexicographically smaller of a word and its inverse."""
    inv = w.inverse()
    return w if _word_key(w) <= _word_key(inv) else inv


def validate_word(w: EdgeWord, atoms: Mapping[str, AtomicEdge]) -> None:
    """Check atom existence and endpoint composability against a registry."""
    prev_end = None
    for a, s in w.letters:
        if a not in atoms:
            raise DimensionMismatchError(f"unknown atom {a!r} in edge word")
        atom = atoms[a]
        start, end = (atom.source, atom.target) if s > 0 else (atom.target, atom.source)
        if prev_end is not None and prev_end != start:
            raise DimensionMismatchError(
                f"edge word is not composable at atom {a!r}"
            )
        prev_end = end


@dataclass(frozen=True)
class Graph:
    """A finite set of pairwise atom-disjoint edges, in a fixed order."""

    edges: tuple[EdgeWord, ...]

    def __post_init__(self):
        edges = tuple(self.edges)
        seen: set[str] = set()
        for e in edges:
            overlap = seen & set(e.atoms)
            if overlap:
                raise ValueError(f"edges share atoms {sorted(overlap)}")
            seen |= set(e.atoms)
        object.__setattr__(self, "edges", edges)

    @property
    def atoms(self) -> frozenset[str]:
        return frozenset(a for e in self.edges for a in e.atoms)

    @property
    def dofs(self) -> tuple[DofId, ...]:
        return tuple(dof_id(e) for e in self.edges)

    def frame(self) -> ReducedFrame:
        return ReducedFrame(self.dofs)


def same_edges(a: Graph, b: Graph) -> bool:
    return {canonical(e) for e in a.edges} == {canonical(e) for e in b.edges}


@dataclass(frozen=True)
class Face:
    """Signed atom incidences of one flux surface.

    Geometric faces use values in {-1, -1/2, 0, 1/2, 1}: a half for each
    oriented endpoint touching, a whole for a transversal puncture.
    Synthesized faces (operator basis changes) may carry any rational.
    """

    id: str
    incidence: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        items = (
            self.incidence.items()
            if isinstance(self.incidence, Mapping)
            else self.incidence
        )
        pairs = tuple(
            sorted((str(a), ratlin.as_fraction(v)) for a, v in items if v != 0)
        )
        if len({a for a, _ in pairs}) != len(pairs):
            raise ValueError(f"face {self.id!r} has duplicate incidence entries")
        object.__setattr__(self, "incidence", pairs)

    @property
    def incidence_map(self) -> dict[str, Fraction]:
        return dict(self.incidence)


GEOMETRIC_INCIDENCES = (
    Fraction(-1),
    Fraction(-1, 2),
    Fraction(0),
    Fraction(1, 2),
    Fraction(1),
)


@dataclass(frozen=True)
class TestConnection:
    """Finitely supported atom holonomy assignments probing configurations."""

    __test__ = False  # not a pytest class, despite the name

    values: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        items = (
            self.values.items() if isinstance(self.values, Mapping) else self.values
        )
        pairs = tuple(
            sorted((str(a), ratlin.as_fraction(v)) for a, v in items if v != 0)
        )
        object.__setattr__(self, "values", pairs)

    @property
    def value_map(self) -> dict[str, Fraction]:
        return dict(self.values)


def holonomy(e: EdgeWord, conn: TestConnection) -> Fraction:
    """Signed sum of the connection's atom values along the word."""
    values = conn.value_map
    return sum((s * values.get(a, Fraction(0)) for a, s in e.letters), Fraction(0))


def witness_connection(graph: Graph, targets: Sequence) -> TestConnection:
    """A connection whose holonomies on the graph's edges hit the targets.

    Puts each target (sign-corrected) on the first atom of its edge; atom
    disjointness makes the assignments independent.
    """
    if len(targets) != len(graph.edges):
        raise DimensionMismatchError(
            f"{len(targets)} targets for {len(graph.edges)} edges"
        )
    values = {}
    for e, t in zip(graph.edges, targets):
        a, s = e.letters[0]
        values[a] = s * ratlin.as_fraction(t)
    return TestConnection(tuple(values.items()))


def incidence_number(face: Face, e: EdgeWord) -> Fraction:
    """Total signed incidence of an edge word with a face."""
    inc = face.incidence_map
    return sum((s * inc.get(a, Fraction(0)) for a, s in e.letters), Fraction(0))


def flux_operator(face: Face, graph: Graph) -> MomentumOperator:
    """The flux of a face as an operator acting on a graph's holonomies."""
    return MomentumOperator(
        id=face.id,
        action=tuple((dof_id(e), incidence_number(face, e)) for e in graph.edges),
    )


def flux_operator_on(face: Face, words: Iterable[EdgeWord]) -> MomentumOperator:
    """Flux operator materialized on an arbitrary collection of words."""
    action = {dof_id(w): incidence_number(face, w) for w in words}
    return MomentumOperator(id=face.id, action=tuple(action.items()))


def word_values(words: Iterable[EdgeWord]) -> dict[DofId, dict[str, Fraction]]:
    """Evaluation data: each word's holonomy on the per-atom probe basis."""
    return {
        dof_id(w): {a: Fraction(s) for a, s in w.letters} for w in words
    }


# --- graph order -------------------------------------------------------------


@dataclass(frozen=True)
class GraphDecomposition:
    """Factorization of each coarse edge through fine edges, or a refusal."""

    accepted: bool
    factors: Mapping[EdgeWord, tuple[tuple[EdgeWord, Sign], ...]] = field(
        default_factory=dict
    )
    failed_edge: EdgeWord | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def decompose_edges(fine: Graph, coarse: Graph) -> GraphDecomposition:
    """Factor every coarse edge as a concatenation of fine edges and inverses.

    Fine edges are atom-disjoint, so the factorization is forced: at each
    position the owning fine edge must match forward or reversed in full.
    """
    owner: dict[str, EdgeWord] = {}
    for e in fine.edges:
        for a in e.atoms:
            owner[a] = e
    factors: dict[EdgeWord, tuple[tuple[EdgeWord, Sign], ...]] = {}
    for e in coarse.edges:
        parts: list[tuple[EdgeWord, Sign]] = []
        k = 0
        letters = e.letters
        while k < len(letters):
            a, s = letters[k]
            f = owner.get(a)
            if f is None:
                return GraphDecomposition(
                    False, failed_edge=e, reason=f"atom {a!r} not covered"
                )
            m = len(f.letters)
            if letters[k : k + m] == f.letters:
                parts.append((f, 1))
            elif letters[k : k + m] == f.inverse().letters:
                parts.append((f, -1))
            else:
                return GraphDecomposition(
                    False,
                    failed_edge=e,
                    reason=f"word does not factor through {dof_id(f)!r} at {a!r}",
                )
            k += m
        factors[e] = tuple(parts)
    return GraphDecomposition(True, factors=factors)


def graph_refines(fine: Graph, coarse: Graph) -> bool:
    return decompose_edges(fine, coarse).accepted


def combos_from_decomposition(
    dec: GraphDecomposition,
) -> dict[DofId, dict[DofId, Fraction]]:
    """Linear-combination coefficients implied by an edge factorization."""
    if not dec.accepted:
        raise PqkError("cannot derive combinations from a refusal")
    combos: dict[DofId, dict[DofId, Fraction]] = {}
    for e, parts in dec.factors.items():
        row: dict[DofId, Fraction] = {}
        for f, s in parts:
            key = dof_id(f)
            row[key] = row.get(key, Fraction(0)) + s
        combos[dof_id(e)] = {k: v for k, v in row.items() if v != 0}
    return combos


def graph_join(a: Graph, b: Graph) -> Graph:
    """Common refinement: the coarsest graph refining both inputs.

    Words are cut wherever two consecutive atoms fail to appear together,
    adjacent and consistently oriented, in every word containing either;
    the surviving maximal runs are the result's edges, canonically oriented
    and deduplicated.  The union of atomic supports is preserved.
    """
    words: list[EdgeWord] = []
    seen: set[EdgeWord] = set()
    for e in (*a.edges, *b.edges):
        c = canonical(e)
        if c not in seen:
            seen.add(c)
            words.append(c)
    membership: dict[str, set[int]] = {}
    for t, w in enumerate(words):
        for atom in w.atoms:
            membership.setdefault(atom, set()).add(t)

    def consistent(p: tuple[str, Sign], q: tuple[str, Sign]) -> bool:
        for t in membership[p[0]] | membership[q[0]]:
            letters = words[t].letters
            pos = {atom: i for i, (atom, _) in enumerate(letters)}
            if p[0] not in pos or q[0] not in pos:
                return False
            ip, iq = pos[p[0]], pos[q[0]]
            if ip + 1 == iq:
                if letters[ip] != p or letters[iq] != q:
                    return False
            elif iq + 1 == ip:
                if letters[iq] != (q[0], -q[1]) or letters[ip] != (p[0], -p[1]):
                    return False
            else:
                return False
        return True

    segments: list[EdgeWord] = []
    seg_seen: set[EdgeWord] = set()
    for w in words:
        run: list[tuple[str, Sign]] = [w.letters[0]]
        for k in range(1, len(w.letters)):
            if consistent(w.letters[k - 1], w.letters[k]):
                run.append(w.letters[k])
            else:
                seg = canonical(EdgeWord(tuple(run)))
                if seg not in seg_seen:
                    seg_seen.add(seg)
                    segments.append(seg)
                run = [w.letters[k]]
        seg = canonical(EdgeWord(tuple(run)))
        if seg not in seg_seen:
            seg_seen.add(seg)
            segments.append(seg)
    segments.sort(key=_word_key)
    return Graph(tuple(segments))


def dual_flux_basis(graph: Graph, prefix: str = "dual") -> tuple[Face, ...]:
    """Fresh faces pairing diagonally with the graph's edges.

    Each face touches one private atom of its edge with the letter's own
    sign, so the pairing matrix of the resulting label is the identity.
    """
    if not graph.edges:
        raise DimensionMismatchError("dual basis of an empty graph")
    faces = []
    for j, e in enumerate(graph.edges):
        a, s = e.letters[0]
        faces.append(Face(id=f"{prefix}{j}", incidence=((a, Fraction(s)),)))
    return tuple(faces)


# --- labels and the directed-set join ----------------------------------------


@dataclass(frozen=True)
class DpgLabel:
    """A graph together with the faces forming its flux-operator basis."""

    id: str
    graph: Graph
    faces: tuple[Face, ...]

    def __post_init__(self):
        if len(self.faces) != len(self.graph.edges):
            raise DimensionMismatchError(
                f"label {self.id!r}: {len(self.faces)} faces for "
                f"{len(self.graph.edges)} edges"
            )


def materialize(label: DpgLabel, words: Iterable[EdgeWord]) -> SystemLabel:
    """The generic system view of a label, with actions on the given words."""
    words = list(words)
    return SystemLabel(
        ops=tuple(flux_operator_on(f, words) for f in label.faces),
        frame=label.graph.frame(),
    )


def _face_vector(face: Face, atoms: Sequence[str]) -> tuple[Fraction, ...]:
    inc = face.incidence_map
    return tuple(inc.get(a, Fraction(0)) for a in atoms)


def _combine_faces(
    coeffs: Sequence[Fraction], faces: Sequence[Face], new_id: str
) -> Face:
    incidence: dict[str, Fraction] = {}
    for c, f in zip(coeffs, faces):
        for a, v in f.incidence:
            incidence[a] = incidence.get(a, Fraction(0)) + c * v
    return Face(id=new_id, incidence=tuple(incidence.items()))


@dataclass(frozen=True)
class JoinResult:
    label: DpgLabel
    witness_a: OrderWitness
    witness_b: OrderWitness
    span_dim: int


def system_join(a: DpgLabel, b: DpgLabel, name: str) -> JoinResult:
    """A common upper bound of two labels, with witnesses to both.

    The operator spans are merged into a basis, the graphs are jointly
    refined (and further split until the merged operators act independently
    on the edge holonomies), and the basis is completed and row-reduced so
    the emitted pairing matrix is exactly [[I, G'], [0, I]] with unit
    determinant.
    """
    all_faces = (*a.faces, *b.faces)
    support = sorted({atom for f in all_faces for atom, _ in f.incidence})
    vectors = tuple(_face_vector(f, support) for f in all_faces)
    basis_idx: list[int] = []
    for i in range(len(all_faces)):
        candidate = tuple(vectors[j] for j in (*basis_idx, i))
        if ratlin.rank(candidate) > len(basis_idx):
            basis_idx.append(i)
    basis_faces = tuple(all_faces[i] for i in basis_idx)
    m = len(basis_faces)
    basis_mat = ratlin.transpose(tuple(vectors[i] for i in basis_idx))
    coords: dict[int, tuple[Fraction, ...]] = {}
    for i, f in enumerate(all_faces):
        solved, pivots = ratlin.rref(
            ratlin.hstack(basis_mat, ratlin.transpose((vectors[i],)))
        )
        coeff = [Fraction(0)] * m
        for r, p in enumerate(pivots):
            coeff[p] = solved[r][m]
        coords[i] = tuple(coeff)

    joined = graph_join(a.graph, b.graph)
    act = tuple(
        tuple(incidence_number(f, e) for e in joined.edges) for f in basis_faces
    )
    if ratlin.rank(act) < m:
        atom_dof = {f"hol:{atom}": atom for atom in support}
        pool = sorted(atom_dof)
        probes_ops = tuple(
            MomentumOperator(
                id=f.id,
                action=tuple(
                    (d, f.incidence_map.get(atom_dof[d], Fraction(0))) for d in pool
                ),
            )
            for f in basis_faces
        )
        chosen = select_independent_dofs(probes_ops, pool)
        extra = Graph(tuple(EdgeWord(((atom_dof[d], 1),)) for d in chosen))
        joined = graph_join(joined, extra)
        act = tuple(
            tuple(incidence_number(f, e) for e in joined.edges) for f in basis_faces
        )

    n = len(joined.edges)
    rows = [list(r) for r in act]
    t_rows = [list(r) for r in ratlin.identity(m)]
    cols = list(range(n))
    for r in range(m):
        best = None
        for p in range(r, n):
            for i in range(r, m):
                v = abs(rows[i][cols[p]])
                if v == 0:
                    continue
                key = (-v, cols[p], i)
                if best is None or key < best[0]:
                    best = (key, i, p)
        _, pivot_row, pivot_pos = best
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        t_rows[r], t_rows[pivot_row] = t_rows[pivot_row], t_rows[r]
        cols[r], cols[pivot_pos] = cols[pivot_pos], cols[r]
        pv = rows[r][cols[r]]
        rows[r] = [x / pv for x in rows[r]]
        t_rows[r] = [x / pv for x in t_rows[r]]
        for i in range(m):
            if i != r and rows[i][cols[r]] != 0:
                fct = rows[i][cols[r]]
                rows[i] = [x - fct * y for x, y in zip(rows[i], rows[r])]
                t_rows[i] = [x - fct * y for x, y in zip(t_rows[i], t_rows[r])]
    t = tuple(tuple(row) for row in t_rows)

    new_edges = tuple(joined.edges[c] for c in cols)
    new_graph = Graph(new_edges)
    lead_faces = tuple(
        _combine_faces(t[j], basis_faces, f"{name}.f{j}") for j in range(m)
    )
    tail_source = Graph(new_edges[m:]) if n > m else None
    tail_faces = (
        tuple(
            Face(id=f"{name}.f{m + j}", incidence=f.incidence)
            for j, f in enumerate(dual_flux_basis(tail_source))
        )
        if tail_source
        else ()
    )
    label = DpgLabel(id=name, graph=new_graph, faces=lead_faces + tail_faces)

    t_inv = ratlin.inv(t)

    def witness_for(part: DpgLabel, offset: int) -> OrderWitness:
        dec = decompose_edges(new_graph, part.graph)
        if not dec.accepted:
            raise PqkError(
                f"join lost refinement of {part.id!r}: {dec.reason}"
            )
        membership = {}
        for j, f in enumerate(part.faces):
            c = coords[offset + j]
            over_lead = ratlin.matvec(ratlin.transpose(t_inv), c)
            membership[f.id] = {
                lead_faces[k].id: v for k, v in enumerate(over_lead) if v != 0
            }
        return OrderWitness(
            combos=combos_from_decomposition(dec),
            op_membership=membership,
            dof_values=word_values((*part.graph.edges, *new_graph.edges)),
        )

    return JoinResult(
        label=label,
        witness_a=witness_for(a, 0),
        witness_b=witness_for(b, len(a.faces)),
        span_dim=m,
    )


# --- seeded random systems ----------------------------------------------------


@dataclass(frozen=True)
class RandomSystem:
    """A generated family: labels, witnessed order, and audit probes."""

    atoms: Mapping[str, AtomicEdge]
    dlabels: Mapping[str, DpgLabel]
    labels: Mapping[str, SystemLabel]
    order: tuple[OrderEdge, ...]
    probes: Probes
    universe_words: tuple[EdgeWord, ...]

    def find_witness(self, upper: str, lower: str) -> OrderWitness:
        for e in self.order:
            if e.upper == upper and e.lower == lower:
                return e.witness
        raise KeyError(f"no witnessed relation {upper} >= {lower}")

    def chains(self) -> tuple[tuple[str, str, str], ...]:
        """All witnessed triples top >= mid >= bottom."""
        pairs = {(e.upper, e.lower) for e in self.order}
        out = []
        for top, mid in sorted(pairs):
            for mid2, bot in sorted(pairs):
                if mid == mid2 and (top, bot) in pairs and top != mid != bot:
                    out.append((top, mid, bot))
        return tuple(out)


def _random_graph(rng: random.Random, n_edges: int, atom_ids: Sequence[str]) -> Graph:
    edges = []
    start = 0
    for _ in range(n_edges):
        length = rng.choice((1, 1, 2, 3))
        atoms = atom_ids[start : start + length]
        start += length + rng.choice((0, 1))
        letters = tuple((a, 1) for a in atoms)
        w = EdgeWord(letters)
        if rng.random() < 0.5:
            w = w.inverse()
        edges.append(w)
    return Graph(tuple(edges))


def _unimodular(rng: random.Random, n: int) -> ratlin.Mat:
    lower = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    upper = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            lower[i][j] = Fraction(rng.randint(-2, 2))
            upper[j][i] = Fraction(rng.randint(-2, 2))
    return ratlin.matmul(tuple(map(tuple, lower)), tuple(map(tuple, upper)))


def _random_label(
    rng: random.Random, name: str, graph: Graph, plain_dual: bool
) -> DpgLabel:
    duals = dual_flux_basis(graph, prefix=f"{name}.f")
    if plain_dual:
        return DpgLabel(id=name, graph=graph, faces=duals)
    n = len(graph.edges)
    if rng.random() < 0.5:
        u = _unimodular(rng, n)
        faces = tuple(
            _combine_faces(u[j], duals, f"{name}.f{j}") for j in range(n)
        )
        return DpgLabel(id=name, graph=graph, faces=faces)
    graph_atoms = sorted(graph.atoms)
    for _ in range(10):
        faces = []
        for j in range(n):
            incidence = {}
            for atom in graph_atoms:
                if rng.random() < 0.6:
                    incidence[atom] = rng.choice(
                        (Fraction(-1), Fraction(-1, 2), Fraction(1, 2), Fraction(1))
                    )
            faces.append(Face(id=f"{name}.f{j}", incidence=tuple(incidence.items())))
        candidate = tuple(
            tuple(incidence_number(f, e) for e in graph.edges) for f in faces
        )
        if ratlin.det(candidate) != 0:
            return DpgLabel(id=name, graph=graph, faces=tuple(faces))
    return DpgLabel(id=name, graph=graph, faces=duals)


def random_system(n_edges: int, depth: int, seed: int) -> RandomSystem:
    """Deterministic family of labels built by repeated joins.

    Emits ``depth`` base labels on random graphs, every pairwise join, and
    for depth >= 3 a chain of iterated joins, together with all witnessed
    order relations (direct and composed), an orientation-flipped twin of
    the first base label, and the probe data the assumption audit consumes.
    """
    if n_edges < 1 or depth < 1:
        raise ValueError("n_edges and depth must be at least 1")
    rng = random.Random(seed)
    pool = 4 * n_edges + 2
    atoms = {
        f"a{i:02d}": AtomicEdge(f"a{i:02d}", f"v{i:02d}", f"v{i + 1:02d}")
        for i in range(pool)
    }
    atom_ids = sorted(atoms)

    dlabels: dict[str, DpgLabel] = {}
    direct: list[tuple[str, str, OrderWitness]] = []

    for i in range(depth):
        graph = _random_graph(rng, n_edges, atom_ids)
        dlabels[f"b{i}"] = _random_label(rng, f"b{i}", graph, plain_dual=(i == 0))

    base_ids = [f"b{i}" for i in range(depth)]

    if depth >= 2:
        b0 = dlabels["b0"]
        flipped = Graph((b0.graph.edges[0].inverse(), *b0.graph.edges[1:]))
        twin = DpgLabel(id="b0t", graph=flipped, faces=b0.faces)
        dlabels["b0t"] = twin
        values = word_values((*b0.graph.edges, *flipped.edges))
        fwd = OrderWitness(
            combos={
                dof_id(e): {dof_id(f): Fraction(-1 if k == 0 else 1)}
                for k, (e, f) in enumerate(zip(b0.graph.edges, flipped.edges))
            },
            op_membership={f.id: {f.id: Fraction(1)} for f in b0.faces},
            dof_values=values,
        )
        back = OrderWitness(
            combos={
                dof_id(f): {dof_id(e): Fraction(-1 if k == 0 else 1)}
                for k, (e, f) in enumerate(zip(b0.graph.edges, flipped.edges))
            },
            op_membership={f.id: {f.id: Fraction(1)} for f in b0.faces},
            dof_values=values,
        )
        direct.append(("b0t", "b0", fwd))
        direct.append(("b0", "b0t", back))

    for i in range(depth):
        for j in range(i + 1, depth):
            res = system_join(
                dlabels[f"b{i}"], dlabels[f"b{j}"], f"j(b{i}+b{j})"
            )
            dlabels[res.label.id] = res.label
            direct.append((res.label.id, f"b{i}", res.witness_a))
            direct.append((res.label.id, f"b{j}", res.witness_b))

    if depth >= 3:
        current = "j(b0+b1)"
        for k in range(2, depth):
            res = system_join(
                dlabels[current], dlabels[f"b{k}"], f"c{k}"
            )
            dlabels[res.label.id] = res.label
            direct.append((res.label.id, current, res.witness_a))
            direct.append((res.label.id, f"b{k}", res.witness_b))
            current = res.label.id

    universe_words: list[EdgeWord] = []
    seen_words: set[EdgeWord] = set()
    for name in dlabels:
        for e in dlabels[name].graph.edges:
            if e not in seen_words:
                seen_words.add(e)
                universe_words.append(e)

    labels = {
        name: materialize(d, universe_words) for name, d in sorted(dlabels.items())
    }

    # Transitive closure with composed witnesses, shortest paths first.
    witnesses: dict[tuple[str, str], OrderWitness] = {
        (u, l): w for u, l, w in direct
    }
    changed = True
    while changed:
        changed = False
        for (u1, l1), w1 in sorted(witnesses.items()):
            for (u2, l2), w2 in sorted(witnesses.items()):
                if l1 == u2 and (u1, l2) not in witnesses and u1 != l2:
                    witnesses[(u1, l2)] = compose_witnesses(w1, w2)
                    changed = True
    order = tuple(
        OrderEdge(u, l, w) for (u, l), w in sorted(witnesses.items())
    )

    surjectivity = {}
    for name, d in sorted(dlabels.items()):
        rows = []
        for t in range(len(d.graph.edges)):
            targets = [Fraction(1 if i == t else 0) for i in range(len(d.graph.edges))]
            conn = witness_connection(d.graph, targets)
            rows.append(
                {dof: holonomy(e, conn) for dof, e in zip(d.graph.dofs, d.graph.edges)}
            )
        surjectivity[name] = tuple(rows)

    span_instances = []
    for name in base_ids:
        d = dlabels[name]
        inverses = tuple(e.inverse() for e in d.graph.edges)
        span_instances.append(
            SpanProbe(
                label=name,
                combos={
                    dof_id(inv): {dof_id(e): Fraction(-1)}
                    for inv, e in zip(inverses, d.graph.edges)
                },
                dof_values=word_values((*d.graph.edges, *inverses)),
            )
        )

    op_instances = []
    if depth >= 2:
        target = "j(b0+b1)"
        w = witnesses[(target, "b0")]
        probe_op = labels["b0"].ops[0]
        op_instances.append(
            OpProbe(
                label=target,
                ops=(probe_op,),
                membership={probe_op.id: dict(w.op_membership[probe_op.id])},
            )
        )

    probes = Probes(
        span_instances=tuple(span_instances),
        op_instances=tuple(op_instances),
        surjectivity=surjectivity,
        equal_space_pairs=(("b0", "b0t"),) if depth >= 2 else (),
        directed_pairs=tuple(
            (base_ids[i], base_ids[j])
            for i in range(depth)
            for j in range(i + 1, depth)
        ),
        dof_values=word_values(universe_words),
    )

    return RandomSystem(
        atoms=atoms,
        dlabels=dict(sorted(dlabels.items())),
        labels=labels,
        order=order,
        probes=probes,
        universe_words=tuple(universe_words),
    )
