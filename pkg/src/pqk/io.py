"""JSON document formats for systems, states and almost-periodic vectors.

Rationals serialize as ints, exact halves, or "p/q" strings; complex
numbers as [re, im] pairs; matrices row-major.  Loading re-validates
structural invariants (referential integrity, word composability, graph
disjointness, kernel structure) and raises :class:`DocumentError` naming
the offending field.  Semantic conditions (nondegeneracy, witness
verification) are left to the assumption audit so that defective systems
load and then fail verification rather than failing to parse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .almost_periodic import APVector, Frequency, QC
from .dpg import (
    AtomicEdge,
    DpgLabel,
    EdgeWord,
    Face,
    Graph,
    RandomSystem,
    dof_id,
    materialize,
    validate_word,
    witness_connection,
    holonomy,
    word_values,
)
from .errors import DocumentError, PqkError
from .frames import ProjectionMatrix, ReducedFrame
from .gaussian import GaussianKernel, GaussianMixtureState, trace
from .systems import (
    OpProbe,
    OrderEdge,
    OrderWitness,
    Probes,
    SpanProbe,
    SystemLabel,
)
from . import ratlin


def rat_to_json(x: Fraction):
    if x.denominator == 1:
        return int(x)
    if x.denominator == 2:
        return float(x)
    return f"{x.numerator}/{x.denominator}"


def json_to_rat(x, where: str) -> Fraction:
    try:
        return ratlin.as_fraction(x)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: not a rational value ({x!r})") from exc


def _expect(doc, key: str, kind, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise DocumentError(f"{where}.{key}: missing")
    value = doc[key]
    if not isinstance(value, kind):
        raise DocumentError(f"{where}.{key}: expected {kind.__name__}")
    return value


@dataclass(frozen=True)
class LoadedSystem:
    """A system document in memory, with materialized generic labels."""

    atoms: Mapping[str, AtomicEdge]
    words: Mapping[str, EdgeWord]
    faces: Mapping[str, Face]
    dlabels: Mapping[str, DpgLabel]
    labels: Mapping[str, SystemLabel]
    order: tuple[OrderEdge, ...]

    def find_witness(self, upper: str, lower: str) -> OrderWitness:
        for e in self.order:
            if e.upper == upper and e.lower == lower:
                return e.witness
        raise PqkError(f"no witnessed relation {upper} >= {lower}")

    def has_relation(self, upper: str, lower: str) -> bool:
        return any(e.upper == upper and e.lower == lower for e in self.order)


def system_to_document(system: RandomSystem | LoadedSystem) -> dict:
    """Serialize a family; edge ids are preserved or assigned in word order."""
    if isinstance(system, LoadedSystem):
        words_by_id = dict(system.words)
    else:
        words_by_id = {f"e{i}": w for i, w in enumerate(system.universe_words)}
    id_by_dof = {dof_id(w): eid for eid, w in words_by_id.items()}
    faces: dict[str, Face] = {}
    for d in system.dlabels.values():
        for f in d.faces:
            faces.setdefault(f.id, f)
    doc = {
        "atomic_edges": [
            {"id": a.id, "source": a.source, "target": a.target, "loop": a.loop}
            for a in sorted(system.atoms.values(), key=lambda a: a.id)
        ],
        "edges": [
            {
                "id": eid,
                "letters": [{"atom": a, "sign": s} for a, s in w.letters],
            }
            for eid, w in sorted(words_by_id.items())
        ],
        "faces": [
            {
                "id": f.id,
                "incidence": [
                    {"atom": a, "value": rat_to_json(v)} for a, v in f.incidence
                ],
            }
            for f in sorted(faces.values(), key=lambda f: f.id)
        ],
        "labels": [
            {
                "id": d.id,
                "graph": [id_by_dof[dof_id(e)] for e in d.graph.edges],
                "flux_basis": [f.id for f in d.faces],
            }
            for d in sorted(system.dlabels.values(), key=lambda d: d.id)
        ],
        "order": [
            {
                "upper": e.upper,
                "lower": e.lower,
                "combo_witness": {
                    id_by_dof[dof]: {
                        id_by_dof[src]: rat_to_json(c) for src, c in sorted(row.items())
                    }
                    for dof, row in sorted(e.witness.combos.items())
                },
                "op_witness": {
                    op: {src: rat_to_json(c) for src, c in sorted(row.items())}
                    for op, row in sorted(e.witness.op_membership.items())
                },
            }
            for e in system.order
        ],
    }
    return doc


def document_to_system(doc: dict) -> LoadedSystem:
    atoms: dict[str, AtomicEdge] = {}
    for i, entry in enumerate(_expect(doc, "atomic_edges", list, "document")):
        where = f"atomic_edges[{i}]"
        aid = _expect(entry, "id", str, where)
        if aid in atoms:
            raise DocumentError(f"{where}.id: duplicate atom {aid!r}")
        try:
            atoms[aid] = AtomicEdge(
                aid,
                _expect(entry, "source", str, where),
                _expect(entry, "target", str, where),
                bool(entry.get("loop", False)),
            )
        except ValueError as exc:
            raise DocumentError(f"{where}: {exc}") from exc

    words: dict[str, EdgeWord] = {}
    for i, entry in enumerate(_expect(doc, "edges", list, "document")):
        where = f"edges[{i}]"
        eid = _expect(entry, "id", str, where)
        if eid in words:
            raise DocumentError(f"{where}.id: duplicate edge {eid!r}")
        letters = []
        for j, letter in enumerate(_expect(entry, "letters", list, where)):
            lw = f"{where}.letters[{j}]"
            atom = _expect(letter, "atom", str, lw)
            sign = _expect(letter, "sign", int, lw)
            if sign not in (-1, 1):
                raise DocumentError(f"{lw}.sign: must be 1 or -1")
            letters.append((atom, sign))
        try:
            w = EdgeWord(tuple(letters))
            validate_word(w, atoms)
        except (ValueError, PqkError) as exc:
            raise DocumentError(f"{where}: {exc}") from exc
        words[eid] = w

    faces: dict[str, Face] = {}
    for i, entry in enumerate(_expect(doc, "faces", list, "document")):
        where = f"faces[{i}]"
        fid = _expect(entry, "id", str, where)
        if fid in faces:
            raise DocumentError(f"{where}.id: duplicate face {fid!r}")
        incidence = []
        for j, item in enumerate(_expect(entry, "incidence", list, where)):
            iw = f"{where}.incidence[{j}]"
            atom = _expect(item, "atom", str, iw)
            if atom not in atoms:
                raise DocumentError(f"{iw}.atom: unknown atom {atom!r}")
            incidence.append((atom, json_to_rat(item.get("value"), f"{iw}.value")))
        faces[fid] = Face(fid, tuple(incidence))

    dlabels: dict[str, DpgLabel] = {}
    for i, entry in enumerate(_expect(doc, "labels", list, "document")):
        where = f"labels[{i}]"
        lid = _expect(entry, "id", str, where)
        if lid in dlabels:
            raise DocumentError(f"{where}.id: duplicate label {lid!r}")
        edge_ids = _expect(entry, "graph", list, where)
        face_ids = _expect(entry, "flux_basis", list, where)
        for eid in edge_ids:
            if eid not in words:
                raise DocumentError(f"{where}.graph: unknown edge id {eid!r}")
        for fid in face_ids:
            if fid not in faces:
                raise DocumentError(f"{where}.flux_basis: unknown face id {fid!r}")
        try:
            dlabels[lid] = DpgLabel(
                id=lid,
                graph=Graph(tuple(words[eid] for eid in edge_ids)),
                faces=tuple(faces[fid] for fid in face_ids),
            )
        except (ValueError, PqkError) as exc:
            raise DocumentError(f"{where}: {exc}") from exc

    universe = list(words.values())
    labels = {lid: materialize(d, universe) for lid, d in dlabels.items()}
    values = word_values(universe)

    order: list[OrderEdge] = []
    for i, entry in enumerate(_expect(doc, "order", list, "document")):
        where = f"order[{i}]"
        upper = _expect(entry, "upper", str, where)
        lower = _expect(entry, "lower", str, where)
        for side, lid in (("upper", upper), ("lower", lower)):
            if lid not in dlabels:
                raise DocumentError(f"{where}.{side}: unknown label {lid!r}")
        combos = {}
        for eid, row in _expect(entry, "combo_witness", dict, where).items():
            if eid not in words:
                raise DocumentError(
                    f"{where}.combo_witness: unknown edge id {eid!r}"
                )
            parsed = {}
            for src, c in row.items():
                if src not in words:
                    raise DocumentError(
                        f"{where}.combo_witness.{eid}: unknown edge id {src!r}"
                    )
                parsed[dof_id(words[src])] = json_to_rat(
                    c, f"{where}.combo_witness.{eid}"
                )
            combos[dof_id(words[eid])] = parsed
        membership = {}
        for op, row in _expect(entry, "op_witness", dict, where).items():
            membership[op] = {
                src: json_to_rat(c, f"{where}.op_witness.{op}")
                for src, c in row.items()
            }
        order.append(
            OrderEdge(upper, lower, OrderWitness(combos, membership, values))
        )

    return LoadedSystem(
        atoms=atoms,
        words=words,
        faces=faces,
        dlabels=dlabels,
        labels=labels,
        order=tuple(order),
    )


def default_probes(system: LoadedSystem) -> Probes:
    """Audit probes derivable from a document alone.

    Surjectivity witnesses come from explicit target-hitting connections,
    span instances from edge inverses, operator instances from the declared
    order witnesses; directedness is probed on every label pair.
    """
    surjectivity = {}
    for name, d in sorted(system.dlabels.items()):
        rows = []
        n = len(d.graph.edges)
        for t in range(n):
            conn = witness_connection(
                d.graph, [Fraction(1 if i == t else 0) for i in range(n)]
            )
            rows.append(
                {dof: holonomy(e, conn) for dof, e in zip(d.graph.dofs, d.graph.edges)}
            )
        surjectivity[name] = tuple(rows)

    span_instances = []
    for name, d in sorted(system.dlabels.items()):
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
    for edge in system.order:
        lower_ops = system.labels[edge.lower].ops
        if all(op.id in edge.witness.op_membership for op in lower_ops):
            op_instances.append(
                OpProbe(
                    label=edge.upper,
                    ops=lower_ops,
                    membership={
                        op.id: dict(edge.witness.op_membership[op.id])
                        for op in lower_ops
                    },
                )
            )

    names = sorted(system.labels)
    ops_key = {
        name: frozenset(
            (op.id, op.action) for op in system.labels[name].ops
        )
        for name in names
    }
    equal_pairs = tuple(
        (a, b)
        for i, a in enumerate(names)
        for b in names[i + 1 :]
        if ops_key[a] == ops_key[b]
    )

    # A finite presented family always has maximal labels whose pairwise
    # joins lie outside it, so directedness is probed on the non-maximal
    # labels only; explicit Probes cover anything stricter.
    non_maximal = sorted({e.lower for e in system.order})

    return Probes(
        span_instances=tuple(span_instances),
        op_instances=tuple(op_instances),
        surjectivity=surjectivity,
        equal_space_pairs=equal_pairs,
        directed_pairs=tuple(
            (a, b)
            for i, a in enumerate(non_maximal)
            for b in non_maximal[i + 1 :]
        ),
        dof_values=word_values(system.words.values()),
    )


# --- states -------------------------------------------------------------------


def _complex_to_json(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _json_to_complex(x, where: str) -> complex:
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(v, (int, float)) for v in x)
    ):
        raise DocumentError(f"{where}: expected [re, im]")
    return complex(x[0], x[1])


def state_to_document(state: GaussianMixtureState, label: str) -> dict:
    return {
        "label": label,
        "terms": [
            {
                "weight": float(w),
                "P": [[_complex_to_json(z) for z in row] for row in k.P],
                "R": [[_complex_to_json(z) for z in row] for row in k.R],
                "s": [_complex_to_json(z) for z in k.s],
                "logw": float(k.logw),
            }
            for w, k in state.terms
        ],
    }


def document_to_state(doc: dict, dim: int) -> tuple[str, GaussianMixtureState]:
    label = _expect(doc, "label", str, "state")
    terms = []
    for i, entry in enumerate(_expect(doc, "terms", list, "state")):
        where = f"state.terms[{i}]"
        weight = _expect(entry, "weight", (int, float), where)
        if weight <= 0:
            raise DocumentError(f"{where}.weight: must be positive")

        def matrix(key: str) -> np.ndarray:
            rows = _expect(entry, key, list, where)
            return np.array(
                [
                    [_json_to_complex(z, f"{where}.{key}") for z in row]
                    for row in rows
                ],
                dtype=np.complex128,
            )

        s = np.array(
            [_json_to_complex(z, f"{where}.s") for z in _expect(entry, "s", list, where)]
        )
        logw = _expect(entry, "logw", (int, float), where)
        try:
            kernel = GaussianKernel(dim=dim, P=matrix("P"), R=matrix("R"), s=s, logw=logw)
        except (ValueError, PqkError) as exc:
            raise DocumentError(f"{where}: {exc}") from exc
        terms.append((float(weight), kernel))
    try:
        state = GaussianMixtureState(dim, tuple(terms), provenance="mixed")
        total = trace(state)
    except (ValueError, PqkError) as exc:
        raise DocumentError(f"state.terms: {exc}") from exc
    if abs(total - 1.0) > 1e-10:
        raise DocumentError(f"state.terms: trace is {total!r}, expected 1")
    return label, state


# --- almost-periodic vectors --------------------------------------------------


def ap_to_document(v: APVector) -> dict:
    return {
        "frame": list(v.frame.dofs),
        "terms": [
            {
                "freq": [rat_to_json(c) for c in f.coords],
                "re": rat_to_json(a.re),
                "im": rat_to_json(a.im),
            }
            for f, a in v.amplitudes
        ],
    }


def document_to_ap(doc: dict) -> APVector:
    frame = ReducedFrame(tuple(_expect(doc, "frame", list, "ap")))
    terms = []
    for i, entry in enumerate(_expect(doc, "terms", list, "ap")):
        where = f"ap.terms[{i}]"
        coords = tuple(
            json_to_rat(c, f"{where}.freq") for c in _expect(entry, "freq", list, where)
        )
        if len(coords) != frame.dim:
            raise DocumentError(f"{where}.freq: expected {frame.dim} coordinates")
        amp = QC(
            json_to_rat(entry.get("re", 0), f"{where}.re"),
            json_to_rat(entry.get("im", 0), f"{where}.im"),
        )
        terms.append((Frequency(coords, frame), amp))
    return APVector(frame, tuple(terms))


def projection_to_document(p: ProjectionMatrix) -> dict:
    return {
        "target_frame": list(p.target_frame.dofs),
        "source_frame": list(p.source_frame.dofs),
        "entries": [[rat_to_json(x) for x in row] for row in p.entries],
    }


def document_to_projection(doc: dict) -> ProjectionMatrix:
    target = ReducedFrame(tuple(_expect(doc, "target_frame", list, "projection")))
    source = ReducedFrame(tuple(_expect(doc, "source_frame", list, "projection")))
    entries = [
        [json_to_rat(x, f"projection.entries[{i}]") for x in row]
        for i, row in enumerate(_expect(doc, "entries", list, "projection"))
    ]
    try:
        return ProjectionMatrix(entries, source_frame=source, target_frame=target)
    except (ValueError, PqkError) as exc:
        raise DocumentError(f"projection: {exc}") from exc


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
