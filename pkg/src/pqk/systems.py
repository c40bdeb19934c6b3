"""System labels, the operator/frame pairing, order witnesses and audits.

A :class:`SystemLabel` pairs a basis of momentum operators with a reduced
frame of the same size; the pairing matrix of their constant actions must be
nondegenerate.  Witnessed refinement between labels yields the distinguished
embedding of the coarse configuration space into the fine one, the right
inverse of the projection selected by the momentum operators.

All verification here is exact: coefficients, actions and evaluation data
are converted to rationals (floats convert losslessly), so a witness either
verifies identically or is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from . import ratlin
from .errors import (
    DegeneratePairingError,
    MissingActionError,
    NotResolvableError,
    PqkError,
    WitnessInvalidError,
)
from .frames import DofId, ProjectionMatrix, ReducedFrame, build_projection
from .ratlin import Fraction, Mat

# Sparse evaluation data: dof -> {probe id -> value}. Absent probes are 0.
DofValues = Mapping[DofId, Mapping[str, Fraction]]


@dataclass(frozen=True)
class MomentumOperator:
    """A momentum d.o.f. acting by real constants on configurational d.o.f.

    ``action`` is sparse: d.o.f. the operator does not touch act as zero in
    exploratory contexts (pools, incidence scans), while frame evaluation
    (:func:`operator_point`, :func:`pairing_matrix`) requires explicit
    entries and raises :class:`MissingActionError` otherwise.
    """

    id: str
    action: tuple[tuple[DofId, Fraction], ...]

    def __post_init__(self):
        items = self.action.items() if isinstance(self.action, Mapping) else self.action
        pairs = tuple(sorted((str(d), ratlin.as_fraction(v)) for d, v in items))
        if len({d for d, _ in pairs}) != len(pairs):
            raise ValueError(f"operator {self.id!r} has duplicate action entries")
        object.__setattr__(self, "action", pairs)

    @cached_property
    def action_map(self) -> dict[DofId, Fraction]:
        return dict(self.action)

    def on(self, dof: DofId) -> Fraction:
        try:
            return self.action_map[dof]
        except KeyError:
            raise MissingActionError(
                f"operator {self.id!r} has no action on {dof!r}"
            ) from None

    def on_or_zero(self, dof: DofId) -> Fraction:
        return self.action_map.get(dof, Fraction(0))


def combine_operators(
    coeffs: Sequence, ops: Sequence[MomentumOperator], new_id: str
) -> MomentumOperator:
    """Formal real combination of operators, acting by the combined map."""
    if len(coeffs) != len(ops):
        raise ValueError("one coefficient per operator required")
    action: dict[DofId, Fraction] = {}
    for c, op in zip(coeffs, ops):
        c = ratlin.as_fraction(c)
        for dof, v in op.action:
            action[dof] = action.get(dof, Fraction(0)) + c * v
    return MomentumOperator(new_id, tuple(action.items()))


@dataclass(frozen=True)
class SystemLabel:
    """A finite reduced system: N momentum operators paired with N d.o.f."""

    ops: tuple[MomentumOperator, ...]
    frame: ReducedFrame

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if len(self.ops) != self.frame.dim:
            raise DegeneratePairingError(
                f"{len(self.ops)} operators for a {self.frame.dim}-d.o.f. frame"
            )

    @property
    def dim(self) -> int:
        return self.frame.dim


@dataclass(frozen=True)
class OrderWitness:
    """Certificates for one refinement: fine label >= coarse label.

    ``combos`` expresses each coarse d.o.f. over the fine frame's d.o.f.;
    ``op_membership`` expresses each coarse basis operator over the fine
    operator basis; ``dof_values`` evaluates every involved d.o.f. on a
    declared set of probe configurations (sparse, missing probes are 0),
    which is where equality of d.o.f. as functions is decided.
    """

    combos: Mapping[DofId, Mapping[DofId, Fraction]]
    op_membership: Mapping[str, Mapping[str, Fraction]]
    dof_values: DofValues = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self,
            "combos",
            {
                str(d): {str(s): ratlin.as_fraction(c) for s, c in row.items()}
                for d, row in dict(self.combos).items()
            },
        )
        object.__setattr__(
            self,
            "op_membership",
            {
                str(o): {str(s): ratlin.as_fraction(c) for s, c in row.items()}
                for o, row in dict(self.op_membership).items()
            },
        )
        object.__setattr__(
            self,
            "dof_values",
            {
                str(d): {str(p): ratlin.as_fraction(v) for p, v in row.items()}
                for d, row in dict(self.dof_values).items()
            },
        )


def identity_witness(label: SystemLabel, dof_values: DofValues | None = None) -> OrderWitness:
    return OrderWitness(
        combos={d: {d: Fraction(1)} for d in label.frame.dofs},
        op_membership={op.id: {op.id: Fraction(1)} for op in label.ops},
        dof_values=dof_values or {},
    )


def compose_witnesses(outer: OrderWitness, inner: OrderWitness) -> OrderWitness:
    """Witness for top >= bottom from top >= mid (outer) and mid >= bottom."""
    combos: dict[DofId, dict[DofId, Fraction]] = {}
    for dof, mid_row in inner.combos.items():
        row: dict[DofId, Fraction] = {}
        for mid_dof, c in mid_row.items():
            for top_dof, b in outer.combos.get(mid_dof, {}).items():
                row[top_dof] = row.get(top_dof, Fraction(0)) + c * b
        combos[dof] = {d: v for d, v in row.items() if v != 0}
    membership: dict[str, dict[str, Fraction]] = {}
    for op, mid_row in inner.op_membership.items():
        row = {}
        for mid_op, c in mid_row.items():
            for top_op, b in outer.op_membership.get(mid_op, {}).items():
                row[top_op] = row.get(top_op, Fraction(0)) + c * b
        membership[op] = {o: v for o, v in row.items() if v != 0}
    values = dict(outer.dof_values)
    values.update(inner.dof_values)
    return OrderWitness(combos, membership, values)


def pairing_matrix(label: SystemLabel) -> Mat:
    """The N x N matrix of operator actions on the frame d.o.f.

    Entry (j, i) is the action of operator j on frame d.o.f. i.  Raises
    :class:`DegeneratePairingError` when singular, which disqualifies the
    pair as a reduced system.
    """
    g = tuple(
        tuple(op.on(dof) for dof in label.frame.dofs) for op in label.ops
    )
    if ratlin.det(g) == 0:
        raise DegeneratePairingError(
            f"pairing matrix of ({', '.join(op.id for op in label.ops)}) "
            f"on {label.frame.dofs} is singular"
        )
    return g


def operator_point(op: MomentumOperator, frame: ReducedFrame) -> tuple[Fraction, ...]:
    """Coordinates of the constant-shift point an operator induces on a frame."""
    return tuple(op.on(dof) for dof in frame.dofs)


@dataclass(frozen=True)
class RefinementCheck:
    """Boolean verdict plus a human-readable diagnostic."""

    ok: bool
    diagnostic: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _sparse_combination(
    rows: Mapping[DofId, Mapping[str, Fraction]],
    coeffs: Mapping[DofId, Fraction],
) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for dof, c in coeffs.items():
        for probe, v in rows[dof].items():
            out[probe] = out.get(probe, Fraction(0)) + c * v
    return {p: v for p, v in out.items() if v != 0}


def refines(
    fine: SystemLabel, coarse: SystemLabel, witness: OrderWitness
) -> RefinementCheck:
    """Verify that ``fine >= coarse`` holds for the given witness.

    Three exact checks: (1) each coarse d.o.f. equals its witnessed
    combination of fine d.o.f. as a function on the probe configurations,
    (2) each coarse operator equals its witnessed combination of fine
    operators as an action map on the fine frame, (3) operator actions are
    linear over the d.o.f. combinations, i.e. acting on a coarse d.o.f.
    agrees with acting on its combination.  Check (3) is what makes the
    projection/embedding pair compose to the identity.
    """
    values = witness.dof_values
    for dof in coarse.frame.dofs:
        if dof not in witness.combos:
            return RefinementCheck(False, f"no combination witnessed for {dof!r}")
        row = witness.combos[dof]
        unknown = set(row) - set(fine.frame.dofs)
        if unknown:
            return RefinementCheck(
                False, f"combination for {dof!r} uses non-frame d.o.f. {unknown}"
            )
        needed = {dof, *row}
        missing = needed - set(values)
        if missing:
            return RefinementCheck(
                False, f"no evaluation data for d.o.f. {sorted(missing)}"
            )
        lhs = {p: v for p, v in values[dof].items() if v != 0}
        rhs = _sparse_combination(values, row)
        if lhs != rhs:
            return RefinementCheck(
                False, f"{dof!r} differs from its witnessed combination"
            )
    fine_ops = {op.id: op for op in fine.ops}
    for op in coarse.ops:
        if op.id not in witness.op_membership:
            return RefinementCheck(False, f"no membership witnessed for {op.id!r}")
        row = witness.op_membership[op.id]
        unknown = set(row) - set(fine_ops)
        if unknown:
            return RefinementCheck(
                False, f"membership for {op.id!r} uses unknown operators {unknown}"
            )
        try:
            for dof in fine.frame.dofs:
                lhs_v = op.on(dof)
                rhs_v = sum(
                    (c * fine_ops[o].on(dof) for o, c in row.items()), Fraction(0)
                )
                if lhs_v != rhs_v:
                    return RefinementCheck(
                        False,
                        f"operator {op.id!r} deviates from its witnessed "
                        f"combination on {dof!r}",
                    )
        except MissingActionError as exc:
            return RefinementCheck(False, str(exc))
    try:
        for op in coarse.ops:
            for dof in coarse.frame.dofs:
                direct = op.on(dof)
                via_combo = sum(
                    (c * op.on(d) for d, c in witness.combos[dof].items()),
                    Fraction(0),
                )
                if direct != via_combo:
                    return RefinementCheck(
                        False,
                        f"operator {op.id!r} is not linear over the witnessed "
                        f"combination of {dof!r}",
                    )
    except MissingActionError as exc:
        return RefinementCheck(False, str(exc))
    return RefinementCheck(True, "verified")


def projection_from_witness(
    fine: SystemLabel, coarse: SystemLabel, witness: OrderWitness
) -> ProjectionMatrix:
    """Build the coarse<-fine projection matrix out of the witness combos."""
    combos = {
        dof: [witness.combos[dof].get(s, Fraction(0)) for s in fine.frame.dofs]
        for dof in coarse.frame.dofs
    }
    return build_projection(coarse.frame, fine.frame, combos)


def embedding_matrix(
    fine: SystemLabel, coarse: SystemLabel, witness: OrderWitness
) -> Mat:
    """The distinguished right inverse of the witnessed projection.

    Columns span the image of the coarse momentum operators inside the fine
    configuration space, so the embedding selects exactly the directions
    those operators generate.  Computed as G'^T (G^T)^{-1} from the coarse
    pairing matrix G and the coarse operators' actions G' on the fine frame;
    B @ W = I holds exactly for every verified witness.
    """
    check = refines(fine, coarse, witness)
    if not check:
        raise WitnessInvalidError(check.diagnostic)
    g = pairing_matrix(coarse)
    g_fine = tuple(
        tuple(op.on(dof) for dof in fine.frame.dofs) for op in coarse.ops
    )
    w = ratlin.matmul(ratlin.transpose(g_fine), ratlin.inv(ratlin.transpose(g)))
    b = projection_from_witness(fine, coarse, witness).entries
    if ratlin.matmul(b, w) != ratlin.identity(coarse.dim):
        raise WitnessInvalidError(
            "witnessed projection and operator embedding do not compose to id"
        )
    return w


def select_independent_dofs(
    ops: Sequence[MomentumOperator], pool: Sequence[DofId]
) -> tuple[DofId, ...]:
    """Greedy subset of the pool on which the operators stay independent.

    Walks the pool in order, keeping a d.o.f. exactly when its action
    column strictly shrinks the joint null space of the accepted columns.
    Each accepted column cuts the dimension by one, so the result has
    exactly as many d.o.f. as operators.  Raises
    :class:`NotResolvableError` when the pool cannot separate them.
    """
    m = len(ops)
    if m == 0:
        return ()
    chosen: list[DofId] = []
    cols: list[tuple[Fraction, ...]] = []
    current_rank = 0
    for dof in pool:
        if current_rank == m:
            break
        col = tuple(op.on_or_zero(dof) for op in ops)
        r = ratlin.rank(ratlin.transpose(tuple(cols + [col])))
        if r > current_rank:
            chosen.append(dof)
            cols.append(col)
            current_rank = r
    if current_rank < m:
        raise NotResolvableError(
            f"pool separates only {current_rank} of {m} operators"
        )
    return tuple(chosen)


# --- assumption audit -------------------------------------------------------

ASSUMPTION_TITLES = {
    "A1a": "every probed d.o.f. set is spanned by some label's frame",
    "A1b": "every probed operator set is contained in some label's basis",
    "A2": "frame evaluations reach all of R^N (surjectivity)",
    "A3": "operator actions are constant and linear (structural)",
    "A4": "nondegenerate pairing matrix",
    "A5": "labels sharing operators and reduced space are ordered",
    "A6": "order witnesses verify (d.o.f. combinations and operator membership)",
    "directed": "probed label pairs have a witnessed upper bound",
}


@dataclass(frozen=True)
class OrderEdge:
    upper: str
    lower: str
    witness: OrderWitness


@dataclass(frozen=True)
class SpanProbe:
    """A finite d.o.f. set with a combination witness over one label's frame."""

    label: str
    combos: Mapping[DofId, Mapping[DofId, Fraction]]
    dof_values: DofValues


@dataclass(frozen=True)
class OpProbe:
    """A finite operator set with membership witnesses over one label's basis."""

    label: str
    ops: tuple[MomentumOperator, ...]
    membership: Mapping[str, Mapping[str, Fraction]]


@dataclass(frozen=True)
class Probes:
    """Instance data driving the per-assumption checks."""

    span_instances: tuple[SpanProbe, ...] = ()
    op_instances: tuple[OpProbe, ...] = ()
    surjectivity: Mapping[str, tuple[Mapping[DofId, Fraction], ...]] = field(
        default_factory=dict
    )
    equal_space_pairs: tuple[tuple[str, str], ...] = ()
    directed_pairs: tuple[tuple[str, str], ...] = ()
    dof_values: DofValues = field(default_factory=dict)


@dataclass(frozen=True)
class AssumptionInstance:
    assumption: str
    subject: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    instances: tuple[AssumptionInstance, ...]

    @property
    def passed(self) -> bool:
        return all(inst.passed for inst in self.instances)

    def failures(self) -> tuple[AssumptionInstance, ...]:
        return tuple(inst for inst in self.instances if not inst.passed)


def _frame_value_matrix(
    frame: ReducedFrame, values: DofValues, probes: Sequence[str]
) -> Mat:
    return tuple(
        tuple(values.get(dof, {}).get(p, Fraction(0)) for p in probes)
        for dof in frame.dofs
    )


def check_assumptions(
    family: Mapping[str, SystemLabel],
    order: Iterable[OrderEdge],
    probes: Probes,
) -> AssumptionReport:
    """Audit a presented family of labels against the construction's assumptions.

    The audit is witness- and instance-based: it verifies exactly the
    presented labels, order edges and probe data, and records which
    instances were checked.  Universal statements are out of reach of any
    finite audit and are not claimed.
    """
    order = tuple(order)
    instances: list[AssumptionInstance] = []

    for probe in probes.span_instances:
        if probe.label not in family:
            instances.append(
                AssumptionInstance("A1a", probe.label, False, "unknown label")
            )
            continue
        frame = family[probe.label].frame
        ok, detail = True, f"{len(probe.combos)} d.o.f. spanned by {probe.label!r}"
        for dof, row in probe.combos.items():
            if set(row) - set(frame.dofs):
                ok, detail = False, f"{dof!r} combination leaves the frame"
                break
            needed = {dof, *row}
            if needed - set(probe.dof_values):
                ok, detail = False, f"no evaluation data for {dof!r}"
                break
            lhs = {p: v for p, v in probe.dof_values[dof].items() if v != 0}
            if lhs != _sparse_combination(probe.dof_values, row):
                ok, detail = False, f"{dof!r} is not the witnessed combination"
                break
        instances.append(AssumptionInstance("A1a", probe.label, ok, detail))

    for probe in probes.op_instances:
        if probe.label not in family:
            instances.append(
                AssumptionInstance("A1b", probe.label, False, "unknown label")
            )
            continue
        label = family[probe.label]
        basis = {op.id: op for op in label.ops}
        ok, detail = True, f"{len(probe.ops)} operators contained in {probe.label!r}"
        for op in probe.ops:
            row = probe.membership.get(op.id)
            if row is None or set(row) - set(basis):
                ok, detail = False, f"no valid membership for {op.id!r}"
                break
            try:
                bad = next(
                    (
                        dof
                        for dof in label.frame.dofs
                        if op.on(dof)
                        != sum(
                            (c * basis[o].on(dof) for o, c in row.items()),
                            Fraction(0),
                        )
                    ),
                    None,
                )
            except MissingActionError as exc:
                ok, detail = False, str(exc)
                break
            if bad is not None:
                ok, detail = False, f"{op.id!r} membership fails on {bad!r}"
                break
        instances.append(AssumptionInstance("A1b", probe.label, ok, detail))

    verified_edges = {
        (e.upper, e.lower)
        for e in order
        if e.upper in family
        and e.lower in family
        and refines(family[e.upper], family[e.lower], e.witness)
    }

    surj_known: dict[str, bool] = {}

    def surjective(name: str, visiting: frozenset[str] = frozenset()) -> bool:
        if name in surj_known:
            return surj_known[name]
        if name in visiting:
            return False
        label = family[name]
        mat = probes.surjectivity.get(name)
        if mat is not None:
            rows = tuple(
                tuple(row.get(dof, Fraction(0)) for dof in label.frame.dofs)
                for row in mat
            )
            surj_known[name] = ratlin.rank(rows) == label.dim
            return surj_known[name]
        # Derived witness: a witnessed combination over a surjective finer
        # frame makes the full-rank image matrix constructible.
        for upper, lower in verified_edges:
            if lower != name or not surjective(upper, visiting | {name}):
                continue
            edge = next(e for e in order if (e.upper, e.lower) == (upper, lower))
            try:
                b = projection_from_witness(
                    family[upper], family[lower], edge.witness
                ).entries
            except PqkError:
                continue
            surj_known[name] = ratlin.rank(b) == label.dim
            return surj_known[name]
        surj_known[name] = False
        return False

    for name in sorted(family):
        ok = surjective(name)
        instances.append(
            AssumptionInstance(
                "A2",
                name,
                ok,
                "full-rank evaluation witness"
                if ok
                else "no surjectivity witness supplied or derivable",
            )
        )

    for name in sorted(family):
        instances.append(
            AssumptionInstance(
                "A3",
                name,
                True,
                "actions are constants by construction; linearity structural",
            )
        )

    for name in sorted(family):
        try:
            pairing_matrix(family[name])
            instances.append(AssumptionInstance("A4", name, True, "det != 0"))
        except (DegeneratePairingError, MissingActionError) as exc:
            instances.append(AssumptionInstance("A4", name, False, str(exc)))

    for a, b in probes.equal_space_pairs:
        subject = f"{a} ~ {b}"
        if a not in family or b not in family:
            instances.append(
                AssumptionInstance("A5", subject, False, "unknown label")
            )
            continue
        la, lb = family[a], family[b]
        ops_a = {(op.id, op.action) for op in la.ops}
        ops_b = {(op.id, op.action) for op in lb.ops}
        if ops_a != ops_b:
            instances.append(
                AssumptionInstance("A5", subject, False, "operator bases differ")
            )
            continue
        probe_ids = sorted(
            {p for d in (*la.frame.dofs, *lb.frame.dofs)
             for p in probes.dof_values.get(d, {})}
        )
        ma = _frame_value_matrix(la.frame, probes.dof_values, probe_ids)
        mb = _frame_value_matrix(lb.frame, probes.dof_values, probe_ids)
        stacked = ma + mb
        same_space = (
            ratlin.rank(ma) == ratlin.rank(mb) == ratlin.rank(stacked) == la.dim
        )
        if not same_space:
            instances.append(
                AssumptionInstance(
                    "A5", subject, False, "frames do not span the same space"
                )
            )
            continue
        ordered = (a, b) in verified_edges or (b, a) in verified_edges
        instances.append(
            AssumptionInstance(
                "A5",
                subject,
                ordered,
                "ordered" if ordered else "equal reduced spaces but no order edge",
            )
        )

    for edge in order:
        subject = f"{edge.upper} >= {edge.lower}"
        if edge.upper not in family or edge.lower not in family:
            instances.append(
                AssumptionInstance("A6", subject, False, "unknown label")
            )
            continue
        check = refines(family[edge.upper], family[edge.lower], edge.witness)
        instances.append(
            AssumptionInstance("A6", subject, check.ok, check.diagnostic)
        )

    for a, b in probes.directed_pairs:
        subject = f"{a}, {b}"
        upper = sorted(
            name
            for name in family
            if ((name, a) in verified_edges or name == a)
            and ((name, b) in verified_edges or name == b)
        )
        instances.append(
            AssumptionInstance(
                "directed",
                subject,
                bool(upper),
                f"upper bound {upper[0]!r}" if upper else "no witnessed upper bound",
            )
        )

    return AssumptionReport(tuple(instances))
