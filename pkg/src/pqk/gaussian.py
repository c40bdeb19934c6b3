"""Density operators as finite mixtures of Gaussian exponential kernels.

A kernel is the exponential of a quadratic-plus-linear form in the two
kernel arguments,

    rho(x, y) = exp(-x^T P x / 2 - y^T conj(P) y / 2 + x^T R y
                    + s^T x + conj(s)^T y + logw),

with P complex symmetric, R complex Hermitian and logw real, which makes
Hermiticity of the operator a property of the parametrization rather than a
numerical accident.  The class is closed under the two operations this
module cares about: pulling the arguments back along a linear map, and
integrating out kernel directions.  Because of that, the partial-trace
projection onto a witnessed subsystem stays inside the class and is
available in closed form, with a midpoint-rule quadrature as an independent
cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels, ratlin
from .errors import (
    DimensionMismatchError,
    DivergentError,
    ExtentTooSmallError,
    NotPositiveDefiniteError,
    OrderViolationError,
)
from .frames import KernelDecomposition, kernel_decomposition
from .systems import (
    OrderEdge,
    OrderWitness,
    SystemLabel,
    compose_witnesses,
    embedding_matrix,
    projection_from_witness,
    refines,
)

_STRUCTURE_TOL = 1e-12


def _as_complex_matrix(m, n: int, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.shape != (n, n):
        raise DimensionMismatchError(f"{name} must be {n}x{n}, got {a.shape}")
    return a


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


@dataclass(frozen=True, eq=False)
class GaussianKernel:
    """One Gaussian exponential kernel in the convention above."""

    dim: int
    P: np.ndarray
    R: np.ndarray
    s: np.ndarray
    logw: float

    def __post_init__(self):
        n = self.dim
        P = _as_complex_matrix(self.P, n, "P")
        R = _as_complex_matrix(self.R, n, "R")
        s = np.array(self.s, dtype=np.complex128).reshape(-1)
        if s.shape != (n,):
            raise DimensionMismatchError(f"s must have length {n}, got {s.shape}")
        scale = max(np.abs(P).max(), np.abs(R).max(), 1.0)
        if np.abs(P - P.T).max() > _STRUCTURE_TOL * scale:
            raise ValueError("P must be symmetric")
        if np.abs(R - R.conj().T).max() > _STRUCTURE_TOL * scale:
            raise ValueError("R must be Hermitian")
        P = (P + P.T) / 2
        R = (R + R.conj().T) / 2
        for a in (P, R, s):
            a.flags.writeable = False
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "logw", float(self.logw))

    def diagonal_form(self) -> np.ndarray:
        """Real symmetric matrix C with rho(x, x) = exp(-x^T C x + ...)."""
        return self.P.real - self.R.real

    def converges(self) -> bool:
        return _is_pd(self.diagonal_form())

    def log_trace(self) -> float:
        c = self.diagonal_form()
        if not _is_pd(c):
            raise DivergentError("kernel diagonal form is not positive definite")
        u = 2.0 * self.s.real
        _, logdet = np.linalg.slogdet(c)
        return (
            self.logw
            + 0.5 * self.dim * math.log(math.pi)
            - 0.5 * logdet
            + 0.25 * float(u @ np.linalg.solve(c, u))
        )

    def sample(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Kernel values on a grid; xs (nx, dim), ys (ny, dim)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        return _kernels.kernel_table(self.P, self.R, self.s, self.logw, xs, ys)


@dataclass(frozen=True, eq=False)
class GaussianMixtureState:
    """A finite positive mixture of Gaussian kernels, normalized to trace 1.

    ``provenance`` records how positivity was obtained: 'pure-projector'
    for normalized projectors, 'projected' for images under
    :func:`project_state` (which preserves positivity), 'mixed' for convex
    combinations and loaded data.  ``trace_drift`` reports how far the
    pre-normalization trace of a projection was from 1.
    """

    dim: int
    terms: tuple[tuple[float, GaussianKernel], ...]
    provenance: str = "mixed"
    trace_drift: float = 0.0

    def __post_init__(self):
        terms = tuple((float(w), k) for w, k in self.terms)
        if not terms:
            raise DimensionMismatchError("a state needs at least one term")
        for w, k in terms:
            if w <= 0:
                raise ValueError(f"term weight {w} is not positive")
            if k.dim != self.dim:
                raise DimensionMismatchError(
                    f"term dimension {k.dim} != state dimension {self.dim}"
                )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "trace_drift", float(self.trace_drift))

    def sample(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = None
        for w, k in self.terms:
            t = w * k.sample(xs, ys)
            out = t if out is None else out + t
        return out


def pure_state(A, b) -> GaussianMixtureState:
    """Normalized projector onto psi(x) = exp(-x^T A x / 2 + b^T x)."""
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    A = _as_complex_matrix(A, n, "A")
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if b.shape != (n,):
        raise DimensionMismatchError(f"b must have length {n}, got {b.shape}")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > _STRUCTURE_TOL * scale:
        raise ValueError("A must be symmetric")
    A = (A + A.T) / 2
    re = A.real
    if not _is_pd(re):
        raise NotPositiveDefiniteError("Re(A) must be positive definite")
    u = 2.0 * b.real
    _, logdet = np.linalg.slogdet(re)
    log_norm = (
        0.5 * n * math.log(math.pi) - 0.5 * logdet
        + 0.25 * float(u @ np.linalg.solve(re, u))
    )
    kernel = GaussianKernel(dim=n, P=A, R=np.zeros((n, n)), s=b, logw=-log_norm)
    return GaussianMixtureState(n, ((1.0, kernel),), provenance="pure-projector")


def mix(states: Sequence[GaussianMixtureState], weights: Sequence[float]) -> GaussianMixtureState:
    """Convex mixture of trace-1 states."""
    if len(states) != len(weights) or not states:
        raise DimensionMismatchError("one weight per state required")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise DimensionMismatchError("mixture components differ in dimension")
    total = float(sum(weights))
    terms = tuple(
        (float(wt) / total * w, k)
        for s, wt in zip(states, weights)
        for w, k in s.terms
    )
    return GaussianMixtureState(dim, terms, provenance="mixed")


def trace(state: GaussianMixtureState) -> float:
    """Closed-form trace; raises :class:`DivergentError` on bad terms."""
    return float(sum(w * math.exp(k.log_trace()) for w, k in state.terms))


def gaussian_log_integral(M: np.ndarray, v: np.ndarray) -> complex:
    """log of the n-dimensional integral of exp(-z^T M z / 2 + v^T z).

    Requires Re(M) positive definite, which keeps every eigenvalue of the
    complex symmetric M in the open right half-plane; the square root of
    the determinant is then taken eigenvalue by eigenvalue with principal
    branches, the branch continuously connected to the real case.
    """
    n = M.shape[0]
    if n == 0:
        return 0.0 + 0.0j
    if not _is_pd(M.real):
        raise DivergentError("quadratic form has non-positive-definite real part")
    eig = np.linalg.eigvals(M)
    logdet = complex(np.sum(np.log(eig)))
    quad = complex(v @ np.linalg.solve(M, v))
    return 0.5 * n * math.log(2 * math.pi) - 0.5 * logdet + 0.5 * quad


def _hs_pair(k1: GaussianKernel, k2: GaussianKernel) -> complex:
    """Hilbert-Schmidt pairing integral of conj(k1) with k2."""
    n = k1.dim
    cross = -(k1.R.conj() + k2.R)
    M = np.block([[k1.P.conj() + k2.P, cross], [cross.T, k1.P + k2.P.conj()]])
    v = np.concatenate([k1.s.conj() + k2.s, k1.s + k2.s.conj()])
    return complex(np.exp(k1.logw + k2.logw + gaussian_log_integral(M, v)))


def hs_inner(s1: GaussianMixtureState, s2: GaussianMixtureState) -> complex:
    """HS inner product <s1, s2>, conjugate-linear in the first slot."""
    if s1.dim != s2.dim:
        raise DimensionMismatchError(
            f"states live in dimensions {s1.dim} and {s2.dim}"
        )
    return complex(
        sum(
            w1 * w2 * _hs_pair(k1, k2)
            for w1, k1 in s1.terms
            for w2, k2 in s2.terms
        )
    )


def _gram_distance(s1: GaussianMixtureState, s2: GaussianMixtureState) -> float:
    d2 = (hs_inner(s1, s1) + hs_inner(s2, s2) - 2 * hs_inner(s1, s2).real).real
    return math.sqrt(max(d2, 0.0))


def _term_deviation(
    t1: tuple[float, GaussianKernel], t2: tuple[float, GaussianKernel]
) -> float:
    """Scaled parameter distance between two weighted kernels."""
    w1, k1 = t1
    w2, k2 = t2
    parts = [
        np.abs(k1.P - k2.P).max() / (1.0 + np.abs(k2.P).max()),
        np.abs(k1.R - k2.R).max() / (1.0 + np.abs(k2.R).max()),
        np.abs(k1.s - k2.s).max() / (1.0 + np.abs(k2.s).max()),
        abs(k1.logw - k2.logw) / (1.0 + abs(k2.logw)),
        abs(w1 - w2) / w2,
    ]
    return max(parts)


def _moment_product(A, b, c, B, d, e, sigma, mu) -> complex:
    """E[(z^T A z / 2 + b^T z + c)(z^T B z / 2 + d^T z + e)] under an
    analytic Gaussian with formal mean mu and covariance sigma (Wick)."""
    tA = np.trace(A @ sigma)
    tB = np.trace(B @ sigma)
    mAm = mu @ A @ mu
    mBm = mu @ B @ mu
    bm = b @ mu
    dm = d @ mu
    out = 0.25 * (
        tA * tB
        + 2 * np.trace(A @ sigma @ B @ sigma)
        + tA * mBm
        + tB * mAm
        + 4 * (mu @ A @ sigma @ B @ mu)
        + mAm * mBm
    )
    out += 0.5 * (tA * dm + 2 * (mu @ A @ sigma @ d) + mAm * dm)
    out += 0.5 * e * (tA + mAm)
    out += 0.5 * (tB * bm + 2 * (mu @ B @ sigma @ b) + mBm * bm)
    out += b @ sigma @ d + bm * dm
    out += e * bm
    out += c * (0.5 * (tB + mBm) + dm + e)
    return complex(out)


def _perturbative_distance(
    s1: GaussianMixtureState, s2: GaussianMixtureState
) -> float:
    """||s1 - s2||_HS to first order in the term-wise parameter differences.

    For states whose terms match pairwise up to tiny deviations, the Gram
    form loses the distance under cancellation of O(1) integrals; here each
    term difference is expanded as reference-kernel times a small quadratic
    form, so every contribution is computed directly at the size of the
    deviation itself.
    """
    n = s1.dim
    deltas = []
    for (w1, k1), (w2, k2) in zip(s1.terms, s2.terms):
        dP = k1.P - k2.P
        dR = k1.R - k2.R
        ds = k1.s - k2.s
        dc = (k1.logw - k2.logw) + math.log(w1 / w2)
        A = np.block([[-dP, dR], [dR.T, -dP.conj()]])
        b = np.concatenate([ds, ds.conj()])
        deltas.append((A, b, dc))
    total = 0.0 + 0.0j
    for t, (wt, kt) in enumerate(s2.terms):
        for u, (wu, ku) in enumerate(s2.terms):
            cross = -(kt.R.conj() + ku.R)
            M = np.block(
                [[kt.P.conj() + ku.P, cross], [cross.T, kt.P + ku.P.conj()]]
            )
            v = np.concatenate([kt.s.conj() + ku.s, kt.s + ku.s.conj()])
            if not _is_pd(M.real):
                raise DivergentError(
                    "quadratic form has non-positive-definite real part"
                )
            sigma = np.linalg.inv(M)
            sigma = (sigma + sigma.T) / 2
            mu = sigma @ v
            base = wt * wu * np.exp(
                kt.logw + ku.logw + gaussian_log_integral(M, v)
            )
            At, bt, ct = deltas[t]
            Au, bu, cu = deltas[u]
            total += base * _moment_product(
                At.conj(), bt.conj(), np.conj(ct), Au, bu, cu, sigma, mu
            )
    return math.sqrt(max(total.real, 0.0))


_PERTURBATIVE_THRESHOLD = 1e-6


def hs_distance(s1: GaussianMixtureState, s2: GaussianMixtureState) -> float:
    """Hilbert-Schmidt distance ||s1 - s2||_HS.

    Generic states go through closed-form pair integrals.  States whose
    terms match pairwise to better than one part in 10^6 (e.g. the same
    projection computed along two paths) switch to a first-order expansion
    in the parameter differences, which stays accurate far below the
    cancellation floor of the generic form.
    """
    if s1.dim != s2.dim:
        raise DimensionMismatchError(
            f"states live in dimensions {s1.dim} and {s2.dim}"
        )
    if len(s1.terms) == len(s2.terms):
        dev = max(
            (_term_deviation(t1, t2) for t1, t2 in zip(s1.terms, s2.terms)),
            default=0.0,
        )
        if dev <= _PERTURBATIVE_THRESHOLD:
            return _perturbative_distance(s1, s2)
    return _gram_distance(s1, s2)


def purity(state: GaussianMixtureState) -> float:
    """tr(rho^2); equals the squared HS norm for Hermitian kernels."""
    return hs_inner(state, state).real


def _decomposition_floats(kdec: KernelDecomposition):
    kb = ratlin.to_float(kdec.kernel_basis)
    w = ratlin.to_float(kdec.embedding)
    return kb, w, float(kdec.lebesgue_factor)


def _project_kernel(k: GaussianKernel, kb: np.ndarray, w: np.ndarray, lf: float) -> GaussianKernel:
    """Integrate the kernel over its kernel-basis directions in closed form.

    With x' = Kb u + W x and y' = Kb u + W y (one shared kernel variable u:
    the trace is taken on the diagonal of the reduced factor), the exponent
    is quadratic in u and the u-integral is Gaussian with a real positive
    definite form, so no branch tracking is needed.
    """
    n = w.shape[1]
    d = kb.shape[1]
    P0 = w.T @ k.P @ w
    R0 = w.T @ k.R @ w
    s0 = w.T @ k.s
    if d == 0:
        new = (P0, R0, s0, k.logw + math.log(lf))
    else:
        a_u = 2.0 * (kb.T @ (k.P.real - k.R.real) @ kb)
        if not _is_pd(a_u):
            raise DivergentError(
                "kernel-direction quadratic form is not positive definite"
            )
        lx = kb.T @ (k.R.T - k.P) @ w
        ly = np.conj(lx)
        l0 = 2.0 * (kb.T @ k.s.real)
        j = np.linalg.inv(a_u)
        j = (j + j.T) / 2
        _, logdet = np.linalg.slogdet(a_u)
        logw = (
            k.logw
            + math.log(lf)
            + 0.5 * d * math.log(2 * math.pi)
            - 0.5 * logdet
            + 0.5 * float(l0 @ j @ l0)
        )
        new = (P0 - lx.T @ j @ lx, R0 + lx.T @ j @ ly, s0 + lx.T @ (j @ l0), logw)
    P, R, s, logw = new
    P = (P + P.T) / 2
    R = (R + R.conj().T) / 2
    return GaussianKernel(dim=n, P=P, R=R, s=s, logw=float(logw))


def _project_terms(
    state: GaussianMixtureState, kdec: KernelDecomposition
) -> tuple[tuple[tuple[float, GaussianKernel], ...], float]:
    """Project every term; returns (unnormalized terms, pre-normalization trace)."""
    kb, w, lf = _decomposition_floats(kdec)
    if w.shape[0] != state.dim:
        raise DimensionMismatchError(
            f"state dimension {state.dim} != projection source {w.shape[0]}"
        )
    terms = tuple((wt, _project_kernel(k, kb, w, lf)) for wt, k in state.terms)
    pre_trace = float(sum(wt * math.exp(k.log_trace()) for wt, k in terms))
    return terms, pre_trace


def project_with(
    state: GaussianMixtureState, kdec: KernelDecomposition
) -> GaussianMixtureState:
    """Partial-trace projection along an explicit kernel decomposition."""
    terms, pre_trace = _project_terms(state, kdec)
    normalized = tuple((wt / pre_trace, k) for wt, k in terms)
    return GaussianMixtureState(
        dim=kdec.projection.rows,
        terms=normalized,
        provenance="projected",
        trace_drift=abs(pre_trace - 1.0),
    )


def decomposition_for(
    fine: SystemLabel, coarse: SystemLabel, witness: OrderWitness
) -> KernelDecomposition:
    """Kernel decomposition of the witnessed projection fine -> coarse."""
    check = refines(fine, coarse, witness)
    if not check:
        raise OrderViolationError(
            f"relation not witnessed: {check.diagnostic}"
        )
    b = projection_from_witness(fine, coarse, witness)
    w = embedding_matrix(fine, coarse, witness)
    return kernel_decomposition(b, w)


def project_state(
    state: GaussianMixtureState,
    fine: SystemLabel,
    coarse: SystemLabel,
    witness: OrderWitness,
) -> GaussianMixtureState:
    """Reduce a state of the fine system to its witnessed subsystem.

    Traces out the kernel of the witnessed projection and pulls the result
    back along the distinguished embedding.  Trace is preserved up to float
    noise (reported as ``trace_drift`` after renormalization); positivity is
    preserved, and for pure inputs purity never increases.
    """
    if state.dim != fine.dim:
        raise DimensionMismatchError(
            f"state dimension {state.dim} != fine system dimension {fine.dim}"
        )
    return project_with(state, decomposition_for(fine, coarse, witness))


@dataclass(frozen=True)
class ConsistencyReport:
    distance: float
    tol: float
    direct: GaussianMixtureState = field(repr=False, compare=False)
    two_step: GaussianMixtureState = field(repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.distance <= self.tol


def chain_consistency(
    state: GaussianMixtureState,
    top: SystemLabel,
    mid: SystemLabel,
    bottom: SystemLabel,
    w_top_mid: OrderWitness,
    w_mid_bottom: OrderWitness,
    w_top_bottom: OrderWitness | None = None,
    tol: float = 1e-9,
) -> ConsistencyReport:
    """Compare projecting top->bottom directly against top->mid->bottom.

    The two compositions agree identically for exact kernels; the reported
    HS distance measures floating-point residue only.
    """
    if w_top_bottom is None:
        w_top_bottom = compose_witnesses(w_top_mid, w_mid_bottom)
    direct = project_state(state, top, bottom, w_top_bottom)
    two_step = project_state(
        project_state(state, top, mid, w_top_mid), mid, bottom, w_mid_bottom
    )
    return ConsistencyReport(
        distance=hs_distance(direct, two_step), tol=tol, direct=direct, two_step=two_step
    )


# --- quadrature oracle -------------------------------------------------------


def _midpoint_axis(grid_points: int, extent: float) -> np.ndarray:
    h = 2.0 * extent / grid_points
    return -extent + h * (np.arange(grid_points) + 0.5)


def _cartesian(axis: np.ndarray, dims: int) -> np.ndarray:
    if dims == 0:
        return np.zeros((1, 0))
    grids = np.meshgrid(*([axis] * dims), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True, eq=False)
class QuadratureTable:
    """Sampled projected kernel on a (b', b) evaluation grid."""

    points: np.ndarray
    values: np.ndarray
    grid_points: int
    extent: float


def _tail_mass(
    k: GaussianKernel, kb: np.ndarray, w: np.ndarray, extent: float, corners: np.ndarray
) -> float:
    d = kb.shape[1]
    if d == 0:
        return 0.0
    a_u = 2.0 * (kb.T @ (k.P.real - k.R.real) @ kb)
    if not _is_pd(a_u):
        raise DivergentError(
            "kernel-direction quadratic form is not positive definite"
        )
    lx = kb.T @ (k.R.T - k.P) @ w
    l0 = 2.0 * (kb.T @ k.s.real)
    sigma = np.sqrt(np.diag(np.linalg.inv(a_u)))
    worst = 0.0
    for cx in corners:
        for cy in corners:
            lin = (lx @ cx + np.conj(lx) @ cy + l0).real
            mu = np.abs(np.linalg.solve(a_u, lin))
            tail = sum(
                0.5 * math.erfc((extent - m) / (sg * math.sqrt(2)))
                + 0.5 * math.erfc((extent + m) / (sg * math.sqrt(2)))
                for m, sg in zip(mu, sigma)
            )
            worst = max(worst, tail)
    return worst


def quadrature_partial_trace(
    state: GaussianMixtureState,
    fine: SystemLabel,
    coarse: SystemLabel,
    witness: OrderWitness,
    grid_points: int = 64,
    extent: float = 8.0,
    eval_points: int = 8,
    eval_extent: float = 3.0,
) -> QuadratureTable:
    """Midpoint-rule partial trace, the independent check on the closed form.

    Integrates the source kernel directly over the kernel-basis directions
    on a uniform midpoint grid (``grid_points`` midpoints per kernel
    dimension over [-extent, extent], weighted by the Lebesgue factor) and
    samples the result on an ``eval_points``-per-axis (b', b) grid.  No
    closed-form projection machinery is reused.
    """
    if grid_points < 16:
        raise ValueError("grid_points must be at least 16")
    kdec = decomposition_for(fine, coarse, witness)
    kb, w, lf = _decomposition_floats(kdec)
    n = kdec.projection.rows
    d = kdec.kernel_dim
    corner_axis = np.array([-eval_extent, eval_extent])
    corners = _cartesian(corner_axis, n)
    for _, k in state.terms:
        tail = _tail_mass(k, kb, w, extent, corners)
        if tail > 1e-6:
            raise ExtentTooSmallError(
                f"estimated tail mass {tail:.3e} exceeds 1e-6; enlarge extent"
            )
    axis = np.linspace(-eval_extent, eval_extent, eval_points)
    points = _cartesian(axis, n)
    xps = points @ w.T
    if d > 0:
        h = 2.0 * extent / grid_points
        us = _cartesian(_midpoint_axis(grid_points, extent), d)
        uks = us @ kb.T
        weight = lf * h**d
    else:
        uks = np.zeros((1, w.shape[0]))
        weight = lf
    values = np.zeros((len(points), len(points)), dtype=np.complex128)
    for wt, k in state.terms:
        values += wt * _kernels.quad_table(
            k.P, k.R, k.s, k.logw, xps, xps, uks, weight
        )
    return QuadratureTable(
        points=points, values=values, grid_points=grid_points, extent=extent
    )


@dataclass(frozen=True, eq=False)
class OracleReport:
    max_rel_error: float
    quadrature: QuadratureTable
    closed_form: np.ndarray


def oracle_report(
    state: GaussianMixtureState,
    fine: SystemLabel,
    coarse: SystemLabel,
    witness: OrderWitness,
    grid_points: int = 64,
    extent: float = 8.0,
    eval_points: int = 8,
    eval_extent: float = 3.0,
) -> OracleReport:
    """Quadrature vs closed form, compared on the same evaluation grid.

    The error is max |quad - closed| over the grid, relative to the largest
    closed-form magnitude, with the closed form kept unnormalized so both
    sides compute the same integral.
    """
    table = quadrature_partial_trace(
        state, fine, coarse, witness, grid_points, extent, eval_points, eval_extent
    )
    kdec = decomposition_for(fine, coarse, witness)
    terms, _ = _project_terms(state, kdec)
    closed = np.zeros_like(table.values)
    for wt, k in terms:
        closed += wt * k.sample(table.points, table.points)
    err = float(np.abs(table.values - closed).max() / np.abs(closed).max())
    return OracleReport(max_rel_error=err, quadrature=table, closed_form=closed)


# --- grid positivity probe ---------------------------------------------------


def kernel_matrix(
    state: GaussianMixtureState,
    points_per_axis: int | None = None,
    extent: float = 8.0,
) -> tuple[np.ndarray, float]:
    """Midpoint discretization of the kernel as a matrix, with cell volume.

    ``points_per_axis`` defaults to the largest count keeping the total
    grid near 64 points, matching the documented positivity probe.
    """
    n = state.dim
    if points_per_axis is None:
        points_per_axis = max(2, round(64 ** (1.0 / n)))
    axis = _midpoint_axis(points_per_axis, extent)
    pts = _cartesian(axis, n)
    h = float(axis[1] - axis[0]) if len(axis) > 1 else 2.0 * extent
    m = state.sample(pts, pts) * h**n
    return (m + m.conj().T) / 2, h


def min_eigenvalue(
    state: GaussianMixtureState,
    points_per_axis: int | None = None,
    extent: float = 8.0,
) -> float:
    m, _ = kernel_matrix(state, points_per_axis, extent)
    return float(np.linalg.eigvalsh(m).min())


# --- coherent families -------------------------------------------------------


@dataclass(frozen=True)
class CoherentFamily:
    """States over a finite ordered family, one per label."""

    labels: Mapping[str, SystemLabel]
    states: Mapping[str, GaussianMixtureState]
    order: tuple[OrderEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", dict(self.labels))
        object.__setattr__(self, "states", dict(self.states))
        object.__setattr__(self, "order", tuple(self.order))
        missing = set(self.labels) - set(self.states)
        if missing:
            raise DimensionMismatchError(f"labels without states: {sorted(missing)}")


@dataclass(frozen=True)
class FamilyEdgeResult:
    upper: str
    lower: str
    distance: float
    passed: bool


@dataclass(frozen=True)
class FamilyReport:
    edges: tuple[FamilyEdgeResult, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.edges)


def check_coherent_family(family: CoherentFamily, tol: float = 1e-8) -> FamilyReport:
    """Verify that each witnessed projection maps the fine state to the coarse one."""
    results = []
    for edge in family.order:
        projected = project_state(
            family.states[edge.upper],
            family.labels[edge.upper],
            family.labels[edge.lower],
            edge.witness,
        )
        dist = hs_distance(projected, family.states[edge.lower])
        results.append(
            FamilyEdgeResult(edge.upper, edge.lower, dist, dist <= tol)
        )
    return FamilyReport(tuple(results), tol)
