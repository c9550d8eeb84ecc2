"""SIC <-> MUB bridge via mutually unbiased marginal POVMs.

SIC to MUBs: sum SIC effects over the bins of d-partitions with the
1-overlap property to get mutually unbiased marginals, then read a basis off
each commutative marginal.  MUBs to SIC: smear each basis with a doubly
stochastic matrix, then add the smeared effects along each path of the dual
(d+1) x d path system and set G(i) = (E_i - I)/d.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .combinatorics import Partition, PathSystem
from .errors import (
    BadPartition,
    IdentityViolation,
    NotAPartition,
    NotCommutative,
    NotCommuting,
    NotDoublyStochastic,
    RowsNotOnSphere,
    ValidationError,
    WrongFamilySize,
)
from .operator_core import (
    DEFAULT_TOL,
    PAULI,
    OperatorFamily,
    VerificationReport,
    basis_projectors,
    gram_matrix,
    hermitize_stack,
    max_commutator,
    simultaneous_diagonalize,
    verify_family,
)

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class SmearingMatrix:
    """Doubly stochastic d x d matrix; ``rows[nu][i]`` weights basis projector i in effect nu."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        problem = doubly_stochastic_violation(rows)
        if problem:
            raise NotDoublyStochastic(problem)

    @property
    def d(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def circulant(cls, first_row: Sequence[float]) -> SmearingMatrix:
        """Row nu is the first row shifted right by nu: rows[nu][i] = first_row[(i - nu) mod d]."""
        return cls(circulant_matrix(first_row))

    def to_json(self) -> list[list[float]]:
        return self.rows.tolist()

    @classmethod
    def from_json(cls, data) -> SmearingMatrix:
        return cls(np.array(data, dtype=float))


def circulant_matrix(first_row: Sequence[float]) -> np.ndarray:
    c = np.asarray(first_row, dtype=float)
    d = len(c)
    return c[(np.arange(d)[None, :] - np.arange(d)[:, None]) % d]


def doubly_stochastic_violation(rows: np.ndarray, tol: float = STOCHASTIC_TOL) -> str | None:
    if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
        return f"smearing matrix must be square, got shape {rows.shape}"
    if rows.min() < -tol or rows.max() > 1 + tol:
        return "entries must lie in [0, 1]"
    if np.max(np.abs(rows.sum(axis=0) - 1)) > tol:
        return "columns must sum to 1 (effects summing to I)"
    if np.max(np.abs(rows.sum(axis=1) - 1)) > tol:
        return "rows must sum to 1 (unit-trace effects)"
    return None


# -- qubit picture ------------------------------------------------------------

@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def dot(self, other: BlochVector) -> float:
        return float(self.array @ other.array)

    @classmethod
    def of(cls, op: np.ndarray) -> BlochVector:
        """Bloch vector of a qubit operator c (I + r.sigma): r_i = tr(op sigma_i) / tr(op)."""
        tr = np.trace(op).real
        return cls(*(float(np.trace(op @ PAULI[a]).real / tr) for a in "xyz"))

    def operator(self, scale: float = 0.5) -> np.ndarray:
        return scale * (PAULI["I"] + sum(c * PAULI[a] for c, a in zip(self.array, "xyz")))


def tetrahedron_directions() -> np.ndarray:
    """Unit vectors s_0..s_3 of a regular tetrahedron with s_0 on the z axis."""
    r = math.sqrt(2) / 3
    return np.array([
        [0.0, 0.0, 1.0],
        [2 * r, 0.0, -1 / 3],
        [-r, math.sqrt(2 / 3), -1 / 3],
        [-r, -math.sqrt(2 / 3), -1 / 3],
    ])


def qubit_tetrahedron_sic() -> OperatorFamily:
    """G(k) = (I + s_k . sigma) / 4."""
    members = [BlochVector(*s).operator(0.25) for s in tetrahedron_directions()]
    return OperatorFamily(np.array(members), "sic-candidate")


def qubit_smearing(lam: float) -> SmearingMatrix:
    return SmearingMatrix(np.array([[(1 + lam) / 2, (1 - lam) / 2], [(1 - lam) / 2, (1 + lam) / 2]]))


def pauli_bases() -> list[np.ndarray]:
    """Eigenbases of sigma_x, sigma_y, sigma_z; column 0 is the +1 eigenvector."""
    s = 1 / math.sqrt(2)
    return [
        np.array([[s, s], [s, -s]], dtype=complex),
        np.array([[s, s], [1j * s, -1j * s]], dtype=complex),
        np.eye(2, dtype=complex),
    ]


# -- marginals ----------------------------------------------------------------

@dataclass
class MarginalSet:
    partitions: list[Partition]
    povms: list[OperatorFamily]
    provenance: str = ""

    @property
    def d(self) -> int:
        return self.povms[0].dim

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "partitions": [p.to_json() for p in self.partitions],
            "povms": [f.to_json() for f in self.povms],
        }

    @classmethod
    def from_json(cls, data: dict) -> MarginalSet:
        return cls(
            [Partition.from_json(p) for p in data.get("partitions", [])],
            [OperatorFamily.from_json(f) for f in data["povms"]],
            data.get("provenance", ""),
        )


def _coerce_partition(obj, d: int) -> Partition:
    if isinstance(obj, Partition):
        part = obj
    else:
        try:
            part = Partition(d, tuple(tuple(tuple(c) for c in b) for b in obj))
        except (NotAPartition, TypeError, ValueError) as exc:
            raise BadPartition(str(exc)) from exc
    if part.d != d:
        raise BadPartition(f"partition of a {part.d}x{part.d} array used with d={d}")
    return part


def bin_sums(members: np.ndarray, bins: Sequence[Sequence[int]]) -> np.ndarray:
    """Sum of the members listed in each bin (flat indices)."""
    return np.array([members[list(b)].sum(axis=0) for b in bins])


def marginalize(sic: OperatorFamily, partitions: Sequence, check_overlap: bool = True) -> MarginalSet:
    """One marginal POVM per d-partition: E^k(nu) = sum of G(i) over bin nu of P^(k).

    Cell ``(r, c)`` of the d x d array is SIC member ``r * d + c``.
    """
    d = sic.dim
    if len(sic) != d * d:
        raise BadPartition(f"a d-partition needs {d * d} SIC members, got {len(sic)}")
    parts = [_coerce_partition(p, d) for p in partitions]
    if check_overlap:
        for (a, pa), (b, pb) in itertools.combinations(enumerate(parts), 2):
            if not pa.one_overlap(pb):
                raise BadPartition(f"partitions {a} and {b} lack the 1-overlap property")
    povms = [
        OperatorFamily(bin_sums(sic.members, p.flat_bins()), "povm-candidate", list(range(d)))
        for p in parts
    ]
    return MarginalSet(parts, povms, "sic")


def _povm_list(marginals) -> list[OperatorFamily]:
    if isinstance(marginals, MarginalSet):
        return marginals.povms
    return [m if isinstance(m, OperatorFamily) else OperatorFamily(m) for m in marginals]


def verify_mu_identities(marginals, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check unit trace, tr E^2 = 2/(d+1), same-POVM overlap 1/(d+1),
    cross-POVM overlap 1/d, and linear independence of each POVM's effects."""
    povms = _povm_list(marginals)
    d = povms[0].dim
    rep = VerificationReport(tol, info={"d": d, "povms": len(povms)})
    ops = np.array([p.members for p in povms])  # (K, d, d, d)
    traces = np.einsum("knaa->kn", ops).real
    rep.add("trace", "tr E = 1", np.max(np.abs(traces - 1)))
    self_dev, same_dev, rank_def = 0.0, 0.0, 0
    for p in povms:
        g = gram_matrix(p.members).real
        self_dev = max(self_dev, float(np.max(np.abs(np.diag(g) - 2 / (d + 1)))))
        off = g[~np.eye(len(g), dtype=bool)]
        if off.size:
            same_dev = max(same_dev, float(np.max(np.abs(off - 1 / (d + 1)))))
        rank_def = max(rank_def, len(g) - int(np.linalg.matrix_rank(g, tol=1e-9)))
    rep.add("self_overlap", "tr E^2 = 2/(d+1)", self_dev)
    rep.add("same_povm_overlap", "tr E(mu) E(nu) = 1/(d+1)", same_dev)
    if len(povms) > 1:
        cross = 0.0
        for a, b in itertools.combinations(range(len(povms)), 2):
            g = np.einsum("mab,nba->mn", ops[a], ops[b]).real
            cross = max(cross, float(np.max(np.abs(g - 1 / d))))
        rep.add("cross_overlap", "tr E^k E^l = 1/d", cross)
    rep.add("linear_independence", "Gram rank = d", rank_def, 0.5)
    return rep


# -- smearing and MUB extraction ---------------------------------------------

def _as_smearing(lam, check: bool) -> np.ndarray:
    if isinstance(lam, SmearingMatrix):
        return lam.rows
    rows = np.asarray(lam, dtype=float)
    if check:
        return SmearingMatrix(rows).rows
    return rows


def _as_projectors(pvm) -> np.ndarray:
    if isinstance(pvm, OperatorFamily):
        return pvm.members
    arr = np.asarray(pvm, dtype=complex)
    return arr if arr.ndim == 3 else basis_projectors(arr)


def smear(pvm, lam, check: bool = True) -> OperatorFamily:
    """E(nu) = sum_i lam[nu][i] P(i).

    ``pvm`` is an OperatorFamily of projectors, a (d, d, d) stack, or a basis
    matrix whose columns are the basis vectors.  With ``check`` (the default)
    ``lam`` must be doubly stochastic.
    """
    projs = _as_projectors(pvm)
    rows = _as_smearing(lam, check)
    if rows.shape != (len(projs), len(projs)):
        raise ValidationError(f"smearing matrix shape {rows.shape} does not match {len(projs)} outcomes")
    return OperatorFamily(np.tensordot(rows, projs, axes=1), "povm-candidate")


def match_bases(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Pair columns of ``a`` and ``b`` up to phase and order.

    Returns ``perm`` with a[:, i] ~ b[:, perm[i]] and the largest deviation
    of the paired squared overlaps from 1.
    """
    overlap = np.abs(a.conj().T @ b) ** 2
    rows, cols = linear_sum_assignment(-overlap)
    perm = np.empty(len(rows), dtype=np.int64)
    perm[rows] = cols
    return perm, float(np.max(np.abs(overlap[rows, cols] - 1)))


@dataclass
class MubExtraction:
    bases: list[np.ndarray]
    smearings: list[np.ndarray]
    report: VerificationReport


def extract_mubs(marginals, tol: float = DEFAULT_TOL, seed: int = 0) -> MubExtraction:
    """Joint eigenbasis of each commutative marginal, checked for mutual unbiasedness.

    ``smearings[k][nu][i]`` is the eigenvalue of effect nu on basis vector i.
    """
    povms = _povm_list(marginals)
    d = povms[0].dim
    bases, lams = [], []
    for k, p in enumerate(povms):
        comm = max_commutator(list(p.members))
        if comm > tol:
            raise NotCommutative(f"POVM {k} is not commutative (max commutator {comm:.2e})")
        try:
            basis, lam = simultaneous_diagonalize(p.members, tol=tol, seed=seed)
        except NotCommuting as exc:
            raise NotCommutative(str(exc)) from exc
        bases.append(basis)
        lams.append(lam)

    rep = VerificationReport(tol, info={"d": d})
    ortho = max(float(np.max(np.abs(b.conj().T @ b - np.eye(d)))) for b in bases)
    rep.add("orthonormal", "<phi_i|phi_j> = delta_ij", ortho)
    cross = 0.0
    for a, b in itertools.combinations(range(len(bases)), 2):
        ov = np.abs(bases[a].conj().T @ bases[b]) ** 2
        cross = max(cross, float(np.max(np.abs(ov - 1 / d))))
    if len(bases) > 1:
        rep.add("unbiased", "|<phi_i^k|phi_j^l>|^2 = 1/d", cross)
    ds = max(max(np.max(np.abs(l.sum(0) - 1)), np.max(np.abs(l.sum(1) - 1))) for l in lams)
    rep.add("doubly_stochastic", "eigenvalue matrix rows and columns sum to 1", ds)
    return MubExtraction(bases, lams, rep)


def simplex_check(lam, tol: float = 1e-10) -> VerificationReport:
    """Centred rows r = lam_nu - 1/d have |r|^2 = (d-1)/(d(d+1)) and pairwise cosine -1/(d-1)."""
    rows = lam.rows if isinstance(lam, SmearingMatrix) else np.asarray(lam, dtype=float)
    d = rows.shape[0]
    gram = rows @ rows.T
    sphere = float(np.max(np.abs(np.diag(gram) - 2 / (d + 1))))
    off = gram[~np.eye(d, dtype=bool)]
    overlap = float(np.max(np.abs(off - 1 / (d + 1)))) if off.size else 0.0
    if sphere > tol or overlap > tol:
        raise RowsNotOnSphere(
            f"rows must satisfy |lam|^2 = 2/(d+1) and lam.lam' = 1/(d+1) (deviations {sphere:.2e}, {overlap:.2e})"
        )
    r = rows - 1 / d
    norms = np.sum(r * r, axis=1)
    rep = VerificationReport(tol, info={"d": d})
    rep.add("radius", "|r|^2 = (d-1)/(d(d+1))", np.max(np.abs(norms - (d - 1) / (d * (d + 1)))))
    if d > 1:
        cos = (r @ r.T) / np.sqrt(np.outer(norms, norms))
        coff = cos[~np.eye(d, dtype=bool)]
        rep.add("cosine", "cos theta = -1/(d-1)", np.max(np.abs(coff + 1 / (d - 1))))
    rep.add("row_sum", "lam . 1 = 1", np.max(np.abs(rows.sum(axis=1) - 1)))
    return rep


# -- reconstruction -----------------------------------------------------------

def path_sums(povms: Sequence[OperatorFamily], paths: PathSystem) -> np.ndarray:
    """E_i = sum_k E^k(bin of path i in row k)."""
    ops = np.array([p.members for p in povms])
    arr = paths.array()
    return ops[np.arange(len(povms))[None, :], arr].sum(axis=1)


@dataclass
class ReconstructionResult:
    family: OperatorFamily
    report: VerificationReport
    min_eigenvalue: float
    is_sic: bool

    def to_json(self) -> dict:
        return {
            "is_sic": self.is_sic,
            "min_eigenvalue": self.min_eigenvalue,
            "report": self.report.to_json(),
            "family": self.family.to_json(),
        }


def reconstruct_sic_system(
    povms, paths: PathSystem, tol: float = DEFAULT_TOL, strict: bool = True
) -> ReconstructionResult:
    """G(i) = (E_i - I)/d from d+1 mutually unbiased POVMs and a path system.

    With ``strict`` the inputs must be mutually unbiased (cross overlap
    1/d), otherwise :class:`IdentityViolation` is raised.  A failed
    same-POVM overlap 1/(d+1) is not an error: it is carried into the report
    as ``input.same_povm_overlap`` and the result is flagged non-SIC.  The
    result is flagged SIC iff every check passes, including a minimum
    eigenvalue of at least ``-tol``.
    """
    povms = _povm_list(povms)
    d = povms[0].dim
    if len(povms) != d + 1:
        raise WrongFamilySize(f"need {d + 1} POVMs in dimension {d}, got {len(povms)}")
    if any(len(p) != d for p in povms) or paths.d != d:
        raise WrongFamilySize(f"every POVM needs {d} outcomes and the path system order {d}")

    inputs = verify_mu_identities(povms, tol)
    needed = ("cross_overlap", "same_povm_overlap")
    if strict and not inputs["cross_overlap"].passed:
        raise IdentityViolation(
            f"input POVMs are not mutually unbiased (cross overlap off by {inputs['cross_overlap'].deviation:.2e})"
        )

    members = (path_sums(povms, paths) - np.eye(d)) / d
    family = OperatorFamily(members, "sic-system")
    rep = VerificationReport(tol)
    for n in needed:
        c = inputs[n]
        rep.add("input." + n, c.target, c.deviation)
    rep.extend(verify_family(family, tol))
    scaled = d * members
    cubes = np.einsum("kab,kbc,kca->k", scaled, scaled, scaled)
    rep.add("cubic", "tr (dG)^3 = 1", np.max(np.abs(cubes - 1)))
    min_eig = float(np.linalg.eigvalsh(hermitize_stack(members))[:, 0].min())
    rep.add("positivity", f"min eigenvalue >= -{tol:g}", max(0.0, -min_eig))
    rep.info = {"d": d, "min_eigenvalue": min_eig}
    return ReconstructionResult(family, rep, min_eig, rep.passed)


# -- smearing search ----------------------------------------------------------

def circulant_first_row(phases: Sequence[float], d: int, sign: int = 1) -> np.ndarray:
    """First row on the sphere/overlap set, from its discrete Fourier phases.

    Row j = (1/d) sum_k a_k exp(2 pi i j k / d) with a_0 = 1 and
    |a_k| = 1/sqrt(d+1) otherwise; this makes every circulant built from it
    satisfy |row|^2 = 2/(d+1) and row overlaps 1/(d+1).  Free parameters are
    the phases of a_1..a_m, m = (d-1)//2; for even d, a_{d/2} = sign/sqrt(d+1).
    """
    a = np.zeros(d, dtype=complex)
    a[0] = 1.0
    r = 1 / math.sqrt(d + 1)
    for k, phi in enumerate(phases, start=1):
        a[k] = r * np.exp(1j * phi)
        a[d - k] = np.conj(a[k])
    if d % 2 == 0:
        a[d // 2] = sign * r
    return np.fft.ifft(a).real


def n_circulant_phases(d: int) -> int:
    return (d - 1) // 2


def golden_section_max(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    invphi = (math.sqrt(5) - 1) / 2
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    x = (a + b) / 2
    return x, f(x)


@dataclass
class SmearingSearchResult:
    matrices: list[SmearingMatrix]
    params: list[float]
    signs: list[int]
    min_eigenvalue: float
    is_sic: bool
    family: OperatorFamily
    history: list[float] = field(default_factory=list)

    @property
    def qubit_lambda(self) -> float:
        """For d = 2: lambda with rows ((1+lambda)/2, (1-lambda)/2)."""
        rows = self.matrices[0].rows
        return float(rows[0, 0] - rows[0, 1])

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "signs": self.signs,
            "min_eigenvalue": self.min_eigenvalue,
            "is_sic": self.is_sic,
            "smearing": [m.to_json() for m in self.matrices],
            "min_eigenvalue_trace": self.history,
            "family": self.family.to_json(),
        }


class _SmearingObjective:
    def __init__(self, mubs: Sequence[np.ndarray], paths: PathSystem):
        self.d = paths.d
        self.projs = np.array([basis_projectors(b) for b in mubs])  # (d+1, d, d, d)
        self.paths = paths.array()

    def family(self, rows: Sequence[np.ndarray]) -> np.ndarray:
        mats = np.array([circulant_matrix(r) for r in rows])
        effects = np.einsum("kni,kiab->knab", mats, self.projs)
        e = effects[np.arange(self.d + 1)[None, :], self.paths].sum(axis=1)
        return (e - np.eye(self.d)) / self.d

    def __call__(self, rows: Sequence[np.ndarray]) -> float:
        g = self.family(rows)
        min_eig = float(np.linalg.eigvalsh(hermitize_stack(g))[:, 0].min())
        infeasible = float(sum(np.clip(-r, 0, None).sum() for r in rows))
        return min_eig - 10.0 * infeasible


def search_positive_smearing(
    mubs: Sequence[np.ndarray],
    paths: PathSystem,
    parametrization: str = "single-circulant",
    seed: int = 0,
    grid: int = 360,
    sweeps: int = 20,
    tol: float = DEFAULT_TOL,
) -> SmearingSearchResult:
    """Maximize the smallest eigenvalue of the reconstructed SIC system.

    Each basis is smeared by a circulant whose first row comes from
    :func:`circulant_first_row`, so the sphere and overlap conditions hold
    for every parameter value.  ``single-circulant`` shares one first row
    across all bases; ``per-basis-circulant`` starts from the shared optimum
    and then optimizes each basis separately by coordinate ascent.  Each
    coordinate is scanned on a grid and refined by golden-section search.
    Even d also ranges over the sign of the middle Fourier coefficient;
    ties keep the earlier candidate, so d = 2 returns lambda = +1/sqrt(3).
    """
    if parametrization not in ("single-circulant", "per-basis-circulant"):
        raise ValidationError(f"unknown parametrization {parametrization!r}")
    d = paths.d
    if len(mubs) != d + 1:
        raise WrongFamilySize(f"need {d + 1} bases, got {len(mubs)}")
    obj = _SmearingObjective(mubs, paths)
    m = n_circulant_phases(d)
    sign_choices = [1, -1] if d % 2 == 0 else [1]
    rng = np.random.default_rng(seed)
    history: list[float] = []
    grid_pts = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    step = 2 * np.pi / grid

    def ascend(value_of, x: np.ndarray) -> tuple[np.ndarray, float]:
        best = value_of(x)
        for _ in range(sweeps):
            start = best
            for j in range(len(x)):
                def f(t, j=j):
                    y = x.copy()
                    y[j] = t
                    return value_of(y)
                vals = [f(t) for t in grid_pts]
                t0 = grid_pts[int(np.argmax(vals))]
                t, v = golden_section_max(f, t0 - step, t0 + step)
                if v > best:
                    x[j], best = t % (2 * np.pi), v
                history.append(best)
            if best - start <= 1e-13:
                break
        return x, best

    # shared first row
    best = None
    for sign in sign_choices:
        def shared(x, sign=sign):
            row = circulant_first_row(x, d, sign)
            return obj([row] * (d + 1))
        starts = [np.zeros(m)] if m <= 1 else [rng.uniform(0, 2 * np.pi, m) for _ in range(8)]
        for x0 in starts:
            x, v = ascend(shared, x0.copy()) if m else (x0, shared(x0))
            history.append(v)
            if best is None or v > best[0] + 1e-12:
                best = (v, [sign] * (d + 1), [x.copy() for _ in range(d + 1)])

    if parametrization == "per-basis-circulant" and m:
        v, signs, xs = best
        flat = np.concatenate(xs)

        def per_basis(y):
            rows = [circulant_first_row(y[k * m:(k + 1) * m], d, signs[k]) for k in range(d + 1)]
            return obj(rows)

        flat, v2 = ascend(per_basis, flat)
        if v2 > v:
            best = (v2, signs, [flat[k * m:(k + 1) * m] for k in range(d + 1)])

    _, signs, xs = best
    rows = [np.clip(circulant_first_row(x, d, s), 0.0, None) for x, s in zip(xs, signs)]
    rows = [r / r.sum() for r in rows]
    matrices = [SmearingMatrix.circulant(r) for r in rows]
    members = obj.family(rows)
    min_eig = float(np.linalg.eigvalsh(hermitize_stack(members))[:, 0].min())
    return SmearingSearchResult(
        matrices,
        [float(t) for x in xs for t in x],
        list(signs),
        min_eig,
        min_eig >= -tol,
        OperatorFamily(members, "sic-system"),
        history,
    )
