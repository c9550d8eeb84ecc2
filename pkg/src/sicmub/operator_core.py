"""Dense operator families and their verification.

Operators are plain complex ``(d, d)`` numpy arrays; a family stacks its
members into one ``(m, d, d)`` array.  Verification never raises on a failed
property: it returns a :class:`VerificationReport` listing every check with
its target value and observed maximum deviation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimMismatch, NotASic, NotCommuting, ValidationError

DEFAULT_TOL = 1e-9
POSITIVITY_SLACK = 1e-10
HERMITIAN_TOL = 1e-12

KINDS = ("povm-candidate", "pvm-candidate", "sic-candidate", "sic-system")

PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def basis_projectors(basis: np.ndarray) -> np.ndarray:
    """Rank-1 projectors onto the columns of ``basis``, stacked as (d, d, d)."""
    basis = np.asarray(basis, dtype=complex)
    return np.einsum("ai,bi->iab", basis, basis.conj())


@dataclass
class OperatorFamily:
    """An ordered list of d x d operators with outcome labels."""

    members: np.ndarray
    kind: str = "povm-candidate"
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.members = np.asarray(self.members, dtype=complex)
        if self.members.ndim != 3 or self.members.shape[1] != self.members.shape[2]:
            raise DimMismatch(f"members must have shape (m, d, d), got {self.members.shape}")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown family kind {self.kind!r}")
        if not self.labels:
            self.labels = list(range(len(self.members)))
        if len(self.labels) != len(self.members):
            raise ValidationError("one label per member required")

    @property
    def dim(self) -> int:
        return self.members.shape[1]

    def __len__(self):
        return len(self.members)

    def __getitem__(self, k):
        return self.members[k]

    def __iter__(self):
        return iter(self.members)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "kind": self.kind,
            "labels": [lab if isinstance(lab, (int, str)) else str(lab) for lab in self.labels],
            "members": [operator_to_json(m)["entries"] for m in self.members],
        }

    @classmethod
    def from_json(cls, data: dict) -> OperatorFamily:
        members = np.array([_entries_from_json(e) for e in data["members"]])
        if members.shape[1:] != (data["dim"], data["dim"]):
            raise DimMismatch("member shape does not match 'dim'")
        return cls(members, data.get("kind", "povm-candidate"), list(data.get("labels", [])))


def operator_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": a.shape[0], "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a]}


def _entries_from_json(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def operator_from_json(data: dict) -> np.ndarray:
    a = _entries_from_json(data["entries"])
    if a.shape != (data["dim"], data["dim"]):
        raise DimMismatch("entries do not match 'dim'")
    return a


@dataclass
class Check:
    name: str
    target: str
    deviation: float
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "target": self.target, "deviation": self.deviation, "passed": self.passed}


@dataclass
class VerificationReport:
    tol: float
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name: str, target: str, deviation: float, tol: float | None = None) -> Check:
        deviation = float(deviation)
        check = Check(name, target, deviation, bool(deviation <= (self.tol if tol is None else tol)))
        self.checks.append(check)
        return check

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.target, c.deviation, c.passed))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "checks": [c.to_json() for c in self.checks],
            "info": self.info,
        }

    def rows(self) -> list[list]:
        return [[i + 1, c.name, c.target, f"{c.deviation:.3e}", "pass" if c.passed else "FAIL"]
                for i, c in enumerate(self.checks)]


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(A^dagger B)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(a, b))


def gram_matrix(members: np.ndarray) -> np.ndarray:
    """tr(A_k A_l) for a stack of Hermitian operators."""
    flat = members.reshape(len(members), -1)
    return flat.conj() @ flat.T


def _min_eigenvalues(members: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize_stack(members))[:, 0]


def hermitize_stack(members: np.ndarray) -> np.ndarray:
    return (members + members.conj().transpose(0, 2, 1)) / 2


def verify_family(family: OperatorFamily, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check the properties implied by ``family.kind``.

    Every kind gets hermiticity and normalization.  POVM and SIC candidates
    get positivity; PVMs get idempotence and orthogonality; SIC candidates
    and SIC systems get the trace identities tr G = 1/d, tr G^2 = 1/d^2 and
    tr G_k G_l = 1/(d^2 (d+1)); SIC candidates also get the cubic test
    tr (dG)^3 = 1.
    """
    if len(family) == 0:
        raise ValidationError("empty family")
    ops, d, m = family.members, family.dim, len(family)
    rep = VerificationReport(tol, info={"kind": family.kind, "dim": d, "members": m})
    herm = np.max(np.abs(ops - ops.conj().transpose(0, 2, 1)))
    rep.add("hermitian", "A = A^dagger", herm)
    rep.add("normalization", "sum = I", np.max(np.abs(ops.sum(axis=0) - np.eye(d))))

    if family.kind in ("povm-candidate", "sic-candidate", "pvm-candidate"):
        min_eig = float(_min_eigenvalues(ops).min())
        rep.info["min_eigenvalue"] = min_eig
        rep.add("positivity", f"min eigenvalue >= -{POSITIVITY_SLACK:g}", max(0.0, -min_eig), POSITIVITY_SLACK)

    if family.kind == "pvm-candidate":
        sq = np.einsum("kab,kbc->kac", ops, ops)
        rep.add("idempotence", "P^2 = P", np.max(np.abs(sq - ops)))
        cross = 0.0
        for a, b in itertools.combinations(range(m), 2):
            cross = max(cross, np.max(np.abs(ops[a] @ ops[b])))
        rep.add("orthogonality", "P_k P_l = 0", cross)

    if family.kind in ("sic-candidate", "sic-system"):
        if m != d * d:
            rep.add("size", f"{d * d} members", abs(m - d * d))
        traces = np.einsum("kaa->k", ops)
        rep.add("trace", "tr G = 1/d", np.max(np.abs(traces - 1 / d)))
        g = gram_matrix(ops)
        diag = np.diag(g)
        rep.add("self_overlap", "tr G^2 = 1/d^2", np.max(np.abs(diag - 1 / d**2)))
        off = g[~np.eye(m, dtype=bool)]
        if off.size:
            rep.add("pair_overlap", "tr G_k G_l = 1/(d^2 (d+1))", np.max(np.abs(off - 1 / (d**2 * (d + 1)))))

    if family.kind == "sic-candidate":
        scaled = d * ops
        cubes = np.einsum("kab,kbc,kca->k", scaled, scaled, scaled)
        rep.add("cubic", "tr (dG)^3 = 1", np.max(np.abs(cubes - 1)))
    return rep


def is_informationally_complete(family: OperatorFamily, tol: float = 1e-9) -> bool:
    d = family.dim
    return int(np.linalg.matrix_rank(gram_matrix(family.members), tol=tol)) == d * d


def sic_orthogonal_basis(family: OperatorFamily, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, VerificationReport]:
    """Shift a SIC to the orthogonal operator basis d G(k) - t I.

    t = (1 - 1/sqrt(d+1)) / d.  Raises :class:`NotASic` when the input fails
    the trace identities (positivity is not required).
    """
    d = family.dim
    pre = verify_family(OperatorFamily(family.members, "sic-system"), tol)
    if not pre.passed:
        raise NotASic("family does not satisfy the SIC trace identities")
    t = (1 - 1 / np.sqrt(d + 1)) / d
    shifted = d * family.members - t * np.eye(d)
    g = gram_matrix(shifted)
    off = g[~np.eye(len(shifted), dtype=bool)]
    rep = VerificationReport(tol, info={"t": t})
    rep.add("orthogonality", "tr[(dG_k - tI)(dG_l - tI)] = 0", np.max(np.abs(off)))
    return shifted, rep


def normalize_phases(vectors: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = np.array(vectors, dtype=complex)
    for i in range(out.shape[1]):
        col = out[:, i]
        k = int(np.argmax(np.abs(col) > max(eps, 1e-8 * np.max(np.abs(col)))))
        out[:, i] = col * (abs(col[k]) / col[k])
    return out


def _random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitize(a)


def max_commutator(members: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for a, b in itertools.combinations(members, 2):
        worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return worst


def _joint_basis(ops: np.ndarray, sub: np.ndarray, rng: np.random.Generator, tol: float) -> np.ndarray:
    """Orthonormal joint eigenvectors of ``ops`` inside the span of ``sub``'s columns."""
    k = sub.shape[1]
    if k == 1:
        return sub
    restricted = np.einsum("ai,nab,bj->nij", sub.conj(), ops, sub)
    spread = max(float(np.max(np.abs(r - np.trace(r) / k * np.eye(k)))) for r in restricted)
    if spread <= tol:
        combo = _random_hermitian(k, rng)  # joint degeneracy: seeded tie-breaker
    else:
        coeffs = rng.uniform(0.5, 1.5, size=len(ops)) * rng.choice([-1, 1], size=len(ops))
        combo = np.tensordot(coeffs, restricted, axes=1)
    vals, rot = np.linalg.eigh(hermitize(combo))
    vecs = sub @ rot
    if spread <= tol:
        return vecs
    gap = max(1e3 * tol, 1e-8) * max(1.0, float(np.max(np.abs(vals))))
    start = 0
    while start < k:
        stop = start + 1
        while stop < k and vals[stop] - vals[stop - 1] <= gap:
            stop += 1
        if stop - start > 1:
            vecs[:, start:stop] = _joint_basis(ops, vecs[:, start:stop], rng, tol)
        start = stop
    return vecs


def simultaneous_diagonalize(
    members: Sequence[np.ndarray] | OperatorFamily, tol: float = DEFAULT_TOL, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Joint eigenbasis of pairwise commuting Hermitian operators.

    Returns ``(basis, lam)`` with orthonormal columns ``basis[:, i]`` and
    ``lam[nu, i] = <b_i|E_nu|b_i>``.  Columns follow ascending eigenvalues of
    a seeded random real combination of the members.  Near-degenerate
    clusters of that combination are re-split recursively; a joint
    eigenspace on which every member is scalar is split by a seeded random
    Hermitian tie-breaker.

    Raises
    ------
    NotCommuting
        If some commutator exceeds ``tol`` in max-norm.
    """
    ops = np.asarray(members.members if isinstance(members, OperatorFamily) else members, dtype=complex)
    d = ops.shape[1]
    comm = max_commutator(list(ops))
    if comm > tol:
        raise NotCommuting(f"members do not commute (max commutator {comm:.2e} > {tol:g})")
    rng = np.random.default_rng(seed)
    vecs = normalize_phases(_joint_basis(ops, np.eye(d, dtype=complex), rng, tol))
    lam = np.einsum("ai,kab,bi->ki", vecs.conj(), ops, vecs).real
    recon = np.einsum("ki,ai,bi->kab", lam, vecs, vecs.conj())
    err = float(np.max(np.abs(recon - ops)))
    if err > 10 * tol:
        raise NotCommuting(f"joint eigenbasis does not reconstruct the members (error {err:.2e})")
    return vecs, lam
