"""Weyl-Heisenberg representation on l^2(F) and covariant phase-space observables.

Rows and columns of every d x d matrix are indexed by field elements in
element order.  All functions require odd characteristic, since the Weyl
operators use 2^-1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import CharacteristicTwo, NoConvergence, NotAState, SizeTooLarge
from .finite_field import FieldSpec
from .operator_core import (
    OperatorFamily,
    VerificationReport,
    hermitize,
    normalize_phases,
    verify_family,
)
from .phase_space import PhasePoint, phase_space

log = logging.getLogger(__name__)

Q_MATERIALIZE_MAX = 5


def _require_odd(field: FieldSpec) -> None:
    if field.p == 2:
        raise CharacteristicTwo("Weyl operators need 2^-1; characteristic 2 is excluded")


@lru_cache(maxsize=None)
def weyl_table(field: FieldSpec) -> np.ndarray:
    """All W(v) stacked in canonical point order, shape (q^2, q, q).

    [W(v) f](x) = omega^Tr[v2 (x - v1/2)] f(x - v1).
    """
    _require_odd(field)
    ps = phase_space(field)
    q = ps.q
    add, mul, neg, tr = field.add_table, field.mul_table, field.neg_table, field.trace_table
    half = field.half()
    x = np.arange(q)
    out = np.zeros((q * q, q, q), dtype=complex)
    for v in range(q * q):
        v1, v2 = ps.v1[v], ps.v2[v]
        shifted = add[x, neg[v1]]  # x - v1
        arg = mul[v2, add[x, neg[mul[half, v1]]]]  # v2 (x - v1/2)
        out[v, x, shifted] = ps.roots[tr[arg] % field.p]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class WeylOperator:
    point: PhasePoint
    matrix: np.ndarray


def weyl_operator(v: PhasePoint) -> WeylOperator:
    return WeylOperator(v, weyl_table(v.field)[v.index].copy())


@lru_cache(maxsize=None)
def mub_projectors(field: FieldSpec) -> np.ndarray:
    """P^L(v + L) for every line and coset, shape (q+1, q, q, q).

    Index order is (line, coset coordinate t, row, col), with lines and
    cosets in the canonical order of :mod:`sicmub.phase_space`.
    P^L(v+L) = (1/q) sum_{l in L} <v|l> W(l), with v any point of the coset.
    """
    _require_odd(field)
    ps, w = phase_space(field), weyl_table(field)
    q = ps.q
    out = np.zeros((q + 1, q, q, q), dtype=complex)
    for k, line in enumerate(ps.lines):
        pts = np.array(line.points)
        for coset in ps.cosets(k):
            chars = ps.chars[coset.representative, pts]
            out[k, coset.t] = np.tensordot(chars, w[pts], axes=1) / q
    out.setflags(write=False)
    return out


def mub_pvm(field: FieldSpec, line_index: int) -> OperatorFamily:
    """The rank-1 PVM P^L on V/L for the ``line_index``-th line."""
    ps = phase_space(field)
    labels = [f"t={t}" for t in range(ps.q)]
    return OperatorFamily(mub_projectors(field)[line_index].copy(), "pvm-candidate", labels)


def projectors_to_basis(projs: np.ndarray) -> np.ndarray:
    """Unit vectors spanning rank-1 projectors, as columns with normalized phases."""
    cols = []
    for pr in projs:
        vals, vecs = np.linalg.eigh(hermitize(pr))
        cols.append(vecs[:, -1])
    return normalize_phases(np.stack(cols, axis=1))


def mub_bases(field: FieldSpec) -> list[np.ndarray]:
    """The q+1 mutually unbiased bases; column t spans P^L(t)."""
    return [projectors_to_basis(p) for p in mub_projectors(field)]


def is_state(T: np.ndarray, tol: float = 1e-10) -> bool:
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        return False
    if np.max(np.abs(T - T.conj().T)) > tol or abs(np.trace(T) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(hermitize(T))[0] >= -tol)


@dataclass
class CovariantObservable:
    """G_T(v) = W(v) T W(v)^dagger / |F| for every phase point v."""

    field: FieldSpec
    T: np.ndarray
    members: np.ndarray

    def family(self) -> OperatorFamily:
        return OperatorFamily(self.members, "sic-candidate")


def covariant_observable(T: np.ndarray, field: FieldSpec) -> CovariantObservable:
    _require_odd(field)
    T = np.asarray(T, dtype=complex)
    if T.shape != (field.size, field.size) or not is_state(T):
        raise NotAState("generator must be positive semidefinite with unit trace")
    w = weyl_table(field)
    members = np.einsum("vab,bc,vdc->vad", w, T, w.conj()) / field.size
    return CovariantObservable(field, T, members)


@dataclass
class LMarginal:
    line_index: int
    members: np.ndarray  # (q, d, d), indexed by coset coordinate t
    weights: np.ndarray  # Lambda_T^L(t), a probability vector
    difference: np.ndarray  # difference[t, s] = coordinate of t - s

    def family(self) -> OperatorFamily:
        return OperatorFamily(self.members, "povm-candidate", [f"t={t}" for t in range(len(self.members))])

    def smearing_matrix(self) -> np.ndarray:
        """Lambda[t_v][t_w] = Lambda_T^L(v - w + L)."""
        return self.weights[self.difference]


def l_marginal(obs: CovariantObservable, line_index: int) -> LMarginal:
    """G_T^L(v+L) = sum_{l in L} G_T(v + l) with smearing weights tr[T P^L(-v+L)]."""
    field = obs.field
    ps = phase_space(field)
    q = ps.q
    t = ps.coset_labels[line_index]
    members = np.zeros((q, q, q), dtype=complex)
    np.add.at(members, t, obs.members)
    projs = mub_projectors(field)[line_index]
    neg = field.neg_table
    weights = np.array([np.trace(obs.T @ projs[neg[k]]).real for k in range(q)])
    sub = field.add_table[np.arange(q)[:, None], neg[np.arange(q)][None, :]]  # t_v - t_w
    return LMarginal(line_index, members, weights, sub)


def marginals(obs: CovariantObservable) -> list[LMarginal]:
    return [l_marginal(obs, k) for k in range(obs.field.size + 1)]


def q_observable(field: FieldSpec, line_index: int) -> np.ndarray:
    """Q^L(u+L) = sum_w P^L(u+w+L) (x) P^L(w+L), shape (q, q^2, q^2)."""
    q = field.size
    projs = mub_projectors(field)[line_index]
    add = field.add_table
    out = np.zeros((q, q * q, q * q), dtype=complex)
    for u in range(q):
        for w in range(q):
            out[u] += np.kron(projs[add[u, w]], projs[w])
    return out


def q_probabilities(T: np.ndarray, field: FieldSpec, line_index: int) -> np.ndarray:
    """tr[(T (x) T) Q^L(u+L)] for each coset coordinate u."""
    q = field.size
    if q <= Q_MATERIALIZE_MAX:
        TT = np.kron(T, T)
        return np.einsum("ab,uba->u", TT, q_observable(field, line_index)).real
    projs = mub_projectors(field)[line_index]
    probs = np.einsum("ab,tba->t", T, projs).real
    add = field.add_table
    return np.array([sum(probs[add[u, w]] * probs[w] for w in range(q)) for u in range(q)])


def weyl_expectations(T: np.ndarray, field: FieldSpec) -> np.ndarray:
    """|tr[T W(v)]|^2 over V in canonical order."""
    w = weyl_table(field)
    return np.abs(np.einsum("ab,vba->v", T, w)) ** 2


def sic_condition_report(T: np.ndarray, field: FieldSpec, tol: float = 1e-8) -> VerificationReport:
    """Evaluate the four equivalent characterizations of a SIC covariant observable.

    (i) G_T passes the SIC checks; (ii) same-marginal overlaps
    (1 + delta)/(q + 1); (iii) tr[(T (x) T) Q^L] = (1 + delta_0)/(q + 1);
    (iv) |tr T W(v)|^2 = (1 + q delta_0)/(q + 1).  ``info['conditions']``
    holds the four booleans; ``info['agree']`` says whether they coincide.
    """
    obs = covariant_observable(T, field)
    q = field.size
    rep = VerificationReport(tol)

    fam = verify_family(obs.family(), tol)
    dev_i = max(c.deviation if c.name != "positivity" else 0.0 for c in fam.checks)
    cond_i = fam.passed
    rep.add("(i) G_T is SIC", "all SIC checks", dev_i)
    rep.checks[-1].passed = cond_i

    dev_ii = 0.0
    target_ii = (1 + np.eye(q)) / (q + 1)
    for m in marginals(obs):
        flat = m.members.reshape(q, -1)
        gram = (flat.conj() @ flat.T).real
        dev_ii = max(dev_ii, float(np.max(np.abs(gram - target_ii))))
    rep.add("(ii) marginal self-overlaps", "(1 + delta)/(q + 1)", dev_ii)

    target_iii = np.full(q, 1 / (q + 1))
    target_iii[0] = 2 / (q + 1)
    dev_iii = max(float(np.max(np.abs(q_probabilities(obs.T, field, k) - target_iii))) for k in range(q + 1))
    rep.add("(iii) two-copy difference distribution", "(1 + delta_0)/(q + 1)", dev_iii)

    target_iv = np.full(q * q, 1 / (q + 1))
    target_iv[0] = 1.0
    dev_iv = float(np.max(np.abs(weyl_expectations(obs.T, field) - target_iv)))
    rep.add("(iv) Weyl expectations", "(1 + q delta_0)/(q + 1)", dev_iv)

    conds = [c.passed for c in rep.checks]
    rep.info = {"conditions": conds, "agree": len(set(conds)) == 1, "field": field.to_json()}
    return rep


# -- fiducial search ----------------------------------------------------------

@dataclass
class FiducialResult:
    field: FieldSpec
    psi: np.ndarray
    residual: float
    restart: int
    converged: bool

    @property
    def T(self) -> np.ndarray:
        return np.outer(self.psi, self.psi.conj())

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "psi": [[float(z.real), float(z.imag)] for z in self.psi],
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, data: dict) -> FiducialResult:
        field = FieldSpec.from_json(data["field"])
        psi = np.array([complex(re, im) for re, im in data["psi"]])
        return cls(field, psi, float(data.get("residual", np.nan)), -1, True)


class _FiducialObjective:
    """Residuals r_v = |<psi|W(v)|psi>|^2 / |psi|^4 - 1/(q+1) over v != 0."""

    def __init__(self, field: FieldSpec):
        self.q = field.size
        self.w = weyl_table(field)[1:]
        self.target = 1 / (self.q + 1)

    def split(self, x):
        return x[: self.q] + 1j * x[self.q:]

    def residuals(self, x):
        psi = self.split(x)
        n = np.vdot(psi, psi).real
        a = np.einsum("a,vab,b->v", psi.conj(), self.w, psi)
        return np.abs(a) ** 2 / n**2 - self.target

    def jacobian(self, x):
        psi = self.split(x)
        n = np.vdot(psi, psi).real
        wpsi = self.w @ psi
        whpsi = np.einsum("vba,b->va", self.w.conj(), psi)
        a = wpsi @ psi.conj()
        g = np.abs(a) ** 2 / n**2
        # d g / d conj(psi), Wirtinger
        dg = (a.conj()[:, None] * wpsi + a[:, None] * whpsi) / n**2 - 2 * g[:, None] * psi[None, :] / n
        return np.concatenate([2 * dg.real, 2 * dg.imag], axis=1)

    def value(self, x):
        r = self.residuals(x)
        return float(r @ r)

    def gradient(self, x):
        return 2 * self.residuals(x) @ self.jacobian(x)


def fiducial_search(
    field: FieldSpec,
    seed: int = 0,
    max_iters: int = 2000,
    restarts: int = 32,
    target: float = 1e-24,
    strict: bool = False,
) -> FiducialResult:
    """Seeded multistart search for a Weyl-Heisenberg SIC fiducial.

    Each restart runs L-BFGS on the squared residual of the Weyl expectation
    condition, then polishes with Levenberg-Marquardt.  Restarts are taken
    in seed order and the search stops early once ``target`` is reached;
    the best residual wins, ties going to the earlier restart.
    """
    _require_odd(field)
    if field.size > 9:
        raise SizeTooLarge(f"fiducial search is limited to dimension <= 9, got {field.size}")
    obj = _FiducialObjective(field)
    q = field.size
    best = None
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        x0 = rng.normal(size=2 * q)
        x0 /= np.linalg.norm(x0)
        res = minimize(obj.value, x0, jac=obj.gradient, method="L-BFGS-B",
                       options={"maxiter": max_iters, "gtol": 1e-14, "ftol": 1e-16})
        x = res.x / np.linalg.norm(res.x)
        if obj.value(x) < 1e-6:
            polished = least_squares(obj.residuals, x, jac=obj.jacobian, method="lm",
                                     xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * q)
            if obj.value(polished.x) <= obj.value(x):
                x = polished.x / np.linalg.norm(polished.x)
        val = obj.value(x)
        if best is None or val < best[0]:
            best = (val, k, x)
        if val <= target:
            break
    val, k, x = best
    psi = normalize_phases(obj.split(x)[:, None])[:, 0]
    psi /= np.linalg.norm(psi)
    converged = val <= 1e-8
    if not converged:
        msg = f"fiducial search for d={q} ended with residual {val:.3e}"
        if strict:
            raise NoConvergence(msg)
        log.warning(msg)
    return FiducialResult(field, psi, float(obj.value(np.concatenate([psi.real, psi.imag]))), k, converged)
