import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import hesse_fiducial, weyl_orbit
from sicmub.errors import DimMismatch, NotASic, NotCommuting
from sicmub.operator_core import (
    PAULI,
    OperatorFamily,
    VerificationReport,
    basis_projectors,
    hs_inner,
    is_informationally_complete,
    operator_from_json,
    operator_to_json,
    sic_orthogonal_basis,
    simultaneous_diagonalize,
    verify_family,
)


def tetrahedron():
    s = np.array([[0, 0, 1], [2 * np.sqrt(2) / 3, 0, -1 / 3],
                  [-np.sqrt(2) / 3, np.sqrt(2 / 3), -1 / 3], [-np.sqrt(2) / 3, -np.sqrt(2 / 3), -1 / 3]])
    return OperatorFamily(
        np.array([(PAULI["I"] + v[0] * PAULI["x"] + v[1] * PAULI["y"] + v[2] * PAULI["z"]) / 4 for v in s]),
        "sic-candidate",
    )


def random_unitary(d, rng):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_hs_inner_examples():
    assert hs_inner(np.eye(3), np.eye(3)) == 3
    assert hs_inner(PAULI["x"], PAULI["y"]) == 0
    rng = np.random.default_rng(0)
    a, b = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
    assert abs(hs_inner(a, b) - np.conj(hs_inner(b, a))) < 1e-12
    assert abs(hs_inner(a, b) - np.trace(a.conj().T @ b)) < 1e-12
    with pytest.raises(DimMismatch):
        hs_inner(np.eye(2), np.eye(3))


def test_tetrahedron_passes():
    rep = verify_family(tetrahedron())
    assert rep.passed
    assert {"hermitian", "normalization", "positivity", "trace", "self_overlap", "pair_overlap", "cubic"} <= {
        c.name for c in rep.checks
    }


def test_hesse_sic_passes():
    fam = OperatorFamily(weyl_orbit(hesse_fiducial()), "sic-candidate")
    assert verify_family(fam).passed
    assert is_informationally_complete(fam)


def test_maximally_mixed_family_fails_normalization():
    fam = OperatorFamily(np.array([np.eye(3) / 3] * 9), "sic-candidate")
    rep = verify_family(fam)
    assert not rep["normalization"].passed
    assert rep["normalization"].deviation == pytest.approx(2.0)


def test_sic_system_skips_positivity():
    # G -> 2I/d^2 - G keeps every trace identity but is no longer positive
    fam = weyl_orbit(hesse_fiducial())
    flipped = OperatorFamily(2 * np.eye(3) / 9 - fam, "sic-system")
    rep = verify_family(flipped)
    assert rep.passed and "positivity" not in rep
    assert not verify_family(OperatorFamily(flipped.members, "sic-candidate")).passed


def test_pvm_checks():
    pvm = OperatorFamily(basis_projectors(np.eye(3)), "pvm-candidate")
    assert verify_family(pvm).passed
    bad = OperatorFamily(np.array([np.eye(2) / 2, np.eye(2) / 2]), "pvm-candidate")
    rep = verify_family(bad)
    assert not rep["idempotence"].passed and not rep["orthogonality"].passed


def test_sic_orthogonal_basis_qubit():
    shifted, rep = sic_orthogonal_basis(tetrahedron())
    assert rep.info["t"] == pytest.approx(0.5 * (1 - 1 / np.sqrt(3)))
    g = np.einsum("kab,lba->kl", shifted, shifted)
    assert np.max(np.abs(g[~np.eye(4, dtype=bool)])) < 1e-12
    assert rep.passed


def test_sic_orthogonal_basis_qutrit():
    _, rep = sic_orthogonal_basis(OperatorFamily(weyl_orbit(hesse_fiducial()), "sic-candidate"))
    assert rep.passed and rep["orthogonality"].deviation < 1e-12


def test_sic_orthogonal_basis_detects_perturbation():
    members = tetrahedron().members.copy()
    members[0] = members[0] + 1e-3 * PAULI["z"]
    with pytest.raises(NotASic):
        sic_orthogonal_basis(OperatorFamily(members, "sic-candidate"))


def test_simultaneous_diagonalize_diagonal():
    diags = np.array([[0.5, 0.2, 0.3], [0.1, 0.7, 0.2], [0.4, 0.1, 0.5]])
    basis, lam = simultaneous_diagonalize([np.diag(r) for r in diags])
    perm = np.argmax(np.abs(basis), axis=0)
    assert np.allclose(np.abs(basis), np.eye(3)[:, perm])
    assert np.allclose(lam, diags[:, perm])


@pytest.mark.parametrize("seed", range(5))
def test_simultaneous_diagonalize_recovers_unitary(seed):
    rng = np.random.default_rng(seed)
    d = 4
    u = random_unitary(d, rng)
    diags = rng.uniform(size=(3, d))
    ops = [u @ np.diag(r) @ u.conj().T for r in diags]
    basis, lam = simultaneous_diagonalize(ops)
    overlap = np.abs(u.conj().T @ basis) ** 2
    assert np.allclose(np.sort(overlap, axis=0)[-1], 1, atol=1e-10)
    recon = np.einsum("ki,ai,bi->kab", lam, basis, basis.conj())
    assert np.max(np.abs(recon - np.array(ops))) < 1e-10


def test_simultaneous_diagonalize_degenerate_is_seeded():
    ops = [np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 0.0, 1.0])]
    b1, lam1 = simultaneous_diagonalize(ops, seed=3)
    b2, lam2 = simultaneous_diagonalize(ops, seed=3)
    assert np.array_equal(b1, b2) and np.array_equal(lam1, lam2)
    assert np.allclose(b1.conj().T @ b1, np.eye(3))
    # rows sum to the traces
    assert np.allclose(lam1.sum(axis=1), [2, 1])


def test_simultaneous_diagonalize_rejects_noncommuting():
    with pytest.raises(NotCommuting):
        simultaneous_diagonalize([PAULI["x"], PAULI["y"]])


def test_phase_convention():
    basis, _ = simultaneous_diagonalize([PAULI["x"]])
    for i in range(2):
        k = np.argmax(np.abs(basis[:, i]) > 1e-12)
        assert basis[k, i].imag == pytest.approx(0) and basis[k, i].real > 0


def test_json_round_trips():
    fam = tetrahedron()
    back = OperatorFamily.from_json(fam.to_json())
    assert np.array_equal(back.members, fam.members) and back.kind == fam.kind
    a = fam.members[1]
    assert np.array_equal(operator_from_json(operator_to_json(a)), a)
    bad = operator_to_json(a)
    bad["dim"] = 3
    with pytest.raises(DimMismatch):
        operator_from_json(bad)


def test_report_rows_are_one_based():
    rep = VerificationReport(1e-9)
    rep.add("a", "x = 0", 0.0)
    rep.add("b", "y = 0", 1.0)
    assert [r[0] for r in rep.rows()] == [1, 2]
    assert not rep.passed and rep.to_json()["checks"][1]["passed"] is False


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_random_commuting_povm_eigenvalue_rows(d, seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(d, rng)
    lam = rng.dirichlet(np.ones(d), size=d).T  # columns sum to 1 so the effects sum to I
    ops = np.array([u @ np.diag(r) @ u.conj().T for r in lam])
    assert verify_family(OperatorFamily(ops)).passed
    _, got = simultaneous_diagonalize(ops)
    assert np.allclose(got.sum(axis=1), np.trace(ops, axis1=1, axis2=2).real)
