import sys

import numpy as np
import pytest

from sicmub.finite_field import make_field


def poly_mulmod(a, b, modulus, p):
    """Schoolbook product of coefficient lists (constant first), reduced mod a monic modulus."""
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    n = len(modulus) - 1
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for i, m in enumerate(modulus):
                prod[k - n + i] = (prod[k - n + i] - c * m) % p
    out = prod[:n] + [0] * max(0, n - len(prod))
    return out[:n]


def hesse_fiducial():
    """(0, 1, -1)/sqrt(2): a standard qutrit SIC fiducial."""
    return np.array([0, 1, -1], dtype=complex) / np.sqrt(2)


def weyl_orbit(psi):
    """The d^2 operators X^a Z^b |psi><psi| Z^-b X^-a / d, written out directly."""
    d = len(psi)
    w = np.exp(2j * np.pi / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(w ** np.arange(d))
    T = np.outer(psi, psi.conj())
    out = []
    for a in range(d):
        for b in range(d):
            D = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
            out.append(D @ T @ D.conj().T / d)
    return np.array(out)


@pytest.fixture(scope="session")
def gf3():
    return make_field(3)


@pytest.fixture(scope="session")
def gf5():
    return make_field(5)


@pytest.fixture(scope="session")
def gf9():
    return make_field(3, 2, [1, 0, 1])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
