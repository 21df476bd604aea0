import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def fock_ops(cutoff):
    """Annihilators a (cavity) and b (exciton) on a truncated product space.

    Product index is ``na * cutoff + nb``.
    """
    lower = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    eye = np.eye(cutoff)
    return np.kron(lower, eye), np.kron(eye, lower)


def product_index(na, nb, cutoff):
    return na * cutoff + nb


def full_hamiltonian(params, cutoff):
    """Two-mode Hamiltonian built from operator products, no sector logic."""
    a, b = fock_ops(cutoff)
    ad, bd = a.T, b.T
    return (params.omega1 * ad @ a + params.omega2 * bd @ b + params.g * (ad @ b + bd @ a)
            + params.a_int * bd @ bd @ b @ b
            - params.nu * (ad @ bd @ b @ b + bd @ bd @ a @ b))


def project_to_sector(op, n_total, cutoff, n_total_out=None):
    """Matrix elements between Fock states (i photons, N - i excitons)."""
    n_out = n_total if n_total_out is None else n_total_out
    rows = [product_index(i, n_out - i, cutoff) for i in range(n_out + 1)]
    cols = [product_index(i, n_total - i, cutoff) for i in range(n_total + 1)]
    return op[np.ix_(rows, cols)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def _report(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    return _report
