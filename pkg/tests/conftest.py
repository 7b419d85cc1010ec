import sys
import numpy as np
import pytest

from schurlab.schur import SchurSequence, block_toeplitz


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_data(rng, p, q, n, norm=None):
    """Random nondegenerate data: raw coefficients rescaled so that the block
    Toeplitz matrix has the given operator norm (default uniform in
    [0.3, 0.9])."""
    raw = SchurSequence(crandn(rng, n + 1, p, q))
    target = rng.uniform(0.3, 0.9) if norm is None else norm
    scale = np.linalg.norm(block_toeplitz(raw).matrix, 2)
    return SchurSequence(raw.coeffs * (target / scale))


def random_suite(count, seed=0, pmax=3, qmax=3, nmax=5):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        p = int(rng.integers(1, pmax + 1))
        q = int(rng.integers(1, qmax + 1))
        n = int(rng.integers(0, nmax + 1))
        out.append(random_data(rng, p, q, n))
    return out


def random_disk_points(rng, count, rmin=0.05, rmax=0.95):
    r = np.sqrt(rng.uniform(rmin ** 2, rmax ** 2, count))
    return r * np.exp(2j * np.pi * rng.uniform(size=count))


def random_contraction(rng, p, q, norm=None):
    a = crandn(rng, p, q)
    target = rng.uniform(0.0, 0.95) if norm is None else norm
    s = np.linalg.norm(a, 2)
    return a * (target / s) if s > 0 else a


def scalar_seq(*values):
    return SchurSequence.scalar(values)


def lam_block(m, n, x):
    return np.kron(np.array([[x ** k for k in range(n + 1)]]), np.eye(m))


def direct_B(seq, z):
    """Independent evaluation: I + (1/z - 1) j L(1) H L(1/conj z)^*."""
    p, q, n = seq.p, seq.q, seq.n
    c = np.zeros(((n + 1) * p, (n + 1) * q), dtype=complex)
    for i in range(n + 1):
        for k in range(i + 1):
            c[i * p:(i + 1) * p, k * q:(k + 1) * q] = seq.coeffs[i - k]
    x = np.linalg.inv(np.eye(c.shape[0]) - c @ c.conj().T)
    h = np.vstack([c.conj().T, np.eye(c.shape[0])]) @ x @ np.hstack([c, np.eye(c.shape[0])])
    j = np.diag([-1.0] * q + [1.0] * p)

    def L(v):
        top = np.hstack([lam_block(q, n, v), np.zeros((q, (n + 1) * p))])
        bot = np.hstack([np.zeros((p, (n + 1) * q)), lam_block(p, n, v)])
        return np.vstack([top, bot])

    w = 1 / np.conj(z)
    return np.eye(p + q) + (1 / z - 1) * j @ L(1.0) @ h @ L(w).conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
    passed = sum(results[k].startswith("[PASS]") for k in results)
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
