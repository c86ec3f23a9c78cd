"""Dense complex-operator algebra on small multi-partite Hilbert spaces.

Everything in the package is built on these types: a Hermitian operator with a
validated tolerance, density matrices and POVM effects as thin wrappers, and a
subsystem-dimension record for tensor factorizations.  The global convention
is that the *left* tensor factor is the most significant index, fixed once so
circuits and effects agree on wire ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
MAX_DIMENSION = 4096


class DimensionLimitError(ValueError):
    """Raised when a tensor product would exceed the configured max dimension."""


class InvariantViolation(ValueError):
    """Raised when a domain type is constructed from data violating its invariants."""


def _as_complex_matrix(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantViolation(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class HermitianOperator:
    """A dim x dim complex matrix that is Hermitian within ``herm_tol``."""

    entries: np.ndarray
    herm_tol: float = DEFAULT_TOL

    def __post_init__(self):
        a = _as_complex_matrix(self.entries)
        object.__setattr__(self, "entries", a)
        if a.shape[0] < 1:
            raise InvariantViolation("dimension must be >= 1")
        dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
        if dev > self.herm_tol:
            raise InvariantViolation(f"operator deviates from Hermitian by {dev:.3e} > {self.herm_tol:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def symmetrized(self) -> np.ndarray:
        """Entries with the (tolerated) anti-Hermitian noise projected out."""
        return (self.entries + self.entries.conj().T) / 2.0


@dataclass(frozen=True)
class DensityMatrix:
    """A unit-trace positive-semidefinite operator, within declared tolerances."""

    op: HermitianOperator
    psd_tol: float = DEFAULT_TOL
    trace_tol: float = DEFAULT_TOL

    def __post_init__(self):
        w = np.linalg.eigvalsh(self.op.symmetrized())
        if w[0] < -self.psd_tol:
            raise InvariantViolation(f"minimum eigenvalue {w[0]:.3e} < -{self.psd_tol:.3e}")
        tr = float(np.trace(self.op.entries).real)
        if abs(tr - 1.0) > self.trace_tol:
            raise InvariantViolation(f"trace {tr!r} deviates from 1 beyond {self.trace_tol:.3e}")

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries


@dataclass(frozen=True)
class PovmEffect:
    """An operator with spectrum in [0, 1] up to tolerance."""

    op: HermitianOperator
    bound_tol: float = DEFAULT_TOL

    def __post_init__(self):
        w = np.linalg.eigvalsh(self.op.symmetrized())
        if w[0] < -self.bound_tol or w[-1] > 1.0 + self.bound_tol:
            raise InvariantViolation(
                f"effect spectrum [{w[0]:.3e}, {w[-1]:.3e}] outside [0, 1] beyond {self.bound_tol:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered local dimensions of a tensor factorization, left factor most significant."""

    dims: tuple

    def __init__(self, dims: Iterable[int]):
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if not self.dims or any(d < 1 for d in self.dims):
            raise InvariantViolation("all local dimensions must be >= 1")

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def check_matches(self, dim: int):
        if self.total != dim:
            raise InvariantViolation(f"product of local dims {self.total} != operator dim {dim}")

    def __len__(self) -> int:
        return len(self.dims)


def operator(entries, herm_tol: float = DEFAULT_TOL) -> HermitianOperator:
    return HermitianOperator(_as_complex_matrix(entries), herm_tol)


def density(entries, psd_tol: float = DEFAULT_TOL, trace_tol: float = DEFAULT_TOL) -> DensityMatrix:
    return DensityMatrix(operator(entries), psd_tol, trace_tol)


def effect(entries, bound_tol: float = DEFAULT_TOL) -> PovmEffect:
    return PovmEffect(operator(entries), bound_tol)


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def tensor_product(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_DIMENSION) -> np.ndarray:
    """Kronecker product with the left factor as the most significant index."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] * b.shape[0] > max_dim:
        raise DimensionLimitError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds limit {max_dim}"
        )
    return np.kron(a, b)


def tensor_many(factors: Sequence[np.ndarray], max_dim: int = MAX_DIMENSION) -> np.ndarray:
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = tensor_product(out, f, max_dim)
    return out


def partial_trace(a: np.ndarray, dims: SubsystemDims, keep: Iterable[int]) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``; kept order is preserved."""
    a = np.asarray(a, dtype=complex)
    dims.check_matches(a.shape[0])
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    for k in keep:
        if k < 0 or k >= n:
            raise IndexError(f"subsystem index {k} out of range for {n} subsystems")
    shape = list(dims.dims) + list(dims.dims)
    t = a.reshape(shape)
    traced = [i for i in range(n) if i not in keep]
    perm = keep + traced + [n + k for k in keep] + [n + i for i in traced]
    d_keep = math.prod(dims.dims[k] for k in keep) if keep else 1
    d_tr = math.prod(dims.dims[i] for i in traced) if traced else 1
    t = t.transpose(perm).reshape(d_keep, d_tr, d_keep, d_tr)
    return np.einsum("ikjk->ij", t)


def partial_transpose(a: np.ndarray, dims: SubsystemDims, subsystem: int) -> np.ndarray:
    """Transpose of one tensor factor; an involution that preserves Hermiticity."""
    a = np.asarray(a, dtype=complex)
    dims.check_matches(a.shape[0])
    n = len(dims)
    if subsystem < 0 or subsystem >= n:
        raise IndexError(f"subsystem index {subsystem} out of range for {n} subsystems")
    shape = list(dims.dims) + list(dims.dims)
    t = a.reshape(shape)
    perm = list(range(2 * n))
    perm[subsystem], perm[n + subsystem] = perm[n + subsystem], perm[subsystem]
    return t.transpose(perm).reshape(a.shape)


def herm_eig(a: np.ndarray | HermitianOperator, herm_tol: float = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian operator, descending and deterministic.

    Returns ``(w, v)`` with ``w`` sorted descending and ``v`` the matching
    unitary (columns are eigenvectors).  Ties between degenerate eigenvalues
    are broken by lexicographic order of the eigenvector entries, and each
    eigenvector's phase is fixed so its first significant component is real
    positive, so repeated runs give identical output.
    """
    if isinstance(a, HermitianOperator):
        m = a.symmetrized()
    else:
        m = np.asarray(a, dtype=complex)
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        if dev > herm_tol * scale:
            raise InvariantViolation(f"input deviates from Hermitian by {dev:.3e}")
        m = (m + m.conj().T) / 2.0
    w, v = np.linalg.eigh(m)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    # Deterministic phases.
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.argmax(np.abs(col) > 1e-12)
        pivot = col[idx]
        if abs(pivot) > 0:
            v[:, j] = col * (abs(pivot) / pivot)
    # Lexicographic order inside (numerically) degenerate groups.
    i = 0
    d = len(w)
    tol = 1e-12 * max(1.0, float(abs(w[0])) if d else 1.0)
    while i < d:
        j = i + 1
        while j < d and abs(w[j] - w[i]) <= tol:
            j += 1
        if j - i > 1:
            block = v[:, i:j]
            keys = [
                tuple(np.round(np.ascontiguousarray(block[:, c]).view(float), 9))
                for c in range(j - i)
            ]
            order = sorted(range(j - i), key=lambda c: keys[c])
            v[:, i:j] = block[:, order]
        i = j
    return w, v


def reconstruction_residual(a: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - (v * w) @ v.conj().T)))


def operator_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = herm_eig(a, herm_tol=1e-6)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def trace_norm(a: np.ndarray) -> float:
    w = np.linalg.eigvalsh((np.asarray(a, dtype=complex) + np.asarray(a).conj().T) / 2.0)
    return float(np.sum(np.abs(w)))


def state_distances(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray):
    """Fidelity, trace distance and trace-norm difference between two states.

    ``fidelity`` follows the square-root convention ``|| sqrt(rho) sqrt(sigma) ||_1``
    so the Fuchs-van-de-Graaf sandwich ``1 - F <= TD <= sqrt(1 - F^2)`` holds.
    """
    r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    s = sigma.entries if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    if r.shape != s.shape:
        raise InvariantViolation(f"dimension mismatch {r.shape} vs {s.shape}")
    sr = operator_sqrt(r)
    ss = operator_sqrt(s)
    fid = float(np.sum(np.linalg.svd(sr @ ss, compute_uv=False)))
    fid = min(max(fid, 0.0), 1.0 + 1e-12)
    tnd = trace_norm(r - s)
    return min(fid, 1.0), tnd / 2.0, tnd


def fidelity(rho, sigma) -> float:
    return state_distances(rho, sigma)[0]


def trace_distance(rho, sigma) -> float:
    return state_distances(rho, sigma)[1]


# ---------------------------------------------------------------------------
# Convenience constructors
# ---------------------------------------------------------------------------

def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)

def basis_state(dim: int, index: int) -> np.ndarray:
    """Projector |index><index| in dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return np.outer(v, v.conj())

def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim

def diagonal_state(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    return np.diag(p.astype(complex))

def ebit() -> np.ndarray:
    """The two-qubit maximally entangled state (|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return np.outer(v, v.conj())

def maximally_entangled(local_dim: int) -> np.ndarray:
    v = np.zeros(local_dim * local_dim, dtype=complex)
    for i in range(local_dim):
        v[i * local_dim + i] = 1.0 / math.sqrt(local_dim)
    return np.outer(v, v.conj())


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def haar_state_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via Ginibre + phase-fixed QR."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = haar_state_vector(dim, rng)
    return np.outer(v, v.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full-rank (or rank-limited) state from a Ginibre factor."""
    k = rank or dim
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2.0


# ---------------------------------------------------------------------------
# JSON interchange: {"dim": d, "re": [[...]], "im": [[...]]}
# ---------------------------------------------------------------------------

def operator_to_json(a: np.ndarray | HermitianOperator) -> str:
    m = a.entries if isinstance(a, HermitianOperator) else np.asarray(a, dtype=complex)
    payload = {
        "dim": int(m.shape[0]),
        "re": [[float(x) for x in row] for row in m.real],
        "im": [[float(x) for x in row] for row in m.imag],
    }
    return json.dumps(payload)


def operator_from_json(text: str) -> np.ndarray:
    payload = json.loads(text)
    d = int(payload["dim"])
    re = np.asarray(payload["re"], dtype=float)
    im = np.asarray(payload["im"], dtype=float)
    if re.shape != (d, d) or im.shape != (d, d):
        raise InvariantViolation(f"matrix blocks do not match declared dim {d}")
    return re + 1j * im


def dims_to_json(dims: SubsystemDims) -> str:
    return json.dumps({"dims": list(dims.dims)})


def dims_from_json(text: str) -> SubsystemDims:
    return SubsystemDims(json.loads(text)["dims"])
