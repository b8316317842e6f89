"""Density matrices for small qubit systems and the Hilbert-Schmidt distance.

Everything downstream (encoding, measurement simulation, clustering) treats
this module as the exact ground truth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_TOL = -1e-9
EQUALITY_TOL = 1e-8


class StateError(ValueError):
    """A matrix violates the density-matrix invariants, or inputs are
    otherwise unusable (bad parameter range, dimension mismatch)."""


class BellKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


_SQRT2 = np.sqrt(2.0)

_BELL_VECTORS = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) / _SQRT2,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) / _SQRT2,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) / _SQRT2,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) / _SQRT2,
}


def _validate_matrix(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    if d < 2 or (d & (d - 1)) != 0:
        raise StateError(f"dimension {d} is not a power of two >= 2")
    herm = np.abs(m - m.conj().T).max()
    if herm > HERMITICITY_TOL:
        raise StateError(f"not Hermitian: max asymmetry {herm:.3e}")
    tr = abs(m.trace() - 1.0)
    if tr > TRACE_TOL:
        raise StateError(f"trace differs from 1 by {tr:.3e}")
    lam = np.linalg.eigvalsh(m)[0]
    if lam < EIGENVALUE_TOL:
        raise StateError(f"not positive semidefinite: min eigenvalue {lam:.3e}")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite complex matrix.

    Immutable once constructed; the wrapped array is made read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_array(cls, matrix, validate: bool = True) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        if validate:
            _validate_matrix(m)
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def pure_state(vector: Sequence[complex]) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def make_bell(kind: BellKind) -> DensityMatrix:
    """Rank-1 projector onto one of the four Bell states."""
    v = _BELL_VECTORS[kind]
    return DensityMatrix(np.outer(v, v.conj()))


def make_separable(bits: str) -> DensityMatrix:
    """Computational-basis projector |b1 b2><b1 b2| for a two-bit string."""
    if bits not in ("00", "01", "10", "11"):
        raise StateError(f"invalid two-bit string {bits!r}")
    idx = int(bits, 2)
    m = np.zeros((4, 4), dtype=complex)
    m[idx, idx] = 1.0
    return DensityMatrix(m)


def make_werner(p: float) -> DensityMatrix:
    """p |Phi+><Phi+| + (1-p) I/4; positive for -1/3 <= p <= 1."""
    if not (-1.0 / 3.0 - 1e-12 <= p <= 1.0 + 1e-12):
        raise StateError(f"werner weight p={p} outside [-1/3, 1]")
    m = p * make_bell(BellKind.PHI_PLUS).matrix + (1.0 - p) * np.eye(4) / 4.0
    return DensityMatrix(m)


def make_horodecki(q: float) -> DensityMatrix:
    """q |Phi-><Phi-| + (1-q) |01><01|."""
    if not (0.0 - 1e-12 <= q <= 1.0 + 1e-12):
        raise StateError(f"horodecki weight q={q} outside [0, 1]")
    m = q * make_bell(BellKind.PHI_MINUS).matrix + (1.0 - q) * make_separable("01").matrix
    return DensityMatrix(m)


def _check_same_dim(a: DensityMatrix, b: DensityMatrix) -> None:
    if a.dim != b.dim:
        raise StateError(f"dimension mismatch: {a.dim} vs {b.dim}")


def overlap_exact(a: DensityMatrix, b: DensityMatrix) -> float:
    """First-order overlap Tr(a b)."""
    _check_same_dim(a, b)
    return float(np.real(np.trace(a.matrix @ b.matrix)))


def purity(a: DensityMatrix) -> float:
    """Tr(rho^2), between 1/D (maximally mixed) and 1 (pure)."""
    return overlap_exact(a, a)


def hsd_exact(a: DensityMatrix, b: DensityMatrix) -> float:
    """Hilbert-Schmidt distance sqrt(Tr[(a - b)^2])."""
    _check_same_dim(a, b)
    d = a.matrix - b.matrix
    return float(np.sqrt(max(0.0, np.real(np.trace(d @ d)))))


class HsdFromOverlaps(NamedTuple):
    """HSD assembled from the three first-order overlaps; `clamped` is set
    when shot noise drove the radicand negative and it was clamped to 0."""

    value: float
    clamped: bool


def hsd_from_overlaps(o11: float, o22: float, o12: float) -> HsdFromOverlaps:
    radicand = o11 + o22 - 2.0 * o12
    if radicand < 0.0:
        return HsdFromOverlaps(0.0, True)
    return HsdFromOverlaps(float(np.sqrt(radicand)), False)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.matrix, b.matrix))


def permute_qubits(a: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Relabel qubits so that new qubit i is old qubit order[i]."""
    n = a.n_qubits
    order = list(order)
    if sorted(order) != list(range(n)):
        raise StateError(f"{order} is not a permutation of 0..{n - 1}")
    t = a.matrix.reshape((2,) * (2 * n))
    t = t.transpose(order + [n + o for o in order])
    return DensityMatrix(t.reshape(a.dim, a.dim))


def states_close(a: DensityMatrix, b: DensityMatrix, tol: float = EQUALITY_TOL) -> bool:
    return hsd_exact(a, b) <= tol


def random_pure(dim: int, rng: np.random.Generator) -> DensityMatrix:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return pure_state(v)


def random_mixed(dim: int, rng: np.random.Generator) -> DensityMatrix:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = a @ a.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))


# ---------------------------------------------------------------------------
# State JSON schema shared with the CLI:
# either {"dim": D, "re": [[...]], "im": [[...]]}
# or     {"named": "bell|separable|werner|horodecki|mixed", "params": {...}}

_BELL_NAMES = {k.value: k for k in BellKind}


def state_to_json(a: DensityMatrix) -> dict:
    return {
        "dim": a.dim,
        "re": np.real(a.matrix).tolist(),
        "im": np.imag(a.matrix).tolist(),
    }


def state_from_json(obj: dict) -> DensityMatrix:
    if "named" in obj:
        name = obj["named"]
        params = obj.get("params", {})
        if name == "bell":
            kind = params.get("kind", "")
            if kind not in _BELL_NAMES:
                raise StateError(f"unknown bell kind {kind!r}")
            return make_bell(_BELL_NAMES[kind])
        if name == "separable":
            return make_separable(str(params.get("bits", "")))
        if name == "werner":
            return make_werner(float(params["p"]))
        if name == "horodecki":
            return make_horodecki(float(params["q"]))
        if name == "mixed":
            return maximally_mixed(int(params.get("dim", 4)))
        raise StateError(f"unknown named state {name!r}")
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except KeyError as exc:
        raise StateError(f"state JSON missing key {exc}") from exc
    m = re + 1j * im
    if "dim" in obj and int(obj["dim"]) != m.shape[0]:
        raise StateError("declared dim does not match matrix shape")
    return DensityMatrix.from_array(m)
