"""Map classical feature vectors of length D^2 - 1 onto density matrices.

The generators are tensor-product Pauli strings rescaled so that
Tr(Gi Gj) = 2 delta_ij for every qubit count.  With that normalization the
Hilbert-Schmidt distance between two encoded states is exactly sqrt(2) times
the Euclidean distance between the underlying vectors, which is what lets
k-means run on density matrices unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from qhsd.states import DensityMatrix, StateError

EIGENVALUE_TOL = -1e-9


class EncodingError(ValueError):
    """Encoding produced a matrix outside the positive-semidefinite set."""


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class GeneratorBasis:
    """The D^2 - 1 traceless Hermitian generators, in a fixed order."""

    n_qubits: int
    labels: Tuple[str, ...]
    generators: np.ndarray  # shape (D^2 - 1, D, D), read-only

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def size(self) -> int:
        return self.dim ** 2 - 1


@lru_cache(maxsize=None)
def generator_basis(n_qubits: int) -> GeneratorBasis:
    """Pauli strings over n qubits (identity string excluded), lexicographic
    in the letters I < X < Y < Z, scaled by 1/sqrt(2^(n-1))."""
    if not 1 <= n_qubits <= 4:
        raise StateError(f"n_qubits={n_qubits} outside supported range 1..4")
    scale = 1.0 / np.sqrt(2.0 ** (n_qubits - 1))
    labels = []
    mats = []
    for letters in itertools.product("IXYZ", repeat=n_qubits):
        if all(c == "I" for c in letters):
            continue
        g = np.array([[1.0 + 0j]])
        for c in letters:
            g = np.kron(g, _PAULI[c])
        labels.append("".join(letters))
        mats.append(scale * g)
    stack = np.array(mats)
    stack.setflags(write=False)
    return GeneratorBasis(n_qubits, tuple(labels), stack)


def _n_qubits_for_length(length: int) -> int:
    d = int(round(np.sqrt(length + 1)))
    if d * d - 1 != length or d < 2 or (d & (d - 1)) != 0:
        raise StateError(f"feature length {length} is not D^2 - 1 for a qubit dimension")
    return int(round(np.log2(d)))


def max_ball_radius(dim: int) -> float:
    """Outer radius sqrt((D-1)/(2D)); necessary for positivity, and reached
    exactly by pure states."""
    if dim < 2:
        raise StateError(f"dim={dim} must be >= 2")
    return float(np.sqrt((dim - 1) / (2.0 * dim)))


def safe_radius(dim: int) -> float:
    """Inner radius 1/sqrt(2 D (D-1)); every vector inside encodes to a
    positive-semidefinite matrix regardless of direction."""
    if dim < 2:
        raise StateError(f"dim={dim} must be >= 2")
    return float(1.0 / np.sqrt(2.0 * dim * (dim - 1)))


def encode(u: Sequence[float], validate: bool = True) -> DensityMatrix:
    """rho = I/D + sum_i u_i G_i.

    With validate=True the smallest eigenvalue is checked; vectors outside
    the positive set raise EncodingError reporting it.
    """
    u = np.asarray(u, dtype=float)
    basis = generator_basis(_n_qubits_for_length(u.shape[0]))
    d = basis.dim
    m = np.eye(d, dtype=complex) / d + np.einsum("i,ijk->jk", u, basis.generators)
    if validate:
        lam = float(np.linalg.eigvalsh(m)[0])
        if lam < EIGENVALUE_TOL:
            raise EncodingError(f"vector encodes outside the state space: min eigenvalue {lam:.3e}")
    return DensityMatrix(m)


def decode(rho: DensityMatrix) -> np.ndarray:
    """Inverse of encode: u_i = Tr(rho G_i) / 2."""
    basis = generator_basis(rho.n_qubits)
    return np.real(np.einsum("jk,ikj->i", rho.matrix, basis.generators)) / 2.0


def hypercube_scale(dim: int, l: float) -> float:
    """Uniform factor mapping the cube [-l, l]^(D^2-1) into the safe ball."""
    if l <= 0:
        raise StateError(f"half-side l={l} must be positive")
    return safe_radius(dim) / (l * np.sqrt(dim ** 2 - 1))


def embed_hypercube(x: Sequence[float], l: float, n_qubits: Optional[int] = None) -> np.ndarray:
    """Rescale raw data from [-l, l] per component into the safe ball, so the
    encoded matrix is positive for every point of the cube."""
    x = np.asarray(x, dtype=float)
    if n_qubits is None:
        n_qubits = _n_qubits_for_length(x.shape[0])
    if np.abs(x).max(initial=0.0) > l * (1 + 1e-12):
        raise StateError(f"component magnitude exceeds l={l}")
    return x * hypercube_scale(2 ** n_qubits, l)
