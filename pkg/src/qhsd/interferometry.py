"""POVM-level simulation of the interferometric overlap measurement.

Two copies of the compared states are laid out so that photon A carries the
first qubit of each state and photon B the second.  Each photon is measured
with either the identity or the singlet projection across its two degrees of
freedom; the overlap follows from the four coincidence rates as

    O = 1 - 2 (f_SI + f_IS - 2 f_SS) / f_II

which is the trace of the pairwise SWAP (= I - 2S per photon) against the
joint state.  The same construction works for single-qubit states with one
photon pair and two rates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from qhsd.states import (
    BellKind,
    DensityMatrix,
    StateError,
    hsd_from_overlaps,
    make_bell,
    permute_qubits,
    tensor,
)

_NOISE_MODES = ("exact", "binomial", "poisson")


class EstimationError(ValueError):
    """Counts cannot be turned into an overlap estimate (e.g. f_II = 0)."""


@dataclass(frozen=True)
class NoiseModel:
    """Counting-statistics model for the simulated coincidence rates.

    exact    -> expected counts shots * p, no randomness
    binomial -> fixed shots per POVM configuration
    poisson  -> free-running counting with expected shots per configuration
    """

    mode: str = "exact"
    shots: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in _NOISE_MODES:
            raise StateError(f"unknown noise mode {self.mode!r}")
        if self.shots < 1:
            raise StateError("shots must be >= 1")


@dataclass(frozen=True)
class CoincidenceCounts:
    """The four rates of one two-qubit overlap configuration.

    Counts are integers in the stochastic modes; exact mode keeps the
    unrounded expected counts so the estimator reproduces the exact overlap.
    """

    f_II: float
    f_SI: float
    f_IS: float
    f_SS: float
    shots_per_config: int

    def as_array(self) -> np.ndarray:
        # internal binary-counting order: II, IS, SI, SS
        return np.array([self.f_II, self.f_IS, self.f_SI, self.f_SS])


@dataclass(frozen=True)
class OverlapEstimate:
    """Estimated Tr(rho1 rho2); `clamped` flags values outside [0, 1]
    (the value itself is reported unclamped)."""

    value: float
    std_error: float
    clamped: bool
    counts: CoincidenceCounts


@dataclass(frozen=True)
class EnsembleSpec:
    """Convex mixture prepared member-by-member, as when a mixed state is
    accumulated from Bell-state coincidence records."""

    members: Tuple[Tuple[float, DensityMatrix], ...]

    def __post_init__(self):
        total = sum(w for w, _ in self.members)
        if abs(total - 1.0) > 1e-12:
            raise StateError(f"ensemble weights sum to {total}, expected 1")
        for w, _ in self.members:
            if not 0.0 <= w <= 1.0:
                raise StateError(f"ensemble weight {w} outside [0, 1]")

    def average(self) -> DensityMatrix:
        m = sum(w * s.matrix for w, s in self.members)
        return DensityMatrix.from_array(m, validate=False)


_SINGLET = make_bell(BellKind.PSI_MINUS).matrix


def singlet_projector() -> np.ndarray:
    """Rank-1 projector onto (|01> - |10>)/sqrt(2) for one photon's two
    degrees of freedom."""
    return _SINGLET.copy()


def swap_operator() -> np.ndarray:
    return np.eye(4) - 2.0 * _SINGLET


def arrange_joint_state(rho1: DensityMatrix, rho2: DensityMatrix) -> DensityMatrix:
    """Joint state of the two copies, regrouped per photon: qubit k of rho1
    and qubit k of rho2 sit next to each other (photon k)."""
    if rho1.dim != rho2.dim:
        raise StateError(f"dimension mismatch: {rho1.dim} vs {rho2.dim}")
    n = rho1.n_qubits
    joint = tensor(rho1, rho2)
    order = []
    for k in range(n):
        order += [k, n + k]
    return permute_qubits(joint, order)


def _configs(n: int) -> List[Tuple[int, ...]]:
    """All identity/singlet choices per photon; 1 = singlet.  Binary counting
    order, so (0,...,0) comes first."""
    return list(itertools.product((0, 1), repeat=n))


def _config_operators(n: int) -> List[np.ndarray]:
    ident = np.eye(4)
    ops = []
    for cfg in _configs(n):
        op = np.array([[1.0]])
        for bit in cfg:
            op = np.kron(op, _SINGLET if bit else ident)
        ops.append(op)
    return ops


def _config_probabilities(rho1: DensityMatrix, rho2: DensityMatrix) -> np.ndarray:
    joint = arrange_joint_state(rho1, rho2).matrix
    return np.array(
        [float(np.real(np.trace(op @ joint))) for op in _config_operators(rho1.n_qubits)]
    )


def _config_weights(n: int) -> np.ndarray:
    """Estimator weights (-2)^(number of singlet projections)."""
    return np.array([(-2.0) ** sum(cfg) for cfg in _configs(n)])


def povm_probabilities(rho1: DensityMatrix, rho2: DensityMatrix) -> Tuple[float, float, float, float]:
    """(p_II, p_SI, p_IS, p_SS) for two-qubit inputs; first letter photon A."""
    if rho1.dim != 4 or rho2.dim != 4:
        raise StateError("povm_probabilities expects two-qubit states")
    p_ii, p_is, p_si, p_ss = _config_probabilities(rho1, rho2)
    return (p_ii, p_si, p_is, p_ss)


def von_neumann_projections(povm: str) -> List[np.ndarray]:
    """Rank-1 product projectors whose probabilities sum to the POVM's.

    II splits into the 16 computational projections, SI/IS into the singlet
    on one photon times the 4 local basis states of the other, SS is a single
    product of two singlet projections.
    """
    basis4 = [np.zeros((4, 4)) for _ in range(4)]
    for i in range(4):
        basis4[i][i, i] = 1.0
    if povm == "II":
        out = []
        for i in range(16):
            proj = np.zeros((16, 16))
            proj[i, i] = 1.0
            out.append(proj)
        return out
    if povm == "SI":
        return [np.kron(_SINGLET, b) for b in basis4]
    if povm == "IS":
        return [np.kron(b, _SINGLET) for b in basis4]
    if povm == "SS":
        return [np.kron(_SINGLET, _SINGLET)]
    raise StateError(f"unknown POVM {povm!r}")


def _stream_rng(seed: int, key: Sequence[int]) -> np.random.Generator:
    # independent substream per (seed, key...) so draws are order-independent
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in key]])


def _draw_counts(
    probs: np.ndarray, noise: NoiseModel, stream_key: Sequence[int] = ()
) -> np.ndarray:
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    if noise.mode == "exact":
        return noise.shots * probs
    counts = np.empty(len(probs))
    for i, p in enumerate(probs):
        rng = _stream_rng(noise.seed, (*stream_key, i))
        if noise.mode == "binomial":
            counts[i] = rng.binomial(noise.shots, p)
        else:
            counts[i] = rng.poisson(noise.shots * p)
    return counts


def sample_counts(
    probabilities: Sequence[float], noise: NoiseModel, stream_key: Sequence[int] = ()
) -> CoincidenceCounts:
    """Draw the four two-qubit coincidence rates for given POVM
    probabilities (p_II, p_SI, p_IS, p_SS)."""
    p_ii, p_si, p_is, p_ss = probabilities
    counts = _draw_counts(np.array([p_ii, p_is, p_si, p_ss]), noise, stream_key)
    f_ii, f_is, f_si, f_ss = counts
    return CoincidenceCounts(f_ii, f_si, f_is, f_ss, noise.shots)


def _estimate_from_arrays(
    counts: np.ndarray, weights: np.ndarray, shots: int, mode: str
) -> Tuple[float, float]:
    f0 = counts[0]
    if f0 <= 0:
        raise EstimationError("f_II = 0: cannot normalize the overlap estimate")
    rest = counts[1:]
    wrest = weights[1:]
    acc = float(wrest @ rest)
    value = 1.0 + acc / f0
    if mode == "exact":
        return value, 0.0
    if mode == "binomial":
        phat = np.clip(counts / shots, 0.0, 1.0)
        var = shots * phat * (1.0 - phat)
    else:
        var = counts.astype(float)
    var_value = float((wrest / f0) ** 2 @ var[1:]) + (acc / f0 ** 2) ** 2 * var[0]
    return value, float(np.sqrt(var_value))


def estimate_overlap(counts: CoincidenceCounts, mode: str = "binomial") -> OverlapEstimate:
    """Overlap and first-order-propagated uncertainty from coincidence rates."""
    arr = counts.as_array()
    value, err = _estimate_from_arrays(arr, _config_weights(2), counts.shots_per_config, mode)
    return OverlapEstimate(value, err, not 0.0 <= value <= 1.0, counts)


def measure_overlap(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    noise: NoiseModel,
    stream_key: Sequence[int] = (),
) -> OverlapEstimate:
    n = rho1.n_qubits
    probs = _config_probabilities(rho1, rho2)
    counts = _draw_counts(probs, noise, stream_key)
    value, err = _estimate_from_arrays(counts, _config_weights(n), noise.shots, noise.mode)
    if n == 2:
        f_ii, f_is, f_si, f_ss = counts
        cc = CoincidenceCounts(f_ii, f_si, f_is, f_ss, noise.shots)
    else:
        # single-photon-pair geometry: only the I and S rates exist
        cc = CoincidenceCounts(counts[0], counts[1], 0.0, 0.0, noise.shots)
    return OverlapEstimate(value, err, not 0.0 <= value <= 1.0, cc)


@dataclass(frozen=True)
class HsdMeasurement:
    """Result of the three-configuration distance measurement."""

    value: float
    d2: float
    d2_std_error: float
    clamped: bool
    overlaps: Tuple[OverlapEstimate, OverlapEstimate, OverlapEstimate]


def measure_hsd(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    noise: NoiseModel,
    stream_key: Sequence[int] = (),
) -> HsdMeasurement:
    """Measure O(1,1), O(2,2), O(1,2) and combine them into the distance."""
    if rho1.dim != rho2.dim:
        raise StateError(f"dimension mismatch: {rho1.dim} vs {rho2.dim}")
    o11 = measure_overlap(rho1, rho1, noise, (*stream_key, 0))
    o22 = measure_overlap(rho2, rho2, noise, (*stream_key, 1))
    o12 = measure_overlap(rho1, rho2, noise, (*stream_key, 2))
    value, clamped = hsd_from_overlaps(o11.value, o22.value, o12.value)
    d2 = o11.value + o22.value - 2.0 * o12.value
    d2_err = float(
        np.sqrt(o11.std_error ** 2 + o22.std_error ** 2 + 4.0 * o12.std_error ** 2)
    )
    return HsdMeasurement(value, d2, d2_err, clamped, (o11, o22, o12))


def ensemble_measure(
    spec1: EnsembleSpec,
    spec2: EnsembleSpec,
    noise: NoiseModel,
    stream_key: Sequence[int] = (),
) -> OverlapEstimate:
    """Overlap of two convex mixtures, accumulated member pair by member
    pair with shots apportioned by the weight products."""
    n = spec1.members[0][1].n_qubits
    if n != 2:
        raise StateError("ensemble_measure expects two-qubit members")
    total = np.zeros(4)
    shots_total = 0
    for i, (w1, s1) in enumerate(spec1.members):
        for j, (w2, s2) in enumerate(spec2.members):
            w = w1 * w2
            probs = _config_probabilities(s1, s2)
            if noise.mode == "exact":
                total += noise.shots * w * probs
                shots_total = noise.shots
            else:
                pair_shots = int(round(noise.shots * w))
                if pair_shots == 0:
                    continue
                pair_noise = NoiseModel(noise.mode, pair_shots, noise.seed)
                total += _draw_counts(probs, pair_noise, (*stream_key, i, j))
                shots_total += pair_shots
    value, err = _estimate_from_arrays(total, _config_weights(2), shots_total, noise.mode)
    f_ii, f_is, f_si, f_ss = total
    cc = CoincidenceCounts(f_ii, f_si, f_is, f_ss, shots_total)
    return OverlapEstimate(value, err, not 0.0 <= value <= 1.0, cc)


def plan_measurements(n_qubits: int, method: str) -> int:
    """POVM-setting count of one distance: 3 overlap configurations with 4
    POVMs each, against the 2(D^2 - 1) + 2 settings of two state
    reconstructions."""
    if n_qubits < 1:
        raise StateError("n_qubits must be >= 1")
    if method == "overlap":
        return 12
    if method == "tomography":
        d = 2 ** n_qubits
        return 2 * (d ** 2 - 1) + 2
    raise StateError(f"unknown method {method!r}")
