import numpy as np
import pytest

from qhsd.interferometry import (
    CoincidenceCounts,
    EnsembleSpec,
    EstimationError,
    NoiseModel,
    arrange_joint_state,
    ensemble_measure,
    estimate_overlap,
    measure_hsd,
    measure_overlap,
    plan_measurements,
    povm_probabilities,
    sample_counts,
    singlet_projector,
    swap_operator,
    von_neumann_projections,
)
from qhsd.states import (
    BellKind,
    StateError,
    hsd_exact,
    make_bell,
    make_separable,
    make_werner,
    maximally_mixed,
    overlap_exact,
    pure_state,
    random_mixed,
    tensor,
)


def test_singlet_projector_properties():
    s = singlet_projector()
    assert np.abs(s @ s - s).max() < 1e-14
    assert np.trace(s) == pytest.approx(1.0, abs=1e-14)
    assert np.real(np.trace(s @ (np.eye(4) / 4))) == pytest.approx(0.25, abs=1e-14)


def test_identity_minus_two_singlets_is_swap():
    swap = np.zeros((4, 4))
    swap[0, 0] = swap[3, 3] = swap[1, 2] = swap[2, 1] = 1.0
    assert np.abs(np.eye(4) - 2 * singlet_projector() - swap).max() < 1e-12
    assert np.abs(swap_operator() - swap).max() < 1e-12


def test_arrange_joint_state():
    mm = maximally_mixed(4)
    assert hsd_exact(arrange_joint_state(mm, mm), maximally_mixed(16)) < 1e-12
    out = arrange_joint_state(make_separable("00"), make_separable("11"))
    expected = np.zeros((16, 16))
    expected[0b0101, 0b0101] = 1.0  # photon-grouped order (pol_A, spa_A, pol_B, spa_B)
    assert np.abs(out.matrix - expected).max() < 1e-14
    rng = np.random.default_rng(0)
    a, b = random_mixed(4, rng), random_mixed(4, rng)
    ev1 = np.sort(np.linalg.eigvalsh(tensor(a, b).matrix))
    ev2 = np.sort(np.linalg.eigvalsh(arrange_joint_state(a, b).matrix))
    assert np.abs(ev1 - ev2).max() < 1e-10
    with pytest.raises(StateError):
        arrange_joint_state(mm, maximally_mixed(2))


def test_povm_probabilities_maximally_mixed():
    mm = maximally_mixed(4)
    p_ii, p_si, p_is, p_ss = povm_probabilities(mm, mm)
    assert p_ii == pytest.approx(1.0, abs=1e-12)
    assert p_si == pytest.approx(0.25, abs=1e-12)
    assert p_is == pytest.approx(0.25, abs=1e-12)
    assert p_ss == pytest.approx(1 / 16, abs=1e-12)


def test_povm_probabilities_identity_random_pairs():
    rng = np.random.default_rng(1)
    for _ in range(300):
        a, b = random_mixed(4, rng), random_mixed(4, rng)
        p_ii, p_si, p_is, p_ss = povm_probabilities(a, b)
        est = 1.0 - 2.0 * (p_si + p_is - 2.0 * p_ss)
        assert abs(est - overlap_exact(a, b)) < 1e-9
        for p in (p_ii, p_si, p_is, p_ss):
            assert -1e-12 <= p <= 1.0 + 1e-12


def test_povm_probabilities_pure_self():
    rng = np.random.default_rng(2)
    psi = pure_state(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    p_ii, p_si, p_is, p_ss = povm_probabilities(psi, psi)
    assert 1.0 - 2.0 * (p_si + p_is - 2.0 * p_ss) == pytest.approx(1.0, abs=1e-10)


def test_von_neumann_projection_counts():
    assert len(von_neumann_projections("II")) == 16
    assert len(von_neumann_projections("SI")) == 4
    assert len(von_neumann_projections("IS")) == 4
    assert len(von_neumann_projections("SS")) == 1
    for povm in ("II", "SI", "IS", "SS"):
        for proj in von_neumann_projections(povm):
            assert np.abs(proj @ proj - proj).max() < 1e-12
            assert np.trace(proj) == pytest.approx(1.0, abs=1e-12)


def test_von_neumann_projections_resum_to_povms():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = random_mixed(4, rng), random_mixed(4, rng)
        joint = arrange_joint_state(a, b).matrix
        p_ii, p_si, p_is, p_ss = povm_probabilities(a, b)
        for povm, target in (("II", p_ii), ("SI", p_si), ("IS", p_is), ("SS", p_ss)):
            total = sum(np.real(np.trace(proj @ joint)) for proj in von_neumann_projections(povm))
            assert abs(total - target) < 1e-9


def test_sample_counts_exact_mode():
    counts = sample_counts((1.0, 0.25, 0.25, 1 / 16), NoiseModel("exact", 1600, 0))
    assert (counts.f_II, counts.f_SI, counts.f_IS, counts.f_SS) == (1600, 400, 400, 100)


def test_sample_counts_seeded_determinism():
    noise = NoiseModel("binomial", 5000, 42)
    c1 = sample_counts((1.0, 0.3, 0.2, 0.05), noise)
    c2 = sample_counts((1.0, 0.3, 0.2, 0.05), noise)
    assert c1 == c2
    c3 = sample_counts((1.0, 0.3, 0.2, 0.05), NoiseModel("binomial", 5000, 43))
    assert c1 != c3


def test_sample_counts_binomial_mean():
    p_si = 0.3
    shots = 2000
    vals = [
        sample_counts((1.0, p_si, 0.2, 0.05), NoiseModel("binomial", shots, seed)).f_SI / shots
        for seed in range(2000)
    ]
    se = np.sqrt(p_si * (1 - p_si) / shots / len(vals))
    assert abs(np.mean(vals) - p_si) < 3 * se


def test_estimate_overlap_arithmetic():
    counts = CoincidenceCounts(1600, 400, 400, 100, 1600)
    est = estimate_overlap(counts)
    assert est.value == pytest.approx(0.25, abs=1e-12)
    assert not est.clamped
    quiet = estimate_overlap(CoincidenceCounts(1000, 0, 0, 0, 1000))
    assert quiet.value == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(EstimationError):
        estimate_overlap(CoincidenceCounts(0, 1, 1, 1, 10))


def test_overlap_coverage_orthogonal_bells():
    a = make_bell(BellKind.PHI_PLUS)
    b = make_bell(BellKind.PHI_MINUS)
    hits = 0
    for seed in range(300):
        est = measure_overlap(a, b, NoiseModel("binomial", 100_000, seed))
        if abs(est.value - 0.0) <= 3 * est.std_error or est.std_error == 0:
            hits += 1
    assert hits >= 297


def test_measure_hsd_exact_mode():
    noise = NoiseModel("exact", 1000, 0)
    m = measure_hsd(make_bell(BellKind.PHI_PLUS), make_bell(BellKind.PHI_MINUS), noise)
    assert m.value == pytest.approx(np.sqrt(2), abs=1e-9)
    assert m.d2_std_error == 0.0
    rng = np.random.default_rng(4)
    rho = random_mixed(4, rng)
    assert measure_hsd(rho, rho, noise).value == pytest.approx(0.0, abs=1e-9)
    m = measure_hsd(make_werner(0.3), make_werner(0.9), noise)
    assert m.value == pytest.approx(np.sqrt(0.27), abs=1e-9)


def test_measure_hsd_exact_matches_oracle_random():
    noise = NoiseModel("exact", 1000, 0)
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = random_mixed(4, rng), random_mixed(4, rng)
        m = measure_hsd(a, b, noise)
        assert abs(m.value - hsd_exact(a, b)) < 1e-9


def test_measure_hsd_single_qubit():
    noise = NoiseModel("exact", 1000, 0)
    rng = np.random.default_rng(6)
    for _ in range(100):
        a, b = random_mixed(2, rng), random_mixed(2, rng)
        assert abs(measure_hsd(a, b, noise).value - hsd_exact(a, b)) < 1e-9


def test_measure_hsd_seeded_reproducibility():
    noise = NoiseModel("poisson", 10_000, 9)
    a, b = make_werner(0.2), make_werner(0.7)
    m1 = measure_hsd(a, b, noise)
    m2 = measure_hsd(a, b, noise)
    assert m1 == m2


def test_std_error_tracks_empirical_spread():
    a = maximally_mixed(4)
    b = make_werner(0.5)
    shots = 10_000
    vals, errs = [], []
    for seed in range(400):
        est = measure_overlap(a, b, NoiseModel("binomial", shots, seed))
        vals.append(est.value)
        errs.append(est.std_error)
    assert np.std(vals) == pytest.approx(np.mean(errs), rel=0.15)


def test_shot_scaling_minus_half():
    a, b = make_werner(0.4), make_werner(0.8)
    shot_grid = [1000, 10_000, 100_000]
    stds = []
    for shots in shot_grid:
        vals = [
            measure_overlap(a, b, NoiseModel("binomial", shots, seed)).value
            for seed in range(200)
        ]
        stds.append(np.std(vals))
    slope = np.polyfit(np.log(shot_grid), np.log(stds), 1)[0]
    assert abs(slope + 0.5) < 0.05


def test_ensemble_measure_bell_mixture():
    noise = NoiseModel("exact", 10_000, 0)
    uniform = EnsembleSpec(tuple((0.25, make_bell(k)) for k in BellKind))
    est = ensemble_measure(uniform, uniform, noise)
    assert est.value == pytest.approx(0.25, abs=1e-9)


def test_ensemble_measure_single_member_reduces():
    noise = NoiseModel("exact", 10_000, 0)
    a = EnsembleSpec(((1.0, make_bell(BellKind.PHI_PLUS)),))
    b = EnsembleSpec(((1.0, make_bell(BellKind.PSI_MINUS)),))
    est = ensemble_measure(a, b, noise)
    assert est.value == pytest.approx(0.0, abs=1e-9)


def test_ensemble_measure_werner_decomposition():
    noise = NoiseModel("exact", 10_000, 0)
    for p in np.linspace(0.0, 1.0, 11):
        members = [(p + (1 - p) / 4, make_bell(BellKind.PHI_PLUS))] + [
            ((1 - p) / 4, make_bell(k)) for k in BellKind if k is not BellKind.PHI_PLUS
        ]
        spec = EnsembleSpec(tuple(members))
        est = ensemble_measure(spec, spec, noise)
        assert est.value == pytest.approx(0.25 + 0.75 * p * p, abs=1e-9)


def test_ensemble_weights_validated():
    with pytest.raises(StateError):
        EnsembleSpec(((0.5, make_bell(BellKind.PHI_PLUS)),))


def test_plan_measurements():
    assert plan_measurements(2, "overlap") == 12
    assert plan_measurements(2, "tomography") == 32
    assert plan_measurements(1, "tomography") == 8
    with pytest.raises(StateError):
        plan_measurements(2, "oracle")
