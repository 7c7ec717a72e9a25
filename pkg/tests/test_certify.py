import importlib

import numpy as np
import pytest

from qbarrier.cases import CASES, get_case
from qbarrier.certify import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    certify,
    check_differential,
    check_initial,
    check_reality,
    check_trajectories,
    check_unsafe,
    convex_combination,
)
from qbarrier.cpoly import CPolynomial, ExponentPair
from qbarrier.regions import Region
from qbarrier.synth import BarrierCandidate, normalize

from conftest import random_unit_states

E = ExponentPair
HAD = get_case("hadamard")
PH1 = get_case("phase-z1")
PH2 = get_case("phase-z2")
B_HAD = HAD.expected_barrier
B1 = PH1.expected_barrier
B2 = PH2.expected_barrier
Q0 = CPolynomial.monomial(2, [1, 0], [1, 0])


def test_reality_examples():
    r = check_reality(B_HAD)
    # conjugate pairs cancel up to evaluation roundoff
    assert r.passed and r.max_imag_residual <= 1e-15
    assert not check_reality(CPolynomial.z(2, 0)).passed
    assert check_reality(B2).passed


def test_reality_ties_flagged_even_if_imag_small():
    p = CPolynomial(2, {E((1, 0), (0, 1)): 1.0, E((0, 1), (1, 0)): 1.0 + 1e-14})
    res = check_reality(p)
    assert not res.ties_ok and not res.passed


def test_differential_examples():
    assert check_differential(B_HAD, HAD.hamiltonian).passed
    bad = check_differential(Q0, HAD.hamiltonian)
    assert not bad.passed and bad.residual == pytest.approx(1.0)
    assert check_differential(B1, PH1.hamiltonian).passed
    with pytest.raises(ValueError):
        check_differential(B1, PH1.hamiltonian, mode="vibes")


def test_initial_examples():
    r = check_initial(B_HAD, HAD.initial)
    assert r.passed and abs(r.value) <= 1e-9
    r1 = check_initial(B1, PH1.initial)
    assert r1.passed and abs(r1.value) <= 1e-12
    inflated = BarrierCandidate(2, dict(B_HAD.coefficients), B_HAD.constant + 1)
    r2 = check_initial(inflated, HAD.initial)
    assert not r2.passed and r2.value == pytest.approx(1.0, abs=1e-9)
    assert inflated.polynomial()(r2.witness).real > 0


def test_unsafe_examples():
    r = check_unsafe(B_HAD, HAD.unsafe)
    assert r.passed and r.value == pytest.approx(0.4, abs=1e-9)
    r1 = check_unsafe(B1, PH1.unsafe)
    assert r1.passed and r1.value == pytest.approx(0.01, abs=1e-8)
    widened = Region.build(2, ([1], ">", 0.05))
    r2 = check_unsafe(B1, widened)
    assert not r2.passed and r2.value < 0


def test_trajectory_examples():
    assert check_trajectories(B_HAD, HAD.hamiltonian, HAD.initial, HAD.unsafe).passed
    assert check_trajectories(B2, PH2.hamiltonian, PH2.initial, PH2.unsafe).passed


def test_trajectory_hit_reports_witness():
    # initial set = complement of the unsafe set, so the flow crosses the boundary
    initial = Region.build(2, ([0], ">", 0.1))
    res = check_trajectories(B_HAD, HAD.hamiltonian, initial, HAD.unsafe, t_max=10, count=100)
    assert not res.passed and res.unsafe_hits > 0
    assert res.witness_time is not None and res.witness_time > 0
    assert abs(res.witness[0]) ** 2 <= 0.1


@pytest.mark.parametrize("name", list(CASES))
def test_golden_barriers_certify(name):
    case = CASES[name]
    report = certify(case.expected_barrier, case.problem())
    assert report.verdict == CERTIFIED
    assert report.trajectories.passed  # soundness coupling
    assert report.to_dict()["verdict"] == CERTIFIED


def test_zero_candidate_refuted():
    report = certify(BarrierCandidate(2, {}, 0.0), HAD.problem())
    assert report.verdict == REFUTED
    assert report.refuted_by == "unsafe"
    assert not report.unsafe.passed


def test_sampled_inequality_mode():
    ok = check_differential(B1, PH1.hamiltonian, "sampled-inequality")
    assert ok.passed and ok.mode == "sampled-inequality" and ok.witness is not None
    # under a unitary flow a non-conserved real B has dB/dt of both signs
    bad = check_differential(Q0, HAD.hamiltonian, "sampled-inequality")
    assert not bad.passed and bad.residual > 0


def test_certify_falls_back_and_flags(monkeypatch):
    cert = importlib.import_module("qbarrier.certify")

    real = cert.check_differential

    def fake(candidate, H, mode="symbolic-zero", **kw):
        res = real(candidate, H, mode, **kw)
        if mode == "symbolic-zero":
            res.passed = False
        return res

    monkeypatch.setattr(cert, "check_differential", fake)
    report = cert.certify(B1, PH1.problem())
    assert report.verdict == CERTIFIED
    assert report.differential.flagged and report.differential.mode == "sampled-inequality"
    assert report.notes


def test_inconclusive_when_only_trajectories_fail(monkeypatch):
    cert = importlib.import_module("qbarrier.certify")

    real = cert.check_trajectories

    def fake(*args, **kw):
        res = real(*args, **kw)
        res.passed = False
        return res

    monkeypatch.setattr(cert, "check_trajectories", fake)
    assert cert.certify(B_HAD, HAD.problem()).verdict == INCONCLUSIVE


def test_certify_dimension_mismatch():
    with pytest.raises(ValueError):
        certify(B_HAD, get_case("cnot-c00").problem())


def test_convex_combination_endpoints():
    other = B_HAD.scaled(2.0)
    assert convex_combination(B_HAD, other, 1.0) == B_HAD
    assert convex_combination(B_HAD, other, 0.0) == other
    with pytest.raises(ValueError):
        convex_combination(B_HAD, other, 1.5)
    with pytest.raises(ValueError):
        convex_combination(B_HAD, get_case("cnot-c00").expected_barrier, 0.5)


def test_convex_combination_of_scaled_phase_barrier():
    assert certify(convex_combination(B1, B1.scaled(2.0), 0.25), PH1.problem()).certified


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_convexity_distinct_hadamard_barriers(lam):
    # both certify: the energy level set separates the caps for any constant in (1.8, 2.2]
    other = BarrierCandidate(2, dict(B_HAD.coefficients), 2.0)
    assert certify(other, HAD.problem()).certified
    assert certify(convex_combination(B_HAD, other, lam), HAD.problem()).certified


@pytest.mark.parametrize("name", list(CASES))
def test_normalization_invariance(name):
    case = CASES[name]
    n = normalize(case.expected_barrier)
    assert all(-1.0 <= v <= 1.0 for v in n.coefficients.values())
    assert certify(n, case.problem()).verdict == certify(case.expected_barrier, case.problem()).verdict


def test_coefficient_form_identity():
    # 11/5 - 3|z0|^2 - 2 Re(z0 zb1) - |z1|^2 with |z1|^2 = 1 - |z0|^2
    Z = random_unit_states(np.random.default_rng(0), 10_000, 2)
    got = B_HAD.polynomial().evaluate_many(Z).real
    q0 = np.abs(Z[:, 0]) ** 2
    want = 11 / 5 - 3 * q0 - 2 * (Z[:, 0] * np.conj(Z[:, 1])).real - (1 - q0)
    assert np.max(np.abs(got - want)) <= 1e-12
    # rearranged: 2 (1/10 - |z0|^2 + 1/2 - Re(z0 zb1))
    assert np.max(np.abs(got - 2 * (0.1 - q0 + 0.5 - (Z[:, 0] * np.conj(Z[:, 1])).real))) <= 1e-12


def test_report_json_witness_format():
    report = certify(BarrierCandidate(2, {}, 0.0), HAD.problem())
    d = report.to_dict()
    assert isinstance(d["witness"], list) and len(d["witness"]) == 2
    assert all(len(pair) == 2 for pair in d["witness"])
