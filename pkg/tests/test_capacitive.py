import numpy as np
import pytest
from hypothesis import given, strategies as st

from xtalk_lab.capacitive import (
    SINE_SHAPE,
    SQUARE_SHAPE,
    CapacitanceSet,
    lambda_direct,
    lambda_direct_matrix,
    load_capacitance_set,
    photon_loss_rate,
    pi_pulse_amplitude,
    rabi_rate,
)
from xtalk_lab.config import data_path
from xtalk_lab.engine import SIGMA_X, TimeDependentHamiltonian, evolve, excited_population, ground
from xtalk_lab.errors import ContractViolation, DatasetError


def test_kappa_worked_example():
    # Z = 50 Ohm, C_k = 50 aF, f = 4 GHz, C_q = 100 fF, by hand in SI:
    # w = 2 pi 4e9 = 2.5132741228718345e10 rad/s
    # kappa = 50 * (5e-17)^2 * w^2 / 1e-13 = 789.5683520871485 1/s
    assert photon_loss_rate(50.0, 0.05, 4.0, 100.0) == pytest.approx(7.895683520871485e-07, rel=1e-10)


@given(st.floats(1e-3, 10.0), st.floats(0.1, 100.0))
def test_kappa_quadratic_in_coupling(ck, alpha):
    base = photon_loss_rate(50.0, ck, 4.5, 90.0)
    assert photon_loss_rate(50.0, alpha * ck, 4.5, 90.0) == pytest.approx(alpha**2 * base, rel=1e-12)


def test_kappa_rejects_non_physical():
    with pytest.raises(ContractViolation):
        photon_loss_rate(50.0, 0.0, 4.0, 100.0)
    with pytest.raises(ContractViolation):
        pi_pulse_amplitude(0.0, SQUARE_SHAPE, 20.0)


@pytest.mark.parametrize("shape", [SQUARE_SHAPE, SINE_SHAPE])
def test_pi_pulse_amplitude_gives_pi_rotation(shape):
    kappa = photon_loss_rate(50.0, 0.05, 4.0, 100.0)
    t_pi = 20.0
    a0 = pi_pulse_amplitude(kappa, shape, t_pi)
    rate = rabi_rate(kappa, a0, shape, t_pi)
    # population oscillates at the Rabi rate; the sigma_x coefficient is half of it
    H = TimeDependentHamiltonian(2).add(SIGMA_X, lambda t: 0.5 * rate(t))
    psi = evolve(H, ground(), [0.0, t_pi], 0.01).final_state
    assert excited_population(psi) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ContractViolation):
        rabi_rate(kappa, a0, 0.5, t_pi)


def caps(n=4, seed=0):
    rng = np.random.default_rng(seed)
    k = rng.uniform(1e-4, 1e-2, (n, n))
    np.fill_diagonal(k, 0.2)
    return CapacitanceSet(rng.uniform(80, 100, n), k, rng.uniform(4.2, 5.0, n))


def test_lambda_direct_hand_value():
    c = CapacitanceSet([100.0, 81.0], [[0.2, 0.002], [0.001, 0.2]], [4.0, 5.0])
    # (w_0 C_01) / (w_1 C_11) * sqrt(C_1 / C_0)
    expect = 20 * np.log10((4.0 * 0.002) / (5.0 * 0.2) * np.sqrt(81.0 / 100.0))
    assert lambda_direct(c, 0, 1) == pytest.approx(expect)


@given(st.floats(1e-3, 1e3))
def test_lambda_direct_scale_invariant(alpha):
    c = caps()
    assert np.allclose(lambda_direct_matrix(c.scaled(alpha)), lambda_direct_matrix(c), atol=1e-9)


def test_lambda_direct_edge_cases():
    c = CapacitanceSet([100.0, 100.0], [[0.2, 0.0], [0.0, 0.0]], [4.0, 5.0])
    assert lambda_direct(c, 1, 0) == -np.inf
    with pytest.raises(ContractViolation):
        lambda_direct(c, 0, 1)
    with pytest.raises(ContractViolation):
        lambda_direct(c, 0, 5)
    with pytest.raises(ContractViolation):
        CapacitanceSet([1.0], [[0.1, 0.1]], [4.0])


def test_bundled_capacitance_file_statistics():
    c = load_capacitance_set(data_path("capacitance_couplings.csv"), data_path("capacitance_self.csv"))
    lam = lambda_direct_matrix(c)[~np.eye(c.size, dtype=bool)]
    assert c.size == 25 and lam.size == 600
    assert lam.min() >= -150 - 1e-9 and lam.max() <= -49 + 1e-9
    assert abs(lam.mean() - (-96.0)) <= 26.0


def test_loader_errors(tmp_path):
    selfs = tmp_path / "self.csv"
    selfs.write_text("i,c_self_ff,frequency_ghz\nq0,90,4.2\nq1,95,4.8\n")
    good = tmp_path / "k.csv"
    good.write_text("i,j,c_ff\nq0,q0,0.2\nq1,q1,0.2\nq0,q1,0.001\n")
    c = load_capacitance_set(good, selfs)
    assert c.labels == ("q0", "q1") and c.coupling_ff[1, 0] == 0.0
    for text in ("i,j,c_ff\nq0,q9,0.1\n", "i,j,c_ff\nq0,q1,0.1\nq0,q1,0.2\n", "i,j,c_ff\nq0,q1,abc\n",
                 "a,b\n1,2\n", "i,j,c_ff\nq0,q1,-1\n", ""):
        bad = tmp_path / "bad.csv"
        bad.write_text(text)
        with pytest.raises(DatasetError):
            load_capacitance_set(bad, selfs)
    with pytest.raises(DatasetError):
        load_capacitance_set(good, tmp_path / "missing.csv")
