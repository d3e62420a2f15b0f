import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xtalk_lab.crosstalk import FLUX_SIGNED, XY_DB, CrosstalkMatrix
from xtalk_lab.errors import ConfigurationError, ContractViolation, NumericalError
from xtalk_lab.flux import (
    CouplerModel,
    compensation_currents,
    coupler_frequency,
    current_to_flux,
    flux_to_current,
    hybridized_frequencies,
    qubit_participation,
    random_flux_matrix,
    squid_fluxes,
    squid_frequency,
)


@given(st.floats(-2, 2))
def test_squid_frequency_periodic_and_even(phi):
    assert squid_frequency(7.9, phi) == pytest.approx(squid_frequency(7.9, phi + 1.0), abs=1e-6)
    assert squid_frequency(7.9, phi) == pytest.approx(squid_frequency(7.9, -phi), abs=1e-12)


def test_coupler_frequency_values():
    m = CouplerModel(omega_c0=7.9, flux_offset=0.1)
    assert coupler_frequency(m, -0.1) == pytest.approx(7.9)
    assert coupler_frequency(m, 0.15) == pytest.approx(7.9 * np.sqrt(np.cos(np.pi / 4)))


def test_avoided_crossing_gap_is_2g():
    lo, hi = hybridized_frequencies(4.2, 4.2, 50.0)
    assert hi - lo == pytest.approx(0.1)
    wl, wu = qubit_participation(4.2, 4.2, 50.0)
    assert wl == pytest.approx(0.5) and wu == pytest.approx(0.5)


def test_dispersive_limit():
    lo, hi = hybridized_frequencies(4.2, 7.9, 50.0)
    assert lo == pytest.approx(4.2 - 0.05**2 / 3.7, abs=1e-6)
    wl, _ = qubit_participation(4.2, 7.9, 50.0)
    assert wl > 0.999


def test_current_flux_round_trip():
    m = CouplerModel(mutual_current_per_phi0=3.0)
    assert current_to_flux(m, 1.5) == pytest.approx(0.5)
    assert flux_to_current(m, current_to_flux(m, 0.7)) == pytest.approx(0.7)


def test_model_validation():
    with pytest.raises(ConfigurationError):
        CouplerModel(omega_c0=-1)
    with pytest.raises(ConfigurationError):
        CouplerModel(mutual_current_per_phi0=0)


def test_compensation_is_exact_with_true_matrix(rng):
    beta = random_flux_matrix(12, rng)
    target = rng.uniform(-0.3, 0.3, 12)
    currents = compensation_currents(beta, target, 3.0)
    assert np.allclose(squid_fluxes(beta, currents, 3.0), target, atol=1e-13)


@pytest.mark.filterwarnings("ignore:flux crosstalk matrix is ill-conditioned")
def test_compensation_errors(rng):
    with pytest.raises(ContractViolation):
        compensation_currents(CrosstalkMatrix(XY_DB, np.zeros((2, 2))), [0, 0])
    with pytest.raises(ContractViolation):
        compensation_currents(CrosstalkMatrix.identity(3), [0, 0])
    singular = CrosstalkMatrix(FLUX_SIGNED, np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(NumericalError):
        compensation_currents(singular, [0.1, 0.2])
    near = CrosstalkMatrix(FLUX_SIGNED, np.array([[1.0, 1 - 1e-10], [1 - 1e-10, 1.0]]))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        compensation_currents(near, [0.1, 0.2])
    assert any("ill-conditioned" in str(x.message) for x in w)


def test_random_matrix_scale(rng):
    m = random_flux_matrix(40, rng)
    off = np.abs(m.off_diagonal())
    assert np.all(np.diag(m.entries) == 1.0)
    assert off.max() <= 0.01
    assert 3e-4 < off.mean() < 7e-4
