import numpy as np
import pytest

from xtalk_lab.crosstalk import FLUX_SIGNED, CrosstalkMatrix
from xtalk_lab.errors import CalibrationError, ContractViolation, MeasurementError
from xtalk_lab.flux import CouplerModel, coupler_frequency
from xtalk_lab.lattice import build_lattice
from xtalk_lab.virtual_lab import dc_flux_spectroscopy, measure_dc_crosstalk, restoring_slope
from xtalk_lab.virtual_lab.dc_flux import DC_BETA_FLOOR, bias_for_probe, dressed_lines, restoring_flux


def test_dressed_lines_split_by_2g_at_crossing():
    m = CouplerModel()
    phi_x = np.arccos((4.2 / 7.9) ** 2) / np.pi
    lo, hi, w_lo, w_hi = dressed_lines(m, 4.2, phi_x * m.mutual_current_per_phi0)
    assert hi - lo == pytest.approx(0.1, rel=1e-9)
    assert w_lo == pytest.approx(0.5) and w_hi == pytest.approx(0.5)


@pytest.mark.parametrize("offset,expected", [(0.0, 0.0), (-0.035, -0.035), (0.965, -0.035), (0.2, 0.2)])
def test_spectroscopy_recovers_period_and_offset(offset, expected):
    m = CouplerModel(flux_offset=offset, mutual_current_per_phi0=3.0)
    res = dc_flux_spectroscopy(m, 4.2)
    assert res.period_ma == pytest.approx(3.0, rel=1e-3)
    assert res.offset_phi0 == pytest.approx(expected, abs=1e-3)
    assert res.response.shape == (res.currents_ma.size, res.probe_ghz.size)


@pytest.mark.parametrize("seed", [1, 4])
def test_spectroscopy_with_noise(seed):
    res = dc_flux_spectroscopy(CouplerModel(flux_offset=0.1), 4.2, noise_sigma=0.05, seed=seed)
    assert res.crossing_currents_ma.size == 4
    assert res.period_ma == pytest.approx(3.0, rel=1e-3)
    assert res.offset_phi0 == pytest.approx(0.1, abs=1e-3)


def test_spectroscopy_without_crossings_fails():
    with pytest.raises(CalibrationError):
        dc_flux_spectroscopy(CouplerModel(), 4.2, currents_ma=np.linspace(-0.3, 0.3, 201))


def test_bias_puts_lower_line_on_probe():
    m = CouplerModel(flux_offset=0.05)
    bias = bias_for_probe(m, 4.2, 10.0)
    wc = coupler_frequency(m, bias)
    lo = 0.5 * (4.2 + wc) - np.sqrt(0.25 * (4.2 - wc) ** 2 + 0.05**2)
    assert lo == pytest.approx(4.19, abs=1e-10)


@pytest.mark.parametrize("beta", [0.0044, 0.0013, 0.0001, -0.002])
def test_restoring_slope_recovers_beta(beta):
    res = restoring_slope(CouplerModel(flux_offset=-0.035), beta)
    assert res.beta_signed == pytest.approx(beta, rel=0.05)
    assert not res.below_floor


def test_zero_beta_is_below_floor():
    res = restoring_slope(CouplerModel(), 0.0)
    assert res.beta < DC_BETA_FLOOR and res.below_floor


def test_flux_noise_blurs_the_slope():
    a = restoring_slope(CouplerModel(), 0.0013, flux_noise=1e-5, seed=1)
    assert a.beta == pytest.approx(0.0013, rel=0.05)
    assert a.beta_err > 0


def test_restoring_out_of_bracket():
    m = CouplerModel()
    bias = bias_for_probe(m, 4.2)
    with pytest.raises(MeasurementError):
        restoring_flux(m, 4.2, 4.19, bias, 0.5, span=0.01)


def test_lattice_wrapper():
    dev = build_lattice(3)
    n = len(dev.couplers)
    e = np.eye(n)
    e[0, 1] = 0.0013
    dev = build_lattice(3, flux_matrix=CrosstalkMatrix(FLUX_SIGNED, e))
    assert measure_dc_crosstalk(dev, 0, 1).beta == pytest.approx(0.0013, rel=0.05)
    with pytest.raises(ContractViolation):
        measure_dc_crosstalk(dev, 0, n)
    with pytest.raises(ContractViolation):
        measure_dc_crosstalk(build_lattice(3), 0, 1)


def test_needs_two_source_points():
    with pytest.raises(ContractViolation):
        restoring_slope(CouplerModel(), 0.001, source_fluxes=(1.0, 1.0))
