import numpy as np
import pytest
from numpy.testing import assert_allclose

from baroflow.laws import (
    ConstantTension,
    GammaLaw,
    LawDomainError,
    LinearLaw,
    QuadraticLaw,
    SplineLaw,
    energy_density,
    law_from_config,
    represented_internal_energy,
    total_pressure,
)

# frozen 50-digit values
GAMMA_AT_2 = 1.0556063286183155      # 0.4 * 2^1.4
REPRESENTED_8 = 0.43527528164806206  # 8^(-0.4)


def test_total_pressure_examples():
    assert total_pressure(QuadraticLaw(), 3.0) == pytest.approx(9.0, abs=1e-14)
    assert total_pressure(LinearLaw(2.7), 5.0) == pytest.approx(0.0, abs=0.0)
    assert total_pressure(GammaLaw(1.0, 1.4), 2.0) == pytest.approx(
        GAMMA_AT_2, abs=1e-15
    )


def test_energy_density():
    kin, internal = energy_density(QuadraticLaw(), 2.0, [1.0, 0.0, 0.0])
    assert (kin, internal) == (1.0, 4.0)
    kin, internal = energy_density(QuadraticLaw(), 0.0, [3.0, -1.0, 2.0])
    assert (kin, internal) == (0.0, 0.0)
    kin, internal = energy_density(LinearLaw(1.0), 1.0, [1.0, 2.0, 2.0])
    assert (kin, internal) == (4.5, 1.0)


def test_represented_internal_energy():
    assert represented_internal_energy(LinearLaw(1.0), 0.8, 123.4) == \
        pytest.approx(0.8, abs=1e-15)
    assert represented_internal_energy(QuadraticLaw(), 1.0, 2.0) == \
        pytest.approx(0.5, abs=1e-15)
    assert represented_internal_energy(GammaLaw(1.0, 1.4), 1.0, 8.0) == \
        pytest.approx(REPRESENTED_8, abs=1e-15)
    # sqrtG = 1 reproduces p(rho0) exactly
    law = GammaLaw(0.7, 1.9)
    assert represented_internal_energy(law, 1.3, 1.0) == float(law.p(1.3))


def test_represented_internal_energy_singular_metric():
    from baroflow.laws import SingularMetricError

    with pytest.raises(SingularMetricError):
        represented_internal_energy(QuadraticLaw(), 1.0, 0.0)


def test_derivative_consistency():
    rng = np.random.default_rng(0)
    rho = rng.uniform(0.1, 10.0, 500)
    for law in (GammaLaw(1.0, 1.4), GammaLaw(0.3, 2.3), QuadraticLaw(),
                LinearLaw(0.4)):
        h = 1e-6
        fd = (law.p(rho + h) - law.p(rho - h)) / (2 * h)
        assert np.max(np.abs(fd - law.p_prime(rho)) /
                      np.maximum(np.abs(fd), 1e-12)) < 1e-6


def test_total_pressure_identity_and_closed_form():
    rng = np.random.default_rng(1)
    rho = rng.uniform(0.1, 10.0, 1000)
    for law in (GammaLaw(1.0, 1.4), QuadraticLaw(), LinearLaw(1.1)):
        lhs = law.total_pressure(rho) + law.p(rho)
        rhs = rho * law.p_prime(rho)
        assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-12)) < 1e-15
    law = GammaLaw(2.0, 1.7)
    closed = (1.7 - 1.0) * 2.0 * rho**1.7
    assert np.max(np.abs(law.total_pressure(rho) - closed) / closed) < 1e-12


def test_domain_errors():
    law = GammaLaw(1.0, 1.4)
    with pytest.raises(LawDomainError):
        law.p(-0.5)
    spline = SplineLaw([0.5, 1.0, 2.0, 4.0], [0.25, 1.0, 4.0, 16.0])
    with pytest.raises(LawDomainError):
        spline.p(0.1)


def test_spline_law_matches_table():
    rho = np.linspace(0.5, 4.0, 30)
    law = SplineLaw(rho, rho**2)
    mid = np.linspace(0.6, 3.9, 50)
    assert_allclose(law.p(mid), mid**2, rtol=1e-3)
    # monotone C^1: derivative stays positive for increasing data
    assert np.all(law.p_prime(mid) > 0)


def test_spline_from_csv(tmp_path):
    path = tmp_path / "law.csv"
    rho = np.linspace(0.5, 2.0, 20)
    np.savetxt(path, np.column_stack([rho, 1.5 * rho]), delimiter=",")
    law = SplineLaw.from_csv(path)
    assert_allclose(law.p(1.0), 1.5, rtol=1e-10)


def test_law_from_config():
    law = law_from_config({"kind": "gamma", "kappa": 2.0, "gamma": 1.5}, "A")
    assert isinstance(law, GammaLaw) and law.label == "A"
    assert isinstance(law_from_config({"kind": "linear", "c": 1.0}), LinearLaw)
    with pytest.raises(ValueError):
        law_from_config({"kind": "tabulated"})


def test_constant_tension():
    assert ConstantTension(-0.3).p0 == -0.3


def test_gamma_law_validation():
    with pytest.raises(ValueError):
        GammaLaw(-1.0, 1.4)
    with pytest.raises(ValueError):
        GammaLaw(1.0, 0.5)


def test_sound_speed():
    law = GammaLaw(1.0, 2.0)
    # c^2 = rho p'' = 2 rho
    assert_allclose(law.sound_speed(2.0), 2.0, rtol=1e-14)
