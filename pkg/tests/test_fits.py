import numpy as np
import pytest
from hypothesis import given, strategies as st

from crwsim.fits import (FitError, dicke_ratio, power_law_fit,
                         saturation_curve)


class TestPowerLaw:
    def test_exact_on_synthetic_data(self):
        pts = [(n, 3.5 * n**2.0) for n in (10, 20, 30, 40)]
        fit = power_law_fit(pts)
        assert fit.exponent == pytest.approx(2.0, abs=1e-12)
        assert fit.prefactor == pytest.approx(3.5, rel=1e-12)
        assert fit.residual < 1e-12

    @given(alpha=st.floats(-3, 3), c=st.floats(0.01, 100),
           scale=st.floats(0.1, 10))
    def test_scale_covariance(self, alpha, c, scale):
        ns = [10.0, 20.0, 40.0, 80.0]
        fit = power_law_fit([(n, c * n**alpha) for n in ns])
        scaled = power_law_fit([(n, scale * c * n**alpha) for n in ns])
        assert scaled.exponent == pytest.approx(fit.exponent, abs=1e-9)
        assert scaled.prefactor == pytest.approx(scale * fit.prefactor,
                                                 rel=1e-9)

    @given(alpha=st.floats(-3, 3), c=st.floats(0.01, 100),
           stretch=st.floats(0.1, 10))
    def test_abscissa_rescaling_preserves_exponent(self, alpha, c, stretch):
        ns = [10.0, 20.0, 40.0, 80.0]
        fit = power_law_fit([(n, c * n**alpha) for n in ns])
        stretched = power_law_fit([(stretch * n, c * n**alpha) for n in ns])
        assert stretched.exponent == pytest.approx(fit.exponent, abs=1e-9)

    def test_predict_roundtrip(self):
        fit = power_law_fit([(n, 2.0 * n**1.5) for n in (5, 10, 20)])
        assert fit.predict(50.0) == pytest.approx(2.0 * 50**1.5, rel=1e-9)

    def test_too_few_points(self):
        with pytest.raises(FitError) as exc:
            power_law_fit([(10, 1.0), (20, 2.0)])
        assert exc.value.code == "TOO_FEW_POINTS"

    def test_nonpositive_point(self):
        with pytest.raises(FitError) as exc:
            power_law_fit([(10, 1.0), (20, 0.0), (30, 2.0)])
        assert exc.value.code == "NONPOSITIVE_POINT"


class TestRatios:
    def test_dicke_ratio(self):
        assert dicke_ratio(2.0, 4.0) == pytest.approx(0.5)

    def test_zero_reference(self):
        with pytest.raises(FitError) as exc:
            dicke_ratio(1.0, 0.0)
        assert exc.value.code == "DIVISION_BY_ZERO"


class TestSaturation:
    def test_saturated_curve(self):
        vals = [(1, 0.2), (5, 0.6), (10, 0.88), (20, 0.95), (40, 0.96)]
        res = saturation_curve(vals)
        assert res.saturated
        assert res.plateau == pytest.approx(0.96)

    def test_unsaturated_curve(self):
        vals = [(1, 0.1), (2, 0.2), (4, 0.4), (8, 0.8)]
        assert not saturation_curve(vals).saturated

    def test_requires_increasing_sizes(self):
        with pytest.raises(FitError) as exc:
            saturation_curve([(1, 0.1), (3, 0.2), (2, 0.3), (4, 0.4)])
        assert exc.value.code == "NOT_INCREASING"

    def test_too_few(self):
        with pytest.raises(FitError) as exc:
            saturation_curve([(1, 0.1), (2, 0.2), (3, 0.3)])
        assert exc.value.code == "TOO_FEW_POINTS"
