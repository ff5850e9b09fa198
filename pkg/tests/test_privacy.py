import math

import numpy as np
import pytest

from querybound import PrivacyParams
from querybound.privacy import p_factor_of


def test_p_factor_value():
    params = PrivacyParams(1.0, 1e-5)
    np.testing.assert_allclose(params.p_factor, 2.0 * math.log(2.0 / 1e-5),
                               rtol=1e-12)
    np.testing.assert_allclose(params.sigma_factor, math.sqrt(params.p_factor),
                               rtol=1e-15)


def test_p_factor_scales_inverse_square_in_epsilon():
    p1 = PrivacyParams(1.0, 1e-5).p_factor
    p2 = PrivacyParams(2.0, 1e-5).p_factor
    np.testing.assert_allclose(p1 / p2, 4.0, rtol=1e-12)


def test_p_factor_of_defaults_to_unit():
    assert p_factor_of(None) == 1.0
    params = PrivacyParams(0.5, 1e-3)
    np.testing.assert_allclose(p_factor_of(params), params.p_factor, rtol=0)


def test_invalid_parameters_rejected():
    for eps, delta in [(0.0, 1e-5), (-1.0, 1e-5), (math.inf, 1e-5),
                       (1.0, 0.0), (1.0, 1.0), (1.0, -0.1), (1.0, 2.0)]:
        with pytest.raises(ValueError):
            PrivacyParams(eps, delta)
