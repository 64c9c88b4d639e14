"""Shared reference configurations.

Two workhorse setups appear throughout the suite: a room-temperature
tungsten torsion pendulum probed hard enough to sit near its measurement
limit, and a cryogenic osmium one run softly. Frozen expected values in the
tests were computed for exactly these numbers.
"""

import math

import pytest

from snopto.response import OpticalConfig, OscillatorConfig


def tungsten_osc() -> OscillatorConfig:
    return OscillatorConfig(
        mass=0.2,
        omega_cm=2 * math.pi * 0.010,
        omega_sn=0.359,
        q=1e4,
        t0=300.0,
    )


def osmium_osc() -> OscillatorConfig:
    return OscillatorConfig(
        mass=0.2,
        omega_cm=2 * math.pi * 0.004,
        omega_sn=0.488,
        q=1e7,
        t0=1.0,
    )


def reference_optics(i_in=0.432) -> OpticalConfig:
    return OpticalConfig(i_in=i_in, transmissivity=1e-2, omega_c=2 * math.pi * 0.2e12)


@pytest.fixture
def w_osc():
    return tungsten_osc()


@pytest.fixture
def os_osc():
    return osmium_osc()
