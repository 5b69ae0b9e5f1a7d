import math

import pytest

from uwqkd.bb84 import LinkSetup
from uwqkd.channel import TURBULENCE_PRESETS, WATER_TYPES, LinkGeometry
from uwqkd.noise import ReceiverParams

# eddy diffusivity ratio used by the shipped presets
CALIBRATED_DR = 0.1334


def turbulence(name, d_r=CALIBRATED_DR):
    if name == "none":
        return None
    return TURBULENCE_PRESETS[name].with_d_r(d_r)


def link(water="clear_ocean", regime="none", diameter=0.10, d_r=CALIBRATED_DR, **rx):
    geom = LinkGeometry(100.0, diameter, diameter, math.radians(6.0), 530e-9)
    return LinkSetup(
        water=WATER_TYPES[water],
        geometry=geom,
        turbulence=turbulence(regime, d_r),
        receiver=ReceiverParams(aperture_diameter=diameter, **rx),
    )


@pytest.fixture
def clear_link():
    return link()
