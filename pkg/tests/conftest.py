import numpy as np
import pytest

from activerods import (AngularCoefficient, ModelParams, build_phi_grid,
                        build_y_grid)


def const(v):
    return AngularCoefficient("constant", {"value": v})


def shifted_sine(g0=1.0, a=0.5):
    return AngularCoefficient("shifted_sine", {"g0": g0, "a": a})


def shear(gamma=1.0):
    return AngularCoefficient("paper_shear", {"gamma": gamma})


def wall_drive(g=1.0, v_prop=0.5):
    return AngularCoefficient("wall_drive", {"g": g, "v_prop": v_prop})


@pytest.fixture
def small_grids():
    return build_y_grid(4.0, 48, 0.4, 16), build_phi_grid(16)


@pytest.fixture
def unit_params():
    return ModelParams(epsilon=0.05, D=0.0, T=0.5, V=const(1.0),
                       Phi=const(0.0))
