from .constraint import solve_constraint
from .darboux import Gauge, build_map
from .fixtures import EXAMPLE_MONOMIAL
from .model import ModelSpec, Potential
from .reduction import reduce
from .spectrum import CubicQuarticModel, rs_energies

__all__ = [
    "CubicQuarticModel",
    "Gauge",
    "ModelSpec",
    "Potential",
    "build_map",
    "example_spec",
    "reduce",
    "rs_energies",
    "solve_constraint",
]


def example_spec(order=4):
    """
    The q qddot^2 model truncated after g^order.
    """
    potential = Potential.from_monomial(*EXAMPLE_MONOMIAL)
    return ModelSpec(potential, order)
