"""Chiral Cosserat continuum toolkit.

Submodules:
    tensor_core      exact 3x3 algebra (decompositions, rotations, polar)
    field_calculus   matrix/vector fields, row-wise curl, inversion pullback
    energetics       energy densities, variational matrices, symmetry checks
    planar_reduction planar ansatz, equations of motion, traveling-wave constants
    soliton          perturbative kink/anti-kink profiles and the exact solver
    dynamics_sim     1D method-of-lines integrator and the mirror-pair check
    cli              command-line front end (verify/reduce/soliton/simulate)
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    dynamics_sim,
    energetics,
    field_calculus,
    planar_reduction,
    soliton,
    tensor_core,
)
