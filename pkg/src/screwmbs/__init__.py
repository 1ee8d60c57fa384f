"""Rigid multibody simulation on two candidate configuration-space Lie groups.

The package implements kinematic reconstruction and constrained Newton-Euler
dynamics with configuration updates on SE(3) and on SO(3)xR3, so the effect
of the group choice on joint-constraint satisfaction can be measured.
"""

from .liealg import SE3, SO3R3, GROUPS, Pose

__all__ = ["SE3", "SO3R3", "GROUPS", "Pose"]
__version__ = "0.1.0"
