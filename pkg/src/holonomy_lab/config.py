"""Central numerical tolerances."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    group: float = 1e-9          # |g^T S g - S| for group membership
    algebra: float = 1e-12       # Lie-algebra identities
    hyperboloid: float = 1e-9    # <x, x>_S = -1
    loop_closure: float = 1e-9   # loop endpoints must agree this well
    point_equal: float = 1e-12   # planar vertex identification
    lift_step: float = 1e-3      # default integrator step (arc length)
    lift_refine: float = 1e-9    # step halving stops when endpoint moves less
    reproject_every: int = 64    # group products between drift corrections
    log_angle_margin: float = 0.1
    log_max_boost: float = 30.0


DEFAULT = Tolerances()
