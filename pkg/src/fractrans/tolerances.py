"""Numerical tolerances shared by all modules.

The values live on a single mutable instance, ``TOL``, so a configuration
file can override them once at start-up (see :mod:`fractrans.config`).
"""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class Tolerances:
    # |g x + h y + j| at or below this is treated as a pole
    denominator: float = 1e-12
    # slack around [0, 1]^2 when selecting bilinear preimages
    unit_square: float = 1e-9
    # orbit points this close outside the domain are clamped back
    domain: float = 1e-9
    # |sum(p) - 1| allowed for probability vectors
    probability: float = 1e-9

    def update(self, **values: float) -> None:
        known = {f.name for f in fields(self)}
        for key, value in values.items():
            if key not in known:
                raise KeyError(key)
            setattr(self, key, float(value))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


TOL = Tolerances()
DEFAULTS = Tolerances()
