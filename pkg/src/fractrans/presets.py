"""Built-in configurations for the standard examples.

Each preset is a :class:`~fractrans.config.Config`; ``build(name)`` returns
a fresh copy. ``PRESETS`` lists the names.
"""

from __future__ import annotations

from functools import lru_cache

from .config import Config, MaskDecl, PairDecl, SectionDecl
from .geometry import AffineMap2, ProjectiveMap2
from .ifs import UNIT_INTERVAL, IfsSystem, Rect
from .imaging import area_probabilities, threshold_mask
from .sections import quadrant_mask, threshold_mask_1d
from .transform import compute_p_star, hp_system, hrs_system, repeller_ifs


def _interval_map(a: float, e: float) -> AffineMap2:
    return AffineMap2(a, 0.0, 0.0, 1.0, e, 0.0)


def tent(t: float = 0.75) -> Config:
    """f1 = t x, f2 = 1 - t x on [0, 1], split at 1/2: the tent map."""
    if not 0.5 <= t < 1:
        raise ValueError("t must lie in [1/2, 1)")
    cfg = Config(params={"t": t})
    cfg.systems["F"] = IfsSystem((_interval_map(t, 0.0), _interval_map(-t, 1.0)), UNIT_INTERVAL, t)
    cfg.masks["M"] = MaskDecl(regions=threshold_mask_1d(0.5).regions)
    cfg.sections["S"] = SectionDecl("F", "M")
    return cfg


def lenaex() -> Config:
    """H_0.5 and H_0.6 with quadrant masks at their own split points."""
    cfg = Config(params={"p_f": 0.5, "p_g": 0.6})
    cfg.systems["F"] = hp_system(0.5)
    cfg.systems["G"] = hp_system(0.6)
    cfg.masks["MF"] = MaskDecl(regions=quadrant_mask(0.5).regions)
    cfg.masks["MG"] = MaskDecl(regions=quadrant_mask(0.6).regions)
    cfg.sections["SF"] = SectionDecl("F", "MF", 15)
    cfg.sections["SG"] = SectionDecl("G", "MG", 15)
    cfg.pairs["lenaex"] = PairDecl("SF", "SG", 15)
    return cfg


@lru_cache(maxsize=None)
def golden_p_star() -> float:
    return compute_p_star(2.0 / 3.0, 0.5)


def goldenlennaex(p: float | None = None) -> Config:
    """F = H_{2/3,1/2} masked at p*, G = H_{1/2,2/3} masked at 1 - p*."""
    p = golden_p_star() if p is None else p
    cfg = Config(params={"p": p})
    cfg.systems["F"] = hrs_system(2.0 / 3.0, 0.5)
    cfg.systems["G"] = hrs_system(0.5, 2.0 / 3.0)
    cfg.masks["MF"] = MaskDecl(regions=quadrant_mask(p).regions)
    cfg.masks["MG"] = MaskDecl(regions=quadrant_mask(1.0 - p).regions)
    cfg.sections["SF"] = SectionDecl("F", "MF")
    cfg.sections["SG"] = SectionDecl("G", "MG")
    cfg.pairs["goldenlennaex"] = PairDecl("SF", "SG")
    return cfg


# rows: a b c d e k g h j, for (a x + b y + c, d x + e y + k) / (g x + h y + j)
STEALING_COEFFICIENTS = (
    (19.05, 0.72, 1.86, -0.15, 16.9, -0.28, 5.63, 2.01, 20.0),
    (0.2, 4.4, 7.5, -0.3, -4.4, -10.4, 0.2, 8.8, 15.4),
    (96.5, 35.2, 5.8, -131.4, -6.5, 19.1, 134.8, 30.7, 7.5),
    (-32.5, 5.81, -2.9, 122.9, -0.1, -19.9, -128.1, -24.3, -5.8),
)
# a box around the attractor; the maps do not send it into itself
STEALING_DOMAIN = Rect(0.25, 0.75, -0.95, -0.05)


def stealingex_projective() -> Config:
    """Projective drawing system with a tops mask; palette system H_0.5."""
    cfg = Config()
    cfg.systems["F"] = IfsSystem(
        tuple(ProjectiveMap2(*row) for row in STEALING_COEFFICIENTS),
        STEALING_DOMAIN,
        0.5,
        check_domain=False,
    )
    cfg.systems["P"] = hp_system(0.5)
    cfg.masks["tops"] = MaskDecl(tops="F")
    cfg.masks["MP"] = MaskDecl(regions=quadrant_mask(0.5).regions)
    cfg.sections["SF"] = SectionDecl("F", "tops")
    cfg.sections["SP"] = SectionDecl("P", "MP")
    return cfg


def expack3(p: float = 0.44, q: float = 0.56) -> Config:
    """Two-map rotating systems; F is masked by horizontal splits at p and q."""
    cfg = Config(params={"p": p, "q": q})
    # one step is not contractive, two steps contract by 0.6 (resp. 0.5)
    cfg.systems["F"] = IfsSystem(
        (AffineMap2(0, 1, -0.6, 0, 0, 0.6), AffineMap2(0, 1, 0.6, 0, 0, 0.4)), lipschitz_bound=0.8
    )
    cfg.systems["G"] = IfsSystem(
        (AffineMap2(0, 1, -0.5, 0, 0, 0.5), AffineMap2(0, 1, 0.5, 0, 0, 0.5)), lipschitz_bound=0.75
    )
    cfg.masks["MP"] = MaskDecl(regions=threshold_mask(p, "y").regions)
    cfg.masks["MQ"] = MaskDecl(regions=threshold_mask(q, "y").regions)
    cfg.sections["SP"] = SectionDecl("F", "MP")
    cfg.sections["SQ"] = SectionDecl("F", "MQ")
    return cfg


def expack4() -> Config:
    """Source systems F, G and the carrier H = H_0.5, with area probabilities."""
    cfg = Config()
    cfg.systems["F"] = IfsSystem(
        (
            AffineMap2(0.66, 0, 0, 0.34, 0, 0),
            AffineMap2(0.34, 0, 0, 0.34, 0.66, 0),
            AffineMap2(0.34, 0, 0, 0.66, 0.66, 0.34),
            AffineMap2(0.66, 0, 0, 0.66, 0, 0.34),
        ),
        lipschitz_bound=0.66,
    )
    cfg.systems["G"] = IfsSystem(
        (
            AffineMap2(0.34, 0, 0, 0.66, 0, 0),
            AffineMap2(0.66, 0, 0, 0.66, 0.34, 0),
            AffineMap2(0.66, 0, 0, 0.34, 0.34, 0.66),
            AffineMap2(0.34, 0, 0, 0.34, 0, 0.66),
        ),
        lipschitz_bound=0.66,
    )
    cfg.systems["H"] = hp_system(0.5)
    cfg.probabilities["F"] = tuple(float(v) for v in area_probabilities(cfg.systems["F"]))
    cfg.probabilities["G"] = tuple(float(v) for v in area_probabilities(cfg.systems["G"]))
    cfg.params.update({"iterations_F": 1_000_000, "iterations_G": 500_000})
    return cfg


def goldthm(a: float = 2.0 / 3.0, b: float = 0.5) -> Config:
    """The two-map system whose attractor meets x + y = 1 at p*."""
    cfg = Config(params={"a": a, "b": b})
    cfg.systems["H"] = repeller_ifs(a, b)
    return cfg


_BUILDERS = {
    "tent": tent,
    "lenaex": lenaex,
    "goldenlennaex": goldenlennaex,
    "stealingex-projective": stealingex_projective,
    "expack3": expack3,
    "expack4": expack4,
    "goldthm": goldthm,
}
PRESETS = tuple(_BUILDERS)


def build(name: str, **kwargs) -> Config:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return builder(**kwargs)
