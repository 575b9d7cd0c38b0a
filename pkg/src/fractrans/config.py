"""YAML configuration: named systems, masks, sections and pairs.

A document looks like::

    seed: 7
    epsilon: 0.0009765625
    systems:
      F:
        lipschitz: 0.5
        maps:
          - affine: [0.5, 0, 0, 0.5, 0, 0]
          - affine: [0.5, 0, 0, 0.5, 0.5, 0]
        probabilities: [0.5, 0.5]
    masks:
      MF:
        regions:
          - halfplane_x: {threshold: 0.5, side: le}
          - halfplane_x: {threshold: 0.5, side: gt}
    sections:
      SF: {system: F, mask: MF}
    pairs:
      FG: {forward: SF, backward: SG}

Unknown keys anywhere are rejected. ``Config.to_dict`` produces a document
that parses back to an equal ``Config``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .geometry import AffineMap2, BilinearMap2, Point2, ProjectiveMap2, quad_from_rect
from .ifs import UNIT_SQUARE, IfsSystem, Rect, recommended_depth
from .rng import check_probabilities
from .sections import Mask, QuadTile, region_from_dict, tops_mask
from .tolerances import TOL, Tolerances
from .transform import DEFAULT_EPSILON, HomeoPair, SectionSystem, make_pair

_TOP_KEYS = {"seed", "depth", "epsilon", "tolerances", "params", "systems", "masks", "sections", "pairs"}


def map_to_dict(m) -> dict:
    if isinstance(m, AffineMap2):
        return {"affine": [m.a, m.b, m.c, m.d, m.e, m.f]}
    if isinstance(m, ProjectiveMap2):
        return {"projective": [m.a, m.b, m.c, m.d, m.e, m.k, m.g, m.h, m.j]}
    if isinstance(m, BilinearMap2):
        return {"bilinear": [list(m.P), list(m.Q), list(m.R), list(m.S)]}
    raise TypeError(f"cannot serialise {type(m).__name__}")


def map_from_dict(doc):
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ConfigError(f"a map is a single-key mapping, got {doc!r}")
    (kind, coef), = doc.items()
    try:
        if kind == "affine":
            if len(coef) not in (4, 6):
                raise ConfigError("affine maps take 4 or 6 coefficients")
            return AffineMap2(*map(float, coef))
        if kind == "projective":
            if len(coef) != 9:
                raise ConfigError("projective maps take 9 coefficients: a b c d e k g h j")
            return ProjectiveMap2(*map(float, coef))
        if kind == "bilinear":
            if len(coef) != 4:
                raise ConfigError("bilinear maps take 4 corners")
            return BilinearMap2(*(Point2(float(c[0]), float(c[1])) for c in coef))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad {kind} map: {exc}") from None
    raise ConfigError(f"unknown map kind {kind!r}")


def _check_keys(doc, allowed, where, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = set(doc) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    missing = set(required) - set(doc)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class MaskDecl:
    """Explicit regions, or the tops mask of a named system."""

    regions: tuple | None = None
    tops: str | None = None

    def to_dict(self) -> dict:
        if self.tops is not None:
            return {"tops": self.tops}
        return {"regions": [r.to_dict() for r in self.regions]}


@dataclass(frozen=True)
class SectionDecl:
    system: str
    mask: str
    depth: int | None = None

    def to_dict(self) -> dict:
        out = {"system": self.system, "mask": self.mask}
        if self.depth is not None:
            out["depth"] = self.depth
        return out


@dataclass(frozen=True)
class PairDecl:
    forward: str
    backward: str
    depth: int | None = None

    def to_dict(self) -> dict:
        out = {"forward": self.forward, "backward": self.backward}
        if self.depth is not None:
            out["depth"] = self.depth
        return out


@dataclass
class Config:
    systems: dict[str, IfsSystem] = field(default_factory=dict)
    probabilities: dict[str, tuple] = field(default_factory=dict)
    masks: dict[str, MaskDecl] = field(default_factory=dict)
    sections: dict[str, SectionDecl] = field(default_factory=dict)
    pairs: dict[str, PairDecl] = field(default_factory=dict)
    params: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    depth: int | None = None
    epsilon: float = DEFAULT_EPSILON
    tolerances: dict[str, float] = field(default_factory=dict)

    # -- lookups ---------------------------------------------------------------

    def system(self, name: str) -> IfsSystem:
        try:
            return self.systems[name]
        except KeyError:
            raise ConfigError(f"no system named {name!r}") from None

    def probs(self, name: str):
        """Declared probabilities of a system, or None."""
        self.system(name)
        return self.probabilities.get(name)

    def mask(self, name: str) -> Mask:
        try:
            decl = self.masks[name]
        except KeyError:
            raise ConfigError(f"no mask named {name!r}") from None
        if decl.tops is not None:
            ifs = self.system(decl.tops)
            d = ifs.domain
            tiles = [QuadTile(quad_from_rect(m, (d.x0, d.x1, d.y0, d.y1))) for m in ifs.maps]
            return tops_mask(ifs, tiles, validate=False)
        return Mask(decl.regions)

    def section(self, name: str, validate: bool = True) -> SectionSystem:
        try:
            decl = self.sections[name]
        except KeyError:
            raise ConfigError(f"no section named {name!r}") from None
        ifs = self.system(decl.system)
        depth = decl.depth if decl.depth is not None else self.default_depth(ifs)
        tops = self.masks[decl.mask].tops is not None
        return SectionSystem(ifs, self.mask(decl.mask), depth, validate=validate, check_subset=not tops)

    def pair(self, name: str) -> HomeoPair:
        try:
            decl = self.pairs[name]
        except KeyError:
            raise ConfigError(f"no pair named {name!r}") from None
        return make_pair(self.section(decl.forward), self.section(decl.backward), decl.depth)

    def default_depth(self, ifs: IfsSystem) -> int:
        return self.depth if self.depth is not None else recommended_depth(ifs, self.epsilon)

    def apply_tolerances(self) -> None:
        TOL.update(**Tolerances().as_dict())
        TOL.update(**self.tolerances)

    # -- (de)serialisation -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        systems = {}
        for name, ifs in self.systems.items():
            d = ifs.domain
            entry = {
                "domain": [d.x0, d.x1, d.y0, d.y1],
                "lipschitz": ifs.lipschitz_bound,
                "check_domain": ifs.check_domain,
                "maps": [map_to_dict(m) for m in ifs.maps],
            }
            if name in self.probabilities:
                entry["probabilities"] = list(self.probabilities[name])
            systems[name] = entry
        doc: dict[str, Any] = {"seed": self.seed, "epsilon": self.epsilon}
        if self.depth is not None:
            doc["depth"] = self.depth
        if self.tolerances:
            doc["tolerances"] = dict(self.tolerances)
        if self.params:
            doc["params"] = dict(self.params)
        doc["systems"] = systems
        doc["masks"] = {k: v.to_dict() for k, v in self.masks.items()}
        doc["sections"] = {k: v.to_dict() for k, v in self.sections.items()}
        doc["pairs"] = {k: v.to_dict() for k, v in self.pairs.items()}
        return doc

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, doc) -> "Config":
        if doc is None:
            doc = {}
        _check_keys(doc, _TOP_KEYS, "config")
        cfg = cls()
        cfg.seed = _as_int(doc.get("seed", 0), "seed")
        cfg.depth = None if doc.get("depth") is None else _as_int(doc["depth"], "depth")
        cfg.epsilon = float(doc.get("epsilon", DEFAULT_EPSILON))
        if cfg.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        tol = doc.get("tolerances") or {}
        _check_keys(tol, Tolerances().as_dict(), "tolerances")
        cfg.tolerances = {k: float(v) for k, v in tol.items()}
        params = doc.get("params") or {}
        _check_keys(params, params, "params")
        cfg.params = {str(k): float(v) for k, v in params.items()}

        for name, body in (doc.get("systems") or {}).items():
            _check_keys(body, {"domain", "lipschitz", "check_domain", "maps", "probabilities"}, f"system {name}", ("maps",))
            try:
                domain = Rect(*map(float, body["domain"])) if "domain" in body else UNIT_SQUARE
                ifs = IfsSystem(
                    tuple(map_from_dict(m) for m in body["maps"]),
                    domain,
                    float(body.get("lipschitz", 0.5)),
                    bool(body.get("check_domain", True)),
                )
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"system {name}: {exc}") from None
            cfg.systems[str(name)] = ifs
            if "probabilities" in body:
                cfg.probabilities[str(name)] = tuple(float(p) for p in check_probabilities(body["probabilities"], ifs.n))

        for name, body in (doc.get("masks") or {}).items():
            _check_keys(body, {"regions", "tops"}, f"mask {name}")
            if ("regions" in body) == ("tops" in body):
                raise ConfigError(f"mask {name}: give exactly one of 'regions' or 'tops'")
            if "tops" in body:
                if body["tops"] not in cfg.systems:
                    raise ConfigError(f"mask {name}: no system named {body['tops']!r}")
                cfg.masks[str(name)] = MaskDecl(tops=str(body["tops"]))
            else:
                try:
                    regions = tuple(region_from_dict(r) for r in body["regions"])
                except (TypeError, ValueError, KeyError) as exc:
                    raise ConfigError(f"mask {name}: {exc}") from None
                cfg.masks[str(name)] = MaskDecl(regions=regions)

        for name, body in (doc.get("sections") or {}).items():
            _check_keys(body, {"system", "mask", "depth"}, f"section {name}", ("system", "mask"))
            decl = SectionDecl(str(body["system"]), str(body["mask"]), _opt_int(body.get("depth"), f"section {name}"))
            if decl.system not in cfg.systems or decl.mask not in cfg.masks:
                raise ConfigError(f"section {name}: unknown system or mask")
            if cfg.mask(decl.mask).n != cfg.systems[decl.system].n:
                raise ConfigError(f"section {name}: mask and system disagree on N")
            cfg.sections[str(name)] = decl

        for name, body in (doc.get("pairs") or {}).items():
            _check_keys(body, {"forward", "backward", "depth"}, f"pair {name}", ("forward", "backward"))
            decl = PairDecl(str(body["forward"]), str(body["backward"]), _opt_int(body.get("depth"), f"pair {name}"))
            if decl.forward not in cfg.sections or decl.backward not in cfg.sections:
                raise ConfigError(f"pair {name}: unknown section")
            cfg.pairs[str(name)] = decl
        return cfg

    @classmethod
    def loads(cls, text: str) -> "Config":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"YAML error: {exc}".replace("\n", " ")) from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "Config":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        return cls.loads(text)

    def validate(self) -> list[str]:
        """Build every section and pair (running mask checks); returns names."""
        done = []
        for name in self.sections:
            self.section(name)
            done.append(f"section:{name}")
        for name in self.pairs:
            self.pair(name)
            done.append(f"pair:{name}")
        return done


def _as_int(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer")
    return value


def _opt_int(value, where):
    return None if value is None else _as_int(value, where)
