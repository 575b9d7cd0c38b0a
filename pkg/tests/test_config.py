import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractrans.config import Config, MaskDecl, PairDecl, SectionDecl, map_from_dict, map_to_dict
from fractrans.errors import BadProbabilities, ConfigError, MaskGap
from fractrans.geometry import AffineMap2, BilinearMap2, ProjectiveMap2
from fractrans.ifs import IfsSystem
from fractrans.presets import PRESETS, build
from fractrans.sections import HalfPlaneX, HalfPlaneY, Intersection, Rect2, quadrant_mask

BASE = """
seed: 3
systems:
  F:
    lipschitz: 0.5
    maps:
      - affine: [0.5, 0, 0, 1, 0, 0]
      - affine: [0.5, 0, 0, 1, 0.5, 0]
    domain: [0, 1, 0, 0]
masks:
  M:
    regions:
      - halfplane_x: {threshold: 0.5, side: le}
      - halfplane_x: {threshold: 0.5, side: gt}
sections:
  S: {system: F, mask: M}
"""


@pytest.mark.parametrize("name", [p for p in PRESETS if p != "goldenlennaex"] + ["goldenlennaex"])
def test_presets_round_trip(name):
    cfg = build(name, p=0.618) if name == "goldenlennaex" else build(name)
    assert Config.loads(cfg.dumps()) == cfg
    assert Config.from_dict(cfg.to_dict()) == cfg


def test_parse_and_build_section():
    cfg = Config.loads(BASE)
    assert cfg.seed == 3
    sec = cfg.section("S")
    assert sec.ifs.n == 2 and sec.depth == 10


@pytest.mark.parametrize(
    "text",
    [
        BASE + "colour: red\n",
        BASE.replace("lipschitz: 0.5", "lipschitz: 0.5\n    speed: 2"),
        BASE.replace("{system: F, mask: M}", "{system: F, mask: M, extra: 1}"),
        BASE.replace("side: le}", "side: le, open: true}"),
        BASE + "tolerances: {nonsense: 1}\n",
    ],
)
def test_unknown_keys_rejected(text):
    with pytest.raises(ConfigError):
        Config.loads(text)


@pytest.mark.parametrize(
    "text",
    [
        "systems: [1, 2",
        BASE.replace("affine: [0.5, 0, 0, 1, 0, 0]", "affine: [0.5, 0]"),
        BASE.replace("affine: [0.5, 0, 0, 1, 0, 0]", "spline: [1]"),
        BASE.replace("{system: F, mask: M}", "{system: G, mask: M}"),
        BASE.replace("seed: 3", "seed: 3.5"),
        BASE.replace("lipschitz: 0.5", "lipschitz: 1.5"),
    ],
)
def test_malformed_documents(text):
    with pytest.raises(ConfigError):
        Config.loads(text)


def test_bad_probabilities():
    with pytest.raises(BadProbabilities):
        Config.loads(BASE.replace("domain: [0, 1, 0, 0]", "domain: [0, 1, 0, 0]\n    probabilities: [0.7, 0.7]"))


def test_gap_mask_fails_validation():
    cfg = Config.loads(BASE.replace("{threshold: 0.5, side: gt}", "{threshold: 0.6, side: gt}"))
    with pytest.raises(MaskGap):
        cfg.validate()


def test_map_dicts():
    for m in (
        AffineMap2(0.5, 0.1, 0, 0.5, 0.2, 0.3),
        ProjectiveMap2(1, 0, 0, 0, 1, 0, 0.1, 0, 2),
        BilinearMap2((0, 0), (0.6, 0.1), (1, 1), (0.1, 0.6)),
    ):
        assert map_from_dict(map_to_dict(m)) == m
    assert map_from_dict({"affine": [0.5, 0.1, 0.2, 0.4]}) == AffineMap2(0.5, 0.1, 0.2, 0.4, 0, 0)


scale = st.floats(0.1, 0.5)
offset = st.floats(0.0, 0.5)
threshold = st.floats(0.2, 0.8)


@st.composite
def configs(draw):
    cfg = Config(seed=draw(st.integers(0, 2**62)), epsilon=draw(st.floats(1e-6, 0.1)))
    maps = tuple(AffineMap2(draw(scale), 0, 0, draw(scale), draw(offset), draw(offset)) for _ in range(2))
    cfg.systems["F"] = IfsSystem(maps, lipschitz_bound=0.6)
    if draw(st.booleans()):
        p = draw(st.floats(0.01, 0.99))
        cfg.probabilities["F"] = (p, 1 - p)
    t = draw(threshold)
    region = draw(
        st.sampled_from(
            [
                (HalfPlaneX(t, "le"), HalfPlaneX(t, "gt")),
                (HalfPlaneY(t, "lt"), HalfPlaneY(t, "ge")),
                (Rect2((0, t), (0, 1), (True, False)), Intersection((HalfPlaneX(t, "ge"), HalfPlaneY(1, "le")))),
            ]
        )
    )
    cfg.masks["M"] = MaskDecl(regions=region)
    cfg.masks["Q"] = MaskDecl(regions=quadrant_mask(t).regions)
    cfg.masks["T"] = MaskDecl(tops="F")
    cfg.sections["S"] = SectionDecl("F", "M", draw(st.none() | st.integers(1, 30)))
    cfg.sections["U"] = SectionDecl("F", "T")
    cfg.pairs["P"] = PairDecl("S", "U", draw(st.none() | st.integers(1, 30)))
    if draw(st.booleans()):
        cfg.params["t"] = t
        cfg.depth = draw(st.integers(0, 40))
    return cfg


@given(configs())
def test_round_trip_property(cfg):
    assert Config.loads(cfg.dumps()) == cfg
