"""Command-line interface.

Every subcommand prints a run manifest as ``key=value`` lines on stdout,
including a sha256 of each file written. Exit status is 0 on success, 1 on
configuration or usage errors and 2 on numeric failures (mask gaps,
non-invertible points, projective poles).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import presets
from .config import Config
from .errors import ConfigError, NumericError
from .ifs import attractor_deterministic, recommended_depth
from .imaging import (
    Picture,
    area_probabilities,
    color_steal,
    color_steal_tops,
    decode_measure,
    encode_measure,
    fractal_filter,
    pack_masked,
    unpack_masked,
)
from .parallel import set_default_threads
from .render import escape_counts, render_attractor_density, render_repeller_escape
from .rng import derive_seed
from .transform import FractalTransform, compute_p_star, repeller_ifs, splat_raster, transform_raster


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Manifest:
    def __init__(self, command: str):
        self.lines: list[tuple[str, object]] = [("command", command)]

    def add(self, key: str, value) -> None:
        if isinstance(value, float):
            value = repr(value)
        self.lines.append((key, value))

    def output(self, path, key: str = "output") -> None:
        self.add(key, str(path))
        self.add(f"{key}_sha256", _sha256(path))

    def emit(self, stream) -> None:
        for k, v in self.lines:
            print(f"{k}={v}", file=stream)


def _load_config(args) -> Config:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = Config.load(args.config)
    elif args.preset:
        try:
            cfg = presets.build(args.preset)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    else:
        raise ConfigError("this command needs --config or --preset")
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.apply_tolerances()
    return cfg


def _load_picture(path) -> Picture:
    try:
        return Picture.load(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read picture {path}: {exc}") from None


def _describe_config(m: Manifest, args, cfg: Config) -> None:
    if args.preset:
        m.add("preset", args.preset)
    else:
        m.add("config", args.config)
        m.add("config_sha256", _sha256(args.config))
    m.add("seed", cfg.seed)


# -- subcommands ---------------------------------------------------------------


def cmd_transform(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    src = _load_picture(args.input)
    res = args.resolution or src.width
    if args.pair:
        pair = cfg.pair(args.pair)
        if args.reverse:
            pair = pair.reversed()
        out = transform_raster(pair.backward, src, res, args.threads)
        m.add("pair", args.pair)
        m.add("mode", "pull")
        m.add("depth", pair.depth)
    else:
        if not (args.section and args.target):
            raise ConfigError("transform needs --pair, or --section with --target")
        t = FractalTransform(cfg.section(args.section), cfg.system(args.target))
        out = splat_raster(t, src, res, args.supersample, args.threads)
        m.add("section", args.section)
        m.add("target", args.target)
        m.add("mode", "splat")
        m.add("depth", t.depth)
    m.add("resolution", res)
    out.save(args.out)
    m.output(args.out)


def cmd_steal(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    palette = _load_picture(args.palette)
    palette_ifs = cfg.system(args.palette_system)
    decl = cfg.sections.get(args.section)
    if decl is None:
        raise ConfigError(f"no section named {args.section!r}")
    method = args.method
    if method == "auto":
        method = "tops" if cfg.masks[decl.mask].tops is not None else "masked"
    if method == "tops":
        out = color_steal_tops(cfg.system(decl.system), palette_ifs, palette, args.resolution)
    else:
        drawing = cfg.section(args.section)
        out = color_steal(drawing, palette_ifs, palette, args.resolution, threads=args.threads)
        m.add("depth", drawing.depth)
    m.add("section", args.section)
    m.add("palette_system", args.palette_system)
    m.add("method", method)
    m.add("resolution", args.resolution)
    out.save(args.out)
    m.output(args.out)


def cmd_filter(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    img = _load_picture(args.input)
    pair = cfg.pair(args.pair)
    try:
        out = fractal_filter(img, pair, args.grid, args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    m.add("pair", args.pair)
    m.add("depth", pair.depth)
    m.add("grid", args.grid)
    out.save(args.out)
    m.output(args.out)


def _pack_depth(cfg: Config, args, f, g) -> int:
    if args.depth is not None:
        return args.depth
    if cfg.depth is not None:
        return cfg.depth
    return max(recommended_depth(f, cfg.epsilon), recommended_depth(g, cfg.epsilon))


def cmd_pack(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    if len(args.input) != len(args.threshold):
        raise ConfigError("give one --threshold per --input")
    f, g = cfg.system(args.template), cfg.system(args.target)
    depth = _pack_depth(cfg, args, f, g)
    sources = [(_load_picture(p), t) for p, t in zip(args.input, args.threshold)]
    try:
        out = pack_masked(sources, f, g, args.resolution, args.supersample, args.axis, depth, args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    m.add("thresholds", ",".join(repr(t) for t in args.threshold))
    m.add("depth", depth)
    m.add("supersample", args.supersample)
    out.save(args.out)
    m.output(args.out)


def cmd_unpack(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    f, g = cfg.system(args.template), cfg.system(args.target)
    depth = _pack_depth(cfg, args, f, g)
    combined = _load_picture(args.input)
    out = unpack_masked(combined, args.threshold, f, g, args.resolution, args.axis, depth, args.threads)
    m.add("threshold", args.threshold)
    m.add("depth", depth)
    out.save(args.out)
    m.output(args.out)


def _probs_for(cfg: Config, name: str):
    declared = cfg.probs(name)
    return declared if declared is not None else tuple(float(p) for p in area_probabilities(cfg.system(name)))


def cmd_encode(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    if not (len(args.input) == len(args.system) == len(args.iterations)):
        raise ConfigError("give matching --input, --system and --iterations lists")
    carrier = cfg.system(args.carrier)
    sources = [
        (_load_picture(p), cfg.system(s), _probs_for(cfg, s), n)
        for p, s, n in zip(args.input, args.system, args.iterations)
    ]
    out = encode_measure(sources, carrier, args.resolution, cfg.seed)
    m.add("systems", ",".join(args.system))
    m.add("iterations", ",".join(str(n) for n in args.iterations))
    out.save(args.out)
    m.output(args.out)


def cmd_decode(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    encoded = _load_picture(args.input)
    seed = derive_seed(cfg.seed, args.index)
    out = decode_measure(
        encoded, cfg.system(args.system), _probs_for(cfg, args.system), cfg.system(args.carrier),
        args.iterations, seed, args.resolution,
    )
    m.add("system", args.system)
    m.add("index", args.index)
    m.add("iterations", args.iterations)
    out.save(args.out)
    m.output(args.out)


def cmd_render_repeller(args, m: Manifest) -> None:
    try:
        out = render_repeller_escape(args.a, args.b, args.resolution, args.max_iter, args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    m.add("a", args.a)
    m.add("b", args.b)
    m.add("max_iter", args.max_iter)
    out.save(args.out, grayscale=True)
    m.output(args.out)
    if args.figure:
        from .plotting import escape_figure

        escape_figure(escape_counts(args.a, args.b, args.resolution, args.max_iter, args.threads), args.max_iter, args.a, args.b, args.figure)
        m.output(args.figure, "figure")


def cmd_render_attractor(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    probs = args.probs or _probs_for(cfg, args.system)
    out = render_attractor_density(cfg.system(args.system), probs, args.n, cfg.seed, args.resolution, args.orbits, args.threads)
    m.add("system", args.system)
    m.add("probs", ",".join(repr(float(p)) for p in probs))
    m.add("n", args.n)
    out.save(args.out, grayscale=True)
    m.output(args.out)


def cmd_pstar(args, m: Manifest) -> None:
    try:
        p = compute_p_star(args.a, args.b, args.resolution, args.iterations)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    m.add("a", args.a)
    m.add("b", args.b)
    m.add("resolution", args.resolution)
    m.add("iterations", args.iterations)
    m.add("p_star", round(p, 6))
    if args.figure:
        from .plotting import pstar_figure

        raster = attractor_deterministic(repeller_ifs(args.a, args.b), args.iterations, args.resolution)
        pstar_figure(raster, p, args.a, args.b, args.figure)
        m.output(args.figure, "figure")


def cmd_validate_config(args, m: Manifest) -> None:
    cfg = _load_config(args)
    _describe_config(m, args, cfg)
    checked = cfg.validate()
    m.add("systems", ",".join(cfg.systems))
    m.add("checked", ",".join(checked))
    m.add("valid", "true")


# -- parser ------------------------------------------------------------------------


def _config_args(p) -> None:
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--preset", help=f"built-in configuration: {', '.join(presets.PRESETS)}")
    p.add_argument("--seed", type=int, help="override the configured seed")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads for raster loops")
    parser = _Parser(prog="fractrans", description="Fractal transformations of pictures.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, helptext):
        return sub.add_parser(name, help=helptext, parents=[common])

    p = add("transform", "move a picture through a fractal transformation")
    _config_args(p)
    p.add_argument("--pair", help="named homeomorphism pair (pull resampling)")
    p.add_argument("--reverse", action="store_true", help="use the pair backwards")
    p.add_argument("--section", help="source section, for forward splatting")
    p.add_argument("--target", help="target system, for forward splatting")
    p.add_argument("--supersample", type=int, default=4)
    p.add_argument("--input", required=True)
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = add("steal", "colour-stealing")
    _config_args(p)
    p.add_argument("--section", required=True, help="drawing system with its mask")
    p.add_argument("--palette-system", required=True)
    p.add_argument("--palette", required=True, help="palette picture")
    p.add_argument("--method", choices=("auto", "masked", "tops"), default="auto")
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_steal)

    p = add("filter", "fractal filter T_GF o P o T_FG")
    _config_args(p)
    p.add_argument("--pair", default=None)
    p.add_argument("--input", required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    for name, helptext in (("pack", "store pictures in one through masked transforms"), ("unpack", "recover a packed picture")):
        p = add(name, helptext)
        _config_args(p)
        p.add_argument("--template", default="F", help="masked source system")
        p.add_argument("--target", default="G")
        p.add_argument("--axis", choices=("x", "y"), default="y")
        p.add_argument("--depth", type=int)
        p.add_argument("--resolution", type=int, default=512)
        p.add_argument("--out", required=True)
        if name == "pack":
            p.add_argument("--input", action="append", required=True)
            p.add_argument("--threshold", action="append", type=float, required=True)
            p.add_argument("--supersample", type=int, default=4)
            p.set_defaults(func=cmd_pack)
        else:
            p.add_argument("--input", required=True)
            p.add_argument("--threshold", type=float, required=True)
            p.set_defaults(func=cmd_unpack)

    p = add("encode", "coupled chaos game encoder")
    _config_args(p)
    p.add_argument("--carrier", default="H")
    p.add_argument("--input", action="append", required=True)
    p.add_argument("--system", action="append", required=True)
    p.add_argument("--iterations", action="append", type=int, required=True)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = add("decode", "coupled chaos game decoder")
    _config_args(p)
    p.add_argument("--carrier", default="H")
    p.add_argument("--input", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--index", type=int, default=0, help="position of the source at encode time")
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = add("render-repeller", "escape-time picture of the repeller")
    p.add_argument("--a", type=float, default=2.0 / 3.0)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--max-iter", type=int, default=64)
    p.add_argument("--figure", help="also write an annotated matplotlib figure")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render_repeller)

    p = add("render-attractor", "chaos-game density picture")
    _config_args(p)
    p.add_argument("--system", required=True)
    p.add_argument("--probs", type=float, nargs="+")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--orbits", type=int, default=1)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render_attractor)

    p = add("pstar", "locate the homeomorphism threshold p*")
    p.add_argument("--a", type=float, default=2.0 / 3.0)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--figure", help="also write the attractor with y = 1 - x marked")
    p.set_defaults(func=cmd_pstar)

    p = add("validate-config", "parse a configuration and check every mask")
    _config_args(p)
    p.set_defaults(func=cmd_validate_config)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "filter" and args.pair is None:
            args.pair = _only_pair(args)
        set_default_threads(args.threads)
        manifest = Manifest(args.command)
        args.func(args, manifest)
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}".splitlines()[0], file=stderr)
        return 1
    manifest.emit(stdout)
    return 0


def _only_pair(args) -> str:
    cfg = _load_config(args)
    if len(cfg.pairs) != 1:
        raise ConfigError("the configuration declares several pairs; choose one with --pair")
    return next(iter(cfg.pairs))


if __name__ == "__main__":
    sys.exit(main())
