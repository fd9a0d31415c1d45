"""Command-line front end: ``mesh``, ``run`` and ``sweep`` verbs.

Results are CSV on standard output; diagnostics go to standard error.
Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from .benchmarks import SweepSpec, run_case, sweep
from .constitutive import EngineeringParams, pointwise_stability
from .errors import TIVemError
from .fibre import D_CRIT_DEFAULT, FibreField, Strategy
from .mesh import DomainSpec, generate, map_to_domain, validate, write_mesh

log = logging.getLogger("tivem")

PROBLEMS = ("cook", "beam-a", "beam-b")
ELEMENTS = ("quad", "hex", "voronoi", "q1", "q2")
DEFAULT_E_T = {"cook": 250.0, "beam-a": 1500.0, "beam-b": 1500.0}

RUN_COLUMNS = (
    "problem,element,density,nu,p,fibre,strategy,"
    "probe_u,probe_v,snap_dist,residual,wall_ms"
)


class ConfigError(ValueError):
    pass


class InputError(OSError):
    pass


@dataclass
class RunConfig:
    problem: str = "cook"
    element: str = "quad"
    density: int = 10
    E_T: Optional[float] = None
    nu: float = 0.3
    p: float = 5.0
    fibre: str = "constant:0.7853981634"
    strategy: str = "centroid"
    d_crit: float = D_CRIT_DEFAULT
    seed: int = 42
    lloyd_iters: int = 10
    solver: str = "direct"

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem: expected one of {PROBLEMS}, got {self.problem!r}")
        for el in self.element.split(","):
            if el not in ELEMENTS:
                raise ConfigError(f"element: expected one of {ELEMENTS}, got {el!r}")
        if self.density < 1:
            raise ConfigError(f"density: must be >= 1, got {self.density}")
        if self.density < 2 and any(e in ("hex", "voronoi") for e in self.element.split(",")):
            raise ConfigError("density: hex and voronoi meshes need density >= 2")
        try:
            self.material().validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not pointwise_stability(self.material()):
            raise ConfigError("nu/p: parameters are not pointwise stable")
        if self.strategy not in [s.value for s in Strategy]:
            raise ConfigError(f"strategy: unknown strategy {self.strategy!r}")
        if not self.d_crit > 0:
            raise ConfigError(f"d_crit: must be positive, got {self.d_crit}")
        if self.lloyd_iters < 0:
            raise ConfigError(f"lloyd_iters: must be >= 0, got {self.lloyd_iters}")
        if self.solver not in ("direct", "cg"):
            raise ConfigError(f"solver: expected direct or cg, got {self.solver!r}")
        self.fibre_field()

    def material(self) -> EngineeringParams:
        E_T = DEFAULT_E_T.get(self.problem, 1.0) if self.E_T is None else self.E_T
        return EngineeringParams(E_T, self.nu, self.p)

    def fibre_field(self) -> FibreField:
        kind, _, arg = self.fibre.partition(":")
        if kind == "constant":
            try:
                angle = float(arg)
            except ValueError:
                raise ConfigError(f"fibre: bad angle in {self.fibre!r} (radians)") from None
            if not math.isfinite(angle):
                raise ConfigError(f"fibre: angle must be finite, got {arg!r}")
            return FibreField("constant", angle, self.d_crit)
        if kind == "quartic" and not arg:
            family = "quartic-cook" if self.problem == "cook" else "quartic-beam"
            return FibreField(family, 0.0, self.d_crit)
        if kind == "sinusoidal" and not arg:
            return FibreField("sinusoidal", 0.0, self.d_crit)
        raise ConfigError(
            f"fibre: expected constant:<radians>, quartic or sinusoidal, got {self.fibre!r}"
        )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _run_row(cfg: RunConfig, probe_u, probe_v, snap, residual, wall_ms, timing: bool) -> str:
    return ",".join(
        [
            cfg.problem,
            cfg.element,
            str(cfg.density),
            _fmt(cfg.nu),
            _fmt(cfg.p),
            cfg.fibre,
            cfg.strategy,
            _fmt(probe_u),
            _fmt(probe_v),
            _fmt(snap),
            _fmt(residual),
            format(wall_ms, ".3f") if timing else "0",
        ]
    )


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", default="cook")
    p.add_argument("--element", default="quad")
    p.add_argument("--density", type=int, default=10)
    p.add_argument("--E_T", type=float, default=None, help="default: 250 (cook), 1500 (beam)")
    p.add_argument("--nu", type=float, default=0.3)
    p.add_argument("--p", type=float, default=5.0)
    p.add_argument("--fibre", default="constant:0.7853981634",
                   help="constant:<radians> | quartic | sinusoidal")
    p.add_argument("--strategy", default="centroid", help="centroid | nodal | equal | varying")
    p.add_argument("--d_crit", type=float, default=D_CRIT_DEFAULT)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--lloyd_iters", type=int, default=10)
    p.add_argument("--solver", default="direct", help="direct | cg")
    p.add_argument("--emit-config", action="store_true",
                   help="print the resolved configuration as a leading comment line")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="write wall_ms as 0 so repeated runs are byte-identical")


def _config_from(args) -> RunConfig:
    cfg = RunConfig(
        problem=args.problem,
        element=args.element,
        density=args.density,
        E_T=args.E_T,
        nu=args.nu,
        p=args.p,
        fibre=args.fibre,
        strategy=args.strategy,
        d_crit=args.d_crit,
        seed=args.seed,
        lloyd_iters=args.lloyd_iters,
        solver=args.solver,
    )
    cfg.validate()
    cfg.E_T = cfg.material().E_T
    return cfg


def _case_kwargs(cfg: RunConfig) -> dict:
    return dict(
        problem=cfg.problem,
        density=cfg.density,
        nu=cfg.nu,
        p=cfg.p,
        fibre=cfg.fibre_field(),
        strategy=cfg.strategy,
        E_T=cfg.material().E_T,
        seed=cfg.seed,
        lloyd_iters=cfg.lloyd_iters,
        solver=cfg.solver,
    )


def cmd_run(args, out) -> int:
    cfg = _config_from(args)
    if "," in cfg.element:
        raise ConfigError("element: run takes a single element kind")
    try:
        res = run_case(kind=cfg.element, **_case_kwargs(cfg))
    except TIVemError as exc:
        log.error("solver failure: %s: %s", type(exc).__name__, exc)
        return 3
    if args.emit_config:
        out.write("# config: " + json.dumps(asdict(cfg), sort_keys=True) + "\n")
    out.write(RUN_COLUMNS + "\n")
    out.write(
        _run_row(cfg, res.probe.u, res.probe.v, res.probe.distance, res.residual,
                 res.wall_ms, args.timing) + "\n"
    )
    return 0


def _parse_values(args) -> list:
    text = args.values
    if args.values_file:
        try:
            with open(args.values_file) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read values file: {exc}") from None
    if not text:
        raise ConfigError("values: give --values or --values-file")
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"values: could not parse {text!r}") from None


def cmd_sweep(args, out) -> int:
    cfg = _config_from(args)
    values = _parse_values(args)
    if args.axis == "density":
        if any(v != int(v) or v < 1 for v in values):
            raise ConfigError("values: densities must be positive integers")
        values = [int(v) for v in values]
    elif args.axis == "p":
        for v in values:
            try:
                EngineeringParams(1.0, cfg.nu, v).validate()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    kinds = cfg.element.split(",")
    base = _case_kwargs(cfg)
    spec = SweepSpec(axis=args.axis, values=values, kinds=kinds, base=base)
    rows = sweep(spec, jobs=args.jobs)

    if args.emit_config:
        out.write("# config: " + json.dumps(asdict(cfg), sort_keys=True) + "\n")
    out.write(f"{args.axis},{RUN_COLUMNS},status\n")
    for r in rows:
        rc = RunConfig(**{**asdict(cfg), "element": r.kind})
        if args.axis == "density":
            rc.density = int(r.value)
        elif args.axis == "p":
            rc.p = r.value
        else:
            rc.fibre = f"constant:{_fmt(r.value)}"
        value = str(r.value) if args.axis == "density" else _fmt(r.value)
        line = _run_row(rc, r.probe_u, r.probe_v, r.snap_dist, r.residual, r.wall_ms, args.timing)
        out.write(f"{value},{line},{r.status}\n")
        if r.status:
            log.error("row %s=%s %s failed: %s", args.axis, value, r.kind, r.error)
    return 0


def cmd_mesh(args, out) -> int:
    if args.kind not in ("quad", "hex", "voronoi"):
        raise ConfigError(f"kind: expected quad, hex or voronoi, got {args.kind!r}")
    if args.density < (1 if args.kind == "quad" else 2):
        raise ConfigError(f"density: too small for {args.kind} meshes")
    try:
        domain = DomainSpec.from_name(args.domain)
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from None
    try:
        mesh = generate(args.kind, args.density, args.seed, args.lloyd_iters)
    except TIVemError as exc:
        log.error("mesh generation failed: %s", exc)
        return 3
    mesh = map_to_domain(mesh, domain)
    validate(mesh, domain.area())
    try:
        write_mesh(mesh, args.output)
    except OSError as exc:
        log.error("cannot write mesh: %s", exc)
        return 4
    log.info("wrote %d cells to %s", mesh.n_cells, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tivem", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    pm = sub.add_parser("mesh", help="generate and export a mesh")
    pm.add_argument("--kind", default="quad")
    pm.add_argument("--density", type=int, default=10)
    pm.add_argument("--seed", type=int, default=42)
    pm.add_argument("--lloyd_iters", type=int, default=10)
    pm.add_argument("--domain", default="unit", help="unit | cook | beam")
    pm.add_argument("--output", required=True)

    pr = sub.add_parser("run", help="single benchmark run, one CSV row")
    _add_run_flags(pr)

    ps = sub.add_parser("sweep", help="parameter sweep, one CSV row per case")
    _add_run_flags(ps)
    ps.set_defaults(element=",".join(ELEMENTS))
    ps.add_argument("--axis", required=True, choices=("density", "p", "angle"))
    ps.add_argument("--values", default=None, help="comma or space separated list")
    ps.add_argument("--values-file", default=None)
    ps.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handler = {"mesh": cmd_mesh, "run": cmd_run, "sweep": cmd_sweep}[args.verb]
    try:
        return handler(args, out)
    except ConfigError as exc:
        print(f"tivem: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"tivem: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
