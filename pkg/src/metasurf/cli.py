"""``metasurf`` command line: config-driven solves, sweeps, exports, validation.

Usage::

    metasurf scatter|sweep|field|sums|validate --config run.json [--jobs N] [--out PATH]

Exit codes: 0 ok, 1 config or I/O error, 2 physics error (a JSON error
record with the error ``kind`` is written to stderr), 3 validation failure.
Logging goes to stderr at the level named by ``METASURF_LOG``
(error, warning, info or debug; default error).
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .accel import AccelSpec
from .errors import MetasurfError
from .grating import field_eval, fmt
from .lattice import GratingConfig, lattice_sums
from .pipeline import solve
from .scatter import FAMILIES, ScatteringMatrix
from .surface import admittance_Y, impedance_Z, jump_operators, operators_csv
from .validation import DEFAULT_TOLERANCES, run_suite

log = logging.getLogger("metasurf")

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_VALIDATION = 0, 1, 2, 3
OUTPUT_KINDS = ("orders", "field", "sums", "operators", "validate", "sweep")
SCENE_KEYS = {"k0", "wavelength", "theta", "d", "n_orders", "n_multipole", "units"}
SCENE_TOLERANCES = {"wood"}


class ConfigError(Exception):
    """Malformed or inconsistent run configuration (exit code 1)."""


@dataclass(frozen=True)
class OutputSpec:
    kind: str
    path: Path
    format: str = "csv"


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    count: int

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration.

    Lengths are in units of the period when ``scene.units == "period"``
    (the default): ``d`` is then 1 and ``k0`` means k0*d. With
    ``"absolute"`` the period ``d`` is taken as given.
    """

    scene: dict
    smat: ScatteringMatrix
    sweep: SweepSpec = None
    outputs: tuple = ()
    tolerances: dict = field(default_factory=dict)
    accel: AccelSpec = field(default_factory=AccelSpec)
    points: tuple = ()
    p_max: int = None
    base_dir: Path = Path(".")

    def grating(self, **override):
        """Build the GratingConfig (may raise physics errors such as WoodAnomaly)."""
        scene = dict(self.scene, **override)
        return GratingConfig(
            k0=scene["k0"], theta=scene.get("theta", 0.0), d=scene.get("d", 1.0),
            n_orders=scene.get("n_orders"), n_multipole=scene.get("n_multipole", 1),
            wood_tol=self.tolerances.get("wood", 1e-12),
        )


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _parse_scene(doc):
    if not isinstance(doc, dict):
        raise ConfigError("'scene' must be an object")
    unknown = set(doc) - SCENE_KEYS
    if unknown:
        raise ConfigError(f"unknown scene keys: {sorted(unknown)}")
    units = doc.get("units", "period")
    if units not in ("period", "absolute"):
        raise ConfigError(f"scene.units must be 'period' or 'absolute', got {units!r}")
    if ("k0" in doc) == ("wavelength" in doc):
        raise ConfigError("scene needs exactly one of 'k0' or 'wavelength'")
    if units == "period":
        if "d" in doc and _number(doc["d"], "scene.d") != 1.0:
            raise ConfigError("scene.d must be 1 (or omitted) with units='period'")
        d = 1.0
    else:
        d = _number(doc.get("d", 1.0), "scene.d")
    if "k0" in doc:
        k0 = _number(doc["k0"], "scene.k0")
    else:
        lam = _number(doc["wavelength"], "scene.wavelength")
        if lam <= 0:
            raise ConfigError("scene.wavelength must be positive")
        k0 = 2.0 * math.pi / lam
    scene = {"k0": k0, "d": d, "theta": _number(doc.get("theta", 0.0), "scene.theta")}
    for key in ("n_orders", "n_multipole"):
        if key in doc and doc[key] is not None:
            if isinstance(doc[key], bool) or not isinstance(doc[key], int) or doc[key] < 0:
                raise ConfigError(f"scene.{key} must be a non-negative integer")
            scene[key] = doc[key]
    return scene


def _resolve(path, base):
    p = Path(path)
    return p if p.is_absolute() else base / p


def _parse_scatterer(doc, base):
    if not isinstance(doc, dict):
        raise ConfigError("'scatterer' must be an object")
    sources = [k for k in ("family", "file", "entries") if k in doc]
    if len(sources) != 1:
        raise ConfigError("scatterer needs exactly one of 'family', 'file' or 'entries'")
    try:
        if "family" in doc:
            name = doc["family"]
            if name not in FAMILIES:
                raise ConfigError(f"unknown scatterer family {name!r}; known: {sorted(FAMILIES)}")
            params = doc.get("params", {})
            if not isinstance(params, dict):
                raise ConfigError("scatterer.params must be an object")
            try:
                return FAMILIES[name](**params)
            except TypeError as exc:
                raise ConfigError(f"bad parameters for family {name!r}: {exc}") from exc
        if "file" in doc:
            path = _resolve(doc["file"], base)
            if not path.is_file():
                raise ConfigError(f"scatterer file not found: {path}")
            return ScatteringMatrix.from_json(json.loads(path.read_text()))
        entries = doc["entries"]
        if isinstance(entries, dict):
            return ScatteringMatrix.from_json(entries)
        return ScatteringMatrix.from_json({"n_multipole": doc.get("n_multipole"), "entries": entries,
                                           "lossless": doc.get("lossless", False)})
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scatterer: {exc}") from exc


def _parse_sweep(doc):
    if doc is None:
        return None
    if not isinstance(doc, dict) or set(doc) != {"parameter", "start", "stop", "count"}:
        raise ConfigError("sweep must be {parameter, start, stop, count}")
    if doc["parameter"] not in ("k0", "theta"):
        raise ConfigError(f"sweep.parameter must be 'k0' or 'theta', got {doc['parameter']!r}")
    count = doc["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 2:
        raise ConfigError("sweep.count must be an integer >= 2")
    return SweepSpec(doc["parameter"], _number(doc["start"], "sweep.start"),
                     _number(doc["stop"], "sweep.stop"), count)


def _parse_outputs(doc, base):
    out = []
    for item in doc or []:
        if not isinstance(item, dict) or "kind" not in item or "path" not in item:
            raise ConfigError("each output needs 'kind' and 'path'")
        if item["kind"] not in OUTPUT_KINDS:
            raise ConfigError(f"unknown output kind {item['kind']!r}")
        fmt_ = item.get("format", "csv")
        if fmt_ not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {fmt_!r}")
        path = _resolve(item["path"], base)
        if not path.parent.is_dir():
            raise ConfigError(f"output directory does not exist: {path.parent}")
        out.append(OutputSpec(item["kind"], path, fmt_))
    return tuple(out)


def _parse_points(doc):
    if doc is None:
        return ()
    if "points" in doc:
        pts = [(_number(x, "field x"), _number(y, "field y")) for x, y in doc["points"]]
    elif "grid" in doc:
        g = doc["grid"]
        xs = np.linspace(*map(float, g["x"][:2]), int(g["x"][2]))
        ys = np.linspace(*map(float, g["y"][:2]), int(g["y"][2]))
        pts = [(float(x), float(y)) for y in ys for x in xs]
    else:
        raise ConfigError("field needs 'points' or 'grid'")
    if any(y == 0.0 for _, y in pts):
        raise ConfigError("field points must lie off the scatterer line y = 0")
    return tuple(pts)


def load_config(path):
    """Parse and check a JSON run configuration; raises ConfigError."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {"scene", "scatterer", "sweep", "outputs", "tolerances", "accel", "field", "sums"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    base = path.parent
    if "scene" not in doc or "scatterer" not in doc:
        raise ConfigError("config needs 'scene' and 'scatterer'")
    tolerances = doc.get("tolerances", {})
    bad = set(tolerances) - set(DEFAULT_TOLERANCES) - SCENE_TOLERANCES
    if bad:
        raise ConfigError(f"unknown tolerance names: {sorted(bad)}")
    tolerances = {k: _number(v, f"tolerances.{k}") for k, v in tolerances.items()}
    try:
        accel = AccelSpec(**doc.get("accel", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid accel section: {exc}") from exc
    p_max = doc.get("sums", {}).get("p_max")
    return RunConfig(
        scene=_parse_scene(doc["scene"]),
        smat=_parse_scatterer(doc["scatterer"], base),
        sweep=_parse_sweep(doc.get("sweep")),
        outputs=_parse_outputs(doc.get("outputs"), base),
        tolerances=tolerances,
        accel=accel,
        points=_parse_points(doc.get("field")),
        p_max=p_max,
        base_dir=base,
    )


# ----------------------------------------------------------------- rendering

def _pair(z):
    return [float(z.real), float(z.imag)]


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _sums_for(rc, cfg):
    p_max = rc.p_max if rc.p_max is not None else max(2, 2 * cfg.n_multipole)
    return lattice_sums(cfg, p_max=p_max, accel=rc.accel)


def render_orders(sol, format):
    if format == "csv":
        return sol.table.to_csv()
    doc = {"orders": sol.table.as_dict(), "moments": sol.moments.as_dict(), "deficit": sol.deficit}
    return json.dumps(doc, indent=2) + "\n"


def render_sums(sums, format):
    ps = sorted(sums.sigma)
    if format == "csv":
        return _csv_text(["p", "sigma_re", "sigma_im", "error"],
                         [[p, fmt(sums[p].real), fmt(sums[p].imag), fmt(sums.errors.get(p, 0.0))]
                          for p in ps])
    return json.dumps({"sigma": {str(p): _pair(sums[p]) for p in ps},
                       "errors": {str(p): sums.errors.get(p, 0.0) for p in ps}}, indent=2) + "\n"


def render_operators(cfg, sol, format):
    X, W = jump_operators(cfg, sol.table, sol.moments)
    ops = [impedance_Z(cfg), admittance_Y(cfg), X, W]
    if format == "csv":
        return operators_csv(ops)
    return json.dumps({"n": cfg.orders.tolist(),
                       **{op.name: [_pair(z) for z in op.symbol] for op in ops}}, indent=2) + "\n"


def render_field(cfg, sol, points, format):
    vals = [field_eval(cfg, sol.table, x, y) for x, y in points]
    if format == "csv":
        return _csv_text(["x", "y", "u_re", "u_im"],
                         [[fmt(x), fmt(y), fmt(v.real), fmt(v.imag)] for (x, y), v in zip(points, vals)])
    return json.dumps({"points": [list(p) for p in points], "u": [_pair(v) for v in vals]},
                      indent=2) + "\n"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    log.info("wrote %s", path)


def _format_of(path, default="csv"):
    if path is None:
        return default
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def _targets(rc, kind, out, default_format="csv"):
    """Output destinations for ``kind``: config entries, plus --out, else stdout."""
    targets = [(o.path, o.format) for o in rc.outputs if o.kind == kind]
    if out is not None:
        targets.append((Path(out), _format_of(out, default_format)))
    if not targets:
        targets.append((None, default_format))
    return targets


# ------------------------------------------------------------------ commands

def cmd_scatter(rc, out=None, jobs=1):
    cfg = rc.grating()
    sums = _sums_for(rc, cfg)
    sol = solve(cfg, rc.smat, accel=rc.accel, sums=sums)
    for path, format in _targets(rc, "orders", out):
        _emit(render_orders(sol, format), path)
    for o in rc.outputs:
        if o.kind == "sums":
            _emit(render_sums(sums, o.format), o.path)
        elif o.kind == "operators":
            _emit(render_operators(cfg, sol, o.format), o.path)
        elif o.kind == "field":
            _emit(render_field(cfg, sol, rc.points, o.format), o.path)
    summary = {"deficit": sol.deficit, "n_propagative": cfg.n_propagative,
               "moments": sol.moments.as_dict()}
    if all(path is not None for path, _ in _targets(rc, "orders", out)):
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


SWEEP_HEADER = ["index", "value", "r0_re", "r0_im", "t0_re", "t0_im", "deficit",
                "sigma0_re", "sigma0_im", "sigma1_re", "sigma1_im", "sigma2_re", "sigma2_im", "error"]


def sweep_point(rc, index, value):
    """One sweep row; physics errors are reported in the last column."""
    try:
        cfg = rc.grating(**{rc.sweep.parameter: float(value)})
        sums = _sums_for(rc, cfg)
        sol = solve(cfg, rc.smat, accel=rc.accel, sums=sums)
        i0 = sol.table.row(0)
        r0, t0 = sol.table.r[i0], sol.table.t[i0]
        cells = [fmt(r0.real), fmt(r0.imag), fmt(t0.real), fmt(t0.imag), fmt(sol.deficit)]
        for p in (0, 1, 2):
            cells += [fmt(sums[p].real), fmt(sums[p].imag)]
        return [index, fmt(value), *cells, ""]
    except MetasurfError as exc:
        return [index, fmt(value), *([""] * 11), exc.kind]


def _sweep_worker(args):
    return sweep_point(*args)


def sweep_rows(rc, jobs=1):
    tasks = [(rc, i, v) for i, v in enumerate(rc.sweep.values)]
    if jobs <= 1:
        return [sweep_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves submission order, so rows stay sorted by index
        return list(pool.map(_sweep_worker, tasks))


def cmd_sweep(rc, out=None, jobs=1):
    if rc.sweep is None:
        raise ConfigError("the sweep command needs a 'sweep' section")
    rows = sweep_rows(rc, jobs)
    text = _csv_text(SWEEP_HEADER, rows)
    for path, _ in _targets(rc, "sweep", out):
        _emit(text, path)
    failed = sum(1 for r in rows if r[-1])
    if failed:
        log.warning("%d of %d sweep points failed", failed, len(rows))
    return EXIT_OK


def cmd_field(rc, out=None, jobs=1):
    if not rc.points:
        raise ConfigError("the field command needs a 'field' section")
    cfg = rc.grating()
    sol = solve(cfg, rc.smat, accel=rc.accel)
    for path, format in _targets(rc, "field", out):
        _emit(render_field(cfg, sol, rc.points, format), path)
    return EXIT_OK


def cmd_sums(rc, out=None, jobs=1):
    cfg = rc.grating()
    sums = _sums_for(rc, cfg)
    for path, format in _targets(rc, "sums", out):
        _emit(render_sums(sums, format), path)
    return EXIT_OK


def cmd_validate(rc, out=None, jobs=1):
    tolerances = {k: v for k, v in (rc.tolerances if rc else {}).items() if k in DEFAULT_TOLERANCES}
    records = run_suite(tolerances)
    text = json.dumps(records, indent=2) + "\n"
    targets = _targets(rc, "validate", out, "json") if rc else [(out, "json")]
    for path, _ in targets:
        _emit(text, path)
    failed = [r["check"] for r in records if r["status"] != "pass"]
    if failed:
        log.error("validation failed: %s", ", ".join(failed))
        return EXIT_VALIDATION
    return EXIT_OK


COMMANDS = {"scatter": cmd_scatter, "sweep": cmd_sweep, "field": cmd_field,
            "sums": cmd_sums, "validate": cmd_validate}


def build_parser():
    parser = argparse.ArgumentParser(prog="metasurf", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON run configuration (optional for validate)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--out", help="extra output path; .json selects JSON, anything else CSV")
    return parser


def _setup_logging():
    level = os.environ.get("METASURF_LOG", "error").upper()
    if level not in ("ERROR", "WARNING", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config is None:
            if args.command != "validate":
                raise ConfigError(f"the {args.command} command needs --config")
            rc = None
        else:
            rc = load_config(args.config)
        return COMMANDS[args.command](rc, out=args.out, jobs=args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MetasurfError as exc:
        record = {"error": exc.kind, "message": str(exc)}
        if getattr(exc, "order", None) is not None:
            record["order"] = exc.order
        print(json.dumps(record), file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
