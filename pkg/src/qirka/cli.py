"""Batch front end: ``qirka run | sweep | diagnose``.

Configuration files are INI-style::

    [benchmark]
    kind = chain          ; chain | bkc | bus | file
    n = 100
    m = 2
    variant = homogeneous

    [qirka]
    r = 10

Every ``[qirka]`` key has a default (``L = r``, ``epsilon = 1e-6``,
``max_iter = 100``, ``tau = 1e-12``, ``init_strategy = log-spaced-real``).
A sweep file may add a ``[sweep]`` section with ``grid = n,m,r; n,m,r; ...``
and ``variants = homogeneous, heterogeneous``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis
from .benchmarks import BKCConfig, BusConfig, ChainConfig, build_bkc, build_bus, build_chain
from .engine import QirkaConfig, run
from .errors import ConfigError, ParseError, QirkaError
from .matrixio import format_float, load_model, read_matrix, save_model, write_matrix
from .model import pr_residuals
from .projection import make_pair, project

log = logging.getLogger("qirka")

KINDS = ("chain", "bkc", "bus", "file")
DEFECT_TOL = 1e-10

SUMMARY_FIELDS = [
    "name", "benchmark", "variant", "n", "m", "r", "L", "iterations", "converged",
    "h2_norm_full", "abs_h2_error", "rel_h2_error",
    "symp", "left", "pr1", "pr2", "error_code", "error_message",
]
TRACE_FIELDS = ["iteration", "relchg", "symp", "left", "pr1", "pr2", "shifts", "poles"]
SWEEP_FIELDS = [
    "name", "benchmark", "n", "m", "r", "variant", "iterations", "converged",
    "rel_h2_error", "error_code",
]


@dataclass(frozen=True)
class RunConfig:
    kind: str
    params: dict
    qirka: QirkaConfig
    outdir: str = "out"
    name: str = "run"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown benchmark kind {self.kind!r}")


@dataclass
class RunReport:
    name: str
    benchmark: str
    variant: str
    n: int
    m: int
    r: int
    L: int = 0
    iterations: int = 0
    converged: bool = False
    h2_norm_full: float = float("nan")
    abs_h2_error: float = float("nan")
    rel_h2_error: float = float("nan")
    symp: float = float("nan")
    left: float = float("nan")
    pr1: float = float("nan")
    pr2: float = float("nan")
    error_code: str = ""
    error_message: str = ""
    wall_seconds: float = float("nan")
    iteration_seconds: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        defects = (self.symp, self.left, self.pr1, self.pr2)
        return (
            not self.error_code
            and self.converged
            and all(np.isfinite(d) and d <= DEFECT_TOL for d in defects)
        )


# ---------------------------------------------------------------- config parsing


def _floats(text):
    return tuple(float(x) for x in str(text).replace(";", ",").split(",") if x.strip())


def _complexes(text):
    return tuple(complex(x.replace(" ", "")) for x in str(text).split(",") if x.strip())


_BENCH_KEYS = {
    "chain": {"n": int, "m": int, "variant": str, "coupling": float,
              "kappa_ch": _floats, "kappa_site": _floats, "omega": _floats},
    "bkc": {"n": int, "m": int, "variant": str, "J_mag": float, "lambda_mag": float,
            "kappa_ch": _floats, "kappa_site": _floats, "omega": _floats,
            "target_margin": float},
    "bus": {"gamma": float, "omega0": float, "omega_j": _floats, "kappa_j": _floats,
            "coupling": str},
    "file": {"path": str, "monitor_path": str},
}


def _parse_qirka(sec) -> QirkaConfig:
    known = {"r", "l", "epsilon", "max_iter", "tau", "init_strategy", "initial_shifts"}
    extra = set(sec) - known
    if extra:
        raise ConfigError(f"unknown [qirka] keys: {sorted(extra)}")
    if "r" not in sec:
        raise ConfigError("[qirka] needs r")
    try:
        kw = {"r": int(sec["r"])}
        if "l" in sec:
            kw["L"] = int(sec["l"])
        if "epsilon" in sec:
            kw["epsilon"] = float(sec["epsilon"])
        if "max_iter" in sec:
            kw["max_iter"] = int(sec["max_iter"])
        if "tau" in sec:
            kw["tau"] = float(sec["tau"])
        if "init_strategy" in sec:
            kw["init_strategy"] = sec["init_strategy"].strip()
        if "initial_shifts" in sec:
            kw["initial_shifts"] = _complexes(sec["initial_shifts"])
            kw.setdefault("init_strategy", "user-provided")
    except ValueError as exc:
        raise ConfigError(f"bad [qirka] value: {exc}") from None
    return QirkaConfig(**kw)


def _parse_benchmark(sec):
    kind = sec.get("kind", "").strip()
    if kind not in KINDS:
        raise ConfigError(f"[benchmark] kind must be one of {KINDS}, got {kind!r}")
    keys = _BENCH_KEYS[kind]
    # configparser lower-cases keys
    lookup = {k.lower(): k for k in keys}
    params = {}
    for key, raw in sec.items():
        if key == "kind":
            continue
        if key not in lookup:
            raise ConfigError(f"unknown [benchmark] key {key!r} for kind {kind}")
        name = lookup[key]
        try:
            params[name] = keys[name](raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return kind, params


def load_config(path, outdir=None) -> list[RunConfig]:
    """Read a config file into one RunConfig, or one per grid point of ``[sweep]``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    for required in ("benchmark", "qirka"):
        if not cp.has_section(required):
            raise ConfigError(f"{path}: missing [{required}] section")
    kind, params = _parse_benchmark(dict(cp["benchmark"]))
    qcfg = _parse_qirka(dict(cp["qirka"]))
    out = outdir or (cp["outputs"].get("dir") if cp.has_section("outputs") else None) or "out"
    stem = Path(path).stem
    if not cp.has_section("sweep"):
        return [RunConfig(kind, params, qcfg, out, stem)]
    sw = cp["sweep"]
    try:
        grid = [tuple(int(v) for v in t.split(",")) for t in sw.get("grid", "").split(";") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad [sweep] grid: {exc}") from None
    if not grid or any(len(t) != 3 for t in grid):
        raise ConfigError("[sweep] grid must list n,m,r triples separated by ';'")
    variants = [v.strip() for v in sw.get("variants", params.get("variant", "homogeneous")).split(",") if v.strip()]
    runs = []
    for n, m, r in grid:
        for v in variants:
            p = dict(params, n=n, m=m, variant=v)
            runs.append(RunConfig(kind, p, replace(qcfg, r=r), out, f"{kind}_{v[:3]}_n{n}_m{m}_r{r}"))
    return runs


# ---------------------------------------------------------------- building


def build_models(cfg: RunConfig):
    """Return ``(external, monitor_or_None, variant)``; raises ConfigError on bad input."""
    p = dict(cfg.params)
    try:
        if cfg.kind == "chain":
            c = ChainConfig(**p)
            full, ext = build_chain(c)
            return ext, full, c.variant
        if cfg.kind == "bkc":
            c = BKCConfig(**p)
            full, ext = build_bkc(c)
            return ext, full, c.variant
        if cfg.kind == "bus":
            model = build_bus(BusConfig(**p))
            return model, None, "-"
        model = load_model(p["path"])
        mon = load_model(p["monitor_path"]) if "monitor_path" in p else None
        return model, mon, "-"
    except TypeError as exc:
        raise ConfigError(f"missing or invalid benchmark parameter: {exc}") from None
    except KeyError as exc:
        raise ConfigError(f"missing benchmark parameter {exc}") from None
    except (ParseError, OSError) as exc:
        raise ConfigError(f"cannot load model: {exc}") from None


# ---------------------------------------------------------------- writers


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def _fmt_complex(z):
    return "%s%+.17gj" % (format_float(z.real), z.imag)


def _write_csv(path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(row[f]) for f in fields])


def _summary_row(rep: RunReport):
    d = asdict(rep)
    return {f: d[f] for f in SUMMARY_FIELDS}


# ---------------------------------------------------------------- commands


def cmd_run(cfg: RunConfig, outdir=None) -> RunReport:
    """Build, reduce and analyse one configuration; write the run's files into ``outdir``."""
    out = Path(outdir or cfg.outdir)
    ext, monitor, variant = build_models(cfg)  # validation gate: nothing written yet
    q = cfg.qirka
    rep = RunReport(cfg.name, cfg.kind, variant, ext.n, ext.m, q.r, q.per_shift)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = run(ext, q, monitor=monitor)
    except QirkaError as exc:
        rep.error_code, rep.error_message = exc.code, str(exc)
        _write_csv(out / "summary.csv", SUMMARY_FIELDS, [_summary_row(rep)])
        return rep
    rep.iterations, rep.converged = res.iterations, res.converged
    d = res.diagnostics
    rep.symp, rep.left, rep.pr1, rep.pr2 = d.symp, d.left, d.pr1, d.pr2
    rep.wall_seconds = res.wall_time
    rep.iteration_seconds = [t.elapsed for t in res.trace]
    trace_rows = [
        {
            "iteration": t.iteration, "relchg": t.relchg, "symp": t.symp, "left": t.left,
            "pr1": t.pr1, "pr2": t.pr2,
            "shifts": " ".join(_fmt_complex(z) for z in t.shifts),
            "poles": " ".join(_fmt_complex(z) for z in np.sort_complex(t.poles)),
        }
        for t in res.trace
    ]
    _write_csv(out / "trace.csv", TRACE_FIELDS, trace_rows)
    try:
        g = analysis.gramians(ext)
        hsv = analysis.hankel_singular_values(g)
        _write_csv(out / "hsv.csv", ["index", "sigma"],
                   [{"index": i + 1, "sigma": s} for i, s in enumerate(hsv)])
        ec = np.sort(np.linalg.eigvalsh(g.Wc))[::-1]
        eo = np.sort(np.linalg.eigvalsh(g.Wo))[::-1]
        _write_csv(out / "gramian_spectra.csv", ["index", "eig_Wc", "eig_Wo"],
                   [{"index": i + 1, "eig_Wc": a, "eig_Wo": b} for i, (a, b) in enumerate(zip(ec, eo))])
        rep.h2_norm_full = analysis.h2_norm(ext)
        rep.abs_h2_error, rep.rel_h2_error = analysis.h2_error(ext, res.reduced, res.pair.V)
    except QirkaError as exc:
        rep.error_code, rep.error_message = exc.code, str(exc)
    save_model(out / "reduced_model", res.reduced)
    write_matrix(out / "reduced_model" / "V.txt", res.pair.V)
    _write_csv(out / "summary.csv", SUMMARY_FIELDS, [_summary_row(rep)])
    (out / "timing.json").write_text(json.dumps(
        {"wall_seconds": rep.wall_seconds, "iteration_seconds": rep.iteration_seconds}, indent=1
    ) + "\n")
    return rep


def _sweep_one(args):
    cfg, out = args
    try:
        return cmd_run(cfg, out)
    except QirkaError as exc:
        return RunReport(cfg.name, cfg.kind, str(cfg.params.get("variant", "-")),
                         int(cfg.params.get("n", 0)), int(cfg.params.get("m", 0)), cfg.qirka.r,
                         error_code=exc.code, error_message=str(exc))


def cmd_sweep(configs, outdir, workers: int = 1) -> list[RunReport]:
    """Run every config in its own subdirectory; rows come back in input order."""
    if not configs:
        raise ConfigError("sweep needs at least one configuration")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(c, out / c.name) for c in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(_sweep_one, jobs))
    else:
        reports = [_sweep_one(j) for j in jobs]
    _write_csv(out / "sweep.csv", SWEEP_FIELDS, [
        {f: getattr(rep, f) for f in SWEEP_FIELDS} for rep in reports
    ])
    _write_table(out / "table.csv", reports)
    return reports


def _write_table(path, reports):
    """Wide table: one row per (n, m, r) with time and relative error per variant."""
    keys, cells = [], {}
    for rep in reports:
        k = (rep.n, rep.m, rep.r)
        if k not in cells:
            keys.append(k)
            cells[k] = {}
        cells[k][rep.variant] = rep
    fields = ["n", "m", "r", "T_hom", "E_hom", "T_het", "E_het"]
    rows = []
    for k in keys:
        row = dict(zip(("n", "m", "r"), k))
        for tag, v in (("hom", "homogeneous"), ("het", "heterogeneous")):
            rep = cells[k].get(v)
            row[f"T_{tag}"] = rep.wall_seconds if rep else float("nan")
            row[f"E_{tag}"] = rep.rel_h2_error if rep else float("nan")
        rows.append(row)
    _write_csv(path, fields, rows)


def cmd_diagnose(model_dir, basis=None) -> dict:
    """PR residual norms of a stored model, plus basis defects when ``basis`` is given."""
    model = load_model(model_dir)
    res = pr_residuals(model)
    report = {
        "n": model.n, "m": model.m,
        "r1_norm": res.r1_norm, "r2_norm": res.r2_norm, "r3_norm": res.r3_norm,
        "max_re_eig": model.spectral_abscissa(),
    }
    if basis is not None:
        V = read_matrix(basis)
        if V.shape[0] != model.A.shape[0]:
            raise ParseError(f"basis has {V.shape[0]} rows, model has {model.A.shape[0]} states")
        pair = make_pair(V)
        red = project(model, pair)
        rr = pr_residuals(red)
        report.update({
            "r": pair.r, "symp": pair.symp_defect, "left": pair.left_defect,
            "identity": pair.identity_defect,
            "pr1": rr.r1_norm, "pr2": rr.r2_norm, "pr3": rr.r3_norm,
            "reduced_max_re_eig": red.spectral_abscissa(),
        })
    return report


# ---------------------------------------------------------------- entry point


def _parser():
    p = argparse.ArgumentParser(prog="qirka", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    pr = sub.add_parser("run", help="reduce one configured model")
    pr.add_argument("--config", required=True)
    pr.add_argument("--out")
    ps = sub.add_parser("sweep", help="run a grid of configurations")
    ps.add_argument("--config", required=True, action="append")
    ps.add_argument("--out", required=True)
    ps.add_argument("--workers", type=int, default=1)
    pd = sub.add_parser("diagnose", help="PR and basis diagnostics of stored matrices")
    pd.add_argument("--model", required=True, help="directory with A.txt B.txt C.txt D.txt")
    pd.add_argument("--basis", help="trial basis V in matrix format")
    pd.add_argument("--out", help="also write diagnose.csv here")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "run":
            (cfg,) = _single(load_config(args.config, args.out))
            rep = cmd_run(cfg)
            _print_report(rep)
            return 0 if rep.ok else 1
        if args.cmd == "sweep":
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            configs = [c for path in args.config for c in load_config(path, args.out)]
            reps = cmd_sweep(configs, args.out, args.workers)
            for rep in reps:
                _print_report(rep)
            return 0 if all(r.ok for r in reps) else 1
        report = cmd_diagnose(args.model, args.basis)
        for k, v in report.items():
            print(f"{k},{_fmt(v)}")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            _write_csv(Path(args.out) / "diagnose.csv", list(report), [report])
        return 0
    except (ConfigError, ParseError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except QirkaError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


def _single(cfgs):
    if len(cfgs) != 1:
        raise ConfigError("run takes a single configuration; use sweep for grids")
    return cfgs


def _print_report(rep: RunReport):
    if rep.error_code:
        print(f"{rep.name}: FAILED [{rep.error_code}] {rep.error_message}")
        return
    print(
        f"{rep.name}: n={rep.n} m={rep.m} r={rep.r} iters={rep.iterations} "
        f"converged={rep.converged} rel_err={rep.rel_h2_error:.3e} "
        f"abs_err={rep.abs_h2_error:.4g} T={rep.wall_seconds:.3f}s "
        f"defects=({rep.symp:.1e}, {rep.left:.1e}, {rep.pr1:.1e}, {rep.pr2:.1e})"
    )


if __name__ == "__main__":
    sys.exit(main())
