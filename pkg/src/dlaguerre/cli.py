"""Command-line entry point: ``dlaguerre {compute,verify,asymptotics,fit-constants}``.

Every run writes its data files first and a JSON manifest last.  Exit codes:
0 = everything passed, 1 = a check failed (or was inconclusive under
``--strict``), 2 = the run itself failed; in that case the files already
written are renamed with a ``.partial`` suffix and a partial manifest
records the error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import platform
import re
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import mpmath as mp

from . import __version__
from ._numeric import atomic_write, dec, param_str, sha256_file
from .asymptotics import (
    QUANTITIES,
    canonical_quantity,
    comparison_csv,
    fit_undetermined_constants,
    largen_study,
    longtime_study,
)
from .errors import DlaguerreError, DomainError
from .ladder import aux_from_recurrence, build_t_grid, identity_suite
from .moments import WeightParams
from .orthopoly import exact_recurrence, recurrence_coeffs
from .special import PrecisionCtx

log = logging.getLogger("dlaguerre")

MANIFEST_SCHEMA_VERSION = 1
OUT_ENV = "DLAGUERRE_OUT"
DEFAULT_OUT = "dlaguerre-out"

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
_VERDICT = {True: "within band", False: "OUTSIDE band", None: "no verdict"}

TASKS = ("moments", "recurrence", "aux", "verify", "largen", "longtime", "fit-constants")
_TASK_DEPS = {
    "recurrence": {"moments"},
    "aux": {"recurrence"},
    "verify": {"aux"},
    "largen": {"recurrence"},
    "longtime": {"recurrence"},
    "fit-constants": {"recurrence"},
}
COMMAND_TASKS = {
    "compute": ("moments", "recurrence", "aux"),
    "verify": ("verify",),
    "asymptotics": (),
    "fit-constants": ("fit-constants",),
}


def close_tasks(tasks) -> tuple:
    """Add every task the given ones depend on; keep the canonical order."""
    out = set(tasks)
    todo = list(out)
    while todo:
        for dep in _TASK_DEPS.get(todo.pop(), ()):
            if dep not in out:
                out.add(dep)
                todo.append(dep)
    return tuple(t for t in TASKS if t in out)


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's numeric output."""

    alpha: str = "0"
    lam: str = "1"
    t_grid: tuple = ("1",)
    n_max: int = 8
    digits: int = 50
    out: str = ""
    formats: tuple = ("csv", "json")
    tasks: tuple = ()
    strict: bool = False
    regime: str = "large_n"
    quantities: tuple = ()
    ns: tuple = ()
    jobs: int = 1
    fd: bool = True

    # key in the config file -> field name
    _KEYS = {
        "alpha": "alpha",
        "lambda": "lam",
        "t": "t_grid",
        "n_max": "n_max",
        "digits": "digits",
        "out": "out",
        "format": "formats",
        "task": "tasks",
        "strict": "strict",
        "regime": "regime",
        "quantity": "quantities",
        "n": "ns",
        "jobs": "jobs",
        "fd": "fd",
    }
    _LISTS = ("t_grid", "formats", "tasks", "quantities", "ns")

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("alpha", param_str(WeightParams(self.alpha, 0, 1).alpha))
        set_("lam", param_str(WeightParams(0, self.lam, 1).lam))
        if not self.t_grid:
            raise DomainError("t grid must be nonempty")
        ts = sorted({WeightParams(0, 0, t).t for t in self.t_grid})
        set_("t_grid", tuple(param_str(t) for t in ts))
        for name in ("n_max", "digits", "jobs"):
            set_(name, int(getattr(self, name)))
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        if self.digits < 5:
            raise DomainError("digits must be >= 5")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")
        fmts = tuple(f for f in ("csv", "json") if f in set(self.formats))
        if set(self.formats) - {"csv", "json"} or not fmts:
            raise DomainError(f"formats must be a nonempty subset of csv,json; got {self.formats}")
        set_("formats", fmts)
        bad = set(self.tasks) - set(TASKS)
        if bad:
            raise DomainError(f"unknown tasks {sorted(bad)}")
        set_("tasks", close_tasks(self.tasks))
        if self.regime not in ("large_n", "long_time"):
            raise DomainError(f"regime must be large_n or long_time, got {self.regime!r}")
        set_("quantities", tuple(canonical_quantity(q) for q in self.quantities))
        set_("ns", tuple(sorted({int(n) for n in self.ns})))
        set_("strict", _as_bool(self.strict))
        set_("fd", _as_bool(self.fd))

    @property
    def params(self) -> WeightParams:
        return WeightParams(self.alpha, self.lam, self.t_grid[0])

    def params_at(self, t) -> WeightParams:
        return WeightParams(self.alpha, self.lam, t)

    @property
    def precision(self) -> PrecisionCtx:
        return PrecisionCtx(target_digits=self.digits)

    def to_text(self) -> str:
        """Flat key=value form; lists become repeated keys."""
        lines = []
        for key, name in self._KEYS.items():
            val = getattr(self, name)
            if name in self._LISTS:
                lines += [f"{key}={v}" for v in val]
            elif isinstance(val, bool):
                lines.append(f"{key}={'true' if val else 'false'}")
            elif name == "out" and not val:
                continue
            else:
                lines.append(f"{key}={val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_text(cls, text: str) -> dict:
        """key=value lines to field overrides ('#' starts a comment)."""
        vals: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"config line {lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in cls._KEYS:
                raise DomainError(f"config line {lineno}: unknown key {key!r}")
            name = cls._KEYS[key]
            if name in cls._LISTS:
                vals.setdefault(name, []).append(value)
            else:
                vals[name] = value
        return {k: tuple(v) if isinstance(v, list) else v for k, v in vals.items()}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**cls.parse_text(text))

    def echo(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"not a boolean: {v!r}")


# --------------------------------------------------------------------------
# manifest and output handling


@dataclass
class RunManifest:
    command: str
    config: RunConfig
    started: float = field(default_factory=time.time)
    timings: dict = field(default_factory=dict)
    certified_digits: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    error: str | None = None
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "kind": "RunManifest",
            "command": self.command,
            "config": self.config.echo(),
            "config_text": self.config.to_text(),
            "versions": versions(),
            "timings_s": {k: round(v, 4) for k, v in self.timings.items()},
            "certified_digits": self.certified_digits,
            "results": self.results,
            "summary": self.summary,
            "files": self.files,
            "error": self.error,
            "exit_code": self.exit_code,
        }


def versions() -> dict:
    return {
        "dlaguerre": __version__,
        "mpmath": mp.__version__,
        "mpmath_backend": mp.libmp.BACKEND,
        "python": platform.python_version(),
    }


class Output:
    """Atomic file writer that remembers what it wrote."""

    def __init__(self, root: Path, formats):
        self.root = Path(root)
        self.formats = set(formats)
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> Path | None:
        ext = name.rsplit(".", 1)[-1]
        if ext in ("csv", "json") and ext not in self.formats:
            return None
        path = self.root / name
        atomic_write(path, text)
        self.written.append(path)
        return path

    def inventory(self) -> list:
        return [{"path": p.name, "sha256": sha256_file(p)} for p in self.written]

    def mark_partial(self) -> None:
        for i, p in enumerate(self.written):
            if p.exists():
                target = p.with_name(p.name + ".partial")
                os.replace(p, target)
                self.written[i] = target


def t_tag(t: str) -> str:
    return "t=" + re.sub(r"[^0-9A-Za-z.+-]", "_", t)


@dataclass
class Failure(Exception):
    """A check failed; carries the message for stderr."""

    message: str


def run_command(command: str, cfg: RunConfig, fn) -> int:
    out = Output(Path(cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT), cfg.formats)
    man = RunManifest(command, cfg)
    try:
        fn(cfg, out, man)
    except DlaguerreError as exc:
        man.error = f"{type(exc).__name__}: {exc}"
        man.exit_code = EXIT_ERROR
    except Exception as exc:  # keep the .partial contract for unexpected failures too
        man.error = f"{type(exc).__name__}: {exc}"
        man.exit_code = EXIT_ERROR
        log.exception("unexpected failure")
    man.timings["total"] = time.time() - man.started
    if man.exit_code == EXIT_ERROR:
        out.mark_partial()
        man.files = [{"path": p.name} for p in out.written]
        atomic_write(out.root / "manifest.json.partial", json.dumps(man.to_dict(), indent=1))
        print(f"error: {man.error}", file=sys.stderr)
        return EXIT_ERROR
    man.files = out.inventory()
    atomic_write(out.root / "manifest.json", json.dumps(man.to_dict(), indent=1))
    for line in man.summary.get("messages", []):
        print(line, file=sys.stderr if man.exit_code else sys.stdout)
    return man.exit_code


def _map(cfg: RunConfig, fn, items):
    """Run fn over items, in processes when --jobs > 1; results keep item order."""
    if cfg.jobs == 1 or len(items) <= 1:
        return [fn(cfg, it) for it in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(fn, [cfg] * len(items), items))


# --------------------------------------------------------------------------
# compute


def _compute_one(cfg: RunConfig, t: str) -> dict:
    t0 = time.time()
    rec = exact_recurrence(cfg.params_at(t), cfg.n_max, cfg.precision)
    aux = aux_from_recurrence(rec)
    table = rec.meta["moment_table"]
    with mp.workdps(table.work_digits):
        mcsv = "j,mu_j\n" + "".join(f"{j},{dec(m, cfg.digits + 10)}\n" for j, m in enumerate(table.mu))
    return {
        "t": t,
        "files": {
            "moments": (mcsv, table.to_json()),
            "recurrence": (rec.to_csv(), rec.to_json()),
            "aux": (aux.to_csv(), aux.to_json()),
        },
        "certified": rec.certified_digits,
        "seconds": time.time() - t0,
    }


def cmd_compute(cfg: RunConfig, out: Output, man: RunManifest) -> None:
    results = _map(cfg, _compute_one, list(cfg.t_grid))
    for res in results:
        tag = t_tag(res["t"])
        for kind, (csv_text, json_text) in res["files"].items():
            if kind in cfg.tasks or kind in COMMAND_TASKS["compute"]:
                out.write(f"{kind}_{tag}.csv", csv_text)
                out.write(f"{kind}_{tag}.json", json_text)
        man.timings[f"compute[{tag}]"] = res["seconds"]
        man.certified_digits[res["t"]] = res["certified"]
    man.summary = {"passed": True, "messages": [f"wrote {len(out.written)} files to {out.root}"]}


# --------------------------------------------------------------------------
# verify


def parse_fault(spec: str):
    """``moment:J:REL`` multiplies mu_J by (1 + REL) before factorization."""
    kind, j, rel = spec.split(":")
    if kind != "moment":
        raise DomainError(f"unsupported fault {spec!r}")
    return int(j), rel


def _verify_one(cfg: RunConfig, t: str, fault: str | None = None) -> dict:
    t0 = time.time()
    p = cfg.params_at(t)
    ctx = cfg.precision
    rec = exact_recurrence(p, cfg.n_max, ctx)
    notes = []
    if fault:
        j, rel = parse_fault(fault)
        table = rec.meta["moment_table"]
        with mp.workdps(table.work_digits):
            mu = list(table.mu)
            mu[j] = mu[j] * (1 + mp.mpf(rel))
        rec = recurrence_coeffs(replace(table, mu=tuple(mu)), cfg.n_max, certify=False)
        rec = replace(rec, certified_digits=cfg.digits)
        notes.append(f"fault injected: mu_{j} scaled by 1+{rel}")
    grid = None
    if cfg.fd and not fault and cfg.n_max >= 2:
        grid = build_t_grid(p, cfg.n_max, ctx)
    reports = identity_suite(rec, aux_from_recurrence(rec), grid)
    if p.lambda_is_zero:
        for r in reports:
            if "degenerate: classical Laguerre" not in r.notes:
                r.notes.append("degenerate: classical Laguerre")
    return {
        "t": t,
        "reports": [r.to_dict() for r in reports],
        "certified": rec.certified_digits,
        "seconds": time.time() - t0,
        "notes": notes,
    }


def cmd_verify(cfg: RunConfig, out: Output, man: RunManifest, fault: str | None = None) -> None:
    results = _map(cfg, _verify_fault(fault), list(cfg.t_grid))
    failures = []
    for res in results:
        tag = t_tag(res["t"])
        man.timings[f"verify[{tag}]"] = res["seconds"]
        man.certified_digits[res["t"]] = res["certified"]
        for rep in res["reports"]:
            man.results.append({"t": res["t"], **rep})
            if not rep["pass"]:
                failures.append((res["t"], rep))
        rows = ["identity,t,n_range,max_residual,tolerance,certified_digits,pass,worst_n,notes"]
        for rep in res["reports"]:
            rows.append(",".join([
                rep["identity"], res["t"], f"{rep['n_range'][0]}-{rep['n_range'][1]}", rep["max_residual"],
                rep["tolerance"], str(rep["certified_digits"]), str(rep["pass"]).lower(),
                "" if rep["worst_n"] is None else str(rep["worst_n"]), '"' + "; ".join(rep["notes"]) + '"',
            ]))
        out.write(f"verify_{tag}.csv", "\n".join(rows) + "\n")
    msgs = []
    if failures:
        def ratio(item):
            rep = item[1]
            tol = mp.mpf(rep["tolerance"]) or mp.mpf(10) ** -cfg.digits
            return mp.mpf(rep["max_residual"]) / tol
        t_w, worst = max(failures, key=ratio)
        msgs.append(
            f"FAIL: worst identity {worst['identity']} at n={worst['worst_n']} (t={t_w}): "
            f"residual {worst['max_residual']} > tolerance {worst['tolerance']}"
        )
        msgs.append("failing families: " + ", ".join(sorted({r['identity'] for _, r in failures})))
        man.exit_code = EXIT_FAIL
    else:
        msgs.append(f"all {len(man.results)} identity checks passed")
    man.summary = {
        "passed": not failures,
        "n_checks": len(man.results),
        "n_failed": len(failures),
        "worst": None if not failures else {"identity": worst["identity"], "n": worst["worst_n"], "t": t_w},
        "messages": msgs,
        "notes": [n for res in results for n in res["notes"]],
    }


class _verify_fault:
    """Picklable partial of :func:`_verify_one` carrying the fault spec."""

    def __init__(self, fault):
        self.fault = fault

    def __call__(self, cfg, t):
        return _verify_one(cfg, t, self.fault)


# --------------------------------------------------------------------------
# asymptotics


LARGE_N_DEFAULT_NS = (16, 32, 64, 128)
LONG_TIME_DEFAULT_NS = (1, 2, 5)


def _asym_jobs(cfg: RunConfig):
    lam0 = cfg.params.lambda_is_zero
    if cfg.regime == "large_n":
        qs = cfg.quantities or (QUANTITIES if lam0 else ("alpha_n", "beta_n", "p_n", "H_n"))
        return [("large_n", q, t, None) for t in cfg.t_grid for q in qs]
    qs = cfg.quantities or QUANTITIES
    ns = cfg.ns or LONG_TIME_DEFAULT_NS
    return [("long_time", q, None, n) for n in ns for q in qs]


def _asym_one(cfg: RunConfig, job) -> dict:
    regime, q, t, n = job
    t0 = time.time()
    if regime == "large_n":
        ns = cfg.ns or LARGE_N_DEFAULT_NS
        rep = largen_study(q, cfg.params_at(t), ns, cfg.precision)
        name = f"largen_{q}_{t_tag(t)}.csv"
    else:
        if len(cfg.t_grid) < 3:
            raise DomainError("long_time needs at least three t values")
        rep = longtime_study(q, cfg.params, n, cfg.t_grid, cfg.precision)
        name = f"longtime_{q}_n={n}.csv"
    return {"name": name, "csv": comparison_csv(rep.rows, work_digits=rep.work_digits), "report": rep.to_dict(), "seconds": time.time() - t0}


def cmd_asymptotics(cfg: RunConfig, out: Output, man: RunManifest) -> None:
    results = _map(cfg, _asym_one, _asym_jobs(cfg))
    failed, inconclusive = [], []
    for res in results:
        out.write(res["name"], res["csv"])
        rep = res["report"]
        man.results.append(rep)
        man.timings[res["name"]] = res["seconds"]
        label = f"{rep['quantity']} ({res['name']})"
        if rep.get("exploratory"):
            continue
        if rep["pass"] is False:
            failed.append(label)
        elif rep["pass"] is None:
            inconclusive.append(label)
    msgs = [
        f"{r['quantity']}: slope {r['observed_slope']} (expected {r['expected_slope']} +- {r['band']}) "
        f"{r['status']}, {_VERDICT[r['pass']]}"
        for r in man.results
    ]
    if failed:
        msgs.append("FAIL: slope outside band for " + ", ".join(failed))
        man.exit_code = EXIT_FAIL
    elif inconclusive and cfg.strict:
        msgs.append("FAIL (--strict): inconclusive slopes for " + ", ".join(inconclusive))
        man.exit_code = EXIT_FAIL
    man.summary = {"passed": not failed and not (inconclusive and cfg.strict), "failed": failed,
                   "inconclusive": inconclusive, "messages": msgs}
    out.write("slopes.json", json.dumps({"schema_version": MANIFEST_SCHEMA_VERSION, "reports": man.results},
                                        indent=1))


# --------------------------------------------------------------------------
# fit-constants


def _fit_one(cfg: RunConfig, t: str) -> dict:
    t0 = time.time()
    p = cfg.params_at(t)
    quantity = cfg.quantities[0] if cfg.quantities else "lnD_n"
    n_lo = cfg.ns[0] if cfg.ns else max(4, cfg.n_max // 4)
    recur = exact_recurrence(p, cfg.n_max, cfg.precision)
    with mp.workdps(recur.work_digits):
        top = cfg.n_max + 1 if quantity == "lnD_n" else cfg.n_max
        data = {n: (mp.log(recur.D[n]) if quantity == "lnD_n" else mp.log(recur.h[n]))
                for n in range(n_lo, top + 1)}
    fit = fit_undetermined_constants(quantity, data, p, digits=recur.work_digits)
    return {"t": t, "fit": fit.to_dict(), "seconds": time.time() - t0,
            "raw": {k: (mp.nstr(v, 30), mp.nstr(fit.errors[k], 5)) for k, v in fit.constants.items()}}


def constants_consistent(fits: list, sigmas: float = 3.0) -> tuple:
    """Pairwise agreement of fitted constants within ``sigmas`` x combined error."""
    worst = []
    for i in range(len(fits)):
        for j in range(i + 1, len(fits)):
            for k in fits[i]["raw"]:
                vi, ei = (mp.mpf(s) for s in fits[i]["raw"][k])
                vj, ej = (mp.mpf(s) for s in fits[j]["raw"][k])
                err = sigmas * mp.sqrt(ei**2 + ej**2)
                worst.append((k, fits[i]["t"], fits[j]["t"], abs(vi - vj), err))
    ok = all(d <= e for *_, d, e in worst)
    return ok, worst


def cmd_fit_constants(cfg: RunConfig, out: Output, man: RunManifest) -> None:
    fits = _map(cfg, _fit_one, list(cfg.t_grid))
    for f in fits:
        man.results.append({"t": f["t"], **f["fit"]})
        man.timings[f"fit[{t_tag(f['t'])}]"] = f["seconds"]
    ok, pairs = constants_consistent(fits)
    msgs = [f"t={f['t']}: " + ", ".join(f"{k}={v} +- {e}" for k, (v, e) in f["raw"].items()) for f in fits]
    msgs += [f"{k}: |c(t={a}) - c(t={b})| = {mp.nstr(d, 3)} (allowed {mp.nstr(e, 3)})" for k, a, b, d, e in pairs]
    if not ok:
        msgs.append("FAIL: fitted constants depend on t beyond fit error")
        man.exit_code = EXIT_FAIL
    man.summary = {"passed": ok, "t_independent": ok, "messages": msgs,
                   "pairs": [{"constant": k, "t_a": a, "t_b": b, "diff": mp.nstr(d, 5), "allowed": mp.nstr(e, 5)}
                             for k, a, b, d, e in pairs]}
    out.write("constants.json", json.dumps({"schema_version": MANIFEST_SCHEMA_VERSION,
                                            "fits": [f["fit"] for f in fits]}, indent=1))


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--alpha", help="weight exponent alpha > -1")
    common.add_argument("--lambda", dest="lam", help="deformation exponent lambda")
    common.add_argument("--t", dest="t_grid", action="append", help="t value (repeatable)")
    common.add_argument("--n-max", dest="n_max", type=int, help="largest n")
    common.add_argument("--digits", type=int, help="target certified digits")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--format", dest="formats", action="append", choices=("csv", "json"),
                        help="output format (repeatable; default both)")
    common.add_argument("--strict", action="store_const", const=True, default=None,
                        help="treat inconclusive slopes as failures")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")
    common.add_argument("--quantity", dest="quantities", action="append",
                        help="quantity id (repeatable), e.g. alpha_n, beta_n, lnD_n")
    common.add_argument("--n", dest="ns", action="append", type=int,
                        help="n value (repeatable): scale points for large_n, fixed n for long_time, "
                             "first fit n for fit-constants")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dlaguerre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="moments, recurrence and aux tables per t")
    v = sub.add_parser("verify", parents=[common], help="run the identity suite; exit 1 on failure")
    v.add_argument("--no-fd", dest="fd", action="store_const", const=False, default=None,
                   help="skip the finite-difference (t-derivative) identities")
    v.add_argument("--inject-fault", dest="fault", help=argparse.SUPPRESS)
    a = sub.add_parser("asymptotics", parents=[common], help="series vs exact slope checks")
    a.add_argument("--regime", choices=("large_n", "long_time"), default=None)
    sub.add_parser("fit-constants", parents=[common], help="fit the undetermined lnD_n constants")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    vals = {}
    if ns.config:
        vals.update(RunConfig.parse_text(Path(ns.config).read_text()))
    for name in ("alpha", "lam", "t_grid", "n_max", "digits", "out", "formats", "strict", "jobs",
                 "quantities", "ns", "regime", "fd"):
        v = getattr(ns, name, None)
        if v is not None:
            vals[name] = tuple(v) if isinstance(v, list) else v
    vals["tasks"] = tuple(vals.get("tasks", ())) + COMMAND_TASKS[ns.command]
    if ns.command == "asymptotics":
        vals["tasks"] += ("largen",) if vals.get("regime", "large_n") == "large_n" else ("longtime",)
    return RunConfig(**vals)


COMMANDS = {
    "compute": cmd_compute,
    "verify": cmd_verify,
    "asymptotics": cmd_asymptotics,
    "fit-constants": cmd_fit_constants,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except (DlaguerreError, ValueError, OSError) as exc:
        parser.error(str(exc))
    fn = COMMANDS[ns.command]
    if ns.command == "verify" and getattr(ns, "fault", None):
        fault = ns.fault
        return run_command(ns.command, cfg, lambda c, o, m: cmd_verify(c, o, m, fault))
    return run_command(ns.command, cfg, fn)


if __name__ == "__main__":
    sys.exit(main())
