"""Command line entry point: ``spinflow run | verify | export-tables``.

Exit codes: 0 success, 1 configuration error or failed verification,
2 run aborted on non-finite values.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bases import all_bases, dump_basis
from .coordinates import CHART_NAMES
from .diagnostics import ConservationMonitor, discrete_k2, measure_dispersion, mode_amplitude
from .dynamics import (IC_KINDS, IntegrationError, Projections, make_initial_state, step_rk4, suggest_dt)
from .dynamics.integrate import DT_SAFETY
from .dynamics.pictures import normalization_constants
from .energy import MATRIX_CASES, CaseId, EnergyModel
from .field_grid import save_snapshot
from .matrix_core import InputError
from .poisson import extended_table, master_table, mismatch_report, project_subalgebra
from .verify import SUITES, chart_table, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_NAN = 0, 1, 2
LOCK_NAME = ".spinflow.lock"

# spin s (matrix dimension 2s+1) of each component case
CASE_SPIN = {
    CaseId.LL_HEISENBERG: Fraction(1, 2),
    CaseId.UNIAXIAL: Fraction(1, 2),
    CaseId.BIAXIAL: Fraction(1, 2),
    CaseId.SU3_NORMAL: Fraction(1),
    CaseId.NEMATIC: Fraction(1),
    CaseId.SU3_BROKEN: Fraction(1),
    CaseId.SU2xSU2: Fraction(3, 2),
    CaseId.SO6: Fraction(3, 2),
    CaseId.SO4: Fraction(3, 2),
    CaseId.SO5_FULL: Fraction(3, 2),
    CaseId.SO5_TENSOR: Fraction(3, 2),
}
SPINS = (Fraction(1, 2), Fraction(1), Fraction(3, 2))


class ConfigError(InputError):
    pass


@dataclass
class RunConfig:
    case: CaseId
    spin: Fraction
    grid: tuple[int, ...]
    spacing: tuple[float, ...]
    J: float = 1.0
    Jbar: float = 1.0
    A: float = 0.0
    B: float = 1.0
    dt: float | None = None  # None means "auto"
    steps: int = 100
    ic_kind: str = "random_smooth"
    amplitude: float = 0.3
    mode: tuple[int, ...] = (1,)
    seed: int = 0
    s0: float = 1.0
    modes: int = 3
    width: float = 4.0
    report_every: int = 10
    snapshot_every: int | None = None
    output: str = "out"
    projections: Projections = field(default_factory=Projections)

    @property
    def dim(self) -> int:
        return int(2 * self.spin + 1)

    def model(self) -> EnergyModel:
        return EnergyModel(self.case, J=self.J, Jbar=self.Jbar, A=self.A, B=self.B, dim=self.dim)

    def snapshot_interval(self) -> int:
        return self.snapshot_every or max(1, self.steps // 10)

    def echo(self) -> dict:
        """Every resolved setting, enough to rebuild the run."""
        d = asdict(self)
        d["case"] = self.case.value
        d["spin"] = str(self.spin)
        d["grid"] = list(self.grid)
        d["spacing"] = list(self.spacing)
        d["mode"] = list(self.mode)
        d["dt"] = "auto" if self.dt is None else self.dt
        d["snapshot_every"] = self.snapshot_interval()
        d["projections"] = asdict(self.projections)
        return d


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


KNOWN_KEYS = {
    "run": {"case", "spin", "steps", "dt", "report_every", "snapshot_every", "output"},
    "grid": {"shape", "spacing"},
    "constants": {"J", "Jbar", "A", "B"},
    "initial": {"kind", "amplitude", "mode", "seed", "s0", "modes", "width"},
    "projections": {"hermitize", "orthogonalize", "normalize_n"},
}


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a run configuration; raise :class:`ConfigError` on any problem."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for key, val in (overrides or {}).items():
        sec, _, opt = key.partition(".")
        if not opt:
            raise ConfigError(f"override {key!r} must look like section.key")
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, opt, str(val))
    for sec in cp.sections():
        if sec not in KNOWN_KEYS:
            raise ConfigError(f"unknown section [{sec}]; known: {', '.join(KNOWN_KEYS)}")
        extra = set(cp[sec]) - KNOWN_KEYS[sec]
        if extra:
            raise ConfigError(f"unknown keys in [{sec}]: {', '.join(sorted(extra))}")
    if not cp.has_option("run", "case"):
        raise ConfigError("[run] case is required")
    try:
        return _build(cp)
    except InputError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"bad value: {exc}") from None


def _build(cp: configparser.ConfigParser) -> RunConfig:
    def get(sec, key, default=None):
        return cp.get(sec, key, fallback=default) if cp.has_section(sec) else default

    case = CaseId.parse(get("run", "case"))
    spin_text = get("run", "spin")
    if spin_text is None:
        spin = CASE_SPIN.get(case, Fraction(1, 2))
    else:
        spin = Fraction(spin_text.strip())
    if spin not in SPINS:
        raise ConfigError(f"spin must be one of {', '.join(str(s) for s in SPINS)}; got {spin_text}")
    if case in CASE_SPIN and CASE_SPIN[case] != spin:
        raise ConfigError(f"case {case.value} needs spin {CASE_SPIN[case]}, got {spin}")

    grid = _ints(get("grid", "shape", "64"))
    if not 1 <= len(grid) <= 3 or min(grid) < 3:
        raise ConfigError(f"grid shape needs 1 to 3 axes of at least 3 points; got {list(grid)}")
    sp = _floats(get("grid", "spacing", "1.0"))
    if len(sp) == 1:
        sp = sp * len(grid)
    if len(sp) != len(grid) or min(sp) <= 0:
        raise ConfigError("spacing must be positive, one value or one per axis")

    dt_text = get("run", "dt", "auto").strip()
    dt = None if dt_text.lower() == "auto" else float(dt_text)
    if dt is not None and not dt > 0:
        raise ConfigError("dt must be positive or 'auto'")
    steps = int(get("run", "steps", "100"))
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    report_every = int(get("run", "report_every", "10"))
    snap = get("run", "snapshot_every")
    snap = int(snap) if snap is not None else None
    if report_every < 1 or (snap is not None and snap < 1):
        raise ConfigError("report_every and snapshot_every must be >= 1")

    kind = get("initial", "kind", "random_smooth").strip()
    if kind not in IC_KINDS:
        raise ConfigError(f"unknown initial kind {kind!r}; valid kinds: {', '.join(IC_KINDS)}")
    if kind in ("single_mode", "domain_wall") and case != CaseId.LL_HEISENBERG:
        raise ConfigError(f"initial kind {kind!r} is defined for LL_HEISENBERG only")

    cfg = RunConfig(
        case=case, spin=spin, grid=grid, spacing=sp,
        J=float(get("constants", "J", "1.0")), Jbar=float(get("constants", "Jbar", "1.0")),
        A=float(get("constants", "A", "0.0")), B=float(get("constants", "B", "1.0")),
        dt=dt, steps=steps, ic_kind=kind,
        amplitude=float(get("initial", "amplitude", "1e-4" if kind == "single_mode" else "0.3")),
        mode=_ints(get("initial", "mode", "1")), seed=int(get("initial", "seed", "0")),
        s0=float(get("initial", "s0", "1.0")), modes=int(get("initial", "modes", "3")),
        width=float(get("initial", "width", "4.0")),
        report_every=report_every, snapshot_every=snap, output=get("run", "output", "out").strip(),
        projections=Projections(**{k: _bool(get("projections", k, "false")) for k in KNOWN_KEYS["projections"]}),
    )
    if len(cfg.mode) > len(grid):
        raise ConfigError("more mode indices than grid axes")
    if case in MATRIX_CASES and cfg.dim < 2:
        raise ConfigError("matrix cases need spin >= 1/2")
    cfg.model()  # constant checks live in EnergyModel
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides)


# -- run ----------------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class _Lock:
    def __init__(self, directory: Path):
        self.path = directory / LOCK_NAME

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory is locked by another run ({self.path})") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def execute(cfg: RunConfig, out: Path, log=print) -> int:
    """Run a validated configuration into ``out``; returns the exit code."""
    out.mkdir(parents=True, exist_ok=True)
    with _Lock(out):
        return _execute(cfg, out, log)


def _execute(cfg: RunConfig, out: Path, log) -> int:
    model = cfg.model()
    state = make_initial_state(model, cfg.ic_kind, cfg.grid, cfg.spacing, seed=cfg.seed, amplitude=cfg.amplitude,
                               mode=cfg.mode, s0=cfg.s0, modes=cfg.modes, width=cfg.width)
    dt = cfg.dt if cfg.dt is not None else suggest_dt(state, model)
    proj = cfg.projections if cfg.projections.enabled() else None
    mon = ConservationMonitor(model, state)
    columns = mon.reference.columns()
    snap_every = cfg.snapshot_interval()
    files = []
    spin_wave = cfg.ic_kind == "single_mode"
    times, amps = [], []

    def snapshot(st, name):
        save_snapshot(out / name, st.fields, st.spacing, st.time, st.step, {"case": cfg.case.value})
        files.append(name)

    def sample(st):
        if spin_wave:
            times.append(st.time)
            amps.append(mode_amplitude(st.fields["s"], cfg.mode, st.spacing))

    status = "completed"
    code = EXIT_OK
    with open(out / "conservation.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerow([_fmt(v) for v in mon.reference.row()])
        snapshot(state, f"snap_{0:08d}.bin")
        sample(state)
        try:
            for n in range(1, cfg.steps + 1):
                state = step_rk4(state, model, dt, projections=proj)
                if n % cfg.report_every == 0 or n == cfg.steps:
                    w.writerow([_fmt(v) for v in mon.record(state).row()])
                    sample(state)
                if n % snap_every == 0 or n == cfg.steps:
                    snapshot(state, f"snap_{n:08d}.bin")
        except IntegrationError as exc:
            status = f"aborted: {exc}"
            code = EXIT_NAN
            save_snapshot(out / "abort.bin", exc.state.fields, exc.state.spacing, exc.state.time,
                          exc.state.step, {"case": cfg.case.value, "reason": str(exc)})
            files.append("abort.bin")
            log(f"run aborted at step {exc.state.step + 1}: {exc}", file=sys.stderr)
    if code == EXIT_OK:
        snapshot(state, "final.bin")
    files.append("conservation.csv")

    dispersion = None
    if spin_wave and code == EXIT_OK:
        fit = measure_dispersion(times, amps)
        expected = model.Jbar * cfg.s0 * discrete_k2(cfg.mode, cfg.grid, cfg.spacing)
        dispersion = fit.to_json() | {
            "mode": list(cfg.mode), "expected_omega": expected,
            "relative_error": abs(fit.omega / expected - 1) if not fit.degenerate else None,
        }
        (out / "dispersion.json").write_text(json.dumps(dispersion, indent=1, sort_keys=True) + "\n")
        files.append("dispersion.json")

    manifest = {
        "version": __version__,
        "numpy": np.__version__,
        "status": status,
        "config": cfg.echo(),
        "dt": dt,
        "dt_safety": DT_SAFETY if cfg.dt is None else None,
        "steps_done": int(state.step),
        "csv_columns": columns,
        "normalization": normalization_constants(),
        "files": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    if code == EXIT_OK:
        log(f"{cfg.case.value}: {state.step} steps, dt {dt:.6g}, max drift "
            f"{max(mon.max_drift().values()):.3e}; outputs in {out}")
        if dispersion is not None:
            log(f"dispersion: omega {dispersion['omega']:.8g}, expected {dispersion['expected_omega']:.8g}")
    return code


def cmd_run(args) -> int:
    overrides = dict(kv.split("=", 1) for kv in args.set or [] if "=" in kv)
    if len(overrides) != len(args.set or []):
        print("error: --set takes section.key=value", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        overrides["run.output"] = args.output
    try:
        cfg = load_config(args.config, overrides)
        out = Path(cfg.output)
        if not out.is_absolute() and not args.output:
            out = Path(args.config).resolve().parent / out
        return execute(cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


# -- verify / export -------------------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; valid suites: {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    kw = {"steps": args.steps} if args.steps and args.suite in ("conservation", "all") else {}
    report = run_suite(args.suite, **kw)
    for c in report["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        print(f"{mark} {c['suite']:12s} {c['name']:45s} {c['value']:.3e} (tol {c['tol']:.1e}) {c['detail']}")
    print(f"{report['n_checks'] - report['n_failed']}/{report['n_checks']} checks passed")
    text = json.dumps(report, indent=1) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    return EXIT_OK if report["passed"] else EXIT_CONFIG


def _finite_or_none(obj):
    """Replace NaN and infinities by ``None`` so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def export_tables(directory) -> list[str]:
    """Write every bracket table, basis and the published-form comparison into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for dim in (2, 3, 4):
        for name, t in ((f"master_dim{dim}", master_table(dim)), (f"extended_dim{dim}_order1", extended_table(dim, 1))):
            t.dump(d / f"{name}.json")
            written.append(f"{name}.json")
    for name in CHART_NAMES:
        ch, source = chart_table(name)
        project_subalgebra(source, ch).dump(d / f"chart_{name}.json")
        written.append(f"chart_{name}.json")
    for name, b in all_bases().items():
        dump_basis(b, d / f"basis_{name}.json")
        written.append(f"basis_{name}.json")
    rep = mismatch_report()
    lines = [_finite_or_none(r.as_dict()) for r in rep.lines]
    (d / "printed_report.json").write_text(json.dumps(lines, indent=1) + "\n")
    (d / "printed_report.txt").write_text(rep.text() + "\n")
    written += ["printed_report.json", "printed_report.txt"]
    return written


def cmd_export(args) -> int:
    files = export_tables(args.directory)
    print(f"wrote {len(files)} files to {args.directory}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinflow", description="Spin-s magnet field dynamics on periodic lattices.")
    p.add_argument("--version", action="version", version=f"spinflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a simulation from a config file")
    r.add_argument("config")
    r.add_argument("--output", help="output directory (overrides [run] output)")
    r.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config key")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    v.add_argument("--report", help="write the JSON report here")
    v.add_argument("--steps", type=int, help="steps per conservation run (default 10000)")
    v.set_defaults(func=cmd_verify)
    e = sub.add_parser("export-tables", help="write bracket tables and bases as JSON")
    e.add_argument("directory")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
