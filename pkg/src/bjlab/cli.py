"""Command-line entry point: ``python -m bjlab <subcommand> [options]``.

Every run writes its main output to ``--out`` and a manifest
``<out>.manifest.json`` with the configuration, library versions and wall
time.  Outputs depend only on the configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bornjordan import TauQuadratureSpec, bj_field
from .concentration import (OmegaSet, PhaseField, PhaseGrid, blowup_scan, concentration_ratio,
                            delta_scan, density_point, format_p, parse_p, translation_vanishing,
                            format_value)
from .families import RadialProfile, make_f_R, time_frequency_shift
from .opbj import SymbolField, opbj_norm_probe
from .optimizer import maximize_concentration
from .verify import COLUMNS as VERIFY_COLUMNS, verify_bounds
from .wavepackets import WavepacketSum

COMMANDS = ("ratio", "scan-blowup", "scan-delta", "translation-vanishing", "optimize",
            "verify-bounds", "opbj-probe", "transform")


@dataclass
class RunConfig:
    """Validated settings of one CLI run; round-trips through ``to_dict``/``from_dict``."""

    command: str
    out: str
    d: int = 2
    p: float = math.inf
    omega: str | None = None
    grid: int | None = None
    seed: int = 0
    threads: int = 1
    tau_panels: str | None = None
    tau_delta: float = 0.0
    R: tuple | None = None
    trials: int | None = None
    dict_size: int = 16
    restarts: int = 1
    symbol: str | None = None
    q: float | None = None
    deltas: tuple | None = None
    shifts: tuple | None = None
    profile: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown subcommand {self.command!r}")
        if self.d < 1:
            raise ValueError("--d must be a positive integer")
        if self.threads < 1:
            raise ValueError("--threads must be at least 1")
        self.p = parse_p(self.p)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p"] = format_p(self.p)
        for k in ("R", "deltas", "shifts"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        kw = {f.name: obj[f.name] for f in fields(cls) if f.name in obj}
        for k in ("R", "deltas", "shifts"):
            if kw.get(k) is not None:
                kw[k] = tuple(float(v) for v in kw[k])
        return cls(**kw)


# ---------------------------------------------------------------------------
# parsing helpers

def parse_R(text: str) -> tuple:
    """Comma list where ``e`` is Euler's number and ``eK`` / ``e^K`` means ``e**K``."""
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("e") and (tok == "e" or tok[1:].lstrip("^").replace(".", "", 1).isdigit()):
            k = tok[1:].lstrip("^")
            vals.append(math.e ** (float(k) if k else 1.0))
        else:
            vals.append(float(tok))
    return tuple(vals)


def parse_list(text: str) -> tuple:
    return tuple(float(t) for t in text.split(","))


def tau_spec(cfg: RunConfig) -> TauQuadratureSpec:
    """``--tau-panels`` is a TauQuadratureSpec JSON file or a node count per panel."""
    spec = TauQuadratureSpec()
    if cfg.tau_panels:
        src = cfg.tau_panels
        if Path(src).is_file():
            spec = TauQuadratureSpec.from_json(Path(src).read_text(encoding="utf-8"))
        else:
            try:
                nodes = int(src)
            except ValueError:
                raise ValueError(f"--tau-panels must be a JSON file or an integer, got {src!r}")
            spec = TauQuadratureSpec(nodes=nodes)
    if cfg.tau_delta:
        spec = spec.with_delta(cfg.tau_delta)
    return spec


def load_omega(cfg: RunConfig, d: int | None = None) -> OmegaSet:
    if not cfg.omega:
        raise ValueError("--omega FILE is required")
    try:
        text = Path(cfg.omega).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read Omega file {cfg.omega!r}: {exc.strerror}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"Omega file {cfg.omega!r} is not valid JSON: {exc.msg}")
    om = OmegaSet.from_dict(obj)
    if d is not None and om.d != d:
        raise ValueError(f"Omega has dimension {om.dimension}, expected 2d = {2 * d}")
    return om


def _signal(cfg: RunConfig, om: OmegaSet):
    """Profile file, f_R for the first --R, or the unit Gaussian; centred at the density point."""
    z0 = density_point(om)
    if cfg.profile:
        base = RadialProfile.from_json(Path(cfg.profile).read_text(encoding="utf-8"))
        label = Path(cfg.profile).name
    elif cfg.R:
        base = make_f_R(om.d, cfg.R[0])
        label = f"f_R(R={cfg.R[0]!r})"
    else:
        base = WavepacketSum(np.zeros((1, 2 * om.d)), np.array([1.0]))
        label = "gaussian"
    return time_frequency_shift(base, z0), label


def _write_rows(path: str, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(format_value(v) for v in r) + "\n")


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_ratio(cfg: RunConfig) -> None:
    om = load_omega(cfg)
    f, label = _signal(cfg, om)
    rep = concentration_ratio(f, om, cfg.p, n=cfg.grid or 8, spec=tau_spec(cfg), threads=cfg.threads)
    _write_rows(cfg.out, ("signal", "p", "value", "ratio", "error", "cells_per_axis"),
                [(label, format_p(rep.p), rep.value, rep.ratio, rep.error, rep.resolution[0])])


def cmd_scan_blowup(cfg: RunConfig) -> None:
    om = load_omega(cfg, cfg.d)
    R = cfg.R or parse_R("e,e2,e3")
    table = blowup_scan(cfg.d, cfg.p, om, R, n=cfg.grid or 5, spec=tau_spec(cfg), threads=cfg.threads)
    table.to_csv(cfg.out)


def cmd_scan_delta(cfg: RunConfig) -> None:
    om = load_omega(cfg, 2)
    table = delta_scan(om, cfg.deltas or (1e-1, 1e-2, 1e-3), spec=tau_spec(cfg))
    table.to_csv(cfg.out)


def cmd_translation(cfg: RunConfig) -> None:
    om = load_omega(cfg)
    phi = WavepacketSum(np.zeros((1, 2 * om.d)), np.array([1.0]))
    shifts = cfg.shifts or (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    table = translation_vanishing(phi, om, cfg.p, shifts, n=cfg.grid or 8, spec=tau_spec(cfg),
                                  threads=cfg.threads)
    table.to_csv(cfg.out)


def cmd_optimize(cfg: RunConfig) -> None:
    om = load_omega(cfg)
    res = maximize_concentration(om, cfg.p, K=cfg.dict_size, restarts=cfg.restarts, seed=cfg.seed,
                                 n=cfg.grid or 8, threads=cfg.threads)
    _write_json(cfg.out, res.to_dict())


def cmd_verify(cfg: RunConfig) -> None:
    rows = verify_bounds(cfg.d, cfg.trials or 200, cfg.seed)
    _write_rows(cfg.out, VERIFY_COLUMNS, [[r[c] for c in VERIFY_COLUMNS] for r in rows])


def cmd_opbj(cfg: RunConfig) -> None:
    if not cfg.symbol:
        raise ValueError("--symbol FILE is required")
    obj = json.loads(Path(cfg.symbol).read_text(encoding="utf-8"))
    if cfg.q is not None:
        obj["q"] = cfg.q
    if cfg.grid:
        obj["grid"] = cfg.grid
    a = SymbolField.from_dict(obj)
    res = opbj_norm_probe(a, cfg.trials or 100, cfg.seed)
    verdict = res.verdict or "none"
    rows = [(i, float(r), a.q, res.threshold, verdict) for i, r in enumerate(res.ratios)]
    _write_rows(cfg.out, ("trial", "ratio", "q", "threshold", "verdict"), rows)


def cmd_transform(cfg: RunConfig) -> None:
    om = load_omega(cfg)
    f, label = _signal(cfg, om)
    grid = PhaseGrid.covering(om, cfg.grid or 8)
    pts = grid.points()
    mask = om.contains(pts)
    vals = np.zeros(pts.shape[0], dtype=complex)
    vals[mask] = bj_field(f, f, pts[mask], tau_spec(cfg), threads=cfg.threads)
    PhaseField(grid, vals, {"signal": label, "tau_delta": cfg.tau_delta}).to_csv(cfg.out)


HANDLERS = {"ratio": cmd_ratio, "scan-blowup": cmd_scan_blowup, "scan-delta": cmd_scan_delta,
            "translation-vanishing": cmd_translation, "optimize": cmd_optimize,
            "verify-bounds": cmd_verify, "opbj-probe": cmd_opbj, "transform": cmd_transform}


def run(cfg: RunConfig) -> int:
    """Dispatch a validated configuration; writes the output and its manifest."""
    t0 = time.perf_counter()
    HANDLERS[cfg.command](cfg)
    manifest = {
        "config": cfg.to_dict(),
        "versions": {"bjlab": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time_s": time.perf_counter() - t0,
        "output": cfg.out,
    }
    _write_json(cfg.out + ".manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bjlab", description="Born-Jordan phase-space concentration lab")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output CSV/JSON path")
    common.add_argument("--d", type=int, default=2, help="dimension of the signal space")
    common.add_argument("--p", default="inf", help='Lebesgue exponent; "inf" for the supremum')
    common.add_argument("--omega", help="Omega JSON file")
    common.add_argument("--grid", type=int, help="grid points per axis")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--tau-panels", help="TauQuadratureSpec JSON file or Gauss nodes per panel")
    common.add_argument("--tau-delta", type=float, default=0.0, help="incomplete-distribution delta")
    common.add_argument("--R", type=parse_R, help="comma list of radii, e.g. e,e2,e3 or 10,30")
    common.add_argument("--trials", type=int)
    common.add_argument("--dict-size", type=int, default=16)
    common.add_argument("--restarts", type=int, default=1)
    common.add_argument("--symbol", help="symbol JSON file")
    common.add_argument("--q", type=float, help="symbol integrability exponent")
    common.add_argument("--deltas", type=parse_list, help="comma list of delta values (scan-delta)")
    common.add_argument("--shifts", type=parse_list, help="comma list of shift magnitudes")
    common.add_argument("--profile", help="RadialProfile JSON file (ratio, transform)")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {f.name: getattr(ns, f.name) for f in fields(RunConfig) if hasattr(ns, f.name)}
    return RunConfig(**kw)


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (ValueError, TypeError, ArithmeticError, OSError) as exc:
        print(f"bjlab {ns.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
