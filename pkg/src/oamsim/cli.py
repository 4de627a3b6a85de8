"""Command-line front end.

Subcommands: lg, hologram, conservation, scan, locus, budget. Settings come
from an optional JSON file (``--config``) with flags layered on top. Unknown
config keys are rejected. Outputs go to ``--out``, else ``$OAMSIM_OUTPUT_DIR``,
else the current directory.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .biphoton import LossBudget, REFERENCE_LOSSES, efficiency_budget, make_spdc_state
from .fieldgrid import make_grid
from .hologram import TWO_PI, HologramSpec, transmittance
from .lgmodes import PUMP_WAVELENGTH_MM, SIGNAL_WAVELENGTH_MM, BeamParams, ModeIndex, eval_lg
from .scenarios import (
    DEFAULT_L1,
    DEFAULT_L2,
    DEFAULT_SHIFTS,
    Raster,
    Setup,
    conservation_matrix,
    singularity_locus,
    superposition_scan,
    two_term_state,
)

OUTPUT_ENV = "OAMSIM_OUTPUT_DIR"

DEFAULTS: dict = {
    "grid": {"n": 256, "extent": None},
    "beam": {"waist": 0.2, "signal_wavelength": SIGNAL_WAVELENGTH_MM, "pump_wavelength": PUMP_WAVELENGTH_MM},
    "state": {"pump_l": 0, "L": 2, "amplitudes": None, "relative_phase": 0.0},
    "filters": {
        "fiber_waist": None,
        "line_density": 20.0,
        "blaze_depth": TWO_PI,
        "first_order_efficiency": 0.18,
        "aperture": 5.0,
        "truncation": 4,
        "wave_optics": True,
    },
    "scenario": {
        "l": 0,
        "p": 0,
        "delta_m": 2,
        "l1_list": list(DEFAULT_L1),
        "l2_list": list(DEFAULT_L2),
        "model": "entangled",
        "shift": 0.25,
        "dislocation_offset": 0.0,
        "shifts": list(DEFAULT_SHIFTS),
        "raster_points": 41,
        "raster_half_width": 2.0,
    },
    "budget": dict(REFERENCE_LOSSES),
    "output_dir": None,
    "seed": 0,
}

# sections whose keys are user-defined
OPEN_SECTIONS = {"budget"}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


@dataclass
class RunConfig:
    data: dict

    @classmethod
    def load(cls, path: str | None) -> RunConfig:
        data = copy.deepcopy(DEFAULTS)
        if path:
            try:
                user = json.loads(Path(path).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(user, dict):
                raise ConfigError("config root must be a JSON object")
            _merge(data, user, "")
        return cls(data)

    def set(self, dotted: str, value) -> None:
        section, _, key = dotted.partition(".")
        if key:
            self.data[section][key] = value
        else:
            self.data[section] = value

    def __getitem__(self, key):
        return self.data[key]


def _merge(base: dict, user: dict, prefix: str) -> None:
    for key, value in user.items():
        name = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{name}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{name}' must be an object")
            if key in OPEN_SECTIONS:
                base[key] = dict(value)
            else:
                _merge(base[key], value, f"{name}.")
        else:
            base[key] = value


def _complex_list(raw, key: str):
    if raw is None:
        return None
    out = []
    for v in raw:
        if isinstance(v, (list, tuple)) and len(v) == 2:
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (int, float)):
            out.append(complex(v))
        else:
            raise ConfigError(f"config key '{key}' entries must be numbers or [re, im] pairs")
    return out


def _build(cfg: RunConfig):
    """Validate the config into domain objects, naming the key on failure."""

    def guard(key, fn):
        try:
            return fn()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for '{key}': {exc}") from exc

    b, g, f = cfg["beam"], cfg["grid"], cfg["filters"]
    beam = guard("beam.waist", lambda: BeamParams(float(b["waist"]), float(b["signal_wavelength"])))
    guard("beam.pump_wavelength", lambda: BeamParams(1.0, float(b["pump_wavelength"])))
    extent = g["extent"] if g["extent"] is not None else 8 * beam.waist
    grid = guard("grid.n", lambda: make_grid(int(g["n"]), float(extent)))
    holo = guard(
        "filters",
        lambda: HologramSpec(
            line_density=float(f["line_density"]),
            blaze_depth=float(f["blaze_depth"]),
            first_order_efficiency=float(f["first_order_efficiency"]),
            aperture=float(f["aperture"]),
        ),
    )
    fiber = f["fiber_waist"] if f["fiber_waist"] is not None else beam.waist
    L = guard("filters.truncation", lambda: int(f["truncation"]))
    if L < 0:
        raise ConfigError("invalid value for 'filters.truncation': must be >= 0")
    return guard("filters.fiber_waist", lambda: Setup(beam, grid, holo, float(fiber), L))


def _out_dir(cfg: RunConfig, cli_out: str | None) -> Path:
    path = cli_out or cfg["output_dir"] or os.environ.get(OUTPUT_ENV) or "."
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    if not os.access(p, os.W_OK):
        raise PermissionError(f"output directory {p} is not writable")
    return p


# -- writers -------------------------------------------------------------


def fmt(v: float) -> str:
    return f"{v:.9g}"


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(c if isinstance(c, str) else fmt(c) for c in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pgm(path: Path, image: np.ndarray) -> None:
    """Binary 8-bit graymap; ``image[iy, ix]`` with y up, so rows are flipped."""
    data = np.flipud(np.asarray(image, dtype=np.uint8))
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def intensity_to_gray(intensity: np.ndarray) -> np.ndarray:
    peak = intensity.max()
    scaled = intensity / peak if peak > 0 else intensity
    return np.rint(255 * scaled).astype(np.uint8)


def phase_to_gray(phase: np.ndarray, lo: float = -np.pi) -> np.ndarray:
    return np.rint(255 * np.clip((phase - lo) / TWO_PI, 0, 1)).astype(np.uint8)


# -- subcommands ---------------------------------------------------------


def cmd_lg(cfg, setup, out, args):
    sc = cfg["scenario"]
    mode = ModeIndex(int(sc["l"]), int(sc["p"]))
    field = eval_lg(mode, setup.beam, setup.grid)
    stem = f"lg_l{mode.l}_p{mode.p}"
    write_pgm(out / f"{stem}_intensity.pgm", intensity_to_gray(field.intensity()))
    write_pgm(out / f"{stem}_phase.pgm", phase_to_gray(field.phase()))
    return [f"{stem}_intensity.pgm", f"{stem}_phase.pgm"]


def cmd_hologram(cfg, setup, out, args):
    sc = cfg["scenario"]
    spec = HologramSpec(
        delta_m=int(sc["delta_m"]),
        line_density=setup.hologram.line_density,
        dislocation_offset=(float(sc["dislocation_offset"]) * setup.beam.waist, 0.0),
        blaze_depth=setup.hologram.blaze_depth,
        first_order_efficiency=setup.hologram.first_order_efficiency,
        aperture=setup.hologram.aperture,
    )
    t = transmittance(spec, setup.grid)
    phase = np.mod(np.angle(t.samples), TWO_PI)
    name = f"hologram_dm{spec.delta_m}.pgm"
    write_pgm(out / name, phase_to_gray(phase, lo=0.0))
    return [name]


def cmd_conservation(cfg, setup, out, args):
    st, sc = cfg["state"], cfg["scenario"]
    pump = int(st["pump_l"])
    state = make_spdc_state(pump, int(st["L"]), _complex_list(st["amplitudes"], "state.amplitudes"))
    l1, l2 = [int(v) for v in sc["l1_list"]], [int(v) for v in sc["l2_list"]]
    m = conservation_matrix(pump, state, l1, l2, setup, wave=bool(cfg["filters"]["wave_optics"]))
    rows = [[str(a)] + [fmt(v) for v in row] for a, row in zip(l1, m.normalized)]
    name = f"conservation_p{pump}.csv"
    write_csv(out / name, ["l1"] + [f"l2={b}" for b in l2], rows)
    for a in m.degenerate_rows:
        print(f"warning: row l1={a} has no coincidences (no conserving partner in the l2 list or zero pair amplitude); left as nan", file=sys.stderr)
    return [name]


def cmd_scan(cfg, setup, out, args):
    sc, st = cfg["scenario"], cfg["state"]
    w = setup.beam.waist
    raster = Raster(int(sc["raster_points"]), float(sc["raster_half_width"]))
    res = superposition_scan(
        sc["model"], float(sc["shift"]) * w, raster, setup, two_term_state(float(st["relative_phase"])),
        delta_m=-int(sc["delta_m"]),
    )
    stem = f"scan_{res.model}_shift{fmt(float(sc['shift']))}"
    rows = [[x, y, res.values[i, j]] for i, y in enumerate(res.ys) for j, x in enumerate(res.xs)]
    write_csv(out / f"{stem}.csv", ["x_mm", "y_mm", "coincidence"], rows)
    write_pgm(out / f"{stem}.pgm", intensity_to_gray(res.values))
    print(f"min/max = {fmt(res.zero_value / res.peak)} at ({fmt(res.zero[0])}, {fmt(res.zero[1])}) mm")
    return [f"{stem}.csv", f"{stem}.pgm"]


def cmd_locus(cfg, setup, out, args):
    sc, st = cfg["scenario"], cfg["state"]
    w = setup.beam.waist
    rows = singularity_locus(
        [float(s) * w for s in sc["shifts"]], setup, two_term_state(float(st["relative_phase"])),
        delta_m=-int(sc["delta_m"]),
    )
    table = [[r.shift, r.amplitude_ratio, r.radius, r.angle, str(int(r.flagged))] for r in rows]
    write_csv(out / "locus.csv", ["shift_mm", "amplitude_ratio", "radius_mm", "angle_rad", "flagged"], table)
    return ["locus.csv"]


def cmd_budget(cfg, setup, out, args):
    try:
        budget = LossBudget({k: float(v) for k, v in cfg["budget"].items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in 'budget': {exc}") from exc
    eta = efficiency_budget(budget)
    print(f"{eta:.4f}")
    rows = [[k, v] for k, v in budget.factors.items()] + [["total", eta]]
    write_csv(out / "budget.csv", ["factor", "value"], rows)
    return ["budget.csv"]


COMMANDS = {
    "lg": cmd_lg,
    "hologram": cmd_hologram,
    "conservation": cmd_conservation,
    "scan": cmd_scan,
    "locus": cmd_locus,
    "budget": cmd_budget,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="grid samples per side")
    common.add_argument("--waist", type=float, help="beam waist in mm")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("lg", parents=[common], help="render an LG mode")
    p.add_argument("--l", type=int)
    p.add_argument("--p", type=int)
    p = sub.add_parser("hologram", parents=[common], help="export a fork hologram phase mask")
    p.add_argument("--delta-m", type=int)
    p.add_argument("--shift", type=float, help="dislocation offset in units of the waist")
    p = sub.add_parser("conservation", parents=[common], help="OAM conservation matrix")
    p.add_argument("--pump", type=int)
    p = sub.add_parser("scan", parents=[common], help="superposition coincidence scan")
    p.add_argument("--model", choices=["entangled", "mixture"])
    p.add_argument("--shift", type=float, help="dislocation offset in units of the waist")
    p.add_argument("--phase", type=float, help="relative phase on the |2>|-2> term")
    p = sub.add_parser("locus", parents=[common], help="singularity position vs hologram shift")
    p.add_argument("--phase", type=float, help="relative phase on the |2>|-2> term")
    sub.add_parser("budget", parents=[common], help="collection efficiency product")
    return parser


FLAG_KEYS = {
    "seed": "seed",
    "n": "grid.n",
    "waist": "beam.waist",
    "l": "scenario.l",
    "p": "scenario.p",
    "delta_m": "scenario.delta_m",
    "shift": "scenario.shift",
    "pump": "state.pump_l",
    "model": "scenario.model",
    "phase": "state.relative_phase",
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        for flag, key in FLAG_KEYS.items():
            value = getattr(args, flag, None)
            if value is not None:
                if flag == "shift" and args.command == "hologram":
                    key = "scenario.dislocation_offset"
                cfg.set(key, value)
        setup = _build(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        out = _out_dir(cfg, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        written = COMMANDS[args.command](cfg, setup, out, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for name in written:
        print(out / name)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
