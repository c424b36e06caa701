"""Command-line front end: ``sweep``, ``bosonic-gap`` and ``ergotropy``.

Exit codes: 0 success, 2 invalid input, 3 optimiser failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import bosonic
from .capacitance import OptimizerConfig, sweep
from .channels import ChannelSpec
from .ergotropy import find_beta_star, mean_energy, passive_decompose, total_ergotropy, von_neumann_entropy
from .errors import NoConvergence, WorkcapError
from .qops import Hamiltonian, density_matrix

COLUMNS = ("e1", "e1_tot", "chi", "chi_tot", "gap")
EXIT_OK, EXIT_INVALID, EXIT_NOCONV = 0, 2, 3


class ConfigError(ValueError):
    """Invalid user input, reported with the offending field."""

    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field_name = field_name


@dataclass(frozen=True)
class SweepConfig:
    channel: ChannelSpec
    hamiltonian: tuple = (0.0, 1.0, 2.0)
    grid_size: int = 64
    optimizer: OptimizerConfig = OptimizerConfig()
    outputs: tuple = COLUMNS

    def echo(self) -> dict:
        return {
            "channel": self.channel.describe(),
            "hamiltonian": list(self.hamiltonian),
            "grid_size": self.grid_size,
            "optimizer": asdict(self.optimizer),
            "outputs": list(self.outputs),
        }


def _complex(entry, where: str) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry
    ):
        return complex(entry[0], entry[1])
    raise ConfigError(where, f"expected a number or [re, im] pair, got {entry!r}")


def parse_matrix(obj, where: str) -> np.ndarray:
    """Square matrix from nested lists of reals or ``[re, im]`` pairs."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ConfigError(where, "expected a non-empty list of rows")
    n = len(obj)
    if any(len(r) != n for r in obj):
        raise ConfigError(where, f"expected a square {n}x{n} matrix")
    return np.array([[_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)]
                     for i, r in enumerate(obj)])


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise ConfigError(path, str(exc))


def parse_channel(obj) -> ChannelSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("channel", "expected an object with a 'kind' field")
    kind = obj["kind"]
    if kind not in ChannelSpec.KINDS:
        raise ConfigError("channel.kind", f"unknown kind {kind!r}; expected one of {ChannelSpec.KINDS}")
    if kind == "custom_kraus":
        ops = obj.get("kraus")
        if not isinstance(ops, list) or not ops:
            raise ConfigError("channel.kraus", "expected a non-empty list of matrices")
        params = tuple(parse_matrix(k, f"channel.kraus[{i}]") for i, k in enumerate(ops))
        spec = ChannelSpec(kind, None, params)
    else:
        params = obj.get("params", [])
        if not isinstance(params, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in params
        ):
            raise ConfigError("channel.params", "expected a list of numbers")
        spec = ChannelSpec(kind, obj.get("dim"), tuple(float(p) for p in params))
    try:
        spec.build()
    except WorkcapError as exc:
        raise ConfigError("channel.params" if kind != "custom_kraus" else "channel.kraus", str(exc))
    return spec


def parse_sweep_config(obj, seed: int | None = None, grid: int | None = None) -> SweepConfig:
    """Validate a decoded JSON sweep configuration; ``seed``/``grid`` override it."""
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"channel", "hamiltonian", "grid_size", "optimizer", "outputs"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown field")
    channel = parse_channel(obj.get("channel"))

    ham = obj.get("hamiltonian", [0.0, 1.0, 2.0])
    if not isinstance(ham, list) or not ham or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in ham
    ):
        raise ConfigError("hamiltonian", "expected a list of real eigenvalues")
    if min(ham) != 0 or any(v < 0 for v in ham):
        raise ConfigError("hamiltonian", "eigenvalues must be >= 0 with minimum 0")

    grid_size = grid if grid is not None else obj.get("grid_size", 64)
    if not isinstance(grid_size, int) or isinstance(grid_size, bool) or grid_size < 2:
        raise ConfigError("grid_size", f"expected an integer >= 2, got {grid_size!r}")

    opt = obj.get("optimizer", {})
    if not isinstance(opt, dict):
        raise ConfigError("optimizer", "expected an object")
    names = {f.name for f in fields(OptimizerConfig)}
    for key in opt:
        if key not in names:
            raise ConfigError(f"optimizer.{key}", "unknown field")
    opt = dict(opt)
    if seed is not None:
        opt["seed"] = seed
    try:
        optimizer = OptimizerConfig(**opt)
    except (TypeError, ValueError) as exc:
        raise ConfigError("optimizer", str(exc))

    outputs = obj.get("outputs", list(COLUMNS))
    if not isinstance(outputs, list) or not outputs or any(o not in COLUMNS for o in outputs):
        raise ConfigError("outputs", f"expected a non-empty subset of {COLUMNS}")
    outputs = tuple(c for c in COLUMNS if c in outputs)

    dim = channel.build().dim_in
    if dim != len(ham):
        raise ConfigError("hamiltonian", f"{len(ham)} levels but the channel acts on dimension {dim}")
    return SweepConfig(channel, tuple(float(v) for v in ham), grid_size, optimizer, outputs)


def fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def write_csv(path: str, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def cmd_sweep(args) -> int:
    cfg = parse_sweep_config(_load_json(args.config), args.seed, args.grid)
    h = Hamiltonian.from_eigenvalues(cfg.hamiltonian)
    result = sweep(cfg.channel.build(), h, cfg.grid_size, cfg.optimizer, jobs=args.jobs,
                   meta={"channel": cfg.channel.describe()})
    scale = args.unit_scale
    grid = result.e1.e_grid
    rows = [[grid[i] * scale] + [result.column(c)[i] * scale for c in cfg.outputs]
            for i in range(len(grid))]
    write_csv(args.out, ["e", *cfg.outputs], rows)
    report = {
        "config": cfg.echo(),
        "unit_scale": scale,
        "points": [
            {"e": p.e, "wall_time_s": t, "diagnostics": p.diagnostics}
            for p, t in zip(result.points, result.timings)
        ],
    }
    with open(args.out + ".report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def cmd_bosonic_gap(args) -> int:
    lo, hi, steps = args.beta_min, args.beta_max, args.steps
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ConfigError("beta range", f"need 0 < beta_min < beta_max, got [{lo}, {hi}]")
    if steps < 2:
        raise ConfigError("steps", f"need at least 2 steps, got {steps}")
    rows = []
    for beta in np.linspace(lo, hi, steps):
        r = bosonic.gap_row(float(beta))
        rows.append([r["beta"], r["beta_star"], r["e_pass"] * args.unit_scale,
                     r["e_cpass"] * args.unit_scale, r["gap"] * args.unit_scale])
    write_csv(args.out, ["beta", "beta_star", "e_pass", "e_cpass", "gap"], rows)
    return EXIT_OK


def parse_levels(text: str) -> list[float]:
    try:
        levels = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError("hamiltonian", f"expected comma-separated reals, got {text!r}")
    if not levels or min(levels) != 0 or any(v < 0 for v in levels):
        raise ConfigError("hamiltonian", "eigenvalues must be >= 0 with minimum 0")
    return levels


def cmd_ergotropy(args, out=None) -> int:
    out = out or sys.stdout
    levels = parse_levels(args.hamiltonian)
    obj = _load_json(args.state)
    if isinstance(obj, dict):
        obj = obj.get("rho")
    m = parse_matrix(obj, "state")
    if m.shape[0] != len(levels):
        raise ConfigError("state", f"dimension {m.shape[0]} does not match {len(levels)} levels")
    try:
        rho = density_matrix(m)
    except WorkcapError as exc:
        raise ConfigError("state", str(exc))
    h = Hamiltonian.from_eigenvalues(levels)
    s = von_neumann_entropy(rho)
    lines = {
        "mean_energy": mean_energy(rho, h),
        "ergotropy": passive_decompose(rho, h).ergotropy,
        "total_ergotropy": total_ergotropy(rho, h),
        "beta_star": find_beta_star(h, s).beta,
        "entropy": s,
    }
    for key, val in lines.items():
        print(f"{key} {fmt(val * (args.unit_scale if key not in ('beta_star', 'entropy') else 1.0))}",
              file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="workcap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="E1, E1_tot and their envelopes on an energy grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--unit-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bosonic-gap", help="two-mode attenuator gap against beta")
    p.add_argument("--beta-min", type=float, required=True)
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--unit-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_bosonic_gap)

    p = sub.add_parser("ergotropy", help="inspect one density matrix")
    p.add_argument("--state", required=True)
    p.add_argument("--hamiltonian", default="0,1,2")
    p.add_argument("--unit-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_ergotropy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs: must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NoConvergence as exc:
        print(f"error: optimiser did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
