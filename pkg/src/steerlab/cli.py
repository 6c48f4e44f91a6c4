"""
Command-line front end.

Exit codes: 0 steerable, 1 not steerable, 2 input error, 3 bracketing failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import criteria, solvers
from .errors import BracketError, SteerlabError
from .io import dumps_json, write_csv, write_json
from .observables import ErrorModel, loo_for
from .states import DensityMatrix, StateFamilySpec

EXIT_STEERABLE, EXIT_UNSTEERABLE, EXIT_INPUT, EXIT_BRACKET = 0, 1, 2, 3

SCENARIO_TAGS = {
    "bipartite_A_to_B": criteria.A_TO_B,
    "bipartite_B_to_A": criteria.B_TO_A,
    "tripartite_A_to_BC": criteria.A_TO_BC,
    "tripartite_BC_to_A": criteria.BC_TO_A,
}
DIRECTIONS = {
    "a-to-b": criteria.A_TO_B,
    "b-to-a": criteria.B_TO_A,
    "a-to-bc": criteria.A_TO_BC,
    "bc-to-a": criteria.BC_TO_A,
}
BASES = ("gell_mann", "pauli")


class ConfigError(SteerlabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ScenarioConfig:
    scenario: str
    state: StateFamilySpec | DensityMatrix
    xi: float = 0.0
    weights: list[float] | None = None
    basis: str = "gell_mann"
    seed: int = 0

    @property
    def tag(self) -> str:
        return SCENARIO_TAGS[self.scenario]

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        scenario = data.get("scenario")
        if scenario not in SCENARIO_TAGS:
            raise ConfigError("scenario", f"expected one of {sorted(SCENARIO_TAGS)}, got {scenario!r}")
        raw_state = data.get("state")
        if not isinstance(raw_state, dict):
            raise ConfigError("state", "missing or not an object")
        try:
            if "family" in raw_state:
                params = {k: raw_state[k] for k in ("p", "theta", "d") if k in raw_state}
                state = StateFamilySpec(raw_state["family"], **params)
                parties = state.parties
            else:
                state = DensityMatrix.from_dict(raw_state)
                parties = len(state.dims)
        except (SteerlabError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("state", str(exc)) from None
        tripartite = scenario.startswith("tripartite")
        if parties != (3 if tripartite else 2):
            raise ConfigError("scenario", f"{scenario} does not fit a {parties}-party state")

        xi = data.get("xi", 0.0)
        if isinstance(xi, bool) or not isinstance(xi, (int, float)) or not np.isfinite(xi) or xi < 0:
            raise ConfigError("xi", f"must be a finite number >= 0, got {xi!r}")
        weights = data.get("weights")
        if weights is not None:
            if tripartite:
                raise ConfigError("weights", "weights apply to bipartite scenarios only")
            if not isinstance(weights, list) or not all(
                isinstance(w, (int, float)) and not isinstance(w, bool) and np.isfinite(w) for w in weights
            ):
                raise ConfigError("weights", "must be a list of finite numbers")
        basis = data.get("basis", "gell_mann")
        if basis not in BASES:
            raise ConfigError("basis", f"expected one of {BASES}, got {basis!r}")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("seed", f"must be an integer, got {seed!r}")
        return cls(scenario, state, float(xi), weights, basis, seed)

    def density_matrix(self) -> DensityMatrix:
        return self.state.build() if isinstance(self.state, StateFamilySpec) else self.state


def load_config(path) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return ScenarioConfig.from_dict(data)


def run_check(cfg: ScenarioConfig) -> criteria.GapReport:
    rho = cfg.density_matrix()
    if cfg.basis == "pauli" and any(d != 2 for d in rho.dims):
        raise ConfigError("basis", "the pauli basis needs qubit subsystems")
    if cfg.weights is None:
        terms = criteria.scenario_terms(rho, cfg.tag)
    else:
        if cfg.tag == criteria.B_TO_A:
            rho = criteria.swap_roles(rho)
        da, db = rho.dims
        ba, bb = loo_for(da), loo_for(db)
        if len(cfg.weights) != len(ba):
            raise ConfigError("weights", f"expected {len(ba)} weights, got {len(cfg.weights)}")
        terms = criteria.proposition1_terms(rho, ba, bb, cfg.weights, cfg.seed, scenario=cfg.tag)
    return terms.at(ErrorModel(cfg.xi, terms.dim))


# --- commands ---------------------------------------------------------------


def cmd_check(args) -> int:
    report = run_check(load_config(args.config))
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_STEERABLE if report.steerable else EXIT_UNSTEERABLE


def cmd_threshold(args) -> int:
    direction = DIRECTIONS[args.direction]
    family = StateFamilySpec(args.family, theta=0.0) if args.family in ("ghz", "ghz_theta") else None
    if family is not None:
        if direction not in (criteria.A_TO_BC, criteria.BC_TO_A):
            raise ConfigError("direction", "the ghz family needs a tripartite direction")
        grid = solvers.AxisSpec("theta", 0.0, float(np.pi / 2), args.theta_points)
        result = solvers.critical_xi(family, grid, (0.0, args.xi_max), args.tol, scenario=direction)
    elif args.family in ("asymmetric", "asymmetric_p"):
        if direction not in (criteria.A_TO_B, criteria.B_TO_A):
            raise ConfigError("direction", "the asymmetric family needs a bipartite direction")
        result = solvers.p_threshold(direction, args.xi, args.tol, args.inequality)
    else:
        raise ConfigError("family", f"no scalar threshold for family {args.family!r}")
    payload = {"family": args.family, "direction": direction, "xi": args.xi, "inequality": args.inequality}
    payload.update(result.to_dict())
    if args.out:
        write_json(args.out, payload)
    print(dumps_json(payload))
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not isinstance(cfg.state, StateFamilySpec):
        raise ConfigError("state", "sweeps need a named state family")
    scenario = solvers.Scenario(cfg.tag, cfg.state, cfg.xi)
    grid = solvers.sweep(scenario, solvers.parse_grid(args.grid))
    grid.write_csv(args.out)
    return 0


def write_figure(n: int, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if n == 1:
        xis = np.linspace(0.0, 1e-4, 51)
        path = out / "fig1.csv"
        write_csv(path, solvers.FIG1_HEADER, solvers.figure1_rows(xis))
        written.append(path)
    elif n == 2:
        scenario = solvers.Scenario(criteria.A_TO_BC, StateFamilySpec("ghz_theta", theta=0.0))
        axes = [solvers.AxisSpec("theta", 0.0, float(np.pi / 2), 200), solvers.AxisSpec("xi", 0.0, 1e-4, 200)]
        path = out / "fig2.csv"
        solvers.sweep(scenario, axes).write_csv(path)
        written.append(path)
    elif n == 3:
        panels = [
            ("fig3a.csv", criteria.A_TO_B, "max_entangled_d"),
            ("fig3b.csv", criteria.A_TO_BC, "ghz_d"),
            ("fig3c.csv", criteria.BC_TO_A, "ghz_d"),
        ]
        axes = [solvers.AxisSpec("d", 2, 3, 2), solvers.AxisSpec("xi", 0.0, 1e-4, 101)]
        for name, tag, family in panels:
            scenario = solvers.Scenario(tag, StateFamilySpec(family, d=2))
            path = out / name
            solvers.sweep(scenario, axes).write_csv(path)
            written.append(path)
    else:
        raise ConfigError("figure", f"no figure {n}; choose 1, 2 or 3")
    return written


def cmd_figure(args) -> int:
    try:
        paths = write_figure(args.n, args.out_dir)
    except OSError as exc:
        raise ConfigError("out-dir", f"cannot write to {args.out_dir}: {exc.strerror}") from None
    for p in paths:
        print(p)
    return 0


def cmd_verify_bound(args) -> int:
    summary = solvers.verify_coeff_bound(args.d, args.xi, args.samples, args.seed)
    if args.out:
        write_csv(args.out, ["d", "xi", "sample", "max_coeff_dev", "bound"], summary.rows())
    print(
        f"d={summary.d} xi={summary.xi:.17g} samples={summary.samples} "
        f"max_dev={summary.max_deviation:.17g} bound={summary.bound:.17g} violations={summary.violations}"
    )
    return 0 if summary.violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steerlab", description="Steering criteria under imprecise measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate one scenario config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("threshold", help="bisect a steerability threshold")
    p.add_argument("--family", required=True, help="asymmetric (threshold in p) or ghz (threshold in xi)")
    p.add_argument("--direction", required=True, choices=sorted(DIRECTIONS))
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--inequality", choices=("loo", "paired"), default="loo")
    p.add_argument("--xi-max", type=float, default=1e-3, help="upper xi bracket for the ghz family")
    p.add_argument("--theta-points", type=int, default=400)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="evaluate a scenario on a grid")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True, help="e.g. theta:0:1.5707963267948966:50,xi:0:1e-4:20")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="write the CSV data behind a figure")
    p.add_argument("n", type=int, choices=(1, 2, 3))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify-bound", help="Monte-Carlo check of the coefficient bound")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_bound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except SteerlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
