"""
Threshold extraction, parameter sweeps and the coefficient-bound experiment.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .criteria import (
    A_TO_B,
    A_TO_BC,
    B_TO_A,
    BC_TO_A,
    GapReport,
    GapTerms,
    proposition1_terms,
    scenario_terms,
    swap_roles,
)
from .errors import BracketError, ParameterError
from .observables import ErrorModel, coeff_bound, gell_mann_loo, loo_for, perturb_basis, tomography_coeffs
from .states import StateFamilySpec, random_density_matrix


def thread_count() -> int:
    env = os.environ.get("STEERLAB_THREADS")
    n = os.cpu_count() or 1
    if env:
        n = min(n, max(1, int(env)))
    return n


# --- bisection --------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    parameter: str
    critical: float
    bracket: tuple[float, float]
    tolerance: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "critical": self.critical,
            "bracket": list(self.bracket),
            "tolerance": self.tolerance,
            "evaluations": self.evaluations,
        }


def bisect_threshold(
    gap_fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    parameter: str = "x",
) -> ThresholdResult:
    """
    Locate where ``gap_fn`` switches between ``> 0`` and ``<= 0``.

    A zero gap counts as the non-positive side. Never evaluates outside
    ``[lo, hi]`` and makes ``ceil(log2((hi - lo) / tol)) + 2`` calls at most.
    If the function changes sign more than once, one crossing is returned.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if not lo < hi:
        raise ParameterError(f"need lo < hi, got ({lo}, {hi})")
    lo_pos = gap_fn(lo) > 0
    hi_pos = gap_fn(hi) > 0
    evaluations = 2
    if lo_pos == hi_pos:
        raise BracketError(f"{parameter}: gap has the same sign at {lo} and {hi}")
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        evaluations += 1
        if (gap_fn(mid) > 0) == lo_pos:
            a = mid
        else:
            b = mid
    return ThresholdResult(parameter, 0.5 * (a + b), (a, b), b - a, evaluations)


def _gap_value(terms: GapTerms, xi: float) -> float:
    return terms.at(xi).gap


def p_threshold(
    direction: str = A_TO_B,
    xi: float = 0.0,
    tol: float = 1e-6,
    inequality: str = "loo",
    bracket: tuple[float, float] = (0.0, 1.0),
) -> ThresholdResult:
    """
    Critical mixing weight ``p`` of the asymmetric two-qubit family.

    ``inequality="loo"`` uses the trace-norm LOO criterion; ``"paired"``
    uses the paired-observable bound with unit weights.
    """
    def gap(p):
        return asymmetric_terms(float(p), direction, inequality).at(xi).gap

    return bisect_threshold(gap, bracket[0], bracket[1], tol, parameter="p")


@lru_cache(maxsize=4096)
def asymmetric_terms(p: float, direction: str, inequality: str = "loo") -> GapTerms:
    rho = StateFamilySpec("asymmetric_p", p=p).build()
    if inequality == "loo":
        return scenario_terms(rho, direction)
    if inequality == "paired":
        if direction == B_TO_A:
            rho = swap_roles(rho)
        pauli = loo_for(2)
        return proposition1_terms(rho, pauli, pauli, scenario=direction)
    raise ParameterError(f"unknown inequality {inequality!r}")


@dataclass(frozen=True)
class AxisSpec:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ParameterError(f"axis {self.name!r}: count must be >= 2")
        if not self.start < self.stop:
            raise ParameterError(f"axis {self.name!r}: start must be < stop")

    @property
    def values(self) -> np.ndarray:
        v = np.linspace(self.start, self.stop, self.count)
        if self.name == "d":
            return np.round(v).astype(int)
        return v

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """``"name:start:stop:count"``."""
        try:
            name, start, stop, count = text.split(":")
            return cls(name.strip(), float(start), float(stop), int(count))
        except ValueError as exc:
            raise ParameterError(f"bad axis spec {text!r}: {exc}") from None


def parse_grid(text: str) -> list[AxisSpec]:
    axes = [AxisSpec.parse(part) for part in text.split(",") if part.strip()]
    if not 1 <= len(axes) <= 2:
        raise ParameterError("a grid has one or two axes")
    return axes


def critical_xi(
    family: StateFamilySpec,
    theta_grid: AxisSpec | Sequence[float],
    xi_bracket: tuple[float, float] = (0.0, 1e-3),
    tol: float = 1e-9,
    scenario: str = A_TO_BC,
) -> ThresholdResult:
    """
    Smallest xi beyond which ``max_theta gap(theta, xi) <= 0``.

    The maximum is taken over a fixed theta grid because the trace norm makes
    the gap kinked in theta.
    """
    thetas = theta_grid.values if isinstance(theta_grid, AxisSpec) else np.asarray(theta_grid, dtype=float)
    if len(thetas) < 200:
        raise ParameterError("theta grid needs at least 200 points")
    terms = [scenario_terms(family.with_params(theta=float(t)).build(), scenario) for t in thetas]

    def best_gap(xi):
        return max(t.at(xi).gap for t in terms)

    return bisect_threshold(best_gap, xi_bracket[0], xi_bracket[1], tol, parameter="xi")


# --- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A steering scenario on a state family at a fixed imprecision."""

    tag: str
    family: StateFamilySpec
    xi: float = 0.0

    def __post_init__(self):
        tripartite = self.tag in (A_TO_BC, BC_TO_A)
        if tripartite != (self.family.parties == 3):
            raise ParameterError(f"scenario {self.tag} does not fit family {self.family.family}")


@lru_cache(maxsize=8192)
def _cached_terms(family: StateFamilySpec, tag: str) -> GapTerms:
    return scenario_terms(family.build(), tag)


def evaluate(scenario: Scenario, **overrides) -> GapReport:
    xi = overrides.pop("xi", scenario.xi)
    family = scenario.family.with_params(**overrides) if overrides else scenario.family
    return _cached_terms(family, scenario.tag).at(float(xi))


@dataclass
class SweepGrid:
    scenario: Scenario
    axes: list[AxisSpec]
    reports: np.ndarray = field(repr=False)  # object array of GapReport, shape = counts

    def column(self, name: str) -> np.ndarray:
        return np.vectorize(lambda r: getattr(r, name), otypes=[float])(self.reports)

    def rows(self):
        a1 = self.axes[0].values
        a2 = self.axes[1].values if len(self.axes) > 1 else [None]
        for i, x in enumerate(a1):
            for j, y in enumerate(a2):
                r = self.reports[i, j] if len(self.axes) > 1 else self.reports[i]
                yield (x, y, r.lhs, r.penalty, r.rhs, r.gap, int(r.steerable))

    def write_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["axis1", "axis2", "lhs", "penalty", "rhs", "gap", "steerable"], self.rows())


def sweep(scenario: Scenario, axes: Sequence[AxisSpec], threads: int | None = None) -> SweepGrid:
    """Evaluate the scenario at every grid point; rows run in parallel, output order is fixed."""
    axes = list(axes)
    if not 1 <= len(axes) <= 2:
        raise ParameterError("a grid has one or two axes")
    allowed = {"xi", scenario.family.parameter}
    for ax in axes:
        if ax.name not in allowed:
            raise ParameterError(f"axis {ax.name!r} is not a parameter of {scenario.family.family}")
    shape = tuple(ax.count for ax in axes)
    reports = np.empty(shape, dtype=object)

    def _cast(name, v):
        return int(v) if name == "d" else float(v)

    def row(i):
        x = _cast(axes[0].name, axes[0].values[i])
        if len(axes) == 1:
            reports[i] = evaluate(scenario, **{axes[0].name: x})
            return
        for j, y in enumerate(axes[1].values):
            reports[i, j] = evaluate(scenario, **{axes[0].name: x, axes[1].name: _cast(axes[1].name, y)})

    n = threads or thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(row, range(shape[0])))
    else:
        for i in range(shape[0]):
            row(i)
    return SweepGrid(scenario, axes, reports)


# --- coefficient-bound experiment ------------------------------------------


@dataclass(frozen=True)
class BoundSummary:
    d: int
    xi: float
    samples: int
    seed: int
    max_deviation: float
    bound: float
    violations: int
    per_sample: np.ndarray = field(repr=False, compare=False)

    def rows(self):
        for i, dev in enumerate(self.per_sample):
            yield (self.d, self.xi, i, dev, self.bound)


def verify_coeff_bound(d: int, xi: float, samples: int, seed: int = 0) -> BoundSummary:
    """
    Draw perturbed Gell-Mann bases and random states, and record
    ``max_i |r_i - q_i|`` against the analytic bound ``d (xi/2 + sqrt(2 d xi))``.

    Sample ``k`` uses the generator seeded by ``(seed, k)``, so results do not
    depend on how samples are scheduled.
    """
    if samples < 0:
        raise ParameterError("samples must be >= 0")
    model = ErrorModel(xi, d)
    targets = gell_mann_loo(d)
    bound = coeff_bound(model)
    devs = np.empty(samples)
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        rho_b = random_density_matrix((d,), rng)
        perturbed = perturb_basis(targets, model, rng)
        r = tomography_coeffs(rho_b, targets)
        q = tomography_coeffs(rho_b, perturbed.implemented)
        devs[k] = np.max(np.abs(r - q))
    violations = int(np.sum(devs > bound))
    max_dev = float(devs.max()) if samples else 0.0
    return BoundSummary(d, xi, samples, seed, max_dev, bound, violations, devs)


# --- figure data ------------------------------------------------------------


def figure1_rows(xis: Sequence[float], tol: float = 1e-6):
    """Per xi: p* for A->B and B->A, under the LOO criterion and the paired bound."""
    for xi in xis:
        row = [xi]
        for inequality in ("loo", "paired"):
            for direction in (A_TO_B, B_TO_A):
                try:
                    row.append(p_threshold(direction, xi, tol, inequality).critical)
                except BracketError:
                    row.append(math.nan)
        yield row


FIG1_HEADER = ["xi", "p_star_a_to_b", "p_star_b_to_a", "p_star_a_to_b_paired", "p_star_b_to_a_paired"]
