"""Built-in worked examples and their parameter sweeps.

Seven parameterized configurations illustrate how the two ratio
variants react to case mix, hospital size, actual rates and benchmark
rates. Each scenario fixes a small cohort (and, for the external ones,
a standard), exposes a single sweep parameter, and knows the
qualitative claims its figure-style series should exhibit:

======================  ========  =========  ==============================
name                    scheme    parameter  headline behavior
======================  ========  =========  ==============================
casemix-ext             external  eta        the two ratios drift apart as
                                             patients move between strata
scale-ext               external  lambda     ratio is flat in hospital size
actual-ext              external  p11        equal deviations, unequal
                                             ratios away from the standard
expected-ext            external  p1e        ranking flips at p1e = 0.14
casemix-int             internal  eta        interior stationary point of
                                             hospital 1's ratio
scale-int               internal  lambda     growth drags the ratio to 1;
                                             hospital 1 undercuts 3
actual-int              internal  p11        higher mortality can lower
                                             the ratio (share-dependent)
======================  ========  =========  ==============================

Default grids: integer steps for patient shifts, 0.1 for scale factors
over [1, 5], 0.005 for rate sweeps. The grids are a presentation choice
(recorded in the sweep metadata), not part of the configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite
from typing import Callable, Mapping

from . import core
from .core import Cohort, ExternalStandard, HospitalId, Scheme
from .errors import ParameterOutOfRangeError, UnknownHospitalError, InvalidParameterError

SCENARIO_NAMES = (
    "casemix-ext",
    "scale-ext",
    "actual-ext",
    "expected-ext",
    "casemix-int",
    "scale-int",
    "actual-int",
)

#: Refinement target for crossing detection: |SMR_a - SMR_b| at the result.
CROSSING_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioWorld:
    """One scenario materialized at a single parameter value."""

    cohort: Cohort
    standard: ExternalStandard | None
    scheme: Scheme


@dataclass(frozen=True)
class ScenarioSpec:
    """A named scenario plus the parameter grid to sweep.

    ``grid`` holds explicit parameter values; :meth:`default` builds the
    standard grid, optionally overridden by min/max/step. ``overrides``
    carries scenario constants such as ``w11`` for actual-int.
    """

    name: str
    grid: tuple[float, ...]
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in SCENARIO_NAMES:
            raise InvalidParameterError(f"unknown scenario {self.name!r}")
        if not self.grid:
            raise InvalidParameterError("parameter grid must be non-empty")
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        object.__setattr__(self, "overrides", dict(self.overrides))
        lo, hi = _RANGES[self.name]
        for x in self.grid:
            _check_range(self.name, x, lo, hi)

    @property
    def parameter(self) -> str:
        return _PARAMETERS[self.name]

    @property
    def scheme(self) -> Scheme:
        return "external" if self.name.endswith("-ext") else "internal"

    @classmethod
    def default(
        cls,
        name: str,
        overrides: Mapping[str, float] | None = None,
        lo: float | None = None,
        hi: float | None = None,
        step: float | None = None,
    ) -> "ScenarioSpec":
        if name not in _DEFAULT_GRIDS:
            raise InvalidParameterError(f"unknown scenario {name!r}")
        d_lo, d_hi, d_step = _DEFAULT_GRIDS[name]
        lo = d_lo if lo is None else lo
        hi = d_hi if hi is None else hi
        step = d_step if step is None else step
        if step <= 0.0 or hi < lo:
            raise InvalidParameterError("grid needs step > 0 and max >= min")
        n = int(round((hi - lo) / step))
        grid = [lo + i * step for i in range(n + 1)]
        if grid[-1] > hi + 1e-12:
            grid.pop()
        return cls(name, tuple(grid), overrides or {})


@dataclass(frozen=True)
class SweepSeries:
    """Per-hospital ratio series over the parameter grid."""

    spec: ScenarioSpec
    values: tuple[float, ...]
    series: Mapping[HospitalId, tuple[float, ...]]

    @property
    def scheme(self) -> Scheme:
        return self.spec.scheme

    def hospital(self, hospital: HospitalId) -> tuple[float, ...]:
        try:
            return self.series[hospital]
        except KeyError:
            raise UnknownHospitalError(f"hospital {hospital!r} not in series") from None


_PARAMETERS = {
    "casemix-ext": "eta",
    "scale-ext": "lambda",
    "actual-ext": "p11",
    "expected-ext": "p1e",
    "casemix-int": "eta",
    "scale-int": "lambda",
    "actual-int": "p11",
}

_RANGES: dict[str, tuple[float, float]] = {
    "casemix-ext": (0.0, 20.0),
    "scale-ext": (0.0, float("inf")),  # exclusive at 0
    "actual-ext": (0.0, 1.0),
    "expected-ext": (0.0, 1.0),
    "casemix-int": (0.0, 50.0),
    "scale-int": (0.0, float("inf")),
    "actual-int": (0.0, 1.0),
}

_DEFAULT_GRIDS: dict[str, tuple[float, float, float]] = {
    "casemix-ext": (0.0, 20.0, 1.0),
    "scale-ext": (1.0, 5.0, 0.1),
    "actual-ext": (0.0, 1.0, 0.005),
    "expected-ext": (0.01, 0.3, 0.005),
    "casemix-int": (0.0, 50.0, 1.0),
    "scale-int": (1.0, 5.0, 0.1),
    "actual-int": (0.0, 1.0, 0.005),
}


def _check_range(name: str, at: float, lo: float, hi: float) -> None:
    open_low = name in ("scale-ext", "scale-int")
    inside = (at > lo if open_low else at >= lo) and at <= hi
    if not inside:
        raise ParameterOutOfRangeError(
            f"{_PARAMETERS[name]} = {at!r} outside the valid range of {name}"
        )


def _tables(rows: Mapping[HospitalId, Mapping[str, tuple]]) -> Cohort:
    return Cohort.build(rows)


def _build_casemix_ext(eta: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables(
        {
            "H1": {"1": (20.0 - eta, 0.2), "2": (eta, 0.1), "3": (5.0, 0.2)},
            "H2": {"1": (20.0 - eta, 0.2), "2": (eta, 0.1), "3": (5.0, 0.1)},
        }
    )
    return ScenarioWorld(cohort, ExternalStandard({"1": 0.2, "2": 0.1, "3": 0.15}), "external")


def _build_scale_ext(lam: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables({"H1": {"1": (20.0 * lam, 0.05), "2": (40.0 * lam, 0.15)}})
    return ScenarioWorld(cohort, ExternalStandard({"1": 0.1, "2": 0.1}), "external")


def _build_actual_ext(p11: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables(
        {
            "H1": {"1": (5.0, p11), "2": (5.0, 0.15)},
            "H2": {"1": (5.0, p11), "3": (5.0, 0.3)},
        }
    )
    return ScenarioWorld(cohort, ExternalStandard({"1": 0.1, "2": 0.15, "3": 0.3}), "external")


def _build_expected_ext(p1e: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables(
        {
            "H1": {"1": (5.0, 0.1), "2": (5.0, 0.2)},
            "H2": {"1": (5.0, 0.1), "2": (15.0, 0.15)},
        }
    )
    return ScenarioWorld(cohort, ExternalStandard({"1": p1e, "2": 0.1}), "external")


def _build_casemix_int(eta: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables(
        {
            "H1": {"1": (50.0 - eta, 0.1), "2": (eta, 0.3)},
            "H2": {"1": (25.0, 0.1), "2": (10.0, 0.1)},
        }
    )
    return ScenarioWorld(cohort, None, "internal")


def _build_scale_int(lam: float, _: Mapping[str, float]) -> ScenarioWorld:
    cohort = _tables(
        {
            "H1": {"1": (50.0 * lam, 0.3), "2": (50.0 * lam, 0.2), "3": (0.0, None)},
            "H2": {"1": (50.0, 0.1), "2": (100.0, 0.1), "3": (0.0, None)},
            "H3": {"1": (0.0, None), "2": (10.0, 0.25), "3": (10.0, 0.2)},
        }
    )
    return ScenarioWorld(cohort, None, "internal")


def _build_actual_int(p11: float, overrides: Mapping[str, float]) -> ScenarioWorld:
    w11 = float(overrides.get("w11", 0.8))
    if not 0.0 <= w11 <= 1.0:
        raise ParameterOutOfRangeError(f"w11 = {w11!r} outside [0, 1]")
    cohort = _tables(
        {
            "H1": {"1": (100.0 * w11, p11), "2": (50.0, 0.4)},
            "H2": {"1": (100.0 * (1.0 - w11), 0.1), "2": (50.0, 0.1)},
            "H3": {"1": (0.0, None), "2": (40.0, 0.3)},
        }
    )
    return ScenarioWorld(cohort, None, "internal")


_BUILDERS: dict[str, Callable[[float, Mapping[str, float]], ScenarioWorld]] = {
    "casemix-ext": _build_casemix_ext,
    "scale-ext": _build_scale_ext,
    "actual-ext": _build_actual_ext,
    "expected-ext": _build_expected_ext,
    "casemix-int": _build_casemix_int,
    "scale-int": _build_scale_int,
    "actual-int": _build_actual_int,
}


def build_scenario(spec: ScenarioSpec, at: float) -> ScenarioWorld:
    """Materialize the scenario at one parameter value."""
    lo, hi = _RANGES[spec.name]
    _check_range(spec.name, at, lo, hi)
    return _BUILDERS[spec.name](float(at), spec.overrides)


def evaluate(world: ScenarioWorld, hospital: HospitalId) -> float:
    if world.scheme == "external":
        return core.smr_external(world.cohort.table(hospital), world.standard).smr
    return core.smr_internal(world.cohort, hospital).smr


def run_sweep(spec: ScenarioSpec) -> SweepSeries:
    """Evaluate every hospital's ratio at every grid point."""
    hospitals = build_scenario(spec, spec.grid[0]).cohort.ids()
    series: dict[HospitalId, list[float]] = {h: [] for h in hospitals}
    for x in spec.grid:
        world = build_scenario(spec, x)
        for h in hospitals:
            value = evaluate(world, h)
            if not (isfinite(value) and value >= 0.0):
                raise InvalidParameterError(f"non-finite ratio for {h!r} at {x!r}")
            series[h].append(value)
    return SweepSeries(spec, spec.grid, {h: tuple(v) for h, v in series.items()})


def find_crossing(series: SweepSeries, a: HospitalId, b: HospitalId) -> float | None:
    """Parameter value where the two hospitals' ratios meet, or None.

    Scans the grid for a sign change of the difference and refines it by
    bisection on the underlying model until the gap is at most
    ``CROSSING_TOL``.
    """
    diff = [va - vb for va, vb in zip(series.hospital(a), series.hospital(b))]
    spec = series.spec

    def gap(x: float) -> float:
        world = build_scenario(spec, x)
        return evaluate(world, a) - evaluate(world, b)

    for i in range(len(diff) - 1):
        lo_d, hi_d = diff[i], diff[i + 1]
        if lo_d == 0.0 and (i == 0 or diff[i - 1] * hi_d < 0.0):
            return series.values[i]
        if lo_d * hi_d < 0.0:
            lo, hi = series.values[i], series.values[i + 1]
            g_lo = lo_d
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                g_mid = gap(mid)
                if abs(g_mid) <= CROSSING_TOL:
                    return mid
                if (g_lo < 0.0) == (g_mid < 0.0):
                    lo, g_lo = mid, g_mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    if diff and diff[-1] == 0.0 and len(diff) > 1 and diff[-2] != 0.0:
        return series.values[-1]
    return None


# ---------------------------------------------------------------------------
# qualitative claims
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaimResult:
    name: str
    passed: bool
    detail: str


def _strictly(direction: str, values: tuple[float, ...]) -> bool:
    pairs = zip(values, values[1:])
    if direction == "increasing":
        return all(b > a for a, b in pairs)
    if direction == "decreasing":
        return all(b < a for a, b in pairs)
    return all(abs(b - a) <= core.EXACT_TOL for a, b in pairs)


def slope_sign_changes(values: tuple[float, ...]) -> int:
    """Number of sign alternations of the discrete slope (zeros skipped)."""
    signs = [1 if b > a else -1 for a, b in zip(values, values[1:]) if b != a]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def check_claims(spec: ScenarioSpec) -> list[ClaimResult]:
    """Verify the scenario's qualitative series claims on its default grid."""
    checks: list[ClaimResult] = []

    def claim(name: str, passed: bool, detail: str = "") -> None:
        checks.append(ClaimResult(name, bool(passed), detail))

    series = run_sweep(spec)
    name = spec.name

    if name == "casemix-ext":
        claim("h1-strictly-increasing", _strictly("increasing", series.hospital("H1")))
        claim("h2-strictly-decreasing", _strictly("decreasing", series.hospital("H2")))
        claim("no-crossing", find_crossing(series, "H1", "H2") is None)
    elif name == "scale-ext":
        h1 = series.hospital("H1")
        claim("series-constant", all(abs(v - h1[0]) <= core.EXACT_TOL for v in h1),
              f"ratio stays {h1[0]!r}")
    elif name == "actual-ext":
        at_standard = build_scenario(spec, 0.1)
        v1 = evaluate(at_standard, "H1")
        v2 = evaluate(at_standard, "H2")
        claim("equal-ratios-at-standard",
              abs(v1 - 1.0) <= core.EXACT_TOL and abs(v2 - 1.0) <= core.EXACT_TOL,
              f"H1={v1!r} H2={v2!r} at p11=0.1")
        ordered = True
        for x, va, vb in zip(series.values, series.hospital("H1"), series.hospital("H2")):
            d = va - vb
            if abs(d) <= core.EXACT_TOL:
                continue
            if (d > 0.0) != (x > 0.1):
                ordered = False
                break
        claim("ranking-flips-at-standard", ordered)
    elif name == "expected-ext":
        x = find_crossing(series, "H1", "H2")
        claim("crossing-at-0.14", x is not None and abs(x - 0.14) <= 1e-6,
              f"crossing at {x!r}")
    elif name == "casemix-int":
        h1 = series.hospital("H1")
        changes = slope_sign_changes(h1)
        rises_then_falls = h1[1] > h1[0] and h1[-1] < max(h1)
        claim("h1-single-interior-maximum", changes == 1 and rises_then_falls,
              f"{changes} slope sign change(s)")
        claim("h2-strictly-decreasing", _strictly("decreasing", series.hospital("H2")))
    elif name == "scale-int":
        x = find_crossing(series, "H1", "H3")
        claim("h1-h3-crossing-between-2-and-3", x is not None and 2.0 < x < 3.0,
              f"crossing at {x!r}")
        far = evaluate(build_scenario(spec, 1e6), "H1")
        claim("h1-approaches-unity", abs(far - 1.0) < 1e-3, f"ratio {far!r} at lambda=1e6")
        lams = [float(2 ** k) for k in range(20)] + [1e6]
        lams.sort()
        gaps = [abs(evaluate(build_scenario(spec, lam), "H1") - 1.0) for lam in lams]
        claim("h1-monotone-approach",
              all(b <= a for a, b in zip(gaps, gaps[1:])),
              "gap to 1 non-increasing on a geometric grid")
    elif name == "actual-int":
        w11 = float(spec.overrides.get("w11", 0.8))
        window = [i for i, x in enumerate(series.values) if 0.4 - 1e-9 <= x <= 1.0 + 1e-9]
        h1 = tuple(series.hospital("H1")[i] for i in window)
        if abs(w11 - 0.6) <= 1e-9:
            claim("h1-strictly-increasing", _strictly("increasing", series.hospital("H1")))
        elif w11 >= 0.8 - 1e-9:
            claim("h1-strictly-decreasing-on-[0.4,1]", _strictly("decreasing", h1))
        h3 = series.hospital("H3")
        claim("h3-unaffected", _strictly("constant", h3))
        if w11 < 1.0 - 1e-9:
            claim("h2-strictly-decreasing", _strictly("decreasing", series.hospital("H2")))
        else:
            claim("h2-unaffected", _strictly("constant", series.hospital("H2")))
    return checks
