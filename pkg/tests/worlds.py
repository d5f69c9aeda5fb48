"""Seeded random configurations shared across test modules.

Bounds keep every denominator comfortably away from zero: counts are
log-uniform in [1, 1000], rates uniform in [0.01, 0.5], standard rates
uniform in [0.05, 0.5]. Occasional zero-count cells (with and without a
rate) exercise the empty-stratum conventions.
"""

from __future__ import annotations

from random import Random

from smr_axioms import Cohort, ExternalStandard, StratumTable


def random_table(rng: Random, hospital: str, strata: list[str], allow_empty: bool = True) -> StratumTable:
    cells: dict[str, tuple] = {}
    for sid in strata:
        if allow_empty and rng.random() < 0.15:
            rate = rng.uniform(0.01, 0.5) if rng.random() < 0.5 else None
            cells[sid] = (0.0, rate)
        else:
            cells[sid] = (10.0 ** rng.uniform(0.0, 3.0), rng.uniform(0.01, 0.5))
    if all(c[0] == 0.0 for c in cells.values()):
        cells[strata[0]] = (10.0 ** rng.uniform(0.0, 3.0), rng.uniform(0.01, 0.5))
    return StratumTable.build(hospital, cells)


def random_cohort(
    rng: Random,
    hospitals: int | None = None,
    strata_count: int | None = None,
    allow_empty: bool = True,
) -> tuple[Cohort, list[str]]:
    s = strata_count or rng.randint(2, 5)
    h = hospitals or rng.randint(2, 4)
    strata = [f"S{i}" for i in range(1, s + 1)]
    cohort = Cohort(tuple(random_table(rng, f"H{j}", strata, allow_empty) for j in range(1, h + 1)))
    return cohort, strata


def random_standard(rng: Random, strata: list[str]) -> ExternalStandard:
    return ExternalStandard({sid: rng.uniform(0.05, 0.5) for sid in strata})


def populated_strata(table: StratumTable) -> list[str]:
    return [sid for sid in table.strata if table.count(sid) > 0.0]
