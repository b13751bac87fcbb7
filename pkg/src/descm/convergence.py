"""N-refinement, error estimates, exact references and randomized studies."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .confmap import ConformalMap, select_map
from .discretize import build_system
from .eigensolve import Spectrum, generalized_eigs
from .potential import MIN_IMAG_PART, RationalPotential, check, random_potential

log = logging.getLogger(__name__)

# relative size of eps_n(N) treated as round-off; such levels count as converged
MACHINE_FLOOR = 1e-14
CSV_COLUMNS = ("potential_id", "N", "h", "level", "energy", "eps")


@dataclass(frozen=True)
class ConvergenceRecord:
    N: int
    h: float
    eigenvalues: tuple
    eps: Optional[tuple]
    map_kind: str


@dataclass
class ConvergenceRun:
    """Outcome of :func:`converge`."""

    spectrum: Spectrum
    records: list
    cmap: ConformalMap
    converged: bool
    n_to_tol: list
    tol: float
    levels: int

    def __iter__(self):
        # allows ``spectrum, records = converge(...)``
        return iter((self.spectrum, self.records))


def error_estimate(prev: Spectrum, curr: Spectrum, levels: int) -> list:
    """``eps_n = |E_n(N) - E_n(N-1)|`` for the lowest ``levels`` eigenvalues."""
    if levels > len(prev) or levels > len(curr):
        raise ValueError(f"need {levels} levels, spectra have {len(prev)} and {len(curr)}")
    return [abs(curr[n] - prev[n]) for n in range(levels)]


def _floor(value, dps) -> float:
    scale = max(1.0, abs(float(value)))
    if dps is None:
        return MACHINE_FLOOR * scale
    return 10.0 ** (2 - dps) * scale


def converge(potential: RationalPotential, map_strategy: str = "auto", tol: float = 1e-10,
             N_max: int = 200, levels: int = 4, dps: int | None = None,
             cmap: ConformalMap | None = None, N_min: int = 1) -> ConvergenceRun:
    """Increase ``N`` by one until every requested level has ``eps_n(N) <= tol``.

    A level also counts as converged once ``eps_n(N)`` drops below the
    round-off floor ``1e-14 * max(1, |E_n|)``. Iteration starts at the
    smallest ``N >= N_min`` giving at least ``levels`` eigenvalues; the first
    record has no error estimate.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    check(potential)
    if cmap is None:
        cmap = select_map(potential, map_strategy)
    N = max(N_min, 1, math.ceil((levels - 1) / 2))
    if N > N_max:
        raise ValueError(f"N_max={N_max} too small for {levels} levels")

    records: list[ConvergenceRecord] = []
    n_to_tol: list[Optional[int]] = [None] * levels
    prev = None
    spectrum = None
    converged = False
    while N <= N_max:
        spectrum = generalized_eigs(build_system(potential, cmap, N, dps=dps), levels)
        eps = None
        if prev is not None:
            eps = error_estimate(prev, spectrum, levels)
            for n, e in enumerate(eps):
                if n_to_tol[n] is None and (e <= tol or e <= _floor(spectrum[n], dps)):
                    n_to_tol[n] = N
        records.append(ConvergenceRecord(N, spectrum.h, spectrum.eigenvalues,
                                         None if eps is None else tuple(eps), cmap.kind))
        if eps is not None:
            done = all(e <= tol or e <= _floor(v, dps) for e, v in zip(eps, spectrum.eigenvalues))
            if done:
                converged = True
                break
        prev = spectrum
        N += 1
    log.debug("converge: kind=%s N=%d converged=%s", cmap.kind, spectrum.N, converged)
    return ConvergenceRun(spectrum, records, cmap, converged, n_to_tol, tol, levels)


def exact_reference(case_id: int, g: float = 1.0):
    """``(potential, level, exact energy)`` for ``V = x^2 + lambda(g) x^2 / (1 + g x^2)``.

    Four couplings for which one level is known in closed form.
    """
    if not g > 0:
        raise ValueError("g must be positive")
    if case_id == 1:
        lam, level, base = -2 * g * (2 + g), 0, 5
    elif case_id == 2:
        lam, level, base = -2 * g * (2 + 3 * g), 1, 7
    elif case_id == 3:
        lam, level, base = -g * (7 * g + 6 - math.sqrt(25 * g * g - 12 * g + 4)), 2, 9
    elif case_id == 4:
        lam, level, base = -g * (13 * g + 6 - math.sqrt(49 * g * g - 4 * g + 4)), 3, 11
    else:
        raise ValueError(f"unknown exact case {case_id}; expected 1..4")
    pot = RationalPotential.from_roots(1.0, 1, [0.0, 0.0, lam], [1j / math.sqrt(g)])
    return pot, level, base + lam / g


def exact_energy_mp(case_id: int, g=1):
    """Closed-form energy at the current mpmath precision (``g`` exact)."""
    import mpmath

    g = mpmath.mpf(g)
    if case_id == 1:
        return 5 + (-2 * g * (2 + g)) / g
    if case_id == 2:
        return 7 + (-2 * g * (2 + 3 * g)) / g
    if case_id == 3:
        return 9 - (7 * g + 6 - mpmath.sqrt(25 * g * g - 12 * g + 4))
    if case_id == 4:
        return 11 - (13 * g + 6 - mpmath.sqrt(49 * g * g - 4 * g + 4))
    raise ValueError(f"unknown exact case {case_id}")


@dataclass
class StudyEntry:
    potential_id: int
    potential: dict
    map: dict
    n_to_tol: list
    final_N: int
    final_eigenvalues: list
    converged: bool
    records: list = field(repr=False, default_factory=list)


@dataclass
class StudyReport:
    seed: int
    m: int
    l: int
    count: int
    tol: float
    N_max: int
    levels: int
    entries: list
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        for e in out["entries"]:
            e.pop("records")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_rows(self):
        for e in self.entries:
            yield from record_rows(e.records, e.potential_id)

    def non_converged(self, level: int = 0) -> list:
        return [e for e in self.entries if e.n_to_tol[level] is None]


def potential_seeds(seed: int, count: int) -> list:
    """Independent child seeds; entry ``i`` does not depend on ``count``."""
    return np.random.SeedSequence(seed).spawn(count)


def _study_one(args) -> StudyEntry:
    idx, child, m, l, tol, N_max, levels = args
    pot = random_potential(m, l, child)
    run = converge(pot, "auto", tol=tol, N_max=N_max, levels=levels)
    return StudyEntry(
        potential_id=idx,
        potential=pot.to_dict(),
        map=run.cmap.report(),
        n_to_tol=run.n_to_tol,
        final_N=run.spectrum.N,
        final_eigenvalues=[float(v) for v in run.spectrum.eigenvalues],
        converged=run.converged,
        records=run.records,
    )


def random_study(m: int, l: int, count: int, seed: int, tol: float = 1e-10,
                 N_max: int = 200, levels: int = 4, jobs: int = 1) -> StudyReport:
    """Run :func:`converge` on ``count`` random potentials.

    Potential ``i`` is drawn from the ``i``-th child of
    ``numpy.random.SeedSequence(seed)``, so entries do not depend on ``jobs``
    or completion order.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    tasks = [(i, child, m, l, tol, N_max, levels)
             for i, child in enumerate(potential_seeds(seed, count))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_study_one, tasks))
    else:
        entries = [_study_one(t) for t in tasks]
    meta = {
        "generator": "numpy PCG64, per-potential SeedSequence(seed).spawn(count)",
        "imag_part_resampled_below": MIN_IMAG_PART,
        "stopping_rule": "all requested levels eps_n(N) <= tol (or below round-off floor)",
    }
    return StudyReport(seed, m, l, count, tol, N_max, levels, entries, meta)


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def record_rows(records: Sequence[ConvergenceRecord], potential_id: int = 0):
    for rec in records:
        for n, energy in enumerate(rec.eigenvalues):
            eps = None if rec.eps is None else rec.eps[n]
            yield (potential_id, rec.N, _fmt(rec.h), n, _fmt(energy), _fmt(eps))


def write_csv(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row)


def csv_text(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def run_to_dict(run: ConvergenceRun, potential: RationalPotential) -> dict:
    return {
        "potential": potential.to_dict(),
        "map": run.cmap.report(),
        "tol": run.tol,
        "levels": run.levels,
        "converged": run.converged,
        "n_to_tol": run.n_to_tol,
        "final_N": run.spectrum.N,
        "h": float(run.spectrum.h),
        "eigenvalues": [float(v) for v in run.spectrum.eigenvalues],
        "records": [
            {"N": r.N, "h": float(r.h), "eigenvalues": [float(v) for v in r.eigenvalues],
             "eps": None if r.eps is None else [float(v) for v in r.eps]}
            for r in run.records
        ],
    }


def absolute_errors(run: ConvergenceRun, level: int, exact) -> list:
    """``(N, |E_level(N) - exact|)`` along a run."""
    return [(r.N, abs(r.eigenvalues[level] - exact)) for r in run.records]

