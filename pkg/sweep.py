"""
Parameter sweeps and Monte-Carlo validation of the convergence theorem
"""
import asyncio
import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from analysis import Prediction, behavior_report, prime_period_two
from dynamics import LimitKind, settle
from errors import ParameterError, RatdynError
from params import NormParams

logger = logging.getLogger(__name__)

CSV_HEADER = ("cell", "p", "q", "r", "branch_key", "prediction",
              "n_equilibrium", "n_period_two", "n_undetermined", "m", "M", "error")


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    steps: int = 1

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)

    def to_dict(self) -> Dict:
        return {'min': self.lo, 'max': self.hi, 'steps': self.steps}


@dataclass(frozen=True)
class SweepConfig:
    """
    Grid or random sampling of (p, q, r) with a fixed number of orbits per cell.

    Orbit j of cell i starts from a draw of Philox keyed by (seed, i, j), so the
    output does not depend on how cells are spread over workers.
    """
    p: Range
    q: Range
    r: Range
    orbits: int = 20
    seed: int = 0
    step_cap: int = field(default_factory=lambda: config.STEP_CAP)
    tol: float = field(default_factory=lambda: config.TOL)
    window: int = field(default_factory=lambda: config.WINDOW)

    def validate(self):
        """
        Raises:
            ParameterError: empty ranges, nonpositive p or q, negative r, or no orbits
        """
        for name, rng in (("p", self.p), ("q", self.q), ("r", self.r)):
            if rng.steps < 1:
                raise ParameterError(f"{name} range needs at least one step, got {rng.steps}")
            if rng.lo > rng.hi:
                raise ParameterError(f"{name} range is empty: [{rng.lo}, {rng.hi}]")
        if self.p.lo <= 0 or self.q.lo <= 0:
            raise ParameterError("p and q ranges must be positive")
        if self.r.lo < 0:
            raise ParameterError("r range must be nonnegative")
        if self.orbits < 1 or self.step_cap < 1:
            raise ParameterError("orbits and step cap must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def grid(self) -> List[Tuple[float, float, float]]:
        return [(float(p), float(q), float(r))
                for p in self.p.values() for q in self.q.values() for r in self.r.values()]

    def random_cells(self, n: int) -> List[Tuple[float, float, float]]:
        """p and q log-uniform, r uniform, cell i drawn from Philox keyed by (seed, i)"""
        cells = []
        for i in range(n):
            gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, i])))
            p = math.exp(gen.uniform(math.log(self.p.lo), math.log(self.p.hi)))
            q = math.exp(gen.uniform(math.log(self.q.lo), math.log(self.q.hi)))
            r = gen.uniform(self.r.lo, self.r.hi)
            cells.append((p, q, r))
        return cells

    def to_dict(self) -> Dict:
        return {
            'p': self.p.to_dict(), 'q': self.q.to_dict(), 'r': self.r.to_dict(),
            'orbits': self.orbits, 'seed': self.seed, 'step_cap': self.step_cap,
            'tol': self.tol, 'window': self.window,
        }


def initial_conditions(seed: int, cell: int, orbit: int) -> Tuple[float, float]:
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, cell, orbit])))
    x_minus1, x_0 = 10.0 ** gen.uniform(-2.0, 2.0, size=2)
    return float(x_minus1), float(x_0)


def run_cell(index: int, p: float, q: float, r: float, cfg: SweepConfig) -> Dict:
    """
    Predict and observe one parameter cell.

    Returns a plain dict so it travels back from worker processes; failures are
    recorded under 'error' instead of raised.
    """
    result = {
        'cell': index, 'p': p, 'q': q, 'r': r,
        'branch_key': None, 'prediction': None,
        'n_equilibrium': 0, 'n_period_two': 0, 'n_undetermined': 0,
        'm': None, 'M': None, 'worst_residual': 0.0,
        'anomalies': [], 'error': None,
    }
    try:
        norm = NormParams.three_two(p, q, r)
        report = behavior_report(norm)
        result['branch_key'] = report.branch_key
        result['prediction'] = report.prediction.value
        cycle = prime_period_two(p, q, r)

        for j in range(cfg.orbits):
            x_minus1, x_0 = initial_conditions(cfg.seed, index, j)
            limit, steps = settle(norm, x_minus1, x_0, cfg.step_cap, cfg.tol, cfg.window)
            if limit.kind == LimitKind.EQUILIBRIUM:
                result['n_equilibrium'] += 1
            elif limit.kind == LimitKind.PERIOD_TWO:
                result['n_period_two'] += 1
                result['m'], result['M'] = limit.lo, limit.hi
            else:
                result['n_undetermined'] += 1
                continue
            result['worst_residual'] = max(result['worst_residual'], limit.residual)

            if limit.kind == LimitKind.PERIOD_TWO:
                if report.prediction == Prediction.ALL_CONVERGE:
                    result['anomalies'].append({'orbit': j, 'reason': "two-cycle observed where convergence is predicted",
                                                'x_init': [x_minus1, x_0]})
                elif cycle is None:
                    result['anomalies'].append({'orbit': j, 'reason': "two-cycle observed but none exists",
                                                'x_init': [x_minus1, x_0]})
    except RatdynError as e:
        logger.error(f"❌ cell {index} (p={p}, q={q}, r={r}) failed: {e}")
        result['error'] = str(e)
    return result


async def _gather_cells(cells: List[Tuple[float, float, float]], cfg: SweepConfig, threads: int) -> List[Dict]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        tasks = [loop.run_in_executor(pool, run_cell, i, p, q, r, cfg) for i, (p, q, r) in enumerate(cells)]
        return list(await asyncio.gather(*tasks))


def run_cells(cells: List[Tuple[float, float, float]], cfg: SweepConfig, threads: int = None) -> List[Dict]:
    """Results in cell order whatever the worker count"""
    threads = config.THREADS if threads is None else threads
    logger.info(f"Running {len(cells)} cells x {cfg.orbits} orbits on {threads} worker(s)")
    if threads <= 1 or len(cells) <= 1:
        return [run_cell(i, p, q, r, cfg) for i, (p, q, r) in enumerate(cells)]
    return asyncio.run(_gather_cells(cells, cfg, threads))


def run_sweep(cfg: SweepConfig, threads: int = None) -> List[Dict]:
    cfg.validate()
    return run_cells(cfg.grid(), cfg, threads)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(rows: List[Dict], stream: io.TextIOBase = None) -> str:
    """Rows as CSV with 17 significant digits; returns the text and writes it to stream if given"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row[column]) for column in CSV_HEADER])
    text = buffer.getvalue()
    if stream is not None:
        stream.write(text)
    return text


@dataclass
class TheoremValidationReport:
    n_instances: int = 0
    n_equilibrium: int = 0
    n_period_two: int = 0
    n_undetermined: int = 0
    worst_residual: float = 0.0
    branches: Dict[str, Dict[str, int]] = field(default_factory=dict)
    anomalies: List[Dict] = field(default_factory=list)
    errors: List[Dict] = field(default_factory=list)
    config: Optional[Dict] = None

    @property
    def success(self) -> bool:
        return not self.anomalies and not self.errors

    def to_dict(self) -> Dict:
        return {
            'success': self.success,
            'n_instances': self.n_instances,
            'n_equilibrium': self.n_equilibrium,
            'n_period_two': self.n_period_two,
            'n_undetermined': self.n_undetermined,
            'worst_residual': self.worst_residual,
            'branches': {key: dict(self.branches[key]) for key in sorted(self.branches)},
            'anomalies': self.anomalies,
            'errors': self.errors,
            'config': self.config,
        }


def tally(rows: List[Dict], cfg: SweepConfig = None) -> TheoremValidationReport:
    report = TheoremValidationReport(config=cfg.to_dict() if cfg else None)
    for row in rows:
        if row['error']:
            report.errors.append({'cell': row['cell'], 'p': row['p'], 'q': row['q'], 'r': row['r'],
                                  'error': row['error']})
            continue
        counts = report.branches.setdefault(row['branch_key'], {
            'n_instances': 0, 'n_equilibrium': 0, 'n_period_two': 0, 'n_undetermined': 0,
        })
        for key in ('n_equilibrium', 'n_period_two', 'n_undetermined'):
            counts[key] += row[key]
            setattr(report, key, getattr(report, key) + row[key])
        n = row['n_equilibrium'] + row['n_period_two'] + row['n_undetermined']
        counts['n_instances'] += n
        report.n_instances += n
        report.worst_residual = max(report.worst_residual, row['worst_residual'])
        for anomaly in row['anomalies']:
            report.anomalies.append({'cell': row['cell'], 'p': row['p'], 'q': row['q'], 'r': row['r'],
                                     'branch_key': row['branch_key'], **anomaly})
    return report


def validate_theorem(cfg: SweepConfig, cells: int = 200, threads: int = None) -> TheoremValidationReport:
    """
    Sample random cells, observe every orbit and cross-check against the
    behavior report. A two-cycle where convergence is predicted is an anomaly.
    """
    cfg.validate()
    rows = run_cells(cfg.random_cells(cells), cfg, threads)
    report = tally(rows, cfg)
    if report.success:
        logger.info(f"✅ {report.n_instances} orbits: {report.n_equilibrium} equilibrium, "
                    f"{report.n_period_two} period-two, {report.n_undetermined} undetermined")
    else:
        logger.warning(f"❌ {len(report.anomalies)} anomalies, {len(report.errors)} failed cells")
    return report
