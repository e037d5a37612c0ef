"""Parameter sweeps and the searches built on them."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from . import oracle
from .errors import ConvergenceError, DomainError, SearchError
from .kernel import DEFAULT_POLICY, TruncationPolicy
from .phase import delta_phi_closed, phase_difference
from .units import ReducedSetup, Scenario

#: Smallest measured phase difference used as the detectability threshold (rad).
DETECTABILITY_FLOOR = 5.27e-6

_AXES = {
    "alpha": "alpha", "invalpha": "invAlpha", "inv_alpha": "invAlpha", "inv-alpha": "invAlpha",
    "zeta": "zeta", "lam": "lam", "lambda": "lam",
}


def parse_axis(name: str) -> str:
    try:
        return _AXES[name.lower()]
    except KeyError:
        raise DomainError(f"unknown sweep axis {name!r}; expected alpha, invAlpha, zeta or lam") from None


def make_grid(start: float, stop: float, points: int, log: bool = False) -> np.ndarray:
    """Evenly spaced grid, linear or logarithmic, including both ends."""
    if points < 1:
        raise DomainError("points must be >= 1")
    if log:
        if not (start > 0 and stop > 0):
            raise DomainError("log grid needs positive end points")
        return np.geomspace(start, stop, points)
    return np.linspace(start, stop, points)


def _point_setup(base: ReducedSetup, axis: str, value: float) -> ReducedSetup:
    if axis == "alpha":
        return base.with_(alpha=value)
    if axis == "invAlpha":
        if not value > 0:
            raise DomainError("invAlpha must be > 0")
        return base.with_(alpha=1.0 / value)
    if axis == "zeta":
        return base.with_(zeta=value)
    return base.with_(lam=value)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: np.ndarray
    base: ReducedSetup
    policy: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        object.__setattr__(self, "axis", parse_axis(self.axis))
        g = np.array(self.grid, dtype=float).ravel()
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)
        if g.size == 0:
            raise DomainError("sweep grid is empty")
        if not np.all(np.isfinite(g)):
            raise DomainError("sweep grid contains non-finite values")
        if g.size > 1:
            d = np.diff(g)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise DomainError("sweep grid must be strictly monotone")
        if self.axis == "lam" and self.base.scenario is not Scenario.DOUBLE:
            raise DomainError("lam axis needs the double-mirror scenario")
        if self.axis == "zeta" and self.base.scenario is Scenario.FREE:
            raise DomainError("zeta axis has no effect in free space")
        # validating the end points suffices because the grid is monotone
        for v in (g[0], g[-1]):
            _point_setup(self.base, self.axis, float(v))

    @property
    def vectorisable(self) -> bool:
        return self.base.scenario is not Scenario.DOUBLE

    def setup_at(self, i: int) -> ReducedSetup:
        return _point_setup(self.base, self.axis, float(self.grid[i]))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    delta_phi: float
    delta_phi_abs: float
    A: float
    B: float
    A0: float
    B0: float
    n_used: int
    tail_est: float
    converged: bool


@dataclass(frozen=True)
class SweepTable:
    """Column-oriented sweep result; ``rows`` gives the row view in grid order."""

    spec: SweepSpec
    delta_phi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    A0: np.ndarray
    B0: np.ndarray
    n_used: np.ndarray
    tail_est: np.ndarray
    converged: np.ndarray
    errors: Dict[int, str] = field(default_factory=dict)

    @property
    def axis_values(self) -> np.ndarray:
        return self.spec.grid

    @property
    def delta_phi_abs(self) -> np.ndarray:
        return np.abs(self.delta_phi)

    @property
    def failures(self) -> int:
        return int(np.count_nonzero(~self.converged))

    def __len__(self) -> int:
        return int(self.spec.grid.size)

    def row(self, i: int) -> SweepRow:
        return SweepRow(float(self.spec.grid[i]), float(self.delta_phi[i]), float(abs(self.delta_phi[i])),
                        float(self.A[i]), float(self.B[i]), float(self.A0[i]), float(self.B0[i]),
                        int(self.n_used[i]), float(self.tail_est[i]), bool(self.converged[i]))

    @property
    def rows(self) -> List[SweepRow]:
        return [self.row(i) for i in range(len(self))]


def _closed_columns(spec: SweepSpec, values: np.ndarray):
    base = spec.base
    alpha = np.full(values.shape, base.alpha, dtype=float)
    zeta = None if base.zeta is None else np.full(values.shape, base.zeta, dtype=float)
    if spec.axis == "alpha":
        alpha = values
    elif spec.axis == "invAlpha":
        alpha = 1.0 / values
    elif spec.axis == "zeta":
        zeta = values
    return delta_phi_closed(base.scenario, alpha, zeta, base.theta, base.kappa)


def _evaluate(setup: ReducedSetup, policy: TruncationPolicy):
    try:
        r = phase_difference(setup, policy)
    except ConvergenceError as exc:
        return None, str(exc)
    c = r.rates
    d = c.diagnostics
    return (r.delta_phi, c.A, c.B, c.A0, c.B0, d.n_used, d.tail_estimate, d.converged), None


def sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Evaluate the phase difference over the grid.

    Points whose image sum fails to converge are kept as rows with
    ``converged=False`` and NaN values. Results do not depend on ``workers``.
    """
    n = len(spec.grid)
    if spec.vectorisable:
        cols = _closed_columns(spec, spec.grid)
        z = np.zeros(n)
        return SweepTable(spec, *(np.array(cols[k], dtype=float) for k in ("delta_phi", "A", "B", "A0", "B0")),
                          n_used=np.zeros(n, dtype=np.int64), tail_est=z, converged=np.ones(n, dtype=bool))
    setups = [spec.setup_at(i) for i in range(n)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _evaluate(s, spec.policy), setups))
    else:
        results = [_evaluate(s, spec.policy) for s in setups]
    data = np.full((n, 7), np.nan)
    errors = {}
    ok = np.ones(n, dtype=bool)
    for i, (vals, err) in enumerate(results):
        if vals is None:
            errors[i] = err
            ok[i] = False
            continue
        data[i] = vals[:7]
        ok[i] = vals[7]
    nused = np.where(np.isnan(data[:, 5]), -1, data[:, 5]).astype(np.int64)
    return SweepTable(spec, data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4],
                      n_used=nused, tail_est=data[:, 6], converged=ok, errors=errors)


def _abs_phase_at(spec: SweepSpec, x: float) -> float:
    s = _point_setup(spec.base, spec.axis, x)
    if spec.vectorisable:
        return float(abs(_closed_columns(spec, np.array([x]))["delta_phi"][0]))
    return abs(phase_difference(s, spec.policy).delta_phi)


def _refine(f, lo: float, hi: float, x_grid: float, v_grid: float) -> Tuple[float, float]:
    if not hi > lo:
        return x_grid, v_grid
    tol = 1e-10 * max(abs(lo), abs(hi), 1.0)
    res = optimize.minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    x, v = float(res.x), float(-res.fun)
    if v > v_grid and lo <= x <= hi:
        return x, v
    return x_grid, v_grid


def find_peak(table: SweepTable) -> Tuple[float, float]:
    """Location and value of the largest ``|delta_phi|``.

    The grid maximum is refined by a bounded golden-section/Brent search
    between its two neighbours. The refined point never leaves that cell
    and is discarded unless it improves on the grid value.
    """
    vals = table.delta_phi_abs
    if not np.any(np.isfinite(vals)):
        raise SearchError("no usable rows in sweep table")
    i = int(np.nanargmax(vals))
    g = table.axis_values
    x0, v0 = float(g[i]), float(vals[i])
    if len(g) < 3:
        return x0, v0
    a, b = float(g[max(i - 1, 0)]), float(g[min(i + 1, len(g) - 1)])
    lo, hi = min(a, b), max(a, b)

    def f(x):
        try:
            return _abs_phase_at(table.spec, x)
        except (ConvergenceError, DomainError):
            return -math.inf

    return _refine(f, lo, hi, x0, v0)


# ---------------------------------------------------------------------------
# feasibility search


@dataclass(frozen=True)
class SearchResult:
    feasible: bool
    alpha_star: Optional[float]
    zeta_star: Optional[float]
    lam_star: Optional[float]
    achieved: float
    evaluations: int
    bracket: Tuple[float, float]
    diagnostics: str = ""


@dataclass(frozen=True)
class InnerMax:
    value: float
    zeta: Optional[float]
    lam: Optional[float]
    evaluations: int
    failures: int = 0


def max_over_geometry(scenario, alpha: float, zeta_bounds: Optional[Tuple[float, float]] = None,
                      lam: Optional[float] = None, theta: float = math.pi / 4, kappa: float = 1.0,
                      policy: TruncationPolicy = DEFAULT_POLICY, floor: Optional[float] = None,
                      zeta_step: float = math.pi / 16, max_points: int = 512) -> InnerMax:
    """Largest ``|delta_phi|`` over the detector position at fixed ``alpha``.

    The single mirror is scanned on a uniform grid of spacing ``zeta_step``
    (the phase oscillates with period about pi in zeta) and then refined.
    The double mirror uses at most ``max_points`` interior positions and
    stops at the first one reaching ``floor``.
    """
    scenario = Scenario.parse(scenario)
    base = ReducedSetup(alpha=alpha, scenario=Scenario.FREE, theta=theta, kappa=kappa)
    if scenario is Scenario.FREE:
        v = float(abs(delta_phi_closed(scenario, alpha, None, theta, kappa)["delta_phi"]))
        return InnerMax(v, None, None, 1)
    if scenario is Scenario.SINGLE:
        if zeta_bounds is None:
            raise DomainError("single-mirror search needs zeta bounds")
        lo, hi = float(zeta_bounds[0]), float(zeta_bounds[1])
        if not (hi > 0 and hi >= lo >= 0):
            raise DomainError("zeta bounds must satisfy 0 <= lo <= hi, hi > 0")
        npts = max(3, int(math.ceil((hi - lo) / zeta_step)) + 1)
        grid = np.linspace(lo, hi, npts)
        grid = grid[grid > 0]
        spec = SweepSpec("zeta", grid, base.with_(scenario=Scenario.SINGLE, zeta=float(grid[-1])))
        table = sweep(spec)
        z, v = find_peak(table)
        return InnerMax(v, z, None, len(grid) + 30)
    if lam is None:
        raise DomainError("double-mirror search needs lam")
    lo, hi = (0.0, lam) if zeta_bounds is None else (max(0.0, zeta_bounds[0]), min(lam, zeta_bounds[1]))
    npts = min(max_points, max(1, int(math.ceil((hi - lo) / zeta_step))))
    grid = np.linspace(lo, hi, npts + 2)[1:-1]
    best = InnerMax(-math.inf, None, lam, 0)
    evals = fails = 0
    for z in grid:
        evals += 1
        try:
            v = abs(phase_difference(base.with_(scenario=Scenario.DOUBLE, zeta=float(z), lam=lam), policy).delta_phi)
        except ConvergenceError:
            fails += 1
            continue
        if v > best.value:
            best = InnerMax(v, float(z), lam, 0)
        if floor is not None and v >= floor:
            break
    return InnerMax(best.value, best.zeta, lam, evals, fails)


def min_acceleration_search(scenario, floor: float = DETECTABILITY_FLOOR,
                            zeta_bounds: Optional[Tuple[float, float]] = None,
                            lam: Optional[float] = None, lam_bounds: Optional[Tuple[float, float]] = None,
                            alpha_bracket: Tuple[float, float] = (1e-10, 1e-2),
                            theta: float = math.pi / 4, kappa: float = 1.0,
                            policy: TruncationPolicy = DEFAULT_POLICY, tol_decades: float = 0.1,
                            lam_points: int = 8, **inner) -> SearchResult:
    """Smallest ``alpha`` whose best geometry still reaches ``|delta_phi| >= floor``.

    Bisection in ``log10(alpha)`` inside ``alpha_bracket``, assuming
    feasibility is monotone in ``alpha``. For the double mirror either a
    fixed ``lam`` or ``lam_bounds`` (scanned on a coarse log grid) is needed.
    """
    scenario = Scenario.parse(scenario)
    lo, hi = float(alpha_bracket[0]), float(alpha_bracket[1])
    if not (0 < lo < hi):
        raise DomainError("alpha bracket must satisfy 0 < lo < hi")
    if not floor > 0:
        raise DomainError("floor must be > 0")
    if not tol_decades > 0:
        raise DomainError("tol_decades must be > 0")
    if scenario is Scenario.DOUBLE and lam is None and lam_bounds is None:
        raise DomainError("double-mirror search needs lam or lam_bounds")
    if not math.isfinite(floor):
        return SearchResult(False, None, None, None, 0.0, 0, (lo, hi), "floor is not finite")

    lams = [lam]
    if scenario is Scenario.DOUBLE and lam is None:
        lams = list(np.geomspace(lam_bounds[0], lam_bounds[1], lam_points))
    evals = 0

    def probe(alpha):
        nonlocal evals
        best = InnerMax(-math.inf, None, None, 0)
        for lm in lams:
            r = max_over_geometry(scenario, alpha, zeta_bounds, lm, theta, kappa, policy, floor, **inner)
            evals += r.evaluations
            if r.value > best.value:
                best = r
            if best.value >= floor:
                break
        return best

    top = probe(hi)
    if not top.value >= floor:
        return SearchResult(False, None, top.zeta, top.lam, max(top.value, 0.0), evals, (lo, hi),
                            f"best |delta_phi| {top.value:.3e} at alpha={hi:g} is below floor {floor:g}")
    bottom = probe(lo)
    if bottom.value >= floor:
        return SearchResult(True, lo, bottom.zeta, bottom.lam, bottom.value, evals, (lo, hi),
                            "feasible at the lower end of the bracket")
    good = top
    while math.log10(hi / lo) > tol_decades:
        mid = math.sqrt(lo * hi)
        r = probe(mid)
        if r.value >= floor:
            hi, good = mid, r
        else:
            lo = mid
    return SearchResult(True, hi, good.zeta, good.lam, good.value, evals, (float(alpha_bracket[0]), float(alpha_bracket[1])))


# ---------------------------------------------------------------------------
# truncation study


@dataclass(frozen=True)
class ConvergenceReport:
    rows: Tuple[Tuple[int, float], ...]
    plateau_n: Optional[int]
    plateau_tol: float

    @property
    def max_n(self) -> List[int]:
        return [r[0] for r in self.rows]

    @property
    def delta_phi(self) -> List[float]:
        return [r[1] for r in self.rows]


def plateau_index(values: Sequence[float], tol: float) -> Optional[int]:
    """First index after which every successive relative change stays below ``tol``."""
    m = len(values)
    if m < 2:
        return None
    idx = None
    for j in range(m - 2, -1, -1):
        ref = abs(values[j + 1])
        change = abs(values[j + 1] - values[j]) / ref if ref > 0 else abs(values[j + 1] - values[j])
        if change < tol:
            idx = j
        else:
            break
    return idx


def convergence_study(setup: ReducedSetup, max_n_grid: Sequence[int], plateau_tol: float = 1e-3) -> ConvergenceReport:
    """Brute-force phase difference at each truncation and the resulting plateau."""
    grid = [int(n) for n in max_n_grid]
    if not grid:
        raise DomainError("max_n grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise DomainError("max_n grid must be positive and strictly increasing")
    rows = tuple((n, oracle.brute_force_phase(setup, n).delta_phi) for n in grid)
    i = plateau_index([r[1] for r in rows], plateau_tol)
    return ConvergenceReport(rows, None if i is None else grid[i], plateau_tol)
