"""Orbits, period detection, Lyapunov exponents and parameter sweeps.

Two engines live here. :func:`iterate_orbit` and :func:`lle` run a single
trajectory with plain scalar arithmetic (fast enough for 1e6 steps).
Classification and sweeps go through :func:`_run_batch`, which advances many
independent parameter points at once with numpy and carries a Benettin
tangent vector alongside each of them. The two agree to rounding, so chaotic
orbits from the two engines decorrelate after a few hundred steps.
"""
from __future__ import annotations

import cmath
import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import SQRT2, FieldState, MapParams, jacobian_batch, step_batch

# P1 or P4 above this marks an orbit as diverged
POWER_CAP = 1e12
QUASIPERIODIC_BAND = 0.005
PERIOD_TAIL = 256
PERIODS = (1, 2, 4, 8)


class DivergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class OrbitSpec:
    n_transient: int = 1500
    n_keep: int = 2000
    initial: FieldState = field(default_factory=FieldState)

    def __post_init__(self):
        if self.n_transient < 0:
            raise ValueError("n_transient must be >= 0")
        if self.n_keep < 1:
            raise ValueError("n_keep must be >= 1")

    @property
    def total(self) -> int:
        return self.n_transient + self.n_keep


@dataclass
class Orbit:
    """Steady-state part of a trajectory.

    ``e1``/``e4`` hold the recorded loop fields in iteration order. When
    ``diverged`` is set they stop just before the iterate that blew up.
    """

    e1: np.ndarray
    e4: np.ndarray
    diverged: bool = False
    params: MapParams | None = None

    @property
    def p1(self) -> np.ndarray:
        return self.e1.real**2 + self.e1.imag**2

    @property
    def p4(self) -> np.ndarray:
        return self.e4.real**2 + self.e4.imag**2

    @property
    def states(self) -> list[FieldState]:
        return [FieldState(complex(a), complex(b)) for a, b in zip(self.e1, self.e4)]

    def __len__(self) -> int:
        return len(self.e1)


class PeriodLabel(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P4 = "P4"
    P8 = "P8"
    QUASIPERIODIC = "quasiperiodic"
    CHAOTIC = "chaotic"
    DIVERGED = "diverged"

    @classmethod
    def for_period(cls, p: int) -> "PeriodLabel":
        return cls(f"P{p}")


@dataclass(frozen=True)
class PeriodClass:
    label: PeriodLabel
    lle: float = math.nan
    period: int | None = None
    # "long-period" when a stable orbit has no detected period <= 8
    note: str = ""


def _scalar_stepper(params: MapParams):
    """Specialised scalar step ``(e1, e4) -> (e1', e4')`` with constants hoisted."""
    g = params.gamma
    beta, eta, phl = params.beta, params.eta, params.phi_l
    loss, gain = math.exp(-g), math.exp(g)
    beta_lo, beta_hi = beta * loss, beta * gain
    a = 1j * math.exp(-g / 2) * params.e_in / SQRT2
    c = 1j * math.exp(g / 2) * params.e_in_prime / SQRT2
    b_fac, d_fac = loss / 2, gain / 2
    cexp = cmath.exp

    def advance(e1, e4):
        x = e1 + 1j * e4  # sqrt2 * E2
        y = 1j * e1 + e4  # sqrt2 * E3
        i1 = e1.real * e1.real + e1.imag * e1.imag
        i4 = e4.real * e4.real + e4.imag * e4.imag
        i2 = (x.real * x.real + x.imag * x.imag) / 2
        i3 = (y.real * y.real + y.imag * y.imag) / 2
        rot1 = cexp(1j * (beta / (1.0 + eta * i1) + phl))
        rot4 = cexp(1j * (beta / (1.0 + eta * i4) + phl))
        ph2 = beta_lo / (1.0 + eta * i2) + phl
        ph3 = beta_hi / (1.0 + eta * i3) + phl
        return (rot1 * (a + cexp(1j * ph2) * b_fac * x),
                rot4 * (c + cexp(1j * ph3) * d_fac * y))

    return advance


def iterate_orbit(params: MapParams, spec: OrbitSpec = OrbitSpec()) -> Orbit:
    """Run ``spec.n_transient`` discarded steps, then record ``spec.n_keep``."""
    advance = _scalar_stepper(params)
    e1, e4 = complex(spec.initial.e1), complex(spec.initial.e4)
    rec1, rec4 = [], []
    diverged = False
    n_tr = spec.n_transient
    for j in range(spec.total):
        e1, e4 = advance(e1, e4)
        p1 = e1.real * e1.real + e1.imag * e1.imag
        p4 = e4.real * e4.real + e4.imag * e4.imag
        if not (p1 <= POWER_CAP and p4 <= POWER_CAP):
            diverged = True
            break
        if j >= n_tr:
            rec1.append(e1)
            rec4.append(e4)
    return Orbit(np.array(rec1, dtype=complex), np.array(rec4, dtype=complex), diverged, params)


def detect_period(series, max_period: int = 8, rel_tol: float = 1e-5, abs_tol: float = 1e-9,
                  tail: int = PERIOD_TAIL) -> int | None:
    """Smallest power of two ``p <= max_period`` the tail of ``series`` repeats with.

    The last ``tail`` samples are compared against the samples ``p`` steps
    earlier; a shift passes if every difference is within
    ``abs_tol + rel_tol * max|x|``. Returns ``None`` if no shift passes.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < 4 * max_period:
        raise ValueError(f"series of length {len(x)} too short for max_period={max_period}")
    window = x[-(tail + max_period):]
    tol = abs_tol + rel_tol * np.max(np.abs(window))
    n = len(x)
    p = 1
    while p <= max_period:
        m = min(tail, n - p)
        if np.all(np.abs(x[n - m:] - x[n - m - p:n - p]) <= tol):
            return p
        p *= 2
    return None


def _detect_period_rows(tails, max_period=8, rel_tol=1e-5, abs_tol=1e-9):
    """Row-wise :func:`detect_period`; 0 where no period is found."""
    n = tails.shape[1]
    window = tails[:, -(PERIOD_TAIL + max_period):]
    tol = abs_tol + rel_tol * np.max(np.abs(window), axis=1)
    out = np.zeros(len(tails), dtype=int)
    p = 1
    while p <= max_period:
        m = min(PERIOD_TAIL, n - p)
        ok = np.all(np.abs(tails[:, n - m:] - tails[:, n - m - p:n - p]) <= tol[:, None], axis=1)
        out[(out == 0) & ok] = p
        p *= 2
    return out


@dataclass
class _BatchResult:
    p4_tail: np.ndarray  # (n, n_record); NaN after divergence
    lle: np.ndarray
    diverged: np.ndarray
    n_lle_steps: np.ndarray
    min_tangent_norm: float = math.inf
    max_tangent_norm: float = 0.0


def _run_batch(gamma, e_in, e_in_prime, base: MapParams, spec: OrbitSpec, n_record: int,
               with_lle: bool = True, h: float = 1e-6) -> _BatchResult:
    """Advance one orbit per entry of the (broadcast) parameter arrays.

    The tangent vector starts at ``(1, 1, 1, 1)/2``, is carried through the
    transient as well (renormalised, not accumulated) so it is already aligned
    when accumulation starts, and is renormalised after every step.
    """
    gamma, e_in, e_in_prime = np.broadcast_arrays(
        np.asarray(gamma, dtype=float), np.asarray(e_in, dtype=complex),
        np.asarray(e_in_prime, dtype=complex))
    gamma, e_in, e_in_prime = gamma.ravel(), e_in.ravel(), e_in_prime.ravel()
    n = len(gamma)
    args = (gamma, base.beta, base.eta, e_in, e_in_prime, base.phi_l)
    e1 = np.full(n, complex(spec.initial.e1))
    e4 = np.full(n, complex(spec.initial.e4))
    alive = np.ones(n, dtype=bool)
    n_record = min(n_record, spec.n_keep)
    rec = np.full((n, n_record), np.nan)
    rec_start = spec.total - n_record
    v = np.full((n, 4), 0.5)
    logsum = np.zeros(n)
    nacc = np.zeros(n, dtype=int)
    lo_norm, hi_norm = math.inf, 0.0
    for j in range(spec.total):
        if with_lle:
            jac = jacobian_batch(e1, e4, *args, h=h)
            v = np.einsum("nij,nj->ni", jac, v)
            norm = np.sqrt(np.einsum("ni,ni->n", v, v))
            norm = np.where(alive & np.isfinite(norm) & (norm > 0), norm, 1.0)
            v /= norm[:, None]
        new1, new4 = step_batch(e1, e4, *args)
        p1 = new1.real**2 + new1.imag**2
        p4 = new4.real**2 + new4.imag**2
        ok = alive & (p1 <= POWER_CAP) & (p4 <= POWER_CAP)
        if with_lle:
            if j >= spec.n_transient:
                logsum[ok] += np.log(norm[ok])
                nacc[ok] += 1
            if ok.any():
                kept = np.sqrt(np.einsum("ni,ni->n", v[ok], v[ok]))
                lo_norm = min(lo_norm, kept.min())
                hi_norm = max(hi_norm, kept.max())
        alive = ok
        e1 = np.where(alive, new1, 0j)
        e4 = np.where(alive, new4, 0j)
        if j >= rec_start:
            rec[:, j - rec_start] = np.where(alive, p4, np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        lle = np.where(nacc > 0, logsum / np.maximum(nacc, 1), np.nan)
    return _BatchResult(rec, lle, ~alive, nacc, lo_norm, hi_norm)


def lle(params: MapParams, spec: OrbitSpec = OrbitSpec(), h_jacobian: float = 1e-6) -> float:
    """Largest Lyapunov exponent per iteration (Benettin, one tangent vector).

    The tangent vector is pushed through the central-difference Jacobian of
    every step, transient included, and renormalised each time; only the
    steady-state log-growth is averaged. For a diverging orbit the average
    accumulated before truncation is returned together with a
    :class:`DivergenceWarning`; NaN if nothing was accumulated.
    """
    advance = _scalar_stepper(params)
    h = h_jacobian
    e1, e4 = complex(spec.initial.e1), complex(spec.initial.e4)
    v = [0.5, 0.5, 0.5, 0.5]
    logsum, nacc = 0.0, 0
    diverged = False
    shifts = ((h, 0), (1j * h, 0), (0, h), (0, 1j * h))
    for j in range(spec.total):
        # J @ v, column by column
        w = [0.0, 0.0, 0.0, 0.0]
        for (d1, d4), vc in zip(shifts, v):
            u1, u4 = advance(e1 + d1, e4 + d4)
            l1, l4 = advance(e1 - d1, e4 - d4)
            f1 = (u1 - l1) / (2 * h) * vc
            f4 = (u4 - l4) / (2 * h) * vc
            w[0] += f1.real
            w[1] += f1.imag
            w[2] += f4.real
            w[3] += f4.imag
        norm = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2 + w[3] ** 2)
        e1, e4 = advance(e1, e4)
        p1 = e1.real * e1.real + e1.imag * e1.imag
        p4 = e4.real * e4.real + e4.imag * e4.imag
        if not (p1 <= POWER_CAP and p4 <= POWER_CAP) or not 0 < norm < math.inf:
            diverged = True
            break
        if j >= spec.n_transient:
            logsum += math.log(norm)
            nacc += 1
        v = [x / norm for x in w]
    if diverged:
        warnings.warn(f"orbit diverged at gamma={params.gamma}; LLE averaged over {nacc} steps",
                      DivergenceWarning, stacklevel=2)
    return logsum / nacc if nacc else math.nan


def _labels_from_batch(res: _BatchResult) -> list[PeriodClass]:
    out = []
    periods = np.zeros(len(res.lle), dtype=int)
    ok = ~res.diverged
    if ok.any():
        periods[ok] = _detect_period_rows(res.p4_tail[ok])
    for k in range(len(res.lle)):
        lam = float(res.lle[k])
        if res.diverged[k]:
            out.append(PeriodClass(PeriodLabel.DIVERGED, lam))
        elif periods[k]:
            out.append(PeriodClass(PeriodLabel.for_period(int(periods[k])), lam, int(periods[k])))
        elif abs(lam) <= QUASIPERIODIC_BAND:
            out.append(PeriodClass(PeriodLabel.QUASIPERIODIC, lam))
        elif lam > QUASIPERIODIC_BAND:
            out.append(PeriodClass(PeriodLabel.CHAOTIC, lam))
        else:
            out.append(PeriodClass(PeriodLabel.CHAOTIC, lam, note="long-period"))
    return out


def _classify_cells(gamma, e_in, e_in_prime, base, spec):
    n_record = PERIOD_TAIL + max(PERIODS)
    if spec.n_keep < 4 * max(PERIODS):
        raise ValueError("n_keep too short for period detection")
    res = _run_batch(gamma, e_in, e_in_prime, base, spec, n_record)
    return _labels_from_batch(res)


def classify(params: MapParams, spec: OrbitSpec = OrbitSpec()) -> PeriodClass:
    """Label the steady state as P1/P2/P4/P8, quasiperiodic, chaotic or diverged."""
    return _classify_cells(params.gamma, params.e_in, params.e_in_prime, params, spec)[0]


def _grid(lo, hi, n):
    if not lo < hi:
        raise ValueError(f"empty or inverted range [{lo}, {hi}]")
    if n < 1:
        raise ValueError("grid needs at least one point")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo], dtype=float)


@dataclass
class BifurcationTable:
    gammas: np.ndarray
    p4: np.ndarray  # (n_gamma, n_points), NaN where the orbit diverged
    diverged: np.ndarray

    def rows(self):
        """Long-form ``(gamma, p4)`` rows; diverged columns yield ``(gamma, None)``."""
        for g, vals, bad in zip(self.gammas, self.p4, self.diverged):
            if bad:
                yield float(g), None
            else:
                for v in vals:
                    yield float(g), float(v)


def bifurcation_scan(params_base: MapParams, gamma_min: float, gamma_max: float, n_gamma: int,
                     spec: OrbitSpec = OrbitSpec(), n_points: int = 200) -> BifurcationTable:
    """Last ``n_points`` steady-state P4 values per gain/loss value.

    Every column restarts from ``spec.initial`` (no continuation).
    """
    if n_points > spec.n_keep:
        raise ValueError("n_points exceeds n_keep")
    gammas = _grid(gamma_min, gamma_max, n_gamma)
    res = _run_batch(gammas, params_base.e_in, params_base.e_in_prime, params_base, spec,
                     n_record=n_points, with_lle=False)
    return BifurcationTable(gammas, res.p4_tail, res.diverged)


def lle_scan(params_base: MapParams, gamma_min: float, gamma_max: float, n_gamma: int,
             spec: OrbitSpec = OrbitSpec(), h_jacobian: float = 1e-6):
    """``(gammas, lle, diverged)`` over a uniform gain/loss grid."""
    gammas = _grid(gamma_min, gamma_max, n_gamma)
    res = _run_batch(gammas, params_base.e_in, params_base.e_in_prime, params_base, spec,
                     n_record=1, h=h_jacobian)
    return gammas, res.lle, res.diverged


def count_clusters(values, rel_tol: float = 1e-5, abs_tol: float = 1e-9) -> int:
    """Number of groups after merging sorted neighbours closer than the tolerance."""
    x = np.sort(np.asarray(values, dtype=float))
    x = x[np.isfinite(x)]
    if len(x) == 0:
        return 0
    tol = abs_tol + rel_tol * np.max(np.abs(x))
    return int(1 + np.count_nonzero(np.diff(x) > tol))


@dataclass
class BasinGrid:
    """Period classes on a (gamma x drive amplitude) grid, indexed ``[i_gamma, i_e]``."""

    gammas: np.ndarray
    e_ins: np.ndarray
    cells: list[list[PeriodClass]]

    @property
    def labels(self) -> np.ndarray:
        return np.array([[c.label.value for c in row] for row in self.cells])

    @property
    def lle(self) -> np.ndarray:
        return np.array([[c.lle for c in row] for row in self.cells])

    def rows(self):
        for i, g in enumerate(self.gammas):
            for k, e in enumerate(self.e_ins):
                yield float(g), float(e), self.cells[i][k]


def _basin_chunk(payload):
    gamma, e_in, base, spec = payload
    return _classify_cells(gamma, e_in, e_in, base, spec)


def parameter_basin(gamma_range: tuple[float, float], e_in_range: tuple[float, float],
                    n_gamma: int, n_e: int, spec: OrbitSpec = OrbitSpec(),
                    params_base: MapParams = MapParams(), workers: int = 1) -> BasinGrid:
    """Classify every cell of a gamma x input-amplitude grid with ``E_in = E'_in``.

    ``workers > 1`` splits the flattened grid into contiguous chunks evaluated
    in separate processes; results are reassembled by grid index so the output
    does not depend on scheduling.
    """
    gammas = _grid(*gamma_range, n_gamma)
    e_ins = _grid(*e_in_range, n_e)
    gg, ee = np.meshgrid(gammas, e_ins, indexing="ij")
    flat_g, flat_e = gg.ravel(), ee.ravel()
    n_chunks = max(1, min(workers, len(flat_g)))
    bounds = np.linspace(0, len(flat_g), n_chunks + 1).astype(int)
    payloads = [(flat_g[a:b], flat_e[a:b].astype(complex), params_base, spec)
                for a, b in zip(bounds[:-1], bounds[1:])]
    if n_chunks == 1:
        parts = [_basin_chunk(payloads[0])]
    else:
        with ProcessPoolExecutor(max_workers=n_chunks) as pool:
            parts = list(pool.map(_basin_chunk, payloads))
    flat = [c for part in parts for c in part]
    cells = [flat[i * n_e:(i + 1) * n_e] for i in range(n_gamma)]
    return BasinGrid(gammas, e_ins, cells)
