"""Sieved sweeps over primes and squarefree twists, plus log-power fits.

Both sweeps split their range into fixed-size blocks.  A block yields a
partial result made only of integer tallies, and partials are summed in
ascending block order.  So the report does not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .arith import kronecker_symbol, sieve_primes
from .curve import CurveProfile, Mod2Image
from .errors import HypothesisViolated, InsufficientData, ResourceLimitExceeded
from .twist import PrimeTable, classify_primes, good_primes, require_matsuno_hypotheses

PRIME_CAP = 10**6
SQUAREFREE_CAP = 10**7
BLOCK = 1 << 18
PRIME_SETS = ("omega", "omega_prime", "M", "P", "Q")
CORANK_ONE_EXPONENT = Fraction(11, 12)


def default_workers() -> int:
    return os.cpu_count() or 1


def _guard(X: int, cap: int) -> None:
    if X > cap:
        raise ResourceLimitExceeded(f"sweep bound {X} exceeds cap {cap}")


def _pool(workers: int, initializer=None, initargs=()):
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = None
    return ProcessPoolExecutor(max_workers=workers, mp_context=ctx, initializer=initializer, initargs=initargs)


def _run_blocks(fn, blocks, workers, initializer=None, initargs=()):
    """Map ``fn`` over blocks, results in block order."""
    if workers <= 1 or len(blocks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        yield from map(fn, blocks)
        return
    with _pool(workers, initializer, initargs) as ex:
        yield from ex.map(fn, blocks)


# --- primes ------------------------------------------------------------------

def _prime_tallies(table: PrimeTable) -> dict[str, int]:
    return {
        "omega": int(table.in_omega.sum()),
        "omega_prime": int((~table.in_omega).sum()),
        "M": int(table.in_M.sum()),
        "P": int(table.in_P.sum()),
        "Q": int(table.in_Q_construct.sum()),
    }


@dataclass
class PrimeCensus:
    X: int
    population: int
    counts: dict[str, int]

    @property
    def densities(self) -> dict[str, float]:
        return {k: (v / self.population if self.population else 0.0) for k, v in self.counts.items()}

    def as_dict(self) -> dict:
        return {"X": self.X, "population": self.population, "counts": dict(self.counts),
                "densities": self.densities}


_PRIME_STATE: dict = {}


def _init_prime_worker(profile: CurveProfile) -> None:
    _PRIME_STATE["profile"] = profile


def _prime_block(ps: np.ndarray):
    table = classify_primes(_PRIME_STATE["profile"], ps)
    return len(ps), _prime_tallies(table), table


def prime_rows(table: PrimeTable) -> list[tuple]:
    """CSV rows: ell, mod8, chi, in_omega, n_ell, in_M, in_P."""
    cols = (table.ell, table.residue_mod8, table.chi_minus_N, table.in_omega.astype(int),
            table.n_ell, table.in_M.astype(int), table.in_P.astype(int))
    return list(zip(*(c.tolist() for c in cols)))


def prime_census(
    profile: CurveProfile,
    X: int,
    *,
    workers: int = 1,
    cap: int = PRIME_CAP,
    row_sink: Callable[[PrimeTable], None] | None = None,
) -> PrimeCensus:
    """Tally the prime sets over good odd primes ell <= X.

    Densities use the good odd primes as denominator, so primes dividing
    2 N_E are excluded throughout.
    """
    _guard(X, cap)
    ps = good_primes(profile, X)
    blocks = [ps[i : i + BLOCK // 8] for i in range(0, len(ps), BLOCK // 8)] or [ps]
    population = 0
    counts = dict.fromkeys(PRIME_SETS, 0)
    for n, tallies, table in _run_blocks(_prime_block, blocks, workers, _init_prime_worker, (profile,)):
        population += n
        for k, v in tallies.items():
            counts[k] += v
        if row_sink is not None:
            row_sink(table)
    return PrimeCensus(X, population, counts)


# --- squarefree twists ----------------------------------------------------------

def default_checkpoints(X: int, start: int = 100) -> list[int]:
    """Four points per decade from ``start`` up to X, with X itself last."""
    pts = []
    k = 0
    while True:
        v = int(round(10 ** (k / 4)))
        k += 1
        if v > X:
            break
        if v >= start:
            pts.append(v)
    if not pts or pts[-1] != X:
        pts.append(X)
    return sorted(set(pts))


@dataclass
class _Tables:
    profile: CurveProfile
    X: int
    primes: np.ndarray
    weight_at: np.ndarray
    omega_at: np.ndarray
    chi_table: np.ndarray
    checkpoints: np.ndarray
    targets: tuple[int, ...]
    rows: bool


_SF_STATE: dict = {}


def _init_sf_worker(tables: _Tables) -> None:
    _SF_STATE["t"] = tables


def _sf_block(bounds: tuple[int, int]) -> dict:
    t: _Tables = _SF_STATE["t"]
    lo, hi = bounds  # half-open [lo, hi)
    vals = np.arange(lo, hi, dtype=np.int64)
    rem = vals.copy()
    lam_add = np.zeros(hi - lo, dtype=np.int64)
    omega_hits = np.zeros(hi - lo, dtype=np.int32)
    squarefree = np.ones(hi - lo, dtype=bool)
    excluded = np.zeros(hi - lo, dtype=bool)
    for q in (2, *t.profile.bad_primes):
        excluded[(-lo) % q :: q] = True
    root = math.isqrt(hi - 1)
    for p in t.primes[t.primes <= root].tolist():
        s = (-lo) % p
        rem[s::p] //= p
        lam_add[s::p] += t.weight_at[p]
        omega_hits[s::p] += t.omega_at[p]
        p2 = p * p
        squarefree[(-lo) % p2 :: p2] = False
    # a squarefree d < hi has at most one prime factor above sqrt(hi)
    big = rem > 1
    lam_add[big] += t.weight_at[rem[big]]
    omega_hits[big] += t.omega_at[rem[big]]

    pop = squarefree & ~excluded
    lam = t.profile.lambda2 + lam_add
    omega_twist = t.profile.root_number * t.chi_table[vals % t.profile.conductor]
    proved = pop & (omega_twist == -1) & (lam <= 2)
    unchanged = pop & (omega_hits == 0)

    lv, lc = np.unique(lam[pop], return_counts=True)
    cps = t.checkpoints[(t.checkpoints >= lo) & (t.checkpoints < hi)]
    out = {
        "lo": lo,
        "population": int(pop.sum()),
        "n_E1_lower": int(proved.sum()),
        "n_Omega": int(unchanged.sum()),
        "m_EN": dict(zip(lv.tolist(), lc.tolist())),
    }
    # counts inside this block at or below each checkpoint; blocks before a
    # checkpoint contribute their full totals during the merge
    series = {"population": pop, "n_E1_lower": proved, "n_Omega": unchanged}
    for N in t.targets:
        series[f"m_EN[{N}]"] = pop & (lam == N)
    out["partial_series"] = {
        name: {int(c): int(mask[: c - lo + 1].sum()) for c in cps} for name, mask in series.items()
    }
    out["block_totals"] = {name: int(mask.sum()) for name, mask in series.items()}
    if t.rows:
        idx = np.flatnonzero(pop)
        out["rows"] = (vals[idx], lam[idx], omega_twist[idx], proved[idx], unchanged[idx])
    return out


def twist_row_conclusion(lam: int, proved: bool, unchanged: bool, base_lambda: int) -> str:
    """Same verdict string that :func:`twistlab.twist.certify` reports first, plus LambdaEquals."""
    s = "CorankOneProved" if proved else f"CorankAtMost({lam})"
    if unchanged:
        s += f";LambdaEquals({base_lambda})"
    return s


@dataclass
class FitResult:
    alpha_expected: float | None
    c_hat: float
    exponent_hat: float
    ratio_series: list[tuple[int, float]]
    diagnostics: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def asymptotic_fit(series: Sequence[tuple[int, int]], alpha: float | None = None) -> FitResult:
    """Fit count ~ c X / (log X)^e by least squares in log space.

    Regresses log(count / X) on log log X; the slope is -e.  The ratio series
    is count * (log X)^alpha / X, which should level off at c when the
    expected exponent alpha is right.
    """
    pts = [(int(x), int(n)) for x, n in series]
    if len(pts) < 5:
        raise InsufficientData(f"need at least 5 sample points, got {len(pts)}")
    xs = np.array([x for x, _ in pts], dtype=float)
    ns = np.array([n for _, n in pts], dtype=float)
    if np.any(xs < 3):
        raise InsufficientData("sample points must have X >= 3 so that log log X is defined")
    if math.log10(xs.max() / xs.min()) < 2 - 1e-9:
        raise InsufficientData("sample points must span at least two decades")
    if np.any(ns <= 0):
        raise InsufficientData("counts must be positive to fit in log space")
    diags = []
    if np.all(ns == ns[0]):
        diags.append("degenerate: count is constant, so growth is not of the form X/(log X)^e")
    t = np.log(np.log(xs))
    y = np.log(ns / xs)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    diags.append(f"rms log residual {rms:.4g}")
    ratio_alpha = alpha if alpha is not None else -slope
    ratios = [(int(x), float(n * math.log(x) ** ratio_alpha / x)) for x, n in pts]
    return FitResult(
        alpha_expected=None if alpha is None else float(alpha),
        c_hat=float(math.exp(intercept)),
        exponent_hat=float(-slope),
        ratio_series=ratios,
        diagnostics=diags,
    )


def ratio_variation(ratios: Iterable[tuple[int, float]], lo: int, hi: int) -> float:
    """max/min - 1 of the ratio series restricted to lo <= X <= hi."""
    vals = [r for x, r in ratios if lo <= x <= hi]
    if not vals:
        raise InsufficientData(f"no ratio points in [{lo}, {hi}]")
    return max(vals) / min(vals) - 1


@dataclass
class CensusReport:
    X: int
    curve: str
    lambda2: int
    mod2_image: str
    omega_density_expected: str
    population: int
    prime_counts: dict
    n_prime_1: int
    n_E1_lower: int
    n_Omega: int
    m_EN: dict[int, int]
    series: dict[str, list[tuple[int, int]]]
    fit: dict[str, dict]
    mu2_twists: str = "expected 0 under the Matsuno hypotheses; not independently verified"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["m_EN"] = {str(k): v for k, v in sorted(self.m_EN.items())}
        d["series"] = {k: [list(p) for p in v] for k, v in self.series.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def _series_alpha(profile: CurveProfile, name: str) -> float | None:
    img = profile.mod2_image
    if img.has_rational_two_torsion:
        # Omega' is finite here, so no log-power law is predicted
        return None
    if name == "n_E1_lower":
        return float(CORANK_ONE_EXPONENT)
    if name == "n_Omega" or name.startswith("m_EN"):
        return float(img.omega_density)
    return None


def squarefree_census(
    profile: CurveProfile,
    X: int,
    targets: Sequence[int] = (),
    *,
    workers: int = 1,
    cap: int = SQUAREFREE_CAP,
    checkpoints: Sequence[int] | None = None,
    row_sink: Callable[[list[tuple]], None] | None = None,
) -> CensusReport:
    """Sweep squarefree d <= X coprime to 2 N_E.

    For each d the twisted lambda-invariant and the corank verdict are
    computed with the same rules as :func:`twistlab.twist.certify`.
    """
    _guard(X, cap)
    if X < 1:
        raise ValueError("X must be >= 1")
    require_matsuno_hypotheses(profile)
    base = profile.lambda2
    for N in targets:
        if N < base or (N - base) % 2:
            raise HypothesisViolated(
                f"target {N} must be >= lambda2 = {base} and of the same parity",
                clause="N >= lambda2(E), N = lambda2(E) mod 2",
            )
    targets = tuple(sorted(set(int(n) for n in targets)))
    cps = np.array(sorted(set(checkpoints)) if checkpoints else default_checkpoints(X), dtype=np.int64)
    cps = cps[(cps >= 1) & (cps <= X)]

    primes = sieve_primes(max(X, 2))
    good = primes[primes > 2]
    for q in profile.bad_primes:
        good = good[good != q]
    table = classify_primes(profile, good)
    weight_at = np.zeros(X + 1, dtype=np.int64)
    omega_at = np.zeros(X + 1, dtype=np.int32)
    weight_at[good] = table.lambda_weight
    omega_at[good] = table.in_omega.astype(np.int32)
    N_E = profile.conductor
    chi_table = np.array([kronecker_symbol(r + N_E, -N_E) for r in range(N_E)], dtype=np.int64)

    tables = _Tables(profile, X, primes, weight_at, omega_at, chi_table, cps, targets, row_sink is not None)
    blocks = [(lo, min(lo + BLOCK, X + 1)) for lo in range(1, X + 1, BLOCK)]

    population = n_E1 = n_Om = 0
    m_EN: dict[int, int] = {N: 0 for N in targets}
    names = ["population", "n_E1_lower", "n_Omega", *[f"m_EN[{N}]" for N in targets]]
    running = dict.fromkeys(names, 0)
    series: dict[str, dict[int, int]] = {n: {} for n in names}
    for part in _run_blocks(_sf_block, blocks, workers, _init_sf_worker, (tables,)):
        population += part["population"]
        n_E1 += part["n_E1_lower"]
        n_Om += part["n_Omega"]
        for k, v in part["m_EN"].items():
            m_EN[k] = m_EN.get(k, 0) + v
        for name in names:
            for c, v in part["partial_series"][name].items():
                series[name][c] = running[name] + v
            running[name] += part["block_totals"][name]
        if row_sink is not None:
            d, lam, om, proved, unch = part["rows"]
            row_sink([
                (int(a), int(b), int(c), twist_row_conclusion(int(b), bool(p), bool(u), base))
                for a, b, c, p, u in zip(d.tolist(), lam.tolist(), om.tolist(), proved.tolist(), unch.tolist())
            ])

    series_lists = {n: sorted(series[n].items()) for n in names}
    fits = {}
    for name in names[1:]:
        alpha = _series_alpha(profile, name)
        try:
            fits[name] = asymptotic_fit(series_lists[name], alpha).as_dict()
        except InsufficientData as exc:
            fits[name] = {"alpha_expected": alpha, "diagnostics": [f"insufficient data: {exc.message}"]}

    prime_counts = _prime_tallies(table)
    prime_block = {
        "X": X,
        "population": len(table),
        "counts": prime_counts,
        "densities": {k: (v / len(table) if len(table) else 0.0) for k, v in prime_counts.items()},
    }
    n_prime_1 = int(_prime_twist_proved(profile, table).sum())
    return CensusReport(
        X=X,
        curve=profile.name,
        lambda2=base,
        mod2_image=profile.mod2_image.value,
        omega_density_expected=str(profile.mod2_image.omega_density),
        population=population,
        prime_counts=prime_block,
        n_prime_1=n_prime_1,
        n_E1_lower=n_E1,
        n_Omega=n_Om,
        m_EN=m_EN,
        series=series_lists,
        fit=fits,
    )


def _prime_twist_proved(profile: CurveProfile, table: PrimeTable) -> np.ndarray:
    """Mask of primes ell for which certify(profile, ell) proves corank one."""
    chi = _chi_d_minus_N(profile, table.ell)
    lam = profile.lambda2 + table.lambda_weight
    return (profile.root_number * chi == -1) & (lam <= 2)


def _chi_d_minus_N(profile: CurveProfile, d: np.ndarray) -> np.ndarray:
    N_E = profile.conductor
    chi_table = np.array([kronecker_symbol(r + N_E, -N_E) for r in range(N_E)], dtype=np.int64)
    return chi_table[d % N_E]


def omega_prediction(image: Mod2Image) -> Fraction:
    return image.omega_density
