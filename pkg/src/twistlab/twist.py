"""Quadratic twist classification for the 2-adic lambda-invariant.

Every function here takes a :class:`~twistlab.curve.CurveProfile` and a
positive squarefree twist parameter ``d`` coprime to ``2 N_E``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import gcd
from typing import Iterable

import numpy as np

from .arith import (
    SquarefreeInteger,
    cubic_has_root_mod_vec,
    is_prime,
    kronecker_symbol,
    legendre_vec,
    ord2,
    ord2_vec,
    reduce_mod_vec,
    sieve_primes,
)
from .curve import CurveProfile, two_division_cubic, two_torsion_mod_ell
from .errors import BadPrime, HypothesisViolated, PoolExhausted


@dataclass(frozen=True)
class PrimeClass:
    ell: int
    residue_mod4: int
    residue_mod8: int
    in_omega: bool
    n_ell: int
    chi_minus_N: int
    splits_fully_F: bool
    in_M: bool
    in_P: bool
    in_Q_construct: bool

    @property
    def split_in_K(self) -> bool:
        return self.chi_minus_N == 1

    @property
    def lambda_weight(self) -> int:
        """Contribution of this prime to the twisted lambda-invariant."""
        return 2 ** (self.n_ell + 1) if self.in_omega else 0


def n_ell(ell: int) -> int:
    return ord2((ell * ell - 1) // 8)


def _check_good_prime(profile: CurveProfile, ell: int) -> None:
    if ell <= 2 or not is_prime(ell):
        raise ValueError(f"ell must be an odd prime, got {ell}")
    if profile.conductor % ell == 0:
        raise BadPrime(f"ell={ell} divides N_E={profile.conductor}", clause="ell does not divide 2N_E")


def classify_prime(profile: CurveProfile, ell: int) -> PrimeClass:
    _check_good_prime(profile, ell)
    in_omega = two_torsion_mod_ell(profile.curve, ell)
    chi = kronecker_symbol(-profile.conductor, ell)
    m4, m8 = ell % 4, ell % 8
    splits_F = m4 == 1 and chi == 1
    return PrimeClass(
        ell=ell,
        residue_mod4=m4,
        residue_mod8=m8,
        in_omega=in_omega,
        n_ell=n_ell(ell),
        chi_minus_N=chi,
        splits_fully_F=splits_F,
        in_M=splits_F and not in_omega,
        in_P=chi == -1 and m8 in (3, 5),
        in_Q_construct=in_omega and m8 in (3, 5),
    )


@dataclass
class PrimeTable:
    """Column-oriented :class:`PrimeClass` records for many primes at once."""

    ell: np.ndarray
    in_omega: np.ndarray
    n_ell: np.ndarray
    chi_minus_N: np.ndarray

    @property
    def residue_mod8(self) -> np.ndarray:
        return self.ell % 8

    @property
    def splits_fully_F(self) -> np.ndarray:
        return (self.ell % 4 == 1) & (self.chi_minus_N == 1)

    @property
    def in_M(self) -> np.ndarray:
        return self.splits_fully_F & ~self.in_omega

    @property
    def in_P(self) -> np.ndarray:
        m8 = self.residue_mod8
        return (self.chi_minus_N == -1) & ((m8 == 3) | (m8 == 5))

    @property
    def in_Q_construct(self) -> np.ndarray:
        m8 = self.residue_mod8
        return self.in_omega & ((m8 == 3) | (m8 == 5))

    @property
    def lambda_weight(self) -> np.ndarray:
        return np.where(self.in_omega, np.left_shift(np.int64(2), self.n_ell), 0)

    def __len__(self) -> int:
        return len(self.ell)

    def record(self, i: int) -> PrimeClass:
        ell = int(self.ell[i])
        return PrimeClass(
            ell=ell,
            residue_mod4=ell % 4,
            residue_mod8=ell % 8,
            in_omega=bool(self.in_omega[i]),
            n_ell=int(self.n_ell[i]),
            chi_minus_N=int(self.chi_minus_N[i]),
            splits_fully_F=bool(self.splits_fully_F[i]),
            in_M=bool(self.in_M[i]),
            in_P=bool(self.in_P[i]),
            in_Q_construct=bool(self.in_Q_construct[i]),
        )


def good_primes(profile: CurveProfile, X: int) -> np.ndarray:
    """Odd primes <= X not dividing N_E."""
    ps = sieve_primes(X)
    ps = ps[ps > 2]
    for q in profile.bad_primes:
        ps = ps[ps != q]
    return ps


def classify_primes(profile: CurveProfile, primes: np.ndarray) -> PrimeTable:
    """Vectorized :func:`classify_prime` over an array of good odd primes."""
    ell = np.asarray(primes, dtype=np.int64)
    if ell.size and (int(ell.min()) <= 2 or any(np.any(ell == q) for q in profile.bad_primes)):
        raise BadPrime("primes must be odd and coprime to N_E", clause="ell does not divide 2N_E")
    in_omega = cubic_has_root_mod_vec(two_division_cubic(profile.curve), ell)
    chi = legendre_vec(reduce_mod_vec(-profile.conductor, ell), ell)
    n = ord2_vec((ell * ell - 1) // 8)
    return PrimeTable(ell=ell, in_omega=in_omega, n_ell=n, chi_minus_N=chi)


# --- twists -------------------------------------------------------------------

def _as_squarefree(d) -> SquarefreeInteger:
    if isinstance(d, SquarefreeInteger):
        return d
    d = int(d)
    if d <= 0:
        raise HypothesisViolated(f"twist parameter must be positive, got {d}", clause="d > 0")
    try:
        return SquarefreeInteger.from_int(d)
    except ValueError as exc:
        raise HypothesisViolated(str(exc), clause="d squarefree") from exc


def require_matsuno_hypotheses(profile: CurveProfile) -> None:
    if not profile.ordinary_at_2:
        raise HypothesisViolated("curve is not good ordinary at 2", clause="good ordinary reduction at 2")
    if not profile.conductor_squarefree:
        raise HypothesisViolated("conductor is not squarefree", clause="N_E squarefree")
    if profile.mu2 is None or profile.lambda2 is None:
        raise HypothesisViolated("mu2 and lambda2 must be supplied", clause="mu2, lambda2 known")
    if profile.mu2 != 0:
        raise HypothesisViolated(f"mu2 = {profile.mu2} is nonzero", clause="mu2 = 0")


def _check_twist(profile: CurveProfile, d) -> SquarefreeInteger:
    require_matsuno_hypotheses(profile)
    d = _as_squarefree(d)
    if gcd(d.value, 2 * profile.conductor) != 1:
        raise HypothesisViolated(
            f"d={d.value} is not coprime to 2N_E={2 * profile.conductor}", clause="gcd(d, 2N_E) = 1"
        )
    return d


def matsuno_lambda(profile: CurveProfile, d) -> int:
    """lambda_2 of the twist by d: lambda_2(E) + sum of 2^(n_ell + 1) over ell | d in Omega."""
    d = _check_twist(profile, d)
    lam = profile.lambda2
    for ell in d.factors:
        if two_torsion_mod_ell(profile.curve, ell):
            lam += 2 ** (n_ell(ell) + 1)
    return lam


def twist_root_number(profile: CurveProfile, d) -> int:
    d = _check_twist(profile, d)
    if d.value % 4 == 1:
        # reciprocity: (d / -N) = prod over ell | d of (-N / ell)
        chi = 1
        for ell in d.factors:
            chi *= kronecker_symbol(-profile.conductor, ell)
    else:
        chi = kronecker_symbol(d.value, -profile.conductor)
    return chi * profile.root_number


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class CorankBounds:
    parity: Parity
    upper: int


def corank_bounds(profile: CurveProfile, d) -> CorankBounds:
    parity = Parity.ODD if twist_root_number(profile, d) == -1 else Parity.EVEN
    return CorankBounds(parity, matsuno_lambda(profile, d))


@dataclass(frozen=True)
class Conclusion:
    kind: str
    value: int | None = None

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind}({self.value})"


CORANK_ONE = Conclusion("CorankOneProved")
INDETERMINATE = Conclusion("Indeterminate")


@dataclass(frozen=True)
class TwistCertificate:
    d: SquarefreeInteger
    coprime_ok: bool
    lambda2_twist: int | None
    omega_twist: int | None
    corank_parity: Parity | None
    corank_upper: int | None
    conclusions: tuple[Conclusion, ...]
    rank_note: str

    @property
    def conclusion(self) -> Conclusion:
        return self.conclusions[0]

    @property
    def corank_one_proved(self) -> bool:
        return self.conclusion == CORANK_ONE

    def as_dict(self) -> dict:
        return {
            "d": self.d.value,
            "factors": list(self.d.factors),
            "coprime_ok": self.coprime_ok,
            "lambda2_twist": self.lambda2_twist,
            "omega_twist": self.omega_twist,
            "corank_parity": self.corank_parity.value if self.corank_parity else None,
            "corank_upper": self.corank_upper,
            "conclusion": str(self.conclusion),
            "conclusions": [str(c) for c in self.conclusions],
            "rank_note": self.rank_note,
        }


def conclusions_for(parity_odd: bool, upper: int, lambda_unchanged: bool, base_lambda: int) -> tuple[Conclusion, ...]:
    """Verdict list for a twist; the census applies the same rule in bulk."""
    if parity_odd and upper <= 2:
        out = [CORANK_ONE]
    else:
        out = [Conclusion("CorankAtMost", upper)]
    if lambda_unchanged:
        out.append(Conclusion("LambdaEquals", base_lambda))
    return tuple(out)


def certify(profile: CurveProfile, d, *, strict: bool = True) -> TwistCertificate:
    """Corank certificate for E^(d).

    With ``strict=False`` a ``d`` sharing a factor with 2N_E yields an
    ``Indeterminate`` certificate instead of raising.
    """
    require_matsuno_hypotheses(profile)
    sd = _as_squarefree(d)
    if gcd(sd.value, 2 * profile.conductor) != 1:
        if strict:
            _check_twist(profile, sd)
        return TwistCertificate(sd, False, None, None, None, None, (INDETERMINATE,),
                                "no conclusion: d is not coprime to 2N_E")
    bounds = corank_bounds(profile, sd)
    omega_twist = -1 if bounds.parity is Parity.ODD else 1
    unchanged = not any(two_torsion_mod_ell(profile.curve, ell) for ell in sd.factors)
    concl = conclusions_for(bounds.parity is Parity.ODD, bounds.upper, unchanged, profile.lambda2)
    if concl[0] == CORANK_ONE:
        note = "corank 1; rank 1 if Sha(E^(d)/Q)[2^inf] is finite"
    else:
        note = f"corank <= {bounds.upper} ({bounds.parity.value}); rank <= {bounds.upper} if Sha(E^(d)/Q)[2^inf] is finite"
    return TwistCertificate(
        d=sd,
        coprime_ok=True,
        lambda2_twist=bounds.upper,
        omega_twist=omega_twist,
        corank_parity=bounds.parity,
        corank_upper=bounds.upper,
        conclusions=concl,
        rank_note=note,
    )


@dataclass(frozen=True)
class CompositeCheck:
    ok: bool
    d: int
    diagnostics: tuple[str, ...]


def validate_composite(profile: CurveProfile, primes: Iterable[int]) -> CompositeCheck:
    """Check that d = prod(primes) meets the corank-one construction's prime conditions."""
    primes = sorted(int(p) for p in primes)
    diags = []
    if len(set(primes)) != len(primes):
        diags.append("primes are not distinct")
    d = 1
    inert = 0
    for ell in primes:
        d *= ell
        if ell == 2 or profile.conductor % ell == 0:
            diags.append(f"{ell} divides 2N_E")
            continue
        pc = classify_prime(profile, ell)
        if pc.in_omega:
            diags.append(f"{ell} lies in Omega")
        if pc.chi_minus_N == -1:
            inert += 1
    if d % 4 != 1:
        diags.append(f"d = {d} is not 1 mod 4")
    want_odd = profile.root_number == 1
    if (inert % 2 == 1) != want_odd:
        diags.append(
            f"{inert} inert primes; need an {'odd' if want_odd else 'even'} count for root number {profile.root_number:+d}"
        )
    return CompositeCheck(not diags, d, tuple(diags))


def construct_d_with_lambda(profile: CurveProfile, target: int, pool_limit: int = 10**6) -> SquarefreeInteger:
    """Smallest-primes twist d with matsuno_lambda(d) == target.

    Uses primes ell in Omega with ell = 3, 5 mod 8, each adding exactly 2.
    """
    require_matsuno_hypotheses(profile)
    base = profile.lambda2
    if target < base or (target - base) % 2:
        raise HypothesisViolated(
            f"target {target} must be >= lambda2 = {base} and of the same parity",
            clause="N >= lambda2(E), N = lambda2(E) mod 2",
        )
    k = (target - base) // 2
    if k == 0:
        return SquarefreeInteger(1, ())
    chosen: list[int] = []
    lo = 3
    while len(chosen) < k and lo <= pool_limit:
        hi = min(pool_limit, max(2 * lo, 10_000))
        ps = good_primes(profile, hi)
        ps = ps[ps >= lo]
        if ps.size:
            table = classify_primes(profile, ps)
            pool = table.ell[table.in_Q_construct]
            chosen.extend(int(q) for q in pool[: k - len(chosen)])
        lo = hi + 1
    if len(chosen) < k:
        raise PoolExhausted(f"only {len(chosen)} of {k} qualifying primes below {pool_limit}")
    return SquarefreeInteger.from_factors(chosen)
