"""Weierstrass models, local reduction data, conductor, root number, mod-2 image.

Curves are assumed to be globally minimal models.  Minimality is checked at
odd primes only; at 2 it is trusted.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .arith import cubic_has_root_mod, factorize, is_prime, kronecker_symbol, valuation
from .errors import AdditivePrimeEncountered, BadPrime, HypothesisViolated, NotMinimal, SingularCurve

log = logging.getLogger(__name__)

# j-invariants of the 13 rational CM j-values
CM_J_INVARIANTS = frozenset(
    {0, 1728, -3375, 8000, -32768, 54000, 287496, -884736, -12288000, 16581375,
     -884736000, -147197952000, -262537412640768000}
)


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integer coefficients."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    b2: int = field(init=False)
    b4: int = field(init=False)
    b6: int = field(init=False)
    b8: int = field(init=False)
    c4: int = field(init=False)
    c6: int = field(init=False)
    disc: int = field(init=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        for name, val in (("b2", b2), ("b4", b4), ("b6", b6), ("b8", b8),
                          ("c4", c4), ("c6", c6), ("disc", disc)):
            object.__setattr__(self, name, val)
        if disc == 0:
            raise SingularCurve(f"curve {list(self.ainvs)} has discriminant 0", clause="disc != 0")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4**3, self.disc)

    @classmethod
    def from_ainvs(cls, ainvs: Sequence[int]) -> "WeierstrassCurve":
        if len(ainvs) != 5:
            raise ValueError(f"expected 5 a-invariants, got {len(ainvs)}")
        return cls(*(int(a) for a in ainvs))


def derive_quantities(a1: int, a2: int, a3: int, a4: int, a6: int) -> WeierstrassCurve:
    return WeierstrassCurve(int(a1), int(a2), int(a3), int(a4), int(a6))


def change_coordinates(ainvs: Sequence, u, r, s, t) -> tuple[Fraction, ...]:
    """a-invariants after x = u^2 x' + r, y = u^3 y' + s u^2 x' + t (rational)."""
    a1, a2, a3, a4, a6 = (Fraction(a) for a in ainvs)
    u, r, s, t = (Fraction(v) for v in (u, r, s, t))
    return (
        (a1 + 2 * s) / u,
        (a2 - s * a1 + 3 * r - s * s) / u**2,
        (a3 + r * a1 + 2 * t) / u**3,
        (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4,
        (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6,
    )


def short_model_witness(curve: WeierstrassCurve, u) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(u, r, s, t) carrying ``curve`` to a model with a1 = a2 = a3 = 0."""
    u = Fraction(u)
    s = Fraction(-curve.a1, 2)
    r = Fraction(-curve.b2, 12)
    t = -(curve.a3 + r * curve.a1) / 2
    return (u, r, s, t)


class ReductionType(enum.Enum):
    GOOD = "Good"
    SPLIT = "MultiplicativeSplit"
    NONSPLIT = "MultiplicativeNonsplit"
    ADDITIVE = "Additive"

    @property
    def multiplicative(self) -> bool:
        return self in (ReductionType.SPLIT, ReductionType.NONSPLIT)


def _check_minimal_at(curve: WeierstrassCurve, p: int) -> None:
    if curve.disc % p**12 == 0 and curve.c4 % p**4 == 0:
        raise NotMinimal(f"model is not minimal at p={p}", clause=f"minimal at {p}")


def reduction_type(curve: WeierstrassCurve, p: int) -> ReductionType:
    if p == 2:
        raise ValueError("p = 2 is handled by good_ordinary_at_2")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if curve.disc % p:
        return ReductionType.GOOD
    _check_minimal_at(curve, p)
    if curve.c4 % p == 0:
        return ReductionType.ADDITIVE
    if kronecker_symbol(-curve.c6, p) == 1:
        return ReductionType.SPLIT
    return ReductionType.NONSPLIT


def count_points_mod(curve: WeierstrassCurve, p: int) -> int:
    """#E~(F_p) including the point at infinity, by running over x.

    For odd p each x contributes 1 + (D/p) points, D the discriminant of the
    quadratic in y; for p = 2 all four affine points are tried.  Works for
    singular reductions too (the singular point is counted once).
    """
    a1, a2, a3, a4, a6 = curve.ainvs
    if p == 2:
        n = 1
        for x in (0, 1):
            for y in (0, 1):
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    n = 1
    for x in range(p):
        lin = a1 * x + a3
        rhs = x**3 + a2 * x * x + a4 * x + a6
        n += 1 + kronecker_symbol((lin * lin + 4 * rhs) % p, p)
    return n


def good_ordinary_at_2(curve: WeierstrassCurve) -> bool:
    if curve.disc % 2 == 0:
        return False
    a_2 = 3 - count_points_mod(curve, 2)
    return a_2 % 2 == 1


def two_division_cubic(curve: WeierstrassCurve) -> tuple[int, int, int, int]:
    """Coefficients (leading first) of 4x^3 + b2 x^2 + 2 b4 x + b6."""
    return (4, curve.b2, 2 * curve.b4, curve.b6)


def _cubic_disc(c: Sequence[int]) -> int:
    c3, c2, c1, c0 = c
    return (c2 * c2 * c1 * c1 - 4 * c3 * c1**3 - 4 * c2**3 * c0
            - 27 * c3 * c3 * c0 * c0 + 18 * c3 * c2 * c1 * c0)


def rational_roots_of_cubic(coeffs: Sequence[int]) -> list[Fraction]:
    """Distinct rational roots by the rational-root test.

    With x = u / c3 the cubic becomes monic in u with integer coefficients,
    so every rational root gives an integer divisor u of the new constant.
    """
    c3, c2, c1, c0 = (int(c) for c in coeffs)
    if c3 == 0:
        raise ValueError("leading coefficient must be nonzero")
    m2, m1, m0 = c2, c1 * c3, c0 * c3 * c3

    def g(u: int) -> int:
        return ((u + m2) * u + m1) * u + m0

    if m0 == 0:
        cands = {0}
        # remaining roots solve u^2 + m2 u + m1 = 0
        disc = m2 * m2 - 4 * m1
        if disc >= 0 and isqrt(disc) ** 2 == disc:
            s = isqrt(disc)
            cands |= {(-m2 + s) // 2, (-m2 - s) // 2}
    else:
        cands = set()
        for q in _divisors(abs(m0)):
            cands.update((q, -q))
    roots = sorted({Fraction(u, c3) for u in cands if g(u) == 0})
    return roots


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


def two_torsion_rational(curve: WeierstrassCurve) -> bool:
    return bool(rational_roots_of_cubic(two_division_cubic(curve)))


def two_torsion_mod_ell(curve: WeierstrassCurve, ell: int) -> bool:
    """E~(F_ell)[2] != 0 for a good odd prime ell."""
    if ell == 2 or curve.disc % ell == 0:
        raise BadPrime(f"ell={ell} divides 2*disc", clause="ell does not divide 2N_E")
    return cubic_has_root_mod(two_division_cubic(curve), ell)


class Mod2Image(enum.Enum):
    """Image of the mod-2 representation in GL2(F2) = S3, up to conjugacy."""

    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    FULL = "Full"

    @property
    def omega_density(self) -> Fraction:
        """Chebotarev density of primes with nontrivial 2-torsion mod ell."""
        return {"G1": Fraction(1), "G2": Fraction(1), "G3": Fraction(1, 3), "Full": Fraction(2, 3)}[self.value]

    @property
    def has_rational_two_torsion(self) -> bool:
        return self in (Mod2Image.G1, Mod2Image.G2)


def mod2_image(curve: WeierstrassCurve) -> Mod2Image:
    cubic = two_division_cubic(curve)
    n = len(rational_roots_of_cubic(cubic))
    if n == 3:
        return Mod2Image.G1
    if n == 1:
        return Mod2Image.G2
    disc = _cubic_disc(cubic)
    if disc > 0 and isqrt(disc) ** 2 == disc:
        return Mod2Image.G3
    return Mod2Image.FULL


def has_cm(curve: WeierstrassCurve) -> bool:
    j = curve.j_invariant
    return j.denominator == 1 and j.numerator in CM_J_INVARIANTS


@dataclass(frozen=True)
class LocalData:
    p: int
    reduction: ReductionType
    ord_disc: int
    tamagawa: int

    @property
    def root_number(self) -> int:
        return -1 if self.reduction is ReductionType.SPLIT else 1


def local_data(curve: WeierstrassCurve, p: int) -> LocalData:
    red = reduction_type(curve, p)
    if red is ReductionType.ADDITIVE:
        raise AdditivePrimeEncountered(f"additive reduction at p={p}", clause=f"semistable at {p}")
    v = valuation(curve.disc, p)
    if red is ReductionType.SPLIT:
        c = v
    elif red is ReductionType.NONSPLIT:
        c = 1 if v % 2 else 2
    else:
        c = 1
    return LocalData(p, red, v, c)


def bad_odd_primes(curve: WeierstrassCurve) -> list[int]:
    return sorted(p for p in factorize(curve.disc) if p != 2)


def semistable_local_data(curve: WeierstrassCurve) -> list[LocalData]:
    if curve.disc % 2 == 0:
        raise HypothesisViolated("bad reduction at 2", clause="good reduction at 2")
    return [local_data(curve, p) for p in bad_odd_primes(curve)]


def conductor_and_root_number(curve: WeierstrassCurve) -> tuple[int, int]:
    """(N_E, omega) for a minimal, semistable model with good reduction at 2."""
    conductor = 1
    eps = -1
    for ld in semistable_local_data(curve):
        conductor *= ld.p
        eps *= ld.root_number
    return conductor, eps


@dataclass(frozen=True)
class GreenbergReport:
    ordinary_at_2: bool
    points_mod_2: int
    points_mod_2_odd: bool
    tamagawa: dict[int, int]
    tamagawa_odd: bool
    selmer_condition: str = "NOT CHECKED"

    @property
    def checked_conditions_hold(self) -> bool:
        return self.ordinary_at_2 and self.points_mod_2_odd and self.tamagawa_odd


@dataclass(frozen=True)
class CurveProfile:
    """A curve together with all per-curve invariants used by the twist machinery.

    ``mu2`` and ``lambda2`` are ground truth supplied by the caller (LMFDB or
    config); they are never computed here.
    """

    curve: WeierstrassCurve
    conductor: int
    conductor_squarefree: bool
    root_number: int
    mod2_image: Mod2Image
    ordinary_at_2: bool
    local: tuple[LocalData, ...]
    mu2: int | None = None
    lambda2: int | None = None
    label: str | None = None
    rank: int | None = None
    cm: bool = False
    computed_root_number: int | None = None

    def __post_init__(self):
        for name in ("mu2", "lambda2"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")
        if self.root_number not in (1, -1):
            raise ValueError(f"root number must be +1 or -1, got {self.root_number}")

    @property
    def two_torsion_rational(self) -> bool:
        return self.mod2_image.has_rational_two_torsion

    @property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(ld.p for ld in self.local)

    @property
    def name(self) -> str:
        return self.label or str(list(self.curve.ainvs))


def build_profile(
    curve: WeierstrassCurve,
    *,
    mu2: int | None = None,
    lambda2: int | None = None,
    label: str | None = None,
    rank: int | None = None,
    root_number: int | None = None,
) -> CurveProfile:
    local = semistable_local_data(curve)
    conductor = 1
    eps = -1
    for ld in local:
        conductor *= ld.p
        eps *= ld.root_number
    omega = eps
    if root_number is not None and root_number != eps:
        log.warning(
            "supplied root number %+d for %s disagrees with computed %+d; using supplied value",
            root_number, label or list(curve.ainvs), eps,
        )
        omega = root_number
    return CurveProfile(
        curve=curve,
        conductor=conductor,
        # semistable with good reduction at 2 makes N_E a product of distinct odd primes
        conductor_squarefree=True,
        root_number=omega,
        mod2_image=mod2_image(curve),
        ordinary_at_2=good_ordinary_at_2(curve),
        local=tuple(local),
        mu2=mu2,
        lambda2=lambda2,
        label=label,
        rank=rank,
        cm=has_cm(curve),
        computed_root_number=eps,
    )


def greenberg_criterion_partial(profile: CurveProfile) -> GreenbergReport:
    """Conditions (p = 2) that can be checked without a Selmer computation."""
    if not profile.ordinary_at_2:
        raise HypothesisViolated("curve is not good ordinary at 2", clause="good ordinary reduction at 2")
    n2 = count_points_mod(profile.curve, 2)
    tam = {ld.p: ld.tamagawa for ld in profile.local}
    return GreenbergReport(
        ordinary_at_2=True,
        points_mod_2=n2,
        points_mod_2_odd=n2 % 2 == 1,
        tamagawa=tam,
        tamagawa_odd=all(c % 2 == 1 for c in tam.values()),
    )

