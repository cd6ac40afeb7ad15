"""Star-product polynomials in two variables with deformation parameter theta.

The product is the full bidifferential series

    f * g = sum_k (i*theta/2)^k / k! *
            sum_j (-1)^j C(k,j) (d1^(k-j) d2^j f) (d2^(k-j) d1^j g)

which terminates on polynomials, so multiplication here is exact and the
basic coordinate relation x1*x2 - x2*x1 = i*theta holds to the last bit.
Only ``inv`` is approximate: it sums a geometric series truncated at the
degree cap and is labelled as such in CLI reports.
"""

from __future__ import annotations

from math import comb, factorial

from .ring import DimensionMismatchError, NearSingularError, RingElement

DEFAULT_CAP = 16

_INV_MAX_TERMS = 500
_INV_DIVERGENCE_FACTOR = 1e8


class DegreeOverflowError(ValueError):
    """An exact product would exceed the configured degree cap."""


def _deriv(coeffs: dict, var: int) -> dict:
    out = {}
    for (m, n), c in coeffs.items():
        if var == 0 and m > 0:
            out[(m - 1, n)] = out.get((m - 1, n), 0j) + m * c
        elif var == 1 and n > 0:
            out[(m, n - 1)] = out.get((m, n - 1), 0j) + n * c
    return out


def _deriv_pow(coeffs: dict, var: int, order: int) -> dict:
    for _ in range(order):
        coeffs = _deriv(coeffs, var)
    return coeffs


def _poly_mul(a: dict, b: dict) -> dict:
    out = {}
    for (m1, n1), c1 in a.items():
        for (m2, n2), c2 in b.items():
            key = (m1 + m2, n1 + n2)
            out[key] = out.get(key, 0j) + c1 * c2
    return out


class MoyalPolynomial(RingElement):
    """Polynomial in x1, x2 whose ring product is the star product.

    ``coeffs`` maps exponent pairs (m, n) to complex coefficients,
    ``theta`` is the deformation parameter and ``cap`` bounds the total
    degree m + n.  Operations whose exact result would exceed the cap
    raise :class:`DegreeOverflowError` rather than silently truncating,
    so associativity checks stay trustworthy.

    ``inv`` results are marked ``approximate``; arithmetic touching an
    approximate value truncates at the cap instead of raising (the value
    already carries a series tail) and the flag propagates, so downstream
    consumers can tell exact results from capped ones.
    """

    __slots__ = ("coeffs", "theta", "cap", "approximate")

    def __init__(self, coeffs: dict, theta: float, cap: int = DEFAULT_CAP,
                 approximate: bool = False):
        theta = float(theta)
        cap = int(cap)
        if cap < 0:
            raise ValueError("degree cap must be nonnegative")
        clean = {}
        for (m, n), c in coeffs.items():
            m, n = int(m), int(n)
            if m < 0 or n < 0:
                raise ValueError(f"negative exponent in monomial ({m},{n})")
            if m + n > cap:
                raise DegreeOverflowError(
                    f"monomial x1^{m} x2^{n} exceeds degree cap {cap}")
            c = complex(c)
            if c != 0:
                clean[(m, n)] = c
        self.coeffs = clean
        self.theta = theta
        self.cap = cap
        self.approximate = bool(approximate)

    @classmethod
    def zero(cls, theta: float, cap: int = DEFAULT_CAP):
        return cls({}, theta, cap)

    @classmethod
    def one(cls, theta: float, cap: int = DEFAULT_CAP):
        return cls({(0, 0): 1.0}, theta, cap)

    @classmethod
    def x1(cls, theta: float, cap: int = DEFAULT_CAP):
        return cls({(1, 0): 1.0}, theta, cap)

    @classmethod
    def x2(cls, theta: float, cap: int = DEFAULT_CAP):
        return cls({(0, 1): 1.0}, theta, cap)

    @classmethod
    def monomial(cls, m: int, n: int, coeff: complex, theta: float,
                 cap: int = DEFAULT_CAP):
        return cls({(m, n): coeff}, theta, cap)

    def degree(self) -> int:
        return max((m + n for m, n in self.coeffs), default=0)

    def coefficient(self, m: int, n: int) -> complex:
        return self.coeffs.get((m, n), 0j)

    def terms(self):
        return sorted(self.coeffs.items())

    def _require_same_ring(self, other):
        if not isinstance(other, MoyalPolynomial):
            raise DimensionMismatchError(
                f"cannot combine MoyalPolynomial with {type(other).__name__}")
        if other.theta != self.theta:
            raise DimensionMismatchError(
                f"deformation mismatch: theta {self.theta} vs {other.theta}")
        if other.cap != self.cap:
            raise DimensionMismatchError(
                f"degree cap mismatch: {self.cap} vs {other.cap}")

    def _add(self, other):
        self._require_same_ring(other)
        merged = dict(self.coeffs)
        for key, c in other.coeffs.items():
            merged[key] = merged.get(key, 0j) + c
        return MoyalPolynomial(merged, self.theta, self.cap,
                               approximate=self.approximate
                               or other.approximate)

    def _mul(self, other):
        self._require_same_ring(other)
        return _star(self, other,
                     truncate=self.approximate or other.approximate)

    def _scale(self, scalar):
        return MoyalPolynomial({k: scalar * c for k, c in self.coeffs.items()},
                               self.theta, self.cap,
                               approximate=self.approximate)

    def __neg__(self):
        return self._scale(-1.0)

    def norm(self) -> float:
        return sum(abs(c) ** 2 for c in self.coeffs.values()) ** 0.5

    def one_like(self):
        return MoyalPolynomial.one(self.theta, self.cap)

    def zero_like(self):
        return MoyalPolynomial.zero(self.theta, self.cap)

    def singular_extremes(self):
        # Crude estimate for flow monitors: the constant term controls
        # invertibility of the truncated geometric series.
        c0 = abs(self.coefficient(0, 0))
        return c0, max(self.norm(), c0)

    def inv(self):
        """Star inverse by geometric series, truncated at the degree cap.

        Approximate: requires a dominant constant term; terms beyond the
        cap are dropped, so ``f * f.inv()`` equals one only up to the
        series tail.  The result carries ``approximate=True``.
        """
        c0 = self.coefficient(0, 0)
        scale = max(self.norm(), 1e-300)
        if abs(c0) <= 1e-12 * scale:
            cond = float("inf") if c0 == 0 else scale / abs(c0)
            raise NearSingularError(
                "constant term too small for the star-inverse series",
                condition=cond)
        u = (self - c0) * (1.0 / c0)
        total = self.one_like()
        term = self.one_like()
        u_norm0 = max(u.norm(), 1.0)
        for _ in range(_INV_MAX_TERMS):
            term = _star(term, u, truncate=True) * (-1.0)
            tn = term.norm()
            if tn == 0.0 or tn <= 1e-16 * max(total.norm(), 1.0):
                total = total + term
                break
            if tn > _INV_DIVERGENCE_FACTOR * u_norm0:
                raise NearSingularError(
                    "star-inverse geometric series diverges",
                    condition=scale / abs(c0))
            total = total + term
        else:
            if tn > 1e-8 * max(total.norm(), 1.0):
                raise NearSingularError(
                    "star-inverse series did not converge "
                    f"within {_INV_MAX_TERMS} terms",
                    condition=scale / abs(c0))
        return total * (1.0 / c0)

    def allclose(self, other, rtol=1e-9, atol=1e-12):
        self._require_same_ring(other)
        keys = set(self.coeffs) | set(other.coeffs)
        ref = max(self.norm(), other.norm())
        for key in keys:
            if abs(self.coefficient(*key) - other.coefficient(*key)) \
                    > atol + rtol * ref:
                return False
        return True

    def __repr__(self):
        body = " + ".join(f"({c})*x1^{m}*x2^{n}"
                          for (m, n), c in self.terms()) or "0"
        return f"MoyalPolynomial[theta={self.theta}]({body})"


def _star(f: MoyalPolynomial, g: MoyalPolynomial,
          truncate: bool) -> MoyalPolynomial:
    f._require_same_ring(g)
    if f.coeffs and g.coeffs and not truncate \
            and f.degree() + g.degree() > f.cap:
        raise DegreeOverflowError(
            f"star product of degrees {f.degree()} and {g.degree()} "
            f"exceeds degree cap {f.cap}")
    out: dict = {}
    kmax = 0 if f.theta == 0.0 else min(f.degree(), g.degree())
    for k in range(kmax + 1):
        pref = (0.5j * f.theta) ** k / factorial(k)
        for j in range(k + 1):
            df = _deriv_pow(_deriv_pow(f.coeffs, 0, k - j), 1, j)
            dg = _deriv_pow(_deriv_pow(g.coeffs, 1, k - j), 0, j)
            if not df or not dg:
                continue
            weight = pref * ((-1) ** j) * comb(k, j)
            for key, c in _poly_mul(df, dg).items():
                out[key] = out.get(key, 0j) + weight * c
    if truncate:
        out = {k: c for k, c in out.items() if k[0] + k[1] <= f.cap}
    return MoyalPolynomial(out, f.theta, f.cap,
                           approximate=truncate or f.approximate
                           or g.approximate)


def star_product(f: MoyalPolynomial, g: MoyalPolynomial) -> MoyalPolynomial:
    """Exact star product; raises DegreeOverflowError past the cap."""
    return _star(f, g, truncate=False)


def star_commutator(f: MoyalPolynomial, g: MoyalPolynomial) -> MoyalPolynomial:
    """star_product(f, g) - star_product(g, f)."""
    return _star(f, g, truncate=False) - _star(g, f, truncate=False)
