"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Scalars are stored as rational coordinate vectors in the power basis
1, z, ..., z^(phi(N)-1), reduced modulo the N-th cyclotomic polynomial
Phi_N.  This representation is unique, so equality is coordinate-wise,
and every nonzero element is invertible (extended Euclid against Phi_N).

All symbolic modules use one field per problem instance; mixing scalars
from different fields raises instead of coercing.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction]


class CycloError(ValueError):
    """Raised on domain errors (zero inversion, mixed fields, bad parse)."""


def _poly_trim(c: list[Fraction]) -> list[Fraction]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(num: Sequence[Fraction], den: Sequence[Fraction]):
    """Quotient and remainder of dense rational polynomials (constant first)."""
    num = list(num)
    q = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    inv_lead = 1 / Fraction(den[-1])
    for i in range(len(num) - len(den), -1, -1):
        coef = num[i + len(den) - 1] * inv_lead
        if coef:
            q[i] = coef
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    return q, _poly_trim(num)


def _cyclotomic_poly(n: int, cache: dict[int, list[Fraction]]) -> list[Fraction]:
    """Phi_n as dense rational coefficients, by exact recursive division
    of x^n - 1 by the product of Phi_d over proper divisors d."""
    if n in cache:
        return cache[n]
    num = [Fraction(0)] * (n + 1)
    num[0], num[n] = Fraction(-1), Fraction(1)
    for d in range(1, n):
        if n % d == 0:
            q, r = _poly_divmod(num, _cyclotomic_poly(d, cache))
            assert not r, "cyclotomic division must be exact"
            num = q
    cache[n] = num
    return num


def _euler_phi(n: int) -> int:
    count = 0
    for k in range(n):
        if gcd(k, n) == 1:
            count += 1
    return count


class CycloField:
    """The field Q(zeta_N).  N = 1 gives plain Q with the convention
    Phi_1 = x - 1, so the basis is the single element 1."""

    def __init__(self, order: int):
        if order < 1:
            raise CycloError("field order must be a positive integer")
        self.order = order
        self.minimal_polynomial = tuple(_cyclotomic_poly(order, {}))
        self.degree = len(self.minimal_polynomial) - 1
        assert self.degree == _euler_phi(order) or order == 1
        # z^k reduced mod Phi_N for all k needed by mul (up to 2*deg-2)
        # and conj (up to N-1).
        self._power_table = self._build_powers(max(2 * self.degree - 1, order))
        self.zero = CycloScalar(self, (Fraction(0),) * self.degree)
        self.one = self.scalar(1)

    def _build_powers(self, count: int) -> list[tuple[Fraction, ...]]:
        d = self.degree
        powers = []
        cur = [Fraction(0)] * d
        cur[0] = Fraction(1)
        for _ in range(count):
            powers.append(tuple(cur))
            nxt = [Fraction(0)] + cur[: d - 1]
            lead = cur[d - 1]
            if lead:
                for j in range(d):
                    nxt[j] -= lead * self.minimal_polynomial[j]
            cur = nxt
        return powers

    def scalar(self, value: RationalLike) -> CycloScalar:
        coords = [Fraction(0)] * self.degree
        coords[0] = Fraction(value)
        return CycloScalar(self, tuple(coords))

    def zeta(self, power: int = 1) -> CycloScalar:
        """z^power as a reduced field element."""
        return CycloScalar(self, self._power_table[power % self.order])

    def from_coords(self, coords: Iterable[RationalLike]) -> CycloScalar:
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != self.degree:
            raise CycloError(
                f"expected {self.degree} coordinates, got {len(coords)}")
        return CycloScalar(self, coords)

    def __eq__(self, other):
        return isinstance(other, CycloField) and other.order == self.order

    def __hash__(self):
        return hash(("CycloField", self.order))

    def __repr__(self):
        return f"CycloField({self.order})"


class CycloScalar:
    """Immutable element of a CycloField."""

    __slots__ = ("field", "coords", "_hash")

    def __init__(self, field: CycloField, coords: tuple[Fraction, ...]):
        self.field = field
        self.coords = coords
        self._hash = None

    def _check(self, other: "CycloScalar") -> "CycloScalar":
        if isinstance(other, (int, Fraction)):
            return self.field.scalar(other)
        if not isinstance(other, CycloScalar):
            return NotImplemented
        if other.field != self.field:
            raise CycloError("operands belong to different cyclotomic fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return CycloScalar(
            self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return CycloScalar(
            self.field, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rsub__(self, other):
        return self.field.scalar(other) - self

    def __neg__(self):
        return CycloScalar(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if b:
                    prod[i + j] += a * b
        table = self.field._power_table
        out = list(prod[:d])
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                pk = table[k]
                for j in range(d):
                    out[j] += c * pk[j]
        return CycloScalar(self.field, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.field.scalar(other) * self.inv()

    def inv(self) -> "CycloScalar":
        """Multiplicative inverse via extended Euclid against Phi_N."""
        if self.is_zero():
            raise CycloError("division by zero in cyclotomic field")
        # Invariants: r0 = s0 * self (mod Phi), r1 = s1 * self (mod Phi).
        r0 = list(self.field.minimal_polynomial)
        r1 = _poly_trim(list(self.coords))
        s0 = [Fraction(0)]
        s1 = [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            s_new = list(s0)
            if len(s_new) < len(s1) + len(q) - 1:
                s_new += [Fraction(0)] * (len(s1) + len(q) - 1 - len(s_new))
            for i, qi in enumerate(q):
                if qi:
                    for j, sj in enumerate(s1):
                        s_new[i + j] -= qi * sj
            r0, r1 = r1, r
            s0, s1 = s1, _poly_trim(s_new)
        # r1 is a nonzero constant c, and s1 * self = c (mod Phi).
        c = r1[0]
        d = self.field.degree
        coords = [Fraction(0)] * d
        for i, s in enumerate(s1):
            coords[i] = s / c
        return CycloScalar(self.field, tuple(coords))

    def conj(self) -> "CycloScalar":
        """Complex conjugation: z^k -> z^(N-k mod N)."""
        n = self.field.order
        table = self.field._power_table
        d = self.field.degree
        out = [Fraction(0)] * d
        for k, a in enumerate(self.coords):
            if a:
                pk = table[(n - k) % n]
                for j in range(d):
                    out[j] += a * pk[j]
        return CycloScalar(self.field, tuple(out))

    def norm_squared(self) -> "CycloScalar":
        return self.conj() * self

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def is_one(self) -> bool:
        return self.coords[0] == 1 and all(a == 0 for a in self.coords[1:])

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise CycloError(f"{self} is not rational")
        return self.coords[0]

    def to_complex(self) -> complex:
        """Float embedding with z -> exp(2*pi*i/N)."""
        from cmath import exp, pi
        z = exp(2j * pi / self.field.order)
        return sum(float(a) * z ** k for k, a in enumerate(self.coords))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.scalar(other)
        if not isinstance(other, CycloScalar):
            return NotImplemented
        return self.field == other.field and self.coords == other.coords

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.order, self.coords))
        return self._hash

    def __repr__(self):
        return f"CycloScalar({self})"

    def __str__(self):
        return render_scalar(self)


def _render_rational(a: Fraction) -> str:
    return str(a)


def render_scalar(s: CycloScalar) -> str:
    """Textual form 'a0 + a1*z + a2*z^2 ...' with zero terms dropped."""
    parts = []
    for k, a in enumerate(s.coords):
        if a == 0:
            continue
        if k == 0:
            body = _render_rational(abs(a))
        else:
            zp = "z" if k == 1 else f"z^{k}"
            body = zp if abs(a) == 1 else f"{_render_rational(abs(a))}*{zp}"
        sign = "-" if a < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first_body = parts[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def parse_scalar(field: CycloField, text: str) -> CycloScalar:
    """Parse the grammar produced by render_scalar."""
    text = text.strip()
    if not text:
        raise CycloError("empty scalar")
    tokens = text.replace("+", " + ").replace("-", " - ").split()
    coords = [Fraction(0)] * field.degree
    sign = 1
    expect_term = True
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "+":
            sign = 1
            expect_term = True
            i += 1
            continue
        if tok == "-":
            if expect_term:
                sign = -sign
            else:
                sign = -1
            expect_term = True
            i += 1
            continue
        coef, power = _parse_term(tok)
        k = power % field.order
        base = field._power_table[k]
        for j in range(field.degree):
            coords[j] += sign * coef * base[j]
        sign = 1
        expect_term = False
        i += 1
    return CycloScalar(field, tuple(coords))


def _parse_term(tok: str) -> tuple[Fraction, int]:
    if "*" in tok:
        c, zp = tok.split("*", 1)
        return Fraction(c), _parse_power(zp)
    if tok.startswith("z"):
        return Fraction(1), _parse_power(tok)
    try:
        return Fraction(tok), 0
    except ValueError as exc:
        raise CycloError(f"bad scalar token {tok!r}") from exc


def _parse_power(zp: str) -> int:
    if zp == "z":
        return 1
    if zp.startswith("z^"):
        return int(zp[2:])
    raise CycloError(f"bad power token {zp!r}")
