"""Truncated Laurent series in t with an optional first-power ln t channel.

A series represents

    sum_k c_k t^k + sum_k g_k t^k ln t,    min_order <= k < truncation_order

where every power at or above ``truncation_order`` is unknown (not zero).
Coefficients are either exact (``int``/``Fraction``) or floating point
(``complex``/``float``); the two can be mixed, in which case the result is
floating point.

Truncation rules, per operation:

* add/sub: window is [min(m_a, m_b), min(T_a, T_b)).
* mul: min order m_a + m_b, truncation min(m_a + T_b, m_b + T_a).
* invert: min order -m_a, same number of represented orders as the input.
* lift_elementary: min order 0, truncation equal to the input truncation.
* derivative: both bounds shift down by one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Sequence

from .errors import (
    BothLogBearing,
    DomainViolation,
    LogAtResidueOrder,
    LogBearingInput,
    OrderNotRepresented,
    ZeroLeadingCoefficient,
)

DEFAULT_WINDOW = 12
ZERO_RTOL = 1e-14

ELEMENTARY_TAGS = ("exp", "log1p", "sin", "cos", "sinh", "cosh")


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _exact_one(coeffs: Iterable) -> Number:
    return Fraction(1) if all(is_exact(c) for c in coeffs) else 1.0


def _recip(c):
    if is_exact(c):
        return Fraction(1) / Fraction(c)
    return 1.0 / c


def _clean(c):
    # keep floats as complex only when they carry an imaginary part
    if isinstance(c, complex) and c.imag == 0.0:
        return c.real
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    return c


@dataclass(frozen=True)
class LogLaurentSeries:
    """Immutable truncated log-Laurent series; see the module docstring."""

    min_order: int
    plain_coeffs: tuple
    log_coeffs: tuple
    truncation_order: int

    def __post_init__(self):
        plain = tuple(_clean(c) for c in self.plain_coeffs)
        logs = tuple(_clean(c) for c in self.log_coeffs)
        if len(plain) != len(logs):
            raise ValueError("plain and log coefficient lists must share one index range")
        if self.truncation_order != self.min_order + len(plain):
            raise ValueError("truncation_order must equal min_order + number of coefficients")
        object.__setattr__(self, "plain_coeffs", plain)
        object.__setattr__(self, "log_coeffs", logs)

    # construction ---------------------------------------------------------

    @classmethod
    def from_coeffs(
        cls,
        coeffs: Sequence,
        min_order: int = 0,
        log_coeffs: Sequence | None = None,
        truncation_order: int | None = None,
    ) -> "LogLaurentSeries":
        coeffs = list(coeffs)
        logs = list(log_coeffs) if log_coeffs is not None else [0] * len(coeffs)
        n = max(len(coeffs), len(logs))
        coeffs += [0] * (n - len(coeffs))
        logs += [0] * (n - len(logs))
        if truncation_order is None:
            truncation_order = min_order + n
        length = truncation_order - min_order
        if length < 0:
            raise ValueError("truncation_order below min_order")
        coeffs = (coeffs + [0] * length)[:length]
        logs = (logs + [0] * length)[:length]
        return cls(min_order, tuple(coeffs), tuple(logs), truncation_order)

    @classmethod
    def zero(cls, min_order: int = 0, truncation_order: int = DEFAULT_WINDOW) -> "LogLaurentSeries":
        n = truncation_order - min_order
        return cls(min_order, (Fraction(0),) * n, (Fraction(0),) * n, truncation_order)

    @classmethod
    def constant(cls, value, truncation_order: int = DEFAULT_WINDOW) -> "LogLaurentSeries":
        return cls.from_coeffs([value], 0, truncation_order=truncation_order)

    @classmethod
    def monomial(cls, power: int, coeff=1, truncation_order: int | None = None) -> "LogLaurentSeries":
        if truncation_order is None:
            truncation_order = power + DEFAULT_WINDOW
        return cls.from_coeffs([coeff], power, truncation_order=truncation_order)

    @classmethod
    def variable(cls, scale=1, truncation_order: int = DEFAULT_WINDOW) -> "LogLaurentSeries":
        """The series ``scale * t``."""
        return cls.monomial(1, scale, truncation_order)

    @classmethod
    def log_term(cls, power: int, coeff=1, truncation_order: int | None = None) -> "LogLaurentSeries":
        """The series ``coeff * t^power * ln t``."""
        if truncation_order is None:
            truncation_order = power + DEFAULT_WINDOW
        return cls.from_coeffs([0], power, log_coeffs=[coeff], truncation_order=truncation_order)

    # inspection -----------------------------------------------------------

    @property
    def orders(self) -> range:
        return range(self.min_order, self.truncation_order)

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.plain_coeffs + self.log_coeffs)

    @property
    def has_log(self) -> bool:
        return any(c != 0 for c in self.log_coeffs)

    def represents(self, k: int) -> bool:
        return k < self.truncation_order

    def coefficient(self, k: int):
        if k >= self.truncation_order:
            raise OrderNotRepresented(f"order {k} is at or beyond truncation order {self.truncation_order}")
        if k < self.min_order:
            return Fraction(0)
        return self.plain_coeffs[k - self.min_order]

    def log_coefficient(self, k: int):
        if k >= self.truncation_order:
            raise OrderNotRepresented(f"order {k} is at or beyond truncation order {self.truncation_order}")
        if k < self.min_order:
            return Fraction(0)
        return self.log_coeffs[k - self.min_order]

    def scale_of(self) -> float:
        vals = [abs(c) for c in self.plain_coeffs + self.log_coeffs]
        return max(vals) if vals else 0.0

    def _negligible(self, c, scale: float) -> bool:
        if is_exact(c):
            return c == 0
        return abs(c) <= ZERO_RTOL * scale

    def normalized(self) -> "LogLaurentSeries":
        """Drop leading coefficients that count as zero.

        Exact coefficients must be exactly zero; floating ones are dropped
        when below 1e-14 times the largest coefficient magnitude.
        """
        scale = self.scale_of()
        i = 0
        n = len(self.plain_coeffs)
        while i < n and self._negligible(self.plain_coeffs[i], scale) and self._negligible(self.log_coeffs[i], scale):
            i += 1
        if i == 0:
            return self
        return LogLaurentSeries(
            self.min_order + i, self.plain_coeffs[i:], self.log_coeffs[i:], self.truncation_order
        )

    def leading_order(self) -> int | None:
        s = self.normalized()
        return s.min_order if s.plain_coeffs else None

    def truncate(self, truncation_order: int) -> "LogLaurentSeries":
        if truncation_order >= self.truncation_order:
            return self
        n = max(truncation_order - self.min_order, 0)
        return LogLaurentSeries(
            self.min_order, self.plain_coeffs[:n], self.log_coeffs[:n], self.min_order + n
        )

    def extend_down(self, min_order: int) -> "LogLaurentSeries":
        """Same series with explicit zeros padded below the current min_order."""
        if min_order >= self.min_order:
            return self
        pad = (Fraction(0),) * (self.min_order - min_order)
        return LogLaurentSeries(min_order, pad + self.plain_coeffs, pad + self.log_coeffs, self.truncation_order)

    def map_coeffs(self, fn: Callable) -> "LogLaurentSeries":
        return LogLaurentSeries(
            self.min_order,
            tuple(fn(c) for c in self.plain_coeffs),
            tuple(fn(c) for c in self.log_coeffs),
            self.truncation_order,
        )

    def to_float(self) -> "LogLaurentSeries":
        return self.map_coeffs(lambda c: complex(c))

    def rescale(self, scale) -> "LogLaurentSeries":
        """Substitute t -> scale*t.

        A ln t term becomes ln t + ln(scale), so with a log channel present
        the scale must be a positive float.
        """
        plain = []
        logs = []
        for k, c, g in zip(self.orders, self.plain_coeffs, self.log_coeffs):
            f = scale ** k
            plain.append(c * f)
            logs.append(g * f)
        if any(g != 0 for g in logs):
            ln_s = math.log(scale)
            plain = [c + g * ln_s for c, g in zip(plain, logs)]
        return LogLaurentSeries(self.min_order, tuple(plain), tuple(logs), self.truncation_order)

    def evaluate(self, t):
        """Evaluate the represented terms at t (principal branch of ln)."""
        total = 0
        lt = None
        for k, c, g in zip(self.orders, self.plain_coeffs, self.log_coeffs):
            tk = t ** k
            if c != 0:
                total += complex(c) * tk
            if g != 0:
                if lt is None:
                    lt = cmath.log(t)
                total += complex(g) * tk * lt
        return total

    # arithmetic -----------------------------------------------------------

    def _binary_window(self, other: "LogLaurentSeries") -> tuple[int, int]:
        lo = min(self.min_order, other.min_order)
        hi = min(self.truncation_order, other.truncation_order)
        return lo, max(hi, lo)

    def __add__(self, other):
        if not isinstance(other, LogLaurentSeries):
            if isinstance(other, Number):
                other = LogLaurentSeries.constant(other, self.truncation_order)
            else:
                return NotImplemented
        lo, hi = self._binary_window(other)
        plain = []
        logs = []
        for k in range(lo, hi):
            plain.append(_get(self.plain_coeffs, self.min_order, k) + _get(other.plain_coeffs, other.min_order, k))
            logs.append(_get(self.log_coeffs, self.min_order, k) + _get(other.log_coeffs, other.min_order, k))
        return LogLaurentSeries(lo, tuple(plain), tuple(logs), hi)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other):
        if isinstance(other, Number):
            return self + (-other)
        if not isinstance(other, LogLaurentSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LogLaurentSeries):
            return mul(self, other)
        if isinstance(other, Number):
            return self.map_coeffs(lambda c: c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.map_coeffs(lambda c: other * c)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, LogLaurentSeries):
            return mul(self, invert(other.normalized()))
        if isinstance(other, Number):
            inv = _recip(other)
            return self.map_coeffs(lambda c: c * inv)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return invert(self.normalized()) * other
        return NotImplemented

    def shift(self, power: int) -> "LogLaurentSeries":
        """Multiply by t^power (exact, no truncation loss)."""
        return LogLaurentSeries(
            self.min_order + power, self.plain_coeffs, self.log_coeffs, self.truncation_order + power
        )

    def derivative(self) -> "LogLaurentSeries":
        return derivative(self)

    def residue(self):
        return residue(self)

    def __str__(self):
        parts = []
        for k, c, g in zip(self.orders, self.plain_coeffs, self.log_coeffs):
            if c != 0:
                parts.append(f"({c})*t^{k}")
            if g != 0:
                parts.append(f"({g})*t^{k}*ln(t)")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(t^{self.truncation_order})"


def _get(coeffs: tuple, min_order: int, k: int):
    i = k - min_order
    if 0 <= i < len(coeffs):
        return coeffs[i]
    return Fraction(0)


def mul(a: LogLaurentSeries, b: LogLaurentSeries) -> LogLaurentSeries:
    """Cauchy product; at most one factor may carry a log part."""
    if a.has_log and b.has_log:
        raise BothLogBearing("product of two log-bearing series would need ln^2 t terms")
    lo = a.min_order + b.min_order
    hi = min(a.min_order + b.truncation_order, b.min_order + a.truncation_order)
    hi = max(hi, lo)
    n = hi - lo
    if b.has_log:
        a, b = b, a
    ap, al, bp = a.plain_coeffs, a.log_coeffs, b.plain_coeffs
    plain = []
    logs = []
    a_log = a.has_log
    for j in range(n):
        s = Fraction(0)
        g = Fraction(0)
        for i in range(max(0, j - len(bp) + 1), min(j, len(ap) - 1) + 1):
            bj = bp[j - i]
            s += ap[i] * bj
            if a_log:
                g += al[i] * bj
        plain.append(s)
        logs.append(g)
    return LogLaurentSeries(lo, tuple(plain), tuple(logs), hi)


def invert(a: LogLaurentSeries) -> LogLaurentSeries:
    """Multiplicative inverse of a log-free series with nonzero leading term."""
    if a.has_log:
        raise LogBearingInput("cannot invert a series with a ln t part")
    if not a.plain_coeffs:
        raise ZeroLeadingCoefficient("empty series has no inverse")
    a0 = a.plain_coeffs[0]
    if a._negligible(a0, a.scale_of()):
        raise ZeroLeadingCoefficient(f"leading coefficient at order {a.min_order} is zero")
    inv0 = _recip(a0)
    cs = a.plain_coeffs
    out = [inv0]
    for j in range(1, len(cs)):
        s = Fraction(0)
        for i in range(1, j + 1):
            s += cs[i] * out[j - i]
        out.append(-s * inv0)
    zeros = (Fraction(0),) * len(out)
    return LogLaurentSeries(-a.min_order, tuple(out), zeros, -a.min_order + len(out))


def _taylor(tag: str, j: int) -> Fraction:
    f = Fraction(1, math.factorial(j))
    if tag == "exp":
        return f
    if tag == "sinh":
        return f if j % 2 == 1 else Fraction(0)
    if tag == "cosh":
        return f if j % 2 == 0 else Fraction(0)
    if tag == "sin":
        return f * (-1) ** ((j - 1) // 2) if j % 2 == 1 else Fraction(0)
    if tag == "cos":
        return f * (-1) ** (j // 2) if j % 2 == 0 else Fraction(0)
    if tag == "log1p":
        return Fraction((-1) ** (j + 1), j) if j >= 1 else Fraction(0)
    raise DomainViolation(f"unknown elementary function {tag!r}")


def lift_elementary(tag: str, a: LogLaurentSeries) -> LogLaurentSeries:
    """Formal composition f(a) for f in exp, log1p, sin, cos, sinh, cosh.

    The argument must vanish at t = 0 (leading order >= 1). ``exp`` also
    accepts a nonzero constant term, which is split off as a scalar factor.
    The result is plain (no ln t part) with min order 0.
    """
    if tag not in ELEMENTARY_TAGS:
        raise DomainViolation(f"unknown elementary function {tag!r}")
    if a.has_log:
        raise DomainViolation("elementary lift of a log-bearing series")
    T = a.truncation_order
    if T <= 0:
        raise DomainViolation("argument is not represented at order 0")
    a = a.extend_down(0)
    lo = a.leading_order()
    if lo is not None and lo < 0:
        raise DomainViolation(f"argument has a pole of order {-lo}")
    c0 = a.coefficient(0)
    if c0 != 0 and not a._negligible(c0, a.scale_of()) and tag != "exp":
        raise DomainViolation(f"{tag} lift needs an argument vanishing at t = 0")
    rest = list(a.plain_coeffs[-a.min_order + 1 :])
    b = LogLaurentSeries.from_coeffs([0] + rest, 0, truncation_order=T).normalized()
    one = _exact_one(a.plain_coeffs)
    m = b.min_order if b.plain_coeffs else T
    result = LogLaurentSeries.from_coeffs([_taylor(tag, 0) * one], 0, truncation_order=T)
    if m < T:
        power = LogLaurentSeries.from_coeffs([one], 0, truncation_order=T)
        j = 1
        while j * m < T:
            power = mul(power, b)
            coef = _taylor(tag, j)
            if coef != 0:
                result = result + power * coef
            j += 1
        result = result.truncate(T).extend_down(0)
        result = LogLaurentSeries.from_coeffs(
            [result.coefficient(k) for k in range(0, T)], 0, truncation_order=T
        )
    if tag == "exp" and c0 != 0:
        if is_exact(c0):
            raise DomainViolation("exp of a nonzero rational constant is not rational")
        result = result * cmath.exp(c0)
    return result


def residue(a: LogLaurentSeries):
    """Coefficient of t^-1 of the plain part."""
    if -1 >= a.truncation_order:
        raise OrderNotRepresented(f"order -1 is not represented (truncation order {a.truncation_order})")
    g = a.log_coefficient(-1)
    if g != 0 and not a._negligible(g, a.scale_of()):
        raise LogAtResidueOrder("a t^-1 ln t term makes the residue ill-defined")
    return a.coefficient(-1)


def derivative(a: LogLaurentSeries) -> LogLaurentSeries:
    """d/dt, with d(t^k ln t) = k t^(k-1) ln t + t^(k-1)."""
    plain = []
    logs = []
    for k, c, g in zip(a.orders, a.plain_coeffs, a.log_coeffs):
        plain.append(k * c + g)
        logs.append(k * g)
    return LogLaurentSeries(a.min_order - 1, tuple(plain), tuple(logs), a.truncation_order - 1)


def coefficient(a: LogLaurentSeries, k: int):
    return a.coefficient(k)


def log_series(a: LogLaurentSeries) -> LogLaurentSeries:
    """ln a for a log-free series with positive leading term.

    Writes a = lead * t^m * (1 + w) and returns m ln t + ln(lead) + log1p(w).
    The constant ln(lead) is only exact when lead == 1.
    """
    if a.has_log:
        raise DomainViolation("ln of a log-bearing series")
    s = a.normalized()
    if not s.plain_coeffs:
        raise ZeroLeadingCoefficient("ln of the zero series")
    m = s.min_order
    lead = s.plain_coeffs[0]
    w = s.shift(-m) / lead - 1
    out = lift_elementary("log1p", w)
    if lead != 1:
        if is_exact(lead):
            out = out.to_float()
        out = out + cmath.log(lead)
    if m != 0:
        out = out + LogLaurentSeries.log_term(0, m, out.truncation_order)
    return out


@dataclass(frozen=True)
class PiRational:
    """Exact value coeff * pi**pi_power with a rational coefficient."""

    coeff: Fraction
    pi_power: int = 0

    def __post_init__(self):
        c = Fraction(self.coeff)
        object.__setattr__(self, "coeff", c)
        if c == 0:
            object.__setattr__(self, "pi_power", 0)

    def __mul__(self, other):
        if isinstance(other, PiRational):
            return PiRational(self.coeff * other.coeff, self.pi_power + other.pi_power)
        if is_exact(other):
            return PiRational(self.coeff * other, self.pi_power)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiRational):
            return PiRational(self.coeff / other.coeff, self.pi_power - other.pi_power)
        if is_exact(other):
            return PiRational(self.coeff / Fraction(other), self.pi_power)
        return NotImplemented

    def __pow__(self, k: int):
        return PiRational(self.coeff ** k, self.pi_power * k)

    def __neg__(self):
        return PiRational(-self.coeff, self.pi_power)

    def __add__(self, other):
        if isinstance(other, PiRational):
            if other.coeff == 0:
                return self
            if self.coeff == 0:
                return other
            if other.pi_power != self.pi_power:
                raise ValueError("sum of different powers of pi is not a single PiRational")
            return PiRational(self.coeff + other.coeff, self.pi_power)
        return NotImplemented

    def __sub__(self, other):
        return self + (-other)

    def __float__(self):
        return float(self.coeff) * math.pi ** self.pi_power

    def __str__(self):
        if self.coeff == 0:
            return "0"
        if self.pi_power == 0:
            return str(self.coeff)
        pp = "pi" if self.pi_power == 1 else f"pi^{self.pi_power}"
        return f"{self.coeff}*{pp}"
