"""Parameter formulas (k, ell, q, eps) as ceilings of real monomials."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .sampling import hop_budget

Monomial = list[tuple[int, Fraction]]


def ceil_monomial(terms: Monomial) -> int:
    """ceil(prod b**e) for positive integers b and rational exponents e.

    Computed in floating point, except that when the value sits within
    1e-9 of an integer the comparison with that integer is redone exactly
    (raise both sides to the common denominator of the exponents).
    """
    terms = [(int(b), Fraction(e)) for b, e in terms if Fraction(e) != 0 and b != 1]
    if not terms:
        return 1
    value = math.exp(sum(float(e) * math.log(b) for b, e in terms))
    m = round(value)
    if m < 1 or abs(value - m) > 1e-9 * max(1.0, value):
        return math.ceil(value)
    L = math.lcm(*(e.denominator for _, e in terms))
    # compare m^L with prod b^(e L); exponents may be negative
    num, den = 1, 1
    for b, e in terms:
        p = int(e * L)
        if p >= 0:
            num *= b ** p
        else:
            den *= b ** (-p)
    lhs = m ** L * den
    if lhs == num:
        return m
    return m if num < lhs else m + 1


def cm(*pairs) -> int:
    """Shorthand: cm(n, '3/4', d, '-1/2') = ceil(n^(3/4) d^(-1/2)), at least 1."""
    terms = [(pairs[j], Fraction(pairs[j + 1])) for j in range(0, len(pairs), 2)]
    return max(1, ceil_monomial(terms))


VARIANTS = ("base", "gather", "virtualizing", "multi_source")


@dataclass(frozen=True)
class MainParams:
    k: int
    h: int
    ell: int
    q: int
    variant: str
    c_h: float = 3.0


def choose_parameters(n: int, d_hat: int, variant: str = "base", kappa: int = 1,
                      c_h: float = 3.0) -> MainParams:
    """Sampling size k, bucket width ell and granularity q for the main algorithm.

    base:          k = n^(3/4) D^(-3/4),   ell = n^(1/2) D^(1/2),   q = n^(1/4) D^(-1/4)
    gather:        k = K^(-2/7) n^(3/7),   ell = K^(-1/2) n^(5/7),  q = K^(4/7) n^(1/7)
    virtualizing:  k = n^(3/4) D^(-1/2),   ell = K^(-1/3) n^(1/2) D^(1/3),
                   q = K^(2/3) n^(1/4) D^(-1/6)
    multi_source:  k = n^(3/4) K^(-1/2),   ell = n^(1/2),           q = n^(1/2) K^(-1/2)
    with K the number of sources. Everything is at least 1 and k <= n.
    """
    if n < 2 or d_hat < 1 or kappa < 1:
        raise ValueError("need n >= 2, d_hat >= 1, kappa >= 1")
    if variant == "base":
        k, ell, q = cm(n, "3/4", d_hat, "-3/4"), cm(n, "1/2", d_hat, "1/2"), cm(n, "1/4", d_hat, "-1/4")
    elif variant == "gather":
        k = cm(kappa, "-2/7", n, "3/7")
        ell = cm(kappa, "-1/2", n, "5/7")
        q = cm(kappa, "4/7", n, "1/7")
    elif variant == "virtualizing":
        k = cm(n, "3/4", d_hat, "-1/2")
        ell = cm(kappa, "-1/3", n, "1/2", d_hat, "1/3")
        q = cm(kappa, "2/3", n, "1/4", d_hat, "-1/6")
    elif variant == "multi_source":
        k, ell, q = cm(n, "3/4", kappa, "-1/2"), cm(n, "1/2"), cm(n, "1/2", kappa, "-1/2")
    else:
        raise ValueError(f"unknown parameter variant {variant!r}")
    k = min(k, n)
    return MainParams(k, hop_budget(n, k, c_h), ell, q, variant, c_h)


@dataclass(frozen=True)
class VariantChoice:
    name: str                  # queue | gather | nonrecursive | recursive
    eps: Fraction | None = None


def recursion_eps(k: float, d_hat: float, kappa: float = 1) -> float:
    """eps with k^(3 eps) = kappa^(-1/2) d_hat^(1/2)."""
    target = 0.5 * (math.log(d_hat) - math.log(kappa))
    if k <= 1:
        return math.inf
    return target / (3.0 * math.log(k))


def select_virtual_variant(n_vprime: int, r: int, d_hat: int, kappa: int = 1,
                           n: int | None = None) -> VariantChoice:
    """Pick the virtual-graph SSSP algorithm for the given regime.

    Small D-hat (at most ceil(log2 n_V')^2) uses the queue algorithm. Otherwise
    eps solves k^(3 eps) = kappa^(-1/2) D^(1/2) with k = n_V'; gathering wins
    when kappa >= D, eps > 1/2 or D > n^(9/10) (n defaults to n_V'), the
    queue algorithm when eps is tiny, and otherwise the cheapest of the
    three cost estimates.
    """
    n_vprime, r, d_hat, kappa = max(1, n_vprime), max(1, r), max(1, d_hat), max(1, kappa)
    n_total = n if n is not None else n_vprime
    if d_hat <= math.ceil(math.log2(max(n_vprime, 2))) ** 2:
        return VariantChoice("queue")
    eps = recursion_eps(n_vprime, d_hat, kappa)
    if kappa >= d_hat or eps > 0.5 or d_hat > n_total ** 0.9:
        return VariantChoice("gather")
    if eps < 1 / 8:
        return VariantChoice("queue")
    eps_q = Fraction(eps).limit_denominator(24)
    costs = {
        "gather": kappa * n_vprime ** 2 + d_hat,
        "recursive": kappa ** (1 / 3) * n_vprime * d_hat ** (2 / 3),
        "queue": kappa * n_vprime + n_vprime * d_hat,
    }
    best = min(costs, key=lambda k: (costs[k], k))
    return VariantChoice(best, eps_q if best == "recursive" else None)
