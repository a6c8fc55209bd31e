"""Scalar kernels for fading-averaged error probabilities.

Everything here reduces to averages of Gaussian tail probabilities over
the Erlang-distributed combining gain Z = ||g||^2 (shape n):

* erlang_fade_average(a, n) is the exact average of Q(sqrt(a Z)).
* The two-term exponential approximation q_approx(x) turns products of
  Q terms into exponential mixtures in Z, which average in closed form
  through erlang_exp_average; qpsk_sep_triplet and the cell-probability
  routines are built that way.
* cell_probability_quadrature integrates the same cell integrand with
  the exact Q and serves as the validation oracle for the closed route.

Decision-cell integrands use SIGNED boundary offsets relative to the
transmitted point; for negative arguments the approximation is evaluated
as 1 - q_approx(|x|), mirroring Q(-x) = 1 - Q(x).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .channel import erlang_pdf
from .constellation import Constellation


def q_exact(x):
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2))."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return out if out.ndim else float(out)


def q_approx(x):
    """Two-term exponential approximation of Q(x).

    exp(-x^2/2)/12 + exp(-2 x^2/3)/4 for x >= 0, and 1 minus that value
    at |x| for x < 0. Gives 1/3 at x = 0 (the approximation is not exact
    there) and inherits the approximation's 10-30% relative error on
    small probabilities; it exists to make products of Q terms average
    in closed form.
    """
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        base = np.exp(-0.5 * x_arr * x_arr) / 12.0 + np.exp(-(2.0 / 3.0) * x_arr * x_arr) / 4.0
    out = np.where(x_arr >= 0, base, 1.0 - base)
    return out if out.ndim else float(out)


def erlang_exp_average(c: float, n: int) -> float:
    """Average of e^(-c Z) for Erlang-n Z: (1 + c)^(-n). Requires c > -1."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("shape n must be a positive integer")
    if not c > -1.0:
        raise ValueError(f"integral diverges for c = {c} <= -1")
    return float((1.0 + c) ** (-n))


def erlang_fade_average(a: float, n: int) -> float:
    """Exact average of Q(sqrt(a Z)) over Erlang-n fading.

    Evaluated through the all-positive form
        f = p^n * sum_{k<n} C(n-1+k, k) q^k,
        p = 1 / ((a+2)(1+mu)),  q = (1+mu)/2,  mu = sqrt(a/(a+2)),
    which is algebraically identical to the alternating binomial form
    but free of the catastrophic cancellation that form suffers for
    large n (the alternating form underflows to 0 where the true value
    is ~1e-36).
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("shape n must be a positive integer")
    if not a >= 0:
        raise ValueError("a must be nonnegative")
    if math.isinf(a):
        return 0.0
    mu = math.sqrt(a / (a + 2.0))
    p = 1.0 / ((a + 2.0) * (1.0 + mu))
    q = 0.5 * (1.0 + mu)
    acc = 0.0
    qk = 1.0
    for k in range(n):
        acc += math.comb(n - 1 + k, k) * qk
        qk *= q
    return p**n * acc


def erlang_fade_quadrature(a: float, n: int) -> float:
    """Adaptive-quadrature oracle for erlang_fade_average."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("shape n must be a positive integer")
    if not a >= 0:
        raise ValueError("a must be nonnegative")
    lam = 1.0 + a / 2.0
    peak = max((n - 1) / lam, 1e-12)
    zmax = (n + 800.0) / lam

    def integrand(z):
        return q_exact(math.sqrt(a * z)) * erlang_pdf(z, n)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val = quad(integrand, 0.0, zmax, points=[peak], limit=500,
                   epsabs=1e-300, epsrel=1e-12)[0]
    return val


def qpsk_sep_triplet(a: float, n: int) -> tuple[float, float, float]:
    """Closed-form distribution of the QPSK error distance under fading.

    Returns (P[d=0], P[d=2], P[d=2 sqrt(2)]) for a QPSK decision at
    fading-averaged SINR parameter a with n-fold combining, built on the
    two-term exponential approximation. Each base is kept as a ratio so
    no intermediate overflows for large a or n; the three probabilities
    sum to 1 by construction.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("shape n must be a positive integer")
    if not a >= 0:
        raise ValueError("a must be nonnegative")
    e1 = (1.0 / (1.0 + a)) ** n
    e2 = (2.0 / (2.0 + a)) ** n
    e3 = (3.0 / (3.0 + 2.0 * a)) ** n
    e4 = (6.0 / (6.0 + 7.0 * a)) ** n
    e5 = (3.0 / (3.0 + 4.0 * a)) ** n
    p_same = 1.0 + e1 / 144.0 - e2 / 6.0 - e3 / 2.0 + e4 / 24.0 + e5 / 16.0
    p_adj = -e1 / 72.0 + e2 / 6.0 + e3 / 2.0 - e4 / 12.0 - e5 / 8.0
    p_diag = e1 / 144.0 + e4 / 24.0 + e5 / 16.0
    return p_same, p_adj, p_diag


@dataclass(frozen=True)
class ExpMixture:
    """Finite mixture c0 + sum_i c_i e^(-r_i z) with rates r_i >= 0."""

    terms: tuple[tuple[float, float], ...]  # (coef, rate)

    @staticmethod
    def from_terms(pairs) -> "ExpMixture":
        merged: dict[float, float] = {}
        for coef, rate in pairs:
            merged[rate] = merged.get(rate, 0.0) + coef
        return ExpMixture(tuple((c, r) for r, c in sorted(merged.items()) if c != 0.0))

    def __sub__(self, other: "ExpMixture") -> "ExpMixture":
        return ExpMixture.from_terms(
            list(self.terms) + [(-c, r) for c, r in other.terms])

    def __mul__(self, other: "ExpMixture") -> "ExpMixture":
        prods = [(c1 * c2, r1 + r2) for c1, r1 in self.terms for c2, r2 in other.terms]
        return ExpMixture.from_terms(prods)

    def erlang_average(self, n: int) -> float:
        return float(sum(c * erlang_exp_average(r, n) for c, r in self.terms))


def q_term_mixture(offset: float, gain: float) -> ExpMixture:
    """Q_approx(offset * sqrt(gain z)) as an exponential mixture in z."""
    if offset == np.inf:
        return ExpMixture(())
    if offset == -np.inf:
        return ExpMixture(((1.0, 0.0),))
    r_half = 0.5 * gain * offset * offset
    r_two_thirds = (2.0 / 3.0) * gain * offset * offset
    if offset >= 0:
        return ExpMixture.from_terms([(1.0 / 12.0, r_half), (0.25, r_two_thirds)])
    return ExpMixture.from_terms(
        [(1.0, 0.0), (-1.0 / 12.0, r_half), (-0.25, r_two_thirds)])


def _cell_offsets(c: Constellation, tx: complex, cell_i: int, cell_q: int):
    if not 0 <= cell_i < c.m_i:
        raise ValueError(f"cell_i {cell_i} out of range for {c!r}")
    if not 0 <= cell_q < c.m_q:
        raise ValueError(f"cell_q {cell_q} out of range for {c!r}")
    u = (c.boundaries_i[cell_i] - tx.real, c.boundaries_i[cell_i + 1] - tx.real)
    v = (c.boundaries_q[cell_q] - tx.imag, c.boundaries_q[cell_q + 1] - tx.imag)
    return u, v


def _check_gain_n(gain: float, n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError("shape n must be a positive integer")
    if not gain >= 0:
        raise ValueError("gain must be nonnegative")


def _clamp_probability(value: float, context: str) -> float:
    if value >= 0.0:
        return value
    if value < -1e-6:
        raise RuntimeError(f"{context}: probability {value} is far below zero")
    if value < -1e-12:
        warnings.warn(f"{context}: clamping {value} to 0", RuntimeWarning)
    return 0.0


def cell_probability_closed(tx: complex, cell_i: int, cell_q: int,
                            c: Constellation, gain: float, n: int) -> float:
    """Closed-form probability that tx is detected in cell (cell_i, cell_q).

    Each axis contributes a bracket of approximated Q terms at the signed
    boundary offsets scaled by sqrt(gain z); the bracket product expands
    into an exponential mixture that averages exactly over Erlang-n
    fading. Cell families over one tx sum to 1 by telescoping.
    """
    _check_gain_n(gain, n)
    (u_lo, u_hi), (v_lo, v_hi) = _cell_offsets(c, complex(tx), cell_i, cell_q)
    bracket_i = q_term_mixture(u_lo, gain) - q_term_mixture(u_hi, gain)
    bracket_q = q_term_mixture(v_lo, gain) - q_term_mixture(v_hi, gain)
    value = (bracket_i * bracket_q).erlang_average(n)
    return _clamp_probability(value, "cell_probability_closed")


def cell_probability_quadrature(tx: complex, cell_i: int, cell_q: int,
                                c: Constellation, gain: float, n: int) -> float:
    """Oracle for cell_probability_closed using the exact Q function."""
    _check_gain_n(gain, n)
    (u_lo, u_hi), (v_lo, v_hi) = _cell_offsets(c, complex(tx), cell_i, cell_q)

    def q_signed(offset, z):
        if offset == np.inf:
            return 0.0
        if offset == -np.inf:
            return 1.0
        return q_exact(offset * math.sqrt(gain * z))

    def integrand(z):
        bi = q_signed(u_lo, z) - q_signed(u_hi, z)
        bq = q_signed(v_lo, z) - q_signed(v_hi, z)
        return bi * bq * erlang_pdf(z, n)

    zmax = n + 50.0 * math.sqrt(n) + 50.0
    hints = sorted({min(max(n - 1.0, 1e-6), 0.9 * zmax),
                    min(1.0 / (1.0 + gain), 0.9 * zmax)})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val = quad(integrand, 0.0, zmax, points=hints, limit=300,
                   epsabs=1e-12, epsrel=1e-10)[0]
    return val
