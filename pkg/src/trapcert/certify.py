"""Per-box certificates: quasimode norms, inf-sup bound, resolvent floor.

For a box of side ell with k*ell = pi*sqrt(n), the product Dirichlet mode
u(x) = prod_i sin(k x_i / sqrt(n)) has fully explicit norms: the squared
wavenumber-weighted H1 norm over the box, and the squared normal-flux norm
through the aperture [0, eps*ell]^(n-1) in the bottom face.  Their ratio
drives an upper bound on the inf-sup constant of the exterior problem,

    beta <= c_n * eps^(3(n-1)/2),
    c_n  = 2^((n-1)/2) pi^(n-3/2) / (3^((n-1)/2) n^(3/4)),

whose reciprocal, by the choice of eps, reproduces the resolvent threshold
sqrt(pi) n^(3/4) (1 + 2k sqrt(2k^2 a^2 + a)) up to roundoff.  Inverting the
threshold through the resolvent functional calculus yields a certified
lower bound c_lb on the cut-off resolvent norm which must exceed the target
a with positive margin.  The bounds are uniform in the cut-off radius, so a
single record certifies every R larger than the circumradius of the
arrangement.

The trace inequality used in the flux estimate is checked separately on
separable polynomial-times-sine test functions with closed-form integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

_R_NOTE = "uniform in R above the circumradius"


class CertifyError(ValueError):
    """A certificate precondition or invariant failed."""


# -------------------------------------------------------------------
# quasimode norms
# -------------------------------------------------------------------

@dataclass(frozen=True)
class QuasimodeNorms:
    """Squared norms of the product Dirichlet mode of one box."""

    j: int
    h1k_norm_sq: float
    flux_norm_sq: float
    flux_cubic_ub: float


def _s_minus_sin(s: float) -> float:
    """s - sin(s), series below s = 1/2 to dodge the cancellation."""
    if s < 0.5:
        s2 = s * s
        return s * s2 * (1.0 / 6 - s2 * (1.0 / 120 - s2 * (1.0 / 5040
                         - s2 * (1.0 / 362880 - s2 / 39916800))))
    return s - math.sin(s)


def quasimode_norms(n: int, k: float, ell: float, eps: float,
                    j: int = 0) -> QuasimodeNorms:
    """Closed-form norms; requires the resonance relation k*ell = pi*sqrt(n)
    (to 1e-12 relative), which makes the mode an exact Dirichlet eigenmode."""
    if n < 2:
        raise CertifyError(f"dimension must be >= 2, got {n}")
    if not (k > 0.0 and ell > 0.0 and 0.0 < eps < 1.0):
        raise CertifyError(f"need k, ell > 0 and eps in (0,1), got {k}, {ell}, {eps}")
    target = math.pi * math.sqrt(n)
    if abs(k * ell - target) > 1e-12 * target:
        raise CertifyError(
            f"k*ell = {k * ell!r} violates the resonance relation pi*sqrt(n)"
        )
    h1k = k * k * ell ** n / 2.0 ** (n - 1)
    s = 2.0 * k * ell * eps / math.sqrt(n)
    flux = (math.sqrt(n) / (4.0 * k)) ** (n - 3) * _s_minus_sin(s) ** (n - 1) / 16.0
    cubic = ((k * ell * eps) ** (3 * (n - 1))
             / (3.0 ** (n - 1) * k ** (n - 3) * float(n) ** n))
    return QuasimodeNorms(j=j, h1k_norm_sq=h1k, flux_norm_sq=flux,
                          flux_cubic_ub=cubic)


# -------------------------------------------------------------------
# inf-sup bound and resolvent floor
# -------------------------------------------------------------------

def infsup_upper(n: int, eps: float) -> float:
    """c_n * eps^(3(n-1)/2), the aperture-driven inf-sup upper bound."""
    if n < 2:
        raise CertifyError(f"dimension must be >= 2, got {n}")
    if not 0.0 < eps < 1.0:
        raise CertifyError(f"eps must be in (0,1), got {eps}")
    c_n = (2.0 ** ((n - 1) / 2.0) * math.pi ** (n - 1.5)
           / (3.0 ** ((n - 1) / 2.0) * n ** 0.75))
    return c_n * eps ** (1.5 * (n - 1))


def _threshold(n: int, k: float, a: float) -> float:
    """sqrt(pi) n^(3/4) (1 + 2k sqrt(2k^2 a^2 + a)); by construction of the
    aperture fraction this equals 1/infsup_upper up to roundoff."""
    return (math.sqrt(math.pi) * n ** 0.75
            * (1.0 + 2.0 * k * math.sqrt(2.0 * k * k * a * a + a)))


def resolvent_lower(threshold: float, k: float) -> Tuple[float, float]:
    """Invert 'resolvent norm exceeds threshold' into lower bounds.

    Returns (c_prime_lb, c_lb): the bound on the derived constant
    (threshold - 1)/(2k), then the positive root C of 2 k^2 C^2 + C = S
    with S = c_prime_lb^2, evaluated in the rationalized form
    2S / (1 + sqrt(1 + 8 k^2 S)) which stays accurate for small S.  Both
    clamp at zero when the threshold carries no information (threshold <= 1).
    """
    if k <= 0.0:
        raise CertifyError(f"wavenumber must be positive, got {k}")
    c_prime = max(0.0, (threshold - 1.0) / (2.0 * k))
    s = c_prime * c_prime
    c_lb = 2.0 * s / (1.0 + math.sqrt(1.0 + 8.0 * k * k * s))
    return c_prime, c_lb


@dataclass(frozen=True)
class CertRecord:
    """One certified box: inputs, both routes to the inf-sup bound, and the
    resolvent floor with its margin over the target."""

    j: int
    k: float
    a: float
    eps: float
    infsup_ub: float
    infsup_ub_inv_identity: float
    c_prime_lb: float
    c_lb: float
    margin: float
    r_note: str = _R_NOTE


def certify_geometry(boxes: Sequence, sched=None) -> Tuple[CertRecord, ...]:
    """Certify every box of a built arrangement.

    Each record passes three gates or the whole call fails:
    the closed-form norms accept the box (resonance relation), the two
    routes to the inf-sup bound agree to 1e-9 relative, and the resolvent
    floor exceeds the target with positive margin.  `sched` is accepted for
    signature symmetry with the geometry certificates; the boxes carry all
    needed values.
    """
    records: List[CertRecord] = []
    for box in boxes:
        n = len(box.translation)
        k, a, eps, ell = box.wavenumber, box.target, box.gap, box.side
        quasimode_norms(n, k, ell, eps, j=box.j)  # validates the box
        ub = infsup_upper(n, eps)
        inv = _threshold(n, k, a)
        if abs(1.0 / ub - inv) > 1e-9 * inv:
            raise CertifyError(
                f"box {box.j}: inf-sup routes disagree, 1/ub = {1.0 / ub!r} "
                f"vs identity {inv!r}"
            )
        c_prime, c_lb = resolvent_lower(inv, k)
        margin = c_lb - a
        if not margin > 0.0:
            raise CertifyError(
                f"box {box.j}: resolvent floor {c_lb!r} does not clear "
                f"target {a!r}"
            )
        # the floor must also clear the target through the defining relation
        if not 2.0 * k * k * c_lb * c_lb + c_lb > 2.0 * k * k * a * a + a:
            raise CertifyError(f"box {box.j}: floor fails the defining relation")
        records.append(CertRecord(j=box.j, k=k, a=a, eps=eps, infsup_ub=ub,
                                  infsup_ub_inv_identity=inv,
                                  c_prime_lb=c_prime, c_lb=c_lb, margin=margin))
    return tuple(records)


# -------------------------------------------------------------------
# trace inequality on separable test functions
# -------------------------------------------------------------------

@dataclass(frozen=True)
class TraceTest:
    """Separable test function on [0, a]^n:
    prod_{i<n} sin(pi p_i x_i / a) * (1 - x_n/a)^q."""

    p: Tuple[int, ...]
    q: int


def _trace_norms(n: int, a: float, test: TraceTest) -> Tuple[float, float, float]:
    """(trace_sq, v_sq, grad_sq) in closed form.

    All three are products of one-dimensional integrals:
    int sin^2 = a/2 (or 0 for p=0), int cos^2 = a/2 (or a for p=0),
    int (1-x/a)^(2q) = a/(2q+1), int (1-x/a)^(2q-2) = a/(2q-1).
    """
    s_fac = [a / 2.0 if p > 0 else 0.0 for p in test.p]
    c_fac = [a / 2.0 if p > 0 else a for p in test.p]
    iq0 = a / (2 * test.q + 1)
    iq1 = a / (2 * test.q - 1)
    trace_sq = math.prod(s_fac)
    v_sq = trace_sq * iq0
    grad_sq = trace_sq * test.q ** 2 / (a * a) * iq1
    for i, p in enumerate(test.p):
        rest = math.prod(s_fac[:i] + s_fac[i + 1:])
        grad_sq += (math.pi * p / a) ** 2 * c_fac[i] * rest * iq0
    return trace_sq, v_sq, grad_sq


def trace_inequality_residual(n: int, a: float, test: TraceTest,
                              quad_points: int = 24) -> Tuple[float, float]:
    """(lhs, rhs) of the boundary-trace inequality for the separable test:
    lhs = squared trace norm on the face x_n = 0, rhs = 2 ||v|| ||grad v||.

    The closed forms are cross-checked against Gauss-Legendre quadrature of
    each one-dimensional factor with `quad_points` nodes (>= 8 so the
    oscillatory factors are resolved); disagreement beyond 1e-10 relative
    raises, as does a violated inequality.
    """
    if n < 2:
        raise CertifyError(f"dimension must be >= 2, got {n}")
    if a <= 0.0:
        raise CertifyError(f"cube side must be positive, got {a}")
    if len(test.p) != n - 1:
        raise CertifyError(f"need {n - 1} frequencies, got {len(test.p)}")
    if any(p < 0 for p in test.p) or test.q < 1:
        raise CertifyError("frequencies must be >= 0 and the power >= 1")
    if quad_points < 8:
        raise CertifyError(f"need at least 8 quadrature points, got {quad_points}")

    trace_sq, v_sq, grad_sq = _trace_norms(n, a, test)
    lhs = trace_sq
    rhs = 2.0 * math.sqrt(v_sq) * math.sqrt(grad_sq)

    x, w = np.polynomial.legendre.leggauss(quad_points)
    t = 0.5 * a * (x + 1.0)
    wt = 0.5 * a * w

    def quad(vals: np.ndarray) -> float:
        return float(wt @ vals)

    s_fac = [quad(np.sin(math.pi * p * t / a) ** 2) for p in test.p]
    c_fac = [quad(np.cos(math.pi * p * t / a) ** 2) for p in test.p]
    iq0 = quad((1.0 - t / a) ** (2 * test.q))
    iq1 = quad((1.0 - t / a) ** (2 * test.q - 2))
    q_trace = math.prod(s_fac)
    q_v = q_trace * iq0
    q_grad = q_trace * test.q ** 2 / (a * a) * iq1
    for i, p in enumerate(test.p):
        rest = math.prod(s_fac[:i] + s_fac[i + 1:])
        q_grad += (math.pi * p / a) ** 2 * c_fac[i] * rest * iq0
    scale = max(abs(v_sq), abs(grad_sq), a ** n)
    for closed, numeric in ((trace_sq, q_trace), (v_sq, q_v), (grad_sq, q_grad)):
        if abs(closed - numeric) > 1e-10 * max(abs(closed), scale * 1e-6):
            raise CertifyError(
                f"closed form {closed!r} disagrees with quadrature {numeric!r}"
            )

    if lhs > rhs + 1e-12 * max(1.0, rhs):
        raise CertifyError(f"trace inequality violated: {lhs!r} > {rhs!r}")
    return lhs, rhs
