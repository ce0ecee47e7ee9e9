"""Quasi-parabolic composition operators.

Two independent constructions of C_phi for maps phi(z1,z2) = (p1 z1 + psi1(z),
p2 z2 + psi2(z)) with bounded analytic psi_j of strictly positive imaginary
part:

* the norm-convergent double series
  ``C_phi = V_{p1,p2} * sum_{n,m} T_{tau1^n} T_{tau2^m} D_{th1,n} D_{th2,m}``
  with tau_j = i*alpha - rescaled psi_j and multipliers
  ``th_{j,n}(t) = (-i t_j)^n exp(-alpha t_j) / n!``, with a certified
  geometric remainder; and
* the direct double Cauchy-integral quadrature, used for cross-validation.

The shift parameter alpha comes from a minimax fit of i*alpha to the sampled
closure of the symbol image (golden-section over log alpha).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from .grids import (
    BOUNDARY_HEIGHT,
    BoundaryGrid,
    DomainError,
    FrequencyGrid,
    GridError,
    bochner_inverse_matrix,
    bochner_matrix,
    cayley,
    cayley_inv,
    grid_weights,
)
from .operators import (
    OperatorMatrix,
    dilation,
    op_norm,
    toeplitz_separable,
    weighted_matrix,
)
from .symbols import AnalyticSymbol, PointCloud, SepExpr, SepTerm, closure_image

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# safety inflation of the sampled symbol-image cloud before alpha selection
CLOUD_MARGIN = 1e-3


class SeriesError(ValueError):
    """Series construction cannot be certified."""


@dataclass
class QuasiParabolicMap:
    """phi(z1, z2) = (p1 z1 + psi1(z), p2 z2 + psi2(z))."""

    p1: float
    p2: float
    psi1: AnalyticSymbol
    psi2: AnalyticSymbol

    def __post_init__(self):
        if self.p1 <= 0 or self.p2 <= 0:
            raise DomainError("dilation parameters must be positive")

    def boundary_components(self):
        """Callables for phi_j^* on R^2 (broadcastable in both arguments)."""

        def phi1(x1, x2):
            return self.p1 * x1 + self.psi1(x1, x2)

        def phi2(x1, x2):
            return self.p2 * x2 + self.psi2(x1, x2)

        return phi1, phi2


# ---------------------------------------------------------------------------
# alpha selection


def delta_of_alpha(alpha: float, points: np.ndarray) -> float:
    """sup over the cloud of |i*alpha - z| / alpha."""
    return float(np.max(np.abs(1j * alpha - points)) / alpha)


def choose_alpha(
    cloud: PointCloud | np.ndarray,
    mode: str = "minimize",
    target_delta: Optional[float] = None,
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Pick the series shift alpha for a compact cloud in the half-plane.

    minimize: golden-section over log(alpha) of the minimax objective
    delta(alpha) = sup |i alpha - z| / alpha (each point's contribution is
    quasiconvex in alpha, so the sup is unimodal).  target-delta: smallest
    scan alpha achieving delta <= target_delta.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=complex)
    pts = pts.reshape(-1)
    if pts.size == 0:
        raise DomainError("alpha selection needs a nonempty cloud")
    if np.any(pts.imag <= 0):
        raise DomainError("cloud must lie strictly in the upper half-plane")
    ymin = float(np.min(pts.imag))
    rmax = float(np.max(np.abs(pts)))
    lo = math.log(ymin / 2.0)
    hi = math.log(4.0 * rmax**2 / ymin)
    if mode == "minimize":
        a = _golden_min(lambda u: delta_of_alpha(math.exp(u), pts), lo, hi, tol)
        alpha = math.exp(a)
        return alpha, delta_of_alpha(alpha, pts)
    if mode == "target-delta":
        if target_delta is None or not (0.0 < target_delta < 1.0):
            raise DomainError("target-delta mode needs target_delta in (0, 1)")
        for u in np.linspace(lo, hi, 4096):
            alpha = math.exp(u)
            d = delta_of_alpha(alpha, pts)
            if d <= target_delta:
                return alpha, d
        raise SeriesError(f"no alpha in bracket reaches delta <= {target_delta}")
    raise DomainError(f"unknown mode {mode!r}")


def _golden_min(f: Callable, a: float, b: float, tol: float) -> float:
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0


# ---------------------------------------------------------------------------
# series plan


@dataclass
class SeriesPlan:
    """alpha, delta, truncation orders and the certified remainder data."""

    alpha: float
    delta: float
    n1: int
    n2: int
    norm_estimates: dict = field(default_factory=dict)
    remainder: float = field(default=float("nan"))

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise SeriesError(f"delta = {self.delta} is not in (0, 1)")
        if math.isnan(self.remainder):
            self.remainder = remainder_bound(self)

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": self.alpha,
                "delta": self.delta,
                "n1": self.n1,
                "n2": self.n2,
                "remainder_bound": self.remainder,
                "norm_estimates": self.norm_estimates,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SeriesPlan":
        d = json.loads(text)
        return cls(
            d["alpha"], d["delta"], d["n1"], d["n2"],
            d.get("norm_estimates", {}), d.get("remainder_bound", float("nan")),
        )


def default_norm_estimates(delta: float, sup_tau1: float, sup_tau2: float) -> dict:
    """Geometric a-priori bounds used inside the remainder certificate.

    The one-axis helper maps have single geometric series, the full map a
    double one; Toeplitz factors are bounded by the sup of their symbols.
    """
    return {
        "T_tau1": sup_tau1,
        "T_tau2": sup_tau2,
        "C_phi1": 1.0 / (1.0 - delta),
        "C_phi2": 1.0 / (1.0 - delta),
        "C_phi": 1.0 / (1.0 - delta) ** 2,
    }


def remainder_bound(plan: SeriesPlan) -> float:
    """Sum of the three geometric tail bounds for the truncated series."""
    est = plan.norm_estimates
    for key in ("C_phi1", "C_phi2", "T_tau1", "T_tau2", "C_phi"):
        if key not in est:
            raise SeriesError(f"norm estimate {key!r} missing from plan")
    d = plan.delta
    r1 = est["C_phi1"] * d ** (plan.n1 + 1) / (1.0 - d)
    r2 = est["C_phi2"] * d ** (plan.n2 + 1) / (1.0 - d)
    r12 = est["T_tau1"] * est["T_tau2"] * est["C_phi"] * d ** (plan.n1 + plan.n2)
    return r1 + r2 + r12


def truncation_order(delta: float, tol: float, cap: int = 60) -> int:
    """Smallest N with delta^(N+1)/(1-delta) <= tol, capped."""
    n = math.ceil(math.log(tol * (1.0 - delta)) / math.log(delta))
    return int(min(max(n, 1), cap))


def plan_for_map(
    qmap: QuasiParabolicMap,
    tol: float = 1e-8,
    cap: int = 60,
    seed: int = 0,
    alpha: Optional[float] = None,
    n1: Optional[int] = None,
    n2: Optional[int] = None,
) -> SeriesPlan:
    """Build a certified series plan for a quasi-parabolic map.

    The compact set handed to the alpha search is the union of the sampled
    closure clouds of both (rescaled) symbols inflated by a small margin.
    """
    pts = np.concatenate(
        [
            closure_image(qmap.psi1, seed=seed).points,
            closure_image(qmap.psi2, seed=seed + 1).points,
        ]
    )
    # inflate: push points toward the real axis and outward by the margin
    pts = np.concatenate(
        [pts, pts - 1j * CLOUD_MARGIN, pts * (1.0 + CLOUD_MARGIN)]
    )
    pts = pts[pts.imag > 0]
    if alpha is None:
        alpha, delta = choose_alpha(pts, mode="minimize")
    else:
        delta = delta_of_alpha(alpha, pts)
    if delta >= 1.0:
        raise SeriesError(f"alpha selection failed: delta = {delta} >= 1")
    sup1 = float(np.max(np.abs(1j * alpha - pts)))
    sup2 = sup1
    est = default_norm_estimates(delta, sup1, sup2)
    order = truncation_order(delta, tol, cap)
    plan = SeriesPlan(alpha, delta, n1 if n1 is not None else order,
                      n2 if n2 is not None else order, est)
    return plan


# ---------------------------------------------------------------------------
# multiplier symbols


def vartheta_symbol(n: int, axis: int, alpha: float) -> Callable:
    """Multiplier (t1, t2) -> (-i t_axis)^n exp(-alpha t_axis) / n!."""
    if n < 0:
        raise DomainError("order must be nonnegative")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if axis not in (1, 2):
        raise DomainError("axis must be 1 or 2")
    fac = math.factorial(n)

    def fn(t1, t2=None):
        t = t1 if axis == 1 or t2 is None else t2
        t = np.asarray(t, dtype=float)
        return (-1j * t) ** n * np.exp(-alpha * t) / fac

    return fn


def vartheta_sup(n: int, alpha: float) -> float:
    """sup over t >= 0 of |vartheta_n|, i.e. (n / (e alpha))^n / n!."""
    if n == 0:
        return 1.0
    return (n / (math.e * alpha)) ** n / math.factorial(n)


# ---------------------------------------------------------------------------
# series construction


def _tau_expr(psi: AnalyticSymbol, alpha: float, p1: float, p2: float) -> SepExpr:
    """tau = i*alpha - psi(x1/p1, x2/p2) as a separable expression."""
    return SepExpr.constant(1j * alpha) - psi.expr.rescaled(p1, p2)


def _axis_diag(fn: Callable, axis: int, g1: FrequencyGrid, g2: FrequencyGrid) -> np.ndarray:
    t1 = np.repeat(g1.nodes, g2.size)
    t2 = np.tile(g2.nodes, g1.size)
    return np.asarray(fn(t1, t2), dtype=complex)


def build_series(
    qmap: QuasiParabolicMap,
    plan: SeriesPlan,
    fgrids: tuple,
    brule: Optional[BoundaryGrid] = None,
    growth_guard: int = 5,
) -> OperatorMatrix:
    """Truncated operator series for C_phi in the frequency representation.

    Uses the factorization sum_{n,m} T1^n T2^m D1n D2m =
    sum_n T1^n (sum_m T2^m D2m) D1n, which keeps the number of dense matrix
    products linear in the truncation order; when both Toeplitz factors are
    diagonal (constant symbols) everything collapses to elementwise
    arithmetic.  The result carries the plan's certified remainder bound and
    per-order increment norms in its meta dict.
    """
    if plan.delta >= 1.0:
        raise SeriesError("refusing to sum a series with delta >= 1")
    g1, g2 = fgrids
    tau1 = _tau_expr(qmap.psi1, plan.alpha, qmap.p1, qmap.p2)
    tau2 = _tau_expr(qmap.psi2, plan.alpha, qmap.p1, qmap.p2)
    if tau1.single_variable() in (0, 1) and tau2.single_variable() in (0, 2):
        # each tau sees only its own variable: the double series is the
        # tensor product of two one-variable series, summed axis by axis
        S1, tn1 = _axis_series(tau1.as_one_variable(), g1, plan.n1, plan.alpha, brule)
        S2, tn2 = _axis_series(tau2.as_one_variable(), g2, plan.n2, plan.alpha, brule)
        _growth_check(tn1, growth_guard)
        _growth_check(tn2, growth_guard)
        S = np.kron(S1, S2)
        term_norms = tn1
        if qmap.p1 != 1.0 or qmap.p2 != 1.0:
            V = dilation(qmap.p1, qmap.p2, fgrids)
            S = V.entries @ S
        return OperatorMatrix(
            S,
            fgrids,
            fgrids,
            "frequency",
            {
                "remainder_bound": plan.remainder,
                "alpha": plan.alpha,
                "delta": plan.delta,
                "term_norms": term_norms,
            },
        )
    T1 = toeplitz_separable(tau1, fgrids, brule)
    T2 = toeplitz_separable(tau2, fgrids, brule)
    d1 = [
        _axis_diag(vartheta_symbol(n, 1, plan.alpha), 1, g1, g2)
        for n in range(plan.n1 + 1)
    ]
    d2 = [
        _axis_diag(vartheta_symbol(m, 2, plan.alpha), 2, g1, g2)
        for m in range(plan.n2 + 1)
    ]
    n_dim = g1.size * g2.size
    diag_fast = T1.is_diagonal(1e-14) and T2.is_diagonal(1e-14)
    term_norms = []
    if diag_fast:
        t1d = np.diag(T1.entries)
        t2d = np.diag(T2.entries)
        inner = np.zeros(n_dim, dtype=complex)
        pow2 = np.ones(n_dim, dtype=complex)
        for m in range(plan.n2 + 1):
            inner += pow2 * d2[m]
            pow2 = pow2 * t2d
        total = np.zeros(n_dim, dtype=complex)
        pow1 = np.ones(n_dim, dtype=complex)
        for n in range(plan.n1 + 1):
            incr = pow1 * inner * d1[n]
            total += incr
            term_norms.append(float(np.max(np.abs(incr))))
            pow1 = pow1 * t1d
        S = np.diag(total)
    else:
        inner = np.zeros((n_dim, n_dim), dtype=complex)
        P2 = np.eye(n_dim, dtype=complex)
        for m in range(plan.n2 + 1):
            inner += P2 * d2[m][None, :]
            if m < plan.n2:
                P2 = P2 @ T2.entries
        S = np.zeros((n_dim, n_dim), dtype=complex)
        P1 = np.eye(n_dim, dtype=complex)
        for n in range(plan.n1 + 1):
            incr = P1 @ (inner * d1[n][None, :])
            S += incr
            term_norms.append(float(np.linalg.norm(incr)))
            if n < plan.n1:
                P1 = P1 @ T1.entries
    _growth_check(term_norms, growth_guard)
    if qmap.p1 != 1.0 or qmap.p2 != 1.0:
        V = dilation(qmap.p1, qmap.p2, fgrids)
        S = V.entries @ S
    return OperatorMatrix(
        S,
        fgrids,
        fgrids,
        "frequency",
        {
            "remainder_bound": plan.remainder,
            "alpha": plan.alpha,
            "delta": plan.delta,
            "term_norms": term_norms,
        },
    )


def _axis_series(
    tau_fn: Callable,
    g: FrequencyGrid,
    n_max: int,
    alpha: float,
    brule: Optional[BoundaryGrid],
) -> tuple[np.ndarray, list[float]]:
    """One-variable series sum_n T_tau^n D_n on a single frequency axis."""
    from .operators import toeplitz_halfplane

    A = toeplitz_halfplane(tau_fn, g, brule).entries
    t = g.nodes
    S = np.zeros((g.size, g.size), dtype=complex)
    P = np.eye(g.size, dtype=complex)
    norms = []
    for n in range(n_max + 1):
        d = (-1j * t) ** n * np.exp(-alpha * t) / math.factorial(n)
        incr = P * d[None, :]
        S += incr
        norms.append(float(np.linalg.norm(incr)))
        if n < n_max:
            P = P @ A
    return S, norms


def _growth_check(norms: Sequence[float], guard: int) -> None:
    if guard <= 0 or len(norms) <= guard + 3:
        return
    run = 0
    for a, b in zip(norms[3:], norms[4:]):
        run = run + 1 if b >= a and b > 0 else 0
        if run >= guard:
            raise SeriesError(
                "series increments grew for "
                f"{guard} consecutive orders; alpha/delta certificate suspect"
            )


def exact_constant_multiplier(a1: complex, a2: complex, fgrids: tuple) -> OperatorMatrix:
    """Closed-form collapse of the series for constant symbols:
    diag(exp(i (a1 t1 + a2 t2)))."""
    g1, g2 = fgrids
    t1 = np.repeat(g1.nodes, g2.size)
    t2 = np.tile(g2.nodes, g1.size)
    return OperatorMatrix(
        np.diag(np.exp(1j * (a1 * t1 + a2 * t2))), fgrids, fgrids, "frequency"
    )


# ---------------------------------------------------------------------------
# direct Cauchy-integral construction


def _boundary_phi_values(qmap_or_fns, bgrids: tuple):
    g1, g2 = bgrids
    x1 = g1.nodes[:, None] + 1j * BOUNDARY_HEIGHT
    x2 = g2.nodes[None, :] + 1j * BOUNDARY_HEIGHT
    if isinstance(qmap_or_fns, QuasiParabolicMap):
        phi1, phi2 = qmap_or_fns.boundary_components()
    else:
        phi1, phi2 = qmap_or_fns
    v1 = np.broadcast_to(np.asarray(phi1(x1, x2), dtype=complex), (g1.size, g2.size)).reshape(-1)
    v2 = np.broadcast_to(np.asarray(phi2(x1, x2), dtype=complex), (g1.size, g2.size)).reshape(-1)
    return v1, v2


def _cauchy_factors(qmap_or_fns, bgrids: tuple, min_im: float = 0.0):
    g1, g2 = bgrids
    v1, v2 = _boundary_phi_values(qmap_or_fns, bgrids)
    worst = min(float(np.min(v1.imag)), float(np.min(v2.imag)))
    if worst <= min_im:
        raise DomainError(
            f"boundary image dips to Im = {worst:.3g}; Cauchy construction "
            "requires strictly positive imaginary part"
        )
    A = (g1.weights[None, :] / (2.0j * np.pi)) / (g1.nodes[None, :] - v1[:, None])
    B = (g2.weights[None, :] / (2.0j * np.pi)) / (g2.nodes[None, :] - v2[:, None])
    return A, B


def direct_composition_apply(
    qmap_or_fns, bgrids: tuple, values: np.ndarray, chunk: int = 8192
) -> np.ndarray:
    """Apply the double Cauchy quadrature without materializing the full
    matrix: the kernel is rank-one in the column tensor index, and output
    rows are processed in chunks to bound memory."""
    g1, g2 = bgrids
    v1, v2 = _boundary_phi_values(qmap_or_fns, bgrids)
    worst = min(float(np.min(v1.imag)), float(np.min(v2.imag)))
    if worst <= 0.0:
        raise DomainError(
            f"boundary image dips to Im = {worst:.3g}; Cauchy construction "
            "requires strictly positive imaginary part"
        )
    u = np.asarray(values, dtype=complex).reshape(g1.size, g2.size)
    w1 = g1.weights / (2.0j * np.pi)
    w2 = g2.weights / (2.0j * np.pi)
    V1 = v1.reshape(g1.size, g2.size)
    V2 = v2.reshape(g1.size, g2.size)
    # when phi1 ignores x2 and phi2 ignores x1 the kernel tensor-factorizes
    if (
        np.max(np.abs(V1 - V1[:, :1])) < 1e-13
        and np.max(np.abs(V2 - V2[:1, :])) < 1e-13
    ):
        C1 = w1[None, :] / (g1.nodes[None, :] - V1[:, 0][:, None])
        C2 = w2[None, :] / (g2.nodes[None, :] - V2[0, :][:, None])
        return (C1 @ u @ C2.T).reshape(-1)
    out = np.empty(v1.size, dtype=complex)
    for lo in range(0, v1.size, chunk):
        hi = min(lo + chunk, v1.size)
        A = w1[None, :] / (g1.nodes[None, :] - v1[lo:hi, None])
        B = w2[None, :] / (g2.nodes[None, :] - v2[lo:hi, None])
        out[lo:hi] = np.einsum("aj,jk,ak->a", A, u, B, optimize=True)
    return out


def direct_composition(qmap_or_fns, bgrids: tuple) -> OperatorMatrix:
    """Dense boundary-representation matrix of the Cauchy-integral
    composition operator; meant for desk-scale grids."""
    g1, g2 = bgrids
    A, B = _cauchy_factors(qmap_or_fns, bgrids)
    entries = (A[:, :, None] * B[:, None, :]).reshape(
        g1.size * g2.size, g1.size * g2.size
    )
    return OperatorMatrix(entries, bgrids, bgrids, "boundary")


def hardy_test_family(
    bgrids: tuple, count: int = 12, seed: int = 0
) -> list[np.ndarray]:
    """Decaying rational Hardy test vectors on the tensor boundary grid."""
    rng = np.random.default_rng(seed)
    g1, g2 = bgrids
    out = []
    for _ in range(count):
        c1, c2 = rng.uniform(0.5, 2.0, size=2)
        s1, s2 = rng.uniform(-3.0, 3.0, size=2)
        f1 = 1.0 / (g1.nodes - s1 + 1j * c1) ** 2
        f2 = 1.0 / (g2.nodes - s2 + 1j * c2) ** 2
        out.append(np.kron(f1, f2))
    return out


def series_direct_residual(
    series_op: OperatorMatrix,
    qmap: QuasiParabolicMap,
    bgrids: tuple,
    count: int = 12,
    seed: int = 0,
) -> float:
    """Cross-validation metric between the series and direct constructions.

    Max over a family of decaying rational Hardy vectors u of the weighted
    frequency-space residual || S F u - F (C u) || / || F u ||.  Restricting
    to decaying vectors keeps the boundary quadrature honest; the Cauchy
    kernel applied to the non-decaying inverse transforms of raw frequency
    basis vectors would be dominated by truncation artifacts.
    """
    fg1, fg2 = series_op.domain_grid
    bg1, bg2 = bgrids
    F1 = bochner_matrix(bg1, fg1)
    F2 = bochner_matrix(bg2, fg2)
    wf = grid_weights(series_op.domain_grid)
    worst = 0.0
    for u in hardy_test_family(bgrids, count, seed):
        u2 = u.reshape(bg1.size, bg2.size)
        fu = (F1 @ u2 @ F2.T).reshape(-1)
        cu = direct_composition_apply(qmap, bgrids, u).reshape(bg1.size, bg2.size)
        fcu = (F1 @ cu @ F2.T).reshape(-1)
        resid = series_op.entries @ fu - fcu
        denom = float(np.sqrt(np.sum(wf * np.abs(fu) ** 2)))
        err = float(np.sqrt(np.sum(wf * np.abs(resid) ** 2))) / denom
        worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# disc-side operator


@dataclass
class DiscQuasiParabolicMap:
    """Bidisc self-map whose half-plane conjugate is z -> z + psi o cay."""

    psi1: AnalyticSymbol
    psi2: AnalyticSymbol

    def components(self):
        def phi1(w1, w2):
            p = self.psi1(w1, w2)
            return (2j * w1 + p * (1.0 - w1)) / (2j + p * (1.0 - w1))

        def phi2(w1, w2):
            p = self.psi2(w1, w2)
            return (2j * w2 + p * (1.0 - w2)) / (2j + p * (1.0 - w2))

        return phi1, phi2


def multiplier_expr(disc_map: DiscQuasiParabolicMap) -> SepExpr:
    """Separable expression of the intertwining Toeplitz multiplier
    (1 + u1)(1 + u2) with u_j = psi_j o cay2 / (z_j + i)."""
    inv1 = SepExpr([SepTerm(f1=lambda z: 1.0 / (z + 1j))])
    inv2 = SepExpr([SepTerm(f2=lambda z: 1.0 / (z + 1j))])
    u1 = disc_map.psi1.expr.composed_cayley() * inv1
    u2 = disc_map.psi2.expr.composed_cayley() * inv2
    one = SepExpr.constant(1.0)
    return (one + u1) * (one + u2)


def halfplane_conjugate(disc_map: DiscQuasiParabolicMap) -> QuasiParabolicMap:
    """The half-plane map z -> z + psi_j o cay2(z) conjugate to the disc map."""

    def lift(sym: AnalyticSymbol) -> AnalyticSymbol:
        return AnalyticSymbol(
            sym.expr.composed_cayley(),
            sym.im_lower_bound,
            sym.sup_bound,
            sym.continuity_class,
            f"({sym.source}) o cay2",
        )

    return QuasiParabolicMap(1.0, 1.0, lift(disc_map.psi1), lift(disc_map.psi2))


def disc_side_operator(
    disc_map: DiscQuasiParabolicMap,
    plan: SeriesPlan,
    fgrids: tuple,
    brule: Optional[BoundaryGrid] = None,
) -> OperatorMatrix:
    """Half-plane-side realization T_m C_phitilde of a bidisc composition
    operator, in the frequency representation."""
    qmap = halfplane_conjugate(disc_map)
    C = build_series(qmap, plan, fgrids, brule)
    Tm = toeplitz_separable(multiplier_expr(disc_map), fgrids, brule)
    out = OperatorMatrix(Tm.entries @ C.entries, fgrids, fgrids, "frequency", dict(C.meta))
    return out
