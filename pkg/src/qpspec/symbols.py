"""Catalog and evaluation of admissible analytic symbols.

A symbol is a bounded analytic function psi on the upper half-plane (or its
square) whose imaginary part stays above a certified epsilon > 0.  Symbols
are written in a small expression language over ``z1``, ``z2``, ``i``,
numeric constants and the builtin ``cay(z) = (z - i)/(z + i)``; parsing
produces, wherever possible, a sum-of-products decomposition
``sum_j f_j(z1) g_j(z2)`` which the Toeplitz machinery later relies on.

Also provides the boundary estimators feeding the spectral predictor:
cluster sets along sequences to a boundary point, the local essential range
at infinity, and sampled closures of the symbol's image.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .grids import BOUNDARY_HEIGHT, BoundaryGrid, DomainError, cayley

DEDUP_RESOLUTION = 1e-9


class SymbolError(ValueError):
    """Bad symbol specification or failed admissibility check."""


# ---------------------------------------------------------------------------
# separable expression algebra


def _const_fn(c):
    def fn(z):
        return np.full_like(np.asarray(z, dtype=complex), c)

    return fn


def _mul_fns(a, b):
    return lambda z: a(z) * b(z)


@dataclass
class SepTerm:
    """One product term c * f1(z1) * f2(z2); a missing factor means 1."""

    coeff: complex = 1.0
    f1: Optional[Callable] = None
    f2: Optional[Callable] = None

    def __call__(self, z1, z2):
        out = np.full(np.broadcast(z1, z2).shape, self.coeff, dtype=complex)
        if self.f1 is not None:
            out = out * self.f1(np.asarray(z1, dtype=complex))
        if self.f2 is not None:
            out = out * self.f2(np.asarray(z2, dtype=complex))
        return out


class SepExpr:
    """Finite sum of separable product terms over (z1, z2)."""

    def __init__(self, terms: Sequence[SepTerm]):
        self.terms = list(terms)

    @classmethod
    def constant(cls, c) -> "SepExpr":
        return cls([SepTerm(coeff=complex(c))])

    @classmethod
    def variable(cls, axis: int) -> "SepExpr":
        ident = lambda z: z
        return cls([SepTerm(f1=ident) if axis == 1 else SepTerm(f2=ident)])

    def __call__(self, z1, z2):
        out = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
        for t in self.terms:
            out = out + t(z1, z2)
        return out

    def __add__(self, other: "SepExpr") -> "SepExpr":
        return SepExpr(self.terms + other.terms)

    def __neg__(self) -> "SepExpr":
        return SepExpr([SepTerm(-t.coeff, t.f1, t.f2) for t in self.terms])

    def __sub__(self, other: "SepExpr") -> "SepExpr":
        return self + (-other)

    def __mul__(self, other: "SepExpr") -> "SepExpr":
        out = []
        for a in self.terms:
            for b in other.terms:
                f1 = a.f1 if b.f1 is None else (b.f1 if a.f1 is None else _mul_fns(a.f1, b.f1))
                f2 = a.f2 if b.f2 is None else (b.f2 if a.f2 is None else _mul_fns(a.f2, b.f2))
                out.append(SepTerm(a.coeff * b.coeff, f1, f2))
        return SepExpr(out)

    # -- structural queries -------------------------------------------------

    def single_variable(self) -> Optional[int]:
        """1 or 2 if every term depends on that axis only, 0 if constant."""
        has1 = any(t.f1 is not None for t in self.terms)
        has2 = any(t.f2 is not None for t in self.terms)
        if has1 and has2:
            return None
        return 1 if has1 else (2 if has2 else 0)

    def as_one_variable(self) -> Callable:
        axis = self.single_variable()
        if axis is None:
            raise SymbolError("expression depends on both variables")
        if axis in (0, 1):
            return lambda z: self(z, np.zeros_like(np.asarray(z)))
        return lambda z: self(np.zeros_like(np.asarray(z)), z)

    def try_invert(self) -> Optional["SepExpr"]:
        """Reciprocal, available when the expression lives on one axis."""
        axis = self.single_variable()
        if axis is None:
            return None
        g = self.as_one_variable()
        inv = lambda z: 1.0 / g(z)
        if axis == 0:
            return SepExpr.constant(1.0 / complex(self(0.0, 0.0)))
        return SepExpr([SepTerm(f1=inv) if axis == 1 else SepTerm(f2=inv)])

    def compose_one_variable(self, outer: Callable) -> Optional["SepExpr"]:
        """outer(self) when self depends on at most one axis."""
        axis = self.single_variable()
        if axis is None:
            return None
        g = self.as_one_variable()
        comp = lambda z: outer(g(z))
        if axis == 0:
            return SepExpr.constant(complex(outer(complex(self(0.0, 0.0)))))
        return SepExpr([SepTerm(f1=comp) if axis == 1 else SepTerm(f2=comp)])

    def rescaled(self, p1: float, p2: float) -> "SepExpr":
        """Expression (z1, z2) -> self(z1 / p1, z2 / p2)."""
        out = []
        for t in self.terms:
            f1 = None if t.f1 is None else (lambda z, f=t.f1: f(z / p1))
            f2 = None if t.f2 is None else (lambda z, f=t.f2: f(z / p2))
            out.append(SepTerm(t.coeff, f1, f2))
        return SepExpr(out)

    def composed_cayley(self) -> "SepExpr":
        """Expression (z1, z2) -> self(cayley(z1), cayley(z2))."""
        out = []
        for t in self.terms:
            f1 = None if t.f1 is None else (lambda z, f=t.f1: f(cayley(z)))
            f2 = None if t.f2 is None else (lambda z, f=t.f2: f(cayley(z)))
            out.append(SepTerm(t.coeff, f1, f2))
        return SepExpr(out)


# ---------------------------------------------------------------------------
# expression parser

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
    ast.Constant,
    ast.Name,
    ast.Call,
    ast.Load,
)


def parse_symbol_expression(text: str) -> SepExpr:
    """Parse the mini-language into a separable expression.

    Grammar: arithmetic (+ - * / ** with integer exponents) over ``z1``,
    ``z2``, ``i``, numeric literals, and ``cay(expr)`` where the call
    argument depends on at most one variable.  Division is only defined when
    the denominator depends on at most one variable.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise SymbolError(f"cannot parse symbol expression {text!r}: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise SymbolError(
                f"disallowed construct {type(node).__name__} in {text!r}"
            )
    return _build(tree.body)


def _build(node: ast.AST) -> SepExpr:
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float, complex)):
            raise SymbolError(f"non-numeric constant {node.value!r}")
        return SepExpr.constant(node.value)
    if isinstance(node, ast.Name):
        if node.id == "z1":
            return SepExpr.variable(1)
        if node.id == "z2":
            return SepExpr.variable(2)
        if node.id in ("i", "j", "I"):
            return SepExpr.constant(1j)
        raise SymbolError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp):
        inner = _build(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id != "cay":
            raise SymbolError("only the builtin cay(...) may be called")
        if len(node.args) != 1:
            raise SymbolError("cay takes one argument")
        arg = _build(node.args[0])
        out = arg.compose_one_variable(cayley)
        if out is None:
            raise SymbolError("cay argument must depend on at most one variable")
        return out
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _build(node.left)
            if not (
                isinstance(node.right, ast.Constant)
                and isinstance(node.right.value, int)
                and node.right.value >= 0
            ):
                raise SymbolError("** requires a nonnegative integer exponent")
            out = SepExpr.constant(1.0)
            for _ in range(node.right.value):
                out = out * base
            return out
        left = _build(node.left)
        right = _build(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            inv = right.try_invert()
            if inv is None:
                raise SymbolError("division by a genuinely two-variable expression")
            return left * inv
    raise SymbolError(f"unsupported node {type(node).__name__}")


# ---------------------------------------------------------------------------
# symbols


CONTINUITY_CLASSES = ("constant", "continuous-on-closure", "separable-sum")

_SPOT_CHECK_SAMPLES = 10_000


@dataclass
class AnalyticSymbol:
    """Admissible symbol: bounded analytic with Im >= im_lower_bound > 0."""

    expr: SepExpr
    im_lower_bound: float
    sup_bound: float
    continuity_class: str
    source: str = ""

    def __call__(self, z1, z2):
        return self.expr(z1, z2)

    @property
    def separable_terms(self):
        return self.expr.terms


def halfplane_samples(count: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-random sweep of H^2, stratified in height and extent."""
    eng = qmc.Halton(d=4, scramble=True, seed=seed)
    u = eng.random(count)
    x1 = np.tan(np.pi * (u[:, 0] - 0.5) * 0.999)
    x2 = np.tan(np.pi * (u[:, 1] - 0.5) * 0.999)
    y1 = 10.0 ** (4.0 * u[:, 2] - 2.0)
    y2 = 10.0 ** (4.0 * u[:, 3] - 2.0)
    return x1 + 1j * y1, x2 + 1j * y2


def make_symbol(
    expression: str,
    im_lower_bound: float,
    sup_bound: float,
    continuity_class: str,
    seed: int = 0,
) -> AnalyticSymbol:
    """Parse and admissibility-check a symbol specification."""
    if im_lower_bound <= 0:
        raise SymbolError("im_lower_bound must be positive")
    if continuity_class not in CONTINUITY_CLASSES:
        raise SymbolError(f"continuity_class must be one of {CONTINUITY_CLASSES}")
    expr = parse_symbol_expression(expression)
    z1, z2 = halfplane_samples(_SPOT_CHECK_SAMPLES, seed=seed)
    vals = expr(z1, z2)
    bad = np.argmin(vals.imag)
    if vals.imag[bad] < im_lower_bound - 1e-12:
        raise SymbolError(
            f"Im bound check failed for {expression!r}: Im psi = {vals.imag[bad]:.6g}"
            f" < {im_lower_bound} at z = ({z1[bad]:.6g}, {z2[bad]:.6g})"
        )
    worst = np.argmax(np.abs(vals))
    if np.abs(vals[worst]) > sup_bound + 1e-12:
        raise SymbolError(
            f"sup bound check failed for {expression!r}: |psi| = "
            f"{np.abs(vals[worst]):.6g} > {sup_bound} at z = "
            f"({z1[worst]:.6g}, {z2[worst]:.6g})"
        )
    return AnalyticSymbol(expr, im_lower_bound, sup_bound, continuity_class, expression)


def eval_boundary(sym: AnalyticSymbol, grids: tuple) -> np.ndarray:
    """Symbol values on the tensor boundary grid at height BOUNDARY_HEIGHT."""
    g1, g2 = grids
    z1 = g1.nodes[:, None] + 1j * BOUNDARY_HEIGHT
    z2 = g2.nodes[None, :] + 1j * BOUNDARY_HEIGHT
    vals = sym(z1, z2).reshape(-1)
    if np.min(vals.imag) < sym.im_lower_bound - 1e-6:
        raise SymbolError("boundary values violate the certified Im bound")
    return vals


# ---------------------------------------------------------------------------
# point clouds


@dataclass
class PointCloud:
    """Finite, deduplicated cloud of complex points with provenance."""

    points: np.ndarray
    label: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(-1)
        self.points = dedup_points(pts)

    def __len__(self):
        return self.points.size


def dedup_points(pts: np.ndarray, resolution: float = DEDUP_RESOLUTION) -> np.ndarray:
    """Deduplicate to the given resolution; sorted by (re, im)."""
    if pts.size == 0:
        return pts
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    keep = [pts[0]]
    for p in pts[1:]:
        if abs(p - keep[-1]) > resolution:
            keep.append(p)
    return np.array(keep)


# ---------------------------------------------------------------------------
# cluster sets and essential range


@dataclass(frozen=True)
class ClusterPlan:
    """Shell-sampling plan for cluster-set estimation."""

    shells: tuple = tuple(2.0**k for k in range(3, 14))
    samples_per_shell: int = 512
    seed: int = 0

    def __post_init__(self):
        if len(self.shells) < 3:
            raise SymbolError("cluster plan needs at least 3 shells")
        r = np.asarray(self.shells, dtype=float)
        ratios = r[1:] / r[:-1]
        if not (np.all(ratios > 1.0) or np.all(ratios < 1.0)):
            raise SymbolError("shells must grow or shrink monotonically")


def finite_target_plan(seed: int = 0) -> ClusterPlan:
    return ClusterPlan(tuple(2.0**-k for k in range(3, 14)), 512, seed)


def cluster_set(
    sym: AnalyticSymbol,
    target: str = "infinity",
    plan: Optional[ClusterPlan] = None,
) -> PointCloud:
    """Approximate the cluster set of psi at (inf, inf) on H^2 or (1,1) on D^2.

    target 'infinity': shells of growing modulus in the half-plane;
    target 'one': shells of shrinking distance to (1, 1) inside the bidisc
    (the symbol is then read as a function on the bidisc via composition
    with the inverse Cayley map of its half-plane incarnation -- callers on
    the disc side pass the half-plane symbol psi o cayley_inv themselves).
    """
    if plan is None:
        plan = ClusterPlan() if target == "infinity" else finite_target_plan()
    eng = qmc.Halton(d=4, scramble=True, seed=plan.seed)
    per_shell = []
    all_pts = []
    for shell in plan.shells:
        u = eng.random(plan.samples_per_shell)
        if target == "infinity":
            r1 = shell * (1.0 + u[:, 0])
            r2 = shell * (1.0 + u[:, 2])
            a1 = np.pi * (0.02 + 0.96 * u[:, 1])
            a2 = np.pi * (0.02 + 0.96 * u[:, 3])
            z1 = r1 * np.exp(1j * a1)
            z2 = r2 * np.exp(1j * a2)
        elif target == "one":
            rho1 = shell * (1.0 + u[:, 0])
            rho2 = shell * (1.0 + u[:, 2])
            b1 = (np.pi / 3.0) * (2.0 * u[:, 1] - 1.0)
            b2 = (np.pi / 3.0) * (2.0 * u[:, 3] - 1.0)
            z1 = 1.0 - rho1 * np.exp(1j * b1)
            z2 = 1.0 - rho2 * np.exp(1j * b2)
        else:
            raise SymbolError(f"unknown cluster target {target!r}")
        vals = sym(z1, z2)
        per_shell.append(
            {
                "shell": float(shell),
                "mean": complex(np.mean(vals)),
                "spread": float(np.max(np.abs(vals - np.mean(vals)))),
            }
        )
        all_pts.append(vals)
    # inner shells are convergence diagnostics only: cluster points are
    # limits along the target approach, so keep the outermost shells
    pts = np.concatenate(all_pts[-3:])
    return PointCloud(
        pts,
        label=f"cluster-set[{target}] of {sym.source or 'symbol'}",
        diagnostics={"shells": per_shell},
    )


def essential_range_at_infinity(
    boundary_field: np.ndarray,
    grids: tuple,
    cutoffs: Sequence[float],
    ball_radius: float,
) -> PointCloud:
    """Empirical local essential range of a boundary field at (inf, inf).

    A value z survives when, for every cutoff n in the list, the ball
    B(z, ball_radius) is hit by the field restricted to the joint tail
    {|x1| > n and |x2| > n} with positive empirical measure.
    """
    g1, g2 = grids
    cutoffs = sorted(float(c) for c in cutoffs)
    if not cutoffs:
        raise SymbolError("need at least one cutoff")
    if cutoffs[-1] >= min(g1.extent, g2.extent):
        raise SymbolError("grid extent must exceed the largest cutoff")
    field = np.asarray(boundary_field, dtype=complex).reshape(g1.size, g2.size)
    w2d = np.outer(g1.weights, g2.weights)
    mask_outer = (np.abs(g1.nodes)[:, None] > cutoffs[-1]) & (
        np.abs(g2.nodes)[None, :] > cutoffs[-1]
    )
    diagnostics = {}
    if not np.any(mask_outer & (w2d > 0)):
        diagnostics["empty_tail"] = True
        return PointCloud(np.array([]), "essential-range@inf", diagnostics)
    candidates = dedup_points(field[mask_outer], resolution=ball_radius / 4.0)
    survivors = []
    for z in candidates:
        ok = True
        for n in cutoffs:
            mask = (np.abs(g1.nodes)[:, None] > n) & (np.abs(g2.nodes)[None, :] > n)
            hits = np.abs(field[mask] - z) <= ball_radius
            if not np.any(hits) or float(np.sum(w2d[mask][hits])) <= 0.0:
                ok = False
                break
        if ok:
            survivors.append(z)
    return PointCloud(
        np.asarray(survivors), "essential-range@inf", diagnostics
    )


def closure_image(
    sym: AnalyticSymbol, sample_count: int = 4096, seed: int = 0
) -> PointCloud:
    """Sampled approximation of the closure of psi(H^2)."""
    if sample_count < 1000:
        raise SymbolError("closure_image needs at least 10^3 samples")
    z1, z2 = halfplane_samples(sample_count, seed=seed)
    vals = sym(z1, z2)
    if np.min(vals.imag) < sym.im_lower_bound - 1e-9:
        raise SymbolError("closure sample violates the certified Im bound")
    return PointCloud(vals, label=f"closure-image of {sym.source or 'symbol'}")
