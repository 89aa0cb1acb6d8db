# closed_forms.py
# Comments in English only
"""Closed-form expectations for Gaussian fields and random coverings."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.hermite_e import hermegauss
from numpy.typing import NDArray
from scipy import integrate, special

from config.settings import GAUSS_HERMITE_NODES, QUADRATURE_HALF_WIDTH, QUADRATURE_TOLERANCE
from field_sim import CovarianceModel, GridSpec, second_spectral_moment
from validation.errors import TdaConsistencyError, TdaInputError, TdaNumericError, UnsupportedFeatureError

logger = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
QUADRATURE_RULES: Tuple[str, ...] = ("adaptive", "gauss-hermite")
MONOTONICITY: Tuple[str, ...] = ("increasing", "decreasing", "general")


# ============================================================
# Hermite polynomials
# ============================================================

def hermite(n: int, x: float | NDArray) -> float | NDArray:
    """Probabilists' Hermite H_n, with H_{-1}(x) = phi(x)^{-1} (1 - Phi(x))."""
    if int(n) != n or n < -1:
        raise TdaInputError(f"Hermite degree must be an integer >= -1 (got {n}).")
    x_arr = np.asarray(x, dtype=float)
    if n == -1:
        # sqrt(pi/2) erfcx(x/sqrt2) is (1 - Phi(x)) / phi(x) without overflow
        out = math.sqrt(math.pi / 2.0) * special.erfcx(x_arr / math.sqrt(2.0))
    else:
        prev, cur = np.zeros_like(x_arr), np.ones_like(x_arr)
        for k in range(int(n)):
            prev, cur = cur, x_arr * cur - k * prev
        out = cur
    return float(out) if np.ndim(out) == 0 else out


def _phi(x: NDArray | float) -> NDArray:
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


# ============================================================
# Gaussian inner products
# ============================================================

@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "adaptive"
    nodes: int = GAUSS_HERMITE_NODES
    tolerance: float = QUADRATURE_TOLERANCE
    half_width: float = QUADRATURE_HALF_WIDTH
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.rule not in QUADRATURE_RULES:
            raise TdaInputError(f"quadrature rule must be one of {QUADRATURE_RULES}.")
        if self.nodes < 2 or self.tolerance <= 0 or self.half_width <= 0:
            raise TdaInputError("quadrature needs nodes >= 2 and positive tolerance and half-width.")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))


def _gauss_hermite(fn: Callable[[NDArray], NDArray], nodes: int) -> float:
    x, w = hermegauss(nodes)
    return float(np.sum(w * fn(x)) / _SQRT_2PI)


def _adaptive(fn: Callable[[NDArray], NDArray], q: QuadratureSpec, limit: int, epsabs: float) -> float:
    inner = sorted({b for b in q.breakpoints if -q.half_width < b < q.half_width})
    value, _ = integrate.quad(
        lambda t: float(fn(np.asarray(t)) * _phi(t)),
        -q.half_width,
        q.half_width,
        points=inner or None,
        epsabs=epsabs,
        epsrel=0.0,
        limit=limit,
    )
    return float(value)


def gaussian_inner_product(
    a: Callable[[NDArray], NDArray],
    b: Callable[[NDArray], NDArray],
    q: QuadratureSpec = QuadratureSpec(),
) -> float:
    """<a, b> = E[a(X) b(X)] for X ~ N(0, 1), checked against a refined quadrature."""

    def product(x: NDArray) -> NDArray:
        return np.asarray(a(x), dtype=float) * np.asarray(b(x), dtype=float)

    if q.rule == "gauss-hermite":
        estimate = _gauss_hermite(product, q.nodes)
        refined = _gauss_hermite(product, 2 * q.nodes)
    else:
        estimate = _adaptive(product, q, limit=200, epsabs=q.tolerance)
        refined = _adaptive(product, q, limit=400, epsabs=q.tolerance / 10.0)

    if not math.isfinite(refined) or abs(estimate - refined) > 10.0 * q.tolerance * max(1.0, abs(refined)):
        raise TdaNumericError(
            f"{q.rule} quadrature did not settle: {estimate!r} vs refined {refined!r}."
        )
    return refined


# ============================================================
# Lipschitz-Killing curvatures
# ============================================================

@dataclass(frozen=True)
class LKVector:
    values: Tuple[float, ...]

    def __getitem__(self, j: int) -> float:
        return self.values[j] if 0 <= j < len(self.values) else 0.0

    @property
    def dim(self) -> int:
        return len(self.values) - 1


def lk_box(dim: int, side: float, lambda2: float) -> LKVector:
    """L_j of [0, side]^dim under the metric induced by a field with second spectral moment lambda2."""
    if dim < 0 or side <= 0 or lambda2 <= 0:
        raise TdaInputError("lk_box needs dim >= 0, side > 0 and lambda2 > 0.")
    edge = side * math.sqrt(lambda2)
    return LKVector(tuple(math.comb(dim, j) * edge**j for j in range(dim + 1)))


def lk_torus(dim: int, side: float, lambda2: float) -> LKVector:
    """Flat torus: only the top curvature, the induced volume, is nonzero."""
    if dim < 1 or side <= 0 or lambda2 <= 0:
        raise TdaInputError("lk_torus needs dim >= 1, side > 0 and lambda2 > 0.")
    values = [0.0] * (dim + 1)
    values[dim] = (side * math.sqrt(lambda2)) ** dim
    return LKVector(tuple(values))


def lk_for_grid(spec: GridSpec, model: CovarianceModel) -> LKVector:
    lambda2 = second_spectral_moment(model)
    if spec.is_torus:
        return lk_torus(spec.dim, spec.side, lambda2)
    return lk_box(spec.dim, spec.side, lambda2)


# ============================================================
# Excursion sets
# ============================================================

def gaussian_minkowski_halfline(j: int, u: float | NDArray) -> float | NDArray:
    """M_j of [u, inf) under the standard Gaussian measure."""
    u_arr = np.asarray(u, dtype=float)
    if j == 0:
        out = special.ndtr(-u_arr)
    else:
        with np.errstate(invalid="ignore", over="ignore"):
            raw = hermite(j - 1, u_arr) * _phi(u_arr)
        out = np.where(np.isfinite(u_arr), raw, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def expected_ec_excursion(u: float | NDArray, lk: LKVector) -> float | NDArray:
    """E chi(f >= u) = sum_j (2 pi)^{-j/2} L_j M_j([u, inf))."""
    total = sum(
        (2.0 * math.pi) ** (-j / 2.0) * lk[j] * np.asarray(gaussian_minkowski_halfline(j, u))
        for j in range(lk.dim + 1)
    )
    return float(total) if np.ndim(total) == 0 else total


def flag_coefficient(n: int, j: int) -> float:
    """[n choose j] = C(n, j) w_n / (w_j w_{n-j}), w_k the volume of the unit k-ball."""
    if not (0 <= j <= n):
        raise TdaInputError(f"flag coefficient needs 0 <= j <= n (got n={n}, j={j}).")

    def log_ball(k: int) -> float:
        return 0.5 * k * math.log(math.pi) - float(special.gammaln(k / 2.0 + 1.0))

    log_value = (
        float(special.gammaln(n + 1) - special.gammaln(j + 1) - special.gammaln(n - j + 1))
        + log_ball(n) - log_ball(j) - log_ball(n - j)
    )
    return math.exp(log_value)


def expected_lk_excursion(i: int, u: float | NDArray, lk: LKVector) -> float | NDArray:
    """E L_i(f >= u) = sum_j [i+j choose j] (2 pi)^{-j/2} L_{i+j} M_j([u, inf))."""
    if not (0 <= i <= lk.dim):
        raise TdaInputError(f"curvature index {i} outside 0..{lk.dim}.")
    total = sum(
        flag_coefficient(i + j, j) * (2.0 * math.pi) ** (-j / 2.0) * lk[i + j]
        * np.asarray(gaussian_minkowski_halfline(j, u))
        for j in range(lk.dim - i + 1)
    )
    return float(total) if np.ndim(total) == 0 else total


# ============================================================
# Transforms and expected Euler integrals
# ============================================================

@dataclass(frozen=True)
class TransformSpec:
    """Piecewise-C1 G : R -> R; ``pieces[i]`` and ``derivatives[i]`` act between breakpoints."""

    breakpoints: Tuple[float, ...]
    pieces: Tuple[Callable[[NDArray], NDArray], ...]
    derivatives: Tuple[Callable[[NDArray], NDArray], ...]
    monotonicity: str = "general"
    label: str = "custom"

    def __post_init__(self) -> None:
        bps = tuple(float(b) for b in self.breakpoints)
        if list(bps) != sorted(set(bps)):
            raise TdaInputError("transform breakpoints must be strictly increasing.")
        if len(self.pieces) != len(bps) + 1 or len(self.derivatives) != len(bps) + 1:
            raise TdaInputError("a transform needs one piece and one derivative per interval.")
        if self.monotonicity not in MONOTONICITY:
            raise TdaInputError(f"monotonicity must be one of {MONOTONICITY}.")
        object.__setattr__(self, "breakpoints", bps)
        self._check_derivative_signs()

    def _intervals(self) -> List[Tuple[float, float]]:
        edges = [-QUADRATURE_HALF_WIDTH] + [b for b in self.breakpoints] + [QUADRATURE_HALF_WIDTH]
        return list(zip(edges[:-1], edges[1:]))

    def _check_derivative_signs(self) -> None:
        for k, (lo, hi) in enumerate(self._intervals()):
            if hi <= lo:
                continue
            interior = np.linspace(lo, hi, 35)[1:-1]
            signs = np.sign(np.asarray(self.derivatives[k](interior), dtype=float))
            nonzero = signs[signs != 0]
            if nonzero.size and np.any(nonzero != nonzero[0]):
                raise TdaInputError(f"derivative of G changes sign inside piece {k}; add a breakpoint.")
            if self.monotonicity == "increasing" and np.any(signs < 0):
                raise TdaInputError("transform declared increasing has a negative derivative.")
            if self.monotonicity == "decreasing" and np.any(signs > 0):
                raise TdaInputError("transform declared decreasing has a positive derivative.")

    def _piecewise(self, fns: Sequence[Callable[[NDArray], NDArray]], x: NDArray | float) -> NDArray:
        x_arr = np.asarray(x, dtype=float)
        which = np.searchsorted(np.asarray(self.breakpoints), x_arr, side="right")
        out = np.zeros_like(x_arr)
        for k, fn in enumerate(fns):
            mask = which == k
            if np.any(mask):
                out = np.where(mask, np.asarray(fn(x_arr), dtype=float), out)
        return out

    def G(self, x: NDArray | float) -> NDArray:
        return self._piecewise(self.pieces, x)

    def dG(self, x: NDArray | float) -> NDArray:
        return self._piecewise(self.derivatives, x)


def identity_transform() -> TransformSpec:
    return TransformSpec((), (lambda x: x,), (lambda x: np.ones_like(x),), "increasing", "identity")


def negation_transform() -> TransformSpec:
    return TransformSpec((), (lambda x: -x,), (lambda x: -np.ones_like(x),), "decreasing", "negation")


def power_transform(p: int) -> TransformSpec:
    """x -> x^p for odd p >= 1 (strictly increasing)."""
    if int(p) != p or p < 1 or p % 2 == 0:
        raise TdaInputError(f"power_transform needs an odd positive integer (got {p}).")
    p = int(p)
    return TransformSpec(
        (), (lambda x: x**p,), (lambda x: p * x ** (p - 1),), "increasing", "identity" if p == 1 else f"power{p}"
    )


def cube_transform() -> TransformSpec:
    return replace(power_transform(3), label="cube")


def square_transform() -> TransformSpec:
    return piecewise_transform(
        (0.0,), (lambda x: x**2, lambda x: x**2), (lambda x: 2.0 * x, lambda x: 2.0 * x), "general", "square"
    )


def abs_transform() -> TransformSpec:
    return piecewise_transform(
        (0.0,),
        (lambda x: -x, lambda x: x),
        (lambda x: -np.ones_like(x), lambda x: np.ones_like(x)),
        "general",
        "abs",
    )


def piecewise_transform(
    breakpoints: Sequence[float],
    functions: Sequence[Callable[[NDArray], NDArray]],
    derivatives: Sequence[Callable[[NDArray], NDArray]],
    monotonicity: str = "general",
    label: str = "custom",
) -> TransformSpec:
    return TransformSpec(tuple(breakpoints), tuple(functions), tuple(derivatives), monotonicity, label)


TRANSFORM_FACTORIES = {
    "identity": identity_transform,
    "negation": negation_transform,
    "cube": cube_transform,
    "square": square_transform,
    "abs": abs_transform,
}


def get_transform(label: str) -> TransformSpec:
    if label not in TRANSFORM_FACTORIES:
        raise KeyError(f"Transform '{label}' is not supported.")
    return TRANSFORM_FACTORIES[label]()


def _with_breakpoints(q: Optional[QuadratureSpec], transform: TransformSpec) -> QuadratureSpec:
    q = q if q is not None else QuadratureSpec()
    return replace(q, breakpoints=tuple(sorted(set(q.breakpoints) | set(transform.breakpoints))))


def _rotated_derivative(transform: TransformSpec, j: int) -> Callable[[NDArray], NDArray]:
    def fn(x: NDArray) -> NDArray:
        slope = transform.dG(x)
        return np.sign(slope) ** j * slope

    return fn


def expected_euler_integral_monotone(
    transform: TransformSpec, lk: LKVector, q: Optional[QuadratureSpec] = None
) -> float:
    """E integral G(f) for monotone G: E[G(X)] chi(M) + sum_j s_j L_j <H_j, G>/(2 pi)^{j/2}.

    s_j = (-1)^j for increasing G and 1 for decreasing G.
    """
    if transform.monotonicity == "general":
        raise TdaInputError("the monotone formula needs an increasing or decreasing transform.")
    q = _with_breakpoints(q, transform)
    increasing = transform.monotonicity == "increasing"
    total = lk[0] * gaussian_inner_product(lambda x: np.ones_like(x), transform.G, q)
    for j in range(1, lk.dim + 1):
        sign = (-1.0) ** j if increasing else 1.0
        total += sign * lk[j] * gaussian_inner_product(
            lambda x, j=j: hermite(j, x), transform.G, q
        ) / (2.0 * math.pi) ** (j / 2.0)
    return float(total)


def expected_euler_integral(
    transform: TransformSpec, lk: LKVector, q: Optional[QuadratureSpec] = None
) -> float:
    """E integral G(f) d chi for piecewise-C1 G, open convention.

    chi(M) E[G(X)] + sum_j (-1)^j L_j <H_{j-1}, sgn(G')^j G'> / (2 pi)^{j/2}.
    """
    if transform.label == "identity":
        return -lk[1] / _SQRT_2PI if lk.dim >= 1 else 0.0

    q = _with_breakpoints(q, transform)
    total = lk[0] * gaussian_inner_product(lambda x: np.ones_like(x), transform.G, q)
    for j in range(1, lk.dim + 1):
        total += ((-1.0) ** j) * lk[j] * gaussian_inner_product(
            lambda x, j=j: hermite(j - 1, x), _rotated_derivative(transform, j), q
        ) / (2.0 * math.pi) ** (j / 2.0)

    if transform.monotonicity != "general":
        monotone = expected_euler_integral_monotone(transform, lk, q)
        scale = max(1.0, abs(total), abs(monotone))
        if abs(total - monotone) > 1e3 * q.tolerance * scale:
            raise TdaConsistencyError(
                f"general and monotone expectations disagree: {total!r} vs {monotone!r}."
            )
    return float(total)


def expected_euler_integral_general(
    transform: TransformSpec, lk: LKVector, k: int = 1, q: Optional[QuadratureSpec] = None
) -> float:
    if k != 1:
        raise UnsupportedFeatureError("vector-valued fields (k > 1) are not supported.")
    return expected_euler_integral(transform, lk, q)


def expected_barcode_ec(level: float, lk: LKVector, chi_m: int) -> float:
    """E of the barcode Euler characteristic clipped at ``level``."""
    if level == -math.inf:
        return 0.0
    if not math.isfinite(level):
        raise TdaInputError("clip level must be finite or -inf.")
    phi_a = float(_phi(level))
    head = chi_m * (phi_a + level * float(special.ndtr(level)))
    tail = sum(
        (2.0 * math.pi) ** (-j / 2.0) * lk[j] * hermite(j - 2, -level)
        for j in range(1, lk.dim + 1)
    )
    return float(head + phi_a * tail)


# ============================================================
# Random coverings of the torus
# ============================================================

COVERAGE_BASE_CASES: Tuple[str, ...] = ("gap-count", "printed")


@dataclass(frozen=True)
class CoveragePolynomial:
    """Integer coefficients c_k of tau^k, k = 0..n-1."""

    n: int
    d: int
    coefficients: Tuple[int, ...]

    def __call__(self, tau: float | Fraction) -> float:
        exact = Fraction(tau)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * exact + c
        return float(acc)


def coverage_polynomial(n: int, d: int, base_case: str = "gap-count") -> CoveragePolynomial:
    """E chi of the union of n random cubes of volume tau on the flat d-torus.

    The circle case is the expected number of gaps, n (1 - tau)^{n-1}; each extra
    dimension maps p(tau) to d/dtau [tau p(tau)]. ``printed`` starts instead from
    n (1 - tau^{n-1}).
    """
    if n < 1 or d < 1:
        raise TdaInputError("coverage polynomial needs n >= 1 and d >= 1.")
    if base_case not in COVERAGE_BASE_CASES:
        raise TdaInputError(f"base_case must be one of {COVERAGE_BASE_CASES}.")

    if base_case == "printed":
        coefficients = [0] * n
        coefficients[0] += n
        coefficients[n - 1] -= n
    else:
        coefficients = [n * math.comb(n - 1, k) * (-1) ** k for k in range(n)]

    for _ in range(d - 1):
        # d/dtau (tau * tau^k) = (k + 1) tau^k
        coefficients = [(k + 1) * c for k, c in enumerate(coefficients)]
    return CoveragePolynomial(n, d, tuple(coefficients))


def torus_coverage_expectation(n: int, d: int, tau: float) -> float:
    if not (0.0 < tau < 1.0):
        raise TdaInputError(f"tau must lie in (0, 1) (got {tau}).")
    return coverage_polynomial(n, d)(tau)


def coverage_scale(tau: float) -> float:
    """Number of cubes around which coverage becomes likely: (1/tau) log(1/tau)."""
    if not (0.0 < tau < 1.0):
        raise TdaInputError(f"tau must lie in (0, 1) (got {tau}).")
    return math.log(1.0 / tau) / tau


# ============================================================
# Tables for the CLI
# ============================================================

EXPECTED_QUANTITIES: Tuple[str, ...] = (
    "ec", "lk", "minkowski", "barcode-ec", "euler-integral", "coverage", "coverage-scale",
)


def expected_ec_curve(levels: Sequence[float], lk: LKVector) -> NDArray:
    return np.asarray(expected_ec_excursion(np.asarray(levels, dtype=float), lk), dtype=float)


def expected_table(
    quantity: str,
    spec: GridSpec,
    model: CovarianceModel,
    levels: Sequence[float],
    *,
    transform: str = "identity",
    n_balls: int = 5,
    tau: float = 0.3,
    coverage_dim: int = 2,
) -> pd.DataFrame:
    """Long table (quantity, param, value) of closed-form values."""
    lk = lk_for_grid(spec, model)
    chi_m = 0 if spec.is_torus else 1
    rows: List[Tuple[str, str, float]] = []

    if quantity == "ec":
        rows = [("ec", f"u={u:g}", float(v)) for u, v in zip(levels, expected_ec_curve(levels, lk))]
    elif quantity == "lk":
        rows = [
            (f"L{i}", f"u={u:g}", float(expected_lk_excursion(i, u, lk)))
            for i in range(lk.dim + 1)
            for u in levels
        ]
    elif quantity == "minkowski":
        rows = [
            (f"M{j}", f"u={u:g}", float(gaussian_minkowski_halfline(j, u)))
            for j in range(lk.dim + 1)
            for u in levels
        ]
    elif quantity == "barcode-ec":
        rows = [("barcode-ec", f"a={a:g}", expected_barcode_ec(a, lk, chi_m)) for a in levels]
    elif quantity == "euler-integral":
        rows = [("euler-integral", f"G={transform}", expected_euler_integral(get_transform(transform), lk))]
    elif quantity == "coverage":
        rows = [
            ("coverage", f"n={k},d={coverage_dim},tau={tau:g}", torus_coverage_expectation(k, coverage_dim, tau))
            for k in range(1, n_balls + 1)
        ]
    elif quantity == "coverage-scale":
        rows = [("coverage-scale", f"tau={tau:g}", coverage_scale(tau))]
    else:
        raise KeyError(f"Quantity '{quantity}' is not supported.")

    logger.info("expected table '%s': %d rows", quantity, len(rows))
    return pd.DataFrame(rows, columns=["quantity", "param", "value"])
