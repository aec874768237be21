"""Floating-point dynamics: Green functions, escape classification, slices.

All orbit computations truncate the limit ``d^-n log ||f^n(z)||`` at the
first iterate leaving the ball of radius R. The truncation error is reported
as ``C_R * d^-n`` with ``C_R = log 2 + d log(1 + 1/R)``; points that never
leave within the iteration budget get value 0 and the tail bound
``d^-N log R``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .automorphism import PolyMap

log = logging.getLogger(__name__)

OVERFLOW_NORM = 1e100
ROW_CHUNK = 16


class NotRegular(ValueError):
    """Green functions need a map of degree >= 2."""


@dataclass(frozen=True)
class GreenOptions:
    radius: float = 1e4
    max_iter: int = 200

    def __post_init__(self):
        if not self.radius > 1:
            raise ValueError("escape radius must exceed 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class GreenEstimate:
    value: float
    iterations_used: int
    escaped: bool
    error_bound: float


@dataclass(frozen=True)
class Escaped:
    n: int


@dataclass(frozen=True)
class Bounded:
    n: int


class FloatMap:
    """A PolyMap compiled to complex-double term lists.

    Each component is evaluated as a sum over its terms in graded-lex order
    (highest first), each term being ``coef * prod(z_j ** e_j)``.
    """

    def __init__(self, components: Sequence[Sequence[tuple[complex, tuple]]], degree: int):
        self.components = [list(c) for c in components]
        self.k = len(self.components)
        self.degree = degree
        self._max_exp = [
            max([e[j] for comp in self.components for _, e in comp] + [0]) for j in range(self.k)
        ]

    @classmethod
    def from_polymap(cls, F: PolyMap) -> "FloatMap":
        if F.nparams:
            raise ValueError("cannot compile a parametric map")
        comps = [[(complex(c), e) for e, c in p.sorted_terms()] for p in F.components]
        return cls(comps, F.degree())

    def __call__(self, z: Sequence[complex]) -> tuple[complex, ...]:
        # powers by repeated multiplication, matching eval_array bit for bit
        powers = []
        for j, x in enumerate(z):
            p = [1, complex(x)]
            for _ in range(2, self._max_exp[j] + 1):
                p.append(p[-1] * x)
            powers.append(p)
        out = []
        for comp in self.components:
            total = 0j
            for coef, e in comp:
                t = coef
                for j, n in enumerate(e):
                    if n:
                        t = t * powers[j][n]
                total = total + t
            out.append(total)
        return tuple(out)

    def eval_array(self, Z: np.ndarray) -> np.ndarray:
        """Evaluate on an array of shape (k, n)."""
        powers = []
        for j in range(self.k):
            p = [None, Z[j]]
            for _ in range(2, self._max_exp[j] + 1):
                p.append(p[-1] * Z[j])
            powers.append(p)
        out = np.zeros_like(Z)
        for i, comp in enumerate(self.components):
            total = np.zeros(Z.shape[1], dtype=complex)
            for coef, e in comp:
                t = np.full(Z.shape[1], coef, dtype=complex)
                for j, n in enumerate(e):
                    if n:
                        t = t * powers[j][n]
                total = total + t
            out[i] = total
        return out


def _as_floatmap(F) -> FloatMap:
    return F if isinstance(F, FloatMap) else FloatMap.from_polymap(F)


def distortion_constant(d: int, R: float) -> float:
    return math.log(2) + d * math.log1p(1 / R)


def effective_radius(F: FloatMap, R: float) -> float:
    """R capped so that one more step cannot overflow a double."""
    cap = min(OVERFLOW_NORM, 10.0 ** (300 // max(F.degree, 1)))
    if R > cap:
        log.info("escape radius %.3g rescaled to %.3g", R, cap)
        return cap
    return R


def escape_radius_min(F, directions: int = 10_000, seed: int = 0, max_power: int = 12) -> float:
    """Smallest 10^p with ||F(w)|| >= 2||w|| on random directions at ||w|| = 10^p.

    Falls back to 1e4 when no power up to ``10^max_power`` works.
    """
    F = _as_floatmap(F)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((F.k, directions)) + 1j * rng.standard_normal((F.k, directions))
    U /= np.linalg.norm(U, axis=0)
    for p in range(1, max_power + 1):
        R = 10.0**p
        if R > effective_radius(F, R):
            break
        with np.errstate(all="ignore"):
            norms = np.linalg.norm(F.eval_array(R * U), axis=0)
        if np.all(norms >= 2 * R):
            return R
    return 1e4


def _norm(w) -> float:
    # same scaled formula as _column_norms, so scalar and batch agree bitwise
    a = [abs(x) for x in w]
    m = max(a)
    if m == 0 or not math.isfinite(m):
        return m
    return m * math.sqrt(sum((x / m) ** 2 for x in a))


def _orbit_escape(F: FloatMap, z, R: float, N: int) -> tuple[int, float] | None:
    w = tuple(complex(x) for x in z)
    for n in range(N + 1):
        r = _norm(w)
        if r > R:
            return n, r
        if n == N:
            return None
        w = F(w)
    return None


def _estimate(d: int, R: float, N: int, hit) -> GreenEstimate:
    if hit is None:
        return GreenEstimate(0.0, N, False, d ** (-N) * math.log(R))
    n, r = hit
    if not math.isfinite(r):
        raise OverflowError("orbit overflowed before reaching the escape radius")
    return GreenEstimate(max(math.log(r), 0.0) / d**n, n, True, distortion_constant(d, R) / d**n)


def green_plus(F, d: int, z: Sequence[complex], opts: GreenOptions | None = None) -> GreenEstimate:
    """Truncated ``d^-n log ||F^n(z)||`` at the first exit from the R-ball."""
    opts = opts or GreenOptions()
    F = _as_floatmap(F)
    if d < 2 or F.degree < 2:
        raise NotRegular("Green functions need degree >= 2")
    if len(z) != F.k:
        raise ValueError(f"point has {len(z)} coordinates, expected {F.k}")
    R = effective_radius(F, opts.radius)
    return _estimate(d, R, opts.max_iter, _orbit_escape(F, z, R, opts.max_iter))


def green_minus(F_inv, delta: int, z: Sequence[complex], opts: GreenOptions | None = None) -> GreenEstimate:
    """``green_plus`` for the inverse map with its degree ``delta``."""
    return green_plus(F_inv, delta, z, opts)


def k_membership(F, z: Sequence[complex], opts: GreenOptions | None = None) -> Escaped | Bounded:
    opts = opts or GreenOptions()
    F = _as_floatmap(F)
    hit = _orbit_escape(F, z, effective_radius(F, opts.radius), opts.max_iter)
    return Bounded(opts.max_iter) if hit is None else Escaped(hit[0])


@dataclass(frozen=True)
class GreenBatch:
    values: np.ndarray
    iterations: np.ndarray
    escaped: np.ndarray
    error_bounds: np.ndarray

    def __len__(self):
        return len(self.values)

    def estimate(self, i: int) -> GreenEstimate:
        return GreenEstimate(
            float(self.values[i]), int(self.iterations[i]), bool(self.escaped[i]), float(self.error_bounds[i])
        )


def _column_norms(W: np.ndarray) -> np.ndarray:
    """Euclidean column norms, scaled by the largest modulus to avoid overflow."""
    A = np.abs(W)
    if A.size == 0:
        return np.zeros(W.shape[1])
    m = np.max(A, axis=0)
    safe = np.where(m > 0, m, 1.0)
    with np.errstate(invalid="ignore"):
        return np.where(m > 0, m * np.sqrt(np.sum((A / safe) ** 2, axis=0)), 0.0)


def green_plus_batch(F, d: int, Z: np.ndarray, opts: GreenOptions | None = None) -> GreenBatch:
    """Vectorised ``green_plus`` over the columns of ``Z`` (shape (k, n))."""
    opts = opts or GreenOptions()
    F = _as_floatmap(F)
    if d < 2 or F.degree < 2:
        raise NotRegular("Green functions need degree >= 2")
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != F.k:
        raise ValueError(f"expected an array of shape ({F.k}, n)")
    R = effective_radius(F, opts.radius)
    N = opts.max_iter
    count = Z.shape[1]
    iters = np.full(count, N, dtype=np.int64)
    escaped = np.zeros(count, dtype=bool)
    radius = np.zeros(count)
    active = np.arange(count)
    W = Z.copy()
    for n in range(N + 1):
        r = _column_norms(W)
        out = r > R
        if np.any(out):
            idx = active[out]
            escaped[idx] = True
            iters[idx] = n
            radius[idx] = r[out]
            active = active[~out]
            W = W[:, ~out]
        if n == N or active.size == 0:
            break
        W = F.eval_array(W)
    if not np.all(np.isfinite(radius[escaped])):
        raise OverflowError("orbit overflowed before reaching the escape radius")
    scale = float(d) ** (-iters.astype(float))
    values = np.where(escaped, np.log(np.where(escaped, radius, 1.0)) * scale, 0.0)
    bounds = np.where(escaped, distortion_constant(d, R) * scale, float(d) ** (-N) * math.log(R))
    return GreenBatch(values, iters, escaped, bounds)


@dataclass(frozen=True)
class InvarianceReport:
    max_excess: float
    max_raw: float
    samples: int
    escaping: int
    positive: int


def invariance_report(F, d: int, samples, opts: GreenOptions | None = None) -> InvarianceReport:
    """Compare G(F(z)) with d * G(z).

    G itself is normalised by the map's own degree, so a wrong ``d`` shows up
    as a positive excess over the error bounds.
    """
    F = _as_floatmap(F)
    Z = np.asarray(samples, dtype=complex).T
    FZ = F.eval_array(Z)
    g = green_plus_batch(F, F.degree, Z, opts)
    gf = green_plus_batch(F, F.degree, FZ, opts)
    raw = np.abs(gf.values - d * g.values)
    excess = raw - (gf.error_bounds + g.error_bounds)
    esc = g.escaped | gf.escaped
    return InvarianceReport(
        max_excess=float(max(np.max(excess), 0.0)) if len(raw) else 0.0,
        max_raw=float(np.max(raw)) if len(raw) else 0.0,
        samples=len(raw),
        escaping=int(np.sum(esc)),
        positive=int(np.sum(esc & (excess > 0))),
    )


def invariance_residual(F, d: int, samples, opts: GreenOptions | None = None) -> float:
    """Max over samples of |G(F(z)) - d G(z)| minus summed error bounds, floored at 0."""
    return invariance_report(F, d, samples, opts).max_excess


# ---------------------------------------------------------------------------
# slices


@dataclass(frozen=True)
class SliceSpec:
    base: tuple
    dir_u: tuple
    dir_v: tuple
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]

    def __post_init__(self):
        for name in ("base", "dir_u", "dir_v"):
            object.__setattr__(self, name, tuple(complex(x) for x in getattr(self, name)))
        if not len(self.base) == len(self.dir_u) == len(self.dir_v):
            raise ValueError("base and directions must share a dimension")
        w, h = self.resolution
        if w < 1 or h < 1:
            raise ValueError("resolution must be positive")
        u0, u1, v0, v1 = self.window
        if u0 > u1 or v0 > v1:
            raise ValueError("window bounds out of order")
        if np.linalg.matrix_rank(np.array([self.dir_u, self.dir_v]), tol=1e-12) < 2:
            raise ValueError("slice directions are linearly dependent")

    def points(self) -> np.ndarray:
        """Pixel centres as an array of shape (k, height*width), row-major.

        Row 0 is the top of the image (v = v_max).
        """
        w, h = self.resolution
        u0, u1, v0, v1 = self.window
        u = u0 + (np.arange(w) + 0.5) * (u1 - u0) / w
        v = v1 - (np.arange(h) + 0.5) * (v1 - v0) / h
        uu, vv = np.meshgrid(u, v)
        base = np.array(self.base)[:, None]
        du = np.array(self.dir_u)[:, None]
        dv = np.array(self.dir_v)[:, None]
        return base + du * uu.ravel()[None, :] + dv * vv.ravel()[None, :]


@dataclass(frozen=True)
class SliceGrid:
    values: np.ndarray
    iterations: np.ndarray
    escaped: np.ndarray
    error_bounds: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    def estimate(self, i: int, j: int) -> GreenEstimate:
        return GreenEstimate(
            float(self.values[i, j]),
            int(self.iterations[i, j]),
            bool(self.escaped[i, j]),
            float(self.error_bounds[i, j]),
        )


def raster_slice(F, d: int, spec: SliceSpec, opts: GreenOptions | None = None, threads: int = 1) -> SliceGrid:
    """Green estimates on a 2-D affine slice.

    Rows are cut into fixed chunks, so the grid is bit-identical for any
    thread count.
    """
    F = _as_floatmap(F)
    if len(spec.base) != F.k:
        raise ValueError("slice dimension does not match the map")
    w, h = spec.resolution
    P = spec.points().reshape(F.k, h, w)
    chunks = [(r, min(r + ROW_CHUNK, h)) for r in range(0, h, ROW_CHUNK)]

    def work(bounds):
        r0, r1 = bounds
        return green_plus_batch(F, d, P[:, r0:r1, :].reshape(F.k, -1), opts)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return SliceGrid(
        np.concatenate([p.values for p in parts]).reshape(h, w),
        np.concatenate([p.iterations for p in parts]).reshape(h, w),
        np.concatenate([p.escaped for p in parts]).reshape(h, w),
        np.concatenate([p.error_bounds for p in parts]).reshape(h, w),
    )


def gray_levels(grid: SliceGrid, v_cap: float) -> np.ndarray:
    if v_cap <= 0:
        raise ValueError("v_cap must be positive")
    return np.rint(255 * np.minimum(grid.values / v_cap, 1.0)).astype(np.uint8)


def write_pgm(grid: SliceGrid, path, v_cap: float) -> None:
    h, w = grid.shape
    data = gray_levels(grid, v_cap)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_csv(grid: SliceGrid, path) -> None:
    h, w = grid.shape
    lines = ["row,col,value,iterations"]
    for i in range(h):
        for j in range(w):
            lines.append(f"{i},{j},{float(grid.values[i, j])!r},{grid.iterations[i, j]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
