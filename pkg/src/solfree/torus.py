"""Exact measure computations on the circle for grid sets.

A grid set at resolution N is a union of half-open cells
[(j-1)/N, j/N), j = 1..N; internally cells are indexed 0..N-1 (cell b
covers [b/N, (b+1)/N)), matching the residue b of Z/N under x -> floor(Nx).
External serialization uses the 1-indexed convention.

Exact solution measures reduce to cyclic convolution counts weighted by
generalized Eulerian weights

    W(d, w) = Vol{ v in [0,1)^n : w <= sum d_i v_i < w + 1 },

computed by inclusion-exclusion over box corners in rational arithmetic.
Pointwise freeness of grid sets is decided exactly: a cell tuple
(a_1, ..., a_t) at resolution N contains a solution of sum c_i x_i = 0 (mod 1)
iff sum c_i a_i = -w (mod N) for some integer w attainable as sum c_i v_i
with v in [0,1)^t, i.e. strictly between the negative and positive
coefficient sums, or w = 0 when all coefficients share one sign (the
all-left-endpoints corner).
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from . import kernels
from .cyclic import CyclicSet, dilated_vector, solution_measure_convolution
from .errors import ResolutionCapError, SolfreeError
from .forms import FormFamily, LinearForm, as_family

DEFAULT_RESOLUTION_CAP = 2**18


def resolution_cap() -> int:
    value = os.environ.get("SOLFREE_RESOLUTION_CAP")
    return int(value) if value else DEFAULT_RESOLUTION_CAP


def _check_resolution(n: int):
    cap = resolution_cap()
    if n > cap:
        raise ResolutionCapError(
            f"required resolution {n} exceeds cap {cap} "
            "(set SOLFREE_RESOLUTION_CAP to raise)"
        )
    return n


@dataclass(frozen=True)
class GridSet:
    """Union of half-open cells [b/N, (b+1)/N) stored as a bitmask."""

    resolution: int
    mask: int

    def __post_init__(self):
        if self.resolution < 1:
            raise SolfreeError("resolution must be positive")
        if self.mask < 0 or self.mask >> self.resolution:
            raise SolfreeError("bitmask out of range for resolution")

    @classmethod
    def from_cells(cls, resolution: int, cells: Iterable[int]) -> "GridSet":
        """Cells given 0-indexed: cell b covers [b/N, (b+1)/N)."""
        mask = 0
        for b in cells:
            mask |= 1 << (int(b) % resolution)
        return cls(resolution, mask)

    @classmethod
    def from_interval(cls, resolution: int, lo: Fraction, hi: Fraction) -> "GridSet":
        """The half-open interval [lo, hi) (mod 1); endpoints must be
        multiples of 1/resolution.  lo >= hi wraps around."""
        lo, hi = Fraction(lo), Fraction(hi)
        a = lo * resolution
        b = hi * resolution
        if a.denominator != 1 or b.denominator != 1:
            raise SolfreeError("interval endpoints must sit on the grid")
        a, b = int(a) % resolution, int(b) % resolution
        if a < b:
            cells = range(a, b)
        else:
            cells = list(range(a, resolution)) + list(range(0, b))
        return cls.from_cells(resolution, cells)

    @classmethod
    def full(cls, resolution: int) -> "GridSet":
        return cls(resolution, (1 << resolution) - 1)

    @classmethod
    def empty(cls, resolution: int) -> "GridSet":
        return cls(resolution, 0)

    def cells(self) -> tuple[int, ...]:
        return tuple(b for b in range(self.resolution) if self.mask >> b & 1)

    def __contains__(self, x) -> bool:
        """Point membership for an exact rational x (mod 1)."""
        x = Fraction(x) % 1
        cell = int(x * self.resolution)  # floor
        return bool(self.mask >> cell & 1)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def measure(self) -> Fraction:
        return Fraction(self.size, self.resolution)

    def indicator(self) -> list[int]:
        return [self.mask >> b & 1 for b in range(self.resolution)]

    def union(self, other: "GridSet") -> "GridSet":
        a, b = common_resolution([self, other])
        return GridSet(a.resolution, a.mask | b.mask)

    def difference(self, other: "GridSet") -> "GridSet":
        a, b = common_resolution([self, other])
        return GridSet(a.resolution, a.mask & ~b.mask)

    def residues(self) -> CyclicSet:
        """The residue set A' <= Z/N with x in A' iff x/N in A."""
        return CyclicSet(self.resolution, self.mask)

    def to_json(self) -> dict:
        return {"N": self.resolution, "cells": [b + 1 for b in self.cells()]}

    @classmethod
    def from_json(cls, data: dict) -> "GridSet":
        n = int(data["N"])
        return cls.from_cells(n, (int(j) - 1 for j in data["cells"]))


@dataclass(frozen=True)
class GridFunction:
    """Step function constant on the cells of a grid, values in [0,1]."""

    resolution: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.resolution:
            raise SolfreeError("value vector length must equal resolution")
        if any(v < 0 or v > 1 for v in values):
            raise SolfreeError("values must lie in [0,1]")

    @classmethod
    def constant(cls, resolution: int, value) -> "GridFunction":
        return cls(resolution, (Fraction(value),) * resolution)

    @classmethod
    def from_set(cls, A: GridSet) -> "GridFunction":
        return cls(A.resolution, tuple(Fraction(b) for b in A.indicator()))

    @property
    def mean(self) -> Fraction:
        return sum(self.values, Fraction(0)) / self.resolution

    def float_values(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def numerators(self) -> tuple[list[int], int]:
        den = math.lcm(*[v.denominator for v in self.values])
        return [int(v * den) for v in self.values], den


GridLike = Union[GridSet, GridFunction]


def refine(item: GridLike, factor: int):
    """Same point set / step function at resolution N * factor."""
    if factor < 1:
        raise SolfreeError("refinement factor must be positive")
    if factor == 1:
        return item
    n = item.resolution
    _check_resolution(n * factor)
    if isinstance(item, GridSet):
        mask = 0
        block = (1 << factor) - 1
        for b in range(n):
            if item.mask >> b & 1:
                mask |= block << (b * factor)
        return GridSet(n * factor, mask)
    values = []
    for v in item.values:
        values.extend([v] * factor)
    return GridFunction(n * factor, tuple(values))


def common_resolution(items: Sequence[GridLike]) -> list:
    """Refine all items to the lcm of their resolutions."""
    target = math.lcm(*[it.resolution for it in items])
    _check_resolution(target)
    return [refine(it, target // it.resolution) for it in items]


def dilation_preimage(A: GridSet, c: int) -> GridSet:
    """{x : c x in A (mod 1)} at resolution N*|c|; measure is preserved.

    For negative c the true preimage is a union of intervals half-open on
    the left; the returned grid set agrees with it except at finitely many
    cell-boundary points (exactly: up to the cell orientation flip), which
    never affects measures.
    """
    if c == 0:
        raise SolfreeError("dilation factor must be nonzero")
    n = A.resolution
    d = abs(c)
    _check_resolution(n * d)
    if c > 0:
        source = A.cells()
    else:
        source = [(n - 1 - b) % n for b in A.cells()]  # reflection, cellwise
    mask = 0
    for b in source:
        for j in range(d):
            mask |= 1 << (b + j * n)
    return GridSet(n * d, mask)


def dilate_image(A: GridSet, c: int) -> GridSet:
    """Image c * A at resolution N: each cell maps onto |c| consecutive
    cells (an interval of length |c|/N, wrapped).

    Exact for c > 0; for c < 0 the true image is half-open on the right and
    the returned set differs from it on finitely many boundary points.
    """
    if c == 0:
        raise SolfreeError("dilation factor must be nonzero")
    n = A.resolution
    d = abs(c)
    out = set()
    for b in A.cells():
        start = d * b
        for j in range(d):
            cell = (start + j) % n
            out.add(cell if c > 0 else (n - 1 - cell) % n)
    return GridSet.from_cells(n, out)


# ---------------------------------------------------------------------------
# Generalized Eulerian weights


@dataclass(frozen=True)
class EulerianWeightTable:
    """W(d, w) for all integers w with W > 0; the weights sum to 1."""

    coeffs: tuple[int, ...]
    weights: dict[int, Fraction]

    def __getitem__(self, w: int) -> Fraction:
        return self.weights.get(w, Fraction(0))

    def support(self) -> list[int]:
        return sorted(self.weights)


def _signed_subset_sums(b: Sequence[int]) -> dict[int, int]:
    """Coefficients of prod_i (1 - z^{b_i}): subset sum -> signed count."""
    sums = {0: 1}
    for bi in b:
        nxt = dict(sums)
        for s, coef in sums.items():
            nxt[s + bi] = nxt.get(s + bi, 0) - coef
        sums = {s: c for s, c in nxt.items() if c != 0}
    return sums


@functools.lru_cache(maxsize=None)
def _box_cdf_table(b: tuple[int, ...]):
    n = len(b)
    norm = math.factorial(n) * math.prod(b)
    sums = _signed_subset_sums(b)

    def cdf(s: int) -> Fraction:
        """Vol{u in [0,1]^n : sum b_i u_i <= s} for integer s."""
        total = 0
        for sigma, coef in sums.items():
            d = s - sigma
            if d > 0:
                total += coef * d**n
        return Fraction(total, norm)

    return cdf


def eulerian_weight(coeffs: Sequence[int], w: int) -> Fraction:
    """W(d, w) = Vol{v in [0,1)^n : w <= sum d_i v_i < w+1}, exact.

    Negative coefficients are flipped via v -> 1 - v, shifting w by the sum
    of the negative coefficients; the remaining volume is an inclusion-
    exclusion of simplex slices of the box prod [0, b_i].
    """
    d = tuple(int(c) for c in coeffs)
    if any(c == 0 for c in d):
        raise SolfreeError("weight coefficients must be nonzero")
    neg = sum(c for c in d if c < 0)
    b = tuple(sorted(abs(c) for c in d))
    cdf = _box_cdf_table(b)
    shifted = w - neg
    return cdf(shifted + 1) - cdf(shifted)


def eulerian_weight_table(coeffs: Sequence[int]) -> EulerianWeightTable:
    d = tuple(int(c) for c in coeffs)
    lo = sum(c for c in d if c < 0)
    hi = sum(c for c in d if c > 0)
    weights = {}
    for w in range(lo, hi):
        value = eulerian_weight(d, w)
        if value:
            weights[w] = value
    if sum(weights.values(), Fraction(0)) != 1:
        raise AssertionError(f"weights for {d} do not sum to 1")
    return EulerianWeightTable(d, weights)


def classical_eulerian(n: int) -> list[Fraction]:
    """<n r>/n! for r = 0..n-1 via the all-ones weight table."""
    table = eulerian_weight_table((1,) * n)
    return [table[r] for r in range(n)]


def attainable_shifts(coeffs: Sequence[int]) -> list[int]:
    """Integers w attained by sum c_i v_i with v in [0,1)^t.

    These are the integers strictly between the negative and the positive
    coefficient sums, plus w = 0 when all coefficients share one sign.
    """
    lo = sum(c for c in coeffs if c < 0)
    hi = sum(c for c in coeffs if c > 0)
    shifts = set(range(lo + 1, hi))
    if lo == 0 or hi == 0:
        shifts.add(0)
    return sorted(shifts)


# ---------------------------------------------------------------------------
# Solution measures


def _grid_vectors(items: Sequence[GridLike]):
    """Integer vectors and per-item denominators at a common resolution."""
    refined = common_resolution(items)
    vectors, dens = [], []
    for it in refined:
        if isinstance(it, GridSet):
            vectors.append(it.indicator())
            dens.append(1)
        else:
            nums, den = it.numerators()
            vectors.append(nums)
            dens.append(den)
    return refined[0].resolution, vectors, dens


def solution_measure_grid(form: LinearForm, items: Sequence[GridLike]) -> Fraction:
    """Exact T_L(A_1, ..., A_t) on the circle for grid sets or step functions.

    Parametrizing the kernel by the first t-1 coordinates y_i (with
    x_i = c_t * y_i and x_t = -sum_{i<t} c_i y_i) turns the integral into
    convolution counts of the dilation preimages B_i = (c_t)^{-1} A_i at a
    common resolution, decomposed by the integer part of sum d_i v_i
    (d_i = -c_i) on the unit box, whose level volumes are the generalized
    Eulerian weights.
    """
    if len(items) != form.t:
        raise SolfreeError(f"form has {form.t} variables but {len(items)} inputs given")
    c_t = form.coeffs[-1]
    refined = common_resolution(items)
    front = []
    for it in refined[:-1]:
        if isinstance(it, GridSet):
            front.append(dilation_preimage(it, c_t))
        else:
            # preimage of a step function: values pulled back cellwise
            n = it.resolution
            d = abs(c_t)
            _check_resolution(n * d)
            src = it.values
            if c_t > 0:
                vals = [src[b % n] for b in range(n * d)]
            else:
                vals = [src[(n - 1 - b % n) % n] for b in range(n * d)]
            front.append(GridFunction(n * d, tuple(vals)))
    last = refine(refined[-1], abs(c_t))
    n_prime, vectors, dens = _grid_vectors(front + [last])
    t = form.t
    d_coeffs = tuple(-c for c in form.coeffs[:-1])
    conv = None
    for d_i, vec in zip(d_coeffs, vectors[:-1]):
        dil = dilated_vector(vec, d_i, n_prime)
        conv = dil if conv is None else kernels.convolve_cyclic(conv, dil)
    table = eulerian_weight_table(d_coeffs)
    last_vec = vectors[-1]
    total = Fraction(0)
    for w, weight in table.weights.items():
        shifted = 0
        for y, n_y in enumerate(conv):
            if n_y:
                v = last_vec[(y + w) % n_prime]
                if v:
                    shifted += n_y * v
        if shifted:
            total += weight * shifted
    denominator = math.prod(dens) * Fraction(n_prime) ** (t - 1)
    return total / denominator


def ones_form(t: int) -> LinearForm:
    """x_1 + ... + x_{t-1} - x_t."""
    return LinearForm((1,) * (t - 1) + (-1,))


def eulerian_identity_check(
    t: int, sets: Sequence[GridSet]
) -> tuple[Fraction, Fraction]:
    """Two independent exact computations of T(A_1, ..., A_t) for the form
    x_1 + ... + x_{t-1} - x_t on grid sets at a common resolution N:

    - lhs: the circle measure via :func:`solution_measure_grid`;
    - rhs: sum_r <t-1 r>/(t-1)! times the Z/N solution measure of
      (A'_1, ..., A'_t - r), using the residue sets A'_i.

    Returns (lhs, rhs) for exact equality assertions.
    """
    if t < 2:
        raise SolfreeError("need t >= 2")
    if len(sets) != t:
        raise SolfreeError("one set per variable required")
    form = ones_form(t)
    refined = common_resolution(list(sets))
    lhs = solution_measure_grid(form, refined)
    n = refined[0].resolution
    residues = [g.residues() for g in refined]
    eulerian = classical_eulerian(t - 1)
    rhs = Fraction(0)
    for r in range(t - 1):
        shifted = residues[:-1] + [residues[-1].shift(-r)]
        rhs += eulerian[r] * solution_measure_convolution(form, shifted)
    return lhs, rhs


# ---------------------------------------------------------------------------
# Pointwise freeness


@dataclass(frozen=True)
class GridWitness:
    """A cell tuple (1-indexed, at `resolution`) containing a real solution."""

    form: LinearForm
    resolution: int
    cells: tuple[int, ...]
    shift: int


def is_free_grid(forms, sets) -> tuple[bool, GridWitness | None]:
    """Exact pointwise emptiness of (A_1 x ... x A_t) ∩ ker L on the circle.

    `sets` may be a single GridSet (diagonal solutions in A^t) or one set
    per variable.  Solutions inside products of half-open cells are decided
    by the attainable-shift rule; the returned witness names the cell tuple
    (1-indexed) at the common resolution.
    """
    family = as_family(forms)
    for form in family:
        items = sets if not isinstance(sets, GridSet) else [sets] * form.t
        if len(items) != form.t:
            raise SolfreeError("one set per variable required")
        refined = common_resolution(list(items))
        n = refined[0].resolution
        witness = _find_grid_solution(form, refined, n)
        if witness is not None:
            return False, witness
    return True, None


def _find_grid_solution(form, refined, n):
    vectors = [g.indicator() for g in refined]
    dilated = [dilated_vector(vec, c, n) for c, vec in zip(form.coeffs, vectors)]
    # suffix convolutions for witness backtracking
    suffix = [None] * (form.t + 1)
    suffix[form.t] = None
    acc = None
    for i in range(form.t - 1, -1, -1):
        acc = dilated[i] if acc is None else kernels.convolve_cyclic(dilated[i], acc)
        suffix[i] = acc
    total_by_residue = suffix[0]
    for w in attainable_shifts(form.coeffs):
        target = (-w) % n
        if total_by_residue[target] == 0:
            continue
        cells = _backtrack_cells(form, refined, suffix, n, target)
        return GridWitness(form, n, tuple(b + 1 for b in cells), w)
    return None


def _backtrack_cells(form, refined, suffix, n, target):
    cells = []
    remaining = target
    for i in range(form.t):
        c = form.coeffs[i]
        nxt = suffix[i + 1]
        for b in refined[i].cells():
            rest = (remaining - c * b) % n
            if nxt is None:
                if rest == 0:
                    cells.append(b)
                    remaining = rest
                    break
            elif nxt[rest] > 0:
                cells.append(b)
                remaining = rest
                break
        else:
            raise AssertionError("witness backtracking failed")
    return cells


# ---------------------------------------------------------------------------
# U^2 norm of step functions


def l2_norm_grid(f: GridLike) -> float:
    if isinstance(f, GridSet):
        return float(math.sqrt(f.measure))
    vals = f.float_values()
    return float(np.sqrt(np.mean(vals * vals)))


def grid_fourier_coefficients(f: GridLike, ks) -> np.ndarray:
    """Circle Fourier coefficients fhat(k) of a step function.

    Each cell contributes a boxcar of width 1/N, so

        fhat(k) = D(k mod N) * exp(-i pi k / N) * sinc(pi k / N)

    with D the normalized length-N DFT of the cell values and
    sinc(x) = sin(x)/x, sinc(0) = 1.
    """
    if isinstance(f, GridSet):
        f = GridFunction.from_set(f)
    n = f.resolution
    coeffs = np.fft.fft(f.float_values()) / n
    ks = np.asarray(ks, dtype=int)
    x = np.pi * ks / n
    sinc = np.ones_like(x, dtype=float)
    nz = ks != 0
    sinc[nz] = np.sin(x[nz]) / x[nz]
    return coeffs[ks % n] * np.exp(-1j * x) * sinc


def u2_fourth_power_values(values, tol: float = 1e-9) -> float:
    """sum_{k in Z} |fhat(k)|^4 for a real step function (any real values).

    The sum over a fixed frequency residue class j has the closed value
    |D(j)|^4 * (2 + cos(2 pi j / N)) / 3, since

        sum_{l in Z} (x + l)^(-4) = pi^4 (2 + cos 2 pi x) / (3 sin^4(pi x)),

    so no truncation error is incurred (well below any positive tol; the
    parameter is kept for callers that budget an error explicitly).
    """
    if tol <= 0:
        raise SolfreeError("tol must be positive")
    values = np.asarray(values, dtype=float)
    n = len(values)
    coeffs = np.fft.fft(values) / n
    mag4 = np.abs(coeffs) ** 4
    lattice = (2.0 + np.cos(2 * np.pi * np.arange(n) / n)) / 3.0
    return float(np.sum(mag4 * lattice))


def u2_fourth_power_truncated(values, cutoff: int) -> float:
    """Reference path: explicit series over |k| <= cutoff.

    The discarded tail is below 2 (N/pi)^4 max|D|^4 / (3 cutoff^3); used to
    cross-check the closed-form lattice sum.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    coeffs = np.fft.fft(values) / n
    mag4 = np.abs(coeffs) ** 4
    ks = np.arange(-cutoff, cutoff + 1)
    x = np.pi * ks / n
    sinc = np.ones_like(x)
    nz = ks != 0
    sinc[nz] = np.sin(x[nz]) / x[nz]
    return float(np.sum(mag4[ks % n] * sinc**4))


def u2_norm_grid(f: GridLike, tol: float = 1e-9) -> float:
    """U^2 norm on the circle of a step function: (sum_k |fhat(k)|^4)^(1/4)."""
    if isinstance(f, GridSet):
        f = GridFunction.from_set(f)
    return u2_fourth_power_values(f.float_values(), tol) ** 0.25


def u2_norm_grid_values(values, tol: float = 1e-9) -> float:
    """U^2 norm of an arbitrary real step function (no [0,1] restriction)."""
    return u2_fourth_power_values(values, tol) ** 0.25
