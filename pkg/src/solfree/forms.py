"""Linear-form algebra.

A linear form is an integer coefficient vector (c1, ..., ct) standing for
the equation c1*x1 + ... + ct*xt = 0.  This module provides parsing from a
small DSL, normalization (content reduction), translation-invariance and
admissibility tests, the multiplier height h (minimal l1 norm of an integer
vector n with sum(n_i * c_i) = 1) and the derived admissibility threshold.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SolfreeError
from .groups import TORUS


@dataclass(frozen=True)
class LinearForm:
    """Integer coefficient vector of a linear equation in t >= 2 variables."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise SolfreeError("a linear form needs at least two variables")
        if any(c == 0 for c in coeffs):
            raise SolfreeError(f"zero coefficient in {coeffs}")

    @property
    def t(self) -> int:
        return len(self.coeffs)

    @property
    def coefficient_sum(self) -> int:
        return sum(self.coeffs)

    @property
    def two_variable(self) -> bool:
        """Two-variable forms parse fine but are unsupported by the pipeline."""
        return self.t == 2

    def negated(self) -> "LinearForm":
        return LinearForm(tuple(-c for c in self.coeffs))

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "LinearForm":
        return cls(tuple(int(c) for c in data))

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs, start=1):
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            parts.append(f"{sign}{'' if mag == 1 else mag}x{i}")
        return "".join(parts)


@dataclass(frozen=True)
class FormFamily:
    """A finite, non-empty list of linear forms."""

    forms: tuple[LinearForm, ...]

    def __post_init__(self):
        forms = tuple(
            f if isinstance(f, LinearForm) else LinearForm(tuple(f)) for f in self.forms
        )
        object.__setattr__(self, "forms", forms)
        if not forms:
            raise SolfreeError("a form family must be non-empty")

    @property
    def has_duplicates(self) -> bool:
        return len(set(self.forms)) < len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __len__(self):
        return len(self.forms)

    def to_json(self) -> list[list[int]]:
        return [f.to_json() for f in self.forms]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[int]]) -> "FormFamily":
        return cls(tuple(LinearForm.from_json(row) for row in data))


def as_family(forms) -> FormFamily:
    """Coerce a LinearForm, iterable of forms, or FormFamily to a FormFamily."""
    if isinstance(forms, FormFamily):
        return forms
    if isinstance(forms, LinearForm):
        return FormFamily((forms,))
    return FormFamily(tuple(forms))


_TERM_RE = re.compile(r"([+-]?)(\d*)x(\d+)$")


def parse_form(text: str) -> LinearForm:
    """Parse the form DSL.

    Accepts either a sum of terms like ``"2x1+3x2-2x3"`` (each variable
    index 1..t used exactly once, coefficient defaults to 1) or a bracketed
    coefficient list like ``"[2,3,-2]"``.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise SolfreeError("empty form")
    if s.startswith("["):
        if not s.endswith("]"):
            raise SolfreeError(f"unbalanced brackets in {text!r}")
        body = s[1:-1]
        try:
            coeffs = tuple(int(tok) for tok in body.split(",") if tok != "")
        except ValueError as exc:
            raise SolfreeError(f"bad coefficient list {text!r}") from exc
        if len(coeffs) < 2:
            raise SolfreeError("a linear form needs at least two variables")
        return LinearForm(coeffs)

    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    if not terms or "".join(terms) != s:
        raise SolfreeError(f"cannot tokenize form {text!r}")
    seen: dict[int, int] = {}
    for term in terms:
        match = _TERM_RE.match(term)
        if not match:
            raise SolfreeError(f"bad term {term!r} in form {text!r}")
        sign, digits, idx = match.groups()
        coeff = int(digits) if digits else 1
        if sign == "-":
            coeff = -coeff
        index = int(idx)
        if index in seen:
            raise SolfreeError(f"variable x{index} appears twice in {text!r}")
        if coeff == 0:
            raise SolfreeError(f"zero coefficient for x{index} in {text!r}")
        seen[index] = coeff
    t = len(seen)
    if sorted(seen) != list(range(1, t + 1)):
        missing = sorted(set(range(1, t + 1)) - set(seen))
        raise SolfreeError(f"variable indices must be 1..{t}, missing {missing}")
    return LinearForm(tuple(seen[i] for i in range(1, t + 1)))


def is_invariant(form: LinearForm) -> bool:
    """True iff the form is translation-invariant (coefficients sum to 0)."""
    return form.coefficient_sum == 0


def content_reduce(form: LinearForm) -> tuple[LinearForm, int]:
    """Return (reduced form, content) with form = content * reduced."""
    g = math.gcd(*[abs(c) for c in form.coeffs])
    return LinearForm(tuple(c // g for c in form.coeffs)), g


def _require_coprime(form: LinearForm):
    if math.gcd(*[abs(c) for c in form.coeffs]) != 1:
        raise SolfreeError(f"coefficients of {form.coeffs} are not coprime")


def multiplier_height_witness(form: LinearForm) -> tuple[int, tuple[int, ...]]:
    """Minimal l1 norm h of an integer vector n with sum(n_i c_i) = 1,
    together with the lexicographically smallest witness of that norm.

    Layered search over s = sum |n_i| = 1, 2, ...; it terminates within
    s <= sum |c_i| layers: chaining two-term extended gcd steps produces a
    representation of 1 whose multipliers are each bounded by the
    complementary coefficient divided by the running gcd, so a solution of
    total l1 weight at most sum |c_i| always exists for coprime coefficients.
    """
    _require_coprime(form)
    coeffs = form.coeffs
    t = form.t
    cap = sum(abs(c) for c in coeffs)
    for s in range(1, cap + 1):
        best = None
        for split in _compositions(s, t):
            nonzero = [i for i, k in enumerate(split) if k > 0]
            for signs in itertools.product((1, -1), repeat=len(nonzero)):
                vec = list(split)
                for i, sg in zip(nonzero, signs):
                    vec[i] *= sg
                if sum(n * c for n, c in zip(vec, coeffs)) == 1:
                    cand = tuple(vec)
                    if best is None or cand < best:
                        best = cand
        if best is not None:
            return s, best
    raise SolfreeError(f"no multiplier vector found for {coeffs}")  # unreachable


def _compositions(s: int, t: int):
    """Non-negative integer t-vectors summing to s."""
    if t == 1:
        yield (s,)
        return
    for first in range(s + 1):
        for rest in _compositions(s - first, t - 1):
            yield (first,) + rest


def multiplier_height(form: LinearForm) -> int:
    return multiplier_height_witness(form)[0]


def k_admissibility_threshold(form: LinearForm) -> int:
    """Smallest k for which the form is k-admissible:
    max(h, max |c_i|)."""
    h, _ = multiplier_height_witness(form)
    return max(h, max(abs(c) for c in form.coeffs))


def is_admissible(form: LinearForm, modulus) -> bool:
    """True iff every coefficient acts as a surjective dilation on the group.

    For Z/m this means gcd(c_i, m) = 1 for all i; on the circle every
    nonzero dilation is surjective, so every form qualifies.
    """
    if modulus is TORUS:
        return True
    m = int(modulus)
    return all(math.gcd(abs(c), m) == 1 for c in form.coeffs)


def weight_s(form: LinearForm) -> int:
    """Sum of absolute coefficient values."""
    return sum(abs(c) for c in form.coeffs)
