"""Exact arithmetic for frequency lattices over declared irrationals.

Real numbers like 1 + 2*sqrt(2) are carried as exact rational coordinate
vectors over a user-declared basis of reals (assumed Q-independent, not
verified); floats are kept only as evaluation shadows.  On top of that sit
integer-lattice routines: the integer kernel of a rational matrix and the
canonical generating set of the additive group spanned by a finite set of
frequencies.  All lattice arithmetic is over Python's arbitrary-precision
integers and fractions.Fraction, so there is no overflow to guard against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "FrequencyBasis",
    "RealQ",
    "Frequency",
    "SpectrumGroupBasis",
    "real_value",
    "integer_kernel",
    "group_basis",
    "member_coords",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}: {x!r}")


@dataclass(frozen=True)
class FrequencyBasis:
    """Declared basis of reals, first element always the rational unit 1.

    ``values`` are float shadows used for numeric evaluation only; exact
    statements are made in rational coordinates over this basis.  The
    optional ``products`` table gives exact coordinates of pairwise
    products of the irrational elements (indices >= 1), enabling exact
    multiplication for closed bases such as (1, sqrt 2).
    """

    labels: tuple[str, ...]
    values: tuple[float, ...]
    products: Mapping[tuple[int, int], tuple[Fraction, ...]] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.labels) != len(self.values):
            raise ValueError("labels and values must have equal length")
        if not self.values:
            raise ValueError("basis must be non-empty")
        if self.values[0] != 1.0:
            raise ValueError("basis value[0] must be the rational unit 1")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be distinct")
        if len(set(self.values)) != len(self.values):
            raise ValueError("basis values must be distinct")
        for v in self.values:
            if not math.isfinite(v) or v == 0.0:
                raise ValueError(f"basis values must be finite and nonzero, got {v}")

    @property
    def dim(self) -> int:
        return len(self.values)

    @classmethod
    def rational(cls) -> "FrequencyBasis":
        return cls(("1",), (1.0,))

    @classmethod
    def with_sqrt(cls, d: int, label: str | None = None) -> "FrequencyBasis":
        """Basis (1, sqrt d) with the exact product sqrt(d)^2 = d declared."""
        if d <= 0 or int(math.isqrt(d)) ** 2 == d:
            raise ValueError("need a positive non-square integer")
        lbl = label or f"sqrt{d}"
        return cls(
            ("1", lbl),
            (1.0, math.sqrt(d)),
            products={(1, 1): (Fraction(d), Fraction(0))},
        )

    def real(self, coeffs) -> "RealQ":
        return RealQ(self, tuple(_as_fraction(c) for c in coeffs))

    def from_rational(self, r) -> "RealQ":
        r = _as_fraction(r)
        return RealQ(self, (r,) + (Fraction(0),) * (self.dim - 1))

    @property
    def zero(self) -> "RealQ":
        return self.from_rational(0)

    @property
    def one(self) -> "RealQ":
        return self.from_rational(1)


@dataclass(frozen=True)
class RealQ:
    """Exact rational coordinate vector over a FrequencyBasis.

    Equality and hashing are exact (coordinates only); ``value`` is the
    float shadow, the plain dot product with the basis floats taken in
    declared order.
    """

    basis: FrequencyBasis
    coeffs: tuple[Fraction, ...]
    value: float = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_as_fraction(c) for c in self.coeffs))
        if len(self.coeffs) != self.basis.dim:
            raise ValueError(
                f"expected {self.basis.dim} coordinates, got {len(self.coeffs)}"
            )
        shadow = 0.0
        for c, v in zip(self.coeffs, self.basis.values):
            shadow += float(c) * v
        object.__setattr__(self, "value", shadow)

    def _check_same_basis(self, other: "RealQ"):
        if self.basis != other.basis:
            raise ValueError("RealQ operands use different bases")

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def __add__(self, other: "RealQ") -> "RealQ":
        self._check_same_basis(other)
        return RealQ(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "RealQ") -> "RealQ":
        self._check_same_basis(other)
        return RealQ(self.basis, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "RealQ":
        return RealQ(self.basis, tuple(-a for a in self.coeffs))

    def scale(self, r) -> "RealQ":
        r = _as_fraction(r)
        return RealQ(self.basis, tuple(r * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, RealQ):
            return NotImplemented
        self._check_same_basis(other)
        # Bilinear expansion.  Index 0 is the rational unit; products of two
        # irrational elements need the basis product table.
        out = [Fraction(0)] * self.basis.dim
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if not b:
                    continue
                if i == 0:
                    out[j] += a * b
                elif j == 0:
                    out[i] += a * b
                else:
                    tab = self.basis.products or {}
                    entry = tab.get((i, j)) or tab.get((j, i))
                    if entry is None:
                        raise ValueError(
                            "product of basis elements "
                            f"{self.basis.labels[i]}*{self.basis.labels[j]} "
                            "is not declared; exact multiplication undefined"
                        )
                    for k, t in enumerate(entry):
                        out[k] += a * b * t
        return RealQ(self.basis, tuple(out))

    __rmul__ = __mul__


def real_value(x: RealQ) -> float:
    """Float shadow of an exact coordinate vector."""
    return x.value


@dataclass(frozen=True)
class Frequency:
    """Point of R^n with each coordinate an exact RealQ over one basis."""

    coords: tuple[RealQ, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError("frequency needs at least one coordinate")
        b = self.coords[0].basis
        for c in self.coords[1:]:
            if c.basis != b:
                raise ValueError("frequency coordinates use different bases")

    @classmethod
    def of(cls, basis: FrequencyBasis, rows: Sequence[Sequence]) -> "Frequency":
        return cls(tuple(basis.real(row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def basis(self) -> FrequencyBasis:
        return self.coords[0].basis

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coords)

    def floats(self) -> tuple[float, ...]:
        return tuple(c.value for c in self.coords)

    def __add__(self, other: "Frequency") -> "Frequency":
        return Frequency(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Frequency":
        return Frequency(tuple(-a for a in self.coords))

    def scale(self, k: int) -> "Frequency":
        return Frequency(tuple(c.scale(k) for c in self.coords))


# ---------------------------------------------------------------------------
# Integer lattice routines.

def _row_hnf(mat: list[list[int]], ncols: int | None = None):
    """In-place row Hermite reduction; returns (rows, pivot_columns).

    Only the first ``ncols`` columns are eligible for pivots (rows may be
    longer, e.g. when carrying a transform tail).  On return the first
    len(pivot_columns) rows are the canonical Hermite rows: pivot columns
    strictly increasing, pivots positive, entries above each pivot reduced
    into [0, pivot).  Remaining rows are zero in the first ncols columns.
    """
    if not mat:
        return mat, []
    width = ncols if ncols is not None else len(mat[0])
    nrows = len(mat)
    pivots: list[int] = []
    r = 0
    for c in range(width):
        # Euclidean reduction until at most one row below r has a nonzero
        # entry in this column.
        while True:
            live = [i for i in range(r, nrows) if mat[i][c]]
            if len(live) <= 1:
                break
            live.sort(key=lambda i: abs(mat[i][c]))
            base = live[0]
            for i in live[1:]:
                q = mat[i][c] // mat[base][c]
                if q:
                    mat[i] = [x - q * y for x, y in zip(mat[i], mat[base])]
        live = [i for i in range(r, nrows) if mat[i][c]]
        if not live:
            continue
        i0 = live[0]
        mat[r], mat[i0] = mat[i0], mat[r]
        if mat[r][c] < 0:
            mat[r] = [-x for x in mat[r]]
        p = mat[r][c]
        for i in range(r):
            q = mat[i][c] // p  # floor division: remainder lands in [0, p)
            if q:
                mat[i] = [x - q * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    return mat, pivots


def _clear_row(row: Sequence[Fraction]) -> list[int]:
    den = math.lcm(*(f.denominator for f in row)) if row else 1
    return [int(f * den) for f in row]


def integer_kernel(rows: Sequence[Sequence], ncols: int | None = None) -> list[tuple[int, ...]]:
    """Basis of the lattice {k in Z^m : A k = 0} for a rational matrix A.

    ``rows`` holds the matrix rows (entries coercible to Fraction); ``ncols``
    is required when ``rows`` is empty.  The result is canonical: vectors in
    Hermite-reduced order with positive leading entries, each primitive.
    Empty list iff the kernel is trivial.
    """
    rows = [list(map(_as_fraction, r)) for r in rows]
    if rows:
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise ValueError("ragged matrix")
        if ncols is not None and ncols != m:
            raise ValueError("ncols disagrees with row length")
    else:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        m = ncols
    if m == 0:
        return []
    # Per-row denominator clearing preserves the kernel.
    int_rows = [_clear_row(r) for r in rows]
    int_rows = [r for r in int_rows if any(r)]
    # Row-reduce the transpose augmented with an identity tail: rows of the
    # work matrix are [column profile of variable k_j | e_j].  Rows whose
    # profile part reduces to zero have tails spanning the kernel lattice.
    nprof = len(int_rows)
    work = [
        [int_rows[i][j] for i in range(nprof)] + [int(i == j) for i in range(m)]
        for j in range(m)
    ]
    work, pivots = _row_hnf(work, ncols=nprof)
    kernel = [row[nprof:] for row in work[len(pivots):]]
    if not kernel:
        return []
    kernel, _ = _row_hnf(kernel)
    out = []
    for vec in kernel:
        if not any(vec):
            continue
        g = math.gcd(*vec)
        # The kernel lattice is saturated, so Hermite basis vectors are
        # automatically primitive; anything else is a bug.
        assert g == 1, f"non-primitive kernel vector {vec}"
        out.append(tuple(vec))
    return out


def in_lattice(vec: Sequence[int], basis_vectors: Sequence[Sequence[int]]) -> bool:
    """Exact membership of an integer vector in the span of basis vectors."""
    if not basis_vectors:
        return not any(vec)
    mat = [list(b) for b in basis_vectors]
    mat, pivots = _row_hnf(mat)
    return _solve_int_rows(mat[: len(pivots)], pivots, list(vec)) is not None


def _solve_int_rows(hnf_rows, pivot_cols, v: list[int]):
    """Integer coefficients expressing v over Hermite rows, or None."""
    ks = []
    for row, pc in zip(hnf_rows, pivot_cols):
        q, rem = divmod(v[pc], row[pc])
        if rem:
            return None
        if q:
            v = [a - q * b for a, b in zip(v, row)]
        ks.append(q)
    if any(v):
        return None
    return ks


@dataclass(frozen=True, eq=False)
class SpectrumGroupBasis:
    """Canonical generating set of the group spanned by input frequencies.

    ``frequencies`` are the m generators (Hermite rows mapped back to
    frequency space, not the inputs themselves); ``coords`` maps every
    input frequency to its integer coordinate vector in Z^m.
    """

    basis: FrequencyBasis
    n: int
    frequencies: tuple[Frequency, ...]
    coords: dict
    _hnf: tuple = field(repr=False, default=())
    _pivots: tuple = field(repr=False, default=())
    _den: int = field(repr=False, default=1)

    @property
    def rank(self) -> int:
        return len(self.frequencies)


def _flatten(freq: Frequency) -> list[Fraction]:
    return [c for coord in freq.coords for c in coord.coeffs]


def group_basis(spectrum: Iterable[Frequency]) -> SpectrumGroupBasis:
    """Smallest additive group containing the given frequencies.

    Rational coordinate rows are scaled by one global denominator (per-row
    scaling would change the generated group), Hermite-reduced over Z, and
    the nonzero rows mapped back.  Rank 0 for an empty or all-zero
    spectrum.
    """
    freqs = []
    for f in spectrum:
        if f not in freqs:
            freqs.append(f)
    if not freqs:
        # rank 0; basis/dimension unknowable, so degenerate placeholders
        return SpectrumGroupBasis(
            basis=FrequencyBasis.rational(), n=1, frequencies=(), coords={}
        )
    basis = freqs[0].basis
    n = freqs[0].n
    for f in freqs:
        if f.basis != basis or f.n != n:
            raise ValueError("spectrum frequencies disagree in basis or dimension")
    q = basis.dim
    flat = [_flatten(f) for f in freqs]
    den = math.lcm(*(c.denominator for row in flat for c in row))
    int_rows = [[int(c * den) for c in row] for row in flat]
    work = [r for r in int_rows if any(r)]
    work, pivots = _row_hnf(work)
    hnf_rows = [tuple(r) for r in work[: len(pivots)]]
    gens = tuple(
        Frequency.of(
            basis,
            [[Fraction(row[i * q + j], den) for j in range(q)] for i in range(n)],
        )
        for row in hnf_rows
    )
    coords = {}
    for f, iv in zip(freqs, int_rows):
        ks = _solve_int_rows(hnf_rows, pivots, list(iv))
        assert ks is not None, "input frequency must lie in its own group"
        coords[f] = tuple(ks)
    return SpectrumGroupBasis(
        basis=basis,
        n=n,
        frequencies=gens,
        coords=coords,
        _hnf=hnf_rows,
        _pivots=tuple(pivots),
        _den=den,
    )


def member_coords(freq: Frequency, gb: SpectrumGroupBasis) -> tuple[int, ...] | None:
    """Integer coordinates of ``freq`` over the group basis, or None.

    None when the exact rational solve has no solution or a non-integer
    one (the frequency lies outside the group).
    """
    if freq in gb.coords:
        return gb.coords[freq]
    if freq.basis != gb.basis or freq.n != gb.n:
        raise ValueError("frequency does not match the group's basis/dimension")
    flat = _flatten(freq)
    scaled = [c * gb._den for c in flat]
    if any(c.denominator != 1 for c in scaled):
        return None
    v = [int(c) for c in scaled]
    if not gb.frequencies:
        return () if not any(v) else None
    ks = _solve_int_rows(list(gb._hnf), list(gb._pivots), v)
    return tuple(ks) if ks is not None else None
