"""Dense complex-valued functions on product domains and their sum-of-products form.

A ``Factor`` couples a :class:`~nfgraph.algebra.ProductDomain` with a dense
complex table.  ``contract`` implements the sum-of-products form with edge
semantics: a label shared by two inputs is summed over, a label appearing once
survives, and three or more occurrences are an error.  Ordering and bracketing
of the inputs never change the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import AnyAlphabet, ProductDomain, make_product_domain

__all__ = [
    "Factor",
    "OpCounter",
    "REL_TOL",
    "contract",
    "marginalize",
    "multiply_pointwise",
    "split_decompose",
    "conditional_constant",
    "outer_univariate_profiles",
    "factors_allclose",
]

# Default relative tolerance for equality checks, against the max-magnitude entry.
REL_TOL = 1e-9


@dataclass
class OpCounter:
    """Multiply/add counters threaded through the evaluation engines."""

    mults: int = 0
    adds: int = 0

    @property
    def total(self) -> int:
        return self.mults + self.adds


class Factor:
    """A dense complex table over a product domain with named axes.

    Values are stored row-major (last axis fastest) and are immutable after
    construction.  Relabeling axes never changes values.  ``tag`` optionally
    records the indicator kind a factor was built as, which the evaluation
    engines may use for low-complexity shortcuts.
    """

    __slots__ = ("domain", "values", "tag")

    def __init__(self, domain: ProductDomain, values: np.ndarray | Sequence, tag: str | None = None):
        arr = np.asarray(values, dtype=np.complex128)
        if arr.size != domain.size:
            raise ValueError(f"values have {arr.size} entries, domain has {domain.size}")
        arr = arr.reshape(domain.shape)
        arr.flags.writeable = False
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "tag", tag)

    def __setattr__(self, name, value):
        raise AttributeError("Factor is immutable")

    # -- structural helpers -------------------------------------------------

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.domain.labels

    @property
    def ndim(self) -> int:
        return self.domain.ndim

    def alphabet(self, label: str) -> AnyAlphabet:
        return self.domain.alphabet(label)

    def relabel(self, mapping: dict[str, str]) -> "Factor":
        """Rename axes; values are untouched."""
        axes = tuple((mapping.get(l, l), a) for l, a in self.domain.axes)
        return Factor(make_product_domain(axes), self.values, tag=self.tag)

    def transpose(self, labels: Sequence[str]) -> "Factor":
        """Reorder axes to the given label order."""
        perm = [self.domain.axis_index(l) for l in labels]
        if sorted(perm) != list(range(self.ndim)):
            raise ValueError(f"labels {labels!r} are not a permutation of {self.labels!r}")
        axes = tuple(self.domain.axes[i] for i in perm)
        return Factor(make_product_domain(axes), self.values.transpose(perm), tag=self.tag)

    def scaled(self, scalar: complex) -> "Factor":
        return Factor(self.domain, self.values * scalar)

    def item(self) -> complex:
        if self.domain.ndim != 0:
            raise ValueError("item() requires a scalar factor")
        return complex(self.values.reshape(()))

    def __getitem__(self, coords) -> complex:
        return complex(self.values[coords])

    def __repr__(self) -> str:
        return f"Factor(labels={list(self.labels)}, shape={self.domain.shape})"

    @staticmethod
    def scalar(value: complex) -> "Factor":
        return Factor(make_product_domain([]), np.asarray(value, dtype=np.complex128))


def factors_allclose(a: Factor, b: Factor, tol: float = REL_TOL) -> bool:
    """Equality within ``tol`` relative to the max-magnitude entry, after aligning axes."""
    if set(a.labels) != set(b.labels):
        return False
    b = b.transpose(a.labels)
    scale = max(np.max(np.abs(a.values)) if a.values.size else 0.0,
                np.max(np.abs(b.values)) if b.values.size else 0.0)
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(a.values - b.values)) <= tol * scale)


def _check_shared_alphabets(factors: Sequence[Factor]) -> dict[str, AnyAlphabet]:
    seen: dict[str, AnyAlphabet] = {}
    counts: dict[str, int] = {}
    for f in factors:
        for label, alpha in f.domain.axes:
            counts[label] = counts.get(label, 0) + 1
            if label in seen:
                if seen[label] != alpha:
                    raise ValueError(f"alphabet mismatch on shared label {label!r}")
            else:
                seen[label] = alpha
    bad = sorted(l for l, c in counts.items() if c > 2)
    if bad:
        raise ValueError(f"label(s) {bad} appear in more than two factors")
    return {l: seen[l] for l, c in counts.items() if c == 1}


def contract(factors: Sequence[Factor]) -> Factor:
    """Sum-of-products of the inputs.

    Labels shared by two inputs are summed over; labels appearing once survive
    in first-appearance order.
    """
    factors = list(factors)
    if not factors:
        return Factor.scalar(1.0)
    surviving = _check_shared_alphabets(factors)
    out_labels: List[str] = []
    for f in factors:
        for label in f.labels:
            if label in surviving and label not in out_labels:
                out_labels.append(label)

    ids: dict[str, int] = {}
    operands = []
    for f in factors:
        subscript = [ids.setdefault(l, len(ids)) for l in f.labels]
        operands.extend([f.values, subscript])
    operands.append([ids[l] for l in out_labels])
    values = np.einsum(*operands, optimize=True)

    axes = tuple((l, surviving[l]) for l in out_labels)
    return Factor(make_product_domain(axes), values)


def multiply_pointwise(a: Factor, b: Factor) -> Factor:
    """Pointwise product over the union of axes; shared labels are aligned, not summed."""
    for label in set(a.labels) & set(b.labels):
        if a.alphabet(label) != b.alphabet(label):
            raise ValueError(f"alphabet mismatch on shared label {label!r}")
    out_labels = list(a.labels) + [l for l in b.labels if l not in a.labels]
    ids: dict[str, int] = {}
    sub_a = [ids.setdefault(l, len(ids)) for l in a.labels]
    sub_b = [ids.setdefault(l, len(ids)) for l in b.labels]
    out = [ids[l] for l in out_labels]
    values = np.einsum(a.values, sub_a, b.values, sub_b, out)
    alpha = {l: al for l, al in list(a.domain.axes) + list(b.domain.axes)}
    return Factor(make_product_domain([(l, alpha[l]) for l in out_labels]), values)


def marginalize(f: Factor, label: str, mode: str = "sum", value: Optional[int] = None) -> Factor:
    """Remove an axis by summation (``sum``) or by slicing at ``value`` (``evaluate``)."""
    ax = f.domain.axis_index(label)
    axes = tuple(t for i, t in enumerate(f.domain.axes) if i != ax)
    if mode == "sum":
        values = f.values.sum(axis=ax)
    elif mode == "evaluate":
        if value is None:
            raise ValueError("evaluate mode needs a value")
        v = f.domain.axes[ax][1].check(value)
        values = np.take(f.values, v, axis=ax)
    else:
        raise ValueError(f"unknown marginalize mode {mode!r}")
    return Factor(make_product_domain(axes), values)


def outer_univariate_profiles(table: np.ndarray, tol: float = REL_TOL) -> Optional[List[np.ndarray]]:
    """Profiles v_k with ``table == table[anchor] * outer(v_1, ..., v_n)``, or None.

    Uses the per-slice anchor criterion: profiles are the axis-wise slices
    through the maximum-magnitude entry, normalized by it.  An all-zero table
    is vacuously an outer product of zero profiles.
    """
    if table.ndim == 0:
        return []
    flat_anchor = int(np.argmax(np.abs(table)))
    anchor = np.unravel_index(flat_anchor, table.shape)
    pivot_val = table[anchor]
    scale = abs(pivot_val)
    if scale == 0.0:
        return [np.zeros(n, dtype=np.complex128) for n in table.shape]
    profiles = []
    for ax in range(table.ndim):
        idx = list(anchor)
        idx[ax] = slice(None)
        profiles.append(np.array(table[tuple(idx)]) / pivot_val)
    rebuilt = pivot_val * _outer_many(profiles)
    if np.max(np.abs(table - rebuilt)) > tol * scale:
        return None
    return profiles


def _outer_many(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(1.0, dtype=np.complex128)
    for v in vectors:
        out = np.multiply.outer(out, v)
    return out


def split_decompose(f: Factor, pivot: str, tol: float = REL_TOL) -> Optional[List[Factor]]:
    """Factor ``f`` as a product of bivariates pairing ``pivot`` with each other axis.

    Returns ``None`` when some pivot slice is not an outer product within
    ``tol``.  Normalization: every bivariate except the first has, per pivot
    value with a nonzero slice, its maximum-magnitude entry scaled to exactly
    1; the first bivariate absorbs the remaining scale.
    """
    if f.ndim < 2:
        raise ValueError("split_decompose needs a factor with at least 2 axes")
    p = f.domain.axis_index(pivot)
    rest = [t for i, t in enumerate(f.domain.axes) if i != p]
    if f.ndim == 2:
        return [f.transpose([pivot, rest[0][0]])]

    moved = np.moveaxis(f.values, p, 0)
    pivot_alpha = f.domain.axes[p][1]
    n_rest = len(rest)
    profiles_per_value: List[List[np.ndarray]] = []
    lead: List[complex] = []
    for v in range(pivot_alpha.size):
        slc = moved[v]
        prof = outer_univariate_profiles(slc, tol=tol)
        if prof is None:
            return None
        anchor_val = slc[np.unravel_index(int(np.argmax(np.abs(slc))), slc.shape)]
        profiles_per_value.append(prof)
        lead.append(complex(anchor_val))

    parts: List[np.ndarray] = [np.zeros((pivot_alpha.size, a.size), dtype=np.complex128)
                               for _, a in rest]
    for v in range(pivot_alpha.size):
        if lead[v] == 0:
            parts[0][v, :] = 0.0
            for k in range(1, n_rest):
                parts[k][v, :] = 1.0
            continue
        head_scale = lead[v]
        for k in range(1, n_rest):
            prof = profiles_per_value[v][k]
            m = prof[int(np.argmax(np.abs(prof)))]
            parts[k][v, :] = prof / m
            head_scale = head_scale * m
        parts[0][v, :] = profiles_per_value[v][0] * head_scale

    out = []
    for (label, alpha), table in zip(rest, parts):
        dom = make_product_domain([(pivot, pivot_alpha), (label, alpha)])
        out.append(Factor(dom, table))
    return out


def conditional_constant(f: Factor, pivot: str, tol: float = REL_TOL) -> Optional[complex]:
    """The constant c with ``sum over pivot == c`` for every tail assignment, or None."""
    ax = f.domain.axis_index(pivot)
    summed = f.values.sum(axis=ax)
    c = complex(summed.reshape(-1).mean()) if summed.size else 0.0
    scale = float(np.max(np.abs(summed))) if summed.size else 0.0
    if scale == 0.0:
        return 0.0 + 0.0j
    if np.max(np.abs(summed - c)) > tol * scale:
        return None
    return c
