"""Boolean functions, decision trees and their Walsh-Hadamard spectra.

Inputs are n-bit strings x = (x_0, ..., x_{n-1}) stored at truth-table index
sum_j x_j * 2^(n-1-j), so x_0 is the most significant bit. Parity masks use
the same layout, and a prefix of mask bits selects a contiguous index range.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels

MAX_BITS = 20


def _check_bits(n: int) -> None:
    if not 1 <= n <= MAX_BITS:
        raise ValueError(f"n must be in [1, {MAX_BITS}], got {n}")


@dataclass(frozen=True)
class BooleanFunction:
    """Total map {0,1}^n -> {-1,+1} stored as a truth table."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_bits(self.n)
        values = np.asarray(self.values)
        if values.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} values, got shape {values.shape}")
        if not np.all((values == 1) | (values == -1)):
            raise ValueError("truth-table entries must be -1 or +1")
        values = values.astype(np.int8)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, x: int) -> int:
        return int(self.values[x])

    def __neg__(self) -> "BooleanFunction":
        return BooleanFunction(self.n, -self.values)

    @classmethod
    def constant(cls, n: int, label: int = 1) -> "BooleanFunction":
        return cls(n, np.full(1 << n, label, dtype=np.int8))

    @classmethod
    def parity(cls, n: int, mask: int) -> "BooleanFunction":
        return cls(n, parity_table(mask, n))


@dataclass(frozen=True)
class Leaf:
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError("leaf label must be -1 or +1")


@dataclass(frozen=True)
class Node:
    """Internal node: ``low`` is followed when x_var = 0, ``high`` when x_var = 1."""

    var: int
    low: "Tree"
    high: "Tree"


Tree = Union[Leaf, Node]


def tree_size(tree: Tree) -> int:
    """Number of leaves."""
    if isinstance(tree, Leaf):
        return 1
    return tree_size(tree.low) + tree_size(tree.high)


def tree_depth(tree: Tree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.low), tree_depth(tree.high))


def input_bit(x: int, var: int, n: int) -> int:
    return (x >> (n - 1 - var)) & 1


def validate_tree(tree: Tree, n: int) -> None:
    """Raise if any variable index is out of range or repeats along a path."""

    def walk(node: Tree, seen: frozenset) -> None:
        if isinstance(node, Leaf):
            return
        if not 0 <= node.var < n:
            raise ValueError(f"variable index {node.var} out of range for n={n}")
        if node.var in seen:
            raise ValueError(f"variable {node.var} repeats along a path")
        walk(node.low, seen | {node.var})
        walk(node.high, seen | {node.var})

    walk(tree, frozenset())


def eval_tree(tree: Tree, x: int, n: int) -> int:
    node = tree
    while isinstance(node, Node):
        node = node.high if input_bit(x, node.var, n) else node.low
    return node.label


def random_tree(n: int, t: int, rng: np.random.Generator) -> Tree:
    """Grow a tree with exactly ``t`` leaves by splitting uniformly chosen leaves.

    Split variables are drawn without replacement along each path and leaf
    labels are uniform signs.
    """
    _check_bits(n)
    if not 1 <= t <= (1 << n):
        raise ValueError(f"t must be in [1, 2^n], got {t}")
    # each open leaf is represented by the tuple of variables on its path
    leaves: list[tuple[int, ...]] = [()]
    splits: dict[tuple[int, ...], int] = {}
    paths_of: dict[tuple[int, ...], tuple] = {(): ()}
    while len(leaves) < t:
        splittable = [i for i, leaf in enumerate(leaves) if len(paths_of[leaf]) < n]
        index = splittable[rng.integers(len(splittable))]
        leaf = leaves.pop(index)
        used = set(paths_of[leaf])
        free = [v for v in range(n) if v not in used]
        var = free[rng.integers(len(free))]
        splits[leaf] = var
        for branch in (0, 1):
            child = leaf + (branch,)
            paths_of[child] = paths_of[leaf] + (var,)
            leaves.append(child)
    labels = {leaf: int(rng.choice((-1, 1))) for leaf in sorted(leaves)}

    def build(key: tuple[int, ...]) -> Tree:
        if key in splits:
            return Node(splits[key], build(key + (0,)), build(key + (1,)))
        return Leaf(labels[key])

    return build(())


def _input_bits(n: int) -> np.ndarray:
    """Array of shape (n, 2^n) with row j holding x_j for every input."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[:, None]
    return ((idx[None, :] >> shifts) & 1).astype(bool)


def tree_to_function(tree: Tree, n: int) -> BooleanFunction:
    validate_tree(tree, n)
    bits = _input_bits(n)
    values = np.empty(1 << n, dtype=np.int8)

    def fill(node: Tree, selected: np.ndarray) -> None:
        if isinstance(node, Leaf):
            values[selected] = node.label
            return
        high = bits[node.var]
        fill(node.low, selected & ~high)
        fill(node.high, selected & high)

    fill(tree, np.ones(1 << n, dtype=bool))
    return BooleanFunction(n, values)


def parity_table(mask: int, n: int) -> np.ndarray:
    """chi_mask over all inputs as an int8 +-1 array."""
    return kernels.parity_vector(mask, n)


def parity_eval(mask: int, x: int) -> int:
    return -1 if bin(mask & x).count("1") & 1 else 1


def bits_to_mask(bits: Sequence[int]) -> int:
    """Interpret ``bits`` most-significant-first as an integer."""
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        value = (value << 1) | b
    return value


def mask_to_bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> (n - 1 - j)) & 1 for j in range(n))


@dataclass(frozen=True)
class Prefix:
    """Leading bits of a parity mask, most significant first."""

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("prefix bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        return bits_to_mask(self.bits)

    def child(self, bit: int) -> "Prefix":
        return Prefix(self.bits + (bit,))

    @classmethod
    def from_value(cls, value: int, length: int) -> "Prefix":
        return cls(mask_to_bits(value, length) if length else ())

    @classmethod
    def parse(cls, text: str) -> "Prefix":
        return cls(tuple(int(c) for c in text.strip()))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def as_prefix(p) -> Prefix:
    if isinstance(p, Prefix):
        return p
    if isinstance(p, str):
        return Prefix.parse(p)
    return Prefix(tuple(p))


def mask_range(prefix_value: int, length: int, n: int) -> tuple[int, int]:
    """Half-open index range of masks extending the given prefix."""
    if length > n:
        raise ValueError(f"prefix length {length} exceeds n={n}")
    span = 1 << (n - length)
    return prefix_value * span, (prefix_value + 1) * span


@dataclass(frozen=True)
class FourierSpectrum:
    """Coefficients indexed by parity mask, with cached squared-weight prefix sums."""

    n: int
    coeffs: np.ndarray
    _cumsq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_bits(self.n)
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got shape {coeffs.shape}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        cumsq = np.concatenate(([0.0], np.cumsum(coeffs * coeffs)))
        cumsq.setflags(write=False)
        object.__setattr__(self, "_cumsq", cumsq)

    def range_weight(self, start: int, stop: int) -> float:
        return float(self._cumsq[stop] - self._cumsq[start])

    def level_weights(self, length: int) -> np.ndarray:
        """PW of every prefix of the given length, indexed by prefix value."""
        span = 1 << (self.n - length)
        return self._cumsq[span::span] - self._cumsq[:-1:span]


def walsh_transform(values: np.ndarray) -> np.ndarray:
    """Normalized transform 2^-n * sum_x v(x) chi_S(x) of a real table."""
    out = np.array(values, dtype=np.float64, copy=True)
    kernels.fwht(out)
    out /= out.shape[0]
    return out


def wht(f: BooleanFunction) -> FourierSpectrum:
    return FourierSpectrum(f.n, walsh_transform(f.values))


def inverse_wht(spectrum: FourierSpectrum) -> np.ndarray:
    """Real-valued table sum_S coeffs[S] chi_S(x)."""
    out = np.array(spectrum.coeffs, dtype=np.float64, copy=True)
    kernels.fwht(out)
    return out


def prefix_weight(spectrum: FourierSpectrum, p) -> float:
    prefix = as_prefix(p)
    start, stop = mask_range(prefix.value, len(prefix), spectrum.n)
    return spectrum.range_weight(start, stop)


def l1_norm(spectrum: FourierSpectrum) -> float:
    return float(np.abs(spectrum.coeffs).sum())


def best_parity(spectrum: FourierSpectrum) -> tuple[int, float]:
    """Mask with the largest |coefficient|; ties go to the smallest mask."""
    magnitudes = np.abs(spectrum.coeffs)
    mask = int(np.argmax(magnitudes))  # argmax returns the first maximum
    return mask, float(magnitudes[mask])
