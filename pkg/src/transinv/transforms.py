"""Transformation collections: finite lists, permutation groups, linear maps,
maps on the Boolean cube and the lower-bound family T_P.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .core import (LabeledSample, PreconditionError, Transform, as_points,
                   is_hypercube)


class Permutation(Transform):
    """Coordinate permutation: output coordinate i is input coordinate perm[i]."""

    def __init__(self, perm, index: int = 0, name: str | None = None):
        self.perm = np.asarray(perm, dtype=int)
        if sorted(self.perm.tolist()) != list(range(len(self.perm))):
            raise PreconditionError(f"{perm!r} is not a permutation")
        self.index = index
        self.name = name or "perm(" + ",".join(map(str, self.perm)) + ")"

    def apply(self, X):
        if X.shape[1] != len(self.perm):
            raise PreconditionError(
                f"dimension mismatch: permutation of {len(self.perm)} coordinates, point d={X.shape[1]}")
        return X[:, self.perm]


def swap(i: int, j: int, d: int, index: int = 0) -> Permutation:
    p = list(range(d))
    p[i], p[j] = p[j], p[i]
    return Permutation(p, index=index, name=f"swap({i},{j})")


class LinearMap(Transform):
    def __init__(self, A, index: int = 0, name: str | None = None):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise PreconditionError(f"linear map must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise PreconditionError("linear map has non-finite entries")
        self.A = A
        self.index = index
        self.name = name or f"L{index + 1}"

    def apply(self, X):
        if X.shape[1] != self.A.shape[1]:
            raise PreconditionError(
                f"dimension mismatch: {self.A.shape[0]}x{self.A.shape[1]} map, point d={X.shape[1]}")
        return X @ self.A.T


# Boolean cube helpers. Bits b in {0,1} are recoded as 1 - 2b, i.e. 0 -> +1, 1 -> -1.

def bits_to_pm(B) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(B, dtype=float)


def pm_to_bits(X) -> np.ndarray:
    return ((1 - np.asarray(X)) // 2).astype(int)


def cube(d: int) -> np.ndarray:
    """All 2^d points of {+1,-1}^d; row r encodes the bits of r, most significant first."""
    r = np.arange(2 ** d)
    bits = (r[:, None] >> np.arange(d - 1, -1, -1)) & 1
    return bits_to_pm(bits)


def cube_index(X) -> np.ndarray:
    bits = pm_to_bits(X)
    d = bits.shape[1]
    return bits @ (1 << np.arange(d - 1, -1, -1))


class BitmapTransform(Transform):
    """Map {0,1}^d -> {0,1}^d given by a table of output indices, acting on +-1 points."""

    def __init__(self, table, d: int, index: int = 0, name: str | None = None):
        table = np.asarray(table, dtype=int)
        if table.shape != (2 ** d,) or np.any(table < 0) or np.any(table >= 2 ** d):
            raise PreconditionError(f"bitmap table must map 2^{d} indices into range")
        self.table = table
        self.d = d
        self._cube = cube(d)
        self.index = index
        self.name = name or f"B{index + 1}"

    def apply(self, X):
        if X.shape[1] != self.d or not is_hypercube(X):
            raise PreconditionError(f"{self.name}: points must lie in {{+1,-1}}^{self.d}")
        return self._cube[self.table[cube_index(X)]]

    @classmethod
    def from_function(cls, fn, d: int, index: int = 0, name: str | None = None):
        """Tabulate ``fn`` acting on bit vectors in {0,1}^d."""
        B = pm_to_bits(cube(d))
        out = np.asarray([fn(b) for b in B], dtype=int)
        return cls(cube_index(bits_to_pm(out)), d, index=index, name=name)


def bit_flip(mask: Sequence[int], index: int = 0) -> BitmapTransform:
    mask = np.asarray(mask, dtype=int)
    name = "xor(" + "".join(map(str, mask)) + ")"
    return BitmapTransform.from_function(lambda b: b ^ mask, len(mask), index=index, name=name)


class TransformSpace:
    """A finite indexed collection of transforms, optionally weighted.

    ``weights`` encode a prior w over the collection with sum(w) <= 1.
    """

    kind = "finite-list"
    enumerable = True

    def __init__(self, transforms: Iterable[Transform] = (), weights=None):
        self._members = list(transforms)
        for j, t in enumerate(self._members):
            t.index = j
        self.weights = None
        if weights is not None:
            w = np.asarray(weights, dtype=float)
            if w.shape != (len(self),):
                raise PreconditionError(f"{w.shape[0]} weights for {len(self)} transforms")
            if np.any(w < 0) or np.any(w > 1) or math.fsum(w) > 1 + 1e-9:
                raise PreconditionError("weights must lie in [0,1] and sum to at most 1")
            self.weights = w

    def members(self) -> list[Transform]:
        return list(self._members)

    def __iter__(self):
        return iter(self.members())

    def __len__(self):
        return len(self._members)

    def __getitem__(self, j):
        return self.members()[j]

    def sample(self, rng: np.random.Generator) -> Transform:
        ms = self.members()
        return ms[int(rng.integers(len(ms)))]

    def describe(self) -> dict:
        return {"kind": self.kind, "size": len(self)}


class LinearMaps(TransformSpace):
    kind = "linear"

    def __init__(self, matrices, weights=None):
        super().__init__([LinearMap(A, index=j) for j, A in enumerate(matrices)], weights)


class BooleanBitmaps(TransformSpace):
    kind = "boolean-bitmap"

    def __init__(self, transforms: Iterable[BitmapTransform], weights=None):
        transforms = list(transforms)
        if not all(isinstance(t, BitmapTransform) for t in transforms):
            raise PreconditionError("boolean-bitmap spaces hold BitmapTransform members")
        super().__init__(transforms, weights)

    @classmethod
    def all_flips(cls, d: int) -> "BooleanBitmaps":
        masks = itertools.product([0, 1], repeat=d)
        return cls(bit_flip(m, index=j) for j, m in enumerate(masks))


class AllPermutations(TransformSpace):
    """The symmetric group on d coordinates; the invariance group of full parity."""

    kind = "permutations-all"

    def __init__(self, d: int):
        if d < 1:
            raise PreconditionError("d must be positive")
        self.d = d
        self.weights = None

    def __len__(self):
        return math.factorial(self.d)

    def members(self):
        if self.d > 8:
            raise PreconditionError(f"refusing to enumerate {self.d}! permutations")
        return [Permutation(p, index=j) for j, p in enumerate(itertools.permutations(range(self.d)))]

    def sample(self, rng):
        return Permutation(rng.permutation(self.d))

    def describe(self):
        return {"kind": self.kind, "d": self.d}


class BlockPermutations(TransformSpace):
    """Permutations that shuffle coordinates inside each of ``blocks`` equal
    blocks and permute the blocks as wholes (the wreath product S_b wr S_blocks).

    Every member preserves the product of each block up to block reordering,
    so majority-of-subparities is invariant under it.
    """

    kind = "permutations-block"

    def __init__(self, d: int, blocks: int = 3):
        if blocks < 1 or d % blocks:
            raise PreconditionError(f"{blocks} blocks must divide d={d}")
        self.d = d
        self.blocks = blocks
        self.size = d // blocks
        self.weights = None

    def __len__(self):
        return math.factorial(self.size) ** self.blocks * math.factorial(self.blocks)

    def _compose(self, order, inner) -> np.ndarray:
        # output block j reads input block order[j], internally shuffled by inner[j]
        b = self.size
        return np.concatenate([order[j] * b + np.asarray(inner[j]) for j in range(self.blocks)])

    def members(self):
        if len(self) > 50000:
            raise PreconditionError(f"refusing to enumerate {len(self)} block permutations")
        inner_perms = list(itertools.permutations(range(self.size)))
        out = []
        for order in itertools.permutations(range(self.blocks)):
            for inner in itertools.product(inner_perms, repeat=self.blocks):
                out.append(Permutation(self._compose(order, inner), index=len(out)))
        return out

    def sample(self, rng):
        order = rng.permutation(self.blocks)
        inner = [rng.permutation(self.size) for _ in range(self.blocks)]
        return Permutation(self._compose(order, inner))

    def describe(self):
        return {"kind": self.kind, "d": self.d, "blocks": self.blocks}


class LowerBoundTransform(Transform):
    """T_P: sends base point (-1, i) to the fresh point (p, i), p = index of P."""

    def __init__(self, p: int, n_base: int, subset=()):
        self.p = p
        self.n_base = n_base
        self.subset = tuple(subset)
        self.index = p
        self.name = "T_P(" + ",".join(str(i + 1) for i in self.subset) + ")"

    def apply(self, X):
        if X.shape[1] != 2:
            raise PreconditionError("lower-bound points have two coordinates (tag, index)")
        base = (X[:, 0] == -1) & (X[:, 1] >= 0) & (X[:, 1] < self.n_base) & (X[:, 1] == np.floor(X[:, 1]))
        if not np.all(base):
            raise PreconditionError(f"{self.name} is only defined on the {self.n_base} base points")
        return np.column_stack([np.full(X.shape[0], float(self.p)), X[:, 1]])


class LowerBoundTransforms(TransformSpace):
    """{T_P : P a k-subset of the 3k base points}, in lexicographic order of P."""

    kind = "lowerbound-TP"

    def __init__(self, k: int):
        if k < 1:
            raise PreconditionError("k must be positive")
        self.k = k
        self.subsets = list(itertools.combinations(range(3 * k), k))
        self.weights = None

    def __len__(self):
        return len(self.subsets)

    def members(self):
        return [LowerBoundTransform(p, 3 * self.k, P) for p, P in enumerate(self.subsets)]

    def describe(self):
        return {"kind": self.kind, "k": self.k}


def apply(t: Transform, x):
    """Image of a single point or a batch of points."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return t(x.reshape(1, -1))[0]
    return t(x)


def sample_transform(T: TransformSpace, rng: np.random.Generator) -> Transform:
    return T.sample(rng)


def inflate(T, s: LabeledSample) -> LabeledSample:
    """All (t(x), y) for t in T and (x, y) in s, transform-major."""
    if not getattr(T, "enumerable", True):
        raise PreconditionError("cannot inflate with a non-enumerable transform space")
    members = list(T)
    if not members:
        raise PreconditionError("empty transform space")
    X = np.concatenate([t(s.X) for t in members])
    y = np.tile(s.y, len(members))
    return LabeledSample(X, y)


def base_points(k: int) -> np.ndarray:
    return np.column_stack([np.full(3 * k, -1.0), np.arange(3 * k, dtype=float)])


def lowerbound_domain(k: int) -> np.ndarray:
    """Base points followed by every image point (p, i), p-major."""
    n = math.comb(3 * k, k)
    imgs = np.array([(p, i) for p in range(n) for i in range(3 * k)], dtype=float)
    return as_points(np.concatenate([base_points(k), imgs]))
