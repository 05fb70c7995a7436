"""Core label spaces and the affine-decomposition contract for discrete losses.

Every loss in this package evaluates on finite spaces and carries an exact
affine decomposition of its loss matrix,

    L(z, y) = F_z . U_y + c,

with F_z, U_y in R^r.  The decomposition is what makes the surrogate
estimator train in r dimensions instead of |Z| dimensions, and the triple
(r, sup_z ||F_z||_2, max |U|) controls the statistical constant of the
method.

Label conventions
-----------------
- subsets of {0..m-1}: tuples of m ints in {0,1}; canonical order is
  lexicographic on the tuple (equivalently integer order with index 0 as
  the most significant bit).
- permutations: tuples sigma of length m with sigma[j] = rank of item j,
  ranks 1..m; canonical order is lexicographic on one-line notation.
- relevance vectors: tuples of m ints in {0..R}; lexicographic order.

All enumeration helpers yield labels in canonical order, and every decoder
and brute-force argmin in this package breaks ties by canonical order, so
fast and exhaustive inference are exactly interchangeable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

Label = tuple  # subsets, permutations and relevance vectors are all int tuples


class LossConfigError(ValueError):
    """Invalid loss parameters (bad k, partition, gain/discount, ...)."""


class InvalidLabelError(ValueError):
    """Label outside the loss's output/observation space."""


class SpaceTooLargeError(ValueError):
    """Requested an exhaustive enumeration over a space that is too large."""


# ---------------------------------------------------------------------------
# label space helpers
# ---------------------------------------------------------------------------

def subsets(m: int) -> Iterator[Label]:
    """All bit tuples of length m in canonical (lexicographic) order."""
    return itertools.product((0, 1), repeat=m)


def ksubsets(m: int, k: int) -> Iterator[Label]:
    """Bit tuples of length m with exactly k set bits, canonical order."""
    return (z for z in subsets(m) if sum(z) == k)


def permutations(m: int) -> Iterator[Label]:
    """Permutations in one-line notation (sigma[j] = rank of item j), lex order."""
    return itertools.permutations(range(1, m + 1))


def relevance_grid(m: int, top: int) -> Iterator[Label]:
    """All relevance vectors in {0..top}^m, lexicographic order."""
    return itertools.product(range(top + 1), repeat=m)


def subset_from_rank(rank: int, m: int) -> Label:
    """Inverse of canonical subset enumeration: rank 0 -> (0,...,0)."""
    return tuple((rank >> (m - 1 - j)) & 1 for j in range(m))


def subset_rank(z: Sequence[int]) -> int:
    rank = 0
    for bit in z:
        rank = (rank << 1) | bit
    return rank


def is_bit_tuple(y, m: int) -> bool:
    return (
        isinstance(y, tuple)
        and len(y) == m
        and all(isinstance(b, (int, np.integer)) and b in (0, 1) for b in y)
    )


def is_permutation_tuple(z, m: int) -> bool:
    return (
        isinstance(z, tuple)
        and len(z) == m
        and sorted(z) == list(range(1, m + 1))
    )


def as_label(y) -> Label:
    """Coerce lists/arrays to the canonical tuple-of-int representation."""
    if isinstance(y, tuple) and all(isinstance(b, int) for b in y):
        return y
    return tuple(int(b) for b in y)


# ---------------------------------------------------------------------------
# decomposition and constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SharpConstant:
    """The loss-dependent constant A = sqrt(r) * ||F||_inf * U_max.

    ``is_bound`` marks losses for which the reported triple is the standard
    closed-form bound rather than the exact enumerated value (F-score, MAP);
    for those the exact values are given in ``note``.
    """

    r: int
    f_inf_norm: float
    u_max: float
    a: float
    is_bound: bool = False
    note: str = ""


class DiscreteLoss:
    """A loss L: Z x Y -> [0,1] with an exact affine decomposition.

    Subclasses fix the output space Z, observation space Y, the evaluator
    ``value``, the decomposition (``f_row``, ``u_row``, ``offset``, ``r``)
    and the exact sup-norm ``f_norm`` of the F rows.
    """

    name: str
    m: int
    r: int
    offset: float
    f_norm: float  # exact sup_z ||F_z||_2 of the implemented decomposition

    # -- spaces ------------------------------------------------------------
    def outputs(self) -> Iterator[Label]:
        raise NotImplementedError

    def observations(self) -> Iterator[Label]:
        raise NotImplementedError

    def n_outputs(self) -> int:
        raise NotImplementedError

    def n_observations(self) -> int:
        raise NotImplementedError

    def check_output(self, z: Label) -> None:
        raise NotImplementedError

    def check_observation(self, y: Label) -> None:
        raise NotImplementedError

    def is_degenerate(self, y: Label) -> bool:
        """True for observations that carry no preference information.

        Degenerate observations have U_y = 0 and L(., y) = 0; they are valid
        inputs but are excluded from the decomposition identity check because
        the offset c is only realized on informative observations.
        """
        return False

    # -- loss and decomposition ---------------------------------------------
    def value(self, z: Label, y: Label) -> float:
        raise NotImplementedError

    def f_row(self, z: Label) -> np.ndarray:
        raise NotImplementedError

    def u_row(self, y: Label) -> np.ndarray:
        raise NotImplementedError

    def sharp(self) -> SharpConstant:
        raise NotImplementedError

    # -- generic helpers -----------------------------------------------------
    def embed(self, y) -> np.ndarray:
        """U_y for a validated observation (the surrogate regression target)."""
        y = as_label(y)
        self.check_observation(y)
        return self.u_row(y)

    def enumerable(self, limit: int = 300_000) -> bool:
        return self.n_outputs() * self.n_observations() <= limit

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(m={self.m}, r={self.r})"


def decomposition_check(loss: DiscreteLoss, limit: int = 1_500_000) -> float:
    """Max over all (z, y) of |F_z . U_y + c - L(z, y)|.

    Exhaustive over both spaces; raises SpaceTooLargeError beyond ``limit``
    pairs.  Degenerate observations (U_y = 0 by convention) are skipped, see
    ``DiscreteLoss.is_degenerate``.
    """
    n_pairs = loss.n_outputs() * loss.n_observations()
    if n_pairs > limit:
        raise SpaceTooLargeError(
            f"{loss.name}: {n_pairs} (z, y) pairs exceed limit {limit}; "
            "use a sampled check instead"
        )
    f_rows = np.array([loss.f_row(z) for z in loss.outputs()])
    worst = 0.0
    for y in loss.observations():
        if loss.is_degenerate(y):
            continue
        vals = np.array([loss.value(z, y) for z in loss.outputs()])
        approx = f_rows @ loss.u_row(y) + loss.offset
        worst = max(worst, float(np.max(np.abs(approx - vals))))
    return worst


def enumerated_constants(loss: DiscreteLoss) -> tuple[float, float]:
    """(max_z ||F_z||_2, max_{y,j} |U_yj|) by brute-force enumeration."""
    f_max = max(float(np.linalg.norm(loss.f_row(z))) for z in loss.outputs())
    u_max = max(float(np.max(np.abs(loss.u_row(y)))) for y in loss.observations())
    return f_max, u_max
