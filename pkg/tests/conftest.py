"""Shared helpers: loss inventories and random instance builders."""

from __future__ import annotations

import numpy as np
import pytest

from qslearn.losses import (
    BlockZeroOne,
    DiscreteLoss,
    FScore,
    Hamming,
    MeanAveragePrecision,
    NDCGType,
    PairwiseDisagreement,
    PrecAtK,
    ZeroOne,
    subsets,
)


def popcount_partition(m: int) -> list:
    """Canonical nontrivial partition of {0,1}^m: blocks by popcount."""
    blocks: dict[int, list] = {}
    for z in subsets(m):
        blocks.setdefault(sum(z), []).append(z)
    return [blocks[s] for s in sorted(blocks)]


def random_partition(m: int, b: int, rng: np.random.Generator) -> list:
    """Random b-block partition covering all subsets (every block nonempty)."""
    zs = list(subsets(m))
    while True:
        assign = rng.integers(b, size=len(zs))
        if len(set(assign.tolist())) == b:
            break
    blocks = [[] for _ in range(b)]
    for z, j in zip(zs, assign):
        blocks[j].append(z)
    return blocks


def small_losses(m_subset: int = 3, m_perm: int = 3) -> list:
    """One instance of every loss at enumeration-friendly sizes."""
    return [
        ZeroOne(m_subset),
        BlockZeroOne(m_subset, popcount_partition(m_subset)),
        Hamming(m_subset),
        PrecAtK(max(m_subset, 2), max(m_subset // 2, 1)),
        FScore(m_subset, side="p"),
        FScore(m_subset, side="a"),
        NDCGType(m_perm, top_relevance=2),
        NDCGType.eru(m_perm, top_relevance=2),
        PairwiseDisagreement(max(m_perm, 2)),
        MeanAveragePrecision(m_perm),
    ]


def loss_ids(losses) -> list:
    out = []
    for loss in losses:
        tag = f"{loss.name}-m{loss.m}"
        if isinstance(loss, FScore):
            tag += f"-{loss.side}"
        out.append(tag)
    return out


def random_observation(loss: DiscreteLoss, rng: np.random.Generator):
    obs = getattr(loss, "_obs_cache", None)
    if obs is None:
        obs = list(loss.observations())
        loss._obs_cache = obs
    return obs[int(rng.integers(len(obs)))]


def _f_rows(loss: DiscreteLoss) -> np.ndarray:
    rows = getattr(loss, "_f_rows_cache", None)
    if rows is None:
        rows = np.array([loss.f_row(z) for z in loss.outputs()])
        loss._f_rows_cache = rows
    return rows


def random_instance(loss: DiscreteLoss, rng: np.random.Generator, n: int = 10):
    """Random weights and observations for a decoder/oracle comparison.

    Instances whose argmin is (near-)tied are redrawn: with exact ties the
    fast and brute-force paths agree only up to floating-point noise in the
    score computation, which the exact-comparison tie-break contract
    explicitly excludes.
    """
    f_rows = _f_rows(loss)
    for _ in range(100):
        weights = rng.normal(size=n)
        ys = [random_observation(loss, rng) for _ in range(n)]
        theta = np.sum([w * loss.u_row(y) for w, y in zip(weights, ys)], axis=0)
        if argmin_untied(f_rows, theta):
            return weights, ys, theta
    raise AssertionError("could not draw an untied instance")


def argmin_untied(f_rows: np.ndarray, theta: np.ndarray, gap: float = 1e-9) -> bool:
    """True when the argmin of F . theta is unambiguous across computation orders.

    Exact ties between identical F rows are benign (any summation order gives
    bitwise-equal scores, so every path picks the canonical first row); exact
    or near ties between DISTINCT rows are resolved by sub-ulp rounding
    differences and are excluded from equivalence tests by design.
    """
    scores = f_rows @ theta
    smin = scores.min()
    tied = np.flatnonzero(scores == smin)
    for i in tied[1:]:
        if not np.array_equal(f_rows[i], f_rows[tied[0]]):
            return False
    above = scores[scores > smin]
    return not above.size or float(above.min() - smin) > gap


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
