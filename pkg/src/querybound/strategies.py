"""Strategy constructors and a uniform evaluator against the spectral bound.

A strategy is the query set actually submitted to the noise mechanism; the
workload's answers are recovered from it. This module builds the standard
ones (identity, the workload itself, fanout-k hierarchical trees, Haar
wavelets, and the Gram-square-root strategy that achieves the certificate
bound) and evaluates any of them analytically.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .exceptions import DimOutOfRange, ExplicitRequired, NotPowerOfTwo
from .logspace import log_add, log_sub
from .mechanism import StrategyErrorReport, analytic_total_error
from .numkernel import as_sym_matrix, psd_sqrt
from .workloads import EXPLICIT_ENTRY_CAP, Workload, _read_matrix_csv, _write_matrix_csv


@dataclass(frozen=True)
class Strategy:
    """A tagged strategy: the wrapped workload plus how it was built."""

    kind: str
    workload: Workload

    @property
    def n(self) -> int:
        return self.workload.n

    @property
    def is_explicit(self) -> bool:
        return self.workload.is_explicit

    @property
    def matrix(self) -> np.ndarray:
        return self.workload.matrix


def identity_strategy(n: int) -> Strategy:
    """One query per cell: the baseline strategy."""
    if n < 1:
        raise DimOutOfRange(f"n must be >= 1, got {n}")
    return Strategy("identity", Workload.from_matrix(np.eye(n), dedup=False))


def workload_strategy(W: Workload) -> Strategy:
    """Submit the workload itself as the strategy."""
    return Strategy("workload", W)


def hierarchical_strategy(n: int, fanout: int = 2) -> Strategy:
    """Interval-tree strategy: one row per node of a fanout-ary tree.

    The root sums the whole domain, leaves are singletons, and uneven splits
    give the last child the remainder, so the depth is ceil(log_fanout n)+1
    levels and each cell appears in exactly that many rows when n is a power
    of fanout.
    """
    n, fanout = int(n), int(fanout)
    if n < 1:
        raise DimOutOfRange(f"n must be >= 1, got {n}")
    if fanout < 2:
        raise DimOutOfRange(f"fanout must be >= 2, got {fanout}")
    rows = []
    queue = deque([(0, n)])  # breadth-first so levels come out in order
    while queue:
        lo, size = queue.popleft()
        row = np.zeros(n)
        row[lo:lo + size] = 1.0
        rows.append(row)
        if size > 1:
            k = min(fanout, size)
            q = -(-size // k)  # ceil keeps every child <= ceil(size/fanout),
            starts = list(range(lo, lo + size, q))  # so the depth stays log
            ends = starts[1:] + [lo + size]
            for s, e in zip(starts, ends):
                queue.append((s, e - s))
    M = np.asarray(rows)
    return Strategy(f"hierarchical(fanout={fanout})",
                    Workload.from_matrix(M, dedup=False))


def haar_strategy(n: int) -> Strategy:
    """Unnormalized Haar wavelet rows: a total row plus +1/-1 half-blocks.

    Every column carries exactly log2(n) + 1 nonzero entries, all of
    magnitude one, so the squared L2 sensitivity is log2(n) + 1.
    """
    n = int(n)
    if n < 1 or n & (n - 1):
        raise NotPowerOfTwo(f"Haar strategy needs n = 2^k, got {n}")
    rows = [np.ones(n)]
    block = n
    while block > 1:
        half = block // 2
        for start in range(0, n, block):
            row = np.zeros(n)
            row[start:start + half] = 1.0
            row[start + half:start + block] = -1.0
            rows.append(row)
        block = half
    return Strategy("haar", Workload.from_matrix(np.asarray(rows), dedup=False))


def _uniform_sqrt(W: Workload) -> Workload:
    """Square root of a constant-diagonal Gram, computed on log scales."""
    n = W.n
    la, lb = W.uniform.log_diag, W.uniform.log_off
    if n == 1:
        return Workload.from_uniform_gram(1, 0.5 * la, -math.inf)
    l_gap = 0.5 * log_sub(la, lb)  # sqrt(diag - off) eigenvalue
    l_top = 0.5 * log_add(la, math.log(n - 1) + lb)
    l_off = log_sub(l_top, l_gap) - math.log(n) if l_top > l_gap else -math.inf
    l_diag = log_add(l_off, l_gap)
    return Workload.from_uniform_gram(n, l_diag, l_off)


def sqrt_strategy(G, explicit: bool = False) -> Strategy:
    """Strategy whose Gram is the matrix square root of the workload Gram.

    Its error meets the looseness upper bound d0 * trace(sqrt(G)) * P and
    collapses to P * svdb exactly when the tightness certificate holds.
    Accepts a Gram matrix or a Workload; explicit=True realizes the strategy
    as the symmetric fourth root for use in the sampling mechanisms.
    """
    if isinstance(G, Strategy):
        G = G.workload
    if isinstance(G, Workload):
        if G.uniform is not None and not G.uniform.materializable():
            if explicit:
                raise ExplicitRequired(
                    "sqrt strategy for this workload exceeds float range; "
                    "only the log-space Gram form exists")
            return Strategy("sqrt", _uniform_sqrt(G))
        G = G.gram
    R = psd_sqrt(as_sym_matrix(G))
    if explicit:
        return Strategy("sqrt", Workload.from_matrix(psd_sqrt(R), dedup=False))
    return Strategy("sqrt", Workload.from_gram(R))


def kron_strategy(parts) -> Strategy:
    """Kronecker product of per-dimension strategies (row-major cell order)."""
    parts = [p if isinstance(p, Strategy) else Strategy("custom", p) for p in parts]
    if not parts:
        raise DimOutOfRange("need at least one strategy to compose")
    if len(parts) == 1:
        return parts[0]
    kinds = "x".join(p.kind for p in parts)
    if all(p.is_explicit for p in parts):
        entries = math.prod(p.matrix.shape[0] for p in parts) \
            * math.prod(p.n for p in parts)
        if entries <= EXPLICIT_ENTRY_CAP:
            M = parts[0].matrix
            for p in parts[1:]:
                M = np.kron(M, p.matrix)
            return Strategy(kinds, Workload.from_matrix(M, dedup=False))
    G = parts[0].workload.gram
    for p in parts[1:]:
        G = np.kron(G, p.workload.gram)
    return Strategy(kinds, Workload.from_gram(G))


def evaluate_strategy(W: Workload, A, params=None) -> StrategyErrorReport:
    """Analytic error report of a strategy (or raw matrix) on a workload."""
    A = A.workload if isinstance(A, Strategy) else A
    return analytic_total_error(W, A, params)


def save_strategy_csv(A, path):
    A = A if isinstance(A, Strategy) else Strategy("custom", A)
    if not A.is_explicit:
        raise ExplicitRequired("only explicit strategies serialize to CSV")
    _write_matrix_csv(A.matrix, path, "strategy")


def load_strategy_csv(path) -> Strategy:
    M = _read_matrix_csv(path, "strategy")
    return Strategy("custom", Workload.from_matrix(M, dedup=False))
