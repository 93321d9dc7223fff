"""Numerical search for graded embeddings of a cohomology ring into the exterior algebra.

A candidate ``Phi`` assigns to each basis class of ``H^k`` a k-vector of R^n
(one column of ``phi[k]``, coefficients in :func:`~cliffobs.exterior.blades_of_grade`
order).  Its residual sums the squared violations of

* ``Phi(x * y) = Phi(x) ^ Phi(y)`` on basis pairs (mode ``wedge``),
* closure of the image under the Hodge star (``wedge+star``),
* closure of the image under the Euclidean Clifford product
  (``wedge+star+clifford``).

A certificate is a candidate with residual below ``residual_threshold`` and
every degree's smallest singular value above ``margin_threshold``.  Failure to
find one is evidence only; the exact checks in :mod:`cliffobs.obstructions`
own every negative verdict.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from scipy.optimize import least_squares

from .errors import SearchRefused
from .exterior import Multivector, blades_of_grade, format_multivector, reorder_sign
from .obstructions import Verdict, check_b1, check_betti_bound, check_middle_split
from .ring import GradedRing

log = logging.getLogger(__name__)

MODES = ("wedge", "wedge+star", "wedge+star+clifford")
LOCAL_METHODS = ("lm", "trf", "pattern")
MODE_ALIASES = {"wedge-only": "wedge", "star": "wedge+star", "clifford": "wedge+star+clifford"}


def normalize_mode(mode: str) -> str:
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown search mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "wedge+star"
    restarts: int = 100
    iterations: int = 5000
    seed: int = 0
    residual_threshold: float = 1e-8
    margin_threshold: float = 1e-4
    local: str = "lm"
    workers: int = 1

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "seed": self.seed,
            "local": self.local,
            "thresholds": {"residual": self.residual_threshold, "margin": self.margin_threshold},
        }

    @classmethod
    def from_dict(cls, data: dict, seed: int | None = None) -> "SearchConfig":
        thresholds = data.get("thresholds", {})
        return cls(
            mode=normalize_mode(data.get("mode", "wedge+star")),
            restarts=int(data.get("restarts", 100)),
            iterations=int(data.get("iterations", 5000)),
            seed=int(seed if seed is not None else data.get("seed", 0)),
            residual_threshold=float(thresholds.get("residual", 1e-8)),
            margin_threshold=float(thresholds.get("margin", 1e-4)),
            local=data.get("local", "lm"),
            workers=int(data.get("workers", 1)),
        )


# -- precomputed product tensors -------------------------------------------------

@lru_cache(maxsize=None)
def _tensors(n: int):
    """Full wedge and Clifford structure tensors and the Hodge star, in grade-major blade order."""
    order = [b for k in range(n + 1) for b in blades_of_grade(n, k)]
    pos = {b: i for i, b in enumerate(order)}
    size = len(order)
    W = np.zeros((size, size, size))
    C = np.zeros((size, size, size))
    S = np.zeros((size, size))
    full = (1 << n) - 1
    for a, ba in enumerate(order):
        S[pos[full ^ ba], a] = reorder_sign(ba, full ^ ba)
        for b, bb in enumerate(order):
            s = reorder_sign(ba, bb)
            C[a, b, pos[ba ^ bb]] = s
            if not ba & bb:
                W[a, b, pos[ba | bb]] = s
    return W, C, S


def _ring_tensor(R: GradedRing):
    """Structure constants of the whole ring in the concatenated graded basis."""
    offsets = np.concatenate([[0], np.cumsum(R.betti)]).astype(int)
    B = int(offsets[-1])
    M = np.zeros((B, B, B))
    for k in range(R.n + 1):
        for l in range(R.n + 1 - k):
            for i in range(R.betti[k]):
                for j in range(R.betti[l]):
                    for m, c in enumerate(R.product(k, i, l, j)):
                        if c:
                            M[offsets[k] + i, offsets[l] + j, offsets[k + l] + m] = float(c)
    return M


def _bilinear(T, X):
    """Apply the structure tensor ``T[a, b, c]`` to every pair of columns of ``X``; result is ``[c, i, j]``."""
    size, B = X.shape
    left = (X.T @ T.reshape(size, size * size)).reshape(B, size, size)   # [i, b, c]
    return np.matmul(left.transpose(0, 2, 1), X).transpose(1, 0, 2)


class _Problem:
    """Flattened parameterisation and residual vector for one ring and mode.

    ``Phi`` is assembled as a block-diagonal matrix from the graded ring basis
    into the grade-major blade basis, so each residual term is one einsum.
    """

    def __init__(self, R: GradedRing, mode: str):
        self.R = R
        self.n = n = R.n
        self.mode = mode
        self.shapes = [(comb(n, k), R.betti[k]) for k in range(n + 1)]
        self.free = [k for k in range(1, n + 1) if R.betti[k]]
        self.sizes = [self.shapes[k][0] * self.shapes[k][1] for k in self.free]
        self.size = sum(self.sizes)
        self.W, self.C, self.S = _tensors(n)
        self.M = _ring_tensor(R)
        row_off = np.concatenate([[0], np.cumsum([comb(n, k) for k in range(n + 1)])]).astype(int)
        col_off = np.concatenate([[0], np.cumsum(R.betti)]).astype(int)
        self.blocks = [(slice(row_off[k], row_off[k + 1]), slice(col_off[k], col_off[k + 1]))
                       for k in range(n + 1)]
        self.total_cols = int(col_off[-1])

    def unpack(self, x):
        phi = [np.zeros(s) for s in self.shapes]
        phi[0] = np.ones((1, 1))
        at = 0
        for k, size in zip(self.free, self.sizes):
            phi[k] = x[at:at + size].reshape(self.shapes[k])
            at += size
        return phi

    def pack(self, phi):
        return np.concatenate([np.asarray(phi[k], float).ravel() for k in self.free])

    def assemble(self, phi):
        X = np.zeros((1 << self.n, self.total_cols))
        for (rows, cols), p in zip(self.blocks, phi):
            X[rows, cols] = p
        return X

    def terms(self, phi):
        """Residual pieces as flat arrays: (cup, star, clifford)."""
        X = self.assemble(phi)
        wedges = _bilinear(self.W, X)
        images = (self.M.reshape(-1, self.M.shape[2]) @ X.T).T.reshape(wedges.shape)
        cup = (images - wedges).ravel()
        if self.mode == "wedge":
            return cup, np.zeros(0), np.zeros(0)
        # graded image spaces are mutually orthogonal, so one QR projects onto all of them
        q = np.linalg.qr(X)[0]
        starred = self.S @ X
        star = (starred - q @ (q.T @ starred)).ravel()
        if self.mode != "wedge+star+clifford":
            return cup, star, np.zeros(0)
        prods = _bilinear(self.C, X).reshape(X.shape[0], -1)
        cliff = (prods - q @ (q.T @ prods)).ravel()
        return cup, star, cliff

    def margins(self, phi):
        return {k: float(np.linalg.svd(phi[k], compute_uv=False).min()) for k in self.free}

    def objective_vector(self, x):
        phi = self.unpack(x)
        cup, star, cliff = self.terms(phi)
        # keep every degree injective and away from the trivial zero solution
        penalty = [max(0.0, 1.0 - s) for s in self.margins(phi).values()]
        return np.concatenate([cup, star, cliff, penalty])


@dataclass
class EmbeddingCandidate:
    ring: GradedRing
    mode: str
    phi: list
    residuals: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.ring.n

    @property
    def residual(self) -> float:
        return self.residuals["total"]

    @property
    def margin(self) -> float:
        return self.residuals["margin"]

    def is_certificate(self, residual_threshold=1e-8, margin_threshold=1e-4) -> bool:
        return self.residual < residual_threshold and self.margin > margin_threshold

    def images(self, k: int) -> list[Multivector]:
        return [Multivector.from_vector(self.n, k, [float(v) for v in col], exact=False)
                for col in np.asarray(self.phi[k]).T]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "residuals": dict(self.residuals),
            "phi": {str(k): [format_multivector(v) for v in self.images(k)]
                    for k in range(self.n + 1) if self.ring.betti[k]},
        }


def evaluate(R: GradedRing, phi, mode: str) -> dict:
    """All residual terms of ``phi``; ``total`` is the sum for ``mode``."""
    mode = normalize_mode(mode)
    problem = _Problem(R, "wedge+star+clifford")
    phi = [np.asarray(p, float) for p in phi]
    for k, (rows, cols) in enumerate(problem.shapes):
        if phi[k].shape != (rows, cols):
            raise ValueError(f"phi[{k}] has shape {phi[k].shape}, expected {(rows, cols)}")
    cup, star, cliff = problem.terms(phi)
    terms = {"cup": float(cup @ cup), "star": float(star @ star), "clifford": float(cliff @ cliff)}
    total = terms["cup"]
    if mode != "wedge":
        total += terms["star"]
    if mode == "wedge+star+clifford":
        total += terms["clifford"]
    margins = problem.margins(phi)
    return {**terms, "total": total, "margin": min(margins.values()) if margins else 0.0}


def residual(R: GradedRing, cand: EmbeddingCandidate, mode: str | None = None) -> float:
    return evaluate(R, cand.phi, mode or cand.mode)["total"]


def make_candidate(R: GradedRing, phi, mode: str) -> EmbeddingCandidate:
    phi = [np.asarray(p, float) for p in phi]
    return EmbeddingCandidate(R, normalize_mode(mode), phi, evaluate(R, phi, mode))


def _orient(phi, n):
    # reflect e_1 -> -e_1 so the orientation class lands on a positive multiple of e_{1..n}
    if phi[n][0, 0] >= 0:
        return phi
    out = []
    for k, p in enumerate(phi):
        signs = np.array([-1.0 if b & 1 else 1.0 for b in blades_of_grade(n, k)])
        out.append(p * signs[:, None])
    return out


def _random_frames(problem: _Problem, rng: np.random.Generator):
    phi = [np.ones((1, 1))]
    for k in range(1, problem.n + 1):
        rows, cols = problem.shapes[k]
        if cols == 0:
            phi.append(np.zeros((rows, 0)))
            continue
        q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
        phi.append(q[:, :cols])
    return phi


def _compass_search(f, x, iterations, step=0.5, min_step=1e-10):
    """Coordinate pattern search with step halving on ``sum(f(x)**2)``."""
    fx = float(np.sum(f(x) ** 2))
    for _ in range(iterations):
        improved = False
        for i in range(len(x)):
            for delta in (step, -step):
                y = x.copy()
                y[i] += delta
                fy = float(np.sum(f(y) ** 2))
                if fy < fx:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            step /= 2
            if step < min_step:
                break
    return x


def _one_restart(R: GradedRing, config: SearchConfig, seed_seq) -> EmbeddingCandidate:
    problem = _Problem(R, config.mode)
    rng = np.random.default_rng(seed_seq)
    x0 = problem.pack(_random_frames(problem, rng))
    if config.local == "pattern":
        x = _compass_search(problem.objective_vector, x0, config.iterations)
    elif config.local in ("lm", "trf"):
        # Levenberg-Marquardt on the residual vector: same objective as the
        # pattern search, orders of magnitude fewer evaluations
        extra = {} if config.local == "lm" else {"jac": "2-point"}
        sol = least_squares(problem.objective_vector, x0, method=config.local, max_nfev=config.iterations,
                            xtol=1e-12, ftol=1e-12, gtol=1e-12, **extra)
        x = sol.x
    else:
        raise ValueError(f"unknown local method {config.local!r}")
    phi = _orient(problem.unpack(x), R.n)
    return make_candidate(R, phi, config.mode)


@dataclass
class SearchFailure:
    """No certificate within budget.  ``best_residual`` is evidence, not a verdict."""

    mode: str
    best_residual: float
    best: EmbeddingCandidate | None
    restarts_run: int
    certifying: bool = False

    def to_dict(self) -> dict:
        return {
            "status": "no_certificate",
            "certifying": False,
            "mode": self.mode,
            "best_residual": self.best_residual,
            "restarts_run": self.restarts_run,
        }


def _refusal_reason(R: GradedRing):
    for check in (check_betti_bound, check_b1, check_middle_split):
        result = check(R)
        if result.verdict is Verdict.OBSTRUCTION:
            return result.id
    return None


def search(R: GradedRing, n: int | None = None, mode: str = "wedge+star", restarts: int = 100,
           iterations: int = 5000, seed: int = 0, residual_threshold: float = 1e-8,
           margin_threshold: float = 1e-4, local: str = "lm", workers: int = 1):
    """Multistart search for an embedding certificate.

    Returns an :class:`EmbeddingCandidate` on success and a :class:`SearchFailure`
    when the budget runs out.  Deterministic for fixed ``seed`` and ``restarts``.
    """
    if n is not None and n != R.n:
        raise ValueError(f"graded embeddings need n = dim M = {R.n}, got {n}")
    if local not in LOCAL_METHODS:
        raise ValueError(f"unknown local method {local!r}; expected one of {LOCAL_METHODS}")
    reason = _refusal_reason(R)
    if reason is not None:
        raise SearchRefused(f"search refused: exact check {reason!r} already reports an obstruction")
    config = SearchConfig(normalize_mode(mode), restarts, iterations, seed,
                          residual_threshold, margin_threshold, local, workers)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    run = 0
    batch = max(1, workers)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for start in range(0, restarts, batch):
            chunk = seeds[start:start + batch]
            if pool is None:
                results = [_one_restart(R, config, s) for s in chunk]
            else:
                results = list(pool.map(_one_restart, [R] * len(chunk), [config] * len(chunk), chunk))
            for cand in results:
                run += 1
                log.debug("restart %d: residual %.3e margin %.3e", run, cand.residual, cand.margin)
                if cand.is_certificate(residual_threshold, margin_threshold):
                    return cand
                if cand.margin > margin_threshold and (best is None or cand.residual < best.residual):
                    best = cand
    finally:
        if pool is not None:
            pool.shutdown()
    return SearchFailure(config.mode, best.residual if best else float("inf"), best, run)
