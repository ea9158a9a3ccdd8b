"""Dense semidefinite programming over Hermitian block-diagonal variables.

Solves   minimize  <C, X>   subject to  <A_k, X> = b_k,  X >= 0 blockwise,
with an objective or in pure feasibility mode (C = 0), and returns dual
certificates.  The algorithm is a primal-dual path-following interior-point
method on the homogeneous self-dual embedding, with Nesterov-Todd scaling
and a Mehrotra predictor-corrector; infeasibility certificates fall out of
the same core.  Complex Hermitian blocks are embedded as real symmetric
blocks of doubled side via H -> [[Re H, -Im H], [Im H, Re H]] and solutions
are mapped back by equivariant averaging.

Problems here are tiny (a few hundred real dimensions); the implementation
chooses robustness over speed throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

HERM_TOL = 1e-10
FEAS_TOL = 1e-8          # primal/dual residuals of an optimal result
GAP_TOL = 1e-7           # relative duality gap of an optimal result
CERT_TOL = 1e-8          # quality of an infeasibility certificate
TAU_KAPPA_RATIO = 1e-8   # tau/kappa threshold of the infeasibility ratio test
MAX_ITERATIONS = 200
STEP_FRACTION = 0.98

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iterations"
FAILURE = "numerical_failure"


class BlockMatrix:
    """Hermitian block-diagonal matrix stored as a tuple of dense blocks."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[np.ndarray], require_hermitian: bool = True):
        blocks = tuple(np.array(b, dtype=complex) for b in blocks)
        for b in blocks:
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError(f"block of shape {b.shape} is not square")
            if require_hermitian and np.max(np.abs(b - b.conj().T)) > HERM_TOL:
                raise ValueError("block is not Hermitian within tolerance")
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("BlockMatrix is immutable")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    def inner(self, other: "BlockMatrix") -> float:
        """Hilbert-Schmidt inner product; real for Hermitian arguments."""
        return float(
            sum(np.sum(a.conj() * b).real for a, b in zip(self.blocks, other.blocks))
        )

    def min_eig(self) -> float:
        return min(float(np.linalg.eigvalsh(b)[0]) for b in self.blocks)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks)))

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(b))) for b in self.blocks)

    def scaled(self, alpha: float) -> "BlockMatrix":
        return BlockMatrix([alpha * b for b in self.blocks], require_hermitian=False)

    @staticmethod
    def zeros(dims: Sequence[int]) -> "BlockMatrix":
        return BlockMatrix([np.zeros((d, d), dtype=complex) for d in dims])

    @staticmethod
    def identity(dims: Sequence[int]) -> "BlockMatrix":
        return BlockMatrix([np.eye(d, dtype=complex) for d in dims])


class ConstraintSet:
    """Stacked constraint operators <A_k, X> for one block structure.

    The stacks (one (m, n_b, n_b) complex array per block) are shared between
    problems that differ only in their right-hand sides, and the real
    embedding used by the solver is computed once and cached.
    """

    def __init__(self, block_dims: Sequence[int], stacks: Sequence[np.ndarray]):
        self.block_dims = tuple(int(d) for d in block_dims)
        stacks = [np.asarray(s, dtype=complex) for s in stacks]
        if len(stacks) != len(self.block_dims):
            raise ValueError("one stack per block required")
        m = stacks[0].shape[0]
        for s, d in zip(stacks, self.block_dims):
            if s.shape != (m, d, d):
                raise ValueError(f"stack shape {s.shape} incompatible with block dim {d}")
            herm_defect = np.max(np.abs(s - s.conj().transpose(0, 2, 1))) if m else 0.0
            if herm_defect > HERM_TOL:
                raise ValueError("constraint operator is not Hermitian within tolerance")
        self.stacks = tuple(stacks)
        self.m = m

    @staticmethod
    def from_pairs(
        block_dims: Sequence[int], operators: Sequence[BlockMatrix]
    ) -> "ConstraintSet":
        stacks = [
            np.stack([op.blocks[i] for op in operators])
            if operators
            else np.zeros((0, d, d), dtype=complex)
            for i, d in enumerate(block_dims)
        ]
        return ConstraintSet(block_dims, stacks)

    def operator(self, k: int) -> BlockMatrix:
        return BlockMatrix([s[k] for s in self.stacks])

    @cached_property
    def _real(self):
        """Real-embedded constraint data: per-block dense stacks and one sparse matrix."""
        dense = [_embed_stack(s) for s in self.stacks]
        flat = (
            np.concatenate([d.reshape(self.m, -1) for d in dense], axis=1)
            if self.m
            else np.zeros((0, sum((2 * d) ** 2 for d in self.block_dims)))
        )
        sparse = scipy.sparse.csr_matrix(flat)
        return dense, sparse


@dataclass
class SdpProblem:
    """min <C, X> (or feasibility when objective is None) s.t. <A_k, X> = b_k, X >= 0."""

    block_dims: tuple[int, ...]
    objective: BlockMatrix | None
    constraint_set: ConstraintSet
    b: np.ndarray

    def __post_init__(self):
        self.block_dims = tuple(int(d) for d in self.block_dims)
        if any(d < 1 for d in self.block_dims):
            raise ValueError("block dims must be positive")
        if self.objective is not None and self.objective.dims != self.block_dims:
            raise ValueError("objective dims do not match the block structure")
        if self.constraint_set.block_dims != self.block_dims:
            raise ValueError("constraint dims do not match the block structure")
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.constraint_set.m,):
            raise ValueError("one right-hand side per constraint required")
        real_dim = sum(d * d for d in self.block_dims)
        if self.constraint_set.m > real_dim:
            raise ValueError(
                f"{self.constraint_set.m} constraints exceed the variable's "
                f"real dimension {real_dim}"
            )

    @staticmethod
    def from_constraints(
        block_dims: Sequence[int],
        objective: BlockMatrix | None,
        constraints: Sequence[tuple[BlockMatrix, float]],
    ) -> "SdpProblem":
        ops = [a for a, _ in constraints]
        b = np.array([v for _, v in constraints], dtype=float)
        return SdpProblem(
            tuple(block_dims), objective, ConstraintSet.from_pairs(block_dims, ops), b
        )

    @property
    def constraints(self) -> list[tuple[BlockMatrix, float]]:
        return [
            (self.constraint_set.operator(k), float(self.b[k]))
            for k in range(self.constraint_set.m)
        ]

    @property
    def feasibility(self) -> bool:
        return self.objective is None


@dataclass
class Certificate:
    """Farkas certificate of primal infeasibility: sum_k y_k A_k + S = 0, S >= 0, b.y > 0."""

    y: np.ndarray
    s: BlockMatrix


@dataclass
class SdpResult:
    status: str
    x: BlockMatrix | None
    y: np.ndarray
    objective_value: float
    certificate: Certificate | None = None
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# real embedding helpers
# ---------------------------------------------------------------------------


def _embed(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = h.real
    out[:n, n:] = -h.imag
    out[n:, :n] = h.imag
    out[n:, n:] = h.real
    return out


def _embed_stack(s: np.ndarray) -> np.ndarray:
    m, n, _ = s.shape
    out = np.empty((m, 2 * n, 2 * n))
    out[:, :n, :n] = s.real
    out[:, :n, n:] = -s.imag
    out[:, n:, :n] = s.imag
    out[:, n:, n:] = s.real
    return out


def _unembed(x: np.ndarray) -> np.ndarray:
    """Equivariant average of a real symmetric block, mapped back to complex."""
    n = x.shape[0] // 2
    p, q = x[:n, :n], x[:n, n:]
    r, t = x[n:, :n], x[n:, n:]
    re = (p + t) / 2
    im = (r - q) / 2
    c = re + 1j * im
    return (c + c.conj().T) / 2


# ---------------------------------------------------------------------------
# interior-point core (real symmetric blocks)
# ---------------------------------------------------------------------------


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2


def _eigh_sqrt(a: np.ndarray):
    vals, vecs = np.linalg.eigh(_sym(a))
    vals = np.clip(vals, 1e-300, None)
    root = np.sqrt(vals)
    half = (vecs * root) @ vecs.T
    inv_half = (vecs / root) @ vecs.T
    return half, inv_half


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha*dx >= 0, for symmetric PD x."""
    try:
        ch = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(x)
        vals = np.clip(vals, 1e-14 * max(1.0, vals[-1]), None)
        ch = vecs * np.sqrt(vals)
    t = scipy.linalg.solve_triangular(ch, dx, lower=True)
    t = scipy.linalg.solve_triangular(ch, t.T, lower=True)
    lam = float(np.linalg.eigvalsh(_sym(t))[0])
    if lam >= 0:
        return np.inf
    return -1.0 / lam


class _Core:
    """One homogeneous self-dual solve on real symmetric blocks."""

    def __init__(self, dims, c_blocks, a_dense, a_sparse, b):
        self.dims = dims
        self.c = c_blocks
        self.a3 = a_dense                      # per block: (m, n, n)
        self.asp = a_sparse                    # (m, sum n^2)
        self.b = b
        self.m = len(b)
        self.n_total = sum(dims)
        self.splits = np.cumsum([d * d for d in dims])[:-1]

    def a_of(self, blocks) -> np.ndarray:
        vec = np.concatenate([blk.reshape(-1) for blk in blocks])
        return self.asp.dot(vec)

    def a_adj(self, y: np.ndarray):
        vec = self.asp.T.dot(y)
        parts = np.split(vec, self.splits)
        return [_sym(p.reshape(d, d)) for p, d in zip(parts, self.dims)]

    def solve(self, max_iterations=MAX_ITERATIONS, trace=None):
        dims = self.dims
        x = [np.eye(d) for d in dims]
        s = [np.eye(d) for d in dims]
        y = np.zeros(self.m)
        tau, kappa = 1.0, 1.0
        b, c = self.b, self.c
        bnorm = 1.0 + np.linalg.norm(b)
        cnorm = 1.0 + np.sqrt(sum(np.linalg.norm(cb) ** 2 for cb in c))

        best = None
        best_score = np.inf
        best_parts = (np.inf, np.inf, np.inf)
        history: list[float] = []
        status = MAX_ITER
        info = {"iterations": 0}

        for it in range(max_iterations):
            info["iterations"] = it
            # residuals of the self-dual system
            ax = self.a_of(x)
            aty = self.a_adj(y)
            r_p = b * tau - ax
            r_d = [c[i] * tau - aty[i] - s[i] for i in range(len(dims))]
            cx = sum(np.sum(c[i] * x[i]) for i in range(len(dims)))
            by = float(b @ y)
            r_g = kappa + cx - by
            mu = (sum(np.sum(x[i] * s[i]) for i in range(len(dims))) + tau * kappa) / (
                self.n_total + 1
            )

            # dehomogenized convergence test
            pres = np.linalg.norm(ax / tau - b) / bnorm
            dres = (
                np.sqrt(
                    sum(
                        np.linalg.norm(aty[i] / tau + s[i] / tau - c[i]) ** 2
                        for i in range(len(dims))
                    )
                )
                / cnorm
            )
            pobj, dobj = cx / tau, by / tau
            gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            score = max(pres, dres, gap)
            if trace is not None:
                trace.append((it, mu, pres, dres, gap, tau, kappa))
            if score < best_score:
                best_score = score
                best_parts = (pres, dres, gap)
                best = ([xi / tau for xi in x], y / tau, [si / tau for si in s])
            history.append(score)
            if pres <= 0.1 * FEAS_TOL and dres <= 0.1 * FEAS_TOL and gap <= 0.1 * GAP_TOL:
                status = OPTIMAL
                break
            if len(history) > 12 and best_score > 0.5 * history[-12]:
                # stalled; fall through to the incumbent-acceptance check below
                info["reason"] = "progress stalled"
                break

            # infeasibility certificates from the homogeneous iterate
            cert = self._try_certificate(y, by)
            if cert is not None and (tau <= TAU_KAPPA_RATIO * kappa or cert[2] >= 0.0):
                info["certificate_min_eig"] = cert[2]
                return (INFEASIBLE, cert[:2], info, best)
            ray = self._try_unbounded(x, cx)
            if ray is not None and tau <= TAU_KAPPA_RATIO * kappa:
                info["reason"] = "dual infeasible (primal objective unbounded below)"
                return (FAILURE, None, info, best)
            if tau <= TAU_KAPPA_RATIO * kappa:
                info["reason"] = "tau collapsed without a verifiable certificate"
                return (FAILURE, None, info, best)

            # Nesterov-Todd scaling per block
            scal = []
            for i, d in enumerate(dims):
                s_half, s_inv_half = _eigh_sqrt(s[i])
                m_half, _ = _eigh_sqrt(s_half @ x[i] @ s_half)
                w = _sym(s_inv_half @ m_half @ s_inv_half)
                g, g_inv = _eigh_sqrt(w)
                v = _sym(g @ s[i] @ g)
                lv, qv = np.linalg.eigh(v)
                lv = np.clip(lv, 1e-300, None)
                scal.append((w, g, g_inv, v, lv, qv))

            # Schur complement pieces shared by both passes
            wcw = [_sym(scal[i][0] @ c[i] @ scal[i][0]) for i in range(len(dims))]
            g_vec = self.a_of(wcw)
            h_cc = sum(np.sum(c[i] * wcw[i]) for i in range(len(dims)))
            wrdw = [_sym(scal[i][0] @ r_d[i] @ scal[i][0]) for i in range(len(dims))]
            a_wrdw = self.a_of(wrdw)
            big_m = self._schur(scal)
            factor = self._factor(big_m)
            if factor is None:
                info["reason"] = "Schur complement factorization failed"
                return (FAILURE, None, info, best)
            v_dir = self._solve_factored(factor, g_vec + b)

            def newton(eta, rc, rhs_tk):
                a_rc = self.a_of(rc)
                c_rc = sum(np.sum(c[i] * rc[i]) for i in range(len(dims)))
                rhs_p = eta * r_p - a_rc + eta * a_wrdw
                u = self._solve_factored(factor, rhs_p)
                c_wrdw = sum(np.sum(c[i] * wrdw[i]) for i in range(len(dims)))
                rhs_g2 = eta * r_g + c_rc - eta * c_wrdw + rhs_tk / tau
                denom = float((b - g_vec) @ v_dir) + h_cc + kappa / tau
                d_tau = (rhs_g2 - float((b - g_vec) @ u)) / denom
                d_y = u + v_dir * d_tau
                at_dy = self.a_adj(d_y)
                d_s = [eta * r_d[i] - at_dy[i] + c[i] * d_tau for i in range(len(dims))]
                d_x = [
                    _sym(rc[i] - scal[i][0] @ d_s[i] @ scal[i][0])
                    for i in range(len(dims))
                ]
                d_kappa = (rhs_tk - kappa * d_tau) / tau
                return d_x, d_y, d_s, d_tau, d_kappa

            def step_bound(d_x, d_s, d_tau, d_kappa):
                alpha = np.inf
                for i in range(len(dims)):
                    alpha = min(alpha, _max_step(x[i], d_x[i]))
                    alpha = min(alpha, _max_step(s[i], d_s[i]))
                if d_tau < 0:
                    alpha = min(alpha, -tau / d_tau)
                if d_kappa < 0:
                    alpha = min(alpha, -kappa / d_kappa)
                return alpha

            # predictor (affine) pass
            rc_aff = [-x[i] for i in range(len(dims))]
            aff = newton(1.0, rc_aff, -tau * kappa)
            alpha_aff = min(1.0, step_bound(aff[0], aff[2], aff[3], aff[4]))
            mu_aff = (
                sum(
                    np.sum((x[i] + alpha_aff * aff[0][i]) * (s[i] + alpha_aff * aff[2][i]))
                    for i in range(len(dims))
                )
                + (tau + alpha_aff * aff[3]) * (kappa + alpha_aff * aff[4])
            ) / (self.n_total + 1)
            sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 1e-10, 1.0 - 1e-10))

            # corrector pass
            eta = 1.0 - sigma
            rc = []
            for i in range(len(dims)):
                w, g, g_inv, v, lv, qv = scal[i]
                dxa_hat = g_inv @ aff[0][i] @ g_inv
                dsa_hat = g @ aff[2][i] @ g
                rhat = sigma * mu * np.eye(dims[i]) - v @ v - _sym(dxa_hat @ dsa_hat)
                # Lyapunov solve (V D + D V)/2 = rhat in V's eigenbasis
                rq = qv.T @ rhat @ qv
                denom_l = (lv[:, None] + lv[None, :]) / 2.0
                d_hat = qv @ (rq / denom_l) @ qv.T
                rc.append(_sym(g @ d_hat @ g))
            rhs_tk = sigma * mu - tau * kappa - aff[3] * aff[4]
            d_x, d_y, d_s, d_tau, d_kappa = newton(eta, rc, rhs_tk)

            alpha = min(1.0, STEP_FRACTION * step_bound(d_x, d_s, d_tau, d_kappa))
            if not np.isfinite(alpha) or alpha <= 1e-14:
                info["reason"] = "step length collapsed"
                break

            x = [_sym(x[i] + alpha * d_x[i]) for i in range(len(dims))]
            s = [_sym(s[i] + alpha * d_s[i]) for i in range(len(dims))]
            y = y + alpha * d_y
            tau += alpha * d_tau
            kappa += alpha * d_kappa

        if (
            status != OPTIMAL
            and best_parts[0] <= FEAS_TOL
            and best_parts[1] <= FEAS_TOL
            and best_parts[2] <= GAP_TOL
        ):
            # the incumbent already satisfies the result contract
            status = OPTIMAL
        if status == OPTIMAL:
            return (OPTIMAL, None, info, best)
        cert = self._try_certificate(y, float(b @ y))
        if cert is not None and (tau <= TAU_KAPPA_RATIO * kappa or cert[2] >= 0.0):
            info["certificate_min_eig"] = cert[2]
            return (INFEASIBLE, cert[:2], info, best)
        info.setdefault("reason", "iteration limit reached")
        return (MAX_ITER, None, info, best)

    def _schur(self, scal) -> np.ndarray:
        pieces = []
        for i, d in enumerate(self.dims):
            w = scal[i][0]
            waw = np.matmul(w, np.matmul(self.a3[i], w))
            pieces.append(waw.reshape(self.m, -1))
        bmat = np.concatenate(pieces, axis=1)
        m = self.asp.dot(bmat.T)
        return _sym(np.asarray(m))

    def _factor(self, big_m):
        jitter = 0.0
        scale = max(np.trace(big_m) / max(self.m, 1), 1e-30)
        for attempt in range(4):
            try:
                return scipy.linalg.cho_factor(
                    big_m + jitter * np.eye(self.m), lower=True
                )
            except np.linalg.LinAlgError:
                jitter = scale * 10.0 ** (-14 + 4 * attempt)
        return None

    def _solve_factored(self, factor, rhs):
        if self.m == 0:
            return np.zeros(0)
        return scipy.linalg.cho_solve(factor, rhs)

    def _try_certificate(self, y, by):
        """Farkas pair (y, -A*(y)) scaled to b.y = 1, or None."""
        if by <= 0:
            return None
        y_hat = y / by
        s_hat = [-blk for blk in self.a_adj(y_hat)]
        lam = min(float(np.linalg.eigvalsh(blk)[0]) for blk in s_hat)
        norm = max(float(np.max(np.abs(blk))) for blk in s_hat)
        if lam >= -CERT_TOL * (1.0 + norm):
            return (y_hat, s_hat, lam)
        return None

    def _try_unbounded(self, x, cx):
        if cx >= 0:
            return None
        x_hat = [blk / (-cx) for blk in x]
        if np.linalg.norm(self.a_of(x_hat)) <= CERT_TOL:
            return x_hat
        return None


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

_DUMP_DIR: str | None = None
_DUMP_COUNT = 0


class dump_context:
    """Debugging hook: while active, every solve dumps problem and result JSON.

    Single-threaded use only (pairs with the CLI's --dump-sdp flag).
    """

    def __init__(self, directory: str):
        self.directory = directory

    def __enter__(self):
        global _DUMP_DIR, _DUMP_COUNT
        _DUMP_DIR, _DUMP_COUNT = self.directory, 0
        return self

    def __exit__(self, *exc):
        global _DUMP_DIR
        _DUMP_DIR = None
        return False


def _maybe_dump(problem: "SdpProblem", result: "SdpResult") -> None:
    global _DUMP_COUNT
    if _DUMP_DIR is None:
        return
    import json
    import os

    path = os.path.join(_DUMP_DIR, f"sdp_{_DUMP_COUNT:04d}.json")
    _DUMP_COUNT += 1
    with open(path, "w") as fh:
        json.dump(
            {"problem": problem_to_json(problem), "result": result_to_json(result)},
            fh,
        )


def solve(problem: SdpProblem, max_iterations: int = MAX_ITERATIONS) -> SdpResult:
    """Solve an SDP; deterministic given identical inputs.

    Never silently returns a wrong answer: hitting the iteration cap or a
    numerical breakdown is reported in the status.
    """
    result = _solve_impl(problem, max_iterations)
    _maybe_dump(problem, result)
    return result


def _solve_impl(problem: SdpProblem, max_iterations: int) -> SdpResult:
    dims = problem.block_dims
    c_complex = problem.objective or BlockMatrix.zeros(dims)
    c_blocks = [_embed(blk) / 1.0 for blk in c_complex.blocks]
    a_dense, a_sparse = problem.constraint_set._real
    b_real = 2.0 * problem.b

    core = _Core([2 * d for d in dims], c_blocks, a_dense, a_sparse, b_real)
    status, cert, info, best = core.solve(max_iterations=max_iterations)

    if status == OPTIMAL and best is not None:
        xb, yb, sb = best
        x = BlockMatrix([_unembed(blk) for blk in xb], require_hermitian=False)
        objective = c_complex.inner(x)
        return SdpResult(OPTIMAL, x, yb, float(objective), info=info)

    if status == INFEASIBLE and cert is not None:
        y_hat, s_hat = cert
        s_complex = BlockMatrix([_unembed(blk) for blk in s_hat], require_hermitian=False)
        by = float(problem.b @ y_hat)
        if by <= 0:
            return SdpResult(FAILURE, None, y_hat, np.nan, info={**info, "reason": "certificate lost in unembedding"})
        y_n = y_hat / by
        s_n = s_complex.scaled(1.0 / by)
        return SdpResult(
            INFEASIBLE, None, y_n, np.inf, certificate=Certificate(y_n, s_n), info=info
        )

    y_last = best[1] if best is not None else np.zeros(problem.constraint_set.m)
    return SdpResult(status, None, y_last, np.nan, info=info)


@dataclass
class VerificationReport:
    """Independent recomputation of every residual and certificate inequality."""

    checks: dict[str, tuple[bool, float, float]]

    @property
    def ok(self) -> bool:
        return all(passed for passed, _, _ in self.checks.values())

    def __str__(self):
        lines = []
        for name, (passed, value, thr) in self.checks.items():
            lines.append(f"{'pass' if passed else 'FAIL'} {name}: {value:.3e} (<= {thr:.1e})")
        return "\n".join(lines)


def verify(problem: SdpProblem, result: SdpResult) -> VerificationReport:
    """Recompute all result invariants from scratch; report-only."""
    checks: dict[str, tuple[bool, float, float]] = {}
    c = problem.objective or BlockMatrix.zeros(problem.block_dims)
    ops = problem.constraint_set

    def adjoint(y):
        blocks = [np.zeros((d, d), dtype=complex) for d in problem.block_dims]
        for i, stack in enumerate(ops.stacks):
            if ops.m:
                blocks[i] = np.tensordot(y, stack, axes=(0, 0))
        return BlockMatrix(blocks, require_hermitian=False)

    if result.status == OPTIMAL:
        x = result.x
        ax = np.array([sum(np.sum(s[k].conj() * x.blocks[i]).real for i, s in enumerate(ops.stacks)) for k in range(ops.m)])
        pres = float(np.linalg.norm(ax - problem.b) / (1.0 + np.linalg.norm(problem.b)))
        checks["primal_residual"] = (pres <= FEAS_TOL, pres, FEAS_TOL)
        lam_x = x.min_eig()
        floor_x = -FEAS_TOL * (1.0 + x.norm())
        checks["primal_psd"] = (lam_x >= floor_x, lam_x, abs(floor_x))
        s_dual = BlockMatrix(
            [cb - ab for cb, ab in zip(c.blocks, adjoint(result.y).blocks)],
            require_hermitian=False,
        )
        lam_s = s_dual.min_eig()
        floor_s = -FEAS_TOL * (1.0 + s_dual.norm())
        checks["dual_psd"] = (lam_s >= floor_s, lam_s, abs(floor_s))
        pobj = c.inner(x)
        dobj = float(problem.b @ result.y)
        gap_thr = GAP_TOL * (1.0 + abs(pobj))
        checks["duality_gap"] = (abs(pobj - dobj) <= gap_thr, abs(pobj - dobj), gap_thr)
        checks["weak_duality"] = (dobj <= pobj + gap_thr, dobj - pobj, gap_thr)
        obj_err = abs(result.objective_value - pobj)
        checks["objective_match"] = (obj_err <= FEAS_TOL * (1 + abs(pobj)), obj_err, FEAS_TOL * (1 + abs(pobj)))
    elif result.status == INFEASIBLE:
        cert = result.certificate
        if cert is None:
            checks["certificate_present"] = (False, 0.0, 0.0)
            return VerificationReport(checks)
        resid = BlockMatrix(
            [ab + sb for ab, sb in zip(adjoint(cert.y).blocks, cert.s.blocks)],
            require_hermitian=False,
        )
        r = resid.max_abs()
        scale = CERT_TOL * (1.0 + cert.s.max_abs())
        checks["certificate_adjoint"] = (r <= scale, r, scale)
        lam = cert.s.min_eig()
        floor = -CERT_TOL * (1.0 + cert.s.max_abs())
        checks["certificate_psd"] = (lam >= floor, lam, abs(floor))
        by = float(problem.b @ cert.y)
        checks["certificate_improving"] = (by > 0, by, 0.0)
    else:
        checks["conclusive_status"] = (False, 0.0, 0.0)
    return VerificationReport(checks)


def identity_multiplier(problem: SdpProblem) -> np.ndarray | None:
    """Multipliers y with A*(y) = -identity, if the identity is in range of A*.

    Used to polish Farkas certificates toward exact dual feasibility; returns
    None when no such y exists to working precision.
    """
    ops = problem.constraint_set
    if ops.m == 0:
        return None
    flat = np.concatenate(
        [s.reshape(ops.m, -1) for s in ops.stacks], axis=1
    )  # complex (m, sum n^2)
    target = -np.concatenate(
        [np.eye(d, dtype=complex).reshape(-1) for d in problem.block_dims]
    )
    a_real = np.concatenate([flat.real, flat.imag], axis=1)
    t_real = np.concatenate([target.real, target.imag])
    y, *_ = np.linalg.lstsq(a_real.T, t_real, rcond=None)
    if np.linalg.norm(a_real.T @ y - t_real) > 1e-9:
        return None
    return y


# ---------------------------------------------------------------------------
# serialization (mirrors the operator JSON schema with a top-level block list)
# ---------------------------------------------------------------------------


def block_matrix_to_json(bm: BlockMatrix) -> list[dict]:
    return [{"re": b.real.tolist(), "im": b.imag.tolist()} for b in bm.blocks]


def block_matrix_from_json(data: list[dict]) -> BlockMatrix:
    return BlockMatrix(
        [np.array(d["re"]) + 1j * np.array(d["im"]) for d in data],
        require_hermitian=False,
    )


def problem_to_json(p: SdpProblem) -> dict:
    return {
        "blocks": list(p.block_dims),
        "objective": None if p.objective is None else block_matrix_to_json(p.objective),
        "constraints": [
            {"a": block_matrix_to_json(a), "b": b} for a, b in p.constraints
        ],
    }


def problem_from_json(data: dict) -> SdpProblem:
    dims = tuple(data["blocks"])
    objective = (
        None if data["objective"] is None else block_matrix_from_json(data["objective"])
    )
    constraints = [
        (block_matrix_from_json(c["a"]), float(c["b"])) for c in data["constraints"]
    ]
    return SdpProblem.from_constraints(dims, objective, constraints)


def result_to_json(r: SdpResult) -> dict:
    return {
        "status": r.status,
        "objective": None if not np.isfinite(r.objective_value) else r.objective_value,
        "x": None if r.x is None else block_matrix_to_json(r.x),
        "y": r.y.tolist(),
        "certificate": None
        if r.certificate is None
        else {
            "y": r.certificate.y.tolist(),
            "s": block_matrix_to_json(r.certificate.s),
        },
        "info": {k: v for k, v in r.info.items() if isinstance(v, (int, float, str))},
    }
