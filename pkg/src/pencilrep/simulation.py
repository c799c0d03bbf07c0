"""Trajectories of AR Hilbertian processes and their trend/stationary decomposition.

Innovations ``eps_1, ..., eps_T`` are stored as rows ``0..T-1`` of a
``(T, dim)`` array; trajectory values ``X_0, ..., X_T`` as rows ``0..T``.
Replication ``r`` of an ensemble draws from ``default_rng(children[r])`` with
``children = SeedSequence(seed).spawn(R)``, first the innovations and then the
initial conditions, so results do not depend on batching or execution order.
"""

from __future__ import annotations

import csv
from math import comb
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidInput
from .linalg import fundamental_subspaces, moore_penrose, opnorm, span, subspace_sum
from .pencil import derivative, evaluate
from .representation import ARModel, Decomposition

STATIONARY_SLOPE = 0.3
MIN_REPLICATIONS = 100
SUPPORT_TOL = 1e-8
_BATCH = 50


@dataclass(eq=False)
class Trajectory:
    values: np.ndarray
    seed: int | None = None
    innovations: np.ndarray | None = None
    initial: np.ndarray | None = None
    components: dict[str, np.ndarray] | None = None
    flags: dict[str, bool] | None = None

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def T(self) -> int:
        return self.values.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.T + 1)


@dataclass
class StationarityVerdict:
    direction: np.ndarray
    growth_slope: float
    verdict: str
    replications: int
    times: tuple[int, ...] = ()
    variances: tuple[float, ...] = ()

    @property
    def stationary(self) -> bool:
        return self.verdict == "stationary"


def _draw(rng: np.random.Generator, shape, real: bool) -> np.ndarray:
    if real:
        return rng.standard_normal(shape).astype(np.complex128)
    g = rng.standard_normal(shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2)


def _innovations(model: ARModel, T: int, rng: np.random.Generator, real: bool) -> np.ndarray:
    L = model.sigma_factor
    if real and np.any(L.imag != 0):
        raise InvalidInput("real innovations need a real sigma_factor")
    return _draw(rng, (T, L.shape[1]), real) @ L.T


def sample_innovations(model: ARModel, T: int, seed: int, real: bool = False) -> np.ndarray:
    """``eps_t = L w_t`` with ``w_t`` iid standard circular complex Gaussian.

    With ``real=True`` the ``w_t`` are real standard Gaussian instead.
    """
    if T < 1:
        raise InvalidInput("T must be at least 1")
    return _innovations(model, T, np.random.default_rng(seed), real)


def _as_initial(model: ARModel, initial, batch: int | None = None) -> np.ndarray:
    n, p = model.dim, model.p
    if initial is None:
        shape = (p, n) if batch is None else (batch, p, n)
        return np.zeros(shape, dtype=np.complex128)
    arr = np.asarray(initial, dtype=np.complex128)
    if arr.shape[-2:] != (p, n) or (batch is not None and arr.shape != (batch, p, n)):
        raise InvalidInput(f"initial must hold p={p} vectors of length {n}, most recent first")
    return arr


def _recursion(model: ARModel, eps: np.ndarray, initial: np.ndarray, keep=None) -> np.ndarray:
    """Batched ``X_t = sum_j Phi_j X_{t-j} + eps_t``.

    ``eps`` is ``(R, T, n)`` and ``initial`` ``(R, p, n)`` (most recent first).
    Returns all ``X_0..X_T`` or, if ``keep`` lists times, only those.
    """
    R, T, n = eps.shape
    p = model.p
    phis_T = [P.T for P in model.phis]
    # history[:, j] = X_{t-j}
    history = initial.copy()
    keep_set = None if keep is None else {int(t): i for i, t in enumerate(keep)}
    out = np.empty((R, T + 1 if keep is None else len(keep), n), dtype=np.complex128)
    if keep is None:
        out[:, 0] = history[:, 0]
    elif 0 in keep_set:
        out[:, keep_set[0]] = history[:, 0]
    for t in range(1, T + 1):
        x = eps[:, t - 1].copy()
        for j in range(p):
            x += history[:, j] @ phis_T[j]
        if p > 1:
            history[:, 1:] = history[:, :-1]
        history[:, 0] = x
        if keep is None:
            out[:, t] = x
        elif t in keep_set:
            out[:, keep_set[t]] = x
    return out


def simulate_ar(model: ARModel, T: int, seed: int | None = None, initial=None,
                innovations=None, real: bool = False) -> Trajectory:
    """Run the AR recursion for ``t = 1..T``.

    Parameters
    ----------
    initial : sequence of p vectors, optional
        ``(X_0, X_{-1}, ..., X_{-p+1})``, most recent first. Zero by default.
    innovations : (T, dim) array, optional
        Used instead of drawing from ``seed``.
    """
    if T < 1:
        raise InvalidInput("T must be at least 1")
    if innovations is None:
        if seed is None:
            raise InvalidInput("give a seed or explicit innovations")
        innovations = sample_innovations(model, T, seed, real)
    eps = np.asarray(innovations, dtype=np.complex128)
    if eps.shape != (T, model.dim):
        raise InvalidInput(f"innovations must have shape {(T, model.dim)}")
    init = _as_initial(model, initial)
    values = _recursion(model, eps[None], init[None])[0]
    return Trajectory(values=values, seed=seed, innovations=eps, initial=init)


def apply_ar_filter(model: ARModel, traj: Trajectory) -> np.ndarray:
    """Residuals ``X_t - sum_j Phi_j X_{t-j}`` for ``t = 1..T``, presample from ``traj.initial``."""
    p = model.p
    init = _as_initial(model, traj.initial)
    # full[i] = X_{i - p + 1}
    full = np.vstack([init[:0:-1], traj.values]) if p > 1 else traj.values
    res = full[p:].copy()
    for j, P in enumerate(model.phis, start=1):
        res -= full[p - j:len(full) - j] @ P.T
    return res


def _moving_average(psitilde: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """``nu_t = sum_{k<=K} Psitilde_k eps_{t-k}`` with zero pre-sample, ``t = 0..T``."""
    T, n = eps.shape
    nu = np.zeros((T + 1, n), dtype=np.complex128)
    for k, C in enumerate(psitilde[:T]):
        nu[1 + k:] += eps[:T - k] @ C.T
    return nu


def build_representation_path(decomp: Decomposition, innovations, Z0, Z1=None) -> Trajectory:
    """Trend plus stationary decomposition of a path driven by ``innovations``.

    I(1): ``X_t = Z0 + Psi(1) S_t + nu_t`` with ``S_t`` the partial sums.
    I(2): ``X_t = Z0 + t Z1 + U2 SS_t - U1 S_t + nu_t`` with ``SS_t`` the
    partial sums of ``S``. Innovations before ``t = 1`` are zero.
    """
    eps = np.asarray(innovations, dtype=np.complex128)
    n = decomp.dim
    if eps.ndim != 2 or eps.shape[1] != n:
        raise InvalidInput(f"innovations must have shape (T, {n})")
    T = eps.shape[0]
    Z0 = np.asarray(Z0, dtype=np.complex128).reshape(n)
    S = np.vstack([np.zeros((1, n)), np.cumsum(eps, axis=0)])
    nu = _moving_average(decomp.psitilde, eps)
    t = np.arange(T + 1)[:, None]
    zero = np.zeros((T + 1, n), dtype=np.complex128)
    comps = {"stationary": nu, "z0_term": np.broadcast_to(Z0, (T + 1, n)).copy()}
    flags = {}
    if decomp.kind == "I1":
        if Z1 is not None:
            raise InvalidInput("Z1 is only used for I(2) decompositions")
        comps.update(trend2=zero, trend1=S @ decomp.psi1.T, z1_term=zero.copy())
    elif decomp.kind == "I2":
        if Z1 is None:
            raise InvalidInput("I(2) paths need Z1")
        Z1 = np.asarray(Z1, dtype=np.complex128).reshape(n)
        SS = np.cumsum(S, axis=0)
        comps.update(trend2=SS @ decomp.upsilon2.T, trend1=-(S @ decomp.upsilon1.T), z1_term=t * Z1)
        ran2 = span(decomp.upsilon2)
        both = subspace_sum(ran2, span(decomp.upsilon1))
        flags["z1_in_ran_U2"] = _inside(ran2, Z1)
        flags["z0_z1_in_ran_U2_plus_ran_U1"] = _inside(both, Z0) and _inside(both, Z1)
    else:
        raise InvalidInput(f"unknown decomposition kind {decomp.kind!r}")
    values = sum(comps[k] for k in ("trend2", "trend1", "stationary", "z0_term", "z1_term"))
    return Trajectory(values=values, innovations=eps, components=comps, flags=flags)


def _inside(V, x, tol: float = SUPPORT_TOL) -> bool:
    resid = x - V.basis @ (V.basis.conj().T @ x)
    return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(x)))


def _initial_subspaces(model: ARModel, decomp: Decomposition):
    P = model.pencil
    A0 = evaluate(P, 1.0)
    ker = fundamental_subspaces(A0, 1e-8 * max(1.0, opnorm(A0))).ker
    if decomp.kind == "I1":
        return ker, None, None
    A1 = derivative(P, 1, 1.0)
    shift = moore_penrose(A0, 1e-8 * max(1.0, opnorm(A0))) @ A1
    return ker, span(decomp.upsilon2), shift


def sample_initial_conditions(model: ARModel, decomp: Decomposition, rng: np.random.Generator,
                              real: bool = False, _cache=None):
    """Gaussian ``(Z0, Z1)`` under which the AR recursion reproduces the representation.

    I(1): ``Z0`` in ``ker Phi(1)``, ``Z1 = None``. I(2): ``Z1`` in ``ran U2`` and
    ``Z0 = Phi(1)^+ Phi'(1) Z1 + k`` with ``k`` in ``ker Phi(1)``, which solves
    ``Phi(1) Z0 = Phi'(1) Z1``.
    """
    ker, ran2, shift = _cache or _initial_subspaces(model, decomp)

    def gauss(V):
        x = V.basis @ _draw(rng, (V.dim,), real)
        return x.real.astype(np.complex128) if real else x

    k = gauss(ker)
    if decomp.kind == "I1":
        return k, None
    Z1 = gauss(ran2)
    return shift @ Z1 + k, Z1


def initial_from_representation(model: ARModel, Z0, Z1=None) -> np.ndarray:
    """``(X_0, ..., X_{-p+1})`` with ``X_{-j} = Z0 - j Z1``."""
    Z0 = np.asarray(Z0, dtype=np.complex128)
    Z1 = np.zeros_like(Z0) if Z1 is None else np.asarray(Z1, dtype=np.complex128)
    return np.stack([Z0 - j * Z1 for j in range(model.p)])


def probe_times(T: int) -> tuple[int, int, int]:
    return (T // 4, T // 2, T)


def ensemble_snapshots(model: ARModel, decomp: Decomposition, T: int, replications: int,
                       seed: int, real: bool = False, times=None, differences: int = 0) -> np.ndarray:
    """``Delta^d X_t`` for every replication at ``times``, shape ``(R, len(times), dim)``.

    Each replication simulates the AR recursion from Gaussian initial
    conditions drawn by :func:`sample_initial_conditions`.
    """
    if T < 8:
        raise InvalidInput("T must be at least 8")
    times = probe_times(T) if times is None else tuple(int(t) for t in times)
    if min(times) < differences or max(times) > T:
        raise InvalidInput("probe times out of range")
    # Delta^d X_t needs X_{t-d..t}
    keep = sorted({t - i for t in times for i in range(differences + 1)})
    cache = _initial_subspaces(model, decomp)
    children = np.random.SeedSequence(seed).spawn(replications)
    out = np.empty((replications, len(times), model.dim), dtype=np.complex128)
    for start in range(0, replications, _BATCH):
        chunk = children[start:start + _BATCH]
        eps = np.empty((len(chunk), T, model.dim), dtype=np.complex128)
        init = np.empty((len(chunk), model.p, model.dim), dtype=np.complex128)
        for i, child in enumerate(chunk):
            rng = np.random.default_rng(child)
            eps[i] = _innovations(model, T, rng, real)
            Z0, Z1 = sample_initial_conditions(model, decomp, rng, real, cache)
            init[i] = initial_from_representation(model, Z0, Z1)
        snaps = _recursion(model, eps, init, keep)
        index = {t: i for i, t in enumerate(keep)}
        for a, t in enumerate(times):
            acc = np.zeros((len(chunk), model.dim), dtype=np.complex128)
            for i in range(differences + 1):
                # binomial weights of (1 - L)^d
                w = (-1) ** i * comb(differences, i)
                acc += w * snaps[:, index[t - i]]
            out[start:start + len(chunk), a] = acc
    return out


def growth_slope(times: Sequence[int], variances: Sequence[float]) -> float:
    """Least-squares slope of log variance against log time."""
    v = np.maximum(np.asarray(variances, dtype=float), np.finfo(float).tiny)
    return float(np.polyfit(np.log(np.asarray(times, dtype=float)), np.log(v), 1)[0])


def _verdicts(snaps: np.ndarray, times, directions, threshold: float) -> list[StationarityVerdict]:
    R = snaps.shape[0]
    out = []
    for x in directions:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (snaps.shape[2],) or np.linalg.norm(x) == 0:
            raise InvalidInput("direction must be a nonzero vector of the model dimension")
        y = snaps @ x.conj()
        var = np.mean(np.abs(y - y.mean(axis=0)) ** 2, axis=0)
        slope = growth_slope(times, var)
        out.append(StationarityVerdict(
            direction=x, growth_slope=slope,
            verdict="stationary" if slope < threshold else "trending",
            replications=R, times=tuple(times), variances=tuple(float(v) for v in var)))
    return out


def probe_directions(model: ARModel, decomp: Decomposition, directions, T: int = 2000,
                     replications: int = 200, seed: int = 0, threshold: float = STATIONARY_SLOPE,
                     real: bool = False, differences: int = 0) -> list[StationarityVerdict]:
    """:func:`stationarity_probe` for several directions over one shared ensemble."""
    if replications < MIN_REPLICATIONS:
        raise InvalidInput(f"need at least {MIN_REPLICATIONS} replications, got {replications}")
    times = probe_times(T)
    snaps = ensemble_snapshots(model, decomp, T, replications, seed, real, times, differences)
    return _verdicts(snaps, times, directions, threshold)


def stationarity_probe(model: ARModel, decomp: Decomposition, direction, T: int = 2000,
                       replications: int = 200, seed: int = 0, threshold: float = STATIONARY_SLOPE,
                       real: bool = False, differences: int = 0) -> StationarityVerdict:
    """Diagnostic for stationarity of ``<X_t, direction>``.

    The ensemble variance of ``direction^H X_t`` at ``t = T/4, T/2, T`` is
    regressed on ``t`` in logs; a slope below ``threshold`` reads as
    stationary. Integrated directions give slopes near 1 (I(1)) or 3 (I(2)).
    """
    return probe_directions(model, decomp, [direction], T, replications, seed, threshold,
                            real, differences)[0]


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """CSV with columns ``t``, then ``x<i>_re, x<i>_im`` per coordinate."""
    path = Path(path)
    header = ["t"] + [f"x{i}_{part}" for i in range(traj.dim) for part in ("re", "im")]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, row in zip(traj.times, traj.values):
            w.writerow([int(t)] + [repr(float(v)) for c in row for v in (c.real, c.imag)])
    return path


def read_trajectory_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    data = np.array([[float(v) for v in r[1:]] for r in rows])
    return data[:, 0::2] + 1j * data[:, 1::2]
