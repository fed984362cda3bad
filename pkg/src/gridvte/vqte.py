"""McLachlan variational time evolution: assembly, integration and fitting.

The equations of motion are ``M theta_dot = V`` with

    M_kj = Re(<d_k psi|d_j psi> - <d_k psi|psi><psi|d_j psi>)
    V_k  = Im(<d_k psi|H|psi> - <d_k psi|psi><psi|H|psi>)

Both global-phase correction terms are always included. ``V`` is solved for
``theta_dot`` with a truncated SVD pseudoinverse.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.integrate import DOP853, RK45
from scipy.optimize import minimize
from threadpoolctl import threadpool_limits

from gridvte import qsim
from gridvte.ansatz import Ansatz, prepare_state, state_and_derivatives
from gridvte.grid import GridHamiltonian, energy_expectation, exact_evolve, to_momentum
from gridvte.qsim import Analytic, Circuit, DerivativeMode, ForwardDifference

# --- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ExactStatevector:
    pass


@dataclass(frozen=True)
class ShotBased:
    shots_per_expectation: int

    def __post_init__(self) -> None:
        if self.shots_per_expectation < 1:
            raise ValueError("shots_per_expectation must be >= 1")


EstimatorMode = Union[ExactStatevector, ShotBased]


@dataclass(frozen=True)
class AdaptiveRK45:
    pass


@dataclass(frozen=True)
class ExplicitRK8:
    pass


@dataclass(frozen=True)
class FixedRK4:
    step: float

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError("FixedRK4 step must be positive")


Solver = Union[AdaptiveRK45, ExplicitRK8, FixedRK4]

DEFAULT_RECORD_POINTS = 151


@dataclass(frozen=True)
class EvolutionConfig:
    t_total: float
    epsilon: float = 1e-8
    rcond: float = 1e-6
    solver: Solver = field(default_factory=AdaptiveRK45)
    rtol: float = 1e-6
    atol: float = 1e-8
    max_step: float | None = None
    record_times: tuple[float, ...] | None = None
    estimator: EstimatorMode = field(default_factory=ExactStatevector)
    rng_seed: int = 0
    derivative: str = "forward"  # "forward" or "analytic"
    max_rhs_calls: int | None = None

    def __post_init__(self) -> None:
        if not self.t_total >= 0 or not math.isfinite(self.t_total):
            raise ValueError("t_total must be finite and >= 0")
        for name in ("epsilon", "rcond", "rtol", "atol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_rhs_calls is not None and self.max_rhs_calls < 1:
            raise ValueError("max_rhs_calls must be >= 1")
        if self.derivative not in ("forward", "analytic"):
            raise ValueError("derivative must be 'forward' or 'analytic'")
        if self.record_times is None:
            n = 1 if self.t_total == 0 else DEFAULT_RECORD_POINTS
            times = tuple(float(t) for t in np.linspace(0.0, self.t_total, n))
        else:
            times = tuple(float(t) for t in self.record_times)
            if not times:
                raise ValueError("record_times must not be empty")
            if any(b < a for a, b in zip(times, times[1:])):
                raise ValueError("record_times must be sorted")
            if times[0] < 0 or times[-1] > self.t_total:
                raise ValueError("record_times must lie in [0, t_total]")
        object.__setattr__(self, "record_times", times)

    @property
    def derivative_mode(self) -> DerivativeMode:
        return Analytic() if self.derivative == "analytic" else ForwardDifference(self.epsilon)


# --- records --------------------------------------------------------------------


@dataclass(frozen=True)
class MetricAndForce:
    M: np.ndarray
    V: np.ndarray
    energy: float = float("nan")


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    thetas: np.ndarray
    fidelities: np.ndarray
    energies: np.ndarray
    norms: np.ndarray
    solver_stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        num_p = self.thetas.shape[1] if self.thetas.ndim == 2 else 0
        w.writerow(["t", "fidelity", "energy", "norm"] + [f"theta_{k}" for k in range(num_p)])
        for i in range(len(self.times)):
            row = [self.times[i], self.fidelities[i], self.energies[i], self.norms[i], *self.thetas[i]]
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def fmt(x: float) -> str:
    """Full double precision, '.' decimal point."""
    return f"{float(x):.17g}"


class IntegrationError(RuntimeError):
    """Integration stopped early; ``partial`` holds the records reached so far."""

    def __init__(self, message: str, partial: TrajectoryRecord | None = None):
        super().__init__(message)
        self.partial = partial


# --- helpers ----------------------------------------------------------------------


def _expectation(ham, psi: np.ndarray) -> float:
    return energy_expectation(ham, psi)


def _check_layout(ansatz: Ansatz, ham) -> None:
    dim = ham.grid.size if isinstance(ham, GridHamiltonian) else ham.values.shape[0]
    if dim != 2**ansatz.num_qubits:
        raise ValueError(f"ansatz register ({ansatz.num_qubits} qubits) does not match Hamiltonian size {dim}")


# --- exact assembly -------------------------------------------------------------


# OpenBLAS rounds differently at different thread counts, so BLAS is pinned to
# one thread while integrating or fitting. Parallelism instead comes from
# workers computing fixed-size row blocks of the Gram matrix: each block's
# arithmetic is the same whatever the worker count.
GRAM_BLOCK = 64
_workers = 1


def set_num_threads(n: int) -> None:
    """Worker threads for the metric Gram product. Results do not depend on ``n``."""
    global _workers
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _workers = int(n)


def _gram(d: np.ndarray) -> np.ndarray:
    dc = d.conj()
    rows = [slice(i, i + GRAM_BLOCK) for i in range(0, len(d), GRAM_BLOCK)]
    out = np.empty((len(d), len(d)), dtype=complex)

    def block(sl: slice) -> None:
        out[sl] = dc[sl] @ d.T

    if _workers == 1 or len(rows) == 1:
        for sl in rows:
            block(sl)
    else:
        with ThreadPoolExecutor(min(_workers, len(rows))) as pool:
            list(pool.map(block, rows))
    return out


def _metric_from(psi: np.ndarray, d: np.ndarray) -> np.ndarray:
    ov = d.conj() @ psi
    m = (_gram(d) - np.outer(ov, ov.conj())).real
    return 0.5 * (m + m.T)


def assemble_metric(ansatz: Ansatz, theta, mode: DerivativeMode | None = None) -> np.ndarray:
    psi, d = state_and_derivatives(ansatz, theta, mode)
    return _metric_from(psi, d)


def assemble_force(ansatz: Ansatz, theta, ham, mode: DerivativeMode | None = None) -> np.ndarray:
    return assemble(ansatz, theta, ham, mode).V


def assemble(
    ansatz: Ansatz,
    theta,
    ham,
    mode: DerivativeMode | None = None,
    estimator: EstimatorMode | None = None,
    seed: int | Sequence[int] = 0,
) -> MetricAndForce:
    """Metric and force at ``theta``, exact or from emulated shots."""
    _check_layout(ansatz, ham)
    if isinstance(estimator, ShotBased):
        return _assemble_shots(ansatz, theta, ham, estimator.shots_per_expectation, seed)
    psi, d = state_and_derivatives(ansatz, theta, mode)
    hpsi = ham.apply(psi)
    energy = float(np.vdot(psi, hpsi).real)
    ov = d.conj() @ psi
    v = (d.conj() @ hpsi - ov * energy).imag
    return MetricAndForce(_metric_from(psi, d), v, energy)


def solve_thetadot(mf: MetricAndForce, rcond: float = 1e-6) -> np.ndarray:
    """Minimal-norm least-squares ``theta_dot`` with singular values below ``rcond * s_max`` dropped."""
    if not rcond > 0:
        raise ValueError("rcond must be positive")
    m = np.asarray(mf.M, dtype=float)
    v = np.asarray(mf.V, dtype=float)
    u, s, vt = np.linalg.svd(m)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(v)
    keep = s >= rcond * s[0]
    return vt[keep].T @ ((u[:, keep].T @ v) / s[keep])


# --- shot-based estimators ------------------------------------------------------
# Each entry draws from its own generator seeded by (seed, entry id), so
# results do not depend on evaluation order.


def _rng(seed, *entry: int) -> np.random.Generator:
    base = list(np.atleast_1d(seed).astype(np.int64))
    return np.random.default_rng(base + [int(e) for e in entry])


def _branch_state(branch, phi: np.ndarray | None = None) -> np.ndarray:
    if isinstance(branch, np.ndarray):
        return branch
    circuit, params = branch
    if not isinstance(circuit, Circuit):
        raise TypeError("branch must be a state vector or a (Circuit, params) pair")
    return qsim.apply_circuit(circuit, params, phi)


def _overlap_from_states(a: np.ndarray, b: np.ndarray, shots: int, rng: np.random.Generator) -> complex:
    # ancilla state (|0>a + |1>b)/sqrt2; <X> = Re<a|b>, <Y> = Im<a|b>
    if shots < 1:
        raise ValueError("shots must be >= 1")
    z = np.vdot(a, b)
    p_x = np.clip(0.5 * (1.0 + z.real), 0.0, 1.0)
    p_y = np.clip(0.5 * (1.0 + z.imag), 0.0, 1.0)
    ex = 2.0 * rng.binomial(shots, p_x) / shots - 1.0
    ey = 2.0 * rng.binomial(shots, p_y) / shots - 1.0
    return complex(ex, ey)


def shot_overlap(w1, w2, shots: int, seed=0, phi: np.ndarray | None = None) -> complex:
    """Sampled estimate of ``<phi|W1^dag W2|phi>`` from the one-ancilla interference circuit.

    ``w1`` and ``w2`` are ``(Circuit, params)`` pairs or already-prepared
    branch states ``W|phi>``. X and Y are each measured ``shots`` times.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    a, b = _branch_state(w1, phi), _branch_state(w2, phi)
    if a.shape != b.shape:
        raise ValueError("branches act on registers of different size")
    return _overlap_from_states(a, b, shots, _rng(seed))


def _signed_sample_mean(u: np.ndarray, w: np.ndarray, values: np.ndarray, shots: int, rng) -> float:
    # after the final ancilla H: p(s, j) = |u_j + (-1)^s w_j|^2 / 4
    p = np.concatenate([np.abs(u + w) ** 2, np.abs(u - w) ** 2]) / 4.0
    p = np.clip(p, 0.0, None)
    counts = rng.multinomial(shots, p / p.sum())
    signed = np.concatenate([values, -values])
    return float(counts @ signed) / shots


def _force_entry_states(u: np.ndarray, w: np.ndarray, ham: GridHamiltonian, shots: int, rng) -> float:
    pot = _signed_sample_mean(u, w, ham.potential_values, shots, rng)
    uk, wk = to_momentum(ham.grid, u), to_momentum(ham.grid, w)
    kin = _signed_sample_mean(uk, wk, ham.kinetic_values, shots, rng)
    return pot + kin


def _shot_branches(ansatz: Ansatz, theta) -> tuple[np.ndarray, np.ndarray]:
    # W_k|phi> = 2i |d_k psi>: the circuit with sigma_k inserted
    psi, d = state_and_derivatives(ansatz, theta, Analytic())
    return psi, 2j * d


def shot_force_entry(ansatz: Ansatz, theta, k: int, ham: GridHamiltonian, shots: int, seed=0) -> float:
    """Sampled estimate of ``Re<phi|W_k^dag H U|phi>``.

    Potential part: mean of ``(-1)^s V(j)`` over joint ancilla/register
    samples. Kinetic part: same with the QFT applied before the register
    readout and ``p_j^2 / 2m`` as the value table.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0 <= k < ansatz.num_params:
        raise IndexError(f"parameter index {k} out of range")
    if not isinstance(ham, GridHamiltonian):
        raise TypeError("shot-based force needs a grid Hamiltonian")
    _check_layout(ansatz, ham)
    u, w = _shot_branches(ansatz, theta)
    return _force_entry_states(u, w[k], ham, shots, _rng(seed, 2, k))


def shot_energy(psi: np.ndarray, ham: GridHamiltonian, shots: int, seed=0) -> float:
    """Energy from position-basis and momentum-basis samples (identical branches)."""
    return _force_entry_states(psi, psi, ham, shots, _rng(seed, 3))


def _assemble_shots(ansatz: Ansatz, theta, ham, shots: int, seed) -> MetricAndForce:
    if not isinstance(ham, GridHamiltonian):
        raise TypeError("shot-based assembly needs a grid Hamiltonian")
    u, w = _shot_branches(ansatz, theta)
    num_p = ansatz.num_params
    energy = _force_entry_states(u, u, ham, shots, _rng(seed, 3))
    z = np.array([_overlap_from_states(w[k], u, shots, _rng(seed, 1, k)) for k in range(num_p)])
    zz = np.eye(num_p, dtype=complex)
    for k in range(num_p):
        for j in range(k + 1, num_p):
            zz[k, j] = _overlap_from_states(w[k], w[j], shots, _rng(seed, 0, k, j))
            zz[j, k] = np.conj(zz[k, j])
    m = 0.25 * (zz - np.outer(z, z.conj())).real
    m = 0.5 * (m + m.T)
    re_whu = np.array([_force_entry_states(u, w[k], ham, shots, _rng(seed, 2, k)) for k in range(num_p)])
    v = 0.5 * (re_whu - z.real * energy)
    return MetricAndForce(m, v, energy)


# --- fidelity and fitting --------------------------------------------------------


def fidelity(ansatz: Ansatz, theta, ham, psi0: np.ndarray, t: float) -> float:
    exact = exact_evolve(ham, psi0, t)
    return float(abs(np.vdot(exact, prepare_state(ansatz, theta))) ** 2)


@dataclass(frozen=True)
class FitResult:
    theta: np.ndarray
    fidelity: float
    reached: bool
    restart: int
    iterations: int


def _ascend(
    circuit: Circuit,
    target_pulled: np.ndarray,
    theta: np.ndarray,
    max_iter: int,
    gtol: float,
) -> tuple[np.ndarray, float, int]:
    """L-BFGS-B on ``1 - |<target|psi>|^2`` with analytic gradients.

    ``target_pulled`` is the target mapped back through the fixed suffix, so
    the objective is evaluated on the bare circuit output.
    """

    def loss_grad(th):
        psi, d = qsim.run_batch(circuit, th, Analytic())
        amp = np.vdot(target_pulled, psi)
        grad = 2.0 * (d @ target_pulled.conj() * amp.conj()).real
        return 1.0 - float(abs(amp) ** 2), -grad

    res = minimize(
        loss_grad, theta, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "gtol": gtol}
    )
    return np.asarray(res.x, dtype=float), 1.0 - float(res.fun), int(res.nit)


def _pull_back(ansatz: Ansatz, target: np.ndarray) -> np.ndarray:
    pulled = np.asarray(target, dtype=complex)[None, :]
    for blk in reversed(ansatz.suffix):
        pulled = qsim._apply_block(pulled, ansatz.num_qubits, blk.dagger())
    return pulled[0]


def fit_initial_params(
    ansatz: Ansatz,
    target: np.ndarray,
    threshold: float = 0.99,
    restarts: int = 10,
    seed: int = 0,
    max_iter: int = 500,
    initial: Sequence[np.ndarray] = (),
    gtol: float = 1e-9,
) -> FitResult:
    """Maximize ``|<target|psi(theta)>|^2``; first result above ``threshold`` wins.

    Starts are the ``initial`` guesses followed by ``restarts`` uniform draws
    from ``[-pi, pi]``. When none reaches the threshold the best one is
    returned with ``reached=False``.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    target = np.asarray(target, dtype=complex)
    if target.shape != (2**ansatz.num_qubits,):
        raise ValueError("target does not match the ansatz register")
    target = target / np.linalg.norm(target)
    rng = np.random.default_rng(seed)
    starts = [np.asarray(s, dtype=float) for s in initial]
    best: FitResult | None = None
    with threadpool_limits(limits=1):
        pulled = _pull_back(ansatz, target)
        for r in range(len(starts) + restarts):
            th0 = starts[r] if r < len(starts) else rng.uniform(-np.pi, np.pi, ansatz.num_params)
            th, f, its = _ascend(ansatz.circuit, pulled, th0, max_iter, gtol)
            res = FitResult(th, f, f >= threshold, r, its)
            if best is None or f > best.fidelity:
                best = res
            if res.reached:
                return res
    return best


def expressivity_probe(
    ansatz: Ansatz,
    ham,
    trajectory: TrajectoryRecord,
    psi0: np.ndarray,
    threshold: float = 0.99,
    restarts: int = 0,
    seed: int = 0,
    max_iter: int = 500,
) -> np.ndarray:
    """Best fidelity reachable by the ansatz at each recorded time.

    Each fit is warm-started from the trajectory's own parameters, so the
    result is never below the trajectory fidelity.
    """
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    exact = exact_evolve(ham, psi0, trajectory.times)
    out = np.empty(len(trajectory))
    for i, th in enumerate(trajectory.thetas):
        res = fit_initial_params(
            ansatz, exact[i], threshold, restarts, seed + i, max_iter, initial=[th]
        )
        out[i] = res.fidelity
    return out


# --- integration -------------------------------------------------------------


class _Rhs:
    def __init__(self, ansatz: Ansatz, ham, config: EvolutionConfig):
        self.ansatz, self.ham, self.config = ansatz, ham, config
        self.mode = config.derivative_mode
        self.calls = 0

    def __call__(self, t: float, theta: np.ndarray) -> np.ndarray:
        cfg = self.config
        if cfg.max_rhs_calls is not None and self.calls >= cfg.max_rhs_calls:
            raise IntegrationError(f"right-hand-side budget of {cfg.max_rhs_calls} calls exhausted at t={t:.6g}")
        seed = [cfg.rng_seed, self.calls]
        self.calls += 1
        mf = assemble(self.ansatz, theta, self.ham, self.mode, cfg.estimator, seed)
        thetadot = solve_thetadot(mf, cfg.rcond)
        if not np.all(np.isfinite(thetadot)):
            raise IntegrationError(f"non-finite theta_dot at t={t:.6g}")
        return thetadot


def _records(ansatz: Ansatz, ham, psi0: np.ndarray, times, thetas, stats: dict) -> TrajectoryRecord:
    times = np.asarray(times, dtype=float)
    thetas = np.asarray(thetas, dtype=float).reshape(len(times), ansatz.num_params)
    exact = exact_evolve(ham, psi0, times).reshape(len(times), -1)
    fids, energies, norms = [], [], []
    for i, th in enumerate(thetas):
        psi = prepare_state(ansatz, th)
        fids.append(abs(np.vdot(exact[i], psi)) ** 2)
        energies.append(_expectation(ham, psi))
        norms.append(np.linalg.norm(psi))
    return TrajectoryRecord(times, thetas, np.array(fids), np.array(energies), np.array(norms), stats)


def _rk4(rhs, theta0: np.ndarray, record_times, step: float):
    # lands exactly on every record time
    thetas, t, theta, steps = [], 0.0, theta0.copy(), 0
    for tr in record_times:
        span = tr - t
        n = max(1, math.ceil(span / step - 1e-12)) if span > 0 else 0
        h = span / n if n else 0.0
        for _ in range(n):
            try:
                k1 = rhs(t, theta)
                k2 = rhs(t + h / 2, theta + h / 2 * k1)
                k3 = rhs(t + h / 2, theta + h / 2 * k2)
                k4 = rhs(t + h, theta + h * k3)
            except IntegrationError as exc:
                raise IntegrationError(str(exc), (thetas, {"accepted_steps": steps, "rejected_steps": 0})) from None
            theta = theta + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            steps += 1
        t = tr
        thetas.append(theta.copy())
    return thetas, {"accepted_steps": steps, "rejected_steps": 0}


def _adaptive(rhs, theta0: np.ndarray, config: EvolutionConfig, record_times):
    cls = DOP853 if isinstance(config.solver, ExplicitRK8) else RK45
    max_step = np.inf if config.max_step is None else config.max_step
    counter = {"fev": 0}

    def fun(t, y):
        counter["fev"] += 1
        return rhs(t, y)

    solver = cls(fun, 0.0, theta0, config.t_total, max_step=max_step, rtol=config.rtol, atol=config.atol)
    startup = counter["fev"]
    thetas: list = []
    pending = list(record_times)
    while pending and pending[0] <= 0.0:
        thetas.append(theta0.copy())
        pending.pop(0)
    accepted = 0
    dense_evals = 0
    while pending:
        if solver.status != "running":
            break
        try:
            msg = solver.step()
        except IntegrationError as exc:
            stats = _stats(accepted, counter["fev"] - startup - dense_evals, cls, dense_evals)
            raise IntegrationError(str(exc), (thetas, stats)) from None
        if solver.status == "failed":
            stats = _stats(accepted, counter["fev"] - startup - dense_evals, cls, dense_evals)
            raise IntegrationError(f"solver failed at t={solver.t:.6g}: {msg}", (thetas, stats))
        accepted += 1
        if pending[0] <= solver.t:
            before = counter["fev"]
            dense = solver.dense_output()
            dense_evals += counter["fev"] - before
            while pending and pending[0] <= solver.t:
                thetas.append(np.asarray(dense(pending.pop(0)), dtype=float))
    stats = _stats(accepted, counter["fev"] - startup - dense_evals, cls, dense_evals)
    stats["rhs_evaluations"] = counter["fev"]
    return thetas, stats


def _stats(accepted: int, step_evals: int, cls, dense_evals: int) -> dict:
    attempts = step_evals // cls.n_stages
    return {
        "accepted_steps": accepted,
        "rejected_steps": max(attempts - accepted, 0),
        "dense_output_evaluations": dense_evals,
    }


def evolve(
    ansatz: Ansatz, ham, theta0, config: EvolutionConfig, psi0: np.ndarray | None = None
) -> TrajectoryRecord:
    """Integrate ``theta_dot = solve_thetadot(assemble(theta))`` over ``[0, t_total]``.

    Fidelity is measured against ``exp(-iHt) psi0``; ``psi0`` defaults to the
    ansatz state at ``theta0``. Records are taken on ``config.record_times``
    through the solver's dense output.
    """
    _check_layout(ansatz, ham)
    theta0 = np.asarray(theta0, dtype=float).copy()
    if theta0.shape != (ansatz.num_params,):
        raise ValueError(f"expected {ansatz.num_params} parameters, got {theta0.shape}")
    psi0 = prepare_state(ansatz, theta0) if psi0 is None else np.asarray(psi0, dtype=complex)
    rhs = _Rhs(ansatz, ham, config)
    times = config.record_times
    start = time.perf_counter()
    with threadpool_limits(limits=1):
        return _evolve(ansatz, ham, theta0, config, psi0, rhs, times, start)


def _evolve(ansatz, ham, theta0, config, psi0, rhs, times, start) -> TrajectoryRecord:
    try:
        if config.t_total == 0:
            thetas, stats = [theta0.copy() for _ in times], {"accepted_steps": 0, "rejected_steps": 0}
        elif isinstance(config.solver, FixedRK4):
            thetas, stats = _rk4(rhs, theta0, times, config.solver.step)
        else:
            thetas, stats = _adaptive(rhs, theta0, config, times)
    except IntegrationError as exc:
        partial = None
        if isinstance(exc.partial, tuple):
            got, stats = exc.partial
            if got:
                partial = _records(ansatz, ham, psi0, times[: len(got)], got, stats)
        raise IntegrationError(str(exc), partial) from None
    stats["rhs_calls"] = rhs.calls
    stats["wall_time_s"] = time.perf_counter() - start
    if len(thetas) != len(times):
        raise IntegrationError(
            f"solver stopped after {len(thetas)} of {len(times)} record times",
            _records(ansatz, ham, psi0, times[: len(thetas)], thetas, stats) if thetas else None,
        )
    return _records(ansatz, ham, psi0, times, thetas, stats)
