"""Ensembles of tracer particles and their sample statistics.

Seeding places N unit directions on the circle tangent to the local
isobaric surface at one point, either equispaced or i.i.d. uniform from a
seeded generator.  Under the uniform measure on that circle the sample
moments at the seed time reconstruct the fluid exactly: the mean relative
velocity vanishes, so the mean particle velocity equals the fluid velocity,
and the covariance of u is (beta^2 v_th^2 / 2)(1 - bb).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGradient, EmptyEnsemble, ValidationError
from .fields import EPS_GRAD_DEFAULT
from .integrate import integrate_trajectory
from .kinetics import TtpState, isobaric_normal, relative_velocity


@dataclass(slots=True)
class EnsembleSpec:
    """Seeding recipe for a tangent-circle ensemble at one point."""

    r0: np.ndarray
    t0: float = 0.0
    count: int = 64
    sampling: str = "equispaced_circle"
    seed: int = 0
    beta: float = 1.0

    def __post_init__(self):
        self.r0 = np.asarray(self.r0, dtype=float)
        if self.count < 1:
            raise ValidationError("count must be >= 1")
        if self.sampling not in ("equispaced_circle", "random_circle"):
            raise ValidationError(f"unknown sampling {self.sampling!r}")


@dataclass(slots=True)
class EnsembleStats:
    """Sample moments of particle velocity at one common time."""

    mean_v: np.ndarray
    mean_u: np.ndarray
    cov_u: np.ndarray
    n_effective: int


def tangent_frame(b):
    """Deterministic right-handed orthonormal frame (e1, e2, b).

    e1 = normalize(a x b) with a = z_hat unless |b . z_hat| > 0.9, in which
    case a = x_hat; e2 = b x e1.
    """
    a = np.array((0.0, 0.0, 1.0)) if abs(b[2]) <= 0.9 else np.array((1.0, 0.0, 0.0))
    e1 = np.cross(a, b)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(b, e1)
    return e1, e2


def seed_tangent_circle(spec, provider, eps_grad=EPS_GRAD_DEFAULT):
    """N unit directions in the plane orthogonal to b(r0, t0).

    Equispaced sampling uses angles 2 pi k / N in the deterministic tangent
    frame; random sampling draws i.i.d. uniform angles from the seeded
    generator, so a fixed seed reproduces the ensemble bit-identically.
    """
    s = provider.sample(spec.r0, spec.t0)
    b = isobaric_normal(s, eps_grad)
    if b is None:
        raise DegenerateGradient("pressure gradient degenerate at the seed point")
    e1, e2 = tangent_frame(b)
    if spec.sampling == "equispaced_circle":
        angles = 2.0 * math.pi * np.arange(spec.count) / spec.count
    else:
        rng = np.random.default_rng(spec.seed)
        angles = rng.uniform(0.0, 2.0 * math.pi, spec.count)
    states = []
    for a in angles:
        n = math.cos(a) * e1 + math.sin(a) * e2
        states.append(TtpState(t=spec.t0, r=spec.r0.copy(), n=n, beta=spec.beta))
    return states


def ensemble_stats(states, provider):
    """Sample moments over an ensemble at a common time (population 1/N)."""
    if len(states) == 0:
        raise EmptyEnsemble("no particles to average")
    t = states[0].t
    if any(st.t != t for st in states):
        raise ValidationError("ensemble_stats requires a common time")
    U = np.empty((len(states), 3))
    Vv = np.empty((len(states), 3))
    for i, st in enumerate(states):
        smp = provider.sample(st.r, st.t)
        U[i] = relative_velocity(st, smp)
        Vv[i] = smp.V + U[i]
    return _moments(Vv, U)


def _moments(Vv, U):
    mean_v = Vv.mean(axis=0)
    mean_u = U.mean(axis=0)
    D = U - mean_u
    cov = D.T @ D / len(U)
    cov = 0.5 * (cov + cov.T)
    return EnsembleStats(mean_v=mean_v, mean_u=mean_u, cov_u=cov, n_effective=len(U))


class EnsembleHistory:
    """Stats time series over an evolving ensemble."""

    def __init__(self, t, n_effective, excluded, mean_v, mean_u, cov_u):
        self.t = t
        self.n_effective = n_effective
        self.excluded = excluded
        self.mean_v = mean_v
        self.mean_u = mean_u
        self.cov_u = cov_u

    def __len__(self):
        return len(self.t)

    def stats(self, i):
        return EnsembleStats(mean_v=self.mean_v[i], mean_u=self.mean_u[i],
                             cov_u=self.cov_u[i], n_effective=int(self.n_effective[i]))


def evolve_ensemble(states, provider, config, stride=1):
    """Advance each particle independently; compute stats every ``stride`` steps.

    Particles whose trajectories leave the domain early are excluded from
    statistics at later output times and counted, so n_effective + excluded
    equals the seeded count at every output time.  Raises EmptyEnsemble if
    an output time has no survivors.

    Returns (trajectories, EnsembleHistory).
    """
    if len(states) == 0:
        raise EmptyEnsemble("no particles to evolve")
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    trajectories = [integrate_trajectory(st, provider, config) for st in states]
    n_steps = max(len(tr) for tr in trajectories) - 1
    out_idx = list(range(0, n_steps + 1, stride))
    if out_idx[-1] != n_steps:
        out_idx.append(n_steps)

    total = len(states)
    t_out = np.empty(len(out_idx))
    n_eff = np.empty(len(out_idx), dtype=int)
    excl = np.empty(len(out_idx), dtype=int)
    mean_v = np.empty((len(out_idx), 3))
    mean_u = np.empty((len(out_idx), 3))
    cov_u = np.empty((len(out_idx), 3, 3))
    for j, idx in enumerate(out_idx):
        alive = [tr for tr in trajectories if len(tr) > idx]
        if not alive:
            raise EmptyEnsemble(f"no surviving particles at output step {idx}")
        t_out[j] = alive[0].t[idx]
        Vv = np.array([tr.v[idx] for tr in alive])
        U = np.array([tr.u[idx] for tr in alive])
        m = _moments(Vv, U)
        n_eff[j] = m.n_effective
        excl[j] = total - m.n_effective
        mean_v[j] = m.mean_v
        mean_u[j] = m.mean_u
        cov_u[j] = m.cov_u
    return trajectories, EnsembleHistory(t_out, n_eff, excl, mean_v, mean_u, cov_u)
