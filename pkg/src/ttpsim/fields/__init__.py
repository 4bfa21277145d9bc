"""Prescribed fluid fields.

A field provider evaluates, at any admissible (r, t), the full set of local
fluid data the particle kinetics consume: velocity and its gradient,
vorticity, the normalized kinetic pressure p1hat (units length^2/time^2)
and its gradient, Hessian and time-differentiated gradient.  Providers are
immutable after construction and ``sample`` is a pure function, so instances
may be shared freely across threads.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NotFound, OutOfDomain

EPS_GRAD_DEFAULT = 1e-10


@dataclass(slots=True)
class FluidSample:
    """All local fluid-field data at one (r, t).

    Attributes
    ----------
    V : (3,) ndarray
        Fluid velocity.
    gradV : (3, 3) ndarray
        Velocity gradient, ``gradV[i, j] = dV_j/dx_i``.
    xi : (3,) ndarray
        Vorticity, curl of V.
    p1hat : float
        Normalized kinetic pressure, >= 0.
    grad_p1hat : (3,) ndarray
        Spatial gradient of p1hat.
    hess_p1hat : (3, 3) ndarray
        Symmetric Hessian of p1hat.
    dt_grad_p1hat : (3,) ndarray
        Time derivative of grad_p1hat.
    """

    V: np.ndarray
    gradV: np.ndarray
    xi: np.ndarray
    p1hat: float
    grad_p1hat: np.ndarray
    hess_p1hat: np.ndarray
    dt_grad_p1hat: np.ndarray

    def curl_from_gradV(self):
        """Vorticity recomputed from the antisymmetric part of gradV."""
        g = self.gradV
        return np.array((g[1, 2] - g[2, 1], g[2, 0] - g[0, 2], g[0, 1] - g[1, 0]))

    def check(self, rtol=1e-12):
        """Raise AssertionError if the sample violates its own invariants."""
        scale = max(float(np.max(np.abs(self.gradV))), 1e-300)
        assert np.max(np.abs(self.xi - self.curl_from_gradV())) <= rtol * max(scale, 1.0), \
            "xi inconsistent with gradV"
        h = self.hess_p1hat
        hscale = max(float(np.max(np.abs(h))), 1e-300)
        assert np.max(np.abs(h - h.T)) <= rtol * max(hscale, 1.0), "Hessian not symmetric"
        assert self.p1hat >= 0.0, "negative kinetic pressure"


@dataclass(slots=True)
class FieldProviderDescriptor:
    """Registry entry describing one provider family."""

    name: str
    parameters: dict = field(default_factory=dict)
    time_dependent: bool = False
    domain_bounds: object = None  # None means unbounded, else (lo, hi) arrays


class FieldProvider:
    """Base class for field providers.

    Subclasses set ``name``, ``time_dependent``, ``domain_bounds`` (None for
    unbounded, else a ``(lo, hi)`` pair of (3,) arrays) and implement
    ``sample``.  ``reference_box`` is a finite box used by verification
    sweeps to draw sample points when the domain itself is unbounded.
    """

    name = "provider"
    time_dependent = False
    domain_bounds = None
    reference_box = (np.array((-1.0, -1.0, -1.0)), np.array((1.0, 1.0, 1.0)))

    def sample(self, r, t):
        raise NotImplementedError

    def sample_kinetic(self, r, t):
        """Flat scalar tuple of the fields the trajectory stepper consumes.

        Returns (Vx, Vy, Vz, p1hat, gx, gy, gz, Hxx, Hxy, Hxz, Hyy, Hyz,
        Hzz, dgx, dgy, dgz) where g is grad_p1hat, H its Hessian and dg its
        time derivative.  The default derives from :meth:`sample`; analytic
        providers override with allocation-free scalar math (the integrator
        hot loop calls this four times per step).  Must agree with
        :meth:`sample` to rounding.
        """
        s = self.sample(np.asarray(r, dtype=float), t)
        V, g, H, dg = s.V, s.grad_p1hat, s.hess_p1hat, s.dt_grad_p1hat
        return (V[0], V[1], V[2], s.p1hat, g[0], g[1], g[2],
                H[0, 0], H[0, 1], H[0, 2], H[1, 1], H[1, 2], H[2, 2],
                dg[0], dg[1], dg[2])

    def params(self):
        return {}

    def descriptor(self):
        return FieldProviderDescriptor(
            name=self.name,
            parameters=dict(self.params()),
            time_dependent=self.time_dependent,
            domain_bounds=self.domain_bounds,
        )

    def contains(self, r, margin=0.0):
        """True if r lies inside the domain (shrunk by margin on each side)."""
        if self.domain_bounds is None:
            return True
        lo, hi = self.domain_bounds
        return bool(np.all(r >= lo + margin) and np.all(r <= hi - margin))

    def _require_inside(self, r, margin=0.0):
        if not self.contains(r, margin):
            lo, hi = self.domain_bounds
            raise OutOfDomain(
                f"position {tuple(float(c) for c in r)} outside domain bounds "
                f"lo={tuple(float(c) for c in lo)} hi={tuple(float(c) for c in hi)}"
                + (f" with margin {margin}" if margin else "")
            )


# --- registry -------------------------------------------------------------

_REGISTRY: dict = {}


def register_provider(name, factory, descriptor_factory):
    _REGISTRY[name] = (factory, descriptor_factory)


def register_builtin_providers():
    """Populate the registry with the built-in analytic providers.

    Idempotent.  Returns the descriptors in registry order.
    """
    from . import analytic

    for cls in (
        analytic.UniformField,
        analytic.UniformGradientField,
        analytic.RigidRotationField,
        analytic.TaylorGreenField,
        analytic.LambOseenField,
    ):
        register_provider(cls.name, cls, lambda c=cls: c().descriptor())
    return [lookup(name) for name in _REGISTRY]


def lookup(name):
    """Descriptor for a registered provider name.  Raises NotFound."""
    if not _REGISTRY:
        register_builtin_providers()
    try:
        _, descr = _REGISTRY[name]
    except KeyError:
        raise NotFound(f"no provider registered under name {name!r}") from None
    return descr()


def create_provider(name, **params):
    """Instantiate a registered provider with keyword parameters."""
    if not _REGISTRY:
        register_builtin_providers()
    try:
        factory, _ = _REGISTRY[name]
    except KeyError:
        raise NotFound(f"no provider registered under name {name!r}") from None
    return factory(**params)


# --- finite-difference derivative audit ------------------------------------

_AXES = np.eye(3)


@dataclass(slots=True)
class DerivativeResiduals:
    """Relative residuals between provider derivatives and central differences.

    Each residual is ``max|provided - estimated|`` scaled by the larger of
    the two magnitudes; the three pressure-derivative residuals share a
    common magnitude anchor (the largest of their scales) so that an exactly
    zero derivative compared against pure difference noise does not read as
    a 100% mismatch.  Residuals are zero when everything vanishes.
    """

    grad_v: float
    grad_p1hat: float
    hess_p1hat: float
    dt_grad_p1hat: float
    h: float
    note: str = ""

    @property
    def max_residual(self):
        return max(self.grad_v, self.grad_p1hat, self.hess_p1hat, self.dt_grad_p1hat)

    def to_text(self):
        lines = [
            f"derivative audit (central differences, h={self.h:g})",
            f"  gradV         {self.grad_v:.3e}",
            f"  grad_p1hat    {self.grad_p1hat:.3e}",
            f"  hess_p1hat    {self.hess_p1hat:.3e}",
            f"  dt_grad_p1hat {self.dt_grad_p1hat:.3e}",
            f"  max           {self.max_residual:.3e}",
        ]
        if self.note:
            lines.append(f"  note: {self.note}")
        return "\n".join(lines)


def _mag(a):
    return float(np.max(np.abs(a)))


def _rel(est, given, anchor=0.0):
    diff = float(np.max(np.abs(est - given)))
    scale = max(_mag(est), _mag(given), anchor)
    if scale == 0.0:
        return 0.0
    return diff / scale


def fd_verify_derivatives(provider, r, t, h=1e-4):
    """Audit provider derivatives against central differences of sample values.

    Only V and p1hat values from displaced ``sample`` calls enter the
    estimates, so the audit is independent of the provider's own derivative
    code paths.  Requires r to sit more than 2h inside the domain.
    """
    r = np.asarray(r, dtype=float)
    if provider.domain_bounds is not None:
        provider._require_inside(r, margin=2.0 * h)

    def value(rr, tt):
        s = provider.sample(rr, tt)
        return s.V, s.p1hat

    vp, pp = {}, {}
    for i in range(3):
        vp[(i, +1)], pp[(i, +1)] = value(r + h * _AXES[i], t)
        vp[(i, -1)], pp[(i, -1)] = value(r - h * _AXES[i], t)
    _, p_c = value(r, t)

    grad_v = np.empty((3, 3))
    grad_p = np.empty(3)
    hess = np.empty((3, 3))
    for i in range(3):
        grad_v[i] = (vp[(i, +1)] - vp[(i, -1)]) / (2.0 * h)
        grad_p[i] = (pp[(i, +1)] - pp[(i, -1)]) / (2.0 * h)
        hess[i, i] = (pp[(i, +1)] - 2.0 * p_c + pp[(i, -1)]) / (h * h)
    for i in range(3):
        for j in range(i + 1, 3):
            _, ppp = value(r + h * _AXES[i] + h * _AXES[j], t)
            _, ppm = value(r + h * _AXES[i] - h * _AXES[j], t)
            _, pmp = value(r - h * _AXES[i] + h * _AXES[j], t)
            _, pmm = value(r - h * _AXES[i] - h * _AXES[j], t)
            hess[i, j] = hess[j, i] = (ppp - ppm - pmp + pmm) / (4.0 * h * h)

    # mixed space-time stencil for d/dt grad_p1hat, values only
    dt_grad = np.empty(3)
    for i in range(3):
        _, a = value(r + h * _AXES[i], t + h)
        _, b = value(r - h * _AXES[i], t + h)
        _, c = value(r + h * _AXES[i], t - h)
        _, d = value(r - h * _AXES[i], t - h)
        dt_grad[i] = (a - b - c + d) / (4.0 * h * h)

    s = provider.sample(r, t)
    note = getattr(provider, "interpolation", "")
    if note:
        note = f"interpolation={note}"
    anchor = max(_mag(grad_p), _mag(s.grad_p1hat), _mag(hess), _mag(s.hess_p1hat),
                 _mag(dt_grad), _mag(s.dt_grad_p1hat))
    return DerivativeResiduals(
        grad_v=_rel(grad_v, s.gradV),
        grad_p1hat=_rel(grad_p, s.grad_p1hat, anchor),
        hess_p1hat=_rel(hess, s.hess_p1hat, anchor),
        dt_grad_p1hat=_rel(dt_grad, s.dt_grad_p1hat, anchor),
        h=h,
        note=note,
    )
