"""Built-in analytic field providers.

Velocity fields follow standard benchmark forms.  Kinetic-pressure fields
are chosen per provider as smooth positive scalars with an almost-everywhere
nonvanishing gradient; the particle dynamics only consume p1hat through its
gradient direction and the thermal speed, so any such choice is admissible.
Each provider documents its own choice.
"""

import math

import numpy as np

from ..errors import ValidationError
from . import FieldProvider, FluidSample

_Z3 = np.zeros(3)
_Z33 = np.zeros((3, 3))


class UniformField(FieldProvider):
    """Constant velocity V0, constant pressure p0.

    The pressure gradient vanishes identically, so the isobaric normal is
    degenerate everywhere; particles translate in straight lines with a
    frozen direction vector.
    """

    name = "uniform"
    time_dependent = False

    def __init__(self, V0=(1.0, 0.0, 0.0), p0=0.5):
        if p0 < 0.0:
            raise ValidationError("p0 must be >= 0")
        self.V0 = np.asarray(V0, dtype=float)
        self.p0 = float(p0)

    def params(self):
        return {"V0x": self.V0[0], "V0y": self.V0[1], "V0z": self.V0[2], "p0": self.p0}

    def sample(self, r, t):
        return FluidSample(self.V0.copy(), _Z33.copy(), _Z3.copy(), self.p0,
                           _Z3.copy(), _Z33.copy(), _Z3.copy())

    def sample_kinetic(self, r, t):
        V = self.V0
        return (V[0], V[1], V[2], self.p0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class UniformGradientField(FieldProvider):
    """Constant velocity with a spatially linear pressure.

    p1hat = p0 + g . r, so grad p1hat is the constant vector g and both the
    Hessian and the time derivative vanish.  The domain is clipped to the box
    where p1hat stays positive.
    """

    name = "uniform_gradient"
    time_dependent = False

    def __init__(self, V0=(1.0, 0.0, 0.0), p0=2.0, g=(0.0, 0.0, 1.0)):
        self.V0 = np.asarray(V0, dtype=float)
        self.p0 = float(p0)
        self.g = np.asarray(g, dtype=float)
        gnorm = float(np.linalg.norm(self.g))
        if gnorm <= 0.0:
            raise ValidationError("g must be a nonzero vector")
        if p0 <= 0.0:
            raise ValidationError("p0 must be > 0")
        # p1hat >= p0/2 everywhere inside the box |r|_inf <= L
        L = self.p0 / (2.0 * math.sqrt(3.0) * gnorm)
        self.domain_bounds = (np.full(3, -L), np.full(3, L))
        self.reference_box = self.domain_bounds

    def params(self):
        return {"V0x": self.V0[0], "V0y": self.V0[1], "V0z": self.V0[2],
                "p0": self.p0, "gx": self.g[0], "gy": self.g[1], "gz": self.g[2]}

    def sample(self, r, t):
        self._require_inside(r)
        p1 = self.p0 + float(self.g @ np.asarray(r, dtype=float))
        return FluidSample(self.V0.copy(), _Z33.copy(), _Z3.copy(), p1,
                           self.g.copy(), _Z33.copy(), _Z3.copy())

    def sample_kinetic(self, r, t):
        self._require_inside(np.asarray(r, dtype=float))
        V, g = self.V0, self.g
        p1 = self.p0 + g[0] * r[0] + g[1] * r[1] + g[2] * r[2]
        return (V[0], V[1], V[2], p1, g[0], g[1], g[2],
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class RigidRotationField(FieldProvider):
    """Solid-body rotation about the z axis with an axisymmetric pressure.

    V = omega z_hat x r, p1hat = p0 + c (x^2 + y^2) / 2.  The vorticity is
    the constant (0, 0, 2 omega) and the isobaric surfaces are coaxial
    cylinders, so the pressure gradient is radial and vanishes only on the
    axis.
    """

    name = "rigid_rotation"
    time_dependent = False
    reference_box = (np.array((-2.0, -2.0, -1.0)), np.array((2.0, 2.0, 1.0)))

    def __init__(self, omega=1.0, p0=0.5, c=1.0):
        if p0 < 0.0:
            raise ValidationError("p0 must be >= 0")
        if c <= 0.0:
            raise ValidationError("c must be > 0")
        self.omega = float(omega)
        self.p0 = float(p0)
        self.c = float(c)

    def params(self):
        return {"omega": self.omega, "p0": self.p0, "c": self.c}

    def sample(self, r, t):
        x, y = float(r[0]), float(r[1])
        om, c = self.omega, self.c
        V = np.array((-om * y, om * x, 0.0))
        gradV = np.array(((0.0, om, 0.0), (-om, 0.0, 0.0), (0.0, 0.0, 0.0)))
        xi = np.array((0.0, 0.0, 2.0 * om))
        p1 = self.p0 + 0.5 * c * (x * x + y * y)
        gp = np.array((c * x, c * y, 0.0))
        H = np.array(((c, 0.0, 0.0), (0.0, c, 0.0), (0.0, 0.0, 0.0)))
        return FluidSample(V, gradV, xi, p1, gp, H, _Z3.copy())

    def sample_kinetic(self, r, t):
        x, y = r[0], r[1]
        om, c = self.omega, self.c
        p1 = self.p0 + 0.5 * c * (x * x + y * y)
        return (-om * y, om * x, 0.0, p1, c * x, c * y, 0.0,
                c, 0.0, 0.0, c, 0.0, 0.0, 0.0, 0.0, 0.0)


class TaylorGreenField(FieldProvider):
    """Three-dimensional Taylor-Green vortex array, optionally decaying.

    V = A F(t) (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0) with
    F(t) = exp(-2 nu k^2 t); nu = 0 gives the steady variant.  The pressure
    is the classical cellular form shifted to positivity,
    p1hat = p0 + (A^2/16) [(cos 2kz + 2)(cos 2kx + cos 2ky) - 2] F(t)^2,
    which requires p0 > A^2 / 2.
    """

    name = "taylor_green"
    time_dependent = True

    def __init__(self, A=1.0, k=1.0, nu=0.0, p0=1.0):
        if k <= 0.0:
            raise ValidationError("k must be > 0")
        if nu < 0.0:
            raise ValidationError("nu must be >= 0")
        if p0 <= 0.5 * A * A:
            raise ValidationError("p0 must exceed A^2/2 to keep p1hat positive")
        self.A = float(A)
        self.k = float(k)
        self.nu = float(nu)
        self.p0 = float(p0)
        self.time_dependent = self.nu > 0.0
        L = 2.0 * math.pi / self.k
        self.reference_box = (np.zeros(3), np.full(3, L))

    def params(self):
        return {"A": self.A, "k": self.k, "nu": self.nu, "p0": self.p0}

    def sample(self, r, t):
        A, k, nu = self.A, self.k, self.nu
        x, y, z = float(r[0]), float(r[1]), float(r[2])
        F = math.exp(-2.0 * nu * k * k * t) if nu > 0.0 else 1.0
        F2 = F * F
        sx, cx = math.sin(k * x), math.cos(k * x)
        sy, cy = math.sin(k * y), math.cos(k * y)
        sz, cz = math.sin(k * z), math.cos(k * z)
        s2x, c2x = 2.0 * sx * cx, 1.0 - 2.0 * sx * sx
        s2y, c2y = 2.0 * sy * cy, 1.0 - 2.0 * sy * sy
        s2z, c2z = 2.0 * sz * cz, 1.0 - 2.0 * sz * sz

        AF = A * F
        V = np.array((AF * sx * cy * cz, -AF * cx * sy * cz, 0.0))
        Ak = A * k * F
        gradV = np.array((
            (Ak * cx * cy * cz, Ak * sx * sy * cz, 0.0),
            (-Ak * sx * sy * cz, -Ak * cx * cy * cz, 0.0),
            (-Ak * sx * cy * sz, Ak * cx * sy * sz, 0.0),
        ))
        xi = np.array((-Ak * cx * sy * sz, -Ak * sx * cy * sz, 2.0 * Ak * sx * sy * cz))

        w = A * A / 16.0 * F2
        czz = c2z + 2.0
        cxy = c2x + c2y
        p1 = self.p0 + w * (czz * cxy - 2.0)
        kw2 = 2.0 * k * w
        gp = np.array((-kw2 * s2x * czz, -kw2 * s2y * czz, -kw2 * s2z * cxy))
        kw4 = 4.0 * k * k * w
        H = np.array((
            (-kw4 * c2x * czz, 0.0, kw4 * s2x * s2z),
            (0.0, -kw4 * c2y * czz, kw4 * s2y * s2z),
            (kw4 * s2x * s2z, kw4 * s2y * s2z, -kw4 * c2z * cxy),
        ))
        lam = -4.0 * nu * k * k  # d/dt of F^2 divided by F^2
        dtgp = lam * gp if nu > 0.0 else _Z3.copy()
        return FluidSample(V, gradV, xi, p1, gp, H, dtgp)

    def sample_kinetic(self, r, t):
        A, k, nu = self.A, self.k, self.nu
        x, y, z = r[0], r[1], r[2]
        F = math.exp(-2.0 * nu * k * k * t) if nu > 0.0 else 1.0
        F2 = F * F
        sx, cx = math.sin(k * x), math.cos(k * x)
        sy, cy = math.sin(k * y), math.cos(k * y)
        sz, cz = math.sin(k * z), math.cos(k * z)
        s2x, c2x = 2.0 * sx * cx, 1.0 - 2.0 * sx * sx
        s2y, c2y = 2.0 * sy * cy, 1.0 - 2.0 * sy * sy
        s2z, c2z = 2.0 * sz * cz, 1.0 - 2.0 * sz * sz
        AF = A * F
        w = A * A / 16.0 * F2
        czz = c2z + 2.0
        cxy = c2x + c2y
        p1 = self.p0 + w * (czz * cxy - 2.0)
        kw2 = 2.0 * k * w
        gx, gy, gz = -kw2 * s2x * czz, -kw2 * s2y * czz, -kw2 * s2z * cxy
        kw4 = 4.0 * k * k * w
        lam = -4.0 * nu * k * k
        return (AF * sx * cy * cz, -AF * cx * sy * cz, 0.0, p1, gx, gy, gz,
                -kw4 * c2x * czz, 0.0, kw4 * s2x * s2z,
                -kw4 * c2y * czz, kw4 * s2y * s2z, -kw4 * c2z * cxy,
                lam * gx, lam * gy, lam * gz)


class LambOseenField(FieldProvider):
    """Gaussian-core line vortex with a uniform axial velocity.

    V_phi(rho) = Gamma / (2 pi rho) (1 - exp(-rho^2 / rc^2)), V_z = W.
    The azimuthal profile is smooth through the axis.  The pressure is a
    Gaussian well of depth pa on the same core scale,
    p1hat = p0 - pa exp(-rho^2 / rc^2), requiring 0 <= pa < p0; its gradient
    is radial and vanishes only on the axis (and asymptotically far away).
    """

    name = "lamb_oseen"
    time_dependent = False

    def __init__(self, Gamma=1.0, rc=1.0, W=0.5, p0=1.0, pa=0.5):
        if rc <= 0.0:
            raise ValidationError("rc must be > 0")
        if not 0.0 <= pa < p0:
            raise ValidationError("need 0 <= pa < p0 for positive pressure")
        self.Gamma = float(Gamma)
        self.rc = float(rc)
        self.W = float(W)
        self.p0 = float(p0)
        self.pa = float(pa)
        L = 2.0 * self.rc
        self.reference_box = (np.array((-L, -L, -L)), np.array((L, L, L)))

    def params(self):
        return {"Gamma": self.Gamma, "rc": self.rc, "W": self.W,
                "p0": self.p0, "pa": self.pa}

    def _q(self, s):
        """(1 - exp(-s/rc^2)) / s and its derivative, smooth through s = 0."""
        a = self.rc * self.rc
        if s > 1e-6 * a:
            E = math.exp(-s / a)
            q = -math.expm1(-s / a) / s
            dq = (s * E / a - (1.0 - E)) / (s * s)
        else:
            # series in s/a; relative truncation error below 1e-24 here
            sa = s / a
            q = (1.0 - sa * (0.5 - sa * (1.0 / 6.0 - sa / 24.0))) / a
            dq = (-0.5 + sa * (1.0 / 3.0 - sa * 0.125)) / (a * a)
        return q, dq

    def sample(self, r, t):
        x, y = float(r[0]), float(r[1])
        s = x * x + y * y
        G = self.Gamma / (2.0 * math.pi)
        q, dq = self._q(s)
        # V = G * q(s) * (-y, x, 0) + W z_hat
        V = np.array((-G * q * y, G * q * x, self.W))
        dqx, dqy = 2.0 * x * dq, 2.0 * y * dq
        gradV = np.array((
            (-G * dqx * y, G * (q + dqx * x), 0.0),
            (-G * (q + dqy * y), G * dqy * x, 0.0),
            (0.0, 0.0, 0.0),
        ))
        xi_z = G * (2.0 * q + dqx * x + dqy * y)
        xi = np.array((0.0, 0.0, xi_z))

        a = self.rc * self.rc
        E = math.exp(-s / a)
        p1 = self.p0 - self.pa * E
        w = 2.0 * self.pa * E / a
        gp = np.array((w * x, w * y, 0.0))
        dw = -w / a  # dw/ds
        H = np.array((
            (w + 2.0 * x * x * dw, 2.0 * x * y * dw, 0.0),
            (2.0 * x * y * dw, w + 2.0 * y * y * dw, 0.0),
            (0.0, 0.0, 0.0),
        ))
        return FluidSample(V, gradV, xi, p1, gp, H, _Z3.copy())

    def sample_kinetic(self, r, t):
        x, y = r[0], r[1]
        s = x * x + y * y
        G = self.Gamma / (2.0 * math.pi)
        q, _ = self._q(s)
        a = self.rc * self.rc
        E = math.exp(-s / a)
        p1 = self.p0 - self.pa * E
        w = 2.0 * self.pa * E / a
        dw = -w / a
        return (-G * q * y, G * q * x, self.W, p1, w * x, w * y, 0.0,
                w + 2.0 * x * x * dw, 2.0 * x * y * dw, 0.0,
                w + 2.0 * y * y * dw, 0.0, 0.0, 0.0, 0.0, 0.0)
