"""Boundary-condition descriptions for the outer boundary and the ends of the interface.

Value callables take coordinate arrays ``(x, y)`` and return either a pair
``(vx, vy)`` (velocity or traction) or a scalar array (pressure or outward
normal flux).  Constants are accepted in place of callables.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Any, Callable

import numpy as np

from .core import ValidationError


class BCKind(enum.Enum):
    VELOCITY = "velocity"
    TRACTION = "traction"
    PRESSURE = "pressure"
    FLUX = "flux"
    NO_SLIP = "no_slip"
    DO_NOTHING = "do_nothing"


_STOKES_KINDS = {BCKind.VELOCITY, BCKind.NO_SLIP, BCKind.TRACTION, BCKind.DO_NOTHING}
_DARCY_KINDS = {BCKind.PRESSURE, BCKind.FLUX}


@dataclass(frozen=True)
class BC:
    kind: BCKind
    value: Any = None

    @classmethod
    def velocity(cls, fn): return cls(BCKind.VELOCITY, fn)

    @classmethod
    def no_slip(cls): return cls(BCKind.NO_SLIP)

    @classmethod
    def traction(cls, fn): return cls(BCKind.TRACTION, fn)

    @classmethod
    def do_nothing(cls): return cls(BCKind.DO_NOTHING)

    @classmethod
    def pressure(cls, fn): return cls(BCKind.PRESSURE, fn)

    @classmethod
    def flux(cls, fn): return cls(BCKind.FLUX, fn)

    @property
    def dirichlet(self) -> bool:
        return self.kind in (BCKind.VELOCITY, BCKind.NO_SLIP, BCKind.PRESSURE)

    def vector(self, x, y):
        """Velocity or traction data as two arrays."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        if self.value is None:
            return np.zeros_like(x), np.zeros_like(x)
        if callable(self.value):
            a, b = self.value(x, y)
        else:
            a, b = self.value
        return (np.broadcast_to(np.asarray(a, float), x.shape).copy(),
                np.broadcast_to(np.asarray(b, float), x.shape).copy())

    def scalar(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        if self.value is None:
            return np.zeros_like(x)
        v = self.value(x, y) if callable(self.value) else self.value
        return np.broadcast_to(np.asarray(v, float), x.shape).copy()


def _check(spec, stokes_names, darcy_names):
    errs = []
    for f in fields(spec):
        bc = getattr(spec, f.name)
        if not isinstance(bc, BC):
            errs.append(f"{f.name}: no boundary condition given")
            continue
        allowed = _STOKES_KINDS if f.name in stokes_names else _DARCY_KINDS
        if bc.kind not in allowed:
            errs.append(f"{f.name}: kind {bc.kind.value} not allowed here")
    if errs:
        return errs
    pinned = any(not getattr(spec, n).dirichlet for n in stokes_names) or any(
        getattr(spec, n).dirichlet for n in darcy_names)
    if not pinned:
        errs.append("pressure level undetermined: need a traction segment "
                    "or a porous-medium pressure segment")
    return errs


@dataclass(frozen=True)
class BoundarySpecFull:
    ff_left: BC
    ff_right: BC
    ff_top: BC
    tr_left: BC
    tr_right: BC
    pm_left: BC
    pm_right: BC
    pm_bottom: BC

    def validate(self):
        errs = _check(self, ("ff_left", "ff_right", "ff_top", "tr_left", "tr_right"),
                      ("pm_left", "pm_right", "pm_bottom"))
        if errs:
            raise ValidationError(errs)
        return self


@dataclass(frozen=True)
class BoundarySpecReduced:
    ff_left: BC
    ff_right: BC
    ff_top: BC
    pm_left: BC
    pm_right: BC
    pm_bottom: BC

    def validate(self):
        errs = _check(self, ("ff_left", "ff_right", "ff_top"),
                      ("pm_left", "pm_right", "pm_bottom"))
        if errs:
            raise ValidationError(errs)
        return self


@dataclass(frozen=True)
class GammaEnd:
    """Condition at one end of the interface.

    Dirichlet: averaged velocity (U_n, U_tau).  Neumann: averaged traction
    (T_n, T_tau) with T_n = mu_eff dV_n/dx and T_tau = mu_eff dV_tau/dx - P,
    where x is the tangential coordinate.
    """

    kind: str
    n: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann"):
            raise ValidationError(f"gamma end kind must be dirichlet or neumann, got {self.kind!r}")

    @property
    def dirichlet(self) -> bool:
        return self.kind == "dirichlet"


@dataclass(frozen=True)
class GammaBoundarySpec:
    left: GammaEnd
    right: GammaEnd


Source = Callable[[np.ndarray, np.ndarray], Any]


@dataclass(frozen=True)
class SourceFieldsFull:
    f_ff: Source
    f_tr: Source
    q: Source


@dataclass(frozen=True)
class SourceFieldsReduced:
    """Bulk sources, averaged interface sources and optional transmission data.

    ``g_normal``, ``g_tangential`` and ``g_pressure`` are inhomogeneous
    right-hand sides of the three transmission conditions (functions of
    the tangential coordinate).  They are zero in physical problems and
    exist so a manufactured solution can satisfy the reduced model exactly.
    """

    f_ff: Source
    q: Source
    F_n: Callable[[np.ndarray], Any]
    F_tau: Callable[[np.ndarray], Any]
    g_normal: Callable[[np.ndarray], Any] | None = None
    g_tangential: Callable[[np.ndarray], Any] | None = None
    g_pressure: Callable[[np.ndarray], Any] | None = None


def zero_vector(x, y):
    return 0.0 * x, 0.0 * x


def zero_scalar(x, y):
    return 0.0 * x


def zero_line(s):
    return 0.0 * s


def eval_vector(f, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    a, b = f(x, y)
    return (np.broadcast_to(np.asarray(a, float), x.shape),
            np.broadcast_to(np.asarray(b, float), x.shape))


def eval_scalar(f, *args):
    args = np.broadcast_arrays(*[np.asarray(a, float) for a in args])
    return np.broadcast_to(np.asarray(f(*args), float), args[0].shape)
