"""Physical parameters, permeability tensors and closure constants.

Everything here is an immutable value type shared by both assemblies.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when user input violates a model invariant.

    ``errors`` carries every violated condition, not just the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2x2 tensor [[xx, xy], [xy, yy]]."""

    xx: float
    xy: float
    yy: float

    @classmethod
    def iso(cls, k: float) -> "SymTensor2":
        return cls(float(k), 0.0, float(k))

    @property
    def det(self) -> float:
        return self.xx * self.yy - self.xy * self.xy

    def is_spd(self) -> bool:
        return self.xx > 0 and self.det > 0

    def is_psd(self) -> bool:
        return self.xx >= 0 and self.yy >= 0 and self.det >= 0

    def is_isotropic(self) -> bool:
        return self.xy == 0 and self.xx == self.yy

    def as_array(self) -> np.ndarray:
        return np.array([[self.xx, self.xy], [self.xy, self.yy]])

    def inv(self) -> "SymTensor2":
        det = self.det
        if det == 0:
            raise ValidationError("tensor is singular")
        return SymTensor2(self.yy / det, -self.xy / det, self.xx / det)

    def inf_norm(self) -> float:
        """Induced max-norm: largest absolute row sum."""
        return max(abs(self.xx) + abs(self.xy), abs(self.xy) + abs(self.yy))

    def __mul__(self, s: float) -> "SymTensor2":
        return SymTensor2(self.xx * s, self.xy * s, self.yy * s)

    __rmul__ = __mul__


ZERO = SymTensor2(0.0, 0.0, 0.0)

# Interface frame for a horizontal interface: n points from the porous side
# into the free-flow side, tau along +x.
NORMAL = (0.0, 1.0)
TANGENT = (1.0, 0.0)


def m_projection(K: SymTensor2, a, b) -> float:
    """Return a^T K^{-1} b via the closed-form 2x2 inverse."""
    if not K.is_spd():
        raise ValidationError("tensor is not SPD")
    Ki = K.inv()
    return (a[0] * (Ki.xx * b[0] + Ki.xy * b[1])
            + a[1] * (Ki.xy * b[0] + Ki.yy * b[1]))


@dataclass(frozen=True)
class PhysicalParams:
    mu: float
    mu_eff: float
    alpha: float
    beta: SymTensor2 = ZERO
    K_tr: SymTensor2 = field(default_factory=lambda: SymTensor2.iso(1e-2))
    K_pm: SymTensor2 = field(default_factory=lambda: SymTensor2.iso(1e-2))

    @property
    def K_tr_ref(self) -> float:
        return self.K_tr.inf_norm()

    @property
    def K_pm_ref(self) -> float:
        t = TANGENT
        return t[0] * (self.K_pm.xx * t[0] + self.K_pm.xy * t[1]) + t[1] * (
            self.K_pm.xy * t[0] + self.K_pm.yy * t[1])

    @property
    def jump_coeff(self) -> float:
        """Friction coefficient mu / sqrt(K_tr_ref) of the stress jump."""
        return self.mu / math.sqrt(self.K_tr_ref)

    @property
    def slip_length(self) -> float:
        """sqrt(K_pm_ref) / alpha of the slip condition."""
        return math.sqrt(self.K_pm_ref) / self.alpha


def validate_params(p: PhysicalParams) -> list[str]:
    """Return every violated invariant; an empty list means valid."""
    errs = []
    for name in ("mu", "mu_eff", "alpha"):
        v = getattr(p, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            errs.append(f"{name} must be positive")
    if not p.K_tr.is_spd():
        errs.append("K_tr not SPD")
    if not p.K_pm.is_spd():
        errs.append("K_pm not SPD")
    if not p.beta.is_psd():
        errs.append("beta not PSD")
    return errs


def check_params(p: PhysicalParams) -> PhysicalParams:
    errs = validate_params(p)
    if errs:
        raise ValidationError(errs)
    return p


class ProfileKind(enum.Enum):
    LINEAR = "linear"
    PIECEWISE_LINEAR = "piecewise_linear"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


_TABLE = {
    ProfileKind.LINEAR: (2.0, 0.0),
    ProfileKind.PIECEWISE_LINEAR: (3.0, 1.0),
    ProfileKind.QUADRATIC: (4.0, 2.0),
}


@dataclass(frozen=True)
class ClosureProfile:
    """Shape assumption for the normal velocity across the transition zone."""

    kind: ProfileKind
    lambda1: float
    lambda2: float

    @classmethod
    def named(cls, kind) -> "ClosureProfile":
        kind = ProfileKind(kind) if not isinstance(kind, ProfileKind) else kind
        l1, l2 = closure_params(kind)
        return cls(kind, l1, l2)

    @classmethod
    def custom(cls, lambda1: float, lambda2: float) -> "ClosureProfile":
        l1, l2 = closure_params(ProfileKind.CUSTOM, lambda1, lambda2)
        return cls(ProfileKind.CUSTOM, l1, l2)

    @property
    def name(self) -> str:
        return self.kind.value


def closure_params(kind, lambda1: float | None = None,
                   lambda2: float | None = None) -> tuple[float, float]:
    """Closure constants (lambda1, lambda2) for a named or custom profile."""
    kind = ProfileKind(kind) if not isinstance(kind, ProfileKind) else kind
    if kind is not ProfileKind.CUSTOM:
        return _TABLE[kind]
    if lambda1 is None or lambda2 is None:
        raise ValidationError("custom profile needs lambda1 and lambda2")
    errs = []
    if not lambda1 > lambda2:
        errs.append("lambda1 must exceed lambda2")
    if not lambda2 >= 0:
        errs.append("lambda2 must be non-negative")
    if errs:
        raise ValidationError(errs)
    return float(lambda1), float(lambda2)


PROFILES = tuple(ClosureProfile.named(k) for k in _TABLE)
