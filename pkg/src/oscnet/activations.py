"""Activation function catalog: formulas, analytic derivatives, and static metadata.

Every unit is a scalar nonlinearity g(z).  Each entry ships a vectorized value
kernel, a vectorized derivative kernel (kinks mapped to subgradient 0), and an
``ActivationDescriptor`` recording continuity, kink points, monotonicity, range,
small-input affine behaviour, zero/hyperplane count, sign-equivalence to the
identity, and whether a single neuron with this unit can learn XOR.

Range endpoints and small-value slopes that are attained at interior optima are
stored at full float64 precision with their defining equations noted inline; the
numerical-scan module re-verifies all of them against dense grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, KinkError

COUNTABLY_INFINITE = math.inf

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_GELU_CUBIC = 0.044715
SELU_SCALE = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

# Interior extrema, frozen from high-precision root finding:
#   SiLU/Swish: global min of z*sigmoid(z), where 1 + z*(1 - sigmoid(z)) = 0;
#               at the root, z*sigmoid(z) = z + 1 exactly.
_SILU_MIN = -0.2784645427610738
#   GELU (tanh form): global min of 0.5*z*(1 + tanh(sqrt(2/pi)*(z + 0.044715 z^3))).
_GELU_MIN = -0.1700407505712541
#   Mish: global min of z*tanh(softplus(z)).
_MISH_MIN = -0.30884341301725043
#   SSU: pi * min(sinc) = pi*cos(x*) with tan(x*) = x*, x* = 4.493409457909064.
_SSU_MIN = -0.6824595705010303
#   DSU: extreme of pi^2*sin(z)/(pi^2 - z^2) at z = ±2.6309958519954266.
_DSU_MAX = 1.636408136824882


class ActivationId(str, Enum):
    """Identifiers for the 27 catalogued activation functions."""

    SIGNUM = "signum"
    IDENTITY = "identity"
    BIPOLAR_SIGMOID = "bipolar_sigmoid"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    ABSOLUTE = "absolute"
    SOFT_ROOT_SIGN = "soft_root_sign"
    HARD_TANH = "hard_tanh"
    SILU = "silu"
    LISHT = "lisht"
    SOFTPLUS = "softplus"
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"
    GELU = "gelu"
    SELU = "selu"
    SWISH = "swish"
    MISH = "mish"
    ELU = "elu"
    PRELU = "prelu"
    SINE = "sine"
    SQU = "squ"
    MONOTONIC_CUBIC = "monotonic_cubic"
    NCU = "ncu"
    Z_SQ_COS = "z_sq_cos"
    SSU = "ssu"
    GCU = "gcu"
    DSU = "dsu"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class ValueRange:
    """Interval of attainable outputs; a closed endpoint is actually attained."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return (self.lo - tol) <= x <= (self.hi + tol)


@dataclass(frozen=True)
class ActivationDescriptor:
    """Static metadata for one catalog entry."""

    id: ActivationId
    params: dict = field(default_factory=dict)
    continuous: bool = True
    nondifferentiable_points: tuple = ()
    monotonic: bool = False
    value_range: ValueRange = ValueRange(-math.inf, math.inf, False, False)
    small_value: tuple | None = None  # (c0, c1): g(z) ~ c0 + c1*z near 0
    hyperplane_count: float = 1  # zero count of g; COUNTABLY_INFINITE for oscillatory
    sign_equivalent_identity: bool = False
    xor_property: bool = False


def sinc(z: float) -> float:
    """sin(z)/z extended continuously with sinc(0) = 1."""
    if not math.isfinite(z):
        raise DomainError(f"sinc requires a finite input, got {z!r}")
    if z == 0.0:
        return 1.0
    return math.sin(z) / z


def _sinc_arr(z):
    out = np.ones_like(z)
    nz = z != 0.0
    out[nz] = np.sin(z[nz]) / z[nz]
    return out


def _dsinc_arr(z):
    # (z cos z - sin z)/z^2 cancels catastrophically near 0 (badly enough to
    # matter in float32); the series -z/3 + z^3/30 is good to ~|z|^5/840 there.
    small = np.abs(z) < 1e-2
    safe = np.where(small, 1.0, z)
    direct = (safe * np.cos(safe) - np.sin(safe)) / (safe * safe)
    series = -z / 3.0 + (z ** 3) / 30.0
    return np.where(small, series, direct)


def _sigmoid(z):
    # Branch-free stable logistic: never exponentiates a positive argument.
    t = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + t), t / (1.0 + t))


def _softplus(z):
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _gelu_inner(z):
    return _SQRT_2_OVER_PI * (z + _GELU_CUBIC * z ** 3)


# ---------------------------------------------------------------------------
# value / derivative kernels (vectorized; kink points yield subgradient 0)
# ---------------------------------------------------------------------------

def _signum(z, p):
    return np.sign(z)

def _d_signum(z, p):
    return np.zeros_like(z)

def _identity(z, p):
    return z + 0.0

def _d_identity(z, p):
    return np.ones_like(z)

def _bipolar_sigmoid(z, p):
    # (1 - e^-z)/(1 + e^-z) == tanh(z/2)
    return np.tanh(z / 2.0)

def _d_bipolar_sigmoid(z, p):
    t = np.tanh(z / 2.0)
    return 0.5 * (1.0 - t * t)

def _sigmoid_act(z, p):
    return _sigmoid(z)

def _d_sigmoid_act(z, p):
    s = _sigmoid(z)
    return s * (1.0 - s)

def _tanh(z, p):
    return np.tanh(z)

def _d_tanh(z, p):
    t = np.tanh(z)
    return 1.0 - t * t

def _absolute(z, p):
    return np.abs(z)

def _d_absolute(z, p):
    return np.sign(z)

def _soft_root_sign(z, p):
    a, b = p["alpha"], p["beta"]
    return z / (z / a + np.exp(-z / b))

def _d_soft_root_sign(z, p):
    a, b = p["alpha"], p["beta"]
    e = np.exp(-z / b)
    den = z / a + e
    dden = 1.0 / a - e / b
    return (den - z * dden) / (den * den)

def _hard_tanh(z, p):
    return np.clip(z, -1.0, 1.0)

def _d_hard_tanh(z, p):
    return np.where((z > -1.0) & (z < 1.0), 1.0, 0.0)

def _silu(z, p):
    return z * _sigmoid(z)

def _d_silu(z, p):
    s = _sigmoid(z)
    return s * (1.0 + z * (1.0 - s))

def _lisht(z, p):
    return z * np.tanh(z)

def _d_lisht(z, p):
    t = np.tanh(z)
    return t + z * (1.0 - t * t)

def _softplus_act(z, p):
    return _softplus(z)

def _d_softplus_act(z, p):
    return _sigmoid(z)

def _relu(z, p):
    return np.maximum(z, 0.0)

def _d_relu(z, p):
    return np.where(z > 0.0, 1.0, 0.0)

def _leaky_relu(z, p):
    s = p["negative_slope"]
    return np.where(z >= 0.0, z, s * z)

def _d_leaky_relu(z, p):
    s = p["negative_slope"]
    return np.where(z > 0.0, 1.0, np.where(z < 0.0, s, 0.0))

def _gelu(z, p):
    # 0.5*z*(1 + tanh(u)) evaluated as z*sigmoid(2u): identical analytically,
    # keeps the exponential tail sign-correct instead of flushing to -0.0.
    return z * _sigmoid(2.0 * _gelu_inner(z))

def _d_gelu(z, p):
    u2 = 2.0 * _gelu_inner(z)
    s = _sigmoid(u2)
    du2 = 2.0 * _SQRT_2_OVER_PI * (1.0 + 3.0 * _GELU_CUBIC * z * z)
    return s + z * s * (1.0 - s) * du2

def _selu(z, p):
    lam, a = p["scale"], p["alpha"]
    return np.where(z >= 0.0, lam * z, lam * a * np.expm1(np.minimum(z, 0.0)))

def _d_selu(z, p):
    lam, a = p["scale"], p["alpha"]
    return np.where(z > 0.0, lam, np.where(z < 0.0, lam * a * np.exp(np.minimum(z, 0.0)), 0.0))

def _mish(z, p):
    return z * np.tanh(_softplus(z))

def _d_mish(z, p):
    t = np.tanh(_softplus(z))
    return t + z * (1.0 - t * t) * _sigmoid(z)

def _elu(z, p):
    return np.where(z >= 0.0, z, np.expm1(np.minimum(z, 0.0)))

def _d_elu(z, p):
    # one-sided slopes agree at 0 (both 1): ELU is C1, no kink.
    return np.where(z >= 0.0, 1.0, np.exp(np.minimum(z, 0.0)))

def _prelu(z, p):
    a = p["alpha"]
    return np.where(z >= 0.0, z, a * z)

def _d_prelu(z, p):
    a = p["alpha"]
    return np.where(z > 0.0, 1.0, np.where(z < 0.0, a, 0.0))

def _sine(z, p):
    return np.sin(z)

def _d_sine(z, p):
    return np.cos(z)

def _squ(z, p):
    return z * z + z

def _d_squ(z, p):
    return 2.0 * z + 1.0

def _monotonic_cubic(z, p):
    return z ** 3 + z

def _d_monotonic_cubic(z, p):
    return 3.0 * z * z + 1.0

def _ncu(z, p):
    return z - z ** 3

def _d_ncu(z, p):
    return 1.0 - 3.0 * z * z

def _z_sq_cos(z, p):
    return z * z * np.cos(z)

def _d_z_sq_cos(z, p):
    return 2.0 * z * np.cos(z) - z * z * np.sin(z)

def _ssu(z, p):
    return math.pi * _sinc_arr(z - math.pi)

def _d_ssu(z, p):
    return math.pi * _dsinc_arr(z - math.pi)

def _gcu(z, p):
    return z * np.cos(z)

def _d_gcu(z, p):
    return np.cos(z) - z * np.sin(z)

def _dsu(z, p):
    return (math.pi / 2.0) * (_sinc_arr(z - math.pi) - _sinc_arr(z + math.pi))

def _d_dsu(z, p):
    return (math.pi / 2.0) * (_dsinc_arr(z - math.pi) - _dsinc_arr(z + math.pi))


_KERNELS = {
    ActivationId.SIGNUM: (_signum, _d_signum),
    ActivationId.IDENTITY: (_identity, _d_identity),
    ActivationId.BIPOLAR_SIGMOID: (_bipolar_sigmoid, _d_bipolar_sigmoid),
    ActivationId.SIGMOID: (_sigmoid_act, _d_sigmoid_act),
    ActivationId.TANH: (_tanh, _d_tanh),
    ActivationId.ABSOLUTE: (_absolute, _d_absolute),
    ActivationId.SOFT_ROOT_SIGN: (_soft_root_sign, _d_soft_root_sign),
    ActivationId.HARD_TANH: (_hard_tanh, _d_hard_tanh),
    ActivationId.SILU: (_silu, _d_silu),
    ActivationId.LISHT: (_lisht, _d_lisht),
    ActivationId.SOFTPLUS: (_softplus_act, _d_softplus_act),
    ActivationId.RELU: (_relu, _d_relu),
    ActivationId.LEAKY_RELU: (_leaky_relu, _d_leaky_relu),
    ActivationId.GELU: (_gelu, _d_gelu),
    ActivationId.SELU: (_selu, _d_selu),
    ActivationId.SWISH: (_silu, _d_silu),  # same formula as SiLU, distinct id
    ActivationId.MISH: (_mish, _d_mish),
    ActivationId.ELU: (_elu, _d_elu),
    ActivationId.PRELU: (_prelu, _d_prelu),
    ActivationId.SINE: (_sine, _d_sine),
    ActivationId.SQU: (_squ, _d_squ),
    ActivationId.MONOTONIC_CUBIC: (_monotonic_cubic, _d_monotonic_cubic),
    ActivationId.NCU: (_ncu, _d_ncu),
    ActivationId.Z_SQ_COS: (_z_sq_cos, _d_z_sq_cos),
    ActivationId.SSU: (_ssu, _d_ssu),
    ActivationId.GCU: (_gcu, _d_gcu),
    ActivationId.DSU: (_dsu, _d_dsu),
}

_SRS_ALPHA, _SRS_BETA = 2.0, 3.0
_SRS_MIN = _SRS_ALPHA * _SRS_BETA / (_SRS_BETA - _SRS_ALPHA * math.e)  # attained at z = -beta

_R = ValueRange
_UNBOUNDED = _R(-math.inf, math.inf, False, False)

_CATALOG: dict[ActivationId, ActivationDescriptor] = {d.id: d for d in [
    ActivationDescriptor(
        ActivationId.SIGNUM, continuous=False, nondifferentiable_points=(0.0,),
        monotonic=True, value_range=_R(-1.0, 1.0), small_value=None,
        hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.IDENTITY, monotonic=True, value_range=_UNBOUNDED,
        small_value=(0.0, 1.0), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.BIPOLAR_SIGMOID, monotonic=True,
        value_range=_R(-1.0, 1.0, False, False),
        small_value=(0.0, 0.5),  # g'(0) = 2e^0/(1+e^0)^2 = 1/2
        hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.SIGMOID, monotonic=True, value_range=_R(0.0, 1.0, False, False),
        small_value=(0.5, 0.25), hyperplane_count=0),
    ActivationDescriptor(
        ActivationId.TANH, monotonic=True, value_range=_R(-1.0, 1.0, False, False),
        small_value=(0.0, 1.0), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.ABSOLUTE, nondifferentiable_points=(0.0,), monotonic=False,
        value_range=_R(0.0, math.inf, True, False), small_value=None, hyperplane_count=1),
    ActivationDescriptor(
        ActivationId.SOFT_ROOT_SIGN, params={"alpha": _SRS_ALPHA, "beta": _SRS_BETA},
        monotonic=False, value_range=_R(_SRS_MIN, _SRS_ALPHA, True, False),
        small_value=(0.0, 1.0), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.HARD_TANH, nondifferentiable_points=(-1.0, 1.0), monotonic=True,
        value_range=_R(-1.0, 1.0), small_value=(0.0, 1.0), hyperplane_count=1,
        sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.SILU, monotonic=False, value_range=_R(_SILU_MIN, math.inf, True, False),
        small_value=(0.0, 0.5), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.LISHT, monotonic=False, value_range=_R(0.0, math.inf, True, False),
        small_value=(0.0, 0.0),  # z*tanh(z) ~ z^2: no linear term
        hyperplane_count=1),
    ActivationDescriptor(
        ActivationId.SOFTPLUS, monotonic=True, value_range=_R(0.0, math.inf, False, False),
        small_value=(math.log(2.0), 0.5), hyperplane_count=0),
    ActivationDescriptor(
        ActivationId.RELU, nondifferentiable_points=(0.0,), monotonic=True,
        value_range=_R(0.0, math.inf, True, False), small_value=None, hyperplane_count=1),
    ActivationDescriptor(
        ActivationId.LEAKY_RELU, params={"negative_slope": 0.01},
        nondifferentiable_points=(0.0,), monotonic=True, value_range=_UNBOUNDED,
        small_value=None, hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.GELU, monotonic=False, value_range=_R(_GELU_MIN, math.inf, True, False),
        small_value=(0.0, 0.5), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.SELU, params={"scale": SELU_SCALE, "alpha": SELU_ALPHA},
        nondifferentiable_points=(0.0,), monotonic=True,
        value_range=_R(-SELU_SCALE * SELU_ALPHA, math.inf, False, False),
        small_value=None, hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.SWISH, monotonic=False, value_range=_R(_SILU_MIN, math.inf, True, False),
        small_value=(0.0, 0.5), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.MISH, monotonic=False, value_range=_R(_MISH_MIN, math.inf, True, False),
        small_value=(0.0, 0.6),  # tanh(ln 2) = 3/5 exactly
        hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.ELU, monotonic=True, value_range=_R(-1.0, math.inf, False, False),
        small_value=(0.0, 1.0), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.PRELU, params={"alpha": 0.25}, nondifferentiable_points=(0.0,),
        monotonic=True, value_range=_UNBOUNDED, small_value=None, hyperplane_count=1,
        sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.SINE, monotonic=False, value_range=_R(-1.0, 1.0),
        small_value=(0.0, 1.0), hyperplane_count=COUNTABLY_INFINITE, xor_property=True),
    ActivationDescriptor(
        ActivationId.SQU, monotonic=False, value_range=_R(-0.25, math.inf, True, False),
        small_value=(0.0, 1.0), hyperplane_count=2, xor_property=True),
    ActivationDescriptor(
        ActivationId.MONOTONIC_CUBIC, monotonic=True, value_range=_UNBOUNDED,
        small_value=(0.0, 1.0), hyperplane_count=1, sign_equivalent_identity=True),
    ActivationDescriptor(
        ActivationId.NCU, monotonic=False, value_range=_UNBOUNDED,
        small_value=(0.0, 1.0), hyperplane_count=3, xor_property=True),
    ActivationDescriptor(
        ActivationId.Z_SQ_COS, monotonic=False, value_range=_UNBOUNDED,
        small_value=(0.0, 0.0),  # z^2 cos z ~ z^2
        hyperplane_count=COUNTABLY_INFINITE),
    ActivationDescriptor(
        ActivationId.SSU, monotonic=False, value_range=_R(_SSU_MIN, math.pi),
        small_value=None,  # ~z analytically, but pi*sinc(-pi) is not a float-exact zero
        hyperplane_count=COUNTABLY_INFINITE, xor_property=True),
    ActivationDescriptor(
        ActivationId.GCU, monotonic=False, value_range=_UNBOUNDED,
        small_value=(0.0, 1.0), hyperplane_count=COUNTABLY_INFINITE, xor_property=True),
    ActivationDescriptor(
        ActivationId.DSU, monotonic=False, value_range=_R(-_DSU_MAX, _DSU_MAX),
        small_value=(0.0, 1.0), hyperplane_count=COUNTABLY_INFINITE, xor_property=True),
]}

# Heaviside step (0/1): metadata-only entry, not an ActivationId and excluded
# from scans and benchmarks.  Not sign-equivalent (step(z)=0 for z<0).
STEP_DESCRIPTOR = ActivationDescriptor(
    ActivationId.SIGNUM, continuous=False, nondifferentiable_points=(0.0,),
    monotonic=True, value_range=_R(0.0, 1.0), small_value=None,
    hyperplane_count=1, sign_equivalent_identity=False, xor_property=False)


def all_ids() -> tuple[ActivationId, ...]:
    return tuple(ActivationId)


def descriptor(id: ActivationId) -> ActivationDescriptor:
    """Full static metadata record for one activation."""
    return _CATALOG[ActivationId(id)]


def _merged_params(id: ActivationId, params: dict | None) -> dict:
    base = _CATALOG[id].params
    if not params:
        return base
    merged = dict(base)
    merged.update(params)
    return merged


def apply(id: ActivationId, z: np.ndarray, params: dict | None = None) -> np.ndarray:
    """Vectorized g(z); dtype of ``z`` is preserved."""
    id = ActivationId(id)
    fn = _KERNELS[id][0]
    return fn(np.asarray(z), _merged_params(id, params))


def apply_grad(id: ActivationId, z: np.ndarray, params: dict | None = None) -> np.ndarray:
    """Vectorized g'(z) with subgradient 0 at kink points."""
    id = ActivationId(id)
    fn = _KERNELS[id][1]
    return fn(np.asarray(z), _merged_params(id, params))


def evaluate(id: ActivationId, z: float, params: dict | None = None) -> float:
    """g(z) for a scalar input.

    Raises DomainError for non-finite input.  Saturating forms are evaluated
    stably, so outputs stay finite at least for |z| <= 50.
    """
    if not math.isfinite(z):
        raise DomainError(f"activation input must be finite, got {z!r}")
    return float(apply(id, np.float64(z), params))


def derivative(id: ActivationId, z: float, params: dict | None = None) -> float:
    """Analytic g'(z) for a scalar input.

    Raises KinkError when z is exactly a non-differentiable point of g; the
    array path (apply_grad) instead uses the subgradient-0 convention there.
    """
    id = ActivationId(id)
    if not math.isfinite(z):
        raise DomainError(f"activation input must be finite, got {z!r}")
    if z in _CATALOG[id].nondifferentiable_points:
        raise KinkError(f"{id.value} is not differentiable at z = {z}")
    return float(apply_grad(id, np.float64(z), params))
