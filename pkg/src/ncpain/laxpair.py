"""Both Lax representations of noncommutative Painleve II and their checks.

The spectral representation pairs a 2x2 matrix A (quadratic in the spectral
parameter lambda) with the 2x2 matrix B of the z-equation; the curvature
combination A_z - B_lambda - [B, A] then vanishes exactly when

    v_zz = 2 v^3 - 2 [z, v]_+ + C                                 (P-II)

holds, with the equation residual sitting in the off-diagonal entries.
The second representation is a 6x6 block-diagonal pair (L, P) whose Lax
equation L_t = [P, L] encodes the symmetric three-field flow

    v0' = v2 v0 + v0 v2 + alpha0
    v1' = -(v2 v1 + v1 v2) + alpha1
    v2' = v1 - v0

which conserves v0 + v1 + v2^2 - (alpha0 + alpha1) t and collapses onto
P-II for v2 once that first integral is set to zero and alpha0 + alpha1 = 2
(then C = alpha1 - alpha0 and z is the flow time).
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import GridFunction, require_stencil_length
from .integrators import rk4_path
from .quasidet import BlockMatrix
from .ring import NearSingularError, RingElement, anticommutator

NORMALIZED_ALPHA_SUM = 2.0


@dataclass(frozen=True)
class PiiState:
    """Field value and derivatives entering the spectral Lax pair."""

    v: RingElement
    v_z: RingElement
    v_zz: RingElement
    z: complex
    lam: complex
    C: complex


@dataclass(frozen=True)
class SymState:
    """One point of the symmetric three-field flow."""

    v0: RingElement
    v1: RingElement
    v2: RingElement
    alpha0: complex
    alpha1: complex
    t: float = 0.0


@dataclass(frozen=True)
class FlowResult:
    states: list
    truncated: bool
    reason: str | None


def _require_lambda(lam: complex):
    if lam == 0:
        raise ValueError("spectral parameter lambda must be nonzero")


def build_A(s: PiiState) -> BlockMatrix:
    """Spectral-equation matrix; trace-free with A22 = -A11."""
    _require_lambda(s.lam)
    one = s.v.one_like()
    a11 = (8j * s.lam ** 2 - 2j * s.z) * one + 1j * (s.v * s.v)
    a12 = -1j * s.v_z + (0.25 * s.C / s.lam) * one - (4 * s.lam) * s.v
    a21 = 1j * s.v_z + (0.25 * s.C / s.lam) * one - (4 * s.lam) * s.v
    return BlockMatrix([[a11, a12], [a21, -a11]])


def build_B(v: RingElement, lam: complex) -> BlockMatrix:
    """z-equation matrix [[-2i lam, v], [v, 2i lam]]."""
    one = v.one_like()
    return BlockMatrix([[(-2j * lam) * one, v], [v, (2j * lam) * one]])


def _build_A_z(s: PiiState) -> BlockMatrix:
    # Chain rule applied to build_A entry by entry; exact, no stencils.
    one = s.v.one_like()
    a11 = 1j * (s.v_z * s.v + s.v * s.v_z) - 2j * one
    a12 = -1j * s.v_zz - (4 * s.lam) * s.v_z
    a21 = 1j * s.v_zz - (4 * s.lam) * s.v_z
    return BlockMatrix([[a11, a12], [a21, -a11]])


def _build_B_lambda(v: RingElement) -> BlockMatrix:
    one = v.one_like()
    zero = v.zero_like()
    return BlockMatrix([[-2j * one, zero], [zero, 2j * one]])


def zero_curvature_residual(s: PiiState) -> BlockMatrix:
    """A_z - B_lambda - (B A - A B), with A_z assembled analytically.

    The diagonal entries cancel identically for arbitrary v, v_z, v_zz;
    entry (0, 1) equals -i times the P-II residual and entry (1, 0)
    equals +i times it, independently of lambda.
    """
    _require_lambda(s.lam)
    a = build_A(s)
    b = build_B(s.v, s.lam)
    return (_build_A_z(s) - _build_B_lambda(s.v)) - (b @ a - a @ b)


def pii_from_zero_curvature(residual: BlockMatrix) -> RingElement:
    """Extract the equation residual from entry (0, 1) of the curvature."""
    return 1j * residual.entry(0, 1)


def pii_residual_exact(v: RingElement, v_zz: RingElement, z: complex,
                       C: complex) -> RingElement:
    """v_zz - 2 v^3 + 2 [z, v]_+ - C, with z acting as z * one."""
    one = v.one_like()
    z_el = complex(z) * one
    return v_zz - 2 * (v * v * v) + 2 * anticommutator(z_el, v) - C * one


def pii_residual_grid(f: GridFunction, C: complex,
                      z_shift: float = 0.0) -> GridFunction:
    """Equation residual on interior points, v_zz by centred stencil.

    ``z_shift`` offsets the independent variable; a trajectory whose
    conserved combination equals a nonzero constant k solves the equation
    in z = t + k/2, so passing z_shift = k/2 recovers a zero residual.
    """
    require_stencil_length(f)
    inv_h2 = 1.0 / (f.h * f.h)
    out = []
    for k in range(1, len(f) - 1):
        v = f[k]
        v_zz = (f[k - 1] - 2 * v + f[k + 1]) * inv_h2
        out.append(pii_residual_exact(v, v_zz, f.z(k) + z_shift, C))
    return GridFunction(f.z0 + f.h, f.h, tuple(out))


# -- symmetric three-field representation ---------------------------------

def _block_diag(blocks) -> BlockMatrix:
    zero = blocks[0][0][0].zero_like()
    size = 2 * len(blocks)
    rows = [[zero] * size for _ in range(size)]
    for b, block in enumerate(blocks):
        for i in range(2):
            for j in range(2):
                rows[2 * b + i][2 * b + j] = block[i][j]
    return BlockMatrix(rows)


def build_L(s: SymState) -> BlockMatrix:
    one = s.v0.one_like()
    zero = s.v0.zero_like()
    return _block_diag([
        [[one, zero], [-s.v0, -one]],
        [[one, zero], [-s.v1, -one]],
        [[-one, zero], [-s.v2, one]],
    ])


def build_P(s: SymState) -> BlockMatrix:
    one = s.v0.one_like()
    zero = s.v0.zero_like()
    try:
        v0_inv = s.v0.inv()
    except NearSingularError as exc:
        raise NearSingularError(str(exc), condition=exc.condition,
                                where="v0") from exc
    try:
        v1_inv = s.v1.inv()
    except NearSingularError as exc:
        raise NearSingularError(str(exc), condition=exc.condition,
                                where="v1") from exc
    rho1 = -s.v2 - (0.5 * s.alpha0) * v0_inv
    rho2 = -s.v2 + (0.5 * s.alpha1) * v1_inv
    sigma = s.v0 - s.v1 + 2 * s.v2
    # Lower-left sign of the third block is forced by L3_t = [P3, L3]
    # together with v2' = v1 - v0.
    return _block_diag([
        [[rho1, zero], [zero, -rho1]],
        [[-rho2, zero], [zero, rho2]],
        [[-one, zero], [(-0.5) * sigma, one]],
    ])


def symmetric_rhs(s: SymState) -> tuple[RingElement, RingElement, RingElement]:
    one = s.v0.one_like()
    d0 = s.v2 * s.v0 + s.v0 * s.v2 + s.alpha0 * one
    d1 = -(s.v2 * s.v1 + s.v1 * s.v2) + s.alpha1 * one
    d2 = s.v1 - s.v0
    return d0, d1, d2


def lax_residual_symmetric(s: SymState, rhs=None) -> BlockMatrix:
    """L_t - (P L - L P); vanishes iff the field derivatives match the flow.

    ``rhs`` overrides the derivative triple (default: symmetric_rhs(s)),
    which makes perturbation sensitivity measurable.
    """
    if rhs is None:
        rhs = symmetric_rhs(s)
    ell = build_L(s)
    pee = build_P(s)
    zero = s.v0.zero_like()
    rows = [[zero] * 6 for _ in range(6)]
    rows[1][0] = -rhs[0]
    rows[3][2] = -rhs[1]
    rows[5][4] = -rhs[2]
    ell_t = BlockMatrix(rows)
    return ell_t - (pee @ ell - ell @ pee)


def first_integral(s: SymState) -> RingElement:
    """v0 + v1 + v2^2 - (alpha0 + alpha1) t; constant along the flow."""
    one = s.v0.one_like()
    return s.v0 + s.v1 + s.v2 * s.v2 \
        - ((s.alpha0 + s.alpha1) * s.t) * one


def normalize_first_integral(s: SymState) -> SymState:
    """Replace v1 so the conserved combination vanishes at this state."""
    one = s.v0.one_like()
    v1 = ((s.alpha0 + s.alpha1) * s.t) * one - s.v0 - s.v2 * s.v2
    return SymState(s.v0, v1, s.v2, s.alpha0, s.alpha1, s.t)


def _flow_margin(el: RingElement) -> float:
    # Invertibility margin for trajectory monitoring: the smallest singular
    # value, saturated so tiny well-conditioned scalars are still flagged.
    smin, smax = el.singular_extremes()
    return smin / max(smax, 1.0)


def integrate_symmetric(s0: SymState, t_end: float, h: float,
                        min_condition: float = 1e-12) -> FlowResult:
    """Fixed-step RK4 flow of the symmetric system from s0.t to t_end.

    The trajectory is truncated (not an exception) when values stop being
    finite or when the invertibility margin of v0 or v1 drops below
    ``min_condition``; the returned FlowResult carries the reason.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    span = float(t_end) - s0.t
    steps = round(span / h)
    if steps < 1 or abs(steps * h - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError("t range is not an integral number of steps")

    def rhs(t, y):
        return symmetric_rhs(SymState(y[0], y[1], y[2],
                                      s0.alpha0, s0.alpha1, t))

    def monitor(t, y):
        for name, el in (("v0", y[0]), ("v1", y[1]), ("v2", y[2])):
            smin, smax = el.singular_extremes()
            if not (smax < 1e100):
                return f"{name} is no longer finite at t = {t:.6g}"
        for name, el in (("v0", y[0]), ("v1", y[1])):
            if _flow_margin(el) < min_condition:
                return (f"{name} is near-singular at t = {t:.6g} "
                        f"(margin {_flow_margin(el):.3e})")
        return None

    y0 = (s0.v0, s0.v1, s0.v2)
    ys, reason = rk4_path(rhs, s0.t, y0, h, steps, monitor=monitor)
    states = [SymState(y[0], y[1], y[2], s0.alpha0, s0.alpha1, s0.t + i * h)
              for i, y in enumerate(ys)]
    return FlowResult(states, reason is not None, reason)


def reduction_check(states, integration_constant: float = 0.0
                    ) -> GridFunction:
    """P-II residual of the v2 component along a symmetric trajectory.

    Requires alpha0 + alpha1 = 2 (the scaling in which the eliminated
    equation is P-II with C = alpha1 - alpha0 and z = t).  A nonzero value
    of the conserved combination shifts z; pass it as
    ``integration_constant`` to compensate.
    """
    if len(states) < 2:
        raise ValueError("trajectory too short")
    s0 = states[0]
    alpha_sum = s0.alpha0 + s0.alpha1
    if abs(alpha_sum - NORMALIZED_ALPHA_SUM) > 1e-12:
        raise ValueError(
            f"reduction needs alpha0 + alpha1 = {NORMALIZED_ALPHA_SUM}, "
            f"got {alpha_sum}")
    dt = states[1].t - states[0].t
    v2_grid = GridFunction(s0.t, dt, tuple(s.v2 for s in states))
    c_val = s0.alpha1 - s0.alpha0
    return pii_residual_grid(v2_grid, c_val,
                             z_shift=integration_constant / 2.0)
