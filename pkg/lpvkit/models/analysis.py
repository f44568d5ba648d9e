"""
Transformations and frozen analysis of LPV models.

Includes the SS -> LFR conversion, LFR interconnections, frozen (LTI) evaluation, forward-Euler
discretization of CT state-space models and the shift-register realization of IO models.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from ..errors import ConversionError, DimensionError, DomainMismatchError, IllPosedError
from ..pmatrix import Affine, Custom, PVMatrix, as_pmatrix, blkdiag, hconcat, vconcat
from ..scheduling import TimeMap, make_timemap
from ..types import InterconnectKind, TimeDomain
from ..utils import handle_numerical_errors
from .io import LpvIoModel
from .lfr import WELL_POSED_TOL, LpvLfrModel
from .ss import LpvSsModel

logger = logging.getLogger(__name__)

Model = Union[LpvIoModel, LpvSsModel, LpvLfrModel]

# Singular values below this fraction of the largest one are dropped in term factorizations.
RANK_TOL = 1e-12


def constant_sample(tm: TimeMap, p_const: Union[float, Sequence[float]]) -> np.ndarray:
    """
    Extended sample of a constant scheduling trajectory.

    DT: every shift equals p_const. CT: order-0 columns equal p_const, derivatives are zero.

    Args:
        tm: Timemap of the extended signal
        p_const: One value per scheduling channel (tm.names order), or a scalar for all channels
    """
    values = np.broadcast_to(np.asarray(p_const, dtype=float).ravel(), (len(tm.names),))
    row = np.empty(tm.dim)
    for col, (name, order) in enumerate(tm.columns):
        frozen = values[tm.names.index(name)]
        row[col] = 0.0 if tm.domain is TimeDomain.CT and order > 0 else frozen
    return row


def _freeze(m: PVMatrix, tm: TimeMap, row: np.ndarray) -> PVMatrix:
    return as_pmatrix(m.eval(row, tm), tm=make_timemap([0], m.domain))


def frozen(m: Model, p_const: Union[float, Sequence[float]]) -> Model:
    """
    Evaluate every matrix function of a model at a constant scheduling value.

    Returns:
        A model of the same representation kind with constant matrices
    """
    tm = m.tm
    row = constant_sample(tm, p_const)
    if isinstance(m, LpvIoModel):
        return LpvIoModel(
            A=[_freeze(a, tm, row) for a in m.A],
            B=[_freeze(b, tm, row) for b in m.B],
            delay=m.delay,
            sample_time=m.sample_time,
            n_inputs=m.nu,
        )
    if isinstance(m, LpvSsModel):
        return LpvSsModel(
            *(_freeze(x, tm, row) for x in (m.A, m.B, m.C, m.D)),
            K=None if m.K is None else _freeze(m.K, tm, row),
            noise_variance=m.noise_variance,
            sample_time=m.sample_time,
        )
    if isinstance(m, LpvLfrModel):
        return LpvLfrModel(Delta=_freeze(m.Delta, tm, row), sample_time=m.sample_time, **m.blocks())
    raise TypeError(f"Cannot freeze {type(m).__name__}")


@handle_numerical_errors("Frozen poles")
def frozen_poles(m: Model, p_const: Union[float, Sequence[float]]) -> np.ndarray:
    """
    Poles of the frozen dynamics at a constant scheduling value, largest magnitude first.

    IO models use the block-companion matrix of the output polynomial; LFR models close the
    Delta loop around the state matrix.

    Raises:
        IllPosedError: If the frozen LFR loop is singular
    """
    lti = frozen(m, p_const)
    if isinstance(lti, LpvIoModel):
        state = _companion_matrix([a.constant for a in lti.A], lti.ny)
    elif isinstance(lti, LpvSsModel):
        state = lti.A.constant
    else:
        delta = lti.Delta.constant
        loop = lti.loop_matrix(delta)
        det = np.linalg.det(loop) if lti.nw else 1.0
        if abs(det) < WELL_POSED_TOL:
            raise IllPosedError(None, det)
        closed = np.linalg.solve(loop, delta @ lti.Cz) if lti.nw else np.zeros((0, lti.nx))
        state = lti.A + lti.Bw @ closed
    if state.size == 0:
        return np.zeros(0, dtype=complex)
    poles = linalg.eigvals(state)
    return poles[np.argsort(-np.abs(poles), kind="stable")]


def _companion_matrix(coeffs: Sequence[np.ndarray], ny: int) -> np.ndarray:
    na = len(coeffs)
    out = np.zeros((na * ny, na * ny))
    for i, a in enumerate(coeffs):
        out[:ny, i * ny:(i + 1) * ny] = -a
    out[ny:, :-ny] = np.eye((na - 1) * ny)
    return out


def euler_discretize_ss(m: LpvSsModel, sample_time: float) -> LpvSsModel:
    """
    Forward-Euler discretization of a CT state-space model.

        A_d = I + Ts A,  B_d = Ts B,  C_d = C,  D_d = D  (K_d = Ts K)

    Raises:
        DomainMismatchError: If the model is already discrete-time
        ConversionError: If the scheduling dependence involves derivatives
    """
    if m.domain is not TimeDomain.CT:
        raise DomainMismatchError("CT", str(m.domain), "euler_discretize_ss")
    if not sample_time > 0:
        raise ConversionError(f"Sample time must be positive, got {sample_time}")
    ts = float(sample_time)
    A, B, C, D = (_static_dt(x) for x in (m.A, m.B, m.C, m.D))
    K = None if m.K is None else ts * _static_dt(m.K)
    return LpvSsModel(
        A=np.eye(m.nx) + ts * A,
        B=ts * B,
        C=C,
        D=D,
        K=K,
        noise_variance=m.noise_variance,
        sample_time=ts,
    )


def _static_dt(m: PVMatrix) -> PVMatrix:
    """The DT counterpart of a CT matrix that depends on the scheduling signal only, not its derivatives."""
    static = make_timemap([0], TimeDomain.DT, m.tm.names)
    if m.is_constant:
        return as_pmatrix(m.constant, tm=static)
    used = {m.tm.columns[c][1] for b in m.basis for c in _columns_of(b, m.tm.dim)}
    if any(isinstance(b, Custom) for b in m.basis) or used - {0}:
        raise ConversionError("Euler discretization needs dependence on the scheduling signal only, not its derivatives")
    index_map = np.array([static.column(n, 0) if o == 0 else -1 for n, o in m.tm.columns])
    return PVMatrix(
        coeffs=m.coeffs,
        basis=tuple(b.remap(index_map, static.dim) for b in m.basis),
        tm=static,
    )


def _columns_of(b, dim: int) -> list[int]:
    degrees = b.degrees(dim) if isinstance(b, Affine) else getattr(b, "degrees", ())
    return [c for c, d in enumerate(degrees) if d]


def companion_realization(m: LpvIoModel) -> LpvSsModel:
    """
    Shift-register state-space realization of a causal IO model.

    The state stacks the past outputs y_{t-1} .. y_{t-na} and past inputs u_{t-1} .. u_{t-nb-delay};
    every coefficient is evaluated at time t, so the realization reproduces :func:`simulate_io`.

    Raises:
        ConversionError: If a coefficient depends on future scheduling values
    """
    if m.domain is not TimeDomain.DT:
        raise DomainMismatchError("DT", str(m.domain), "companion_realization")
    if any(not x.is_constant and max(x.tm.orders) > 0 for x in m.matrices):
        raise ConversionError("Companion realization needs causal (non-positive shift) dependence")

    ny, nu = m.ny, m.nu
    n_lag = max(m.nb + m.delay, 0)
    anchor = next((x for x in m.matrices if not x.is_constant), m.matrices[0])

    def zeros(rows: int, cols: int) -> PVMatrix:
        return as_pmatrix(np.zeros((rows, cols)), like=anchor)

    b_by_lag = {j + m.delay: b for j, b in enumerate(m.B)}
    C_blocks = [-a for a in m.A] + [b_by_lag.get(k, zeros(ny, nu)) for k in range(1, n_lag + 1)]
    D = b_by_lag.get(0, zeros(ny, nu))
    nx = m.na * ny + n_lag * nu
    if nx == 0:
        return LpvSsModel(A=zeros(0, 0), B=zeros(0, nu), C=zeros(ny, 0), D=D, sample_time=m.sample_time)
    C = hconcat(*C_blocks)

    rows = []
    shift_y = np.zeros((max(m.na - 1, 0) * ny, nx))
    if m.na > 1:
        shift_y[:, : (m.na - 1) * ny] = np.eye((m.na - 1) * ny)
    shift_u = np.zeros((n_lag * nu, nx))
    if n_lag > 1:
        off = m.na * ny
        shift_u[nu:, off:off + (n_lag - 1) * nu] = np.eye((n_lag - 1) * nu)
    if m.na:
        rows.append(C)
        if m.na > 1:
            rows.append(as_pmatrix(shift_y, like=anchor))
    if n_lag:
        rows.append(as_pmatrix(shift_u, like=anchor))
    A = vconcat(*rows)

    b_rows = []
    if m.na:
        b_rows.append(D)
        if m.na > 1:
            b_rows.append(zeros((m.na - 1) * ny, nu))
    if n_lag:
        feed = np.zeros((n_lag * nu, nu))
        feed[:nu] = np.eye(nu)
        b_rows.append(as_pmatrix(feed, like=anchor))
    B = vconcat(*b_rows)
    return LpvSsModel(A=A, B=B, C=C, D=D, sample_time=m.sample_time)


def ss_to_lfr(m: LpvSsModel, logger: Optional[logging.Logger] = None) -> LpvLfrModel:
    """
    Pull the scheduling dependence of an SS model out into an LFR with Dzw = 0.

    Every non-constant term M_i alpha_i of [[A, B], [C, D]] is factored as L_i R_i by a
    rank-revealing SVD; Delta = blkdiag(alpha_i I_{r_i}).

    Raises:
        ConversionError: If a custom basis is involved
    """
    logger = logger or logging.getLogger(__name__)
    if m.K is not None:
        logger.info("Innovation gain K is dropped in the LFR conversion; only the deterministic part is kept")
    whole = vconcat(hconcat(m.A, m.B), hconcat(m.C, m.D))
    if any(isinstance(b, Custom) for b in whole.basis):
        raise ConversionError("Custom basis functions cannot be extracted into an LFR Delta block")
    nx, nu, ny = m.nx, m.nu, m.ny

    lefts, rights, ranks = [], [], []
    for coeff in whole.coeffs[1:]:
        U, s, Vt = linalg.svd(coeff, full_matrices=False)
        r = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
        lefts.append(U[:, :r] * s[:r])
        rights.append(Vt[:r])
        ranks.append(r)
    n_w = sum(ranks)
    L = np.hstack(lefts) if lefts else np.zeros((nx + ny, 0))
    R = np.vstack(rights) if rights else np.zeros((0, nx + nu))

    delta = np.zeros((len(ranks) + 1, n_w, n_w))
    offset = 0
    for i, r in enumerate(ranks, start=1):
        delta[i, offset:offset + r, offset:offset + r] = np.eye(r)
        offset += r
    kept = [i for i, r in enumerate(ranks) if r > 0]
    Delta = PVMatrix(
        coeffs=delta[[0] + [i + 1 for i in kept]],
        basis=tuple(whole.basis[i] for i in kept),
        tm=whole.tm,
    )
    G0 = whole.coeffs[0]
    return LpvLfrModel(
        Delta=Delta,
        A=G0[:nx, :nx], Bw=L[:nx], Bu=G0[:nx, nx:],
        Cz=R[:, :nx], Dzw=np.zeros((n_w, n_w)), Dzu=R[:, nx:],
        Cy=G0[nx:, :nx], Dyw=L[nx:], Dyu=G0[nx:, nx:],
        sample_time=m.sample_time,
    )


def as_lfr(m: Union[LpvLfrModel, LpvSsModel]) -> LpvLfrModel:
    if isinstance(m, LpvLfrModel):
        return m
    if isinstance(m, LpvSsModel):
        return ss_to_lfr(m)
    raise ConversionError(f"Cannot interpret {type(m).__name__} as an LFR")


def interconnect(
    kind: Union[InterconnectKind, str],
    m1: Union[LpvLfrModel, LpvSsModel],
    m2: Union[LpvLfrModel, LpvSsModel],
) -> LpvLfrModel:
    """
    Interconnect two LFR models; the result has Delta = blkdiag(Delta_1, Delta_2).

    Kinds:
        series: y = m2(m1(u))
        parallel: y = m1(u) + m2(u)
        feedback: negative feedback of m1 by m2, u_1 = u - y_2, y = y_1
        hconcat: y = m1(u_1) + m2(u_2), u = [u_1; u_2]
        vconcat: y = [m1(u); m2(u)]

    Raises:
        DimensionError: If the port dimensions do not fit the interconnection
        IllPosedError: If the static output loop is singular
        DomainMismatchError: If the models live in different time domains
    """
    kind = InterconnectKind(kind) if not isinstance(kind, InterconnectKind) else kind
    g1, g2 = as_lfr(m1), as_lfr(m2)
    if g1.domain != g2.domain:
        raise DomainMismatchError(str(g1.domain), str(g2.domain), "interconnect")
    Hu, Hy, Oy = _port_maps(kind, g1, g2)

    A = linalg.block_diag(g1.A, g2.A)
    Bw = linalg.block_diag(g1.Bw, g2.Bw)
    Bu = linalg.block_diag(g1.Bu, g2.Bu)
    Cz = linalg.block_diag(g1.Cz, g2.Cz)
    Cy = linalg.block_diag(g1.Cy, g2.Cy)
    Dzw = linalg.block_diag(g1.Dzw, g2.Dzw)
    Dzu = linalg.block_diag(g1.Dzu, g2.Dzu)
    Dyw = linalg.block_diag(g1.Dyw, g2.Dyw)
    Dyu = linalg.block_diag(g1.Dyu, g2.Dyu)

    loop = np.eye(Dyu.shape[0]) - Dyu @ Hy
    det = np.linalg.det(loop) if loop.size else 1.0
    if abs(det) < WELL_POSED_TOL:
        raise IllPosedError(None, det)
    Q = np.linalg.inv(loop) if loop.size else loop

    Yx, Yw, Yu = Q @ Cy, Q @ Dyw, Q @ Dyu @ Hu
    Ux, Uw, Uu = Hy @ Yx, Hy @ Yw, Hu + Hy @ Yu

    return LpvLfrModel(
        Delta=blkdiag(g1.Delta, g2.Delta),
        A=A + Bu @ Ux,
        Bw=Bw + Bu @ Uw,
        Bu=Bu @ Uu,
        Cz=Cz + Dzu @ Ux,
        Dzw=Dzw + Dzu @ Uw,
        Dzu=Dzu @ Uu,
        Cy=Oy @ Yx,
        Dyw=Oy @ Yw,
        Dyu=Oy @ Yu,
        sample_time=g1.sample_time,
    )


def _port_maps(kind: InterconnectKind, g1: LpvLfrModel, g2: LpvLfrModel):
    """Static maps u_app = Hu u + Hy y_app and y = Oy y_app of the appended system."""
    nu1, nu2, ny1, ny2 = g1.nu, g2.nu, g1.ny, g2.ny

    def need(ok: bool, what: str):
        if not ok:
            raise DimensionError(f"{kind} interconnection needs {what} ({nu1}->{ny1}, {nu2}->{ny2})")

    Hy = np.zeros((nu1 + nu2, ny1 + ny2))
    if kind is InterconnectKind.SERIES:
        need(ny1 == nu2, "outputs of the first system to match inputs of the second")
        Hu = np.vstack([np.eye(nu1), np.zeros((nu2, nu1))])
        Hy[nu1:, :ny1] = np.eye(ny1)
        Oy = np.hstack([np.zeros((ny2, ny1)), np.eye(ny2)])
    elif kind is InterconnectKind.PARALLEL:
        need(nu1 == nu2 and ny1 == ny2, "equal port sizes")
        Hu = np.vstack([np.eye(nu1), np.eye(nu2)])
        Oy = np.hstack([np.eye(ny1), np.eye(ny2)])
    elif kind is InterconnectKind.FEEDBACK:
        need(ny1 == nu2 and ny2 == nu1, "compatible loop ports")
        Hu = np.vstack([np.eye(nu1), np.zeros((nu2, nu1))])
        Hy[:nu1, ny1:] = -np.eye(ny2)
        Hy[nu1:, :ny1] = np.eye(ny1)
        Oy = np.hstack([np.eye(ny1), np.zeros((ny1, ny2))])
    elif kind is InterconnectKind.HCONCAT:
        need(ny1 == ny2, "equal output sizes")
        Hu = np.eye(nu1 + nu2)
        Oy = np.hstack([np.eye(ny1), np.eye(ny2)])
    else:
        need(nu1 == nu2, "equal input sizes")
        Hu = np.vstack([np.eye(nu1), np.eye(nu2)])
        Oy = np.eye(ny1 + ny2)
    return Hu, Hy, Oy
