"""Fixed-step simulation engine over the coupled converter loop.

One flat state vector carries the plant, the observer extension, the
estimator and both control integrators, integrated together by classical
RK4 with the inputs re-evaluated inside every stage from the stage state.
Scheduled parameter changes (grid events, reference steps) are applied
exactly at step boundaries, between steps, by mutating the packed parameter
array; the state itself is never touched by an event.

State vector layout (X_SIZE = 40):

    [0:6]    plant (i_g_dq, v_dq, i_dq)
    [6]      delta, unwrapped frame angle error
    [7:25]   observer extension and filters (see observer.py)
    [25:28]  theta_hat
    [28:37]  F, row major
    [37]     synchronizing-loop integrator
    [38:40]  current-loop integrator

Parameter array layout (P_SIZE = 28): plant truth first, then the
observer's own parameter copies, gains, references and input-mode fields.
The observer copies are distinct slots so a plant-side impedance event
leaves the observer stale on purpose.

The controller and observer computations read only measured plant outputs
(y), the commanded u1 and their own states; delta, v_g and omega enter the
plant derivative alone.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .control import current_control, detector_error, pll_u1
from .estimator import covariance_post_step, estimator_deriv
from .frames import dq_transform, inverse_dq
from .observer import build_w, observer_deriv, observer_init, regressor
from .plant import plant_deriv_abc, plant_deriv_dq
from .equilibrium import solve_references
from .scenarios import ScenarioConfig

__all__ = [
    "X_SIZE",
    "P_SIZE",
    "REC_COLUMNS",
    "REC_INDEX",
    "SimResult",
    "integrate",
    "run_scenario",
    "integrate_abc",
    "rhs",
    "rk4_step",
]

X_SIZE = 40
X_Y = 0
X_DELTA = 6
X_OBS = 7
X_THETA = 25
X_F = 28
X_PLL_XC = 37
X_CTRL_XC = 38

P_SIZE = 28
P_RG = 0
P_LG = 1
P_C = 2
P_R = 3
P_L = 4
P_VG = 5
P_OMEGA = 6
P_RG_OBS = 7
P_LG_OBS = 8
P_LAM = 9
P_KP_PLL = 10
P_KI_PLL = 11
P_KP_CUR = 12
P_KI_CUR = 13
P_ALPHA = 14
P_BETA = 15
P_MCAP = 16
P_PHI_REF = 17
P_IREF_D = 18
P_IREF_Q = 19
P_DETECTOR = 20
P_XMIN = 21
P_INPUT_MODE = 22
P_U1_BAR = 23
P_U2_BAR = 24
P_U3_BAR = 25
P_PROBE_AMP = 26
P_PROBE_FREQ = 27

# parameter paths addressable by scenario events (plant truth only)
EVENT_PARAMS = {"r_g": P_RG, "l_g": P_LG, "v_g": P_VG, "omega": P_OMEGA}

# detector codes: bit 0 selects srf over atan, bit 1 selects the measured
# capacitor voltage (baseline) over the reconstructed grid voltage
DET_ADAPTIVE_ATAN = 0
DET_ADAPTIVE_SRF = 1
DET_BASELINE_ATAN = 2
DET_BASELINE_SRF = 3

INPUT_CLOSED_LOOP = 0
INPUT_HOLD = 1
INPUT_PROBE = 2

REC_COLUMNS = [
    "t",
    "i_g_d", "i_g_q", "v_d", "v_q", "i_d", "i_q",
    "delta",
    "u1", "u2", "u3",
    "e_detector",
    "xhat_1", "xhat_2",
    "theta1", "theta2", "theta3",
    "normF",
    "Vg_hat",
    "Y1", "Y2",
    "om11", "om21", "om12", "om22", "om13", "om23",
    "w11", "w21", "w12", "w22", "w13", "w23",
    "xc_pll", "xc_d", "xc_q",
]
REC_INDEX = {name: k for k, name in enumerate(REC_COLUMNS)}
REC_WIDTH = len(REC_COLUMNS)

DIVERGE_LIMIT = 1.0e9


@njit(cache=True)
def _controls(x, t, p):
    """Inputs and detector signals from one (state, time) pair."""
    theta = x[X_THETA:X_THETA + 3]
    w = build_w(x[X_OBS:X_OBS + 18], x[0:6])
    xh0 = w[0, 0] * theta[0] + w[0, 1] * theta[1] + w[0, 2] * theta[2]
    xh1 = w[1, 0] * theta[0] + w[1, 1] * theta[1] + w[1, 2] * theta[2]
    det = int(p[P_DETECTOR])
    if det >= 2:
        vd = x[2]
        vq = x[3]
    else:
        vd = xh0
        vq = xh1
    use_atan = det == DET_ADAPTIVE_ATAN or det == DET_BASELINE_ATAN
    e = detector_error(vd, vq, p[P_PHI_REF], use_atan, p[P_XMIN])
    mode = int(p[P_INPUT_MODE])
    if mode == INPUT_CLOSED_LOOP:
        u1 = pll_u1(e, x[X_PLL_XC], p[P_KP_PLL], p[P_KI_PLL])
        u2, u3 = current_control(
            x[0:6], u1, x[X_CTRL_XC], x[X_CTRL_XC + 1],
            p[P_IREF_D], p[P_IREF_Q], p[P_KP_CUR], p[P_KI_CUR], p[P_L],
        )
    elif mode == INPUT_HOLD:
        u1 = p[P_U1_BAR]
        u2 = p[P_U2_BAR]
        u3 = p[P_U3_BAR]
    else:
        u1 = p[P_U1_BAR]
        u2 = p[P_U2_BAR] + p[P_PROBE_AMP] * math.sin(p[P_PROBE_FREQ] * t)
        u3 = p[P_U3_BAR] + p[P_PROBE_AMP] * math.cos(p[P_PROBE_FREQ] * t)
    return u1, u2, u3, e, xh0, xh1


@njit(cache=True)
def rhs(x, t, p):
    """Time derivative of the full coupled state."""
    dx = np.empty(X_SIZE)
    u1, u2, u3, e, xh0, xh1 = _controls(x, t, p)
    u23 = np.empty(2)
    u23[0] = u2
    u23[1] = u3
    dy, ddelta = plant_deriv_dq(
        x[0:6], x[X_DELTA], u1, u23,
        p[P_RG], p[P_LG], p[P_C], p[P_R], p[P_L], p[P_VG], p[P_OMEGA],
    )
    for k in range(6):
        dx[k] = dy[k]
    dx[X_DELTA] = ddelta
    dobs = observer_deriv(x[X_OBS:X_OBS + 18], x[0:6], u1,
                          p[P_RG_OBS], p[P_LG_OBS], p[P_LAM])
    for k in range(18):
        dx[X_OBS + k] = dobs[k]
    yv, om = regressor(x[X_OBS:X_OBS + 18], x[0:6], p[P_LAM])
    f = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            f[i, j] = x[X_F + 3 * i + j]
    dtheta, df = estimator_deriv(x[X_THETA:X_THETA + 3], f, yv, om,
                                 p[P_ALPHA], p[P_BETA], p[P_MCAP])
    for i in range(3):
        dx[X_THETA + i] = dtheta[i]
        for j in range(3):
            dx[X_F + 3 * i + j] = df[i, j]
    dx[X_PLL_XC] = e
    dx[X_CTRL_XC] = x[4] - p[P_IREF_D]
    dx[X_CTRL_XC + 1] = x[5] - p[P_IREF_Q]
    return dx


@njit(cache=True)
def rk4_step(x, t, dt, p):
    """One classical RK4 step plus the covariance post-step projection."""
    k1 = rhs(x, t, p)
    k2 = rhs(x + (0.5 * dt) * k1, t + 0.5 * dt, p)
    k3 = rhs(x + (0.5 * dt) * k2, t + 0.5 * dt, p)
    k4 = rhs(x + dt * k3, t + dt, p)
    xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    f = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            f[i, j] = xn[X_F + 3 * i + j]
    f = covariance_post_step(f, p[P_MCAP])
    for i in range(3):
        for j in range(3):
            xn[X_F + 3 * i + j] = f[i, j]
    # the transition block stays a scaled rotation under RK4; renormalizing
    # its scale each step pins the orthogonality defect at rounding level
    # instead of letting the O(dt^5) per-step drift accumulate
    p11 = xn[X_OBS + 4]
    p21 = xn[X_OBS + 5]
    p12 = xn[X_OBS + 6]
    p22 = xn[X_OBS + 7]
    rho = np.sqrt(0.5 * (p11 * p11 + p21 * p21 + p12 * p12 + p22 * p22))
    if rho > 0.0:
        inv = 1.0 / rho
        xn[X_OBS + 4] = p11 * inv
        xn[X_OBS + 5] = p21 * inv
        xn[X_OBS + 6] = p12 * inv
        xn[X_OBS + 7] = p22 * inv
    return xn


@njit(cache=True)
def _fill_record(row, x, t, p):
    u1, u2, u3, e, xh0, xh1 = _controls(x, t, p)
    row[0] = t
    for k in range(6):
        row[1 + k] = x[k]
    row[7] = x[X_DELTA]
    row[8] = u1
    row[9] = u2
    row[10] = u3
    row[11] = e
    row[12] = xh0
    row[13] = xh1
    row[14] = x[X_THETA]
    row[15] = x[X_THETA + 1]
    row[16] = x[X_THETA + 2]
    fro2 = 0.0
    for k in range(9):
        fro2 += x[X_F + k] * x[X_F + k]
    row[17] = math.sqrt(fro2)
    row[18] = p[P_LG_OBS] * math.hypot(xh0, xh1)
    yv, om = regressor(x[X_OBS:X_OBS + 18], x[0:6], p[P_LAM])
    row[19] = yv[0]
    row[20] = yv[1]
    row[21] = om[0, 0]
    row[22] = om[1, 0]
    row[23] = om[0, 1]
    row[24] = om[1, 1]
    row[25] = om[0, 2]
    row[26] = om[1, 2]
    w = build_w(x[X_OBS:X_OBS + 18], x[0:6])
    row[27] = w[0, 0]
    row[28] = w[1, 0]
    row[29] = w[0, 1]
    row[30] = w[1, 1]
    row[31] = w[0, 2]
    row[32] = w[1, 2]
    row[33] = x[X_PLL_XC]
    row[34] = x[X_CTRL_XC]
    row[35] = x[X_CTRL_XC + 1]


@njit(cache=True)
def _state_ok(x):
    for k in range(X_SIZE):
        if not math.isfinite(x[k]):
            return False
    for k in range(6):
        if abs(x[k]) > DIVERGE_LIMIT:
            return False
    return True


@njit(cache=True)
def run_loop(x, t0, dt, n_steps, p,
             ev_steps, ev_idx, ev_val, ev_scale,
             rec, rec_steps):
    """Integrate n_steps from t0, applying events and recording rows.

    Events (sorted by step) mutate p exactly at their step boundary, before
    the row for that step is recorded.  Returns the final state and the
    step index at which divergence was detected (-1 when none); recording
    stops there and later rows keep their prefilled NaNs.
    """
    ei = 0
    ri = 0
    n_ev = ev_steps.shape[0]
    n_rec = rec_steps.shape[0]
    for s in range(n_steps + 1):
        t = t0 + s * dt
        while ei < n_ev and ev_steps[ei] == s:
            k = ev_idx[ei]
            if ev_scale[ei] == 1:
                p[k] = p[k] * ev_val[ei]
            else:
                p[k] = ev_val[ei]
            ei += 1
        if ri < n_rec and rec_steps[ri] == s:
            _fill_record(rec[ri], x, t, p)
            ri += 1
        if s == n_steps:
            break
        x = rk4_step(x, t, dt, p)
        if not _state_ok(x):
            return x, s + 1
    return x, -1


@dataclass
class SimResult:
    """Time series and bookkeeping from one integration."""

    config: ScenarioConfig
    dt: float
    t_end: float
    n_steps: int
    rec_steps: np.ndarray
    rec: np.ndarray
    x0: np.ndarray
    p0: np.ndarray
    x_final: np.ndarray
    p_final: np.ndarray
    refs: list = field(default_factory=list)
    diverged_step: int = -1

    @property
    def t(self):
        return self.rec[:, 0]

    @property
    def diverged(self):
        return self.diverged_step >= 0

    @property
    def divergence_time(self):
        if self.diverged_step < 0:
            return None
        return self.diverged_step * self.dt

    def column(self, name):
        return self.rec[:, REC_INDEX[name]]

    def active_refs(self, t):
        """Reference solution in force at time t (last schedule entry <= t)."""
        out = None
        for tk, ref in self.refs:
            if tk <= t:
                out = ref
        return out


def _resolve_observer(config):
    obs = config.observer
    if obs is not None:
        return obs
    from .observer import ObserverParams

    return ObserverParams(r_g=config.params.r_g, l_g=config.params.l_g)


def _pack_params(config, refs0):
    params = config.params
    gains = config.gains
    est = config.estimator
    obs = _resolve_observer(config)
    p = np.zeros(P_SIZE)
    p[P_RG] = params.r_g
    p[P_LG] = params.l_g
    p[P_C] = params.c
    p[P_R] = params.r
    p[P_L] = params.l
    p[P_VG] = params.v_g
    p[P_OMEGA] = params.omega
    p[P_RG_OBS] = obs.r_g
    p[P_LG_OBS] = obs.l_g
    p[P_LAM] = obs.lam
    p[P_KP_PLL] = gains.kp_pll
    p[P_KI_PLL] = gains.ki_pll
    p[P_KP_CUR] = gains.kp_cur
    p[P_KI_CUR] = gains.ki_cur
    p[P_ALPHA] = est.alpha
    p[P_BETA] = est.beta
    p[P_MCAP] = est.m_cap
    if refs0 is not None:
        p[P_PHI_REF] = 0.0 if config.baseline else refs0.delta_bar
        p[P_IREF_D] = refs0.y56[0]
        p[P_IREF_Q] = refs0.y56[1]
    det = {"atan": 0, "srf": 1}[config.detector]
    if config.baseline:
        det += 2
    p[P_DETECTOR] = det
    if config.x_min is not None:
        p[P_XMIN] = config.x_min
    else:
        p[P_XMIN] = max(1.0e-6 * params.v_g / params.l_g, 1.0e-9)
    mode = {"closed_loop": INPUT_CLOSED_LOOP,
            "hold": INPUT_HOLD,
            "probe": INPUT_PROBE}[config.input_mode]
    p[P_INPUT_MODE] = mode
    if mode != INPUT_CLOSED_LOOP:
        u1_bar = config.hold_u1 if config.hold_u1 is not None else params.omega
        if config.hold_u23 is not None:
            u23_bar = np.asarray(config.hold_u23, dtype=float)
        elif refs0 is not None:
            u23_bar = refs0.u23
        else:
            u23_bar = np.zeros(2)
        p[P_U1_BAR] = u1_bar
        p[P_U2_BAR] = u23_bar[0]
        p[P_U3_BAR] = u23_bar[1]
        p[P_PROBE_AMP] = config.probe_amp
        p[P_PROBE_FREQ] = 2.0 * math.pi * config.probe_freq_hz
    return p


def _initial_state(config, refs0, overrides):
    params = config.params
    x = np.zeros(X_SIZE)

    if config.init == "flat" or refs0 is None:
        y0 = np.zeros(6)
        delta0 = 0.0
    else:
        y0 = np.concatenate([refs0.y12, refs0.y34, refs0.y56])
        delta0 = refs0.delta_bar
    if "y0" in overrides:
        y0 = np.asarray(overrides["y0"], dtype=float).copy()
    if "y0_scale" in overrides:
        y0 = y0 * np.asarray(overrides["y0_scale"], dtype=float)
    if "delta0" in overrides:
        delta0 = float(overrides["delta0"])
    if "delta0_offset" in overrides:
        delta0 = delta0 + float(overrides["delta0_offset"])
    x[0:6] = y0
    x[X_DELTA] = delta0

    if "theta0" in overrides:
        theta0 = np.asarray(overrides["theta0"], dtype=float).copy()
    elif config.init == "equilibrium_truth":
        # theta consistent with the initial plant state and zero z
        xv_d = (params.v_g / params.l_g) * math.cos(delta0)
        xv_q = (params.v_g / params.l_g) * math.sin(delta0)
        theta0 = np.array([
            params.omega,
            xv_d + params.omega * y0[1],
            xv_q - params.omega * y0[0],
        ])
    else:
        theta0 = np.array([params.omega, 0.0, 0.0])
    if "theta0_offset" in overrides:
        theta0 = theta0 + np.asarray(overrides["theta0_offset"], dtype=float)
    x[X_THETA:X_THETA + 3] = theta0

    obs_params = _resolve_observer(config)
    consistent = bool(overrides.get("consistent_filters", False))
    z0 = overrides.get("z0")
    x[X_OBS:X_OBS + 18] = observer_init(
        y0, theta0[0], obs_params, z0=z0, consistent_filters=consistent
    )

    f0 = config.estimator.f0
    for i in range(3):
        x[X_F + 4 * i] = 1.0 / f0

    ki_pll = config.gains.ki_pll
    if "pll_xc" in overrides:
        x[X_PLL_XC] = float(overrides["pll_xc"])
    elif ki_pll > 0.0:
        u1_0 = params.omega if config.baseline else theta0[0]
        x[X_PLL_XC] = -u1_0 / ki_pll

    ki_cur = config.gains.ki_cur
    if "ctrl_xc" in overrides:
        x[X_CTRL_XC:X_CTRL_XC + 2] = np.asarray(overrides["ctrl_xc"], dtype=float)
    elif refs0 is not None and ki_cur > 0.0:
        x[X_CTRL_XC:X_CTRL_XC + 2] = -(params.r / ki_cur) * refs0.y56
    return x


def _event_arrays(config, refs, dt, n_steps):
    """Packed (step, param-index, value, is_scale) arrays, sorted by step."""
    items = []
    for ev in config.events:
        idx = EVENT_PARAMS[ev["param"]]
        step = int(round(ev["time"] / dt))
        if step > n_steps:
            continue
        if "scale" in ev:
            items.append((step, idx, float(ev["scale"]), 1))
        else:
            items.append((step, idx, float(ev["value"]), 0))
    for tk, ref in refs[1:]:
        step = int(round(tk / dt))
        if step > n_steps:
            continue
        if not config.baseline:
            items.append((step, P_PHI_REF, float(ref.delta_bar), 0))
        items.append((step, P_IREF_D, float(ref.y56[0]), 0))
        items.append((step, P_IREF_Q, float(ref.y56[1]), 0))
    items.sort(key=lambda it: it[0])
    ev_steps = np.array([it[0] for it in items], dtype=np.int64)
    ev_idx = np.array([it[1] for it in items], dtype=np.int64)
    ev_val = np.array([it[2] for it in items], dtype=np.float64)
    ev_scale = np.array([it[3] for it in items], dtype=np.int64)
    return ev_steps, ev_idx, ev_val, ev_scale


def integrate(config: ScenarioConfig, dt=None, t_end=None,
              record_stride=None, init_overrides=None):
    """Run one scenario and return its SimResult.

    dt, t_end and record_stride override the scenario's own values;
    init_overrides are merged over the scenario's init_overrides.
    """
    config.validate()
    if dt is not None or t_end is not None:
        config = replace(
            config,
            dt=float(dt) if dt is not None else config.dt,
            t_end=float(t_end) if t_end is not None else config.t_end,
        )
        config.validate()
    dt = config.dt
    t_end = config.t_end
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end must cover at least one step")

    refs = [
        (float(tk), solve_references(power, config.params))
        for tk, power in config.power_schedule
        if float(tk) < t_end
    ]
    refs0 = refs[0][1] if refs else None

    p = _pack_params(config, refs0)
    overrides = dict(config.init_overrides)
    if init_overrides:
        overrides.update(init_overrides)
    x0 = _initial_state(config, refs0, overrides)

    ev_steps, ev_idx, ev_val, ev_scale = _event_arrays(config, refs, dt, n_steps)

    if record_stride is None:
        record_stride = config.record_stride
    if record_stride is None:
        record_stride = max(1, int(round(1.0e-4 / dt)))
    rec_steps = np.arange(0, n_steps + 1, record_stride, dtype=np.int64)
    if rec_steps[-1] != n_steps:
        rec_steps = np.append(rec_steps, np.int64(n_steps))
    rec = np.full((rec_steps.shape[0], REC_WIDTH), np.nan)

    p_run = p.copy()
    x_final, diverged_step = run_loop(
        x0.copy(), 0.0, dt, n_steps, p_run,
        ev_steps, ev_idx, ev_val, ev_scale, rec, rec_steps,
    )
    rec[:, 0] = rec_steps * dt

    return SimResult(
        config=config,
        dt=dt,
        t_end=t_end,
        n_steps=n_steps,
        rec_steps=rec_steps,
        rec=rec,
        x0=x0,
        p0=p,
        x_final=x_final,
        p_final=p_run,
        refs=refs,
        diverged_step=int(diverged_step),
    )


def run_scenario(name, dt=None, t_end=None, record_stride=None,
                 init_overrides=None, **field_overrides):
    """Build a preset scenario, apply field overrides, and integrate it."""
    from .scenarios import load_scenario

    config = load_scenario(name)
    if field_overrides:
        config = replace(config, **field_overrides)
    return integrate(config, dt=dt, t_end=t_end, record_stride=record_stride,
                     init_overrides=init_overrides)


# stationary-frame cross-check ------------------------------------------------

@njit(cache=True)
def _abc_rhs(xa, t, pa):
    alpha = pa[13] + pa[8] * t
    u2 = pa[9] + pa[11] * math.sin(pa[12] * t)
    u3 = pa[10] + pa[11] * math.cos(pa[12] * t)
    u_dq = np.empty(2)
    u_dq[0] = u2
    u_dq[1] = u3
    m = inverse_dq(u_dq, alpha) / pa[7]
    di_g, dv, di = plant_deriv_abc(
        xa[0:3], xa[3:6], xa[6:9], m, t,
        pa[0], pa[1], pa[2], pa[3], pa[4], pa[5], pa[6], pa[7],
    )
    dxa = np.empty(9)
    for k in range(3):
        dxa[k] = di_g[k]
        dxa[3 + k] = dv[k]
        dxa[6 + k] = di[k]
    return dxa


@njit(cache=True)
def _abc_loop(xa, dt, n_steps, pa, rec, stride):
    ri = 0
    for s in range(n_steps + 1):
        t = s * dt
        if s % stride == 0 or s == n_steps:
            alpha = pa[13] + pa[8] * t
            rec[ri, 0] = t
            d1 = dq_transform(xa[0:3], alpha)
            d2 = dq_transform(xa[3:6], alpha)
            d3 = dq_transform(xa[6:9], alpha)
            rec[ri, 1] = d1[0]
            rec[ri, 2] = d1[1]
            rec[ri, 3] = d2[0]
            rec[ri, 4] = d2[1]
            rec[ri, 5] = d3[0]
            rec[ri, 6] = d3[1]
            ri += 1
        if s == n_steps:
            break
        k1 = _abc_rhs(xa, t, pa)
        k2 = _abc_rhs(xa + (0.5 * dt) * k1, t + 0.5 * dt, pa)
        k3 = _abc_rhs(xa + (0.5 * dt) * k2, t + 0.5 * dt, pa)
        k4 = _abc_rhs(xa + dt * k3, t + dt, pa)
        xa = xa + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return xa


def integrate_abc(params, y_dq0, delta0, u1_bar, u23_bar, dt, n_steps,
                  probe_amp=0.0, probe_freq_hz=0.0, record_stride=1):
    """Integrate the stationary-frame plant under prescribed inputs.

    The initial dq state and frame angle define the abc initial condition
    through the inverse transform at alpha0 = delta0 - pi/2; the returned
    record holds the dq projections (t, i_g_dq, v_dq, i_dq) at the
    prescribed frame angle alpha(t) = alpha0 + u1_bar * t, directly
    comparable with a rotating-frame run in hold or probe mode.
    """
    y_dq0 = np.asarray(y_dq0, dtype=float)
    u23_bar = np.asarray(u23_bar, dtype=float)
    alpha0 = delta0 - 0.5 * math.pi
    xa = np.empty(9)
    xa[0:3] = inverse_dq(y_dq0[0:2].copy(), alpha0)
    xa[3:6] = inverse_dq(y_dq0[2:4].copy(), alpha0)
    xa[6:9] = inverse_dq(y_dq0[4:6].copy(), alpha0)
    pa = np.array([
        params.r_g, params.l_g, params.c, params.r, params.l,
        params.v_g, params.omega, params.v_dc,
        u1_bar, u23_bar[0], u23_bar[1],
        probe_amp, 2.0 * math.pi * probe_freq_hz, alpha0,
    ])
    n_rows = n_steps // record_stride + 1
    if n_steps % record_stride != 0:
        n_rows += 1
    rec = np.full((n_rows, 7), np.nan)
    xa_final = _abc_loop(xa, dt, n_steps, pa, rec, record_stride)
    return rec, xa_final
