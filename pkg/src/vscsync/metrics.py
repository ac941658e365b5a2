"""Run metrics: settling, convergence and identifiability diagnostics.

This layer is the one place allowed to combine recorded plant truth
(delta, plus the grid parameters reconstructed from the event schedule)
with the observer and estimator outputs.  All results are JSON-safe flat
key-value pairs plus a `converged` boolean and a nullable
`divergence_time_s`, written next to the series CSV.

Settling times follow the classical definition: the reported time is the
first entry into the given band around the target after which the signal
never leaves it again within the evaluation window; None means the signal
was still outside the band at the window's end; 0.0 means it never left.
"""

import math

import numpy as np

from .equilibrium import POWER_SCALE

__all__ = [
    "compute_metrics",
    "pe_min_eig_series",
    "theta_true_segments",
    "rated_current",
]

_GRID_PARAMS = ("r_g", "l_g", "v_g", "omega")


def rated_current(params):
    """dq current magnitude corresponding to the rated power label."""
    return POWER_SCALE * params.rated_power / (math.sqrt(1.5) * params.v_g)


def _event_times(config):
    return sorted(float(ev["time"]) for ev in config.events)


def grid_param_history(result):
    """Per-row arrays of the plant-truth grid parameters (r_g, l_g, v_g, omega).

    Events apply at their step boundary, so the row at an event's own step
    already sees the new value, matching the engine's ordering.
    """
    config = result.config
    n = result.rec.shape[0]
    vals = {
        "r_g": config.params.r_g,
        "l_g": config.params.l_g,
        "v_g": config.params.v_g,
        "omega": config.params.omega,
    }
    out = {k: np.full(n, v) for k, v in vals.items()}
    events = sorted(config.events, key=lambda ev: float(ev["time"]))
    row_steps = result.rec_steps
    for ev in events:
        step = int(round(float(ev["time"]) / result.dt))
        if "scale" in ev:
            vals[ev["param"]] = vals[ev["param"]] * float(ev["scale"])
        else:
            vals[ev["param"]] = float(ev["value"])
        mask = row_steps >= step
        out[ev["param"]][mask] = vals[ev["param"]]
    return out


def _x_true(result, hist):
    delta = result.column("delta")
    scale = hist["v_g"] / hist["l_g"]
    return np.column_stack([scale * np.cos(delta), scale * np.sin(delta)])


def _w_rows(result):
    cols = ["w11", "w21", "w12", "w22", "w13", "w23"]
    w = np.stack([result.column(c) for c in cols], axis=1)
    # (n, 2, 3) with column-major source layout
    return w.reshape(-1, 3, 2).transpose(0, 2, 1)


def _omega_rows(result):
    cols = ["om11", "om21", "om12", "om22", "om13", "om23"]
    om = np.stack([result.column(c) for c in cols], axis=1)
    return om.reshape(-1, 3, 2).transpose(0, 2, 1)


def theta_true_segments(result):
    """Per-row true parameter vector, recomputed after each grid event.

    Within a segment of constant grid parameters the reconstruction
    identity x = W theta holds for a constant theta; its rotating part is
    anchored at the segment's first recorded row using the plant truth.
    Returns an (n, 3) array.
    """
    hist = grid_param_history(result)
    x = _x_true(result, hist)
    w = _w_rows(result)
    n = result.rec.shape[0]
    event_steps = sorted(
        {int(round(float(ev["time"]) / result.dt)) for ev in result.config.events}
    )
    starts = [0] + [
        int(np.searchsorted(result.rec_steps, s)) for s in event_steps
    ]
    starts = sorted(set(min(s, n - 1) for s in starts))
    theta = np.full((n, 3), np.nan)
    bounds = starts + [n]
    for a, b in zip(bounds[:-1], bounds[1:]):
        if a >= n:
            break
        omega = hist["omega"][a]
        wk = w[a]
        if not np.all(np.isfinite(wk)):
            continue
        s_vec = -wk[:, 0]
        phi = wk[:, 1:3]
        eta = x[a] + omega * s_vec
        e_seg = np.linalg.solve(phi, eta)
        theta[a:b, 0] = omega
        theta[a:b, 1] = e_seg[0]
        theta[a:b, 2] = e_seg[1]
    return theta


def identity_residual(result):
    """Relative reconstruction error |x - W theta_true| / |x| per row."""
    hist = grid_param_history(result)
    x = _x_true(result, hist)
    w = _w_rows(result)
    theta = theta_true_segments(result)
    xhat = np.einsum("nij,nj->ni", w, theta)
    num = np.hypot(*(x - xhat).T)
    den = np.hypot(*x.T)
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den


def lre_residual_ratio(result):
    """|Y - Omega theta_true| / |Y| per row."""
    om = _omega_rows(result)
    theta = theta_true_segments(result)
    yv = np.stack([result.column("Y1"), result.column("Y2")], axis=1)
    pred = np.einsum("nij,nj->ni", om, theta)
    num = np.hypot(*(yv - pred).T)
    den = np.hypot(*yv.T)
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den


def phi_orthogonality_error(result):
    """Max-norm deviation of Phi' Phi from the identity, per row."""
    w = _w_rows(result)
    phi = w[:, :, 1:3]
    gram = np.einsum("nij,nik->njk", phi, phi)
    gram[:, 0, 0] -= 1.0
    gram[:, 1, 1] -= 1.0
    return np.max(np.abs(gram), axis=(1, 2))


def pe_min_eig_series(result, window=0.1):
    """Rolling-window excitation level: min eigenvalue of the regressor
    Gramian integrated over the trailing `window` seconds (trapezoid over
    recorded rows).  NaN until one full window has elapsed or where the
    series itself is NaN."""
    t = result.t
    om = _omega_rows(result)
    n = t.shape[0]
    out = np.full(n, np.nan)
    m = np.einsum("nij,nik->njk", om, om)
    good = np.all(np.isfinite(om.reshape(n, -1)), axis=1)
    n_ok = int(np.argmax(~good)) if (~good).any() else n
    if n_ok < 2:
        return out
    dt_rows = np.diff(t[:n_ok])
    seg = 0.5 * dt_rows[:, None, None] * (m[: n_ok - 1] + m[1:n_ok])
    prefix = np.zeros((n_ok, 3, 3))
    np.cumsum(seg, axis=0, out=prefix[1:])
    t0 = t[0]
    j_idx = np.searchsorted(t[:n_ok], t[:n_ok] - window, side="left")
    valid = (t[:n_ok] - t0) >= window - 1e-12
    rows = np.nonzero(valid)[0]
    if rows.size == 0:
        return out
    grams = prefix[rows] - prefix[j_idx[rows]]
    eigs = np.linalg.eigvalsh(grams)
    out[rows] = eigs[:, 0]
    return out


def _settle_time(t, err, band, t_from, t_to):
    # half-open window [t_from, t_to) so a target switch at t_to is not
    # charged against the preceding interval
    sel = (t >= t_from - 1e-12) & (t < t_to - 1e-12)
    ts = t[sel]
    es = np.abs(err[sel])
    if ts.size == 0:
        return None
    if np.any(~np.isfinite(es)):
        return None
    outside = es > band
    if not np.any(outside):
        return 0.0
    last = int(np.nonzero(outside)[0][-1])
    if last == ts.size - 1:
        return None
    return float(ts[last + 1] - t_from)


def _overshoot(sig, final, start_value):
    direction = np.sign(final - start_value)
    if direction == 0.0:
        return 0.0
    exc = (sig - final) * direction
    return float(max(0.0, np.nanmax(exc)))


def _wrap_array(angles):
    """Vectorized wrap onto [-pi, pi)."""
    return (angles + np.pi) % (2.0 * np.pi) - np.pi


def compute_metrics(result, tail_window=0.1, delta_band_deg=1.0,
                    current_band_frac=0.01, freq_band_hz=0.05,
                    vg_band_frac=0.01, identity_t_from=0.5):
    """Flat metrics dictionary for one run."""
    config = result.config
    t = result.t
    n = t.shape[0]
    out = {}

    out["t_end_s"] = float(result.t_end)
    out["dt_s"] = float(result.dt)
    out["divergence_time_s"] = (
        None if not result.diverged else float(result.divergence_time)
    )

    finite = np.isfinite(result.column("i_g_d"))
    n_ok = int(np.argmax(~finite)) if (~finite).any() else n
    has_data = n_ok >= 2

    hist = grid_param_history(result)
    i_rated = rated_current(config.params)
    out["rated_current_a"] = float(i_rated)

    delta = result.column("delta")
    i_d = result.column("i_d")
    i_q = result.column("i_q")
    omega_hat_hz = result.column("theta1") / (2.0 * math.pi)
    vg_hat = result.column("Vg_hat")

    # trajectory targets from the reference schedule
    have_refs = bool(result.refs)
    if have_refs:
        ref_times = np.array([tk for tk, _ in result.refs])
        ref_idx = np.searchsorted(ref_times, t, side="right") - 1
        ref_idx = np.clip(ref_idx, 0, len(result.refs) - 1)
        delta_tgt = np.array([result.refs[k][1].delta_bar for k in ref_idx])
        iref_d = np.array([result.refs[k][1].y56[0] for k in ref_idx])
        iref_q = np.array([result.refs[k][1].y56[1] for k in ref_idx])
        delta_err_deg = np.degrees(_wrap_array(delta - delta_tgt))
        cur_err = np.hypot(i_d - iref_d, i_q - iref_q)
    else:
        delta_tgt = None
        delta_err_deg = None
        cur_err = None

    omega_true_hz = hist["omega"] / (2.0 * math.pi)
    freq_err_hz = omega_hat_hz - omega_true_hz
    vg_err = vg_hat - hist["v_g"]

    # final values and steady-state errors
    if has_data:
        last = n_ok - 1
        out["delta_final_deg"] = float(np.degrees(delta[last]))
        out["omega_hat_final_hz"] = float(omega_hat_hz[last])
        out["vg_hat_final_v"] = float(vg_hat[last])
        out["omega_hat_steady_error_hz"] = float(freq_err_hz[last])
        out["vg_hat_steady_error_v"] = float(vg_err[last])
        if have_refs:
            out["delta_target_final_deg"] = float(np.degrees(delta_tgt[last]))
            out["delta_steady_error_deg"] = float(delta_err_deg[last])
            out["i_d_steady_error_a"] = float(i_d[last] - iref_d[last])
            out["i_q_steady_error_a"] = float(i_q[last] - iref_q[last])
            out["current_error_final_frac"] = float(cur_err[last] / i_rated)
    else:
        last = 0

    # generic settling into a band around the final value (whole run)
    if has_data:
        def generic(signal, band, key, unit_scale=1.0):
            sig = signal[:n_ok]
            final = sig[-1]
            st = _settle_time(t[:n_ok], sig - final, band, t[0], np.inf)
            out[f"{key}_settling_s"] = st
            out[f"{key}_overshoot"] = _overshoot(sig, final, sig[0]) * unit_scale

        generic(np.degrees(delta), delta_band_deg, "delta")
        generic(i_d, current_band_frac * i_rated, "i_d")
        generic(i_q, current_band_frac * i_rated, "i_q")
        generic(omega_hat_hz, freq_band_hz, "omega_hat")
        vg_final_true = hist["v_g"][n_ok - 1]
        generic(vg_hat, vg_band_frac * max(vg_final_true, 1.0), "vg_hat")

    # per power-step settling against the scheduled targets
    if have_refs and has_data:
        times = [tk for tk, _ in result.refs] + [np.inf]
        for k, (tk, ref) in enumerate(result.refs):
            t_next = times[k + 1]
            out[f"step{k}_time_s"] = float(tk)
            out[f"step{k}_power_w"] = float(ref.power_label)
            out[f"step{k}_delta_settle_s"] = _settle_time(
                t, delta_err_deg, delta_band_deg, tk, t_next
            )
            out[f"step{k}_current_settle_s"] = _settle_time(
                t, cur_err, current_band_frac * i_rated, tk, t_next
            )

    # disturbance-event recovery
    ev_times = _event_times(config)
    if ev_times and has_data:
        t_ev = ev_times[-1]
        out["event_time_s"] = float(t_ev)
        pre = np.nonzero(t < t_ev - 1e-12)[0]
        if pre.size:
            delta_pre = delta[pre[-1]]
            out["delta_pre_event_deg"] = float(np.degrees(delta_pre))
            ret_err = np.degrees(_wrap_array(delta - delta_pre))
            out["delta_return_1deg_s"] = _settle_time(
                t, ret_err, delta_band_deg, t_ev, np.inf
            )
        out["omega_hat_settle_0p05hz_s"] = _settle_time(
            t, freq_err_hz, freq_band_hz, t_ev, np.inf
        )
        vg_true_final = hist["v_g"][n_ok - 1]
        out["vg_hat_settle_1pct_s"] = _settle_time(
            t, vg_err, vg_band_frac * max(vg_true_final, 1.0), t_ev, np.inf
        )
        if have_refs:
            out["current_return_1pct_s"] = _settle_time(
                t, cur_err, 0.01 * i_rated, t_ev, np.inf
            )
            out["current_return_2pct_s"] = _settle_time(
                t, cur_err, 0.02 * i_rated, t_ev, np.inf
            )

    # identification diagnostics
    if has_data:
        out["normf_max"] = float(np.nanmax(result.column("normF")[:n_ok]))
        out["phi_orthogonality_max"] = float(
            np.nanmax(phi_orthogonality_error(result)[:n_ok])
        )
        ident = identity_residual(result)[:n_ok]
        sel = t[:n_ok] > identity_t_from
        if np.any(sel):
            out["gpebo_identity_max_rel"] = float(np.nanmax(ident[sel]))
        lam = result.p0[9]
        ratio = lre_residual_ratio(result)[:n_ok]
        sel = t[:n_ok] >= 5.0 / lam
        if np.any(sel):
            out["lre_residual_max_ratio_after_5tau"] = float(np.nanmax(ratio[sel]))
        pe = pe_min_eig_series(result)
        if np.any(np.isfinite(pe)):
            out["pe_min_eig_min"] = float(np.nanmin(pe))
            out["pe_min_eig_final"] = (
                float(pe[n_ok - 1]) if np.isfinite(pe[n_ok - 1]) else None
            )

    # convergence verdict over the tail window
    converged = not result.diverged
    oscillation = False
    if has_data and not result.diverged:
        t_tail = max(float(t[0]), float(result.t_end) - tail_window)
        sel = t >= t_tail - 1e-12
        if have_refs:
            tail_delta = delta_err_deg[sel]
            tail_cur = cur_err[sel] / i_rated
            if np.any(np.abs(tail_delta) > delta_band_deg):
                converged = False
            if np.any(tail_cur > current_band_frac):
                converged = False
            if tail_delta.size >= 2:
                p2p_delta = float(np.max(tail_delta) - np.min(tail_delta))
                p2p_cur = float(np.max(tail_cur) - np.min(tail_cur))
                oscillation = p2p_delta > 2.0 * delta_band_deg or (
                    p2p_cur > 2.0 * current_band_frac
                )
    else:
        converged = False
    out["converged"] = bool(converged)
    out["oscillation_flag"] = bool(oscillation)
    return out
