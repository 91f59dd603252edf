"""Figure pipelines: preparation sweep, overlap scans, thresholds, Berry-Voros scan, oracle.

Each ``run_*`` function writes its CSV files plus ``config.resolved`` into the
output directory and returns the list of files written.
"""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .berry_voros import (BVModel, FDisplacement, bv_action_n, bv_actions, bv_eigen_char,
                          bv_scan, bv_sigma, mc_microcanonical_oracle)
from .checkpoint import CheckpointError, load_state, save_state
from .config import ExperimentConfig, config_echo
from .grid import Grid
from .overlap import overlap_scan, threshold_search
from .propagator import DriveParams, observables_vs_T
from .states import WaveFunction, coherent_state, delta_s, moments, patch_action

log = logging.getLogger(__name__)


def write_csv(path, header: list[tuple[str, str]], columns) -> Path:
    """CSV with a ``name [unit]`` header and every number at 17 significant digits."""
    path = Path(path)
    cols = [np.atleast_1d(np.asarray(c, dtype=float)) for c in columns]
    n = {len(c) for c in cols}
    if len(n) != 1:
        raise ValueError(f"columns of unequal length {sorted(n)}")
    with open(path, "w") as fh:
        fh.write(",".join(f"{name} [{unit}]" for name, unit in header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Inverse of :func:`write_csv`, keyed by bare column name."""
    with open(path) as fh:
        names = [h.split(" [")[0] for h in fh.readline().strip().split(",")]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(names)}


def grid_of(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg.n_points, cfg.q_min, cfg.q_max, cfg.hbar)


def drive_of(cfg: ExperimentConfig) -> DriveParams:
    return DriveParams(cfg.m, cfg.kappa, cfg.a_harm, cfg.l, cfg.hbar)


def initial_state(cfg: ExperimentConfig) -> WaveFunction:
    return coherent_state(grid_of(cfg), cfg.alpha, cfg.m, drive_of(cfg).omega)


def bv_model_of(cfg: ExperimentConfig) -> BVModel:
    return BVModel.coherent(cfg.alpha, f=cfg.f, M=cfg.M, omega=cfg.omega, hbar=cfg.hbar,
                            n_max=cfg.n_max)


def _prepare_out(cfg: ExperimentConfig, out) -> Path:
    out = Path(out) if out is not None else cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(config_echo(cfg))
    return out


def _tag(T: float) -> str:
    return f"{T:g}"


def snap(T: float, dt: float) -> float:
    """Nearest whole multiple of ``dt`` (keeps every sweep interval a whole number of steps)."""
    return round(T / dt) * dt


def fig1_times(cfg: ExperimentConfig) -> list[float]:
    times = set(cfg.T_list)
    if cfg.fig1_log_points:
        t_max = max(cfg.T_list)
        if t_max > cfg.fig1_log_min:
            for t in np.geomspace(cfg.fig1_log_min, t_max, cfg.fig1_log_points):
                times.add(snap(float(t), cfg.dt))
    return sorted(times)


def _physics_key(cfg: ExperimentConfig) -> str:
    key = repr((cfg.m, cfg.kappa, cfg.a_harm, cfg.l, cfg.hbar, cfg.alpha,
                cfg.n_points, cfg.q_min, cfg.q_max, cfg.dt))
    return hashlib.sha256(key.encode()).hexdigest()[:12]


def state_path(cfg: ExperimentConfig, out: Path, T: float) -> Path:
    return out / "states" / _physics_key(cfg) / f"T_{_tag(T)}.qps"


def prepared_states(cfg: ExperimentConfig, out: Path, times) -> dict[float, WaveFunction]:
    """States at ``times``; reuses checkpoints written by an identical physics setup."""
    times = sorted(set(float(t) for t in times))
    states: dict[float, WaveFunction] = {}
    missing = []
    for T in times:
        path = state_path(cfg, out, T)
        if path.exists():
            try:
                psi, t_file = load_state(path, expected_hbar=cfg.hbar)
            except CheckpointError as exc:
                log.warning("ignoring unreadable checkpoint: %s", exc)
                missing.append(T)
                continue
            if t_file == T:
                states[T] = psi
                continue
        missing.append(T)
    if missing:
        log.info("propagating to T = %s", ", ".join(_tag(t) for t in missing))
        rec = observables_vs_T(initial_state(cfg), missing, cfg.dt, drive_of(cfg), checkpoint_at=missing)
        for T in missing:
            psi = rec.checkpoints[T]
            path = state_path(cfg, out, T)
            path.parent.mkdir(parents=True, exist_ok=True)
            save_state(path, psi, T)
            states[T] = psi
    return states


def _map(cfg: ExperimentConfig, fn, items):
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


PREP_HEADER = [("T", "time"), ("sigma_q", "length"), ("sigma_p", "momentum"),
               ("patch_action", "action")]


def run_prepare(cfg: ExperimentConfig, out=None) -> list[Path]:
    out = _prepare_out(cfg, out)
    times = sorted(set(cfg.T_list) | set(cfg.checkpoints))
    states = prepared_states(cfg, out, times)
    rows = []
    for T in cfg.T_list:
        mom = moments(states[T])
        rows.append((T, mom.sigma_q, mom.sigma_p, patch_action(mom, cfg.hbar)))
    written = [write_csv(out / "preparation.csv", PREP_HEADER, list(zip(*rows)))]
    written += [state_path(cfg, out, T) for T in cfg.checkpoints]
    return written


def run_fig1(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Widths, patch action and the threshold Delta Z_0 on the fig1 time grid."""
    out = _prepare_out(cfg, out)
    times = fig1_times(cfg)
    states = prepared_states(cfg, out, times)

    def row(T):
        psi = states[T]
        mom = moments(psi)
        _, dz0 = threshold_search(psi, cfg.ratio, cfg.target, mom=mom)
        return T, mom.sigma_q, mom.sigma_p, patch_action(mom, cfg.hbar), dz0

    rows = _map(cfg, row, times)
    header = PREP_HEADER + [("dz0", "action")]
    return [write_csv(out / "fig1.csv", header, list(zip(*rows)))]


SCAN_HEADER = [("dq", "length"), ("dp", "momentum"), ("ds", "action"), ("dz", "action"),
               ("overlap_sq", "1"), ("arg_c", "rad")]


def scan_dp_max(cfg: ExperimentConfig, psi: WaveFunction, mom=None) -> float:
    """Configured ``dp_max``, or the dp at which Delta S reaches ``ds_max_hbar`` hbar."""
    if cfg.dp_max is not None:
        return cfg.dp_max
    mom = moments(psi) if mom is None else mom
    return cfg.ds_max_hbar * cfg.hbar / float(delta_s(mom, cfg.ratio, 1.0))


def _scan(cfg: ExperimentConfig, psi: WaveFunction):
    mom = moments(psi)
    curve = overlap_scan(psi, cfg.ratio, cfg.n_samples, scan_dp_max(cfg, psi, mom), mom=mom,
                         workers=cfg.workers)
    ds0, dz0 = threshold_search(psi, cfg.ratio, cfg.target, mom=mom)
    return curve, ds0, dz0


def _write_scan(path: Path, curve) -> Path:
    cols = curve.columns()
    return write_csv(path, SCAN_HEADER, [cols[name] for name, _ in SCAN_HEADER])


def run_fig2(cfg: ExperimentConfig, out=None) -> list[Path]:
    out = _prepare_out(cfg, out)
    states = prepared_states(cfg, out, cfg.T_list)
    results = _map(cfg, lambda T: _scan(cfg, states[T]), list(cfg.T_list))
    written = []
    inset = []
    for T, (curve, ds0, dz0) in zip(cfg.T_list, results):
        written.append(_write_scan(out / f"fig2_T{_tag(T)}.csv", curve))
        inset.append((T, ds0, dz0, cfg.hbar))
    header = [("T", "time"), ("ds0", "action"), ("dz0", "action"), ("hbar", "action")]
    written.append(write_csv(out / "fig2_inset.csv", header, list(zip(*inset))))
    return written


BV_HEADER = [("ds_bar", "action"), ("c_bar", "1"), ("c_bar_sq", "1")]


def bv_curve(cfg: ExperimentConfig):
    """``(ds_bar, c_bar)`` on ``bv_samples + 1`` points up to ds_bar = ds_max_hbar * hbar."""
    model = bv_model_of(cfg)
    unit = bv_actions(model, FDisplacement((cfg.ratio,), (1.0,))).ds_bar if cfg.f == 1 else None
    if unit is None:
        raise ValueError("the Berry-Voros ray scan is defined for f = 1")
    dp = cfg.ds_max_hbar * cfg.hbar / unit * np.arange(cfg.bv_samples + 1) / cfg.bv_samples
    c, s = bv_scan(model, cfg.ratio, dp)
    return s, c


def run_bv_scan(cfg: ExperimentConfig, out=None) -> list[Path]:
    out = _prepare_out(cfg, out)
    s, c = bv_curve(cfg)
    return [write_csv(out / "bv_scan.csv", BV_HEADER, [s, c, c * c])]


def run_fig3(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Berry-Voros curve with the first and last numerical curves of the preparation list."""
    out = _prepare_out(cfg, out)
    s, c = bv_curve(cfg)
    written = [write_csv(out / "fig3.csv", BV_HEADER, [s, c, c * c])]
    ends = sorted({min(cfg.T_list), max(cfg.T_list)})
    states = prepared_states(cfg, out, ends)
    for T in ends:
        curve, _, _ = _scan(cfg, states[T])
        written.append(write_csv(out / f"fig3_numerical_T{_tag(T)}.csv",
                                 [("ds", "action"), ("overlap_sq", "1")],
                                 [curve.ds, curve.overlap_sq]))
    return written


def run_overlap_scan(cfg: ExperimentConfig, out=None, *, T: float | None = None,
                     state_file=None) -> list[Path]:
    """Scan along the configured ray for one state (a checkpoint file or a prepared T)."""
    out = _prepare_out(cfg, out)
    if state_file is not None:
        psi, T = load_state(state_file, expected_hbar=cfg.hbar)
    else:
        T = max(cfg.T_list) if T is None else T
        psi = prepared_states(cfg, out, [T])[T]
    curve, ds0, dz0 = _scan(cfg, psi)
    written = [_write_scan(out / f"overlap_scan_T{_tag(T)}.csv", curve)]
    written.append(write_csv(out / f"overlap_threshold_T{_tag(T)}.csv",
                             [("T", "time"), ("ds0", "action"), ("dz0", "action")],
                             [[T], [ds0], [dz0]]))
    return written


ORACLE_HEADER = [("f", "1"), ("E", "energy"), ("dq_norm", "length"), ("dp_norm", "momentum"),
                 ("ds_n", "action"), ("closed_form", "1"), ("mc_re", "1"), ("mc_im", "1"),
                 ("stderr_re", "1"), ("stderr_im", "1"), ("z_score", "1")]


def oracle_cases(cfg: ExperimentConfig, f: int):
    """Shell energy and ``oracle_displacements`` random displacements for ``f`` freedoms.

    Displacement directions are Gaussian; the magnitude is set so that
    Delta S_n / hbar is uniform on [0.2, 3]. Everything derives from ``cfg.seed``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, f]))
    E = cfg.hbar * cfg.omega * (abs(cfg.alpha) ** 2 + 0.5 * f)
    model = BVModel(f, cfg.M, cfg.omega, cfg.hbar, [E], [1.0])
    sq, sp = bv_sigma(E, model)
    cases = []
    for _ in range(cfg.oracle_displacements):
        raw = FDisplacement(tuple(rng.standard_normal(f)), tuple(rng.standard_normal(f)))
        s_target = cfg.hbar * rng.uniform(0.2, 3.0)
        k = s_target / float(bv_action_n(raw, sq, sp))
        cases.append(FDisplacement(tuple(k * np.array(raw.dq)), tuple(k * np.array(raw.dp))))
    return model, E, cases


def run_oracle(cfg: ExperimentConfig, out=None) -> list[Path]:
    out = _prepare_out(cfg, out)
    rows = []
    for f in cfg.oracle_f:
        model, E, cases = oracle_cases(cfg, f)
        sq, sp = bv_sigma(E, model)
        for i, d in enumerate(cases):
            ds_n = float(bv_action_n(d, sq, sp))
            ref = bv_eigen_char(f, ds_n, cfg.hbar)
            seed = int(np.random.SeedSequence([cfg.seed, f, i]).generate_state(1)[0])
            est = mc_microcanonical_oracle(model, E, d, cfg.oracle_samples, seed,
                                           n_streams=cfg.oracle_streams, workers=cfg.workers)
            z = (est.value.real - ref) / est.stderr_re if est.stderr_re > 0 else 0.0
            dqn, dpn = d.norms()
            rows.append((f, E, dqn, dpn, ds_n, ref, est.value.real, est.value.imag,
                         est.stderr_re, est.stderr_im, z))
    return [write_csv(out / "oracle.csv", ORACLE_HEADER, list(zip(*rows)))]

