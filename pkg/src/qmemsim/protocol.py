"""End-to-end memory experiments: storage/retrieval, lifetime and coherence
measurements, mode ringdowns, Z-fidelity working-point sweeps and the process
tomography channel.

Readout convention: the retrieved ground-state population p_g is extracted by
tracing out both cavity modes and reading the transmon ground-level
population.  An optional short readout-mode probe can be enabled to include
its dispersive back-action; the extracted quantity stays a population either
way.  Storage-time axes count only the idle delay between the storage and
retrieval halves; protocol overhead is excluded.
"""

import math
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from . import analysis, qsys, tomography
from .device import DeviceParams
from .errors import ParameterError
from .lindblad import build_model, evolve, two_photon_resonance
from .pulses import (DEFAULT_RISE, PulseSegment, PulseSequence,
                     ProtocolCalibration, QUBIT_CHANNEL, READOUT_CHANNEL,
                     STORAGE_CHANNEL, build_memory_sequence,
                     calibrate_pi_pulse)
from .qsys import QuantumState, SubsystemDims
from .units import MHZ, TWO_PI


@dataclass(frozen=True)
class ProtocolOptions:
    """Knobs shared by all experiments.

    The default drive amplitudes give a sideband pi pulse of ~190 ns and a
    qubit pi pulse of ~50 ns, i.e. a protocol length near 0.47 us.
    """

    dims: SubsystemDims = field(default_factory=SubsystemDims)
    frame: str = "dispersive"
    bsb_amplitude: float = TWO_PI * 5.1e3   # rad/us
    qubit_amplitude: float = TWO_PI * 20.0  # rad/us (20 MHz Rabi)
    qubit_pi_multiplier: int = 1
    rise: float = DEFAULT_RISE
    dt_pulse: float = 1e-4                  # us
    dt_idle: float = 2e-3                   # us; idle drift is static and slow
    noiseless: bool = False
    storage_t_phi: float | None = None
    p_e: float | None = None
    thermal_init: bool = False
    readout_probe: bool = False
    shots: int | None = None
    seed: int = 0

    def replace(self, **kw):
        return dc_replace(self, **kw)


_CAL_CACHE = {}


def _cal_key(p, options, channel, amplitude):
    return (tuple(sorted(p.as_dict().items())), options.dims.as_tuple(),
            options.frame, options.rise, channel, amplitude)


def get_calibration(p: DeviceParams, options: ProtocolOptions):
    """Calibrate (or fetch cached) qubit and sideband pi pulses."""
    key_q = _cal_key(p, options, QUBIT_CHANNEL, options.qubit_amplitude)
    if key_q not in _CAL_CACHE:
        _CAL_CACHE[key_q] = calibrate_pi_pulse(
            p, options.dims, QUBIT_CHANNEL, options.qubit_amplitude,
            frame=options.frame, rise=options.rise)
    key_b = _cal_key(p, options, "bsb", options.bsb_amplitude)
    if key_b not in _CAL_CACHE:
        _CAL_CACHE[key_b] = calibrate_pi_pulse(
            p, options.dims, "bsb", options.bsb_amplitude,
            frame=options.frame, rise=options.rise)
    return ProtocolCalibration(qubit=_CAL_CACHE[key_q], bsb=_CAL_CACHE[key_b])


def initial_state(p: DeviceParams, options: ProtocolOptions):
    """Ground product state, or the thermal-qubit equivalent."""
    dims = options.dims
    rho = np.zeros((dims.total, dims.total), dtype=complex)
    pe = p.p_e if options.p_e is None else options.p_e
    if options.thermal_init and pe > 0:
        rho[dims.index(0, 0, 0), dims.index(0, 0, 0)] = 1.0 - pe
        rho[dims.index(1, 0, 0), dims.index(1, 0, 0)] = pe
    else:
        rho[dims.index(0, 0, 0), dims.index(0, 0, 0)] = 1.0
    return QuantumState(rho, dims)


def simulate_sequence(p: DeviceParams, seq: PulseSequence,
                      options: ProtocolOptions, rho0=None, upto=None,
                      observables=None, sample_dt=None):
    """Run a pulse sequence piecewise: fine steps inside pulse windows, the
    coarse idle step in the gaps.  Both steps are fixed within each window.

    Returns (final QuantumState, trajectory dict or None).  When observables
    are given, the per-window trajectories are concatenated.
    """
    model = build_model(p, options.dims, seq, frame=options.frame,
                        noiseless=options.noiseless,
                        storage_t_phi=options.storage_t_phi, p_e=options.p_e)
    state = rho0 if rho0 is not None else initial_state(p, options)
    t_end = upto if upto is not None else (seq.readout_time or seq.end)

    events = {0.0, t_end}
    for s in seq.segments:
        if s.start < t_end:
            events.add(s.start)
            events.add(min(s.end, t_end))
    events = sorted(events)

    times, expect = [], {k: [] for k in (observables or {})}
    for t0, t1 in zip(events, events[1:]):
        if t1 - t0 < 1e-12:
            continue
        active = any(s.start < t1 - 1e-12 and s.end > t0 + 1e-12
                     for s in seq.segments)
        dt = options.dt_pulse if active else options.dt_idle
        traj = evolve(model, state, (t0, t1), dt, observables=observables,
                      sample_dt=sample_dt)
        state = traj.final_state
        if observables:
            skip = 1 if times and traj.times[0] == times[-1] else 0
            times.extend(traj.times[skip:])
            for k in observables:
                expect[k].extend(traj.expectations[k][skip:])

    traj_out = None
    if observables:
        traj_out = {"times": np.asarray(times),
                    **{k: np.asarray(v) for k, v in expect.items()}}
    return model, state, traj_out


def _append_readout_probe(p, seq, options, model_freqs=None):
    """Optional dispersive-readout emulation: a short resonant probe on the
    readout mode right after retrieval (adds its back-action)."""
    from .lindblad import dressed_frequencies

    w_ro = dressed_frequencies(p, options.dims, options.frame)[2]
    a = p.angular()
    start = seq.readout_time if seq.readout_time is not None else seq.end
    probe = PulseSegment(READOUT_CHANNEL, 0.5 * a.k_ro, w_ro, plateau=0.08,
                         rise=options.rise, start=start, label="readout-probe")
    return PulseSequence(seq.segments + (probe,), readout_time=probe.end)


def ground_population(model, state):
    return float(np.real(np.trace(state.rho @ model.label_projector(nt=0))))


def run_memory_protocol(p: DeviceParams, prep_angle=0.0, storage_delay=0.0,
                        options: ProtocolOptions | None = None, cal=None,
                        return_state=False, extra_segments=()):
    """Full storage/retrieval protocol; returns the retrieved p_g.

    extra_segments (e.g. a trailing analysis pulse) are appended before the
    readout marker.
    """
    options = options or ProtocolOptions()
    cal = cal or get_calibration(p, options)
    seq = build_memory_sequence(p, prep_angle, storage_delay, cal,
                                qubit_pi_multiplier=options.qubit_pi_multiplier)
    for seg in extra_segments:
        seg = seg.shifted(seq.readout_time)
        seq = PulseSequence(seq.segments + (seg,), readout_time=seg.end)
    if options.readout_probe:
        seq = _append_readout_probe(p, seq, options)
    model, state, _ = simulate_sequence(p, seq, options)
    p_g = ground_population(model, state)
    if return_state:
        return p_g, state, seq
    return p_g


def reference_ground_population(p: DeviceParams, prep_angle=0.0,
                                options: ProtocolOptions | None = None,
                                cal=None):
    """p_g(0): the zero-length reference protocol (prep + immediate readout)."""
    options = options or ProtocolOptions()
    if prep_angle == 0.0:
        model, state, _ = simulate_sequence(p, PulseSequence(()), options)
        return ground_population(model, state)
    cal = cal or get_calibration(p, options)
    q = cal.qubit
    seg = PulseSegment(QUBIT_CHANNEL, abs(prep_angle) / math.pi * q.amplitude,
                       q.carrier, phase=math.pi if prep_angle < 0 else 0.0,
                       plateau=q.plateau, rise=q.rise, start=0.0, label="prep")
    seq = PulseSequence((seg,), readout_time=seg.end)
    model, state, _ = simulate_sequence(p, seq, options)
    return ground_population(model, state)


def storage_state_after_half(p: DeviceParams, prep_angle=0.0,
                             options: ProtocolOptions | None = None, cal=None):
    """Reduced storage-mode state right after the storage half."""
    options = options or ProtocolOptions()
    cal = cal or get_calibration(p, options)
    seq = build_memory_sequence(p, prep_angle, 1.0, cal,
                                qubit_pi_multiplier=options.qubit_pi_multiplier)
    t_half = max(s.end for s in seq.segments if s.label == "qubit-pi-store")
    _, state, _ = simulate_sequence(p, seq, options, upto=t_half)
    return state.ptrace_storage()


# ---------------------------------------------------------------------------
# experiment records
# ---------------------------------------------------------------------------

@dataclass
class ExperimentRecord:
    """Tabulated sweep output plus fits and a reproducibility snapshot."""

    kind: str
    sweep_variable: str
    observable: str
    xs: np.ndarray
    ys: np.ndarray
    yerr: np.ndarray | None = None
    columns: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        if self.xs.size == 0:
            raise ParameterError("experiment record must hold data")
        if np.any(np.diff(self.xs) <= 0):
            raise ParameterError("sweep values must be strictly increasing")

    def to_csv(self, path):
        names = [self.sweep_variable, self.observable, "uncertainty"]
        names += list(self.columns)
        err = self.yerr if self.yerr is not None else np.zeros_like(self.ys)
        with open(path, "w") as f:
            f.write(",".join(names) + "\n")
            for i in range(self.xs.size):
                row = [self.xs[i], self.ys[i], err[i]]
                row += [self.columns[c][i] for c in self.columns]
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def fit_summary(self):
        out = {}
        for name, fit in self.fits.items():
            out[name] = {
                "model": fit.model,
                "params": {k: float(v) for k, v in fit.params.items()},
                "uncertainties": {k: float(v) for k, v in fit.uncertainties.items()},
                "residual_norm": fit.residual_norm,
                "converged": fit.converged,
            }
        return out


def _base_meta(p, options, cal=None, **extra):
    meta = {
        "device": p.as_dict(),
        "dims": options.dims.as_tuple(),
        "frame": options.frame,
        "dt_pulse_us": options.dt_pulse,
        "dt_idle_us": options.dt_idle,
        "noiseless": options.noiseless,
    }
    if cal is not None:
        meta["calibration"] = {
            "qubit": {"amplitude": cal.qubit.amplitude, "plateau": cal.qubit.plateau,
                      "carrier": cal.qubit.carrier, "pi_time": cal.qubit.pi_time,
                      "freq_offset": cal.qubit.freq_offset,
                      "transfer": cal.qubit.transfer},
            "bsb": {"amplitude": cal.bsb.amplitude, "plateau": cal.bsb.plateau,
                    "carrier": cal.bsb.carrier, "pi_time": cal.bsb.pi_time,
                    "freq_offset": cal.bsb.freq_offset,
                    "transfer": cal.bsb.transfer},
        }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# decay / coherence experiments
# ---------------------------------------------------------------------------

def default_fock_delays():
    """Fit window for the Fock decay.

    The first point sits past ~2 qubit lifetimes: retrieval re-excites the
    in-pulse qubit-decay products, and their relaxation back into |g,1>
    feeds the signal during the first couple of T1_q (the short-delay
    artifact the measurement would also show).
    """
    return np.array([3.0, 4.5, 6.0, 7.5, 9.0, 11.0, 13.5, 16.0])


def fock_decay_experiment(p: DeviceParams, delays=None,
                          options: ProtocolOptions | None = None):
    """Store Fock |1> (ground-state input), vary the idle delay, fit T1_s."""
    options = options or ProtocolOptions()
    delays = np.asarray(default_fock_delays() if delays is None else delays,
                        dtype=float)
    t1_expected = 1.0 / p.angular().k_s
    if delays.max() < 2.0 * t1_expected:
        raise ParameterError(
            f"delays must span >= 2x the expected lifetime {t1_expected:.2f} us")
    if delays.max() - delays.min() < 1.5 * t1_expected:
        raise ParameterError("delay window too narrow for a stable fit")
    cal = get_calibration(p, options)
    pgs = np.array([run_memory_protocol(p, 0.0, d, options, cal) for d in delays])
    fit = analysis.fit_exponential(delays, pgs)
    return ExperimentRecord(
        kind="fock-decay", sweep_variable="delay_us", observable="p_g",
        xs=delays, ys=pgs, fits={"T1_s": fit},
        meta=_base_meta(p, options, cal, expected_t1_s=t1_expected))


def memory_ramsey_experiment(p: DeviceParams, delays=None, detuning=0.35,
                             options: ProtocolOptions | None = None):
    """Ramsey on the memory: prep pi/2, store, retrieve, analyze with a
    software-detuned pi/2.  detuning in MHz; fits a decaying cosine for T2_s.

    The observed fringe frequency includes the small offset between the
    calibrated pulse carriers (Stark-shifted optimum) and the idle dressed
    frame, exactly like a lab LO mismatch; the T2 extraction is unaffected.
    """
    options = options or ProtocolOptions()
    if delays is None:
        delays = np.linspace(0.25, 21.0, 22)
    delays = np.asarray(delays, dtype=float)
    span = delays.max() - delays.min()
    if detuning * span < 3.0:
        raise ParameterError(
            f"detuning {detuning} MHz gives fewer than 3 fringes over {span} us")
    cal = get_calibration(p, options)
    q = cal.qubit

    pgs = []
    for d in delays:
        # analysis pulse: half-area at the pi-pulse duration, phase advanced
        # by the software detuning
        seg = PulseSegment(QUBIT_CHANNEL, 0.5 * q.amplitude, q.carrier,
                           phase=TWO_PI * detuning * d, plateau=q.plateau,
                           rise=q.rise, start=0.0, label="ramsey-analysis")
        pgs.append(run_memory_protocol(p, math.pi / 2.0, d, options, cal,
                                       extra_segments=(seg,)))
    pgs = np.array(pgs)
    fit = analysis.fit_decaying_cosine(delays, pgs)
    return ExperimentRecord(
        kind="memory-ramsey", sweep_variable="delay_us", observable="p_g",
        xs=delays, ys=pgs, fits={"T2_s": fit},
        meta=_base_meta(p, options, cal, detuning_mhz=detuning))


def prep_angle_sweep(p: DeviceParams, angles=None, delays=(0.25,),
                     options: ProtocolOptions | None = None):
    """Retrieved p_g versus preparation angle at fixed delays (Rabi pattern)."""
    options = options or ProtocolOptions()
    if angles is None:
        angles = np.linspace(0.0, 2.0 * math.pi, 13)
    angles = np.asarray(angles, dtype=float)
    cal = get_calibration(p, options)
    columns = {}
    for d in delays:
        pgs = np.array([run_memory_protocol(p, a, d, options, cal)
                        for a in angles])
        columns[f"p_g_delay_{d:g}us"] = pgs
    first = next(iter(columns.values()))
    rec = ExperimentRecord(
        kind="memory-protocol", sweep_variable="prep_angle_rad",
        observable="p_g", xs=angles, ys=first,
        columns={k: v for k, v in list(columns.items())[1:]},
        meta=_base_meta(p, options, cal, delays_us=list(delays)))
    return rec


def mode_ringdown_experiment(p: DeviceParams, mode="readout",
                             options: ProtocolOptions | None = None,
                             target_amp=0.45):
    """Displace a cavity mode, switch the drive off and fit the free decay.

    Reports the field-amplitude decay time (2/kappa) and the energy decay
    time (1/kappa).
    """
    from .lindblad import dressed_frequencies

    options = options or ProtocolOptions()
    a = p.angular()
    dims = options.dims
    freqs = dressed_frequencies(p, dims, options.frame)
    if mode == "readout":
        channel, slot, carrier, kappa = READOUT_CHANNEL, 2, freqs[2], a.k_ro
    elif mode == "storage":
        channel, slot, carrier, kappa = STORAGE_CHANNEL, 1, freqs[1], a.k_s
    else:
        raise ParameterError(f"unknown mode {mode!r}")

    # drive long enough to settle near the target coherent amplitude
    drive_len = min(6.0 / kappa, 0.12)
    amp = 2.0 * target_amp / drive_len if kappa * drive_len < 1.0 \
        else target_amp * kappa
    seg = PulseSegment(channel, amp, carrier, plateau=drive_len,
                       rise=options.rise, start=0.0, label="displace")
    seq = PulseSequence((seg,))
    span = 2.5 * (2.0 / kappa)
    model = build_model(p, dims, seq, frame=options.frame,
                        noiseless=options.noiseless,
                        storage_t_phi=options.storage_t_phi, p_e=options.p_e)
    low = model.lowering_op(slot)
    obs = {"a": low, "n": low.conj().T @ low}

    state = initial_state(p, options)
    traj_on = evolve(model, state, (0.0, seg.end), options.dt_pulse)
    traj = evolve(model, traj_on.final_state, (seg.end, seg.end + span),
                  min(options.dt_idle, span / 2000.0), observables=obs,
                  sample_dt=span / 120.0)
    t = traj.times - seg.end
    amp_abs = np.abs(traj.expectations["a"])
    n_vals = traj.real("n")

    fit_amp = analysis.fit_exponential(t, amp_abs)
    fit_n = analysis.fit_exponential(t, n_vals)
    return ExperimentRecord(
        kind="ringdown", sweep_variable="t_us", observable="field_amplitude",
        xs=t, ys=amp_abs, columns={"n": n_vals},
        fits={"amplitude_decay": fit_amp, "energy_decay": fit_n},
        meta=_base_meta(p, options, mode=mode,
                        expected_amp_decay_us=2.0 / kappa,
                        expected_energy_decay_us=1.0 / kappa))


# ---------------------------------------------------------------------------
# Z-fidelity working points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorkingPoint:
    """One protocol configuration of the Z-fidelity sweep."""

    bsb_amplitude: float
    qubit_amplitude: float = TWO_PI * 20.0
    qubit_pi_multiplier: int = 1


def default_working_points():
    """Seven points spanning protocol lengths of roughly 0.25 to 1.1 us,
    the longest one using 3pi qubit pulses."""
    return [
        WorkingPoint(TWO_PI * 12.0e3),
        WorkingPoint(TWO_PI * 9.0e3),
        WorkingPoint(TWO_PI * 7.0e3),
        WorkingPoint(TWO_PI * 6.0e3),
        WorkingPoint(TWO_PI * 4.6e3),
        WorkingPoint(TWO_PI * 3.6e3),
        WorkingPoint(TWO_PI * 3.2e3, qubit_pi_multiplier=3),
    ]


def z_fidelity_point(p: DeviceParams, wp: WorkingPoint,
                     options: ProtocolOptions | None = None):
    """(t_p, F_Z, F_Z_corr) at one working point, zero storage delay."""
    options = (options or ProtocolOptions()).replace(
        bsb_amplitude=wp.bsb_amplitude, qubit_amplitude=wp.qubit_amplitude,
        qubit_pi_multiplier=wp.qubit_pi_multiplier)
    cal = get_calibration(p, options)
    seq = build_memory_sequence(p, 0.0, 0.0, cal,
                                qubit_pi_multiplier=wp.qubit_pi_multiplier)
    t_p = seq.memory_duration
    p_g0 = reference_ground_population(p, 0.0, options, cal)
    p_g = run_memory_protocol(p, 0.0, 0.0, options, cal)
    f_z = p_g / p_g0
    f_z_corr = f_z / math.exp(-t_p / p.t1_q)
    return t_p, f_z, f_z_corr


def z_fidelity_sweep(p: DeviceParams, working_points=None,
                     options: ProtocolOptions | None = None, fit=False):
    """Z fidelity and corrected Z fidelity versus protocol length."""
    options = options or ProtocolOptions()
    working_points = working_points or default_working_points()
    rows = [z_fidelity_point(p, wp, options) for wp in working_points]
    rows.sort(key=lambda r: r[0])
    t_ps = np.array([r[0] for r in rows])
    f_z = np.array([r[1] for r in rows])
    f_corr = np.array([r[2] for r in rows])
    fits = {}
    if fit:
        fits["leakage"] = analysis.fit_leakage(t_ps, f_corr)
    return ExperimentRecord(
        kind="zfidelity-sweep", sweep_variable="t_p_us", observable="f_z",
        xs=t_ps, ys=f_z, columns={"f_z_corr": f_corr}, fits=fits,
        meta=_base_meta(p, options,
                        working_points=[
                            {"bsb_amplitude": wp.bsb_amplitude,
                             "qubit_amplitude": wp.qubit_amplitude,
                             "qubit_pi_multiplier": wp.qubit_pi_multiplier}
                            for wp in working_points]))


# ---------------------------------------------------------------------------
# process tomography of the memory channel
# ---------------------------------------------------------------------------

def memory_channel(p: DeviceParams, options: ProtocolOptions | None = None,
                   cal=None):
    """The storage/retrieval protocol as a map on 2x2 qubit states.

    The input state is placed on the (g, e) levels with both modes in
    vacuum; the output is the unnormalized (g, e) block of the retrieved
    transmon state (trace deficiency = leakage and loss).  With shots set in
    the options, the output is instead reconstructed from binomially sampled
    Pauli expectations (normalized, seeded).
    """
    options = options or ProtocolOptions()
    cal = cal or get_calibration(p, options)
    seq = build_memory_sequence(p, 0.0, 0.0, cal,
                                qubit_pi_multiplier=options.qubit_pi_multiplier)
    if options.readout_probe:
        seq = _append_readout_probe(p, seq, options)
    dims = options.dims

    def channel(rho_in):
        rho_full = np.zeros((dims.total, dims.total), dtype=complex)
        for i in range(2):
            for j in range(2):
                rho_full[dims.index(i, 0, 0), dims.index(j, 0, 0)] = rho_in[i, j]
        _, state, _ = simulate_sequence(
            p, seq, options, rho0=QuantumState(rho_full, dims))
        block = state.ptrace_transmon()[:2, :2]
        if options.shots is None:
            return block
        rng = np.random.default_rng(
            (options.seed, int(1e6 * abs(rho_in[0, 0].real))))
        rho_n = block / np.trace(block)
        out = {}
        for name, op in (("X", tomography.PAULI_X), ("Y", tomography.PAULI_Y),
                         ("Z", tomography.PAULI_Z)):
            prob_up = 0.5 * (1.0 + np.real(np.trace(rho_n @ op)))
            prob_up = min(1.0, max(0.0, prob_up))
            k = rng.binomial(options.shots, prob_up)
            out[name] = 2.0 * k / options.shots - 1.0
        return tomography.state_tomography(lambda ax: out[ax])

    return channel


def qpt_experiment(p: DeviceParams, options: ProtocolOptions | None = None):
    """Process tomography of the memory protocol; returns a dict with the
    chi matrix, raw and Z-optimized process fidelities and the Z fidelity at
    the same working point."""
    options = options or ProtocolOptions()
    cal = get_calibration(p, options)
    chi = tomography.process_tomography(memory_channel(p, options, cal))
    f_raw = tomography.process_fidelity(chi)
    theta, f_opt = tomography.fidelity_with_z_optimization(chi)
    seq = build_memory_sequence(p, 0.0, 0.0, cal,
                                qubit_pi_multiplier=options.qubit_pi_multiplier)
    t_p, f_z, f_z_corr = z_fidelity_point(
        p, WorkingPoint(options.bsb_amplitude, options.qubit_amplitude,
                        options.qubit_pi_multiplier), options)
    return {
        "chi": chi,
        "f_qpt_raw": f_raw,
        "f_qpt": f_opt,
        "z_rotation_rad": theta,
        "f_z": f_z,
        "f_z_corr": f_z_corr,
        "t_p_us": t_p,
        "meta": _base_meta(p, options, cal),
    }
