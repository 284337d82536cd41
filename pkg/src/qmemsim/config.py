"""Unit-suffixed key = value configuration files.

Frequencies and times must carry an explicit unit suffix (GHz, MHz, kHz, Hz,
s, ms, us, ns); unit-less entries are rejected for those keys.  Dimensionless
quantities (quality factors, populations, counts) are plain numbers.  Lines
starting with # are comments.

Example::

    # sample parameters
    omega_ro = 5.518 GHz
    kappa_s  = 24.7 kHz
    t1_q     = 1.32 us
    q0_ro    = 1.9e6
"""

from dataclasses import dataclass, field

from .device import DeviceParams
from .errors import ConfigError
from .qsys import SubsystemDims

FREQ_UNITS = {"ghz": 1.0, "mhz": 1e-3, "khz": 1e-6, "hz": 1e-9}  # -> GHz
TIME_UNITS = {"s": 1e6, "ms": 1e3, "us": 1.0, "ns": 1e-3}        # -> us

# device keys: (kind, target unit relative to DeviceParams storage)
# storage units: omega_* GHz, alpha/g/chi/kappa_ro MHz, kappa_s kHz, t*_q us
_DEVICE_KEYS = {
    "omega_ro": ("freq", 1.0),
    "omega_s": ("freq", 1.0),
    "omega_q": ("freq", 1.0),
    "alpha": ("freq", 1e3),
    "g": ("freq", 1e3),
    "g_102": ("freq", 1e3),
    "chi_ro": ("freq", 1e3),
    "chi_s": ("freq", 1e3),
    "kappa_ro": ("freq", 1e3),
    "kappa_s": ("freq", 1e6),
    "t1_q": ("time", 1.0),
    "t2_q": ("time", 1.0),
    "q0_ro": ("plain", 1.0),
    "q0_s": ("plain", 1.0),
    "n_ro": ("plain", 1.0),
    "p_e": ("plain", 1.0),
}

_RUN_KEYS = {
    "dt_pulse": ("time", 1.0),
    "dt_idle": ("time", 1.0),
    "n_transmon": ("plain", 1.0),
    "n_storage": ("plain", 1.0),
    "n_readout": ("plain", 1.0),
    "frame": ("word", None),
}


def _parse_value(key, raw, kind, scale):
    parts = raw.split()
    if kind == "word":
        if len(parts) != 1:
            raise ConfigError(f"{key}: expected a single word, got {raw!r}")
        return parts[0]
    if kind == "plain":
        if len(parts) != 1:
            raise ConfigError(f"{key}: dimensionless value must not carry a unit")
        try:
            return float(parts[0])
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse number {parts[0]!r}") from exc
    if len(parts) != 2:
        raise ConfigError(
            f"{key}: frequency/time entries require an explicit unit, got {raw!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse number {parts[0]!r}") from exc
    unit = parts[1].lower()
    table = FREQ_UNITS if kind == "freq" else TIME_UNITS
    if unit not in table:
        raise ConfigError(f"{key}: unknown {kind} unit {parts[1]!r}")
    return value * table[unit] * scale


def parse_config_text(text):
    """Parse the flat key = value format into (device_kw, run_kw) dicts."""
    device_kw, run_kw = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key in _DEVICE_KEYS:
            kind, scale = _DEVICE_KEYS[key]
            device_kw[key] = _parse_value(key, raw, kind, scale)
        elif key in _RUN_KEYS:
            kind, scale = _RUN_KEYS[key]
            run_kw[key] = _parse_value(key, raw, kind, scale)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return device_kw, run_kw


def load_device_params(path):
    """DeviceParams from a config file (missing keys keep sample defaults)."""
    with open(path) as f:
        device_kw, _ = parse_config_text(f.read())
    try:
        return DeviceParams(**device_kw)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_run_settings(path):
    """(DeviceParams, dims, run settings dict) from a config file."""
    with open(path) as f:
        device_kw, run_kw = parse_config_text(f.read())
    try:
        params = DeviceParams(**device_kw)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    dims = SubsystemDims(
        int(run_kw.pop("n_transmon", 3)),
        int(run_kw.pop("n_storage", 5)),
        int(run_kw.pop("n_readout", 2)),
    )
    return params, dims, run_kw


SAMPLE_CONFIG = """\
# measured sample parameters
omega_ro = 5.518 GHz
omega_s  = 8.707546 GHz
omega_q  = 6.234 GHz
alpha    = -185 MHz
g        = 53 MHz
g_102    = 8 MHz
chi_ro   = 3.6 MHz
chi_s    = 1.1 MHz
kappa_ro = 4 MHz
kappa_s  = 24.7 kHz
t1_q     = 1.32 us
t2_q     = 2.49 us
q0_ro    = 1.9e6
q0_s     = 1.0e6
n_ro     = 0
p_e      = 0.0027
"""


def write_sample_config(path):
    with open(path, "w") as f:
        f.write(SAMPLE_CONFIG)


def device_params_to_config(p: DeviceParams):
    """Render DeviceParams back into the config format."""
    lines = [
        f"omega_ro = {p.omega_ro:.9g} GHz",
        f"omega_s  = {p.omega_s:.9g} GHz",
        f"omega_q  = {p.omega_q:.9g} GHz",
        f"alpha    = {p.alpha:.9g} MHz",
        f"g        = {p.g:.9g} MHz",
        f"g_102    = {p.g_102:.9g} MHz",
        f"chi_ro   = {p.chi_ro:.9g} MHz",
        f"chi_s    = {p.chi_s:.9g} MHz",
        f"kappa_ro = {p.kappa_ro:.9g} MHz",
        f"kappa_s  = {p.kappa_s:.9g} kHz",
        f"t1_q     = {p.t1_q:.9g} us",
        f"t2_q     = {p.t2_q:.9g} us",
        f"q0_ro    = {p.q0_ro:.9g}",
        f"q0_s     = {p.q0_s:.9g}",
        f"n_ro     = {p.n_ro:.9g}",
        f"p_e      = {p.p_e:.9g}",
    ]
    return "\n".join(lines) + "\n"
