"""Walk through the closed-form device quantities of the measured sample.

Everything here is instantaneous arithmetic on the parameter set: the
sideband resonance placement, the effective two-photon coupling, the Purcell
bound, and the dephasing/thermal-population relations.
"""

import math

from qmemsim import device
from qmemsim.units import GHZ, MHZ, TWO_PI

p = device.DeviceParams()
a = p.angular()

print("sample parameters")
print(f"  readout  mode {p.omega_ro} GHz, kappa/2pi = {p.kappa_ro} MHz")
print(f"  storage  mode {p.omega_s} GHz, kappa/2pi = {p.kappa_s} kHz")
print(f"  qubit    {p.omega_q} GHz, alpha = {p.alpha} MHz, g = {p.g} MHz")
print(f"  qubit times T1 = {p.t1_q} us, T2 = {p.t2_q} us")

wb = device.bsb_frequency(p)
print("\nblue-sideband placement (measured dispersive shifts)")
print(f"  two-photon resonance w_b/2pi = {wb / GHZ:.6f} GHz")
print(f"  drive carrier w_b/2/2pi      = {wb / 2 / GHZ:.6f} GHz")
d_s, d_q = device.bsb_detunings(p)
print(f"  carrier detunings: storage {d_s / GHZ:+.6f} GHz, "
      f"qubit {d_q / GHZ:+.6f} GHz")

print("\neffective sideband coupling for a few drive amplitudes")
for amp_ghz in (2.0, 5.1, 10.0):
    rate = device.bsb_effective_rate(p, TWO_PI * 1e3 * amp_ghz)
    print(f"  Omega_drv/2pi = {amp_ghz:5.1f} GHz -> Omega_eff/2pi = "
          f"{rate / MHZ:6.3f} MHz, pi time ~ {math.pi / (2 * rate) * 1e3:6.1f} ns")

print("\nestimator vs measured dispersive shifts (estimator is not used for"
      " bookkeeping)")
for mode, delta in (("readout", a.w_q - a.w_ro), ("storage", a.w_q - a.w_s)):
    chi = device.dispersive_shift_estimate(a.g, delta, a.alpha) / MHZ
    measured = p.chi_ro if mode == "readout" else p.chi_s
    print(f"  {mode}: estimate {chi:+.3f} MHz, measured {measured} MHz")

print("\ncoherence bookkeeping")
print(f"  Purcell bound through the readout mode: {device.purcell_limit(p):.2f} us"
      f"  (single-mode formula; >> T1_q = {p.t1_q} us)")
t_phi_s = device.pure_dephasing_time(8.0, 15.5)
print(f"  memory pure dephasing (T1=8.0, T2=15.5): {t_phi_s:.0f} us")
p_e = device.thermal_population(1.0 / t_phi_s, 1.0 / p.t1_q)
print(f"  implied equilibrium qubit excitation:    {100 * p_e:.2f} %")
