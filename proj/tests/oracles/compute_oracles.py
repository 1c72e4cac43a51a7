"""Independent high-precision evaluation of the closed-form expected values
frozen into the unit tests. Run: python3 compute_oracles.py"""
from mpmath import mp, mpf, sqrt, cos, sin, exp, sinh, pi, log

mp.dps = 40

E = mpf("1.602176634e-19")
KB = mpf("1.380649e-23")
H = mpf("6.62607015e-34")
ME = mpf("9.1093837015e-31")
EPS0 = mpf("8.8541878128e-12")


def show(label, value):
    print(f"{label:48s} {mp.nstr(value, 20)}")


# SOR relaxation parameter
for n in (2, 64, 512):
    show(f"omega(N_g={n})", 2 / (1 + sqrt(1 - cos(pi / n) ** 2)))

# Drift velocity, BFO-like numbers
T = mpf(298)
kT = KB * T
nu0, d, ua, z, field = mpf("1e12"), mpf("0.56e-9"), mpf("0.55"), 2, mpf("1e7")
v = nu0 * d * exp(-ua * E / kT) * sinh(abs(z) * E * d * field / kT)
show("drift velocity (m/s)", v)

# Schottky current, BFO top contact, default A*
ad = mpf("4e-8")
astar = mpf("1.20173e6")
phi, n = mpf("0.75"), mpf("4.0")
isat = ad * astar * T**2 * exp(-phi * E / kT)
show("schottky saturation (A)", isat)
show("schottky I(0.5 V) (A)", isat * (exp(E * mpf("0.5") / (n * kT)) - 1))

# Simmons tunnel current
ad_t = mpf("625e-12")
phi_t = mpf("3.2") * E
d_tb = mpf("1.1e-9")
beta = mpf(1)
A = 4 * pi * beta * d_tb * sqrt(2 * ME) / H
pref = ad_t * E / (2 * pi * H * (beta * d_tb) ** 2)
vtb = mpf("0.5")
it = pref * (phi_t * exp(-A * sqrt(phi_t)) - (phi_t + E * vtb) * exp(-A * sqrt(phi_t + E * vtb)))
show("tunnel I(0.5 V) (A)", it)

# Ohmic
show("ohmic I (A)", mpf("7e-4") * ad * 1 / mpf("600e-9"))

# Parallel plate
show("parallel plate C (F)", EPS0 * 52 * ad / mpf("1e-7"))

# Depletion width at zero bias: eps_r = 52, phi = 0.75 eV, n = 1e24
nc = mpf("1e24")
show("depletion width V=0 (m)", sqrt(2 * EPS0 * 52 * (mpf("0.75") - 0 - kT / E) / (E * nc)))

# Kinetic inductance, DBMD-scale numbers
show("kinetic inductance (H)", ME * mpf("2.5e-9") / (E**2 * mpf("1e26") * ad_t))

# CIC weight, BFO preset, N_p = 1000 (count form)
show("CIC weight (particles)", mpf("8e22") * ad * mpf("600e-9") / 1000)
