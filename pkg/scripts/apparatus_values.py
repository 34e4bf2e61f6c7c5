"""Print the beam parameters and Gouy phases at the apparatus operating point."""
from poisson_spot import (
    PhysicalConfig,
    characteristic_time,
    coherent_gouy_difference,
    free_params,
    gouy_partial,
    slit_params,
)
from poisson_spot.detector_fit import screen_blur_width

cfg = PhysicalConfig(mass=3.34e-27, sigma0=51e-6, beta=60e-6, t=1.4e-3, tau=0.606e-3)
ell = 0.3369e-6

fp = free_params(cfg, cfg.t + cfg.tau)
sp = slit_params(cfg)
rows = [
    ("tau0 [s]", characteristic_time(cfg)),
    ("b(t+tau) [m]", fp.b),
    ("B [m]", sp.B),
    ("mu_f(t+tau) [rad]", fp.mu_f),
    ("mu_s [rad]", sp.mu_s),
    ("mu coherent [rad]", coherent_gouy_difference(cfg)),
    ("mu_l [rad]", gouy_partial(cfg, ell)),
    ("|mu_l| reference [rad]", 0.00060097028),
    ("screen blur hbar*tau/(m*l) [m]", screen_blur_width(cfg, ell)),
]
for name, value in rows:
    print(f"{name:32s} {value: .10g}")
