"""Physical constants and reference experiment parameters."""

# Atomic unit of electric field, V/cm.
ATOMIC_UNIT_FIELD_V_PER_CM = 5.142e9

# Quantum defect of the strontium 5sns 3S1 series.
QUANTUM_DEFECT_3S1 = 3.371

# Field-ionization ramp E(t) = E_p (1 - exp(-t / tau)).
PEAK_FIELD_V_PER_CM = 40.0
RAMP_TIME_CONSTANT_US = 5.0

# Gaussian SFI line width; resolves n = 58..63 under the ramp above.
DEFAULT_TRACE_WIDTH_US = 0.3

# Six-site lattice of the experiment.
WEAK_COUPLING_KHZ = 160.0
STRONG_COUPLING_KHZ = 800.0
LATTICE_LABELS = (58, 59, 60, 61, 62, 63)

# Total Rydberg population lifetime.
SURVIVAL_TIME_US = 70.0

# Fit value matched to the observed bulk dynamics, not a measured quantity.
SUGGESTED_DEPHASING_TIME_US = 30.0

# Exposure time for the chiral-symmetry-breaking scan.
PROTECTION_PROBE_TIME_US = 2.5

# kHz x us -> cycles.
KHZ_US_TO_CYCLES = 1e-3
