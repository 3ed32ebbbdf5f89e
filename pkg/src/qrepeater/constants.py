"""Physical constants used across the package.

=====================  ======================  ==========================
name                   value                   unit
=====================  ======================  ==========================
BOLTZMANN              1.380649e-23            J/K (exact, SI 2019)
SPEED_OF_LIGHT         299792458.0             m/s (exact)
ATOMIC_MASS_UNIT       1.66053906660e-27       kg
RB87_MASS              1.443160648e-25         kg (86.909180527 u)
RB87_D1_WAVELENGTH     794.978851e-9           m (vacuum)
RB87_HYPERFINE         6.834682611e9           Hz (ground-state splitting)
FIBER_SPEED_KM_S       2.0e5                   km/s (silica group velocity)
=====================  ======================  ==========================
"""

BOLTZMANN = 1.380649e-23
SPEED_OF_LIGHT = 299792458.0
ATOMIC_MASS_UNIT = 1.66053906660e-27
RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT
RB87_D1_WAVELENGTH = 794.978851e-9
RB87_HYPERFINE = 6.834682611e9
FIBER_SPEED_KM_S = 2.0e5
