#pragma once

namespace edspin {

// All operator assembly works in hartree; reports use wavenumbers.
inline constexpr double cm1_per_hartree = 219474.6313632;

inline constexpr double cm1_to_hartree(double e_cm1) { return e_cm1 / cm1_per_hartree; }
inline constexpr double hartree_to_cm1(double e_h) { return e_h * cm1_per_hartree; }

} // namespace edspin
