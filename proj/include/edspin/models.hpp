#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edspin/eigensolve.hpp"
#include "edspin/ligandfield.hpp"
#include "edspin/secondq.hpp"
#include "edspin/spinproj.hpp"

namespace edspin {

// Metal + two-radical model: a d6 ion (orbitals 0-4, real cubic order) in
// an octahedral field, coupled to two singly occupied ligand orbitals
// (5 and 6). Eight electrons in seven orbitals.
struct SpinmerismParams {
    RacahParameters rp;
    double dq_cm1 = 0.0;
    double eps_l_cm1 = 0.0;  // ligand orbital energy relative to t2g
    double u_l_cm1 = 0.0;    // on-ligand repulsion
    double t_ml_cm1 = 0.0;   // eg-ligand hopping (5 <-> dz2, 6 <-> dx2-y2)
    double k_ml_cm1 = 0.0;   // direct metal-ligand exchange, every d orbital
    double k_ll_cm1 = 0.0;   // direct ligand-ligand exchange

    // Regime producing a low-spin ground state with the quintet pair a few
    // thousand wavenumbers up. Charge-conserving by default (no hopping).
    static SpinmerismParams defaults();
};

inline constexpr int spinmerism_norb = 7;
inline constexpr int nominal_metal_electrons = 6;

Fragment metal_fragment();
Fragment ligand_fragment();
SectorSpec spinmerism_sector(); // 8 electrons, Sz = 0

IntegralSet build_spinmerism(const SpinmerismParams& params);

// ---------------------------------------------------------------------------
// Shared per-basis machinery: the S^2 eigenbasis does not depend on model
// parameters, so sweeps reuse it. Diagonalizing H inside one spin block is
// exact because H commutes with S^2.
class SpinBlockWorkspace {
public:
    explicit SpinBlockWorkspace(SectorBasis basis);

    const SectorBasis& basis() const { return basis_; }
    const SpinProjectorSet& total_spin() const { return total_; }
    const OperatorMatrix& s2() const { return s2_; }

    std::vector<double> spin_values() const;

    // k lowest eigenpairs of h restricted to the S = s block, lifted back
    // to the full sector and labeled (k < 0: whole block).
    Spectrum solve_spin_block(const OperatorMatrix& h, double s, int k = -1) const;

    // k lowest states across all spin blocks, merged ascending and labeled.
    Spectrum solve_lowest(const OperatorMatrix& h, int k) const;

private:
    SectorBasis basis_;
    SpinProjectorSet total_;
    OperatorMatrix s2_;
};

// Workspace bundle for the spinmerism model (adds fragment projector sets).
struct SpinmerismWorkspace {
    SpinBlockWorkspace blocks;
    SpinProjectorSet metal;
    SpinProjectorSet ligand;

    SpinmerismWorkspace();
};

// ---------------------------------------------------------------------------
// Parameter sweeps tracking the two lowest total-spin-2 states.
enum class SweepParameter { dq, k_ml, t_ml, eps_l };

std::string to_string(SweepParameter p);

struct SweepStateSample {
    double energy_cm1 = 0.0; // relative to the ground state at this point
    JointWeights weights;
};

struct SweepPoint {
    double value = 0.0; // swept parameter (cm-1)
    SweepStateSample q1, q2;
    double gap_cm1 = 0.0;
};

struct SpinmerismSweep {
    SweepParameter vary = SweepParameter::dq;
    std::vector<SweepPoint> points;
    int min_gap_index = 0;
    double min_gap_cm1 = 0.0;
    // Swept value where the dominant metal spin of the lower state changes,
    // when it does.
    std::optional<double> weight_exchange_value;
};

SpinmerismSweep sweep_spinmerism(const SpinmerismParams& params, SweepParameter vary, double lo,
                                 double hi, int points, const SpinmerismWorkspace& ws);

// Re-solve a single sweep point (used by crossing refinement).
SweepPoint solve_spinmerism_point(const SpinmerismParams& params, SweepParameter vary,
                                  double value, const SpinmerismWorkspace& ws);

SpinmerismParams with_parameter(SpinmerismParams params, SweepParameter vary, double value);

// ---------------------------------------------------------------------------
// Two-spin Heisenberg realization H = -2J s1.s2 on two orbitals with direct
// exchange K = J; ionic determinants pushed away by a fixed large on-site
// repulsion so the singlet-triplet gap is exactly 2J.
inline constexpr double heisenberg_ionic_u_cm1 = 1e6;

IntegralSet build_heisenberg_dimer(double j_cm1);

struct HeisenbergFit {
    double j_cm1 = 0.0;       // H = -2J s1.s2 convention
    double residual_cm1 = 0.0; // max deviation from the Lande pattern
};

// J from the labeled spectrum: exact for one singlet/one triplet, least
// squares against E(S) = c - J S(S+1) when more spin values are present.
HeisenbergFit fit_heisenberg(const Spectrum& labeled);

} // namespace edspin
