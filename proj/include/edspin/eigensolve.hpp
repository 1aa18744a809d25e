#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "edspin/secondq.hpp"

namespace edspin {

// Per-state spin annotation filled in by assign_spin.
struct StateLabel {
    double s = -1.0;            // total spin quantum number
    int multiplicity = 0;       // 2S+1
    double s2_expectation = 0.0;
    bool contaminated = false;  // re-diagonalization in S^2 was needed
    std::optional<double> sz;   // sector Sz when known
};

// Eigenpairs in ascending order. Columns of `vectors` are orthonormal in
// the sector basis; residual and orthonormality contracts are enforced at
// construction time by diagonalize().
struct Spectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<StateLabel> labels; // empty until assign_spin

    std::int64_t size() const { return values.size(); }
};

inline constexpr int dense_eig_threshold = 4000;

struct DiagonalizeOptions {
    // Residual contract: |H v - lambda v| < residual_tol * max(1, |lambda|).
    double residual_tol = 1e-9;
    // Iterative-path controls.
    int max_matvecs = 200000;
    int block_size = 64; // Krylov sweep size per restart
};

// k lowest eigenpairs (k < 0 means all). Dense path for dim <=
// dense_eig_threshold, Lanczos with full reorthogonalization above.
// Throws SolverError on non-convergence, reporting the best residual.
Spectrum diagonalize(const OperatorMatrix& op, int k = -1,
                     const DiagonalizeOptions& opts = {});

// Iterative path regardless of dimension (exposed for cross-checks).
Spectrum diagonalize_lanczos(const OperatorMatrix& op, int k,
                             const DiagonalizeOptions& opts = {});

// Maximal runs of ascending values with consecutive gaps < tol.
std::vector<std::vector<int>> group_degenerate(const Eigen::VectorXd& values, double tol);

inline constexpr double default_degeneracy_tol = 1e-8; // hartree
inline constexpr double default_spin_tol = 1e-6;       // on S(S+1)

// Label states with S from <v|S^2|v>. States off any S(S+1) by more than
// tol get their degenerate group re-diagonalized in S^2 first; failure to
// land on a spin value afterwards raises LabelingError. Eigenvectors may
// be rotated within degenerate groups (energy content is preserved).
Spectrum assign_spin(const Spectrum& spec, const OperatorMatrix& s2, double tol = default_spin_tol,
                     double degeneracy_tol = default_degeneracy_tol,
                     std::optional<double> sector_sz = std::nullopt);

// Round x to the nearest s(s+1) with s a non-negative half-integer.
double nearest_spin_value(double s2_expectation);

} // namespace edspin
