#pragma once

#include <string>
#include <vector>

#include "edspin/fockspace.hpp"

namespace edspin {

// Inactive / active / virtual orbital blocks; disjoint and covering [0, norb).
struct OrbitalPartition {
    std::vector<int> inactive;
    std::vector<int> active;
    std::vector<int> virt;

    int norb() const {
        return static_cast<int>(inactive.size() + active.size() + virt.size());
    }
    // Throws ParameterError when blocks overlap or miss orbitals.
    void validate() const;
};

// Holes counted against a doubly occupied inactive block, particles in the
// virtual block. Values above 2 are representable so determinants outside
// the truncation hierarchy can still be classified.
struct ExcitationClass {
    int holes = 0;
    int particles = 0;

    friend bool operator==(const ExcitationClass&, const ExcitationClass&) = default;
};

enum class CILevel { cas, cas_s, ddc2, ddci, fci };

std::string to_string(CILevel level);

// Admission rule of the truncation ladder:
//   CAS    (0,0)
//   CAS+S  adds (1,0) (0,1) (1,1)
//   DDC2   adds (2,0) (0,2)
//   DDCI   adds (2,1) (1,2)    [everything except two-hole/two-particle]
//   FCI    everything
bool class_admitted(CILevel level, const ExcitationClass& cls);

ExcitationClass classify(const Determinant& det, const OrbitalPartition& part);

struct CISpace {
    OrbitalPartition partition;
    CILevel level = CILevel::cas;
    SectorBasis basis;
};

// Every sector determinant whose excitation class is admitted, enumerated
// constructively block by block; ordering matches SectorBasis (lexicographic).
CISpace generate(const OrbitalPartition& part, CILevel level, const SectorSpec& spec);

} // namespace edspin
