#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace edspin {

enum class Spin : std::uint8_t { up, down };

// At most 32 spatial orbitals so each spin channel fits one machine word.
inline constexpr int max_orbitals = 32;

// Occupation-number state of one many-electron basis element. Bit p of
// alpha/beta is the up/down occupation of spatial orbital p. Spin orbitals
// are ordered all-up (ascending orbital) then all-down; every fermionic
// phase in the library derives from that single convention.
struct Determinant {
    std::uint32_t alpha = 0;
    std::uint32_t beta = 0;

    friend bool operator==(const Determinant&, const Determinant&) = default;

    // Lexicographic on (alpha, beta) as unsigned integers; fixes basis order.
    friend bool operator<(const Determinant& a, const Determinant& b) {
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.beta < b.beta;
    }

    std::uint32_t& channel(Spin s) { return s == Spin::up ? alpha : beta; }
    std::uint32_t channel(Spin s) const { return s == Spin::up ? alpha : beta; }

    bool occupied(int orb, Spin s) const { return (channel(s) >> orb) & 1u; }
    int n_alpha() const { return std::popcount(alpha); }
    int n_beta() const { return std::popcount(beta); }
    int n_electrons() const { return n_alpha() + n_beta(); }
    double sz() const { return 0.5 * (n_alpha() - n_beta()); }
};

struct DeterminantHash {
    std::size_t operator()(const Determinant& d) const noexcept {
        std::uint64_t key = (std::uint64_t(d.alpha) << 32) | d.beta;
        key ^= key >> 33;
        key *= 0xff51afd7ed558ccdULL;
        key ^= key >> 33;
        return static_cast<std::size_t>(key);
    }
};

// Orbital/electron bookkeeping of one (N, Sz) sector.
struct SectorSpec {
    int norb = 0;
    int nalpha = 0;
    int nbeta = 0;

    friend bool operator==(const SectorSpec&, const SectorSpec&) = default;

    int n_electrons() const { return nalpha + nbeta; }
    double sz() const { return 0.5 * (nalpha - nbeta); }

    // Throws ParameterError when counts are inconsistent.
    void validate() const;

    // C(norb, nalpha) * C(norb, nbeta).
    std::size_t dimension() const;
};

std::uint64_t binomial(int n, int k);

// Immutable ordered determinant list with O(1) index lookup. Construction
// is single-threaded; afterwards safe for concurrent reads.
class SectorBasis {
public:
    SectorBasis() = default;

    // All determinants of the sector, lexicographic on (alpha, beta).
    static SectorBasis full(const SectorSpec& spec);

    // Restriction to an explicit determinant list (sorted and de-duplicated
    // here). Every determinant must be consistent with the spec.
    static SectorBasis from_determinants(const SectorSpec& spec, std::vector<Determinant> dets);

    const SectorSpec& spec() const { return spec_; }
    const std::vector<Determinant>& determinants() const { return dets_; }
    std::size_t size() const { return dets_.size(); }
    const Determinant& det(std::size_t i) const { return dets_[i]; }

    // -1 when absent.
    std::int64_t index_of(const Determinant& d) const {
        auto it = index_.find(d);
        return it == index_.end() ? -1 : it->second;
    }

private:
    SectorSpec spec_{};
    std::vector<Determinant> dets_;
    std::unordered_map<Determinant, std::int64_t, DeterminantHash> index_;

    void build_index();
};

SectorBasis build_sector_basis(const SectorSpec& spec);

struct ExcitationResult {
    Determinant det;
    int phase = 1; // +1 or -1
};

// Elementary second-quantized operators; phases count occupied spin
// orbitals below the target position in the global up-then-down order.
std::optional<ExcitationResult> apply_create(const Determinant& d, int orb, Spin s);
std::optional<ExcitationResult> apply_annihilate(const Determinant& d, int orb, Spin s);

// a^dag_{p,s} a_{q,s}; null when Pauli-blocked.
std::optional<ExcitationResult> apply_excitation(const Determinant& d, int p, int q, Spin s);

// Occupied orbital indices of one channel, ascending.
std::vector<int> occupied_orbitals(std::uint32_t channel_bits);

// "1011..." with orbital 0 leftmost; norb characters.
std::string bits_to_string(std::uint32_t bits, int norb);

Determinant make_determinant(const std::vector<int>& alpha_occ, const std::vector<int>& beta_occ);

} // namespace edspin
