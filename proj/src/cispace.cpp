#include "edspin/cispace.hpp"

#include <algorithm>
#include <bit>

#include "edspin/errors.hpp"

namespace edspin {

namespace {

std::uint32_t block_mask(const std::vector<int>& orbitals) {
    std::uint32_t m = 0;
    for (int p : orbitals) m |= (1u << p);
    return m;
}

// All ways to place k electrons on the given orbitals, as bit masks in
// ascending integer order.
std::vector<std::uint32_t> block_combinations(const std::vector<int>& orbitals, int k) {
    std::vector<std::uint32_t> out;
    const int n = static_cast<int>(orbitals.size());
    if (k < 0 || k > n) return out;
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::uint32_t mask = 0;
        for (int i : pick) mask |= (1u << orbitals[static_cast<std::size_t>(i)]);
        out.push_back(mask);
        int i = k - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

void OrbitalPartition::validate() const {
    const std::uint32_t mi = block_mask(inactive);
    const std::uint32_t ma = block_mask(active);
    const std::uint32_t mv = block_mask(virt);
    if (std::popcount(mi) != static_cast<int>(inactive.size()) ||
        std::popcount(ma) != static_cast<int>(active.size()) ||
        std::popcount(mv) != static_cast<int>(virt.size()))
        throw ParameterError("OrbitalPartition: duplicate orbital inside a block");
    if ((mi & ma) || (mi & mv) || (ma & mv))
        throw ParameterError("OrbitalPartition: blocks overlap");
    const int n = norb();
    const std::uint32_t expect = (n == 32) ? ~0u : ((1u << n) - 1u);
    if ((mi | ma | mv) != expect)
        throw ParameterError("OrbitalPartition: blocks must cover orbitals 0..norb-1");
}

std::string to_string(CILevel level) {
    switch (level) {
        case CILevel::cas: return "CAS";
        case CILevel::cas_s: return "CAS+S";
        case CILevel::ddc2: return "CAS+DDC2";
        case CILevel::ddci: return "CAS+DDCI";
        case CILevel::fci: return "FCI";
    }
    return "?";
}

bool class_admitted(CILevel level, const ExcitationClass& cls) {
    const int h = cls.holes, p = cls.particles;
    if (h < 0 || p < 0) return false;
    switch (level) {
        case CILevel::cas: return h == 0 && p == 0;
        case CILevel::cas_s: return h <= 1 && p <= 1;
        case CILevel::ddc2: return (h <= 1 && p <= 1) || (h == 2 && p == 0) || (h == 0 && p == 2);
        case CILevel::ddci: return h <= 2 && p <= 2 && !(h == 2 && p == 2);
        case CILevel::fci: return true;
    }
    return false;
}

ExcitationClass classify(const Determinant& det, const OrbitalPartition& part) {
    const std::uint32_t mi = block_mask(part.inactive);
    const std::uint32_t mv = block_mask(part.virt);
    const int n_inactive = std::popcount(det.alpha & mi) + std::popcount(det.beta & mi);
    const int n_virtual = std::popcount(det.alpha & mv) + std::popcount(det.beta & mv);
    return ExcitationClass{2 * static_cast<int>(part.inactive.size()) - n_inactive, n_virtual};
}

CISpace generate(const OrbitalPartition& part, CILevel level, const SectorSpec& spec) {
    part.validate();
    spec.validate();
    if (part.norb() != spec.norb)
        throw ParameterError("generate: partition and sector disagree on norb");

    const int n_inact = static_cast<int>(part.inactive.size());
    const int n_act = static_cast<int>(part.active.size());
    const int n_virt = static_cast<int>(part.virt.size());
    const int n_elec = spec.n_electrons();
    if (n_elec > 2 * spec.norb)
        throw ParameterError("generate: electron count exceeds orbital capacity");

    const int max_holes = (level == CILevel::fci) ? 2 * n_inact : std::min(2, 2 * n_inact);
    const int max_parts = (level == CILevel::fci) ? 2 * n_virt : std::min(2, 2 * n_virt);

    std::vector<Determinant> dets;
    for (int holes = 0; holes <= max_holes; ++holes)
        for (int parts = 0; parts <= max_parts; ++parts) {
            if (!class_admitted(level, ExcitationClass{holes, parts})) continue;
            const int n_i = 2 * n_inact - holes;  // electrons left in the inactive block
            const int n_v = parts;
            const int n_a = n_elec - n_i - n_v;
            if (n_i < 0 || n_a < 0 || n_a > 2 * n_act) continue;

            // Channel-resolved distribution over the blocks.
            for (int ia = std::max(0, n_i - n_inact); ia <= std::min(n_inact, n_i); ++ia) {
                const int ib = n_i - ia;
                if (ib < 0 || ib > n_inact) continue;
                for (int va = std::max(0, n_v - n_virt); va <= std::min(n_virt, n_v); ++va) {
                    const int vb = n_v - va;
                    if (vb < 0 || vb > n_virt) continue;
                    const int aa = spec.nalpha - ia - va;
                    const int ab = spec.nbeta - ib - vb;
                    if (aa < 0 || aa > n_act || ab < 0 || ab > n_act) continue;
                    if (aa + ab != n_a) continue;

                    const auto ia_masks = block_combinations(part.inactive, ia);
                    const auto ib_masks = block_combinations(part.inactive, ib);
                    const auto aa_masks = block_combinations(part.active, aa);
                    const auto ab_masks = block_combinations(part.active, ab);
                    const auto va_masks = block_combinations(part.virt, va);
                    const auto vb_masks = block_combinations(part.virt, vb);
                    for (std::uint32_t m_ia : ia_masks)
                        for (std::uint32_t m_aa : aa_masks)
                            for (std::uint32_t m_va : va_masks)
                                for (std::uint32_t m_ib : ib_masks)
                                    for (std::uint32_t m_ab : ab_masks)
                                        for (std::uint32_t m_vb : vb_masks)
                                            dets.push_back(Determinant{m_ia | m_aa | m_va,
                                                                       m_ib | m_ab | m_vb});
                }
            }
        }

    CISpace space;
    space.partition = part;
    space.level = level;
    space.basis = SectorBasis::from_determinants(spec, std::move(dets));
    if (space.basis.size() == 0 && spec.dimension() > 0 && level == CILevel::fci)
        throw ParameterError("generate: electron count inconsistent with partition capacity");
    return space;
}

} // namespace edspin
