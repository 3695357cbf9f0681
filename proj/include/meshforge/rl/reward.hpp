#pragma once

#include "meshforge/mesh/patch.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace meshforge::rl {

enum class RewardVariant { Original, AdaptivePenalty, Advancement, AdvancementPlusAdaptive, GmsnetStyle };

inline RewardVariant reward_variant_from_string(const std::string& s) {
    if (s == "original") return RewardVariant::Original;
    if (s == "adaptive_penalty") return RewardVariant::AdaptivePenalty;
    if (s == "advancement") return RewardVariant::Advancement;
    if (s == "advancement_plus_adaptive" || s == "adv+adaptive") return RewardVariant::AdvancementPlusAdaptive;
    if (s == "gmsnet_style") return RewardVariant::GmsnetStyle;
    throw std::invalid_argument("unknown reward variant '" + s + "'");
}

inline std::string to_string(RewardVariant v) {
    switch (v) {
        case RewardVariant::Original: return "original";
        case RewardVariant::AdaptivePenalty: return "adaptive_penalty";
        case RewardVariant::Advancement: return "advancement";
        case RewardVariant::AdvancementPlusAdaptive: return "advancement_plus_adaptive";
        case RewardVariant::GmsnetStyle: return "gmsnet_style";
    }
    return "?";
}

inline constexpr std::array<RewardVariant, 5> all_reward_variants{
    RewardVariant::Original, RewardVariant::AdaptivePenalty, RewardVariant::Advancement,
    RewardVariant::AdvancementPlusAdaptive, RewardVariant::GmsnetStyle};

struct RewardConfig {
    RewardVariant variant = RewardVariant::AdvancementPlusAdaptive;
    double gamma = 0.99;
};

/// Plain potential: min q~, or -1 as soon as any element is invalid.
inline double phi_original(const NodePatch& p, const Vec3& center) {
    return all_valid_at(p, center) ? phi_at(p, center, false) : -1.0;
}

/// Adaptive-penalty potential: invalid elements count as -q~.
inline double phi_adaptive(const NodePatch& p, const Vec3& center) { return phi_at(p, center, true); }

/// gamma * next - prev, arranged so a no-op gives exactly (gamma - 1) * prev.
inline double advancement(double gamma, double prev, double next) { return (gamma - 1.0) * next + (next - prev); }

/// Reward for moving the free node from `before` to `after`.
inline double smooth_reward(const RewardConfig& cfg, const NodePatch& p, const Vec3& before, const Vec3& after) {
    switch (cfg.variant) {
        case RewardVariant::Original:
        case RewardVariant::GmsnetStyle: return phi_original(p, after);
        case RewardVariant::AdaptivePenalty: return phi_adaptive(p, after);
        case RewardVariant::Advancement: return advancement(cfg.gamma, phi_original(p, before), phi_original(p, after));
        case RewardVariant::AdvancementPlusAdaptive:
            return advancement(cfg.gamma, phi_adaptive(p, before), phi_adaptive(p, after));
    }
    return 0.0;
}

inline constexpr int max_ring = 14;
inline constexpr int action_slots = max_ring + 1;

/// Slot 0 is the no-op, slots 1..N flip the edge to ring node i.
inline std::array<double, action_slots> build_action_mask(int ring_size) {
    if (ring_size < 1 || ring_size > max_ring) {
        throw std::out_of_range("ring size " + std::to_string(ring_size) + " outside [1, " +
                                std::to_string(max_ring) + "]");
    }
    std::array<double, action_slots> m{};
    for (int i = 0; i <= ring_size; ++i) m[static_cast<std::size_t>(i)] = 1.0;
    return m;
}

inline constexpr double flip_improved = 1.0;
inline constexpr double flip_noop = -0.1;
inline constexpr double flip_worse = -1.0;

}  // namespace meshforge::rl
