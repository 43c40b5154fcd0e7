#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "glead/common.hpp"

namespace glead {

// Architectural hyperparameters shared by the generator and discriminator.
// Channel rule: width(res) = min(cap, base/res) / divisor, which reproduces
// the reference 256-resolution table at divisor 1 (128 @ 128, 256 @ 64,
// 512 @ <=32) and scales down for desk configs.
struct ArchConfig {
    int64_t resolution = 64;
    int64_t z_dim = 128;
    int64_t w_dim = 128;
    int64_t channel_base = 16384;
    int64_t channel_cap = 512;
    int64_t channel_divisor = 4;
    int64_t f_resolution = 8;  // 0 = latent-only variant (no spatial representation)
    int64_t mapping_layers = 8;
    int64_t mbstd_group = 4;

    int64_t width(int64_t res) const {
        return std::max<int64_t>(1, std::min(channel_cap, channel_base / res) / channel_divisor);
    }

    std::vector<int64_t> synthesis_resolutions() const {
        std::vector<int64_t> out;
        for (int64_t r = 4; r <= resolution; r *= 2) out.push_back(r);
        return out;
    }

    // Valid entry resolutions for the spatial representation.
    std::vector<int64_t> supported_f_resolutions() const {
        std::vector<int64_t> out;
        for (int64_t r : {resolution / 32, resolution / 16, resolution / 8, resolution / 4})
            if (r >= 4 && std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
        std::sort(out.begin(), out.end());
        return out;
    }

    void validate() const {
        check_config(resolution >= 16 && (resolution & (resolution - 1)) == 0,
                     "resolution must be a power of two >= 16, got ", resolution);
        check_config(z_dim > 0 && w_dim > 0, "latent dimensions must be positive");
        check_config(channel_divisor >= 1, "channel divisor must be >= 1");
        if (f_resolution != 0) {
            auto ok = supported_f_resolutions();
            check_config(std::find(ok.begin(), ok.end(), f_resolution) != ok.end(),
                         "f_resolution ", f_resolution, " unsupported at resolution ", resolution);
        }
        check_config(mapping_layers >= 1, "mapping_layers must be >= 1");
    }
};

}  // namespace glead
