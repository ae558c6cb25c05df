#ifndef DFP_UNET_HPP
#define DFP_UNET_HPP

#include <array>

#include "dfp/ops.hpp"
#include "dfp/params.hpp"

namespace dfp {

// Three-depth encoder/decoder with five 3x3 convolutions per depth; the
// third and fourth of each five are dilated (2 and 4). Inner skips add
// matching encoder features into the decoder path; the final feature tensor
// is the upsampled last decoder output concatenated with the Depth1 encoder
// output, giving 64 channels at input resolution.
struct UNetConfig {
    int input_channels = 6;  // two stacked 3-channel patches
    double leaky_slope = 0.1;
    std::array<int, 5> dilations = {1, 1, 2, 4, 1};
    // per-depth output channels of the five layers, encoder then decoder
    static constexpr int depth_channels[6][5] = {
        {32, 32, 64, 96, 32},    {64, 64, 96, 128, 64},  {96, 96, 128, 160, 96},
        {96, 96, 128, 160, 96},  {64, 64, 96, 128, 64},  {32, 32, 64, 96, 32},
    };
    static constexpr int depth_input[6] = {6, 32, 64, 96, 96, 64};  // [0] replaced by input_channels
    static constexpr int output_channels = 64;
};

struct UNetParams {
    // [depth][layer] indices into the ParamStore
    std::array<std::array<int, 5>, 6> w;
    std::array<std::array<int, 5>, 6> b;
    UNetConfig cfg;
};

UNetParams unet_register(ParamStore& store, const std::string& prefix, const UNetConfig& cfg,
                         Rng& rng);

// x is the stacked patch pair (B, input_channels, H, W); H and W must be
// divisible by 8. Returns (B, 64, H, W).
Var unet_forward(Tape& t, const std::vector<Var>& bound, const UNetParams& p, Var x);

// Per-depth receptive field in input pixels: the field of one depth's
// five-layer filter block (1 + 2*sum(dilations)) scaled by that depth's
// spatial downsampling factor {1,2,4,8,4,2}.
std::array<int, 6> unet_receptive_fields(const UNetConfig& cfg);

}  // namespace dfp

#endif
