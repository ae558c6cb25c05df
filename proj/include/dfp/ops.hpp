#ifndef DFP_OPS_HPP
#define DFP_OPS_HPP

#include <vector>

#include "dfp/tape.hpp"

namespace dfp {

// 3x3 convolution descriptor. Padding defaults to the dilation so stride-1
// layers preserve spatial extent; stride 2 halves even extents exactly.
struct ConvSpec {
    int in_channels = 0;
    int out_channels = 0;
    int stride = 1;
    int dilation = 1;
    int padding = 1;

    ConvSpec() = default;
    ConvSpec(int in_ch, int out_ch, int stride_ = 1, int dilation_ = 1);

    int out_extent(int in_extent) const;
    static constexpr int kernel = 3;
};

// Elementwise / reductions. Scalar results are shape-(1) tensors.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var sum(Tape& t, Var a);
Var mean(Tape& t, Var a);
Var sum_sq(Tape& t, Var a);
Var sum_abs(Tape& t, Var a);
Var leaky_relu(Tape& t, Var a, double slope);
Var tanh_act(Tape& t, Var a);

// Concatenate (B,Ci,H,W) tensors along the channel axis.
Var concat_ch(Tape& t, const std::vector<Var>& parts);

// Cross-correlation with zero padding; weights (Cout,Cin,3,3), bias (Cout).
Var conv2d(Tape& t, Var x, Var w, Var b, const ConvSpec& spec);

// 2x2 average pooling; both spatial extents must be even.
Var avg_pool2(Tape& t, Var x);

// Top-left spatial crop to (H2,W2).
Var crop_spatial(Tape& t, Var x, int H2, int W2);

// Bilinear x2 up-sampling, half-pixel-center convention (the same convention
// used by the samplers in warp.hpp).
Var bilinear_upsample2(Tape& t, Var x);

}  // namespace dfp

#endif
