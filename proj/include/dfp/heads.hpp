#ifndef DFP_HEADS_HPP
#define DFP_HEADS_HPP

#include <array>

#include "dfp/ops.hpp"
#include "dfp/params.hpp"

namespace dfp {

// Four separable-filter blocks on top of the 64-channel feature tensor, one
// per output bank (horizontal/vertical x two inputs). Each block is four 3x3
// convolutions, 64 channels until the last maps to the 8 filter taps; the
// first three use LeakyReLU, the last is linear.
struct AsfHeadParams {
    std::array<std::array<int, 4>, 4> w;  // [bank][layer]
    std::array<std::array<int, 4>, 4> b;
    double slope = 0.1;
};

struct FilterBankVars {
    Var fh1, fv1, fh2, fv2;  // each (B,8,H,W)
};

AsfHeadParams asf_register(ParamStore& store, const std::string& prefix, double slope,
                           Rng& rng);
FilterBankVars asf_forward(Tape& t, const std::vector<Var>& bound, const AsfHeadParams& p,
                           Var features);

// Two affine-parameter blocks with the same layout but Tanh activation
// throughout; the final Tanh bounds every parameter to (-1,1). Outputs are
// (B,3,H,W): isotropic scale, horizontal translation, vertical translation.
struct AffineHeadParams {
    std::array<std::array<int, 4>, 2> w;  // [input][layer]
    std::array<std::array<int, 4>, 2> b;
};

struct AffineFieldVars {
    Var theta1, theta2;
};

AffineHeadParams affine_register(ParamStore& store, const std::string& prefix, Rng& rng);
AffineFieldVars affine_forward(Tape& t, const std::vector<Var>& bound,
                               const AffineHeadParams& p, Var features);

}  // namespace dfp

#endif
