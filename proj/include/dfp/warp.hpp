#ifndef DFP_WARP_HPP
#define DFP_WARP_HPP

#include <array>

#include "dfp/tape.hpp"

namespace dfp {

// Coordinate convention, fixed here and reused by every sampler:
// normalized coordinates live in [-1,1]; unnormalize maps -1 to the left/top
// image EDGE (continuous coordinate 0) and +1 to the right/bottom edge
// (coordinate = extent). Pixel k's center sits at continuous coordinate
// k + 0.5, so sampling positions in pixel units are unnormalize(u) - 0.5.
// The grid puts cell (x,y) exactly at its own pixel center, so an identity
// affine field samples every pixel exactly.
double unnormalize(double u, int extent);
double normalize_coord(double continuous, int extent);

// (2,H,W): channel 0 = normalized horizontal coordinate, 1 = vertical.
Tensor make_grid(int H, int W);

// theta (B,3,H,W): isotropic scale, horizontal translation, vertical
// translation -> warped coordinates S (B,2,H,W):
//   S0 = theta0*G0 + theta1,  S1 = theta0*G1 + theta2
Var grid_generate(Tape& t, Var theta);

// Per-pixel outer product of two length-8 filter banks: fh,fv (B,8,H,W) ->
// (B,64,H,W) where channel r*8+q = fv[r]*fh[q] (r = vertical tap index,
// q = horizontal).
Var outer_field(Tape& t, Var fh, Var fv);

// Single-pixel variant, row r / column q layout as above.
std::array<double, 64> outer_kernel(const std::array<double, 8>& fh,
                                    const std::array<double, 8>& fv);

// Motion compensation with local convolution: applies the per-pixel 8x8
// kernel to the region centered at the warped coordinate. Tap offsets cover
// [-3,+4] around floor of the pixel-unit sampling position; samples outside
// the patch replicate the nearest border pixel.
//
// Backward: kernel and patch gradients are exact; coordinate gradients use
// the forward-difference surrogate dV/dx ~ V(x+1,y) - V(x,y) (zero at the
// right/bottom border), scaled by the unnormalization factor.
Var mclc(Tape& t, Var patch, Var kfield, Var sfield);

// Bilinear warp of patch by the coordinate field (exact sub-gradients for
// both patch and coordinates; border taps replicate).
Var bilinear_sample(Tape& t, Var patch, Var sfield);

// Per-pixel displacement implied by a coordinate field, in pixels:
// channel 0 = dx, 1 = dy. Used for motion-field dumps.
Tensor motion_field_pixels(const Tensor& sfield);

}  // namespace dfp

#endif
