#ifndef DFP_MODEL_HPP
#define DFP_MODEL_HPP

#include "dfp/gridnet.hpp"
#include "dfp/heads.hpp"
#include "dfp/loss.hpp"
#include "dfp/unet.hpp"
#include "dfp/warp.hpp"

namespace dfp {

enum class Direction { uni, bi };

const char* direction_name(Direction d);
Direction direction_from_name(const std::string& name);

// Full frame-prediction network: one U-Net + four filter blocks estimates
// the per-pixel separable kernels, a second U-Net + two affine blocks
// estimates the per-pixel affine fields, MCLC and bilinear sampling produce
// four warped patches, and the synthesis grid merges them into the output
// patch. Uni- and bi-directional prediction share this architecture with
// separate weight sets, distinguished by the direction tag stored with the
// weights.
class FramePredictor {
  public:
    FramePredictor(std::uint64_t seed, Direction dir);

    struct ForwardVars {
        Var phat;                 // (B,3,H,W)
        Var theta1, theta2;       // (B,3,H,W)
        Var s1, s2;               // (B,2,H,W)
        Var v1, v2, b1, b2;       // warped patches
        FilterBankVars banks;
    };

    // p1/p2: (B,3,H,W) patches, extents divisible by 8 and >= 16.
    ForwardVars forward(Tape& t, const std::vector<Var>& bound, Var p1, Var p2) const;

    // Convenience: tape-free inference on raw tensors.
    Tensor predict(const Tensor& p1, const Tensor& p2) const;
    // Like predict but also returns the pixel-unit motion fields of both
    // inputs (each (B,2,H,W): dx then dy channels).
    Tensor predict_with_motion(const Tensor& p1, const Tensor& p2, Tensor* motion1,
                               Tensor* motion2) const;

    std::int64_t trainable_parameter_count() const { return params.trainable_scalar_count(); }

    ParamStore params;
    Direction direction;
    ContextExtractor ctx;
    UNetConfig unet_cfg;
    GridNetConfig grid_cfg;

  private:
    UNetParams kernel_unet_, affine_unet_;
    AsfHeadParams asf_;
    AffineHeadParams affine_;
    GridNetParams grid_;
};

}  // namespace dfp

#endif
