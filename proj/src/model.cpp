#include "dfp/model.hpp"

#include <stdexcept>

namespace dfp {

const char* direction_name(Direction d) { return d == Direction::uni ? "uni" : "bi"; }

Direction direction_from_name(const std::string& name) {
    if (name == "uni") return Direction::uni;
    if (name == "bi") return Direction::bi;
    throw std::invalid_argument("unknown prediction direction: " + name);
}

FramePredictor::FramePredictor(std::uint64_t seed, Direction dir) : direction(dir) {
    Rng rng(seed);
    kernel_unet_ = unet_register(params, "kernel_unet", unet_cfg, rng);
    asf_ = asf_register(params, "asf", unet_cfg.leaky_slope, rng);
    affine_unet_ = unet_register(params, "affine_unet", unet_cfg, rng);
    affine_ = affine_register(params, "affine", rng);
    grid_ = gridnet_register(params, "synth", grid_cfg, rng);
    ctx = ContextExtractor::make_default(seed ^ 0x9e3779b97f4a7c15ULL);
    // frozen extractor weights travel with the model
    for (size_t l = 0; l < ctx.weights.size(); ++l) {
        params.add("ctx.conv" + std::to_string(l) + ".w", ctx.weights[l], false);
        params.add("ctx.conv" + std::to_string(l) + ".b", ctx.biases[l], false);
    }
}

FramePredictor::ForwardVars FramePredictor::forward(Tape& t, const std::vector<Var>& bound,
                                                    Var p1, Var p2) const {
    const Tensor& v1t = t.val(p1);
    const Tensor& v2t = t.val(p2);
    if (!v1t.same_shape(v2t))
        throw std::invalid_argument("FramePredictor: patch shapes differ, " +
                                    shape_str(v1t.shape) + " vs " + shape_str(v2t.shape));
    if (v1t.rank() != 4 || v1t.dim(1) != 3)
        throw std::invalid_argument("FramePredictor: patches must be (B,3,H,W), got " +
                                    shape_str(v1t.shape));
    Var stacked = concat_ch(t, {p1, p2});

    ForwardVars out;
    Var kfeat = unet_forward(t, bound, kernel_unet_, stacked);
    out.banks = asf_forward(t, bound, asf_, kfeat);
    Var afeat = unet_forward(t, bound, affine_unet_, stacked);
    AffineFieldVars th = affine_forward(t, bound, affine_, afeat);
    out.theta1 = th.theta1;
    out.theta2 = th.theta2;
    out.s1 = grid_generate(t, out.theta1);
    out.s2 = grid_generate(t, out.theta2);

    Var k1 = outer_field(t, out.banks.fh1, out.banks.fv1);
    Var k2 = outer_field(t, out.banks.fh2, out.banks.fv2);
    out.v1 = mclc(t, p1, k1, out.s1);
    out.v2 = mclc(t, p2, k2, out.s2);
    out.b1 = bilinear_sample(t, p1, out.s1);
    out.b2 = bilinear_sample(t, p2, out.s2);

    Var merged = concat_ch(t, {out.v1, out.v2, out.b1, out.b2});
    out.phat = gridnet_forward(t, bound, grid_, merged);
    return out;
}

Tensor FramePredictor::predict(const Tensor& p1, const Tensor& p2) const {
    return predict_with_motion(p1, p2, nullptr, nullptr);
}

Tensor FramePredictor::predict_with_motion(const Tensor& p1, const Tensor& p2, Tensor* motion1,
                                           Tensor* motion2) const {
    Tape t;
    std::vector<Var> bound = params.bind(t, false);
    Var a = t.constant(p1);
    Var b = t.constant(p2);
    ForwardVars fv = forward(t, bound, a, b);
    if (motion1) *motion1 = motion_field_pixels(t.val(fv.s1));
    if (motion2) *motion2 = motion_field_pixels(t.val(fv.s2));
    return t.val(fv.phat);
}

}  // namespace dfp
