#include "dfp/unet.hpp"

#include <cmath>
#include <stdexcept>

namespace dfp {

constexpr int UNetConfig::depth_channels[6][5];
constexpr int UNetConfig::depth_input[6];

namespace {

int register_conv(ParamStore& store, const std::string& name, int cin, int cout, double slope,
                  Rng& rng, std::array<int, 5>& wrow, std::array<int, 5>& brow, int layer) {
    Tensor w(Shape{cout, cin, 3, 3});
    double std = std::sqrt(2.0 / ((1.0 + slope * slope) * cin * 9));
    for (auto& x : w.v) x = rng.normal(0.0, std);
    wrow[static_cast<size_t>(layer)] = store.add(name + ".w", std::move(w));
    brow[static_cast<size_t>(layer)] = store.add(name + ".b", Tensor::zeros(Shape{cout}));
    return cout;
}

// five conv+LeakyReLU layers of one depth
Var depth_block(Tape& t, const std::vector<Var>& bound, const UNetParams& p, int depth,
                Var x) {
    int cin = depth == 0 ? p.cfg.input_channels : UNetConfig::depth_input[depth];
    Var h = x;
    for (int l = 0; l < 5; ++l) {
        int cout = UNetConfig::depth_channels[depth][l];
        ConvSpec spec(cin, cout, 1, p.cfg.dilations[static_cast<size_t>(l)]);
        h = conv2d(t, h, bound[static_cast<size_t>(p.w[depth][l])],
                   bound[static_cast<size_t>(p.b[depth][l])], spec);
        h = leaky_relu(t, h, p.cfg.leaky_slope);
        cin = cout;
    }
    return h;
}

}  // namespace

UNetParams unet_register(ParamStore& store, const std::string& prefix, const UNetConfig& cfg,
                         Rng& rng) {
    UNetParams p;
    p.cfg = cfg;
    static const char* depth_names[6] = {"d1l", "d2l", "d3l", "d3r", "d2r", "d1r"};
    for (int d = 0; d < 6; ++d) {
        int cin = d == 0 ? cfg.input_channels : UNetConfig::depth_input[d];
        for (int l = 0; l < 5; ++l) {
            int cout = UNetConfig::depth_channels[d][l];
            cin = register_conv(store,
                                prefix + "." + depth_names[d] + ".conv" + std::to_string(l),
                                cin, cout, cfg.leaky_slope, rng, p.w[static_cast<size_t>(d)],
                                p.b[static_cast<size_t>(d)], l);
        }
    }
    return p;
}

Var unet_forward(Tape& t, const std::vector<Var>& bound, const UNetParams& p, Var x) {
    const Tensor& vx = t.val(x);
    if (vx.rank() != 4 || vx.dim(1) != p.cfg.input_channels)
        throw std::invalid_argument("unet_forward: expected (B," +
                                    std::to_string(p.cfg.input_channels) + ",H,W), got " +
                                    shape_str(vx.shape));
    if (vx.dim(2) % 8 || vx.dim(3) % 8 || vx.dim(2) < 16 || vx.dim(3) < 16)
        throw std::invalid_argument("unet_forward: patch extents must be multiples of 8 and "
                                    ">= 16, got " +
                                    shape_str(vx.shape));
    Var e1 = depth_block(t, bound, p, 0, x);                    // 32 @ full
    Var e2 = depth_block(t, bound, p, 1, avg_pool2(t, e1));     // 64 @ 1/2
    Var e3 = depth_block(t, bound, p, 2, avg_pool2(t, e2));     // 96 @ 1/4
    Var bneck = depth_block(t, bound, p, 3, avg_pool2(t, e3));  // 96 @ 1/8
    Var d2 = depth_block(t, bound, p, 4, add(t, bilinear_upsample2(t, bneck), e3));  // 64 @ 1/4
    Var d1 = depth_block(t, bound, p, 5, add(t, bilinear_upsample2(t, d2), e2));     // 32 @ 1/2
    return concat_ch(t, {bilinear_upsample2(t, d1), e1});  // 64 @ full
}

std::array<int, 6> unet_receptive_fields(const UNetConfig& cfg) {
    int dsum = 0;
    for (int d : cfg.dilations) dsum += d;
    int block = 1 + 2 * dsum;
    static const int scale[6] = {1, 2, 4, 8, 4, 2};
    std::array<int, 6> rf;
    for (int d = 0; d < 6; ++d) rf[static_cast<size_t>(d)] = block * scale[d];
    return rf;
}

}  // namespace dfp
