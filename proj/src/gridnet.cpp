#include "dfp/gridnet.hpp"

#include <cmath>
#include <stdexcept>

namespace dfp {

namespace {

GridNetParams::Conv register_conv(ParamStore& store, const std::string& name, int cin,
                                  int cout, double slope, Rng& rng) {
    Tensor w(Shape{cout, cin, 3, 3});
    double std = std::sqrt(2.0 / ((1.0 + slope * slope) * cin * 9));
    for (auto& x : w.v) x = rng.normal(0.0, std);
    GridNetParams::Conv c;
    c.w = store.add(name + ".w", std::move(w));
    c.b = store.add(name + ".b", Tensor::zeros(Shape{cout}));
    return c;
}

Var conv(Tape& t, const std::vector<Var>& bound, const GridNetParams::Conv& c, Var x,
         int stride = 1) {
    const Tensor& w = t.val(bound[static_cast<size_t>(c.w)]);
    ConvSpec spec(w.dim(1), w.dim(0), stride, 1);
    return conv2d(t, x, bound[static_cast<size_t>(c.w)], bound[static_cast<size_t>(c.b)],
                  spec);
}

// x + conv(act(conv(x))), LeakyReLU between the two convolutions
Var lateral(Tape& t, const std::vector<Var>& bound, const GridNetParams::Conv& a,
            const GridNetParams::Conv& b, Var x, double slope) {
    Var h = conv(t, bound, b, leaky_relu(t, conv(t, bound, a, x), slope));
    return add(t, x, h);
}

}  // namespace

GridNetParams gridnet_register(ParamStore& store, const std::string& prefix,
                               const GridNetConfig& cfg, Rng& rng) {
    GridNetParams p;
    p.cfg = cfg;
    auto [c0, c1, c2] = cfg.row_channels;
    double s = cfg.leaky_slope;
    p.in0 = register_conv(store, prefix + ".in0", cfg.in_channels, c0, s, rng);
    p.in1 = register_conv(store, prefix + ".in1", c0, c0, s, rng);
    p.down0 = register_conv(store, prefix + ".down0", c0, c1, s, rng);
    p.down1 = register_conv(store, prefix + ".down1", c1, c2, s, rng);
    for (int i = 0; i < cfg.down_columns; ++i) {
        GridNetParams::DownCol dc;
        std::string base = prefix + ".dcol" + std::to_string(i);
        dc.lat0 = register_conv(store, base + ".lat0", c0, c0, s, rng);
        dc.lat1 = register_conv(store, base + ".lat1", c0, c0, s, rng);
        dc.d01 = register_conv(store, base + ".d01", c0, c1, s, rng);
        dc.d12 = register_conv(store, base + ".d12", c1, c2, s, rng);
        p.down.push_back(dc);
    }
    for (int i = 0; i < cfg.up_columns; ++i) {
        GridNetParams::UpCol uc;
        std::string base = prefix + ".ucol" + std::to_string(i);
        uc.lat0 = register_conv(store, base + ".lat0", c2, c2, s, rng);
        uc.lat1 = register_conv(store, base + ".lat1", c2, c2, s, rng);
        uc.u21 = register_conv(store, base + ".u21", c2, c1, s, rng);
        uc.u10 = register_conv(store, base + ".u10", c1, c0, s, rng);
        p.up.push_back(uc);
    }
    p.head = register_conv(store, prefix + ".head", c0, 3, s, rng);
    return p;
}

Var gridnet_forward(Tape& t, const std::vector<Var>& bound, const GridNetParams& p,
                    Var stacked) {
    const Tensor& v = t.val(stacked);
    if (v.rank() != 4 || v.dim(1) != p.cfg.in_channels)
        throw std::invalid_argument("gridnet_forward: expected (B," +
                                    std::to_string(p.cfg.in_channels) + ",H,W), got " +
                                    shape_str(v.shape));
    if (v.dim(2) % 4 || v.dim(3) % 4)
        throw std::invalid_argument("gridnet_forward: extents must be divisible by 4, got " +
                                    shape_str(v.shape));
    double s = p.cfg.leaky_slope;
    // entry column
    Var r1 = conv(t, bound, p.in1, leaky_relu(t, conv(t, bound, p.in0, stacked), s));
    Var r2 = conv(t, bound, p.down0, leaky_relu(t, r1, s), 2);
    Var r3 = conv(t, bound, p.down1, leaky_relu(t, r2, s), 2);
    // downward half: refine the top stream, push refinements down
    for (const auto& dc : p.down) {
        r1 = lateral(t, bound, dc.lat0, dc.lat1, r1, s);
        r2 = add(t, r2, conv(t, bound, dc.d01, leaky_relu(t, r1, s), 2));
        r3 = add(t, r3, conv(t, bound, dc.d12, leaky_relu(t, r2, s), 2));
    }
    // upward half: refine the bottom stream, lift it back up
    for (const auto& uc : p.up) {
        r3 = lateral(t, bound, uc.lat0, uc.lat1, r3, s);
        r2 = add(t, r2, conv(t, bound, uc.u21, bilinear_upsample2(t, leaky_relu(t, r3, s))));
        r1 = add(t, r1, conv(t, bound, uc.u10, bilinear_upsample2(t, leaky_relu(t, r2, s))));
    }
    return conv(t, bound, p.head, leaky_relu(t, r1, s));
}

}  // namespace dfp
