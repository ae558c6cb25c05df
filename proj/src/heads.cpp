#include "dfp/heads.hpp"

#include <cmath>

namespace dfp {

namespace {

void register_block(ParamStore& store, const std::string& prefix, int out_last, double slope,
                    Rng& rng, std::array<int, 4>& wrow, std::array<int, 4>& brow) {
    int chans[5] = {64, 64, 64, 64, out_last};
    for (int l = 0; l < 4; ++l) {
        int cin = chans[l], cout = chans[l + 1];
        Tensor w(Shape{cout, cin, 3, 3});
        double std = std::sqrt(2.0 / ((1.0 + slope * slope) * cin * 9));
        for (auto& x : w.v) x = rng.normal(0.0, std);
        wrow[static_cast<size_t>(l)] =
            store.add(prefix + ".conv" + std::to_string(l) + ".w", std::move(w));
        brow[static_cast<size_t>(l)] =
            store.add(prefix + ".conv" + std::to_string(l) + ".b", Tensor::zeros(Shape{cout}));
    }
}

Var run_block(Tape& t, const std::vector<Var>& bound, const std::array<int, 4>& w,
              const std::array<int, 4>& b, int out_last, Var x, double slope, bool use_tanh) {
    int chans[5] = {64, 64, 64, 64, out_last};
    Var h = x;
    for (int l = 0; l < 4; ++l) {
        ConvSpec spec(chans[l], chans[l + 1], 1, 1);
        h = conv2d(t, h, bound[static_cast<size_t>(w[static_cast<size_t>(l)])],
                   bound[static_cast<size_t>(b[static_cast<size_t>(l)])], spec);
        if (use_tanh)
            h = tanh_act(t, h);
        else if (l < 3)
            h = leaky_relu(t, h, slope);  // last layer linear
    }
    return h;
}

}  // namespace

AsfHeadParams asf_register(ParamStore& store, const std::string& prefix, double slope,
                           Rng& rng) {
    AsfHeadParams p;
    p.slope = slope;
    static const char* names[4] = {"fh1", "fv1", "fh2", "fv2"};
    for (int k = 0; k < 4; ++k)
        register_block(store, prefix + "." + names[k], 8, slope, rng,
                       p.w[static_cast<size_t>(k)], p.b[static_cast<size_t>(k)]);
    return p;
}

FilterBankVars asf_forward(Tape& t, const std::vector<Var>& bound, const AsfHeadParams& p,
                           Var features) {
    FilterBankVars out;
    out.fh1 = run_block(t, bound, p.w[0], p.b[0], 8, features, p.slope, false);
    out.fv1 = run_block(t, bound, p.w[1], p.b[1], 8, features, p.slope, false);
    out.fh2 = run_block(t, bound, p.w[2], p.b[2], 8, features, p.slope, false);
    out.fv2 = run_block(t, bound, p.w[3], p.b[3], 8, features, p.slope, false);
    return out;
}

AffineHeadParams affine_register(ParamStore& store, const std::string& prefix, Rng& rng) {
    AffineHeadParams p;
    static const char* names[2] = {"theta1", "theta2"};
    for (int k = 0; k < 2; ++k)
        register_block(store, prefix + "." + names[k], 3, 0.1, rng,
                       p.w[static_cast<size_t>(k)], p.b[static_cast<size_t>(k)]);
    return p;
}

AffineFieldVars affine_forward(Tape& t, const std::vector<Var>& bound,
                               const AffineHeadParams& p, Var features) {
    AffineFieldVars out;
    out.theta1 = run_block(t, bound, p.w[0], p.b[0], 3, features, 0.0, true);
    out.theta2 = run_block(t, bound, p.w[1], p.b[1], 3, features, 0.0, true);
    return out;
}

}  // namespace dfp
