#include "dfp/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// c = a*b for j x j row-major blocks
void matmul_j(int j, const double* a, const double* b, double* c) {
    for (int r = 0; r < j; ++r)
        for (int q = 0; q < j; ++q) {
            double s = 0.0;
            for (int k = 0; k < j; ++k) s += a[r * j + k] * b[k * j + q];
            c[r * j + q] = s;
        }
}

// c = a*b^T
void matmul_jt(int j, const double* a, const double* b, double* c) {
    for (int r = 0; r < j; ++r)
        for (int q = 0; q < j; ++q) {
            double s = 0.0;
            for (int k = 0; k < j; ++k) s += a[r * j + k] * b[q * j + k];
            c[r * j + q] = s;
        }
}

// c = a^T*b
void matmul_tj(int j, const double* a, const double* b, double* c) {
    for (int r = 0; r < j; ++r)
        for (int q = 0; q < j; ++q) {
            double s = 0.0;
            for (int k = 0; k < j; ++k) s += a[k * j + r] * b[k * j + q];
            c[r * j + q] = s;
        }
}

}  // namespace

Tensor dct_matrix(int j) {
    if (j < 1) throw std::invalid_argument("dct_matrix: size must be >= 1");
    Tensor d(Shape{j, j});
    for (int k = 0; k < j; ++k) {
        double ck = k == 0 ? std::sqrt(1.0 / j) : std::sqrt(2.0 / j);
        for (int n = 0; n < j; ++n)
            d.v[static_cast<size_t>(k) * j + n] =
                ck * std::cos(kPi * (2.0 * n + 1.0) * k / (2.0 * j));
    }
    return d;
}

Var satd_loss(Tape& t, Var residual, int j) {
    if (j != 8 && j != 16 && j != 32)
        throw std::invalid_argument("satd_loss: transform size must be 8, 16 or 32");
    const Tensor& r = t.val(residual);
    if (r.rank() != 4)
        throw std::invalid_argument("satd_loss: expected 4-D residual, got " +
                                    shape_str(r.shape));
    int B = r.dim(0), C = r.dim(1), H = r.dim(2), W = r.dim(3);
    int by = H / j, bx = W / j;  // partial blocks discarded
    Tensor d = dct_matrix(j);
    std::vector<double> blk(static_cast<size_t>(j) * j), tmp(blk.size()), coef(blk.size());
    double loss = 0.0;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const double* pc = r.data() + (static_cast<size_t>(b) * C + c) * H * W;
            for (int y = 0; y < by; ++y)
                for (int x = 0; x < bx; ++x) {
                    for (int yy = 0; yy < j; ++yy)
                        for (int xx = 0; xx < j; ++xx)
                            blk[static_cast<size_t>(yy) * j + xx] =
                                pc[(y * j + yy) * static_cast<size_t>(W) + x * j + xx];
                    matmul_j(j, d.data(), blk.data(), tmp.data());
                    matmul_jt(j, tmp.data(), d.data(), coef.data());
                    for (double cc : coef) loss += std::abs(cc);
                }
        }
    int ri = residual.id;
    return t.record("satd_loss", {ri}, Tensor::scalar(loss),
                    [ri, j, B, C, H, W, by, bx](Tape& tp, int id) {
        if (!tp.wants_grad(ri)) return;
        double g = tp.grad_accum(id).v[0];
        const Tensor& r2 = tp.val(ri);
        Tensor& gr = tp.grad_accum(ri);
        Tensor d = dct_matrix(j);
        std::vector<double> blk(static_cast<size_t>(j) * j), tmp(blk.size()), coef(blk.size());
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const double* pc = r2.data() + (static_cast<size_t>(b) * C + c) * H * W;
                double* gc = gr.data() + (static_cast<size_t>(b) * C + c) * H * W;
                for (int y = 0; y < by; ++y)
                    for (int x = 0; x < bx; ++x) {
                        for (int yy = 0; yy < j; ++yy)
                            for (int xx = 0; xx < j; ++xx)
                                blk[static_cast<size_t>(yy) * j + xx] =
                                    pc[(y * j + yy) * static_cast<size_t>(W) + x * j + xx];
                        matmul_j(j, d.data(), blk.data(), tmp.data());
                        matmul_jt(j, tmp.data(), d.data(), coef.data());
                        for (auto& cc : coef) cc = cc > 0.0 ? 1.0 : (cc < 0.0 ? -1.0 : 0.0);
                        // dL/dR = D^T * sign(C) * D
                        matmul_tj(j, d.data(), coef.data(), tmp.data());
                        matmul_j(j, tmp.data(), d.data(), blk.data());
                        for (int yy = 0; yy < j; ++yy)
                            for (int xx = 0; xx < j; ++xx)
                                gc[(y * j + yy) * static_cast<size_t>(W) + x * j + xx] +=
                                    g * blk[static_cast<size_t>(yy) * j + xx];
                    }
            }
    });
}

Var multiscale_mse(Tape& t, Var phat, Var p, int s) {
    if (s != 1 && s != 2 && s != 4)
        throw std::invalid_argument("multiscale_mse: scale must be 1, 2 or 4");
    Var d = sub(t, phat, p);
    int halvings = s == 1 ? 0 : (s == 2 ? 1 : 2);
    for (int i = 0; i < halvings; ++i) {
        const Tensor& v = t.val(d);
        int H = v.dim(2), W = v.dim(3);
        if (H % 2 || W % 2) d = crop_spatial(t, d, H - H % 2, W - W % 2);
        d = avg_pool2(t, d);
    }
    return sum_sq(t, d);
}

ContextExtractor ContextExtractor::make_default(std::uint64_t seed) {
    ContextExtractor ctx;
    Rng rng(seed);
    int chans[5] = {3, 16, 32, 64, 64};
    for (int l = 0; l < 4; ++l) {
        int cin = chans[l], cout = chans[l + 1];
        Tensor w(Shape{cout, cin, 3, 3});
        double std = std::sqrt(2.0 / ((1.0 + ctx.slope * ctx.slope) * cin * 9));
        for (auto& x : w.v) x = rng.normal(0.0, std);
        ctx.weights.push_back(std::move(w));
        ctx.biases.push_back(Tensor::zeros(Shape{cout}));
    }
    return ctx;
}

Var ContextExtractor::apply(Tape& t, Var x) const {
    Var h = x;
    for (size_t l = 0; l < weights.size(); ++l) {
        ConvSpec spec(weights[l].dim(1), weights[l].dim(0), 2, 1);
        Var w = t.constant(weights[l]);
        Var b = t.constant(biases[l]);
        h = leaky_relu(t, conv2d(t, h, w, b, spec), slope);
    }
    return h;
}

Var context_loss(Tape& t, Var phat, Var p, const FeatureFn& phi) {
    Var fa = phi(t, phat);
    Var fb = phi(t, p);
    if (!t.val(fa).same_shape(t.val(fb)))
        throw std::invalid_argument("context_loss: extractor output shapes differ, " +
                                    shape_str(t.val(fa).shape) + " vs " +
                                    shape_str(t.val(fb).shape));
    return sum_sq(t, sub(t, fa, fb));
}

Var context_loss(Tape& t, Var phat, Var p, const ContextExtractor& ctx) {
    return context_loss(t, phat, p,
                        [&ctx](Tape& tp, Var x) { return ctx.apply(tp, x); });
}

Var total_loss(Tape& t, Var phat, Var p, const ContextExtractor* ctx, const LossSwitches& sw,
               LossBreakdown* breakdown) {
    if (!t.val(phat).same_shape(t.val(p)))
        throw std::invalid_argument("total_loss: shape mismatch " +
                                    shape_str(t.val(phat).shape) + " vs " +
                                    shape_str(t.val(p).shape));
    LossBreakdown bd;
    Var total = t.constant(Tensor::scalar(0.0));
    Var r = sub(t, phat, p);
    if (sw.satd) {
        Var s8 = satd_loss(t, r, 8);
        Var s16 = satd_loss(t, r, 16);
        Var s32 = satd_loss(t, r, 32);
        bd.satd8 = t.val(s8).v[0];
        bd.satd16 = t.val(s16).v[0];
        bd.satd32 = t.val(s32).v[0];
        total = add(t, total, add(t, s8, add(t, s16, s32)));
    }
    Var m1 = multiscale_mse(t, phat, p, 1);
    bd.mse1 = t.val(m1).v[0];
    total = add(t, total, m1);
    if (sw.mse_scale24) {
        Var m2 = scale(t, multiscale_mse(t, phat, p, 2), 4.0);
        Var m4 = scale(t, multiscale_mse(t, phat, p, 4), 16.0);
        bd.mse2 = t.val(m2).v[0];
        bd.mse4 = t.val(m4).v[0];
        total = add(t, total, add(t, m2, m4));
    }
    if (sw.ctx && ctx) {
        Var c = context_loss(t, phat, p, *ctx);
        bd.ctx = t.val(c).v[0];
        total = add(t, total, c);
    }
    bd.total = t.val(total).v[0];
    if (breakdown) *breakdown = bd;
    return total;
}

}  // namespace dfp
