#include "dfp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dfp/gemm.hpp"

namespace dfp {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                                 " vs " + shape_str(b.shape));
}

void require_4d(const char* op, const Tensor& x) {
    require(x.rank() == 4, std::string(op) + ": expected 4-D input, got " + shape_str(x.shape));
}

}  // namespace

ConvSpec::ConvSpec(int in_ch, int out_ch, int stride_, int dilation_)
    : in_channels(in_ch), out_channels(out_ch), stride(stride_), dilation(dilation_),
      padding(dilation_) {
    require(in_ch >= 1 && out_ch >= 1, "ConvSpec: channel counts must be >= 1");
    require(dilation == 1 || dilation == 2 || dilation == 4,
            "ConvSpec: dilation must be 1, 2 or 4, got " + std::to_string(dilation));
    require(stride == 1 || stride == 2,
            "ConvSpec: stride must be 1 or 2, got " + std::to_string(stride));
    if (stride == 1) require(out_extent(16) == 16, "ConvSpec: extent-preserving check failed");
}

int ConvSpec::out_extent(int in_extent) const {
    int span = (kernel - 1) * dilation + 1;
    int num = in_extent + 2 * padding - span;
    require(num >= 0, "ConvSpec: input extent " + std::to_string(in_extent) +
                          " too small for kernel span " + std::to_string(span));
    return num / stride + 1;
}

Var add(Tape& t, Var a, Var b) {
    require_same_shape("add", t.val(a), t.val(b));
    Tensor out = t.val(a);
    const Tensor& vb = t.val(b);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += vb.v[i];
    int ai = a.id, bi = b.id;
    return t.record("add", {ai, bi}, std::move(out), [ai, bi](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        for (int in : {ai, bi}) {
            if (!tp.wants_grad(in)) continue;
            Tensor& gi = tp.grad_accum(in);
            for (size_t k = 0; k < g.v.size(); ++k) gi.v[k] += g.v[k];
        }
    });
}

Var sub(Tape& t, Var a, Var b) {
    require_same_shape("sub", t.val(a), t.val(b));
    Tensor out = t.val(a);
    const Tensor& vb = t.val(b);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= vb.v[i];
    int ai = a.id, bi = b.id;
    return t.record("sub", {ai, bi}, std::move(out), [ai, bi](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        if (tp.wants_grad(ai)) {
            Tensor& ga = tp.grad_accum(ai);
            for (size_t k = 0; k < g.v.size(); ++k) ga.v[k] += g.v[k];
        }
        if (tp.wants_grad(bi)) {
            Tensor& gb = tp.grad_accum(bi);
            for (size_t k = 0; k < g.v.size(); ++k) gb.v[k] -= g.v[k];
        }
    });
}

Var mul(Tape& t, Var a, Var b) {
    require_same_shape("mul", t.val(a), t.val(b));
    Tensor out = t.val(a);
    const Tensor& vb = t.val(b);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= vb.v[i];
    int ai = a.id, bi = b.id;
    return t.record("mul", {ai, bi}, std::move(out), [ai, bi](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        const Tensor& va = tp.val(ai);
        const Tensor& vb2 = tp.val(bi);
        if (tp.wants_grad(ai)) {
            Tensor& ga = tp.grad_accum(ai);
            for (size_t k = 0; k < g.v.size(); ++k) ga.v[k] += g.v[k] * vb2.v[k];
        }
        if (tp.wants_grad(bi)) {
            Tensor& gb = tp.grad_accum(bi);
            for (size_t k = 0; k < g.v.size(); ++k) gb.v[k] += g.v[k] * va.v[k];
        }
    });
}

Var scale(Tape& t, Var a, double c) {
    Tensor out = t.val(a);
    for (auto& x : out.v) x *= c;
    int ai = a.id;
    return t.record("scale", {ai}, std::move(out), [ai, c](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        const Tensor& g = tp.grad_accum(id);
        Tensor& ga = tp.grad_accum(ai);
        for (size_t k = 0; k < g.v.size(); ++k) ga.v[k] += c * g.v[k];
    });
}

Var sum(Tape& t, Var a) {
    double s = 0.0;
    for (double x : t.val(a).v) s += x;
    int ai = a.id;
    return t.record("sum", {ai}, Tensor::scalar(s), [ai](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        double g = tp.grad_accum(id).v[0];
        Tensor& ga = tp.grad_accum(ai);
        for (auto& x : ga.v) x += g;
    });
}

Var mean(Tape& t, Var a) {
    const Tensor& va = t.val(a);
    double s = 0.0;
    for (double x : va.v) s += x;
    double inv = 1.0 / static_cast<double>(va.numel());
    int ai = a.id;
    return t.record("mean", {ai}, Tensor::scalar(s * inv), [ai, inv](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        double g = tp.grad_accum(id).v[0] * inv;
        Tensor& ga = tp.grad_accum(ai);
        for (auto& x : ga.v) x += g;
    });
}

Var sum_sq(Tape& t, Var a) {
    double s = 0.0;
    for (double x : t.val(a).v) s += x * x;
    int ai = a.id;
    return t.record("sum_sq", {ai}, Tensor::scalar(s), [ai](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        double g = tp.grad_accum(id).v[0];
        const Tensor& va = tp.val(ai);
        Tensor& ga = tp.grad_accum(ai);
        for (size_t k = 0; k < va.v.size(); ++k) ga.v[k] += 2.0 * g * va.v[k];
    });
}

Var sum_abs(Tape& t, Var a) {
    double s = 0.0;
    for (double x : t.val(a).v) s += std::abs(x);
    int ai = a.id;
    return t.record("sum_abs", {ai}, Tensor::scalar(s), [ai](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        double g = tp.grad_accum(id).v[0];
        const Tensor& va = tp.val(ai);
        Tensor& ga = tp.grad_accum(ai);
        for (size_t k = 0; k < va.v.size(); ++k) {
            double x = va.v[k];
            ga.v[k] += g * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
    });
}

Var leaky_relu(Tape& t, Var a, double slope) {
    Tensor out = t.val(a);
    for (auto& x : out.v) x = x >= 0.0 ? x : slope * x;
    int ai = a.id;
    return t.record("leaky_relu", {ai}, std::move(out), [ai, slope](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        const Tensor& g = tp.grad_accum(id);
        const Tensor& va = tp.val(ai);
        Tensor& ga = tp.grad_accum(ai);
        for (size_t k = 0; k < g.v.size(); ++k)
            ga.v[k] += g.v[k] * (va.v[k] >= 0.0 ? 1.0 : slope);
    });
}

Var tanh_act(Tape& t, Var a) {
    Tensor out = t.val(a);
    for (auto& x : out.v) x = std::tanh(x);
    int ai = a.id;
    return t.record("tanh", {ai}, std::move(out), [ai](Tape& tp, int id) {
        if (!tp.wants_grad(ai)) return;
        const Tensor& g = tp.grad_accum(id);
        const Tensor& y = tp.val(id);
        Tensor& ga = tp.grad_accum(ai);
        for (size_t k = 0; k < g.v.size(); ++k) ga.v[k] += g.v[k] * (1.0 - y.v[k] * y.v[k]);
    });
}

Var concat_ch(Tape& t, const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_ch: no inputs");
    const Tensor& first = t.val(parts[0]);
    require_4d("concat_ch", first);
    int B = first.dim(0), H = first.dim(2), W = first.dim(3);
    int C = 0;
    std::vector<int> ids;
    for (Var p : parts) {
        const Tensor& v = t.val(p);
        require_4d("concat_ch", v);
        require(v.dim(0) == B && v.dim(2) == H && v.dim(3) == W,
                "concat_ch: incompatible shapes " + shape_str(first.shape) + " vs " +
                    shape_str(v.shape));
        C += v.dim(1);
        ids.push_back(p.id);
    }
    Tensor out(Shape{B, C, H, W});
    size_t plane = static_cast<size_t>(H) * W;
    for (int b = 0; b < B; ++b) {
        size_t off = static_cast<size_t>(b) * C * plane;
        for (Var p : parts) {
            const Tensor& v = t.val(p);
            int ci = v.dim(1);
            const double* src = v.data() + static_cast<size_t>(b) * ci * plane;
            std::copy(src, src + static_cast<size_t>(ci) * plane, out.data() + off);
            off += static_cast<size_t>(ci) * plane;
        }
    }
    return t.record("concat_ch", ids, std::move(out), [ids, B, plane](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        int C = g.shape[1];
        for (int b = 0; b < B; ++b) {
            size_t off = static_cast<size_t>(b) * C * plane;
            for (int in : ids) {
                const Tensor& v = tp.val(in);
                int ci = v.shape[1];
                size_t len = static_cast<size_t>(ci) * plane;
                if (tp.wants_grad(in)) {
                    Tensor& gi = tp.grad_accum(in);
                    double* dst = gi.data() + static_cast<size_t>(b) * len;
                    const double* src = g.data() + off;
                    for (size_t k = 0; k < len; ++k) dst[k] += src[k];
                }
                off += len;
            }
        }
    });
}

namespace {

// im2col panel: rows are (ci,ky,kx), columns are output pixels [n0,n1).
void im2col_panel(const double* x, int C, int H, int W, const ConvSpec& sp, int Wo, int n0,
                  int n1, double* col) {
    int cols = n1 - n0;
    for (int ci = 0; ci < C; ++ci) {
        const double* xc = x + static_cast<size_t>(ci) * H * W;
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
                double* row = col + (static_cast<size_t>(ci) * 9 + ky * 3 + kx) * cols;
                for (int n = n0; n < n1; ++n) {
                    int oy = n / Wo, ox = n % Wo;
                    int iy = oy * sp.stride - sp.padding + ky * sp.dilation;
                    int ix = ox * sp.stride - sp.padding + kx * sp.dilation;
                    row[n - n0] =
                        (iy >= 0 && iy < H && ix >= 0 && ix < W) ? xc[iy * W + ix] : 0.0;
                }
            }
    }
}

void col2im_panel(const double* col, int C, int H, int W, const ConvSpec& sp, int Wo, int n0,
                  int n1, double* gx) {
    int cols = n1 - n0;
    for (int ci = 0; ci < C; ++ci) {
        double* gc = gx + static_cast<size_t>(ci) * H * W;
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
                const double* row = col + (static_cast<size_t>(ci) * 9 + ky * 3 + kx) * cols;
                for (int n = n0; n < n1; ++n) {
                    int oy = n / Wo, ox = n % Wo;
                    int iy = oy * sp.stride - sp.padding + ky * sp.dilation;
                    int ix = ox * sp.stride - sp.padding + kx * sp.dilation;
                    if (iy >= 0 && iy < H && ix >= 0 && ix < W) gc[iy * W + ix] += row[n - n0];
                }
            }
    }
}

// keep the im2col panel within ~2 MiB so the GEMM stays cache-resident
int panel_cols(int k_rows, int total) {
    int cols = static_cast<int>((2u << 20) / (sizeof(double) * static_cast<size_t>(k_rows)));
    return std::clamp(cols, 64, std::max(64, total));
}

}  // namespace

Var conv2d(Tape& t, Var x, Var w, Var b, const ConvSpec& spec) {
    const Tensor& vx = t.val(x);
    const Tensor& vw = t.val(w);
    const Tensor& vb = t.val(b);
    require_4d("conv2d", vx);
    require(vx.dim(1) == spec.in_channels,
            "conv2d: input has " + std::to_string(vx.dim(1)) + " channels, spec expects " +
                std::to_string(spec.in_channels) + " (input " + shape_str(vx.shape) + ")");
    require(vw.shape == Shape{spec.out_channels, spec.in_channels, 3, 3},
            "conv2d: weight shape " + shape_str(vw.shape) + " does not match spec");
    require(vb.shape == Shape{spec.out_channels},
            "conv2d: bias shape " + shape_str(vb.shape) + " does not match spec");

    int B = vx.dim(0), H = vx.dim(2), W = vx.dim(3);
    int Ho = spec.out_extent(H), Wo = spec.out_extent(W);
    int M = spec.out_channels, K = spec.in_channels * 9, N = Ho * Wo;

    Tensor out(Shape{B, M, Ho, Wo});
    std::vector<double> col;
    int chunk = panel_cols(K, N);
    col.resize(static_cast<size_t>(K) * chunk);
    for (int bb = 0; bb < B; ++bb) {
        const double* xb = vx.data() + static_cast<size_t>(bb) * spec.in_channels * H * W;
        double* yb = out.data() + static_cast<size_t>(bb) * M * N;
        for (int n0 = 0; n0 < N; n0 += chunk) {
            int n1 = std::min(N, n0 + chunk);
            im2col_panel(xb, spec.in_channels, H, W, spec, Wo, n0, n1, col.data());
            // y[:, n0:n1] = W * col
            gemm(false, false, M, n1 - n0, K, 1.0, vw.data(), K, col.data(), n1 - n0, 0.0,
                 yb + n0, N);
        }
        for (int c = 0; c < M; ++c) {
            double bias = vb.v[static_cast<size_t>(c)];
            double* row = yb + static_cast<size_t>(c) * N;
            for (int n = 0; n < N; ++n) row[n] += bias;
        }
    }

    int xi = x.id, wi = w.id, bi = b.id;
    ConvSpec sp = spec;
    return t.record("conv2d", {xi, wi, bi}, std::move(out),
                    [xi, wi, bi, sp, B, H, W, Ho, Wo](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        const Tensor& vx2 = tp.val(xi);
        const Tensor& vw2 = tp.val(wi);
        int M = sp.out_channels, K = sp.in_channels * 9, N = Ho * Wo;
        bool need_x = tp.wants_grad(xi), need_w = tp.wants_grad(wi), need_b = tp.wants_grad(bi);

        if (need_b) {
            Tensor& gb = tp.grad_accum(bi);
            for (int bb = 0; bb < B; ++bb) {
                const double* gy = g.data() + static_cast<size_t>(bb) * M * N;
                for (int c = 0; c < M; ++c) {
                    double s = 0.0;
                    const double* row = gy + static_cast<size_t>(c) * N;
                    for (int n = 0; n < N; ++n) s += row[n];
                    gb.v[static_cast<size_t>(c)] += s;
                }
            }
        }
        if (!need_x && !need_w) return;

        int chunk = panel_cols(K, N);
        std::vector<double> col(static_cast<size_t>(K) * chunk);
        std::vector<double> gcol(need_x ? static_cast<size_t>(K) * chunk : 0);
        Tensor* gx = need_x ? &tp.grad_accum(xi) : nullptr;
        Tensor* gw = need_w ? &tp.grad_accum(wi) : nullptr;
        for (int bb = 0; bb < B; ++bb) {
            const double* xb = vx2.data() + static_cast<size_t>(bb) * sp.in_channels * H * W;
            const double* gy = g.data() + static_cast<size_t>(bb) * M * N;
            for (int n0 = 0; n0 < N; n0 += chunk) {
                int n1 = std::min(N, n0 + chunk);
                int cols = n1 - n0;
                if (need_w) {
                    im2col_panel(xb, sp.in_channels, H, W, sp, Wo, n0, n1, col.data());
                    // gW += gy[:, n0:n1] * col^T   -- gy panel has row stride N
                    gemm(false, true, M, K, cols, 1.0, gy + n0, N, col.data(), cols, 1.0,
                         gw->data(), K);
                }
                if (need_x) {
                    // gcol = W^T * gy[:, n0:n1]
                    gemm(true, false, K, cols, M, 1.0, vw2.data(), K, gy + n0, N, 0.0,
                         gcol.data(), cols);
                    col2im_panel(gcol.data(), sp.in_channels, H, W, sp, Wo, n0, n1,
                                 gx->data() + static_cast<size_t>(bb) * sp.in_channels * H * W);
                }
            }
        }
    });
}

Var avg_pool2(Tape& t, Var x) {
    const Tensor& vx = t.val(x);
    require_4d("avg_pool2", vx);
    int B = vx.dim(0), C = vx.dim(1), H = vx.dim(2), W = vx.dim(3);
    require(H % 2 == 0 && W % 2 == 0,
            "avg_pool2: spatial extents must be even, got " + shape_str(vx.shape));
    int Ho = H / 2, Wo = W / 2;
    Tensor out(Shape{B, C, Ho, Wo});
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const double* src = vx.data() + (static_cast<size_t>(b) * C + c) * H * W;
            double* dst = out.data() + (static_cast<size_t>(b) * C + c) * Ho * Wo;
            for (int y = 0; y < Ho; ++y)
                for (int xx = 0; xx < Wo; ++xx) {
                    const double* p = src + (2 * y) * W + 2 * xx;
                    dst[y * Wo + xx] = 0.25 * (p[0] + p[1] + p[W] + p[W + 1]);
                }
        }
    int xi = x.id;
    return t.record("avg_pool2", {xi}, std::move(out), [xi, B, C, H, W](Tape& tp, int id) {
        if (!tp.wants_grad(xi)) return;
        const Tensor& g = tp.grad_accum(id);
        Tensor& gx = tp.grad_accum(xi);
        int Ho = H / 2, Wo = W / 2;
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const double* gs = g.data() + (static_cast<size_t>(b) * C + c) * Ho * Wo;
                double* gd = gx.data() + (static_cast<size_t>(b) * C + c) * H * W;
                for (int y = 0; y < Ho; ++y)
                    for (int xx = 0; xx < Wo; ++xx) {
                        double q = 0.25 * gs[y * Wo + xx];
                        double* p = gd + (2 * y) * W + 2 * xx;
                        p[0] += q;
                        p[1] += q;
                        p[W] += q;
                        p[W + 1] += q;
                    }
            }
    });
}

Var crop_spatial(Tape& t, Var x, int H2, int W2) {
    const Tensor& vx = t.val(x);
    require_4d("crop_spatial", vx);
    int B = vx.dim(0), C = vx.dim(1), H = vx.dim(2), W = vx.dim(3);
    require(H2 >= 1 && H2 <= H && W2 >= 1 && W2 <= W,
            "crop_spatial: crop " + std::to_string(H2) + "x" + std::to_string(W2) +
                " out of range for " + shape_str(vx.shape));
    Tensor out(Shape{B, C, H2, W2});
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < H2; ++y) {
                const double* src = vx.data() + ((static_cast<size_t>(b) * C + c) * H + y) * W;
                std::copy(src, src + W2,
                          out.data() + ((static_cast<size_t>(b) * C + c) * H2 + y) * W2);
            }
    int xi = x.id;
    return t.record("crop_spatial", {xi}, std::move(out),
                    [xi, B, C, H, W, H2, W2](Tape& tp, int id) {
        if (!tp.wants_grad(xi)) return;
        const Tensor& g = tp.grad_accum(id);
        Tensor& gx = tp.grad_accum(xi);
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H2; ++y) {
                    const double* gs =
                        g.data() + ((static_cast<size_t>(b) * C + c) * H2 + y) * W2;
                    double* gd = gx.data() + ((static_cast<size_t>(b) * C + c) * H + y) * W;
                    for (int xx = 0; xx < W2; ++xx) gd[xx] += gs[xx];
                }
    });
}

namespace {

// tap indices and weights for x2 bilinear upsampling with half-pixel centers
struct UpTap {
    int i0, i1;
    double w0, w1;
};

UpTap up_tap(int o, int in_extent) {
    double pos = (o + 0.5) / 2.0 - 0.5;
    int i0 = static_cast<int>(std::floor(pos));
    double f = pos - i0;
    UpTap tap;
    tap.i0 = std::clamp(i0, 0, in_extent - 1);
    tap.i1 = std::clamp(i0 + 1, 0, in_extent - 1);
    tap.w0 = 1.0 - f;
    tap.w1 = f;
    return tap;
}

}  // namespace

Var bilinear_upsample2(Tape& t, Var x) {
    const Tensor& vx = t.val(x);
    require_4d("bilinear_upsample2", vx);
    int B = vx.dim(0), C = vx.dim(1), H = vx.dim(2), W = vx.dim(3);
    int Ho = 2 * H, Wo = 2 * W;
    std::vector<UpTap> ty(Ho), tx(Wo);
    for (int y = 0; y < Ho; ++y) ty[y] = up_tap(y, H);
    for (int xx = 0; xx < Wo; ++xx) tx[xx] = up_tap(xx, W);
    Tensor out(Shape{B, C, Ho, Wo});
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const double* src = vx.data() + (static_cast<size_t>(b) * C + c) * H * W;
            double* dst = out.data() + (static_cast<size_t>(b) * C + c) * Ho * Wo;
            for (int y = 0; y < Ho; ++y) {
                const UpTap& a = ty[y];
                for (int xx = 0; xx < Wo; ++xx) {
                    const UpTap& e = tx[xx];
                    dst[y * Wo + xx] = a.w0 * (e.w0 * src[a.i0 * W + e.i0] +
                                               e.w1 * src[a.i0 * W + e.i1]) +
                                       a.w1 * (e.w0 * src[a.i1 * W + e.i0] +
                                               e.w1 * src[a.i1 * W + e.i1]);
                }
            }
        }
    int xi = x.id;
    return t.record("bilinear_upsample2", {xi}, std::move(out),
                    [xi, B, C, H, W](Tape& tp, int id) {
        if (!tp.wants_grad(xi)) return;
        const Tensor& g = tp.grad_accum(id);
        Tensor& gx = tp.grad_accum(xi);
        int Ho = 2 * H, Wo = 2 * W;
        std::vector<UpTap> ty(Ho), tx(Wo);
        for (int y = 0; y < Ho; ++y) ty[y] = up_tap(y, H);
        for (int xx = 0; xx < Wo; ++xx) tx[xx] = up_tap(xx, W);
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const double* gs = g.data() + (static_cast<size_t>(b) * C + c) * Ho * Wo;
                double* gd = gx.data() + (static_cast<size_t>(b) * C + c) * H * W;
                for (int y = 0; y < Ho; ++y) {
                    const UpTap& a = ty[y];
                    for (int xx = 0; xx < Wo; ++xx) {
                        const UpTap& e = tx[xx];
                        double q = gs[y * Wo + xx];
                        gd[a.i0 * W + e.i0] += a.w0 * e.w0 * q;
                        gd[a.i0 * W + e.i1] += a.w0 * e.w1 * q;
                        gd[a.i1 * W + e.i0] += a.w1 * e.w0 * q;
                        gd[a.i1 * W + e.i1] += a.w1 * e.w1 * q;
                    }
                }
            }
    });
}

}  // namespace dfp
