#include "dfp/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dfp {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// pixel-unit sampling position from a normalized coordinate
double pix_pos(double u, int extent) {
    if (!std::isfinite(u)) u = 0.0;
    return (u + 1.0) * 0.5 * extent - 0.5;
}

}  // namespace

double unnormalize(double u, int extent) { return (u + 1.0) * 0.5 * extent; }

double normalize_coord(double continuous, int extent) {
    return 2.0 * continuous / extent - 1.0;
}

Tensor make_grid(int H, int W) {
    Tensor g(Shape{2, H, W});
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            g.at3(0, y, x) = (2.0 * x + 1.0) / W - 1.0;
            g.at3(1, y, x) = (2.0 * y + 1.0) / H - 1.0;
        }
    return g;
}

Var grid_generate(Tape& t, Var theta) {
    const Tensor& th = t.val(theta);
    require(th.rank() == 4 && th.dim(1) == 3,
            "grid_generate: expected (B,3,H,W) affine field, got " + shape_str(th.shape));
    int B = th.dim(0), H = th.dim(2), W = th.dim(3);
    Tensor grid = make_grid(H, W);
    Tensor out(Shape{B, 2, H, W});
    size_t plane = static_cast<size_t>(H) * W;
    for (int b = 0; b < B; ++b) {
        const double* t0 = th.data() + static_cast<size_t>(b) * 3 * plane;
        const double* t1 = t0 + plane;
        const double* t2 = t1 + plane;
        double* s0 = out.data() + static_cast<size_t>(b) * 2 * plane;
        double* s1 = s0 + plane;
        for (size_t i = 0; i < plane; ++i) {
            s0[i] = t0[i] * grid.v[i] + t1[i];
            s1[i] = t0[i] * grid.v[plane + i] + t2[i];
        }
    }
    int ti = theta.id;
    return t.record("grid_generate", {ti}, std::move(out), [ti, B, H, W](Tape& tp, int id) {
        if (!tp.wants_grad(ti)) return;
        const Tensor& g = tp.grad_accum(id);
        Tensor grid = make_grid(H, W);
        Tensor& gt = tp.grad_accum(ti);
        size_t plane = static_cast<size_t>(H) * W;
        for (int b = 0; b < B; ++b) {
            const double* gs0 = g.data() + static_cast<size_t>(b) * 2 * plane;
            const double* gs1 = gs0 + plane;
            double* gt0 = gt.data() + static_cast<size_t>(b) * 3 * plane;
            double* gt1 = gt0 + plane;
            double* gt2 = gt1 + plane;
            for (size_t i = 0; i < plane; ++i) {
                gt0[i] += gs0[i] * grid.v[i] + gs1[i] * grid.v[plane + i];
                gt1[i] += gs0[i];
                gt2[i] += gs1[i];
            }
        }
    });
}

Var outer_field(Tape& t, Var fh, Var fv) {
    const Tensor& vh = t.val(fh);
    const Tensor& vv = t.val(fv);
    require(vh.rank() == 4 && vh.dim(1) == 8, "outer_field: fh must be (B,8,H,W), got " +
                                                  shape_str(vh.shape));
    require(vh.same_shape(vv), "outer_field: shape mismatch " + shape_str(vh.shape) + " vs " +
                                   shape_str(vv.shape));
    int B = vh.dim(0), H = vh.dim(2), W = vh.dim(3);
    size_t plane = static_cast<size_t>(H) * W;
    Tensor out(Shape{B, 64, H, W});
    for (int b = 0; b < B; ++b)
        for (int r = 0; r < 8; ++r)
            for (int q = 0; q < 8; ++q) {
                const double* pv = vv.data() + (static_cast<size_t>(b) * 8 + r) * plane;
                const double* ph = vh.data() + (static_cast<size_t>(b) * 8 + q) * plane;
                double* po = out.data() + (static_cast<size_t>(b) * 64 + r * 8 + q) * plane;
                for (size_t i = 0; i < plane; ++i) po[i] = pv[i] * ph[i];
            }
    int hi = fh.id, vi = fv.id;
    return t.record("outer_field", {hi, vi}, std::move(out), [hi, vi, B, plane](Tape& tp,
                                                                                int id) {
        const Tensor& g = tp.grad_accum(id);
        const Tensor& vh2 = tp.val(hi);
        const Tensor& vv2 = tp.val(vi);
        bool nh = tp.wants_grad(hi), nv = tp.wants_grad(vi);
        if (!nh && !nv) return;
        Tensor* gh = nh ? &tp.grad_accum(hi) : nullptr;
        Tensor* gv = nv ? &tp.grad_accum(vi) : nullptr;
        for (int b = 0; b < B; ++b)
            for (int r = 0; r < 8; ++r)
                for (int q = 0; q < 8; ++q) {
                    const double* pg = g.data() + (static_cast<size_t>(b) * 64 + r * 8 + q) * plane;
                    const double* pv = vv2.data() + (static_cast<size_t>(b) * 8 + r) * plane;
                    const double* ph = vh2.data() + (static_cast<size_t>(b) * 8 + q) * plane;
                    if (nh) {
                        double* d = gh->data() + (static_cast<size_t>(b) * 8 + q) * plane;
                        for (size_t i = 0; i < plane; ++i) d[i] += pg[i] * pv[i];
                    }
                    if (nv) {
                        double* d = gv->data() + (static_cast<size_t>(b) * 8 + r) * plane;
                        for (size_t i = 0; i < plane; ++i) d[i] += pg[i] * ph[i];
                    }
                }
    });
}

std::array<double, 64> outer_kernel(const std::array<double, 8>& fh,
                                    const std::array<double, 8>& fv) {
    std::array<double, 64> k{};
    for (int r = 0; r < 8; ++r)
        for (int q = 0; q < 8; ++q) k[static_cast<size_t>(r) * 8 + q] = fv[r] * fh[q];
    return k;
}

namespace {

void check_warp_args(const char* op, const Tensor& patch, const Tensor& sfield) {
    require(patch.rank() == 4, std::string(op) + ": patch must be 4-D, got " +
                                   shape_str(patch.shape));
    require(sfield.rank() == 4 && sfield.dim(1) == 2,
            std::string(op) + ": coordinate field must be (B,2,H,W), got " +
                shape_str(sfield.shape));
    require(patch.dim(0) == sfield.dim(0) && patch.dim(2) == sfield.dim(2) &&
                patch.dim(3) == sfield.dim(3),
            std::string(op) + ": patch " + shape_str(patch.shape) + " vs field " +
                shape_str(sfield.shape));
}

}  // namespace

Var mclc(Tape& t, Var patch, Var kfield, Var sfield) {
    const Tensor& vp = t.val(patch);
    const Tensor& vk = t.val(kfield);
    const Tensor& vs = t.val(sfield);
    check_warp_args("mclc", vp, vs);
    require(vk.rank() == 4 && vk.dim(1) == 64 && vk.dim(2) == vp.dim(2) &&
                vk.dim(3) == vp.dim(3),
            "mclc: kernel field must be (B,64,H,W), got " + shape_str(vk.shape));
    int B = vp.dim(0), C = vp.dim(1), H = vp.dim(2), W = vp.dim(3);
    size_t plane = static_cast<size_t>(H) * W;
    Tensor out(Shape{B, C, H, W});
    for (int b = 0; b < B; ++b) {
        const double* s0 = vs.data() + static_cast<size_t>(b) * 2 * plane;
        const double* s1 = s0 + plane;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                size_t i = static_cast<size_t>(y) * W + x;
                int ax = static_cast<int>(std::floor(pix_pos(s0[i], W)));
                int ay = static_cast<int>(std::floor(pix_pos(s1[i], H)));
                const double* kp = vk.data() + static_cast<size_t>(b) * 64 * plane + i;
                for (int c = 0; c < C; ++c) {
                    const double* pc = vp.data() + (static_cast<size_t>(b) * C + c) * plane;
                    double acc = 0.0;
                    for (int r = 0; r < 8; ++r) {
                        int yy = clampi(ay + r - 3, 0, H - 1);
                        const double* row = pc + static_cast<size_t>(yy) * W;
                        for (int q = 0; q < 8; ++q) {
                            int xx = clampi(ax + q - 3, 0, W - 1);
                            acc += kp[(static_cast<size_t>(r) * 8 + q) * plane] * row[xx];
                        }
                    }
                    out.v[(static_cast<size_t>(b) * C + c) * plane + i] = acc;
                }
            }
    }

    int pi = patch.id, ki = kfield.id, si = sfield.id;
    return t.record("mclc", {pi, ki, si}, std::move(out),
                    [pi, ki, si, B, C, H, W, plane](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        const Tensor& vp2 = tp.val(pi);
        const Tensor& vk2 = tp.val(ki);
        const Tensor& vs2 = tp.val(si);
        const Tensor& vout = tp.val(id);
        bool np = tp.wants_grad(pi), nk = tp.wants_grad(ki), ns = tp.wants_grad(si);
        Tensor* gp = np ? &tp.grad_accum(pi) : nullptr;
        Tensor* gk = nk ? &tp.grad_accum(ki) : nullptr;
        Tensor* gs = ns ? &tp.grad_accum(si) : nullptr;
        for (int b = 0; b < B; ++b) {
            const double* s0 = vs2.data() + static_cast<size_t>(b) * 2 * plane;
            const double* s1 = s0 + plane;
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    size_t i = static_cast<size_t>(y) * W + x;
                    int ax = static_cast<int>(std::floor(pix_pos(s0[i], W)));
                    int ay = static_cast<int>(std::floor(pix_pos(s1[i], H)));
                    const double* kp = vk2.data() + static_cast<size_t>(b) * 64 * plane + i;
                    double* gkp = nk ? gk->data() + static_cast<size_t>(b) * 64 * plane + i
                                     : nullptr;
                    for (int c = 0; c < C; ++c) {
                        double gu = g.v[(static_cast<size_t>(b) * C + c) * plane + i];
                        if (gu == 0.0 && !ns) continue;
                        const double* pc =
                            vp2.data() + (static_cast<size_t>(b) * C + c) * plane;
                        double* gpc =
                            np ? gp->data() + (static_cast<size_t>(b) * C + c) * plane
                               : nullptr;
                        if (np || nk) {
                            for (int r = 0; r < 8; ++r) {
                                int yy = clampi(ay + r - 3, 0, H - 1);
                                for (int q = 0; q < 8; ++q) {
                                    int xx = clampi(ax + q - 3, 0, W - 1);
                                    size_t ko = (static_cast<size_t>(r) * 8 + q) * plane;
                                    if (nk) gkp[ko] += gu * pc[static_cast<size_t>(yy) * W + xx];
                                    if (np)
                                        gpc[static_cast<size_t>(yy) * W + xx] += gu * kp[ko];
                                }
                            }
                        }
                    }
                    if (ns) {
                        // forward-difference surrogate on the produced patch
                        double acc_x = 0.0, acc_y = 0.0;
                        for (int c = 0; c < C; ++c) {
                            size_t o = (static_cast<size_t>(b) * C + c) * plane + i;
                            double gu = g.v[o];
                            if (gu == 0.0) continue;
                            double v0 = vout.v[o];
                            if (x + 1 < W) acc_x += gu * (vout.v[o + 1] - v0);
                            if (y + 1 < H) acc_y += gu * (vout.v[o + W] - v0);
                        }
                        gs->data()[static_cast<size_t>(b) * 2 * plane + i] +=
                            acc_x * (0.5 * W);
                        gs->data()[static_cast<size_t>(b) * 2 * plane + plane + i] +=
                            acc_y * (0.5 * H);
                    }
                }
        }
    });
}

Var bilinear_sample(Tape& t, Var patch, Var sfield) {
    const Tensor& vp = t.val(patch);
    const Tensor& vs = t.val(sfield);
    check_warp_args("bilinear_sample", vp, vs);
    int B = vp.dim(0), C = vp.dim(1), H = vp.dim(2), W = vp.dim(3);
    size_t plane = static_cast<size_t>(H) * W;
    Tensor out(Shape{B, C, H, W});
    for (int b = 0; b < B; ++b) {
        const double* s0 = vs.data() + static_cast<size_t>(b) * 2 * plane;
        const double* s1 = s0 + plane;
        for (size_t i = 0; i < plane; ++i) {
            double nx = pix_pos(s0[i], W), ny = pix_pos(s1[i], H);
            int ax = static_cast<int>(std::floor(nx)), ay = static_cast<int>(std::floor(ny));
            double fx = nx - ax, fy = ny - ay;
            int x0 = clampi(ax, 0, W - 1), x1 = clampi(ax + 1, 0, W - 1);
            int y0 = clampi(ay, 0, H - 1), y1 = clampi(ay + 1, 0, H - 1);
            for (int c = 0; c < C; ++c) {
                const double* pc = vp.data() + (static_cast<size_t>(b) * C + c) * plane;
                out.v[(static_cast<size_t>(b) * C + c) * plane + i] =
                    (1.0 - fy) * ((1.0 - fx) * pc[static_cast<size_t>(y0) * W + x0] +
                                  fx * pc[static_cast<size_t>(y0) * W + x1]) +
                    fy * ((1.0 - fx) * pc[static_cast<size_t>(y1) * W + x0] +
                          fx * pc[static_cast<size_t>(y1) * W + x1]);
            }
        }
    }
    int pi = patch.id, si = sfield.id;
    return t.record("bilinear_sample", {pi, si}, std::move(out),
                    [pi, si, B, C, H, W, plane](Tape& tp, int id) {
        const Tensor& g = tp.grad_accum(id);
        const Tensor& vp2 = tp.val(pi);
        const Tensor& vs2 = tp.val(si);
        bool np = tp.wants_grad(pi), ns = tp.wants_grad(si);
        if (!np && !ns) return;
        Tensor* gp = np ? &tp.grad_accum(pi) : nullptr;
        Tensor* gs = ns ? &tp.grad_accum(si) : nullptr;
        for (int b = 0; b < B; ++b) {
            const double* s0 = vs2.data() + static_cast<size_t>(b) * 2 * plane;
            const double* s1 = s0 + plane;
            for (size_t i = 0; i < plane; ++i) {
                double nx = pix_pos(s0[i], W), ny = pix_pos(s1[i], H);
                int ax = static_cast<int>(std::floor(nx)),
                    ay = static_cast<int>(std::floor(ny));
                double fx = nx - ax, fy = ny - ay;
                int x0 = clampi(ax, 0, W - 1), x1 = clampi(ax + 1, 0, W - 1);
                int y0 = clampi(ay, 0, H - 1), y1 = clampi(ay + 1, 0, H - 1);
                double acc_x = 0.0, acc_y = 0.0;
                for (int c = 0; c < C; ++c) {
                    double gu = g.v[(static_cast<size_t>(b) * C + c) * plane + i];
                    if (gu == 0.0) continue;
                    const double* pc = vp2.data() + (static_cast<size_t>(b) * C + c) * plane;
                    double p00 = pc[static_cast<size_t>(y0) * W + x0];
                    double p01 = pc[static_cast<size_t>(y0) * W + x1];
                    double p10 = pc[static_cast<size_t>(y1) * W + x0];
                    double p11 = pc[static_cast<size_t>(y1) * W + x1];
                    if (np) {
                        double* gpc = gp->data() + (static_cast<size_t>(b) * C + c) * plane;
                        gpc[static_cast<size_t>(y0) * W + x0] += gu * (1.0 - fy) * (1.0 - fx);
                        gpc[static_cast<size_t>(y0) * W + x1] += gu * (1.0 - fy) * fx;
                        gpc[static_cast<size_t>(y1) * W + x0] += gu * fy * (1.0 - fx);
                        gpc[static_cast<size_t>(y1) * W + x1] += gu * fy * fx;
                    }
                    if (ns) {
                        acc_x += gu * ((1.0 - fy) * (p01 - p00) + fy * (p11 - p10));
                        acc_y += gu * ((1.0 - fx) * (p10 - p00) + fx * (p11 - p01));
                    }
                }
                if (ns) {
                    gs->data()[static_cast<size_t>(b) * 2 * plane + i] += acc_x * (0.5 * W);
                    gs->data()[static_cast<size_t>(b) * 2 * plane + plane + i] +=
                        acc_y * (0.5 * H);
                }
            }
        }
    });
}

Tensor motion_field_pixels(const Tensor& sfield) {
    if (sfield.rank() != 4 || sfield.dim(1) != 2)
        throw std::invalid_argument("motion_field_pixels: expected (B,2,H,W), got " +
                                    shape_str(sfield.shape));
    int B = sfield.dim(0), H = sfield.dim(2), W = sfield.dim(3);
    Tensor grid = make_grid(H, W);
    Tensor out(Shape{B, 2, H, W});
    size_t plane = static_cast<size_t>(H) * W;
    for (int b = 0; b < B; ++b)
        for (size_t i = 0; i < plane; ++i) {
            out.v[static_cast<size_t>(b) * 2 * plane + i] =
                (sfield.v[static_cast<size_t>(b) * 2 * plane + i] - grid.v[i]) * 0.5 * W;
            out.v[static_cast<size_t>(b) * 2 * plane + plane + i] =
                (sfield.v[static_cast<size_t>(b) * 2 * plane + plane + i] -
                 grid.v[plane + i]) *
                0.5 * H;
        }
    return out;
}

}  // namespace dfp
