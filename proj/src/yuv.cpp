#include "dfp/yuv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dfp {

Frame420::Frame420(int width, int height) : w(width), h(height) {
    if (w < 2 || h < 2 || w % 2 || h % 2)
        throw std::invalid_argument("Frame420: dimensions must be even and >= 2, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    y.assign(static_cast<size_t>(w) * h, 0);
    u.assign(static_cast<size_t>(w / 2) * (h / 2), 0);
    v.assign(static_cast<size_t>(w / 2) * (h / 2), 0);
}

std::vector<Frame420> read_yuv420(const std::string& path, int w, int h, int max_frames) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<Frame420> frames;
    while (max_frames < 0 || static_cast<int>(frames.size()) < max_frames) {
        Frame420 fr(w, h);
        f.read(reinterpret_cast<char*>(fr.y.data()), static_cast<std::streamsize>(fr.y.size()));
        if (f.gcount() == 0) break;
        if (f.gcount() != static_cast<std::streamsize>(fr.y.size()))
            throw std::runtime_error("truncated YUV frame in " + path);
        f.read(reinterpret_cast<char*>(fr.u.data()), static_cast<std::streamsize>(fr.u.size()));
        f.read(reinterpret_cast<char*>(fr.v.data()), static_cast<std::streamsize>(fr.v.size()));
        if (!f) throw std::runtime_error("truncated YUV frame in " + path);
        frames.push_back(std::move(fr));
    }
    return frames;
}

void write_yuv420(const std::string& path, const std::vector<Frame420>& frames) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& fr : frames) {
        f.write(reinterpret_cast<const char*>(fr.y.data()),
                static_cast<std::streamsize>(fr.y.size()));
        f.write(reinterpret_cast<const char*>(fr.u.data()),
                static_cast<std::streamsize>(fr.u.size()));
        f.write(reinterpret_cast<const char*>(fr.v.data()),
                static_cast<std::streamsize>(fr.v.size()));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

Tensor plane_to_tensor(const std::uint8_t* plane, int w, int h) {
    Tensor t(Shape{1, 1, h, w});
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) t.v[i] = plane[i] / 255.0;
    return t;
}

void tensor_to_plane(const Tensor& t, int ch, std::uint8_t* plane) {
    int H = t.dim(2), W = t.dim(3);
    const double* src = t.data() + static_cast<size_t>(ch) * H * W;
    for (size_t i = 0; i < static_cast<size_t>(H) * W; ++i) {
        double x = std::round(src[i] * 255.0);
        plane[i] = static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0));
    }
}

std::vector<double> upsample2_plane(const std::vector<double>& p, int w, int h) {
    auto tap = [](int o, int extent, int& i0, int& i1, double& w0) {
        double pos = (o + 0.5) / 2.0 - 0.5;
        int base = static_cast<int>(std::floor(pos));
        double f = pos - base;
        i0 = std::clamp(base, 0, extent - 1);
        i1 = std::clamp(base + 1, 0, extent - 1);
        w0 = 1.0 - f;
    };
    std::vector<double> out(static_cast<size_t>(2 * w) * (2 * h));
    for (int y = 0; y < 2 * h; ++y) {
        int y0, y1;
        double wy;
        tap(y, h, y0, y1, wy);
        for (int x = 0; x < 2 * w; ++x) {
            int x0, x1;
            double wx;
            tap(x, w, x0, x1, wx);
            out[static_cast<size_t>(y) * 2 * w + x] =
                wy * (wx * p[static_cast<size_t>(y0) * w + x0] +
                      (1 - wx) * p[static_cast<size_t>(y0) * w + x1]) +
                (1 - wy) * (wx * p[static_cast<size_t>(y1) * w + x0] +
                            (1 - wx) * p[static_cast<size_t>(y1) * w + x1]);
        }
    }
    return out;
}

std::vector<double> downsample2_plane(const std::vector<double>& p, int w, int h) {
    if (w % 2 || h % 2) throw std::invalid_argument("downsample2_plane: extents must be even");
    std::vector<double> out(static_cast<size_t>(w / 2) * (h / 2));
    for (int y = 0; y < h / 2; ++y)
        for (int x = 0; x < w / 2; ++x)
            out[static_cast<size_t>(y) * (w / 2) + x] =
                0.25 * (p[static_cast<size_t>(2 * y) * w + 2 * x] +
                        p[static_cast<size_t>(2 * y) * w + 2 * x + 1] +
                        p[static_cast<size_t>(2 * y + 1) * w + 2 * x] +
                        p[static_cast<size_t>(2 * y + 1) * w + 2 * x + 1]);
    return out;
}

Tensor frame_to_tensor444(const Frame420& f) {
    Tensor t(Shape{1, 3, f.h, f.w});
    size_t plane = static_cast<size_t>(f.w) * f.h;
    for (size_t i = 0; i < plane; ++i) t.v[i] = f.y[i] / 255.0;
    int cw = f.w / 2, ch = f.h / 2;
    std::vector<double> tmp(static_cast<size_t>(cw) * ch);
    for (int c = 0; c < 2; ++c) {
        const auto& src = c == 0 ? f.u : f.v;
        for (size_t i = 0; i < tmp.size(); ++i) tmp[i] = src[i] / 255.0;
        auto up = upsample2_plane(tmp, cw, ch);
        std::copy(up.begin(), up.end(), t.v.begin() + static_cast<std::ptrdiff_t>((1 + c) * plane));
    }
    return t;
}

Frame420 tensor444_to_frame(const Tensor& t) {
    if (t.rank() != 4 || t.dim(0) != 1 || t.dim(1) != 3)
        throw std::invalid_argument("tensor444_to_frame: expected (1,3,H,W), got " +
                                    shape_str(t.shape));
    int H = t.dim(2), W = t.dim(3);
    Frame420 f(W, H);
    tensor_to_plane(t, 0, f.y.data());
    size_t plane = static_cast<size_t>(W) * H;
    std::vector<double> full(plane);
    for (int c = 0; c < 2; ++c) {
        std::copy(t.v.begin() + static_cast<std::ptrdiff_t>((1 + c) * plane),
                  t.v.begin() + static_cast<std::ptrdiff_t>((2 + c) * plane), full.begin());
        auto half = downsample2_plane(full, W, H);
        auto& dst = c == 0 ? f.u : f.v;
        for (size_t i = 0; i < half.size(); ++i) {
            double x = std::round(half[i] * 255.0);
            dst[i] = static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0));
        }
    }
    return f;
}

double psnr_8bit(const std::uint8_t* a, const std::uint8_t* b, size_t n) {
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        sse += d * d;
    }
    if (sse == 0.0) return 99.0;
    double mse = sse / static_cast<double>(n);
    return std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

}  // namespace dfp
