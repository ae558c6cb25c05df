#include "dfp/composer.hpp"

#include <algorithm>
#include <stdexcept>

namespace dfp {

namespace {

std::vector<TileLayout::AxisTile> axis_tiles(int extent) {
    int cap = extent - kWindow;
    std::vector<int> origins{0};
    for (int k = 1; cap > 0; ++k) {
        int raw = std::min(20 + kStride * (k - 1), cap);
        if (raw <= origins.back()) break;
        origins.push_back(raw);
        if (raw == cap) break;
    }
    int m = static_cast<int>(origins.size());
    std::vector<TileLayout::AxisTile> tiles(origins.size());
    for (int j = 0; j < m; ++j) {
        tiles[static_cast<size_t>(j)].origin = origins[static_cast<size_t>(j)];
        tiles[static_cast<size_t>(j)].dst_begin = kStride * j;
        tiles[static_cast<size_t>(j)].dst_end = j + 1 < m ? kStride * (j + 1) : extent;
    }
    for (const auto& t : tiles) {
        if (t.crop_begin() < 0 || t.crop_end() > kWindow || t.dst_end <= t.dst_begin ||
            t.origin < 0 || t.origin + kWindow > extent)
            throw std::logic_error("plan_tiles: inconsistent axis tile");
    }
    return tiles;
}

}  // namespace

TileLayout plan_tiles(int frame_w, int frame_h) {
    if (frame_w < kWindow || frame_h < kWindow)
        throw std::invalid_argument("plan_tiles: frame " + std::to_string(frame_w) + "x" +
                                    std::to_string(frame_h) + " smaller than the " +
                                    std::to_string(kWindow) + " window");
    TileLayout layout;
    layout.frame_w = frame_w;
    layout.frame_h = frame_h;
    layout.cols = axis_tiles(frame_w);
    layout.rows = axis_tiles(frame_h);
    // exact cover by construction; verify anyway
    std::int64_t area = 0;
    for (const auto& c : layout.cols)
        for (const auto& r : layout.rows)
            area += static_cast<std::int64_t>(c.dst_end - c.dst_begin) *
                    (r.dst_end - r.dst_begin);
    if (area != static_cast<std::int64_t>(frame_w) * frame_h)
        throw std::logic_error("plan_tiles: destination rects do not cover the frame");
    return layout;
}

namespace {

Tensor extract_window(const Tensor& frame, int ox, int oy) {
    int C = frame.dim(1), W = frame.dim(3);
    Tensor out(Shape{1, C, kWindow, kWindow});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < kWindow; ++y) {
            const double* src =
                frame.data() + (static_cast<size_t>(c) * frame.dim(2) + oy + y) * W + ox;
            std::copy(src, src + kWindow,
                      out.data() + (static_cast<size_t>(c) * kWindow + y) * kWindow);
        }
    return out;
}

}  // namespace

Tensor compose(const PatchPredictor& predictor, const Tensor& ref1, const Tensor& ref2) {
    if (ref1.rank() != 4 || ref1.dim(0) != 1 || ref1.dim(1) != 3)
        throw std::invalid_argument("compose: frames must be (1,3,H,W), got " +
                                    shape_str(ref1.shape));
    if (!ref1.same_shape(ref2))
        throw std::invalid_argument("compose: reference sizes differ, " +
                                    shape_str(ref1.shape) + " vs " + shape_str(ref2.shape));
    int H = ref1.dim(2), W = ref1.dim(3);
    TileLayout layout = plan_tiles(W, H);
    Tensor out(Shape{1, 3, H, W});
    for (size_t rj = 0; rj < layout.rows.size(); ++rj) {
        const auto& row = layout.rows[rj];
        for (size_t cj = 0; cj < layout.cols.size(); ++cj) {
            const auto& col = layout.cols[cj];
            Tensor pred;
            try {
                Tensor w1 = extract_window(ref1, col.origin, row.origin);
                Tensor w2 = extract_window(ref2, col.origin, row.origin);
                pred = predictor(w1, w2);
            } catch (const std::exception& e) {
                throw std::runtime_error("compose: tile (" + std::to_string(cj) + "," +
                                         std::to_string(rj) + ") at window (" +
                                         std::to_string(col.origin) + "," +
                                         std::to_string(row.origin) + "): " + e.what());
            }
            if (pred.shape != Shape{1, 3, kWindow, kWindow})
                throw std::runtime_error("compose: tile (" + std::to_string(cj) + "," +
                                         std::to_string(rj) +
                                         "): predictor returned shape " +
                                         shape_str(pred.shape));
            for (int c = 0; c < 3; ++c)
                for (int y = row.dst_begin; y < row.dst_end; ++y) {
                    const double* src =
                        pred.data() + (static_cast<size_t>(c) * kWindow + (y - row.origin)) *
                                          kWindow +
                        col.crop_begin();
                    double* dst =
                        out.data() + (static_cast<size_t>(c) * H + y) * W + col.dst_begin;
                    std::copy(src, src + (col.dst_end - col.dst_begin), dst);
                }
        }
    }
    return out;
}

ChromaMode chroma_mode_from_name(const std::string& name) {
    if (name == "upsampled") return ChromaMode::upsampled;
    if (name == "native") return ChromaMode::native;
    throw std::invalid_argument("unknown chroma mode: " + name);
}

const char* chroma_mode_name(ChromaMode m) {
    return m == ChromaMode::upsampled ? "upsampled" : "native";
}

namespace {

// replicate a single plane across the three predictor channels
Tensor plane3(const std::vector<std::uint8_t>& p, int w, int h) {
    Tensor t(Shape{1, 3, h, w});
    size_t n = static_cast<size_t>(w) * h;
    for (size_t i = 0; i < n; ++i) {
        double x = p[i] / 255.0;
        t.v[i] = x;
        t.v[n + i] = x;
        t.v[2 * n + i] = x;
    }
    return t;
}

}  // namespace

Frame420 compose_frame(const PatchPredictor& predictor, const Frame420& ref1,
                       const Frame420& ref2, ChromaMode mode) {
    if (!ref1.same_size(ref2))
        throw std::invalid_argument("compose_frame: reference sizes differ");
    if (mode == ChromaMode::upsampled) {
        Tensor t1 = frame_to_tensor444(ref1);
        Tensor t2 = frame_to_tensor444(ref2);
        return tensor444_to_frame(compose(predictor, t1, t2));
    }
    // native: every plane runs through its own tiling
    int cw = ref1.w / 2, chh = ref1.h / 2;
    if (cw < kWindow || chh < kWindow)
        throw std::invalid_argument(
            "compose_frame: native chroma mode needs chroma planes >= 152, frame is " +
            std::to_string(ref1.w) + "x" + std::to_string(ref1.h));
    Frame420 out(ref1.w, ref1.h);
    Tensor py = compose(predictor, plane3(ref1.y, ref1.w, ref1.h),
                        plane3(ref2.y, ref2.w, ref2.h));
    tensor_to_plane(py, 0, out.y.data());
    Tensor pu = compose(predictor, plane3(ref1.u, cw, chh), plane3(ref2.u, cw, chh));
    tensor_to_plane(pu, 0, out.u.data());
    Tensor pv = compose(predictor, plane3(ref1.v, cw, chh), plane3(ref2.v, cw, chh));
    tensor_to_plane(pv, 0, out.v.data());
    return out;
}

PatchPredictor model_predictor(const FramePredictor& model) {
    return [&model](const Tensor& p1, const Tensor& p2) { return model.predict(p1, p2); };
}

}  // namespace dfp
