#ifndef DFP_COMPOSER_HPP
#define DFP_COMPOSER_HPP

#include <functional>
#include <string>

#include "dfp/model.hpp"
#include "dfp/yuv.hpp"

namespace dfp {

constexpr int kWindow = 152;  // predictor input extent
constexpr int kStride = 64;   // destination strip width

// Sliding-window plan: windows of 152 starting at 0, then 20, then +64,
// with the trailing window snapped to the frame edge (windows never leave
// the frame). Each distinct window origin contributes one tile whose crop
// covers its destination strip(s); destination rects partition the frame
// exactly.
struct TileLayout {
    struct AxisTile {
        int origin;     // window start
        int dst_begin;  // destination interval [dst_begin, dst_end)
        int dst_end;
        int crop_begin() const { return dst_begin - origin; }
        int crop_end() const { return dst_end - origin; }
    };
    int frame_w = 0, frame_h = 0;
    std::vector<AxisTile> cols, rows;

    size_t tile_count() const { return cols.size() * rows.size(); }
};

TileLayout plan_tiles(int frame_w, int frame_h);

// Maps a pair of 152x152 (1,3,H,W) windows to the predicted window.
using PatchPredictor = std::function<Tensor(const Tensor&, const Tensor&)>;

// Slides the predictor over both reference frames ((1,3,H,W) tensors of
// equal size) and assembles the predicted frame from per-tile crops.
// Predictor failures are rethrown with the tile index attached.
Tensor compose(const PatchPredictor& predictor, const Tensor& ref1, const Tensor& ref2);

enum class ChromaMode {
    upsampled,  // chroma doubled to luma resolution, predicted jointly
    native,     // each plane predicted at its own resolution (needs chroma >= 152)
};

ChromaMode chroma_mode_from_name(const std::string& name);
const char* chroma_mode_name(ChromaMode m);

Frame420 compose_frame(const PatchPredictor& predictor, const Frame420& ref1,
                       const Frame420& ref2, ChromaMode mode = ChromaMode::upsampled);

// Predictor backed by trained weights.
PatchPredictor model_predictor(const FramePredictor& model);

}  // namespace dfp

#endif
