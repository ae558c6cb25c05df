#ifndef DFP_CODEC_HPP
#define DFP_CODEC_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfp/model.hpp"
#include "dfp/yuv.hpp"

namespace dfp::codec {

// ---------------------------------------------------------------- reference
// management

struct RefEntry {
    int poc = 0;
    bool is_dnn = false;  // entry injected by the reference-list update
};

struct RefLists {
    std::vector<RefEntry> l0, l1;
};

struct RefPick {
    bool available = false;
    int ref1_poc = 0, ref2_poc = 0;
};

// Chooses the two predictor inputs from the decoded POCs. Bi-directional:
// the nearest equidistant past/future pair within distance 2. Uni: the
// frames at t-1 and t-2. Unavailability is a value, not an error.
RefPick can_predict(const std::vector<int>& decoded_pocs, int poc, Direction dir);

struct RluRecord {
    bool replaced = false;
    int list = -1;      // 0 or 1
    int index = -1;     // slot within the list
    int old_poc = 0;    // frame that was replaced
};

// Replaces one reference slot with the predicted-frame entry. Bi: the frame
// with the largest POC distance from `poc` is replaced (ties go to the
// larger POC); if it sits in L0 or in both lists its L0 slot is replaced,
// if only in L1 its L1 slot. Uni: the third L0 slot, only when L0 holds
// three or more frames. List lengths never change.
RluRecord rlu_update(RefLists& lists, int poc, Direction dir);

// ------------------------------------------------------------------- rate /
// distortion

double lambda_from_qp(int qp);  // 0.85 * 2^((qp-12)/3)
double qstep_from_qp(int qp);   // 2^((qp-4)/6)

enum class ModeKind { Skip = 0, DnnDirect = 1, Inter = 2, DnnWithMv = 3, Intra = 4 };
const char* mode_name(ModeKind m);

struct ModeCandidate {
    ModeKind kind = ModeKind::Intra;
    double sse = 0.0;
    double bits = 0.0;
};

// argmin of sse + lambda*bits; ties broken by the fixed mode priority
// Skip > DnnDirect > Inter > DnnWithMv > Intra, then by position.
size_t rdo_select(const std::vector<ModeCandidate>& candidates, double lambda);

// Residual proxy: 8x8 DCT tiling, uniform quantization, entropy proxy of
// sum(log2(1+|level|)) plus a small per-tile signaling constant. A qstep of
// 0 skips quantization entirely (transform round-trip, bits from raw
// coefficient magnitudes).
struct CodedResidual {
    double bits = 0.0;
    std::vector<double> recon;         // dequantized residual, bw*bh
    std::vector<std::int32_t> levels;  // tile-major quantized coefficients
};
CodedResidual code_residual(const std::vector<double>& resid, int bw, int bh, double qstep);

// --------------------------------------------------------------------- the
// simulator

enum class Tool { baseline, dm, dm_rlu };
Tool tool_from_name(const std::string& name);
const char* tool_name(Tool t);

struct CodecConfig {
    int qp = 32;
    Tool tool = Tool::baseline;
    Direction direction = Direction::uni;
    int block = 64;
    bool split32 = false;  // evaluate a 4-way split of each 64 block
    int search_range = 8;  // full-search motion range, integer pixels
    int dpb_capacity = 4;
};

// Builds the predicted frame for target_poc from the two chosen references.
using PredictHook = std::function<Frame420(const Frame420& ref1, int poc1,
                                           const Frame420& ref2, int poc2, int target_poc)>;

struct BlockDecision {
    int x = 0, y = 0, w = 0, h = 0;
    ModeKind kind = ModeKind::Intra;
    int list = 0, ref_idx = 0;
    int mv_x = 0, mv_y = 0;
    bool split = false;                      // this is a 32-split parent marker
    std::vector<std::int32_t> levels_y, levels_u, levels_v;
    double bits = 0.0;
};

struct FrameStats {
    int poc = 0;
    char type = 'I';
    double bits = 0.0;
    double psnr_y = 0.0, psnr_u = 0.0, psnr_v = 0.0;
    // percentage of frame area per mode
    double share_intra = 0.0, share_inter = 0.0, share_skip = 0.0, share_dnn = 0.0,
           share_dnn_mv = 0.0;
    bool dnn_available = false;
    RluRecord rlu;
};

struct SequenceResult {
    CodecConfig cfg;
    std::vector<FrameStats> frames;
    std::vector<Frame420> recon;                       // decoded picture output
    std::vector<std::vector<BlockDecision>> decisions;  // per frame, coding order
    double total_bits = 0.0;
    double mean_psnr_y = 0.0, mean_psnr_u = 0.0, mean_psnr_v = 0.0;
};

// Encodes in IPPP order (uni) or a two-layer B structure (bi). Frame
// dimensions must be multiples of 16 and >= 32. A null hook disables the
// predictor; dm/dm-rlu then degrade to the baseline mode set.
SequenceResult encode_sequence(const std::vector<Frame420>& frames, const CodecConfig& cfg,
                               const PredictHook& hook = nullptr);

// Replays recorded decisions on the decoder side; reproduces the encoder
// reconstruction exactly (no side information beyond the records).
std::vector<Frame420> decode_sequence(const SequenceResult& encoded, int frame_w, int frame_h,
                                      const PredictHook& hook = nullptr);

void write_report(const std::string& path, const SequenceResult& result);

// Moves every plane of `src` by (dx,dy) luma pixels with border replication
// (chroma moves by half). Test stand-in for an ideal predictor.
Frame420 shift_frame(const Frame420& src, int dx, int dy);
PredictHook ideal_shift_hook(int vx, int vy);  // global velocity per POC step

}  // namespace dfp::codec

#endif
