#ifndef DFP_YUV_HPP
#define DFP_YUV_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dfp/tensor.hpp"

namespace dfp {

// One planar 8-bit 4:2:0 frame. Luma is w*h, each chroma plane (w/2)*(h/2).
struct Frame420 {
    int w = 0, h = 0;
    std::vector<std::uint8_t> y, u, v;

    Frame420() = default;
    Frame420(int width, int height);
    bool same_size(const Frame420& o) const { return w == o.w && h == o.h; }
};

// Raw headerless YUV420 files; dimensions come from the caller.
std::vector<Frame420> read_yuv420(const std::string& path, int w, int h,
                                  int max_frames = -1);
void write_yuv420(const std::string& path, const std::vector<Frame420>& frames);

// 8-bit plane <-> unit-range tensor plumbing.
Tensor plane_to_tensor(const std::uint8_t* plane, int w, int h);        // (1,1,h,w)
void tensor_to_plane(const Tensor& t, int ch, std::uint8_t* plane);     // round + clip

// (1,3,H,W) in [0,1]; chroma bilinearly doubled to luma resolution.
Tensor frame_to_tensor444(const Frame420& f);
// Inverse: chroma planes are 2x2 means of the full-resolution channels.
Frame420 tensor444_to_frame(const Tensor& t);

// Standalone plane resamplers (same conventions as the tensor ops).
std::vector<double> upsample2_plane(const std::vector<double>& p, int w, int h);   // -> 2w x 2h
std::vector<double> downsample2_plane(const std::vector<double>& p, int w, int h); // -> w/2 x h/2

double psnr_8bit(const std::uint8_t* a, const std::uint8_t* b, size_t n);  // capped at 99 dB

}  // namespace dfp

#endif
