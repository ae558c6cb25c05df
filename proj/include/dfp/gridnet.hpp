#ifndef DFP_GRIDNET_HPP
#define DFP_GRIDNET_HPP

#include <array>

#include "dfp/ops.hpp"
#include "dfp/params.hpp"

namespace dfp {

// Three-row synthesis grid over the stacked warped patches. Row r+1 runs at
// half the extent of row r with channels (32,64,96); six columns, the first
// three routing information downward through stride-2 convolutions, the last
// three routing it back up through bilinear x2 + convolution. Lateral blocks
// are two-conv residual blocks with LeakyReLU; the input block maps the
// 12-channel stack to the top row width and the output head maps the top row
// to 3 channels linearly.
struct GridNetConfig {
    int in_channels = 12;
    std::array<int, 3> row_channels = {32, 64, 96};
    int down_columns = 2;  // refinement columns in each half, plus the entry column
    int up_columns = 3;
    double leaky_slope = 0.1;
};

struct GridNetParams {
    GridNetConfig cfg;
    struct Conv {
        int w = -1, b = -1;
    };
    Conv in0, in1;              // input block convs (12->32->32)
    Conv down0, down1;          // entry column transfers 32->64->96
    struct DownCol {
        Conv lat0, lat1;        // row-1 residual pair
        Conv d01, d12;          // stride-2 transfers
    };
    struct UpCol {
        Conv lat0, lat1;        // row-3 residual pair
        Conv u21, u10;          // upsample transfers
    };
    std::vector<DownCol> down;
    std::vector<UpCol> up;
    Conv head;                  // 32->3
};

GridNetParams gridnet_register(ParamStore& store, const std::string& prefix,
                               const GridNetConfig& cfg, Rng& rng);

// stacked: (B,12,H,W) with H,W divisible by 4. Returns (B,3,H,W).
Var gridnet_forward(Tape& t, const std::vector<Var>& bound, const GridNetParams& p,
                    Var stacked);

}  // namespace dfp

#endif
