#ifndef DFP_LOSS_HPP
#define DFP_LOSS_HPP

#include <functional>

#include "dfp/ops.hpp"
#include "dfp/tape.hpp"

namespace dfp {

// Orthonormal DCT-II matrix (j x j). Rows index frequency.
Tensor dct_matrix(int j);

// Sum over full j x j blocks (tiled from the top-left; partial right/bottom
// remainders are discarded) of the entrywise L1 norm of D*R*D^T.
Var satd_loss(Tape& t, Var residual, int j);

// ||down_s(phat) - down_s(p)||_2^2 with bilinear half-scaling per factor of
// 2 (equal to 2x2 mean under the half-pixel convention). s in {1,2,4}; odd
// extents are floor-cropped before halving.
Var multiscale_mse(Tape& t, Var phat, Var p, int s);

// Fixed-seed object-context feature extractor: four stride-2 3x3
// convolutions with LeakyReLU, weights frozen at construction and stored
// with the model weights. Stands in for a detector backbone; any extractor
// with the FeatureFn signature can be plugged instead.
struct ContextExtractor {
    std::vector<Tensor> weights;  // (Cout,Cin,3,3) each
    std::vector<Tensor> biases;
    double slope = 0.1;

    static ContextExtractor make_default(std::uint64_t seed);
    Var apply(Tape& t, Var x) const;
};

using FeatureFn = std::function<Var(Tape&, Var)>;

// ||phi(phat) - phi(p)||_2^2. Errors if the extractor maps the two inputs
// to different shapes.
Var context_loss(Tape& t, Var phat, Var p, const FeatureFn& phi);
Var context_loss(Tape& t, Var phat, Var p, const ContextExtractor& ctx);

struct LossSwitches {
    bool satd = true;       // all three transform sizes
    bool mse_scale24 = true;  // the s=2 and s=4 MSE terms
    bool ctx = true;
};

struct LossBreakdown {
    double satd8 = 0, satd16 = 0, satd32 = 0;
    double mse1 = 0, mse2 = 0, mse4 = 0;
    double ctx = 0;
    double total = 0;
};

// sum_j SATD_j + sum_s s^2 * MSE_s + CTX, with terms removable via switches.
Var total_loss(Tape& t, Var phat, Var p, const ContextExtractor* ctx,
               const LossSwitches& sw = {}, LossBreakdown* breakdown = nullptr);

}  // namespace dfp

#endif
