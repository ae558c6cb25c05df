#include "dfp/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "dfp/loss.hpp"

namespace dfp::codec {

// ---------------------------------------------------------------- reference
// management

RefPick can_predict(const std::vector<int>& decoded_pocs, int poc, Direction dir) {
    auto has = [&](int p) {
        return std::find(decoded_pocs.begin(), decoded_pocs.end(), p) != decoded_pocs.end();
    };
    RefPick pick;
    if (dir == Direction::uni) {
        if (has(poc - 1) && has(poc - 2)) {
            pick.available = true;
            pick.ref1_poc = poc - 1;
            pick.ref2_poc = poc - 2;
        }
        return pick;
    }
    for (int d = 1; d <= 2; ++d) {
        if (has(poc - d) && has(poc + d)) {
            pick.available = true;
            pick.ref1_poc = poc - d;
            pick.ref2_poc = poc + d;
            return pick;
        }
    }
    return pick;
}

RluRecord rlu_update(RefLists& lists, int poc, Direction dir) {
    RluRecord rec;
    if (dir == Direction::uni) {
        if (lists.l0.size() < 3) return rec;
        rec.replaced = true;
        rec.list = 0;
        rec.index = 2;
        rec.old_poc = lists.l0[2].poc;
        lists.l0[2] = RefEntry{poc, true};
        return rec;
    }
    // farthest POC over both lists; ties go to the larger POC
    bool found = false;
    int far_poc = 0;
    auto consider = [&](const RefEntry& e) {
        if (e.is_dnn) return;
        int d = std::abs(e.poc - poc);
        int best = std::abs(far_poc - poc);
        if (!found || d > best || (d == best && e.poc > far_poc)) {
            found = true;
            far_poc = e.poc;
        }
    };
    for (const auto& e : lists.l0) consider(e);
    for (const auto& e : lists.l1) consider(e);
    if (!found) return rec;
    auto slot_of = [&](std::vector<RefEntry>& l) {
        for (size_t i = 0; i < l.size(); ++i)
            if (!l[i].is_dnn && l[i].poc == far_poc) return static_cast<int>(i);
        return -1;
    };
    int i0 = slot_of(lists.l0);
    if (i0 >= 0) {  // in L0, or in both: the L0 slot is replaced
        rec.replaced = true;
        rec.list = 0;
        rec.index = i0;
        rec.old_poc = far_poc;
        lists.l0[static_cast<size_t>(i0)] = RefEntry{poc, true};
        return rec;
    }
    int i1 = slot_of(lists.l1);
    if (i1 >= 0) {
        rec.replaced = true;
        rec.list = 1;
        rec.index = i1;
        rec.old_poc = far_poc;
        lists.l1[static_cast<size_t>(i1)] = RefEntry{poc, true};
    }
    return rec;
}

// ------------------------------------------------------------------- rate /
// distortion

double lambda_from_qp(int qp) { return 0.85 * std::pow(2.0, (qp - 12) / 3.0); }
double qstep_from_qp(int qp) { return std::pow(2.0, (qp - 4) / 6.0); }

const char* mode_name(ModeKind m) {
    switch (m) {
        case ModeKind::Skip: return "skip";
        case ModeKind::DnnDirect: return "dnn";
        case ModeKind::Inter: return "inter";
        case ModeKind::DnnWithMv: return "dnn-mv";
        case ModeKind::Intra: return "intra";
    }
    return "?";
}

size_t rdo_select(const std::vector<ModeCandidate>& candidates, double lambda) {
    if (candidates.empty()) throw std::invalid_argument("rdo_select: empty candidate set");
    size_t best = 0;
    double best_j = candidates[0].sse + lambda * candidates[0].bits;
    for (size_t i = 1; i < candidates.size(); ++i) {
        double j = candidates[i].sse + lambda * candidates[i].bits;
        bool better = j < best_j ||
                      (j == best_j && static_cast<int>(candidates[i].kind) <
                                          static_cast<int>(candidates[best].kind));
        if (better) {
            best = i;
            best_j = j;
        }
    }
    return best;
}

CodedResidual code_residual(const std::vector<double>& resid, int bw, int bh, double qstep) {
    if (bw % 8 || bh % 8 || bw < 8 || bh < 8)
        throw std::invalid_argument("code_residual: block " + std::to_string(bw) + "x" +
                                    std::to_string(bh) + " must tile into 8x8");
    if (resid.size() != static_cast<size_t>(bw) * bh)
        throw std::invalid_argument("code_residual: data length mismatch");
    static const Tensor d8 = dct_matrix(8);
    CodedResidual out;
    out.recon.assign(resid.size(), 0.0);
    bool lossless = qstep <= 0.0;
    if (!lossless) out.levels.reserve(resid.size());
    double blk[64], tmp[64], coef[64];
    for (int ty = 0; ty < bh / 8; ++ty)
        for (int tx = 0; tx < bw / 8; ++tx) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    blk[y * 8 + x] = resid[static_cast<size_t>(ty * 8 + y) * bw + tx * 8 + x];
            // coef = D * blk * D^T
            for (int r = 0; r < 8; ++r)
                for (int q = 0; q < 8; ++q) {
                    double s = 0;
                    for (int k = 0; k < 8; ++k) s += d8.v[r * 8 + k] * blk[k * 8 + q];
                    tmp[r * 8 + q] = s;
                }
            for (int r = 0; r < 8; ++r)
                for (int q = 0; q < 8; ++q) {
                    double s = 0;
                    for (int k = 0; k < 8; ++k) s += tmp[r * 8 + k] * d8.v[q * 8 + k];
                    coef[r * 8 + q] = s;
                }
            out.bits += 2.0;  // per-tile signaling constant
            if (lossless) {
                for (double c : coef) out.bits += std::log2(1.0 + std::abs(c));
            } else {
                for (int i = 0; i < 64; ++i) {
                    auto level = static_cast<std::int32_t>(std::llround(coef[i] / qstep));
                    out.levels.push_back(level);
                    out.bits += std::log2(1.0 + std::abs(static_cast<double>(level)));
                    coef[i] = level * qstep;
                }
            }
            // blk = D^T * coef * D
            for (int r = 0; r < 8; ++r)
                for (int q = 0; q < 8; ++q) {
                    double s = 0;
                    for (int k = 0; k < 8; ++k) s += d8.v[k * 8 + r] * coef[k * 8 + q];
                    tmp[r * 8 + q] = s;
                }
            for (int r = 0; r < 8; ++r)
                for (int q = 0; q < 8; ++q) {
                    double s = 0;
                    for (int k = 0; k < 8; ++k) s += tmp[r * 8 + k] * d8.v[k * 8 + q];
                    out.recon[static_cast<size_t>(ty * 8 + r) * bw + tx * 8 + q] = s;
                }
        }
    return out;
}

// ---------------------------------------------------------------- simulator
// internals

Tool tool_from_name(const std::string& name) {
    if (name == "baseline") return Tool::baseline;
    if (name == "dm") return Tool::dm;
    if (name == "dm-rlu") return Tool::dm_rlu;
    throw std::invalid_argument("unknown codec mode: " + name);
}

const char* tool_name(Tool t) {
    switch (t) {
        case Tool::baseline: return "baseline";
        case Tool::dm: return "dm";
        case Tool::dm_rlu: return "dm-rlu";
    }
    return "?";
}

namespace {

struct Plane {
    const std::uint8_t* data;
    int w, h;
};

Plane plane_of(const Frame420& f, int p) {
    if (p == 0) return {f.y.data(), f.w, f.h};
    return {p == 1 ? f.u.data() : f.v.data(), f.w / 2, f.h / 2};
}

std::uint8_t* plane_of_mut(Frame420& f, int p, int* w, int* h) {
    if (p == 0) {
        *w = f.w;
        *h = f.h;
        return f.y.data();
    }
    *w = f.w / 2;
    *h = f.h / 2;
    return p == 1 ? f.u.data() : f.v.data();
}

// motion-compensated prediction with border replication
void predict_block(const Plane& ref, int x, int y, int bw, int bh, int mvx, int mvy,
                   std::vector<double>& out) {
    out.resize(static_cast<size_t>(bw) * bh);
    for (int yy = 0; yy < bh; ++yy) {
        int sy = std::clamp(y + yy + mvy, 0, ref.h - 1);
        for (int xx = 0; xx < bw; ++xx) {
            int sx = std::clamp(x + xx + mvx, 0, ref.w - 1);
            out[static_cast<size_t>(yy) * bw + xx] = ref.data[static_cast<size_t>(sy) * ref.w + sx];
        }
    }
}

double mv_component_bits(int d) { return 1.0 + 2.0 * std::log2(1.0 + std::abs(d)); }

double mv_bits(int dx, int dy) { return mv_component_bits(dx) + mv_component_bits(dy); }

struct CandidateFull {
    ModeCandidate rd;
    BlockDecision dec;
    std::vector<double> recon_y, recon_u, recon_v;
};

struct FrameCtx {
    const Frame420* source = nullptr;  // null on decode
    Frame420* recon = nullptr;
    const Frame420* xhat = nullptr;
    RefLists lists;
    std::map<int, const Frame420*> by_poc;
    double qstep = 0.0;
    double lambda = 0.0;
    bool dnn_available = false;
    Tool tool = Tool::baseline;
};

const Frame420* resolve(const FrameCtx& ctx, const RefEntry& e) {
    if (e.is_dnn) return ctx.xhat;
    auto it = ctx.by_poc.find(e.poc);
    if (it == ctx.by_poc.end()) throw std::logic_error("codec: reference poc missing");
    return it->second;
}

// codes one prediction against the source block, returns recon planes + sse
void code_block_against(const FrameCtx& ctx, int x, int y, int bw, int bh,
                        const Frame420& pred_frame, int mvx, int mvy, CandidateFull& cand,
                        bool zero_residual) {
    double sse = 0.0;
    double bits = 0.0;
    for (int p = 0; p < 3; ++p) {
        Plane sp = plane_of(*ctx.source, p);
        Plane rp = plane_of(pred_frame, p);
        int px = p == 0 ? x : x / 2, py = p == 0 ? y : y / 2;
        int pw = p == 0 ? bw : bw / 2, ph = p == 0 ? bh : bh / 2;
        int pmvx = p == 0 ? mvx : (mvx >> 1), pmvy = p == 0 ? mvy : (mvy >> 1);
        std::vector<double> pred;
        predict_block(rp, px, py, pw, ph, pmvx, pmvy, pred);
        std::vector<double>* recon = p == 0 ? &cand.recon_y : (p == 1 ? &cand.recon_u : &cand.recon_v);
        recon->resize(pred.size());
        std::vector<std::int32_t>* levels =
            p == 0 ? &cand.dec.levels_y : (p == 1 ? &cand.dec.levels_u : &cand.dec.levels_v);
        if (zero_residual) {
            for (size_t i = 0; i < pred.size(); ++i) (*recon)[i] = pred[i];
            levels->clear();
        } else {
            std::vector<double> resid(pred.size());
            for (int yy = 0; yy < ph; ++yy)
                for (int xx = 0; xx < pw; ++xx)
                    resid[static_cast<size_t>(yy) * pw + xx] =
                        sp.data[static_cast<size_t>(py + yy) * sp.w + px + xx] -
                        pred[static_cast<size_t>(yy) * pw + xx];
            CodedResidual coded = code_residual(resid, pw, ph, ctx.qstep);
            bits += coded.bits;
            *levels = std::move(coded.levels);
            for (size_t i = 0; i < pred.size(); ++i)
                (*recon)[i] = std::clamp(std::round(pred[i] + coded.recon[i]), 0.0, 255.0);
        }
        for (int yy = 0; yy < ph; ++yy)
            for (int xx = 0; xx < pw; ++xx) {
                double d = (*recon)[static_cast<size_t>(yy) * pw + xx] -
                           sp.data[static_cast<size_t>(py + yy) * sp.w + px + xx];
                sse += d * d;
            }
    }
    cand.rd.sse = sse;
    cand.rd.bits += bits;
    cand.dec.bits = cand.rd.bits;
}

// replay-side reconstruction of one recorded block
void reconstruct_block(const FrameCtx& ctx, const BlockDecision& d) {
    const Frame420* pred_frame = nullptr;
    int mvx = 0, mvy = 0;
    switch (d.kind) {
        case ModeKind::Skip:
            pred_frame = resolve(ctx, ctx.lists.l0.at(0));
            break;
        case ModeKind::DnnDirect:
            pred_frame = ctx.xhat;
            break;
        case ModeKind::Inter:
        case ModeKind::DnnWithMv: {
            const auto& list = d.list == 0 ? ctx.lists.l0 : ctx.lists.l1;
            pred_frame = resolve(ctx, list.at(static_cast<size_t>(d.ref_idx)));
            mvx = d.mv_x;
            mvy = d.mv_y;
            break;
        }
        case ModeKind::Intra:
            break;
    }
    for (int p = 0; p < 3; ++p) {
        int rw, rh;
        std::uint8_t* out = plane_of_mut(*ctx.recon, p, &rw, &rh);
        int px = p == 0 ? d.x : d.x / 2, py = p == 0 ? d.y : d.y / 2;
        int pw = p == 0 ? d.w : d.w / 2, ph = p == 0 ? d.h : d.h / 2;
        std::vector<double> pred;
        if (d.kind == ModeKind::Intra) {
            pred.assign(static_cast<size_t>(pw) * ph, 128.0);
        } else {
            Plane rp = plane_of(*pred_frame, p);
            predict_block(rp, px, py, pw, ph, p == 0 ? mvx : (mvx >> 1),
                          p == 0 ? mvy : (mvy >> 1), pred);
        }
        const std::vector<std::int32_t>& levels =
            p == 0 ? d.levels_y : (p == 1 ? d.levels_u : d.levels_v);
        std::vector<double> resid(pred.size(), 0.0);
        if (!levels.empty()) {
            if (levels.size() != pred.size())
                throw std::logic_error("codec: level count mismatch on replay");
            // dequantize + inverse transform, same path as code_residual
            static const Tensor d8 = dct_matrix(8);
            double coef[64], tmp[64];
            for (int ty = 0; ty < ph / 8; ++ty)
                for (int tx = 0; tx < pw / 8; ++tx) {
                    size_t base = (static_cast<size_t>(ty) * (pw / 8) + tx) * 64;
                    for (int i = 0; i < 64; ++i) coef[i] = levels[base + i] * ctx.qstep;
                    for (int r = 0; r < 8; ++r)
                        for (int q = 0; q < 8; ++q) {
                            double s = 0;
                            for (int k = 0; k < 8; ++k) s += d8.v[k * 8 + r] * coef[k * 8 + q];
                            tmp[r * 8 + q] = s;
                        }
                    for (int r = 0; r < 8; ++r)
                        for (int q = 0; q < 8; ++q) {
                            double s = 0;
                            for (int k = 0; k < 8; ++k) s += tmp[r * 8 + k] * d8.v[k * 8 + q];
                            resid[static_cast<size_t>(ty * 8 + r) * pw + tx * 8 + q] = s;
                        }
                }
        }
        for (int yy = 0; yy < ph; ++yy)
            for (int xx = 0; xx < pw; ++xx) {
                double v = pred[static_cast<size_t>(yy) * pw + xx] +
                           resid[static_cast<size_t>(yy) * pw + xx];
                out[static_cast<size_t>(py + yy) * rw + px + xx] =
                    static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
    }
}

double block_sse_vs_source(const FrameCtx& ctx, const BlockDecision& d) {
    double sse = 0.0;
    for (int p = 0; p < 3; ++p) {
        Plane sp = plane_of(*ctx.source, p);
        int rw, rh;
        const std::uint8_t* out = plane_of_mut(*ctx.recon, p, &rw, &rh);
        int px = p == 0 ? d.x : d.x / 2, py = p == 0 ? d.y : d.y / 2;
        int pw = p == 0 ? d.w : d.w / 2, ph = p == 0 ? d.h : d.h / 2;
        for (int yy = 0; yy < ph; ++yy)
            for (int xx = 0; xx < pw; ++xx) {
                double dd = static_cast<double>(out[static_cast<size_t>(py + yy) * rw + px + xx]) -
                            sp.data[static_cast<size_t>(py + yy) * sp.w + px + xx];
                sse += dd * dd;
            }
    }
    return sse;
}

// full search on luma, scan order top-left to bottom-right, first best wins
void motion_search(const Plane& src, const Plane& ref, int x, int y, int bw, int bh, int range,
                   int* best_x, int* best_y) {
    double best = -1.0;
    *best_x = 0;
    *best_y = 0;
    std::vector<double> pred;
    for (int dy = -range; dy <= range; ++dy)
        for (int dx = -range; dx <= range; ++dx) {
            double sad = 0.0;
            for (int yy = 0; yy < bh; ++yy) {
                int sy = std::clamp(y + yy + dy, 0, ref.h - 1);
                for (int xx = 0; xx < bw; ++xx) {
                    int sx = std::clamp(x + xx + dx, 0, ref.w - 1);
                    sad += std::abs(static_cast<double>(
                               src.data[static_cast<size_t>(y + yy) * src.w + x + xx]) -
                           ref.data[static_cast<size_t>(sy) * ref.w + sx]);
                }
                if (best >= 0.0 && sad >= best) break;
            }
            if (best < 0.0 || sad < best) {
                best = sad;
                *best_x = dx;
                *best_y = dy;
            }
        }
}

struct NeighborInfo {
    bool has_inter_mv = false;
    int mv_x = 0, mv_y = 0;
};

// encodes one block (leaf, no split) and returns the chosen decision
BlockDecision encode_leaf(FrameCtx& ctx, int x, int y, int bw, int bh, bool is_intra_frame,
                          const NeighborInfo& left, double extra_bits) {
    std::vector<CandidateFull> cands;
    double flag_bits = ctx.dnn_available ? 1.0 : 0.0;

    auto add_candidate = [&](ModeKind kind, int list, int ref_idx, int mvx, int mvy,
                             double header_bits, const Frame420* pred_frame,
                             bool zero_residual) {
        CandidateFull c;
        c.rd.kind = kind;
        c.rd.bits = header_bits + flag_bits + extra_bits;
        c.dec.x = x;
        c.dec.y = y;
        c.dec.w = bw;
        c.dec.h = bh;
        c.dec.kind = kind;
        c.dec.list = list;
        c.dec.ref_idx = ref_idx;
        c.dec.mv_x = mvx;
        c.dec.mv_y = mvy;
        if (kind == ModeKind::Intra) {
            CandidateFull& cc = cands.emplace_back(std::move(c));
            double sse = 0.0, bits = 0.0;
            for (int p = 0; p < 3; ++p) {
                Plane sp = plane_of(*ctx.source, p);
                int px = p == 0 ? x : x / 2, py = p == 0 ? y : y / 2;
                int pw = p == 0 ? bw : bw / 2, ph = p == 0 ? bh : bh / 2;
                std::vector<double> resid(static_cast<size_t>(pw) * ph);
                for (int yy = 0; yy < ph; ++yy)
                    for (int xx = 0; xx < pw; ++xx)
                        resid[static_cast<size_t>(yy) * pw + xx] =
                            sp.data[static_cast<size_t>(py + yy) * sp.w + px + xx] - 128.0;
                CodedResidual coded = code_residual(resid, pw, ph, ctx.qstep);
                bits += coded.bits;
                std::vector<double>* recon =
                    p == 0 ? &cc.recon_y : (p == 1 ? &cc.recon_u : &cc.recon_v);
                recon->resize(resid.size());
                std::vector<std::int32_t>* levels =
                    p == 0 ? &cc.dec.levels_y : (p == 1 ? &cc.dec.levels_u : &cc.dec.levels_v);
                *levels = std::move(coded.levels);
                for (size_t i = 0; i < resid.size(); ++i)
                    (*recon)[i] = std::clamp(std::round(128.0 + coded.recon[i]), 0.0, 255.0);
                for (int yy = 0; yy < ph; ++yy)
                    for (int xx = 0; xx < pw; ++xx) {
                        double d = (*recon)[static_cast<size_t>(yy) * pw + xx] -
                                   sp.data[static_cast<size_t>(py + yy) * sp.w + px + xx];
                        sse += d * d;
                    }
            }
            cc.rd.sse = sse;
            cc.rd.bits += bits;
            cc.dec.bits = cc.rd.bits;
            return;
        }
        CandidateFull& cc = cands.emplace_back(std::move(c));
        code_block_against(ctx, x, y, bw, bh, *pred_frame, mvx, mvy, cc, zero_residual);
    };

    if (is_intra_frame) {
        add_candidate(ModeKind::Intra, 0, 0, 0, 0, 0.0, nullptr, false);
    } else {
        // skip: zero-mv copy from L0[0], no residual, 1-bit header
        if (!ctx.lists.l0.empty())
            add_candidate(ModeKind::Skip, 0, 0, 0, 0, 1.0, resolve(ctx, ctx.lists.l0[0]),
                          true);
        if (ctx.dnn_available && ctx.tool != Tool::baseline)
            add_candidate(ModeKind::DnnDirect, 0, 0, 0, 0, 0.0, ctx.xhat, false);
        // inter over both lists
        Plane src_y = plane_of(*ctx.source, 0);
        bool dual = !ctx.lists.l1.empty();
        for (int list = 0; list < 2; ++list) {
            const auto& entries = list == 0 ? ctx.lists.l0 : ctx.lists.l1;
            for (size_t ri = 0; ri < entries.size(); ++ri) {
                const Frame420* rf = resolve(ctx, entries[ri]);
                int mvx, mvy;
                motion_search(src_y, plane_of(*rf, 0), x, y, bw, bh, 8, &mvx, &mvy);
                int pred_x = left.has_inter_mv ? left.mv_x : 0;
                int pred_y = left.has_inter_mv ? left.mv_y : 0;
                double header = 1.0 + 2.0 + (dual ? 1.0 : 0.0) +
                                static_cast<double>(ri + 1) +
                                mv_bits(mvx - pred_x, mvy - pred_y);
                add_candidate(entries[ri].is_dnn ? ModeKind::DnnWithMv : ModeKind::Inter,
                              list, static_cast<int>(ri), mvx, mvy, header, rf, false);
            }
        }
        // intra fallback
        add_candidate(ModeKind::Intra, 0, 0, 0, 0, 1.0 + 2.0, nullptr, false);
    }

    std::vector<ModeCandidate> rd;
    rd.reserve(cands.size());
    for (const auto& c : cands) rd.push_back(c.rd);
    size_t pick = rdo_select(rd, ctx.lambda);
    CandidateFull& chosen = cands[pick];

    // write reconstruction
    for (int p = 0; p < 3; ++p) {
        int rw, rh;
        std::uint8_t* out = plane_of_mut(*ctx.recon, p, &rw, &rh);
        int px = p == 0 ? x : x / 2, py = p == 0 ? y : y / 2;
        int pw = p == 0 ? bw : bw / 2, ph = p == 0 ? bh : bh / 2;
        const std::vector<double>& rec =
            p == 0 ? chosen.recon_y : (p == 1 ? chosen.recon_u : chosen.recon_v);
        for (int yy = 0; yy < ph; ++yy)
            for (int xx = 0; xx < pw; ++xx)
                out[static_cast<size_t>(py + yy) * rw + px + xx] =
                    static_cast<std::uint8_t>(rec[static_cast<size_t>(yy) * pw + xx]);
    }
    return chosen.dec;
}

char frame_type(int poc, Direction dir) {
    if (poc == 0) return 'I';
    if (dir == Direction::bi && poc % 2 == 1) return 'B';
    return 'P';
}

std::vector<int> build_coding_order(int n, Direction dir) {
    std::vector<int> order;
    if (dir == Direction::uni) {
        for (int i = 0; i < n; ++i) order.push_back(i);
        return order;
    }
    order.push_back(0);
    for (int e = 2; e < n; e += 2) {
        order.push_back(e);
        order.push_back(e - 1);
    }
    if ((n - 1) % 2 == 1) order.push_back(n - 1);  // trailing frame coded as P
    return order;
}

void build_default_lists(FrameCtx& ctx, int poc, char type, Direction dir,
                         const std::vector<int>& dpb_pocs, int capacity) {
    ctx.lists = RefLists{};
    if (type == 'I') return;
    std::vector<int> past, future;
    for (int p : dpb_pocs)
        (p < poc ? past : future).push_back(p);
    std::sort(past.rbegin(), past.rend());    // nearest past first
    std::sort(future.begin(), future.end());  // nearest future first
    if (dir == Direction::uni || type == 'P') {
        for (int p : past)
            if (static_cast<int>(ctx.lists.l0.size()) < capacity)
                ctx.lists.l0.push_back(RefEntry{p, false});
        return;
    }
    for (int p : past)
        if (ctx.lists.l0.size() < 2) ctx.lists.l0.push_back(RefEntry{p, false});
    for (int p : future)
        if (ctx.lists.l1.size() < 2) ctx.lists.l1.push_back(RefEntry{p, false});
}

}  // namespace

SequenceResult encode_sequence(const std::vector<Frame420>& frames, const CodecConfig& cfg,
                               const PredictHook& hook) {
    if (frames.size() < 3)
        throw std::invalid_argument("encode_sequence: need at least 3 frames, got " +
                                    std::to_string(frames.size()));
    int W = frames[0].w, H = frames[0].h;
    if (W % 16 || H % 16 || W < 64 || H < 64)
        throw std::invalid_argument("encode_sequence: frame dims must be multiples of 16 and "
                                    ">= 64, got " +
                                    std::to_string(W) + "x" + std::to_string(H));
    for (const auto& f : frames)
        if (!f.same_size(frames[0]))
            throw std::invalid_argument("encode_sequence: frame sizes differ");

    SequenceResult result;
    result.cfg = cfg;
    result.recon.resize(frames.size());
    result.decisions.resize(frames.size());

    std::map<int, Frame420> dpb;  // poc -> reconstruction (I/P only)
    std::vector<int> order = build_coding_order(static_cast<int>(frames.size()), cfg.direction);
    result.frames.resize(frames.size());

    for (int poc : order) {
        char type = frame_type(poc, cfg.direction);
        const Frame420& src = frames[static_cast<size_t>(poc)];
        Frame420 recon(W, H);

        FrameCtx ctx;
        ctx.source = &src;
        ctx.recon = &recon;
        ctx.qstep = qstep_from_qp(cfg.qp);
        ctx.lambda = lambda_from_qp(cfg.qp);
        ctx.tool = cfg.tool;

        std::vector<int> dpb_pocs;
        for (const auto& [p, f] : dpb) {
            dpb_pocs.push_back(p);
            ctx.by_poc[p] = &f;
        }
        build_default_lists(ctx, poc, type, cfg.direction, dpb_pocs, cfg.dpb_capacity);

        Frame420 xhat;
        RluRecord rlu;
        if (type != 'I' && cfg.tool != Tool::baseline && hook) {
            RefPick pick = can_predict(dpb_pocs, poc, cfg.direction);
            if (pick.available) {
                xhat = hook(dpb.at(pick.ref1_poc), pick.ref1_poc, dpb.at(pick.ref2_poc),
                            pick.ref2_poc, poc);
                ctx.xhat = &xhat;
                ctx.dnn_available = true;
                if (cfg.tool == Tool::dm_rlu) rlu = rlu_update(ctx.lists, poc, cfg.direction);
            }
        }

        FrameStats st;
        st.poc = poc;
        st.type = type;
        st.dnn_available = ctx.dnn_available;
        st.rlu = rlu;

        std::vector<BlockDecision>& decs = result.decisions[static_cast<size_t>(poc)];
        double area_by_mode[5] = {0, 0, 0, 0, 0};
        for (int by = 0; by < H; by += cfg.block) {
            NeighborInfo left;  // no left neighbor at each row start
            for (int bx = 0; bx < W; bx += cfg.block) {
                int bw = std::min(cfg.block, W - bx), bh = std::min(cfg.block, H - by);
                bool can_split = cfg.split32 && bw == 64 && bh == 64 && type != 'I';
                double split_flag = can_split ? 1.0 : 0.0;
                BlockDecision d =
                    encode_leaf(ctx, bx, by, bw, bh, type == 'I', left, split_flag);
                double whole_cost = block_sse_vs_source(ctx, d) + ctx.lambda * d.bits;
                bool used_split = false;
                if (can_split) {
                    Frame420 whole_recon = recon;
                    std::vector<BlockDecision> quads;
                    NeighborInfo qleft = left;
                    double split_cost = 0.0;
                    for (int q = 0; q < 4; ++q) {
                        int qx = bx + (q % 2) * 32, qy = by + (q / 2) * 32;
                        BlockDecision qd = encode_leaf(ctx, qx, qy, 32, 32, false, qleft,
                                                       q == 0 ? split_flag : 0.0);
                        qleft.has_inter_mv = qd.kind == ModeKind::Inter;
                        qleft.mv_x = qd.mv_x;
                        qleft.mv_y = qd.mv_y;
                        split_cost += block_sse_vs_source(ctx, qd) + ctx.lambda * qd.bits;
                        quads.push_back(std::move(qd));
                    }
                    if (split_cost < whole_cost) {
                        used_split = true;
                        for (auto& qd : quads) {
                            area_by_mode[static_cast<int>(qd.kind)] += 32.0 * 32.0;
                            st.bits += qd.bits;
                            decs.push_back(std::move(qd));
                        }
                        left = qleft;
                    } else {
                        recon = whole_recon;
                    }
                }
                if (!used_split) {
                    area_by_mode[static_cast<int>(d.kind)] +=
                        static_cast<double>(bw) * bh;
                    st.bits += d.bits;
                    left.has_inter_mv = d.kind == ModeKind::Inter;
                    left.mv_x = d.mv_x;
                    left.mv_y = d.mv_y;
                    decs.push_back(std::move(d));
                }
            }
        }

        double area = static_cast<double>(W) * H;
        st.share_skip = 100.0 * area_by_mode[0] / area;
        st.share_dnn = 100.0 * area_by_mode[1] / area;
        st.share_inter = 100.0 * area_by_mode[2] / area;
        st.share_dnn_mv = 100.0 * area_by_mode[3] / area;
        st.share_intra = 100.0 * area_by_mode[4] / area;
        st.psnr_y = psnr_8bit(recon.y.data(), src.y.data(), recon.y.size());
        st.psnr_u = psnr_8bit(recon.u.data(), src.u.data(), recon.u.size());
        st.psnr_v = psnr_8bit(recon.v.data(), src.v.data(), recon.v.size());
        result.frames[static_cast<size_t>(poc)] = st;
        result.total_bits += st.bits;

        if (type != 'B') {
            dpb[poc] = recon;
            while (static_cast<int>(dpb.size()) > cfg.dpb_capacity) dpb.erase(dpb.begin());
        }
        result.recon[static_cast<size_t>(poc)] = std::move(recon);
    }

    for (const auto& st : result.frames) {
        result.mean_psnr_y += st.psnr_y;
        result.mean_psnr_u += st.psnr_u;
        result.mean_psnr_v += st.psnr_v;
    }
    result.mean_psnr_y /= static_cast<double>(result.frames.size());
    result.mean_psnr_u /= static_cast<double>(result.frames.size());
    result.mean_psnr_v /= static_cast<double>(result.frames.size());
    return result;
}

std::vector<Frame420> decode_sequence(const SequenceResult& encoded, int frame_w, int frame_h,
                                      const PredictHook& hook) {
    const CodecConfig& cfg = encoded.cfg;
    size_t n = encoded.frames.size();
    std::vector<Frame420> out(n);
    std::map<int, Frame420> dpb;
    std::vector<int> order = build_coding_order(static_cast<int>(n), cfg.direction);
    for (int poc : order) {
        const FrameStats& st = encoded.frames[static_cast<size_t>(poc)];
        Frame420 recon(frame_w, frame_h);

        FrameCtx ctx;
        ctx.recon = &recon;
        ctx.qstep = qstep_from_qp(cfg.qp);
        ctx.tool = cfg.tool;
        std::vector<int> dpb_pocs;
        for (const auto& [p, f] : dpb) {
            dpb_pocs.push_back(p);
            ctx.by_poc[p] = &f;
        }
        build_default_lists(ctx, poc, st.type, cfg.direction, dpb_pocs, cfg.dpb_capacity);

        Frame420 xhat;
        if (st.dnn_available) {
            if (!hook) throw std::logic_error("decode_sequence: stream uses the predictor "
                                              "but no hook was supplied");
            RefPick pick = can_predict(dpb_pocs, poc, cfg.direction);
            if (!pick.available) throw std::logic_error("decode_sequence: predictor refs lost");
            xhat = hook(dpb.at(pick.ref1_poc), pick.ref1_poc, dpb.at(pick.ref2_poc),
                        pick.ref2_poc, poc);
            ctx.xhat = &xhat;
            ctx.dnn_available = true;
            if (cfg.tool == Tool::dm_rlu) rlu_update(ctx.lists, poc, cfg.direction);
        }

        for (const auto& d : encoded.decisions[static_cast<size_t>(poc)])
            reconstruct_block(ctx, d);

        if (st.type != 'B') {
            dpb[poc] = recon;
            while (static_cast<int>(dpb.size()) > cfg.dpb_capacity) dpb.erase(dpb.begin());
        }
        out[static_cast<size_t>(poc)] = std::move(recon);
    }
    return out;
}

void write_report(const std::string& path, const SequenceResult& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "codec-sim mode " << tool_name(r.cfg.tool) << " direction "
      << direction_name(r.cfg.direction) << " qp " << r.cfg.qp << " block " << r.cfg.block
      << "\n";
    char buf[256];
    for (const auto& st : r.frames) {
        std::snprintf(buf, sizeof(buf),
                      "frame %d type %c bits %.2f psnr-y %.3f psnr-u %.3f psnr-v %.3f "
                      "intra %.2f inter %.2f skip %.2f dnn %.2f dnn-mv %.2f",
                      st.poc, st.type, st.bits, st.psnr_y, st.psnr_u, st.psnr_v,
                      st.share_intra, st.share_inter, st.share_skip, st.share_dnn,
                      st.share_dnn_mv);
        f << buf;
        if (st.rlu.replaced)
            f << " rlu l" << st.rlu.list << "[" << st.rlu.index << "] poc " << st.rlu.old_poc;
        f << "\n";
    }
    std::snprintf(buf, sizeof(buf),
                  "sequence bits %.2f psnr-y %.3f psnr-u %.3f psnr-v %.3f", r.total_bits,
                  r.mean_psnr_y, r.mean_psnr_u, r.mean_psnr_v);
    f << buf << "\n";
}

Frame420 shift_frame(const Frame420& src, int dx, int dy) {
    Frame420 out(src.w, src.h);
    auto shift_plane = [](const std::uint8_t* in, std::uint8_t* o, int w, int h, int sx,
                          int sy) {
        for (int y = 0; y < h; ++y) {
            int yy = std::clamp(y - sy, 0, h - 1);
            for (int x = 0; x < w; ++x) {
                int xx = std::clamp(x - sx, 0, w - 1);
                o[static_cast<size_t>(y) * w + x] = in[static_cast<size_t>(yy) * w + xx];
            }
        }
    };
    shift_plane(src.y.data(), out.y.data(), src.w, src.h, dx, dy);
    shift_plane(src.u.data(), out.u.data(), src.w / 2, src.h / 2, dx >> 1, dy >> 1);
    shift_plane(src.v.data(), out.v.data(), src.w / 2, src.h / 2, dx >> 1, dy >> 1);
    return out;
}

PredictHook ideal_shift_hook(int vx, int vy) {
    return [vx, vy](const Frame420& ref1, int poc1, const Frame420&, int, int target_poc) {
        return shift_frame(ref1, vx * (target_poc - poc1), vy * (target_poc - poc1));
    };
}

}  // namespace dfp::codec
