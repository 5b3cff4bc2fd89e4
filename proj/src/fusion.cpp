#include "mff/fusion.hpp"

namespace mff {

FusionParams FusionParams::init(std::size_t d_m, std::size_t heads, bool enhance,
                                bool consistency_head, std::mt19937_64& rng) {
    FusionParams p;
    p.d_m = d_m;
    p.enhance = enhance && consistency_head;
    p.consistency_head = consistency_head;
    p.pair1 = CoAttentionBlockParams::init(d_m, heads, rng);
    if (!consistency_head) return p;
    if (p.enhance) {
        p.pair2 = CoAttentionBlockParams::init(d_m, heads, rng);
        p.pair3 = CoAttentionBlockParams::init(d_m, heads, rng);
    }
    p.fuse_w = uniform_param({2 * d_m, d_m}, 2 * d_m, rng);
    p.fuse_b = const_param({d_m}, 0.0);
    const std::size_t d_e = p.tfn_input_dim();
    p.tfn_w = uniform_param({(d_e + 1) * (d_e + 1), d_m}, (d_e + 1) * (d_e + 1), rng);
    p.tfn_b = const_param({d_m}, 0.0);
    return p;
}

void FusionParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    pair1.visit(prefix + ".pair1", fn);
    if (!consistency_head) return;
    if (enhance) {
        pair2.visit(prefix + ".pair2", fn);
        pair3.visit(prefix + ".pair3", fn);
    }
    fn(prefix + ".fuse_w", fuse_w);
    fn(prefix + ".fuse_b", fuse_b);
    fn(prefix + ".tfn_w", tfn_w);
    fn(prefix + ".tfn_b", tfn_b);
}

FirstFusionOutput first_fusion(const Tensor& text_proj, const Tensor& image_proj,
                               const FusionParams& params) {
    if (!params.fuse_w.defined())
        throw DimensionError("first_fusion: fusion projection disabled for this configuration");
    auto [text_out, image_out] = co_attention_pair(text_proj, image_proj, params.pair1);
    Tensor both = concat({text_out.pooled, image_out.pooled}, 0);
    Tensor fused = reshape(matmul(reshape(both, {1, 2 * params.d_m}), params.fuse_w),
                           {params.d_m}) +
                   params.fuse_b;
    return {fused, text_out.seq, image_out.seq};
}

Tensor enhance(const Tensor& fused, const Tensor& modal_seq,
               const CoAttentionBlockParams& pair) {
    Tensor fused_seq = reshape(fused, {1, fused.size()});
    auto [modal_side, fused_side] = co_attention_pair(modal_seq, fused_seq, pair);
    return concat({modal_side.pooled, fused_side.pooled}, 0);
}

Tensor tfn_raw(const Tensor& x, const Tensor& y) {
    if (x.rank() != 1 || y.rank() != 1)
        throw DimensionError("tfn_raw expects two vectors, got " + shape_str(x.shape()) +
                             " and " + shape_str(y.shape()));
    Tensor one({1}, std::vector<double>{1.0});
    Tensor xe = concat({x, one}, 0);
    Tensor ye = concat({y, one}, 0);
    return matmul(reshape(xe, {x.size() + 1, 1}), reshape(ye, {1, y.size() + 1}));
}

Tensor tfn_fuse(const Tensor& x, const Tensor& y, const FusionParams& params) {
    const std::size_t d_e = params.tfn_input_dim();
    if (x.size() != d_e)
        throw DimensionError("tfn_fuse: expected input dim " + std::to_string(d_e) +
                             ", got " + std::to_string(x.size()));
    Tensor m = tfn_raw(x, y);
    Tensor flat = reshape(m, {1, (d_e + 1) * (d_e + 1)});
    return reshape(matmul(flat, params.tfn_w), {params.d_m}) + params.tfn_b;
}

FusionOutput fuse(const Tensor& text_proj, const Tensor& image_proj,
                  const FusionParams& params) {
    if (!params.consistency_head)
        throw DimensionError("fuse: consistency head disabled for this configuration");
    FirstFusionOutput first = first_fusion(text_proj, image_proj, params);
    Tensor consistency;
    if (params.enhance) {
        Tensor fused_text = enhance(first.fused, text_proj, params.pair2);
        Tensor fused_image = enhance(first.fused, image_proj, params.pair3);
        consistency = tfn_fuse(fused_text, fused_image, params);
    } else {
        consistency = tfn_fuse(first.fused, first.fused, params);
    }
    return {consistency, first.text_seq, first.image_seq, first.fused};
}

} // namespace mff
