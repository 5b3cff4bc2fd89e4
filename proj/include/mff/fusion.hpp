#ifndef MFF_FUSION_HPP
#define MFF_FUSION_HPP

#include "mff/attention.hpp"

namespace mff {

/// Parameters of the multiple feature fusion module: three weight-shared
/// co-attention pairs, the projection fusing the first pair's outputs, and
/// the tensor-fusion output projection. When `enhance` is disabled the two
/// enhancement pairs are absent and the tensor fusion consumes the first
/// fused vector directly on both arms.
struct FusionParams {
    std::size_t d_m = 0;
    bool enhance = true;
    /// false removes everything past the first pair (the "w/o FeatureFusion"
    /// variant); the first pair stays because the filter branches consume its
    /// strengthened sequences.
    bool consistency_head = true;
    CoAttentionBlockParams pair1, pair2, pair3;
    Tensor fuse_w, fuse_b;  // [2*d_m, d_m], [d_m]
    Tensor tfn_w, tfn_b;    // [(d_e+1)^2, d_m], [d_m]

    std::size_t tfn_input_dim() const { return enhance ? 2 * d_m : d_m; }

    static FusionParams init(std::size_t d_m, std::size_t heads, bool enhance,
                             bool consistency_head, std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct FusionOutput {
    Tensor consistency;  // R_M, [d_m]
    Tensor text_seq;     // strengthened text sequence, [n, d_m]
    Tensor image_seq;    // strengthened image sequence, [p, d_m]
    Tensor fused;        // r_it, [d_m]
};

struct FirstFusionOutput {
    Tensor fused;  // r_it
    Tensor text_seq, image_seq;
};

/// First co-attention pair on the projected modal sequences; the two pooled
/// outputs are concatenated and projected to the first fused feature.
FirstFusionOutput first_fusion(const Tensor& text_proj, const Tensor& image_proj,
                               const FusionParams& params);

/// Eq-style enhancement: the fused vector enters co-attention as a one-token
/// sequence against a modal sequence, both directions pooled and concatenated.
Tensor enhance(const Tensor& fused, const Tensor& modal_seq,
               const CoAttentionBlockParams& pair);

/// Outer product of [x;1] and [y;1], shape (dx+1)x(dy+1).
Tensor tfn_raw(const Tensor& x, const Tensor& y);

/// tfn_raw flattened and projected to d_m.
Tensor tfn_fuse(const Tensor& x, const Tensor& y, const FusionParams& params);

/// Full module on projected features: first fusion, optional enhancement with
/// each modality, tensor fusion.
FusionOutput fuse(const Tensor& text_proj, const Tensor& image_proj,
                  const FusionParams& params);

} // namespace mff

#endif
