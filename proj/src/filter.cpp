#include "mff/filter.hpp"

#include <cmath>

namespace mff {

FilterParams FilterParams::init(std::size_t d_m, std::size_t heads, std::mt19937_64& rng) {
    FilterParams p;
    p.sa_image = SelfAttentionParams::init(d_m, heads, rng);
    p.sa_text = SelfAttentionParams::init(d_m, heads, rng);
    return p;
}

void FilterParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    sa_image.visit(prefix + ".sa_image", fn);
    sa_text.visit(prefix + ".sa_text", fn);
}

Tensor similarity_matrix(const Tensor& modal_proj, const Tensor& strengthened_seq) {
    // Scaled like attention logits: raw inner products grow with the feature
    // width, which would drive the downstream score softmax into saturation.
    const double inv_sqrt_d = 1.0 / std::sqrt(double(modal_proj.dim(1)));
    return scale(matmul(modal_proj, transpose(strengthened_seq)), inv_sqrt_d);
}

Tensor consistency_scores(const Tensor& sim, ScoreAxis axis) {
    const std::size_t reduced = axis == ScoreAxis::context ? 1 : 0;
    // Mean (not sum) over the reduced axis so the softmax temperature does not
    // depend on the sequence length.
    Tensor averaged = scale(sum_axis(sim, reduced), 1.0 / double(sim.dim(reduced)));
    return softmax(averaged, 0);
}

Tensor invert_scores(const Tensor& scores) {
    return add_scalar(scale(scores, -1.0), 1.0);
}

Tensor filter_features(const Tensor& incon_scores, const Tensor& modal_proj,
                       const SelfAttentionParams& sa) {
    Tensor weighted = pointwise_scale(incon_scores, modal_proj);
    return mean_pool(self_attention(weighted, sa));
}

BranchOutput run_branch(const Tensor& modal_proj, const Tensor& strengthened_seq,
                        const SelfAttentionParams& sa, ScoreAxis axis) {
    Tensor sim = similarity_matrix(modal_proj, strengthened_seq);
    Tensor r_is = consistency_scores(sim, axis);
    Tensor r_incon = invert_scores(r_is);
    return {filter_features(r_incon, modal_proj, sa), r_is, r_incon};
}

} // namespace mff
