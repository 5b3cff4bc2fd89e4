#ifndef MFF_FILTER_HPP
#define MFF_FILTER_HPP

#include "mff/attention.hpp"

namespace mff {

/// Which axis of the similarity matrix is reduced before the score softmax.
/// `context` (the default) averages each own-modality position over all
/// positions of the strengthened sequence, yielding one score per token/patch.
enum class ScoreAxis { context, own };

struct FilterParams {
    SelfAttentionParams sa_image, sa_text;

    static FilterParams init(std::size_t d_m, std::size_t heads, std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct BranchOutput {
    Tensor inconsistency;        // pooled filtered feature, [d_m]
    Tensor consistency_scores;   // r_is, sums to 1
    Tensor inconsistency_scores; // 1 - r_is
};

/// modal_proj . strengthened_seq^T / sqrt(d_m), the scaled inner-product table.
Tensor similarity_matrix(const Tensor& modal_proj, const Tensor& strengthened_seq);

/// Average over the chosen axis, then softmax into a probability vector.
Tensor consistency_scores(const Tensor& sim, ScoreAxis axis = ScoreAxis::context);

Tensor invert_scores(const Tensor& scores);

/// Scale rows by the inconsistency scores, run self-attention, pool.
Tensor filter_features(const Tensor& incon_scores, const Tensor& modal_proj,
                       const SelfAttentionParams& sa);

/// One modality branch: similarity, scores, inversion, scaled self-attention.
BranchOutput run_branch(const Tensor& modal_proj, const Tensor& strengthened_seq,
                        const SelfAttentionParams& sa,
                        ScoreAxis axis = ScoreAxis::context);

} // namespace mff

#endif
