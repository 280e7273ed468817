#ifndef DRLEARN_SIDEINFO_HPP
#define DRLEARN_SIDEINFO_HPP

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "drlearn/rng.hpp"

namespace drlearn {

/// Side information: index pairs (p,q) whose class labels differ. Indices
/// refer to whatever collection the caller built the set from (a mini-batch
/// or a whole dataset).
struct PairSet {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

/// How a trainer normalizes a pair-term sum before the trade-off coefficient
/// weights it.
///   kSum         plain sum over the pair set
///   kPairMean    divided by |pairs| (mean over the pairs present)
///   kBatchSquare divided by B^2, the ordered pair slots of the batch; the
///                pressure then tracks how densely the batch is covered by
///                pairs instead of spiking with their raw count
enum class PairTermNorm { kSum, kPairMean, kBatchSquare };

inline double pair_term_scale(PairTermNorm norm, std::size_t n_pairs, std::size_t batch_size) {
    switch (norm) {
        case PairTermNorm::kPairMean: return n_pairs > 0 ? 1.0 / double(n_pairs) : 1.0;
        case PairTermNorm::kBatchSquare: return 1.0 / (double(batch_size) * double(batch_size));
        case PairTermNorm::kSum: break;
    }
    return 1.0;
}

inline bool has_two_classes(const std::vector<int>& labels) {
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] != labels[0]) return true;
    return false;
}

/// All unordered different-label pairs (p,q), p < q, in lexicographic order.
inline PairSet pairs_from_batch(const std::vector<int>& labels) {
    PairSet set;
    for (std::size_t p = 0; p + 1 < labels.size(); ++p)
        for (std::size_t q = p + 1; q < labels.size(); ++q)
            if (labels[p] != labels[q]) set.pairs.emplace_back(p, q);
    return set;
}

/// `count` different-label pairs sampled uniformly with replacement
/// (same-class and self draws are rejected; repeated pairs are allowed).
inline PairSet sample_global_pairs(const std::vector<int>& labels, std::size_t count, Rng& rng) {
    if (count > 0 && !has_two_classes(labels))
        throw std::invalid_argument("sample_global_pairs: need at least two distinct classes");

    PairSet set;
    set.pairs.reserve(count);
    const std::size_t n = labels.size();
    while (set.pairs.size() < count) {
        const std::size_t p = rng.uniform_index(n);
        const std::size_t q = rng.uniform_index(n);
        if (p == q || labels[p] == labels[q]) continue;
        set.pairs.emplace_back(p, q);
    }
    return set;
}

} // namespace drlearn

#endif
