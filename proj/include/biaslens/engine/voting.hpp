#pragma once

#include <span>

#include "biaslens/engine/types.hpp"

namespace biaslens::engine {

/// Fraction of matches per leaning; all zeros for an empty match list.
std::array<double, 3> leaning_distribution(std::span<const store::MatchResult> matches);

/// Pools every match of every descriptor; each occurrence is one unweighted
/// vote for its leaning. The label is the leaning with the most votes. When
/// several leanings share the top count, the one among them with the
/// largest similarity mass (sum of non-negative similarities) wins; if that
/// also ties, the label is neutral. `tie_broken` is set whenever the vote
/// count alone did not decide.
///
/// Throws Error(no_matches) when the pool is empty.
BiasPrediction predict_bias(std::span<const DescriptorMatchSet> match_sets);

}  // namespace biaslens::engine
