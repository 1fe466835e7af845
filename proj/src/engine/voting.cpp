#include "biaslens/engine/voting.hpp"

#include <algorithm>
#include <numeric>

namespace biaslens::engine {

std::array<double, 3> leaning_distribution(std::span<const store::MatchResult> matches) {
  std::array<double, 3> dist{};
  if (matches.empty()) return dist;
  for (const auto& m : matches) dist[index_of(m.leaning)] += 1.0;
  for (auto& d : dist) d /= static_cast<double>(matches.size());
  return dist;
}

BiasPrediction predict_bias(std::span<const DescriptorMatchSet> match_sets) {
  BiasPrediction prediction;
  std::array<std::vector<double>, 3> contributions;
  for (const auto& set : match_sets) {
    for (const auto& m : set.matches) {
      ++prediction.votes[index_of(m.leaning)];
      contributions[index_of(m.leaning)].push_back(std::max(0.0, m.similarity));
    }
  }
  auto total = std::accumulate(prediction.votes.begin(), prediction.votes.end(), std::size_t{0});
  if (total == 0) throw Error(ErrorCode::no_matches, "no matched indicators to vote with");

  // Summing in sorted order makes the mass independent of descriptor order.
  for (std::size_t k = 0; k < 3; ++k) {
    std::sort(contributions[k].begin(), contributions[k].end());
    prediction.similarity_mass[k] =
        std::accumulate(contributions[k].begin(), contributions[k].end(), 0.0);
  }

  auto top_votes = *std::max_element(prediction.votes.begin(), prediction.votes.end());
  std::vector<Leaning> leaders;
  for (auto l : kAllLeanings) {
    if (prediction.votes[index_of(l)] == top_votes) leaders.push_back(l);
  }
  if (leaders.size() == 1) {
    prediction.label = leaders.front();
    return prediction;
  }

  prediction.tie_broken = true;
  double top_mass = -1.0;
  for (auto l : leaders) top_mass = std::max(top_mass, prediction.similarity_mass[index_of(l)]);
  std::vector<Leaning> mass_leaders;
  for (auto l : leaders) {
    if (prediction.similarity_mass[index_of(l)] == top_mass) mass_leaders.push_back(l);
  }
  prediction.label = mass_leaders.size() == 1 ? mass_leaders.front() : Leaning::neutral;
  return prediction;
}

}  // namespace biaslens::engine
