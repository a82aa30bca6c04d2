#ifndef GNNSTAB_DATA_HPP_
#define GNNSTAB_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"

namespace gnnstab {

struct Rating {
    std::size_t user;
    std::size_t item;
    double value;  // integers {1..5} for parsed data, reals in [1, 5] for synthetic
};

// Sparse user-item rating triples, 0-based ids, no duplicate (user, item)
// pairs. A value of 0 elsewhere means "unrated".
struct RatingMatrix {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<Rating> entries;
};

enum class SplitTag { train, val, test };

// Per-user graph signals for one target item: the user's ratings with the
// target entry zeroed out, the extracted target rating as label, and a split
// tag per sample.
struct LabeledDataset {
    std::vector<Vector> signals;
    std::vector<double> labels;
    std::vector<SplitTag> splits;
    std::vector<std::size_t> user_ids;  // sample -> source user
    std::size_t target_item = 0;

    std::vector<std::size_t> indices_of(SplitTag tag) const;
};

// Parses the MovieLens u.data format: `user \t item \t rating \t timestamp`
// per line, 1-based ids, ratings in {1..5}. Malformed lines, out-of-range
// ratings and duplicate (user, item) pairs are reported with their line
// number. Timestamps are ignored.
RatingMatrix parse_movielens(const std::string& path);

// Writes the same tab-separated format (timestamp column emitted as 0), so
// that parse(serialize(parse(file))) reproduces the matrix exactly.
void serialize_movielens(const RatingMatrix& ratings, const std::string& path);

// Low-rank latent model: user and item factors i.i.d. standard normal, raw
// affinity scaled to mean 3 and unit-ish spread, clipped to [1, 5]; each
// (user, item) cell kept with probability `density`. Deterministic per seed.
RatingMatrix synthetic_ratings(std::size_t n_users, std::size_t n_items, std::size_t rank,
                               double noise_sd, double density, std::uint64_t seed);

// Index of the item with the most ratings (ties: lowest index).
std::size_t most_rated_item(const RatingMatrix& ratings);

// Builds the per-user sample set for `target_item` (users who rated it, at
// least 10 of them required), extracts labels, zeroes the target entry, and
// splits by a seeded shuffle: train_frac of the samples become train+val,
// of which val_frac become val; the remainder is test.
LabeledDataset make_labeled_dataset(const RatingMatrix& ratings, std::size_t target_item,
                                    double train_frac, double val_frac, std::uint64_t seed);

// Item graph from a user subset: Pearson correlations over those users'
// ratings only, negatives clamped to 0, then a k-nearest-neighbor graph.
GraphShiftOperator graph_from_split(const RatingMatrix& ratings,
                                    const std::vector<std::size_t>& train_user_ids,
                                    std::size_t k);

}  // namespace gnnstab

#endif  // GNNSTAB_DATA_HPP_
