#include "gnnstab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"
#include "gnnstab/rng.hpp"

namespace gnnstab {

std::vector<std::size_t> LabeledDataset::indices_of(SplitTag tag) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i] == tag) idx.push_back(i);
    }
    return idx;
}

RatingMatrix parse_movielens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("parse_movielens: cannot open " + path);

    RatingMatrix out;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        std::istringstream fields(line);
        long long user = 0, item = 0, rating = 0, timestamp = 0;
        char t1 = 0, t2 = 0, t3 = 0;
        if (!(fields >> user >> std::noskipws >> t1 >> std::skipws >> item >> std::noskipws >>
              t2 >> std::skipws >> rating >> std::noskipws >> t3 >> std::skipws >> timestamp) ||
            t1 != '\t' || t2 != '\t' || t3 != '\t') {
            std::ostringstream msg;
            msg << "parse_movielens: " << path << ":" << line_no << ": malformed line";
            throw ValidationError(msg.str());
        }
        std::string trailing;
        if (fields >> trailing) {
            std::ostringstream msg;
            msg << "parse_movielens: " << path << ":" << line_no << ": trailing fields";
            throw ValidationError(msg.str());
        }
        if (user < 1 || item < 1) {
            std::ostringstream msg;
            msg << "parse_movielens: " << path << ":" << line_no << ": ids must be 1-based";
            throw ValidationError(msg.str());
        }
        if (rating < 1 || rating > 5) {
            std::ostringstream msg;
            msg << "parse_movielens: " << path << ":" << line_no << ": rating " << rating
                << " outside {1..5}";
            throw ValidationError(msg.str());
        }
        const std::size_t u = static_cast<std::size_t>(user - 1);
        const std::size_t i = static_cast<std::size_t>(item - 1);
        if (!seen.emplace(u, i).second) {
            std::ostringstream msg;
            msg << "parse_movielens: " << path << ":" << line_no << ": duplicate (user, item) pair";
            throw ValidationError(msg.str());
        }
        out.entries.push_back(Rating{u, i, static_cast<double>(rating)});
        out.n_users = std::max(out.n_users, u + 1);
        out.n_items = std::max(out.n_items, i + 1);
    }
    return out;
}

void serialize_movielens(const RatingMatrix& ratings, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("serialize_movielens: cannot open " + path);
    for (const Rating& r : ratings.entries) {
        out << r.user + 1 << '\t' << r.item + 1 << '\t' << static_cast<long long>(r.value)
            << '\t' << 0 << '\n';
    }
    if (!out) throw ValidationError("serialize_movielens: write failed for " + path);
}

RatingMatrix synthetic_ratings(std::size_t n_users, std::size_t n_items, std::size_t rank,
                               double noise_sd, double density, std::uint64_t seed) {
    if (n_users == 0 || n_items == 0) {
        throw ValidationError("synthetic_ratings: user and item counts must be positive");
    }
    if (rank == 0 || rank > std::min(n_users, n_items)) {
        throw ValidationError("synthetic_ratings: rank must be in [1, min(users, items)]");
    }
    if (!(density > 0.0) || density > 1.0) {
        throw ValidationError("synthetic_ratings: density must be in (0, 1]");
    }
    if (noise_sd < 0.0) throw ValidationError("synthetic_ratings: noise_sd must be nonnegative");

    Rng rng(seed);
    std::vector<double> user_factors(n_users * rank);
    std::vector<double> item_factors(n_items * rank);
    for (double& v : user_factors) v = rng.normal();
    for (double& v : item_factors) v = rng.normal();

    // Raw affinity has sd sqrt(rank + noise_sd^2); scale to unit spread so
    // mean-3 plus two sigmas spans the rating range.
    const double spread = std::sqrt(static_cast<double>(rank) + noise_sd * noise_sd);

    RatingMatrix out;
    out.n_users = n_users;
    out.n_items = n_items;
    for (std::size_t u = 0; u < n_users; ++u) {
        for (std::size_t i = 0; i < n_items; ++i) {
            double raw = 0.0;
            for (std::size_t r = 0; r < rank; ++r) {
                raw += user_factors[u * rank + r] * item_factors[i * rank + r];
            }
            if (noise_sd > 0.0) raw += noise_sd * rng.normal();
            const double keep = rng.uniform();
            if (keep >= density) continue;
            const double value = std::clamp(3.0 + raw / spread, 1.0, 5.0);
            out.entries.push_back(Rating{u, i, value});
        }
    }
    return out;
}

std::size_t most_rated_item(const RatingMatrix& ratings) {
    if (ratings.n_items == 0) throw ValidationError("most_rated_item: no items");
    std::vector<std::size_t> counts(ratings.n_items, 0);
    for (const Rating& r : ratings.entries) ++counts[r.item];
    return static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
}

LabeledDataset make_labeled_dataset(const RatingMatrix& ratings, std::size_t target_item,
                                    double train_frac, double val_frac, std::uint64_t seed) {
    if (target_item >= ratings.n_items) {
        throw ValidationError("make_labeled_dataset: target item out of range");
    }
    if (!(train_frac >= 0.0 && train_frac <= 1.0) || !(val_frac >= 0.0 && val_frac <= 1.0)) {
        throw ValidationError("make_labeled_dataset: fractions must lie in [0, 1]");
    }

    // Per-user rating vectors, only for users who rated the target.
    std::vector<double> target_rating(ratings.n_users, 0.0);
    for (const Rating& r : ratings.entries) {
        if (r.item == target_item) target_rating[r.user] = r.value;
    }
    std::vector<std::size_t> raters;
    for (std::size_t u = 0; u < ratings.n_users; ++u) {
        if (target_rating[u] != 0.0) raters.push_back(u);
    }
    if (raters.size() < 10) {
        std::ostringstream msg;
        msg << "make_labeled_dataset: target item has " << raters.size()
            << " raters, need at least 10";
        throw ValidationError(msg.str());
    }

    std::vector<std::size_t> user_to_sample(ratings.n_users, raters.size());
    for (std::size_t i = 0; i < raters.size(); ++i) user_to_sample[raters[i]] = i;

    LabeledDataset data;
    data.target_item = target_item;
    data.user_ids = raters;
    data.signals.assign(raters.size(), Vector(ratings.n_items, 0.0));
    data.labels.resize(raters.size());
    for (const Rating& r : ratings.entries) {
        const std::size_t sample = user_to_sample[r.user];
        if (sample == raters.size()) continue;
        data.signals[sample][r.item] = r.value;
    }
    for (std::size_t i = 0; i < raters.size(); ++i) {
        data.labels[i] = target_rating[raters[i]];
        data.signals[i][target_item] = 0.0;  // label never leaks into the signal
    }

    // Seeded shuffle, then train/val/test counts realized within one sample
    // of the requested fractions.
    std::vector<std::size_t> order(raters.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t n = raters.size();
    const std::size_t n_train_total =
        static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(
        std::llround(val_frac * static_cast<double>(n_train_total)));

    data.splits.assign(n, SplitTag::test);
    for (std::size_t pos = 0; pos < n_train_total && pos < n; ++pos) {
        data.splits[order[pos]] = pos < n_train_total - n_val ? SplitTag::train : SplitTag::val;
    }
    return data;
}

GraphShiftOperator graph_from_split(const RatingMatrix& ratings,
                                    const std::vector<std::size_t>& train_user_ids,
                                    std::size_t k) {
    if (train_user_ids.empty()) {
        throw ValidationError("graph_from_split: user subset is empty");
    }
    std::vector<bool> keep(ratings.n_users, false);
    for (std::size_t u : train_user_ids) {
        if (u >= ratings.n_users) {
            throw ValidationError("graph_from_split: user id out of range");
        }
        keep[u] = true;
    }

    RatingMatrix subset;
    subset.n_users = ratings.n_users;
    subset.n_items = ratings.n_items;
    for (const Rating& r : ratings.entries) {
        if (keep[r.user]) subset.entries.push_back(r);
    }

    Matrix corr = pearson_correlation(subset);
    // Negative correlations are clamped to zero before neighbor selection:
    // the graph encodes nonnegative rating similarity.
    for (std::size_t i = 0; i < corr.rows(); ++i)
        for (std::size_t j = 0; j < corr.cols(); ++j) corr(i, j) = std::max(0.0, corr(i, j));
    return build_knn_graph(corr, k);
}

}  // namespace gnnstab
