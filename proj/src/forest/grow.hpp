#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "threatbench/core/matrix.hpp"
#include "threatbench/forest/tree.hpp"

namespace threatbench::forest::detail {

/// Row indices ordered by each feature's value, ties by row index.
struct Presorted {
    std::vector<std::vector<std::uint32_t>> order;

    explicit Presorted(const Matrix& X) : order(X.cols()) {
        for (std::size_t f = 0; f < X.cols(); ++f) {
            auto& idx = order[f];
            idx.resize(X.rows());
            std::iota(idx.begin(), idx.end(), 0U);
            std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
                return X(a, f) < X(b, f);
            });
        }
    }
};

/// Threshold between two distinct sorted values that keeps lo on the left and
/// hi on the right even when the midpoint rounds up to hi.
inline double split_point(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

/// Level-wise exact greedy grower. For every level, each feature's presorted
/// order is scanned once and every open node accumulates its own left-side
/// statistics. Candidates are compared with a strict '>' in ascending
/// (feature, threshold) order, so ties go to the lowest feature and threshold.
///
/// Criterion provides:
///   Stats zero(); void add(Stats&, row); Stats minus(parent, left);
///   bool splittable(Stats, depth); bool child_ok(Stats);
///   double gain(left, right, parent); bool accept(gain);
///   double value(Stats); std::array<double,2> summary(Stats)
///
/// mask_for_node(node) returns the allowed features of a node about to be
/// split, or an empty vector for all features.
template <class Criterion, class MaskFn>
Tree grow_level_wise(const Matrix& X, const Presorted& sorted, std::span<const char> included,
                     const Criterion& crit, int max_depth, MaskFn&& mask_for_node) {
    using Stats = typename Criterion::Stats;
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();

    Tree tree;
    std::vector<Stats> stats;
    std::vector<int> node_of(n, -1);

    Stats root = crit.zero();
    for (std::size_t r = 0; r < n; ++r) {
        if (included[r]) {
            node_of[r] = 0;
            crit.add(root, r);
        }
    }
    tree.nodes.emplace_back();
    stats.push_back(root);

    std::vector<int> frontier{0};
    for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
        std::vector<int> active;
        for (int node : frontier) {
            if (crit.splittable(stats[static_cast<std::size_t>(node)], depth)) {
                active.push_back(node);
            }
        }
        if (active.empty()) break;

        const std::size_t m = active.size();
        std::vector<int> local(tree.nodes.size(), -1);
        std::vector<std::vector<char>> masks(m);
        for (std::size_t a = 0; a < m; ++a) {
            local[static_cast<std::size_t>(active[a])] = static_cast<int>(a);
            masks[a] = mask_for_node(active[a]);
        }

        struct Best {
            double gain = -std::numeric_limits<double>::infinity();
            int feature = -1;
            double threshold = 0.0;
        };
        std::vector<Best> best(m);
        std::vector<Stats> left(m);
        std::vector<double> last(m);
        std::vector<char> seen(m);
        std::vector<char> allowed(m);

        for (std::size_t f = 0; f < d; ++f) {
            bool any = false;
            for (std::size_t a = 0; a < m; ++a) {
                allowed[a] = masks[a].empty() || masks[a][f];
                any = any || allowed[a];
                left[a] = crit.zero();
                seen[a] = 0;
            }
            if (!any) continue;

            for (std::uint32_t r : sorted.order[f]) {
                const int node = node_of[r];
                if (node < 0) continue;
                const int a_signed = local[static_cast<std::size_t>(node)];
                if (a_signed < 0) continue;
                const auto a = static_cast<std::size_t>(a_signed);
                if (!allowed[a]) continue;

                const double v = X(r, f);
                if (seen[a] && v > last[a]) {
                    const Stats& parent = stats[static_cast<std::size_t>(node)];
                    const Stats right = crit.minus(parent, left[a]);
                    if (crit.child_ok(left[a]) && crit.child_ok(right)) {
                        const double g = crit.gain(left[a], right, parent);
                        if (g > best[a].gain) {
                            best[a] = {g, static_cast<int>(f), split_point(last[a], v)};
                        }
                    }
                }
                crit.add(left[a], r);
                last[a] = v;
                seen[a] = 1;
            }
        }

        std::vector<int> next;
        std::vector<char> split(tree.nodes.size(), 0);
        for (std::size_t a = 0; a < m; ++a) {
            if (best[a].feature < 0 || !crit.accept(best[a].gain)) continue;
            const auto node = static_cast<std::size_t>(active[a]);
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            stats.push_back(crit.zero());
            stats.push_back(crit.zero());
            tree.nodes[node].feature = best[a].feature;
            tree.nodes[node].threshold = best[a].threshold;
            tree.nodes[node].left = l;
            tree.nodes[node].right = l + 1;
            split[node] = 1;
            next.push_back(l);
            next.push_back(l + 1);
        }

        for (std::size_t r = 0; r < n; ++r) {
            const int node = node_of[r];
            if (node < 0) continue;
            const auto& parent = tree.nodes[static_cast<std::size_t>(node)];
            if (static_cast<std::size_t>(node) >= split.size() ||
                !split[static_cast<std::size_t>(node)]) {
                node_of[r] = -1;
                continue;
            }
            const auto f = static_cast<std::size_t>(parent.feature);
            const int child = X(r, f) <= parent.threshold ? parent.left : parent.right;
            node_of[r] = child;
            crit.add(stats[static_cast<std::size_t>(child)], r);
        }
        frontier = std::move(next);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        tree.nodes[i].value = crit.value(stats[i]);
        tree.nodes[i].stats = crit.summary(stats[i]);
    }
    return preorder(tree);
}

} // namespace threatbench::forest::detail
