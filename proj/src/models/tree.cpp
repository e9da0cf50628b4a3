#include "gridsentry/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gridsentry {

int Tree::find_leaf(std::span<const double> x) const {
    if (nodes.empty()) throw ContractError("tree: evaluate on an empty tree");
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return node;
}

const std::vector<double>& Tree::evaluate(std::span<const double> x) const {
    return nodes[static_cast<std::size_t>(find_leaf(x))].value;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double score = kNegInf;  // sum of squared class weights over child weight, to maximize
};

struct WorkItem {
    std::size_t begin;
    std::size_t end;
    int depth;
    int parent;
    bool is_left;
};

}  // namespace

Tree build_classification_tree(const Matrix& x, const std::vector<int>& y, int num_classes,
                               const std::vector<double>& sample_weights,
                               const std::vector<std::size_t>& rows, const TreeOptions& opt,
                               Rng& rng) {
    if (rows.empty()) throw ValidationError("tree: empty row set");
    if (num_classes < 1) throw ValidationError("tree: num_classes must be positive");
    const std::size_t d = x.cols();
    if (d == 0) throw ValidationError("tree: no features");
    const auto k = static_cast<std::size_t>(num_classes);
    const int m = opt.max_features > 0 ? std::min<int>(opt.max_features, static_cast<int>(d))
                                       : static_cast<int>(d);
    const auto weight_of = [&](std::size_t row) {
        return sample_weights.empty() ? 1.0 : sample_weights[row];
    };

    Tree tree;
    std::vector<std::size_t> idx = rows;
    std::vector<WorkItem> stack;
    stack.push_back({0, idx.size(), 0, -1, false});

    std::vector<double> tally(k);
    std::vector<double> left(k);
    std::vector<double> right(k);
    std::vector<std::pair<double, std::size_t>> scratch;
    std::vector<std::size_t> feature_pool(d);

    while (!stack.empty()) {
        const WorkItem item = stack.back();
        stack.pop_back();
        const std::size_t n = item.end - item.begin;

        std::fill(tally.begin(), tally.end(), 0.0);
        double total = 0.0;
        for (std::size_t i = item.begin; i < item.end; ++i) {
            const std::size_t row = idx[i];
            const int c = y[row];
            tally[static_cast<std::size_t>(c)] += weight_of(row);
            total += weight_of(row);
        }
        if (total <= 0.0) throw ValidationError("tree: node with zero total weight");

        int present = 0;
        for (double t : tally)
            if (t > 0.0) ++present;
        const bool depth_capped = opt.max_depth > 0 && item.depth >= opt.max_depth;
        const bool too_small = n < 2 * static_cast<std::size_t>(opt.min_samples_leaf);

        Candidate best;
        if (present > 1 && !depth_capped && !too_small) {
            // candidate feature set: all of them, or a per-node random subset
            int n_candidates = static_cast<int>(d);
            std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
            if (m < static_cast<int>(d)) {
                for (int j = 0; j < m; ++j) {
                    const auto pick = static_cast<std::size_t>(j) +
                                      static_cast<std::size_t>(rng.next_below(d - static_cast<std::size_t>(j)));
                    std::swap(feature_pool[static_cast<std::size_t>(j)], feature_pool[pick]);
                }
                n_candidates = m;
            }

            for (int fi = 0; fi < n_candidates; ++fi) {
                const std::size_t f = feature_pool[static_cast<std::size_t>(fi)];
                scratch.clear();
                for (std::size_t i = item.begin; i < item.end; ++i)
                    scratch.emplace_back(x(idx[i], f), idx[i]);
                std::sort(scratch.begin(), scratch.end());
                const double lo = scratch.front().first;
                const double hi = scratch.back().first;
                if (!(hi > lo)) continue;

                if (opt.random_thresholds) {
                    const double thr = lo + rng.next_double() * (hi - lo);
                    std::fill(left.begin(), left.end(), 0.0);
                    std::size_t n_left = 0;
                    for (const auto& [v, row] : scratch) {
                        if (v <= thr) {
                            left[static_cast<std::size_t>(y[row])] += weight_of(row);
                            ++n_left;
                        }
                    }
                    if (n_left < static_cast<std::size_t>(opt.min_samples_leaf) ||
                        n - n_left < static_cast<std::size_t>(opt.min_samples_leaf))
                        continue;
                    double wl = 0.0, sl = 0.0, wr = 0.0, sr = 0.0;
                    for (std::size_t c = 0; c < k; ++c) {
                        wl += left[c];
                        sl += left[c] * left[c];
                        const double rc = tally[c] - left[c];
                        wr += rc;
                        sr += rc * rc;
                    }
                    if (!(wl > 0.0) || !(wr > 0.0)) continue;
                    const double score = sl / wl + sr / wr;
                    if (score > best.score) best = {static_cast<int>(f), thr, score};
                } else {
                    // exhaustive sweep over midpoints between distinct values
                    std::fill(left.begin(), left.end(), 0.0);
                    std::copy(tally.begin(), tally.end(), right.begin());
                    double wl = 0.0, wr = total, sl = 0.0, sr = 0.0;
                    for (std::size_t c = 0; c < k; ++c) sr += tally[c] * tally[c];
                    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                        const auto [v, row] = scratch[i];
                        const auto c = static_cast<std::size_t>(y[row]);
                        const double w = weight_of(row);
                        sl += w * (2.0 * left[c] + w);
                        sr -= w * (2.0 * right[c] - w);
                        left[c] += w;
                        right[c] -= w;
                        wl += w;
                        wr -= w;
                        if (scratch[i + 1].first > v) {
                            const std::size_t n_left = i + 1;
                            if (n_left < static_cast<std::size_t>(opt.min_samples_leaf) ||
                                n - n_left < static_cast<std::size_t>(opt.min_samples_leaf))
                                continue;
                            if (!(wl > 0.0) || !(wr > 0.0)) continue;
                            const double score = sl / wl + sr / wr;
                            if (score > best.score)
                                best = {static_cast<int>(f), (v + scratch[i + 1].first) / 2.0, score};
                        }
                    }
                }
            }
        }

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (item.parent >= 0) {
            auto& parent = tree.nodes[static_cast<std::size_t>(item.parent)];
            (item.is_left ? parent.left : parent.right) = node_id;
        }

        if (best.feature < 0) {
            auto& leaf = tree.nodes.back();
            leaf.value.resize(k);
            for (std::size_t c = 0; c < k; ++c) leaf.value[c] = tally[c] / total;
            continue;
        }

        auto& node = tree.nodes.back();
        node.feature = best.feature;
        node.threshold = best.threshold;
        const auto f = static_cast<std::size_t>(best.feature);
        auto* mid_it = std::stable_partition(
            idx.data() + item.begin, idx.data() + item.end,
            [&](std::size_t row) { return x(row, f) <= best.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - idx.data());
        // right pushed first so the left child is processed (and numbered) next
        stack.push_back({mid, item.end, item.depth + 1, node_id, false});
        stack.push_back({item.begin, mid, item.depth + 1, node_id, true});
    }
    return tree;
}

std::vector<std::vector<std::uint32_t>> presort_features(const Matrix& x) {
    std::vector<std::vector<std::uint32_t>> sorted(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& order = sorted[f];
        order.resize(x.rows());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = x(a, f), vb = x(b, f);
            return va < vb || (va == vb && a < b);
        });
    }
    return sorted;
}

namespace {

struct SweepState {
    double w_left = 0.0;
    double s_left = 0.0;
    std::size_t n_left = 0;
    double prev = 0.0;
    bool have_prev = false;
};

struct FrontierNode {
    int node_id;
    double weight;
    double sum;
    double sum_sq;  // sum of w * t^2, for the purity stop
    std::size_t count;
    Candidate best;
};

}  // namespace

Tree build_regression_tree(const Matrix& x,
                           const std::vector<std::vector<std::uint32_t>>& sorted_rows,
                           const std::vector<double>& target,
                           const std::vector<double>& sample_weights, const TreeOptions& opt,
                           std::vector<int>& row_leaf) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || d == 0) throw ValidationError("regression tree: empty input");
    if (sorted_rows.size() != d || target.size() != n || sample_weights.size() != n)
        throw ValidationError("regression tree: input sizes disagree");
    if (opt.max_depth <= 0)
        throw ValidationError("regression tree: a positive depth cap is required");

    Tree tree;
    tree.nodes.emplace_back();
    row_leaf.assign(n, 0);

    double root_w = 0.0, root_s = 0.0, root_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        root_w += sample_weights[i];
        root_s += sample_weights[i] * target[i];
        root_q += sample_weights[i] * target[i] * target[i];
    }
    if (root_w <= 0.0) throw ValidationError("regression tree: zero total weight");

    std::vector<FrontierNode> frontier{{0, root_w, root_s, root_q, n, Candidate{}}};
    std::vector<int> slot_of;  // node id -> frontier slot, -1 when settled
    std::vector<SweepState> sweep;

    for (int depth = 0; depth < opt.max_depth && !frontier.empty(); ++depth) {
        slot_of.assign(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) {
            auto& fr = frontier[s];
            fr.best = Candidate{};
            // purity stop: a (near-)constant target gains nothing from splits
            const double impurity = fr.sum_sq - fr.sum * fr.sum / fr.weight;
            if (impurity <= 1e-12 * std::max(1.0, std::abs(fr.sum_sq))) continue;
            slot_of[static_cast<std::size_t>(fr.node_id)] = static_cast<int>(s);
        }

        for (std::size_t f = 0; f < d; ++f) {
            sweep.assign(frontier.size(), SweepState{});
            for (const std::uint32_t row : sorted_rows[f]) {
                const int slot = slot_of[static_cast<std::size_t>(row_leaf[row])];
                if (slot < 0) continue;
                auto& st = sweep[static_cast<std::size_t>(slot)];
                auto& fr = frontier[static_cast<std::size_t>(slot)];
                const double v = x(row, f);
                if (st.have_prev && v > st.prev && st.n_left > 0) {
                    const std::size_t n_right = fr.count - st.n_left;
                    if (st.n_left >= static_cast<std::size_t>(opt.min_samples_leaf) &&
                        n_right >= static_cast<std::size_t>(opt.min_samples_leaf)) {
                        const double wr = fr.weight - st.w_left;
                        if (st.w_left > 0.0 && wr > 0.0) {
                            const double sr = fr.sum - st.s_left;
                            const double score =
                                st.s_left * st.s_left / st.w_left + sr * sr / wr;
                            if (score > fr.best.score)
                                fr.best = {static_cast<int>(f), (st.prev + v) / 2.0, score};
                        }
                    }
                }
                st.w_left += sample_weights[row];
                st.s_left += sample_weights[row] * target[row];
                ++st.n_left;
                st.prev = v;
                st.have_prev = true;
            }
        }

        // materialize splits, then reassign rows and gather child statistics
        std::vector<FrontierNode> next;
        for (auto& fr : frontier) {
            if (fr.best.feature < 0) {
                tree.nodes[static_cast<std::size_t>(fr.node_id)].value = {fr.sum / fr.weight};
                slot_of[static_cast<std::size_t>(fr.node_id)] = -1;
                continue;
            }
            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            // re-acquire after growth: emplace_back may reallocate the pool
            auto& node = tree.nodes[static_cast<std::size_t>(fr.node_id)];
            node.feature = fr.best.feature;
            node.threshold = fr.best.threshold;
            node.left = left_id;
            node.right = left_id + 1;
            next.push_back({node.left, 0.0, 0.0, 0.0, 0, Candidate{}});
            next.push_back({node.right, 0.0, 0.0, 0.0, 0, Candidate{}});
        }
        std::vector<int> child_slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < next.size(); ++s)
            child_slot[static_cast<std::size_t>(next[s].node_id)] = static_cast<int>(s);

        for (std::size_t row = 0; row < n; ++row) {
            const int slot = slot_of[static_cast<std::size_t>(row_leaf[row])];
            if (slot < 0) continue;
            const auto& node = tree.nodes[static_cast<std::size_t>(row_leaf[row])];
            const int child = x(row, static_cast<std::size_t>(node.feature)) <= node.threshold
                                  ? node.left
                                  : node.right;
            row_leaf[row] = child;
            auto& fr = next[static_cast<std::size_t>(child_slot[static_cast<std::size_t>(child)])];
            fr.weight += sample_weights[row];
            fr.sum += sample_weights[row] * target[row];
            fr.sum_sq += sample_weights[row] * target[row] * target[row];
            ++fr.count;
        }
        frontier = std::move(next);
    }

    // depth cap reached: whatever is left becomes leaves
    for (const auto& fr : frontier)
        tree.nodes[static_cast<std::size_t>(fr.node_id)].value = {fr.sum / fr.weight};
    return tree;
}

nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nlohmann::json{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
        throw ValidationError("tree: malformed serialized form");
    for (const auto& item : j["nodes"]) {
        if (!item.is_array() || item.size() != 5)
            throw ValidationError("tree: malformed serialized node");
        TreeNode n;
        n.feature = item[0].get<int>();
        n.threshold = item[1].get<double>();
        n.left = item[2].get<int>();
        n.right = item[3].get<int>();
        n.value = item[4].get<std::vector<double>>();
        tree.nodes.push_back(std::move(n));
    }
    if (tree.nodes.empty()) throw ValidationError("tree: empty serialized tree");
    return tree;
}

}  // namespace gridsentry
