#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pctx {

// Dimensions the grouped scores are reduced over before top-K selection.
// LHT needs attention from every layer, hence the engine's two-pass forward.
enum class Aggregation { None, T, HT, LHT };

struct SelectionConfig {
    int k = 2;
    int reduce_m = 5;  // width of the top-m sum used as the reduction
    Aggregation aggregation = Aggregation::None;
};

// Attention probabilities shaped [layers, heads, queries, slots], row-major.
// Slots a row cannot attend to hold exact zeros.
struct ProbTensor {
    int layers = 0, heads = 0, queries = 0, slots = 0;

    std::vector<float> p;

    ProbTensor() = default;
    ProbTensor(int l, int h, int q, int s)
        : layers(l), heads(h), queries(q), slots(s),
          p(static_cast<size_t>(l) * h * q * s, 0.0f) {}

    float* row(int l, int h, int q) {
        return p.data() + ((static_cast<size_t>(l) * heads + h) * queries + q) * slots;
    }
    const float* row(int l, int h, int q) const {
        return p.data() + ((static_cast<size_t>(l) * heads + h) * queries + q) * slots;
    }
};

// Grouped scores; aggregated dimensions collapse to extent 1 and broadcast
// at selection time.
struct GroupScores {
    int layers = 0, heads = 0, queries = 0, groups = 0;
    std::vector<double> s;

    GroupScores() = default;
    GroupScores(int l, int h, int q, int g)
        : layers(l), heads(h), queries(q), groups(g),
          s(static_cast<size_t>(l) * h * q * g, 0.0) {}

    double* at(int l, int h, int q) {
        return s.data() + ((static_cast<size_t>(l) * heads + h) * queries + q) * groups;
    }
    const double* at(int l, int h, int q) const {
        return s.data() + ((static_cast<size_t>(l) * heads + h) * queries + q) * groups;
    }
};

// Selected group ids per scoring slot, ascending; k_eff = min(K, P).
struct SelectedGroups {
    int layers = 0, heads = 0, queries = 0, k_eff = 0;
    std::vector<int> idx;

    const int* at(int l, int h, int q) const {
        // broadcast over aggregated (extent-1) dimensions
        const int ll = layers == 1 ? 0 : l;
        const int hh = heads == 1 ? 0 : h;
        const int qq = queries == 1 ? 0 : q;
        return idx.data() + ((static_cast<size_t>(ll) * heads + hh) * queries + qq) * k_eff;
    }
};

struct SelectionTrace {
    SelectionConfig config;
    int piece_count = 0;
    // rows that kept each group, indexed [layer][head][group]
    std::vector<std::vector<std::vector<int64_t>>> kept_counts;
    int64_t fallback_rows = 0;  // rows whose surviving mass fell below epsilon

    void init(int layers, int heads, int groups);
    void merge(const SelectionTrace& other);
};

// Per-group sum of the reduce_m largest probabilities along the key axis.
// Slots labeled sink/query belong to no group.
GroupScores group_scores(const ProbTensor& p, std::span<const int> slot_labels, int reduce_m);

GroupScores aggregate(const GroupScores& s, Aggregation dims, int reduce_m);

SelectedGroups select_topk(const GroupScores& s, int k);

// Masks unselected piece tokens to exact zero and renormalizes. Rows that
// lose no mass are returned untouched, which keeps identity selections and
// repeated application bit-exact.
ProbTensor apply_selection(const ProbTensor& p, const SelectedGroups& sel,
                           std::span<const int> slot_labels, SelectionTrace* trace = nullptr);

// Algorithm: group -> aggregate -> top-K -> expand mask -> renormalize.
std::pair<ProbTensor, SelectionTrace> selective_attention(const ProbTensor& p_in,
                                                          const SelectionConfig& cfg,
                                                          std::span<const int> slot_labels);

int piece_count_of(std::span<const int> slot_labels);

}  // namespace pctx
