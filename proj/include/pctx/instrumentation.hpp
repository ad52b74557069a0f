#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pctx {

struct KVCache;

// One attention row's statistics. `region` is the slot label of the row's
// own token (sink / piece id / query); entropy_post equals entropy_pre when
// no selection was applied.
struct RowStat {
    int32_t layer = 0;
    int32_t head = 0;
    int32_t region = 0;
    int32_t row = 0;  // flattened slot index of the row's token
    float entropy_pre = 0.0f;
    float entropy_post = 0.0f;
    float logit_abs_mean = 0.0f;
    int32_t support = 0;  // unmasked key count
};

struct KeyStat {
    int32_t layer = 0;
    int32_t head = 0;
    int32_t slot = 0;
    int32_t region = 0;
    float position = 0.0f;
    float norm = 0.0f;
};

// Accumulator with an append-style merge. Records carry unique
// (layer, head, row/slot) keys, so summaries sort before reducing and are
// independent of merge order.
struct StatsBundle {
    std::vector<RowStat> rows;
    std::vector<KeyStat> keys;

    void merge(const StatsBundle& other);
    bool empty() const { return rows.empty() && keys.empty(); }
};

struct KeyNormByPosition {
    int32_t slot = 0;
    int32_t region = 0;
    float position = 0.0f;
    double norm_mean = 0.0;  // over layers and heads
};

struct StatsSummary {
    // query-row means over all layers and heads (post-selection entropy)
    double entropy_mean = 0.0;
    double logit_abs_mean = 0.0;
    int64_t query_rows = 0;
    // region key: "sink", "query", or "piece<i>"
    std::map<std::string, double> entropy_by_region;
    std::vector<KeyNormByPosition> keynorm_by_position;
};

// Natural-log entropy of a probability row; 0*log0 counts as 0. Throws
// InputError when the row does not sum to 1 within 1e-5.
double attention_entropy(std::span<const float> p);
double entropy_unchecked(std::span<const float> p);

// Mean |logit| over unmasked entries; `allowed` flags each entry.
double logit_abs_mean(std::span<const float> logits, std::span<const uint8_t> allowed);

// Euclidean norm per cached key vector, tagged with slot/region/position.
std::vector<KeyStat> key_norms(const KVCache& cache);

StatsSummary summarize(const StatsBundle& bundle);

// Sample Pearson correlation; throws InputError on size < 2 or zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

}  // namespace pctx
