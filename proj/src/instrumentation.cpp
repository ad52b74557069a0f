#include "pctx/instrumentation.hpp"

#include <algorithm>
#include <cmath>

#include "pctx/attention_engine.hpp"
#include "pctx/context_layout.hpp"
#include "pctx/error.hpp"

namespace pctx {

void StatsBundle::merge(const StatsBundle& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    keys.insert(keys.end(), other.keys.begin(), other.keys.end());
}

double entropy_unchecked(std::span<const float> p) {
    double h = 0.0;
    for (float v : p) {
        if (v > 0.0f) h -= static_cast<double>(v) * std::log(static_cast<double>(v));
    }
    return h;
}

double attention_entropy(std::span<const float> p) {
    double sum = 0.0;
    for (float v : p) sum += static_cast<double>(v);
    if (std::abs(sum - 1.0) > 1e-5) {
        throw InputError("attention_entropy: row does not sum to 1");
    }
    return entropy_unchecked(p);
}

double logit_abs_mean(std::span<const float> logits, std::span<const uint8_t> allowed) {
    if (logits.size() != allowed.size()) {
        throw DimensionError("logit_abs_mean: mask length mismatch");
    }
    double sum = 0.0;
    int64_t n = 0;
    for (size_t i = 0; i < logits.size(); ++i) {
        if (!allowed[i]) continue;
        sum += std::abs(static_cast<double>(logits[i]));
        ++n;
    }
    if (n == 0) throw InputError("logit_abs_mean: fully masked row");
    return sum / static_cast<double>(n);
}

std::vector<KeyStat> key_norms(const KVCache& cache) {
    std::vector<KeyStat> out;
    const int hd = cache.head_dim();
    out.reserve(static_cast<size_t>(cache.layers()) * cache.heads * cache.slots());
    for (int l = 0; l < cache.layers(); ++l) {
        for (int h = 0; h < cache.heads; ++h) {
            for (int s = 0; s < cache.slots(); ++s) {
                const float* k = cache.keys[l].row(s) + h * hd;
                double sq = 0.0;
                for (int d = 0; d < hd; ++d) sq += static_cast<double>(k[d]) * k[d];
                KeyStat ks;
                ks.layer = l;
                ks.head = h;
                ks.slot = s;
                ks.region = cache.slot_label[s];
                ks.position = cache.slot_pos[s];
                ks.norm = static_cast<float>(std::sqrt(sq));
                out.push_back(ks);
            }
        }
    }
    return out;
}

namespace {

std::string region_name(int label) {
    if (label == kSinkLabel) return "sink";
    if (label == kQueryLabel) return "query";
    return "piece" + std::to_string(label);
}

}  // namespace

StatsSummary summarize(const StatsBundle& bundle) {
    StatsSummary s;

    auto rows = bundle.rows;
    std::sort(rows.begin(), rows.end(), [](const RowStat& a, const RowStat& b) {
        if (a.layer != b.layer) return a.layer < b.layer;
        if (a.head != b.head) return a.head < b.head;
        return a.row < b.row;
    });

    double entropy_sum = 0.0;
    double logit_sum = 0.0;
    std::map<std::string, std::pair<double, int64_t>> by_region;
    for (const RowStat& r : rows) {
        auto& acc = by_region[region_name(r.region)];
        acc.first += r.entropy_post;
        acc.second += 1;
        if (r.region == kQueryLabel) {
            entropy_sum += r.entropy_post;
            logit_sum += r.logit_abs_mean;
            ++s.query_rows;
        }
    }
    if (s.query_rows > 0) {
        s.entropy_mean = entropy_sum / static_cast<double>(s.query_rows);
        s.logit_abs_mean = logit_sum / static_cast<double>(s.query_rows);
    }
    for (const auto& [name, acc] : by_region) {
        s.entropy_by_region[name] = acc.first / static_cast<double>(acc.second);
    }

    auto keys = bundle.keys;
    std::sort(keys.begin(), keys.end(), [](const KeyStat& a, const KeyStat& b) {
        if (a.slot != b.slot) return a.slot < b.slot;
        if (a.layer != b.layer) return a.layer < b.layer;
        return a.head < b.head;
    });
    size_t i = 0;
    while (i < keys.size()) {
        size_t j = i;
        double sum = 0.0;
        while (j < keys.size() && keys[j].slot == keys[i].slot) {
            sum += keys[j].norm;
            ++j;
        }
        KeyNormByPosition k;
        k.slot = keys[i].slot;
        k.region = keys[i].region;
        k.position = keys[i].position;
        k.norm_mean = sum / static_cast<double>(j - i);
        s.keynorm_by_position.push_back(k);
        i = j;
    }
    return s;
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DimensionError("pearson_r: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw InputError("pearson_r: need at least two samples");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw InputError("pearson_r: zero variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace pctx
