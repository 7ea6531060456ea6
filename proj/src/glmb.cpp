#include "bglmb/glmb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "bglmb/errors.hpp"

namespace bglmb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// share of the global hypothesis budget, sqrt-weighted as usual, capped per hypothesis
int alloc_k(double w, double sqrt_sum, int per_hyp_cap, int budget) {
    const int k = static_cast<int>(std::lround(budget * std::sqrt(std::max(w, 0.0)) / sqrt_sum));
    return std::clamp(k, 1, per_hyp_cap);
}

// Up to k best joint outcomes over independent binary choices, best first.
// items[i] = (log weight of option 0, log weight of option 1); the returned
// flags say which items took option 1.
std::vector<std::pair<double, std::vector<char>>> k_best_binary(
    const std::vector<std::pair<double, double>>& items, int k) {
    const int n = static_cast<int>(items.size());
    std::vector<std::pair<double, std::vector<char>>> out;
    std::vector<char> best_flags(n, 0);
    std::vector<double> penalty(n);
    double base = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = items[i];
        best_flags[i] = b > a;
        base += std::max(a, b);
        penalty[i] = std::max(a, b) - std::min(a, b);  // may be +inf
    }
    if (base == kNegInf) return out;  // no possible outcome at all

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return penalty[a] < penalty[b]; });

    // lattice over sorted flip sets: children append the next index or shift the last
    struct Node {
        double pen;
        std::vector<int> flips;  // indices into `order`, ascending
    };
    auto cmp = [](const Node& a, const Node& b) { return a.pen > b.pen; };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> pq(cmp);
    pq.push({0.0, {}});
    while (!pq.empty() && static_cast<int>(out.size()) < k) {
        Node node = pq.top();
        pq.pop();
        std::vector<char> flags = best_flags;
        for (int f : node.flips) flags[order[f]] ^= 1;
        out.emplace_back(base - node.pen, std::move(flags));

        const int last = node.flips.empty() ? -1 : node.flips.back();
        if (last + 1 < n) {
            const double step = penalty[order[last + 1]];
            if (std::isfinite(step)) {
                Node ext = node;
                ext.flips.push_back(last + 1);
                ext.pen += step;
                pq.push(std::move(ext));
            }
            if (last >= 0 && std::isfinite(step)) {
                Node shift = node;
                shift.flips.back() = last + 1;
                shift.pen += step - penalty[order[last]];
                pq.push(std::move(shift));
            }
        }
    }
    return out;
}

struct Candidate {
    double log_w;
    std::vector<int> tracks;
};

// merge duplicates, normalize, prune, cap, renormalize; hypotheses end up
// sorted by weight (heaviest first)
void finalize_hypotheses(GlmbDensity& out, std::vector<Candidate>& cands,
                         const GlmbParams& params) {
    std::map<std::vector<int>, double> merged;
    for (auto& c : cands) {
        auto [it, fresh] = merged.try_emplace(std::move(c.tracks), c.log_w);
        if (!fresh) it->second = log_add(it->second, c.log_w);
    }
    double mx = kNegInf;
    for (const auto& [_, lw] : merged) mx = std::max(mx, lw);
    if (mx == kNegInf) throw NumericError("glmb: every hypothesis has zero weight");

    std::vector<GlmbHypothesis> hyps;
    double sum = 0.0;
    for (const auto& [tracks, lw] : merged) {
        const double w = std::exp(lw - mx);
        sum += w;
        hyps.push_back({w, tracks});
    }
    for (auto& h : hyps) h.w /= sum;

    std::stable_sort(hyps.begin(), hyps.end(),
                     [](const auto& a, const auto& b) { return a.w > b.w; });
    double kept = 0.0;
    std::vector<GlmbHypothesis> final_hyps;
    for (auto& h : hyps) {
        if (static_cast<int>(final_hyps.size()) >= params.h_max) break;
        if (h.w < params.w_prune && !final_hyps.empty()) break;
        kept += h.w;
        final_hyps.push_back(std::move(h));
    }
    for (auto& h : final_hyps) h.w /= kept;
    out.hypotheses = std::move(final_hyps);

    // drop unreferenced tracklets
    std::vector<int> remap(out.table.size(), -1);
    std::vector<Tracklet> table;
    for (auto& h : out.hypotheses)
        for (int& t : h.tracks) {
            if (remap[t] < 0) {
                remap[t] = static_cast<int>(table.size());
                table.push_back(std::move(out.table[t]));
            }
            t = remap[t];
        }
    out.table = std::move(table);
}

void sort_by_label(std::vector<int>& tracks, const std::vector<Tracklet>& table) {
    std::sort(tracks.begin(), tracks.end(),
              [&](int a, int b) { return table[a].label < table[b].label; });
}

}  // namespace

GlmbDensity GlmbDensity::empty(int frame) {
    GlmbDensity d;
    d.frame = frame;
    d.hypotheses.push_back({1.0, {}});
    return d;
}

std::vector<LabeledDensity> GlmbDensity::densities(const GlmbHypothesis& hyp) const {
    std::vector<LabeledDensity> out;
    out.reserve(hyp.tracks.size());
    for (int t : hyp.tracks) out.push_back({table[t].label, table[t].gm});
    return out;
}

std::vector<double> GlmbDensity::cardinality_distribution() const {
    std::size_t max_n = 0;
    for (const auto& h : hypotheses) max_n = std::max(max_n, h.tracks.size());
    std::vector<double> cdn(max_n + 1, 0.0);
    for (const auto& h : hypotheses) cdn[h.tracks.size()] += h.w;
    return cdn;
}

double GlmbDensity::weight_sum() const {
    double s = 0.0;
    for (const auto& h : hypotheses) s += h.w;
    return s;
}

GlmbDensity glmb_predict(const GlmbDensity& prior, const ModelSet& models,
                         const BirthSpec& birth, const GlmbParams& params) {
    GlmbDensity out;
    out.frame = prior.frame + 1;
    out.next_history = prior.next_history;

    // birth tracklets, shared by every hypothesis
    std::vector<int> birth_ids;
    std::vector<double> birth_log_r, birth_log_q;
    int birth_index = 0;
    for (const auto& entry : birth.entries) {
        if (entry.cls != ClassLabel::Target) continue;
        Tracklet t;
        t.label = {out.frame, birth_index++};
        t.gm = entry.density;
        t.history = out.next_history++;
        birth_ids.push_back(static_cast<int>(out.table.size()));
        out.table.push_back(std::move(t));
        birth_log_r.push_back(std::log(entry.r));
        birth_log_q.push_back(std::log1p(-entry.r));
    }

    // lazily predicted survivor tracklets
    std::vector<int> predicted_id(prior.table.size(), -1);
    auto predict_tracklet = [&](int old_id) {
        if (predicted_id[old_id] < 0) {
            Tracklet t;
            t.label = prior.table[old_id].label;
            t.history = prior.table[old_id].history;
            t.gm = gm_predict(prior.table[old_id].gm, models);
            predicted_id[old_id] = static_cast<int>(out.table.size());
            out.table.push_back(std::move(t));
        }
        return predicted_id[old_id];
    };

    double sqrt_sum = 0.0;
    for (const auto& h : prior.hypotheses) sqrt_sum += std::sqrt(std::max(h.w, 0.0));
    const double log_ps = std::log(models.sd.p_s1);
    const double log_qs = std::log1p(-models.sd.p_s1);

    std::vector<Candidate> cands;
    for (const auto& hyp : prior.hypotheses) {
        const int nt = static_cast<int>(hyp.tracks.size());
        const int nb = static_cast<int>(birth_ids.size());
        std::vector<std::pair<double, double>> items;
        items.reserve(nt + nb);
        for (int i = 0; i < nt; ++i) items.emplace_back(log_ps, log_qs);  // survive / die
        for (int b = 0; b < nb; ++b)
            items.emplace_back(birth_log_r[b], birth_log_q[b]);  // born / not born

        const int k = alloc_k(hyp.w, sqrt_sum, params.k_predict, params.h_max);
        for (auto& [log_factor, flags] : k_best_binary(items, k)) {
            Candidate c;
            c.log_w = std::log(hyp.w) + log_factor;
            for (int i = 0; i < nt; ++i)
                if (!flags[i]) c.tracks.push_back(predict_tracklet(hyp.tracks[i]));
            for (int b = 0; b < nb; ++b)
                if (!flags[nt + b]) c.tracks.push_back(birth_ids[b]);
            sort_by_label(c.tracks, out.table);
            cands.push_back(std::move(c));
        }
    }
    finalize_hypotheses(out, cands, params);
    return out;
}

GlmbDensity glmb_update(const GlmbDensity& predicted, const DetectionSet& detections,
                        const ModelSet& models, double kappa, const GlmbParams& params) {
    const int nz = static_cast<int>(detections.points.size());
    if (nz > 0 && !(kappa > 0.0))
        throw std::invalid_argument("glmb_update: clutter density must be positive");

    GlmbDensity out;
    out.frame = predicted.frame;
    out.next_history = predicted.next_history;

    const double log_pd = std::log(models.sd.p_d1);
    const double log_miss = models.sd.p_d1 < 1.0 ? std::log1p(-models.sd.p_d1) : kNegInf;
    const double log_kappa = nz > 0 ? std::log(kappa) : 0.0;

    // per predicted tracklet: detection log scores, and interned posterior tracklets
    std::vector<std::vector<double>> log_det(predicted.table.size());
    std::vector<int> miss_id(predicted.table.size(), -1);
    std::vector<std::vector<int>> det_id(predicted.table.size());
    auto scores_of = [&](int t) -> const std::vector<double>& {
        auto& row = log_det[t];
        if (row.empty() && nz > 0) {
            row.resize(nz);
            for (int j = 0; j < nz; ++j)
                row[j] = log_pd
                    + gm_predictive_loglik(predicted.table[t].gm, detections.points[j], models)
                    - log_kappa;
        }
        return row;
    };
    auto posterior_of = [&](int t, int assoc) {
        if (assoc == 0) {
            if (miss_id[t] < 0) {
                miss_id[t] = static_cast<int>(out.table.size());
                out.table.push_back(predicted.table[t]);  // history unchanged: same density
            }
            return miss_id[t];
        }
        if (det_id[t].empty()) det_id[t].assign(nz, -1);
        int& id = det_id[t][assoc - 1];
        if (id < 0) {
            Tracklet upd;
            upd.label = predicted.table[t].label;
            upd.history = out.next_history++;
            upd.gm = gm_measurement_update(predicted.table[t].gm,
                                           detections.points[assoc - 1], models)
                         .gm;
            upd.gm.cap(params.gm_max_terms, params.gm_prune);
            id = static_cast<int>(out.table.size());
            out.table.push_back(std::move(upd));
        }
        return id;
    };

    double sqrt_sum = 0.0;
    for (const auto& h : predicted.hypotheses) sqrt_sum += std::sqrt(std::max(h.w, 0.0));

    std::vector<Candidate> cands;
    for (const auto& hyp : predicted.hypotheses) {
        const int nt = static_cast<int>(hyp.tracks.size());
        Eigen::MatrixXd scores(nt, nz + 1);
        Eigen::MatrixXd logs(nt, nz + 1);
        for (int i = 0; i < nt; ++i) {
            logs(i, 0) = log_miss;
            const auto& row = scores_of(hyp.tracks[i]);
            for (int j = 0; j < nz; ++j) logs(i, j + 1) = row[j];
            // per-row rescaling keeps exp() in range without changing the ranking
            const double row_max = logs.row(i).maxCoeff();
            const double shift = std::isfinite(row_max) ? row_max : 0.0;
            for (int j = 0; j <= nz; ++j) scores(i, j) = std::exp(logs(i, j) - shift);
        }
        const int k = alloc_k(hyp.w, sqrt_sum, params.k_update, params.h_max);
        for (const auto& rm : ranked_assignment(scores, k)) {
            Candidate c;
            c.log_w = std::log(hyp.w);
            for (int i = 0; i < nt; ++i) {
                c.log_w += logs(i, rm.theta[i]);
                c.tracks.push_back(posterior_of(hyp.tracks[i], rm.theta[i]));
            }
            sort_by_label(c.tracks, out.table);
            cands.push_back(std::move(c));
        }
    }
    finalize_hypotheses(out, cands, params);
    return out;
}

std::vector<std::pair<Label, KinematicState>> extract_estimates(const GlmbDensity& density) {
    std::vector<std::pair<Label, KinematicState>> out;
    if (density.hypotheses.empty()) return out;
    const auto cdn = density.cardinality_distribution();
    const std::size_t n_map =
        std::max_element(cdn.begin(), cdn.end()) - cdn.begin();

    const GlmbHypothesis* best = nullptr;
    for (const auto& h : density.hypotheses)
        if (h.tracks.size() == n_map && (!best || h.w > best->w)) best = &h;
    if (!best) return out;
    for (int t : best->tracks)
        out.emplace_back(density.table[t].label, density.table[t].gm.mean());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

}  // namespace bglmb
