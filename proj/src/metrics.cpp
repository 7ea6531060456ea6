#include "bglmb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bglmb/errors.hpp"

namespace bglmb {

double ospa_distance(const std::vector<Eigen::Vector2d>& x,
                     const std::vector<Eigen::Vector2d>& y, const OspaParams& params) {
    if (params.p < 1.0 || params.c <= 0.0)
        throw std::invalid_argument("ospa: need order >= 1 and cutoff > 0");
    const auto* small = &x;
    const auto* big = &y;
    if (small->size() > big->size()) std::swap(small, big);
    const int m = static_cast<int>(small->size());
    const int n = static_cast<int>(big->size());
    if (n == 0) return 0.0;
    const double cp = std::pow(params.c, params.p);
    double total = cp * (n - m);
    if (m > 0) {
        Eigen::MatrixXd cost(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                cost(i, j) = std::pow(std::min(((*small)[i] - (*big)[j]).norm(), params.c),
                                      params.p);
        total += optimal_assignment(cost).cost;
    }
    return std::pow(total / n, 1.0 / params.p);
}

namespace {

struct FramePoint {
    int track = -1;  // index into the owning track vector
    Eigen::Vector2d pos;
};

// frame -> points, over the dense union span
std::map<int, std::vector<FramePoint>> by_frame(const std::vector<Track>& tracks) {
    std::map<int, std::vector<FramePoint>> out;
    for (std::size_t t = 0; t < tracks.size(); ++t)
        for (const auto& p : tracks[t].points)
            out[p.frame].push_back({static_cast<int>(t), p.position});
    return out;
}

}  // namespace

MotReport evaluate_tracks(const std::vector<Track>& est, const std::vector<Track>& gt,
                          double match_radius) {
    if (gt.empty()) throw DataError("evaluate_tracks: ground truth is empty");
    MotReport rep;
    rep.gt_count = static_cast<int>(gt.size());

    auto gt_frames = by_frame(gt);
    auto est_frames = by_frame(est);

    int first = std::numeric_limits<int>::max(), last = std::numeric_limits<int>::min();
    for (const auto& [f, _] : gt_frames) {
        first = std::min(first, f);
        last = std::max(last, f);
    }
    for (const auto& [f, _] : est_frames) {
        first = std::min(first, f);
        last = std::max(last, f);
    }
    const int n_frames = last - first + 1;

    long total_gt = 0, total_est = 0, matched = 0;
    // per gt track: matched est-track id per frame (-1 = unmatched), only for life frames
    std::vector<std::map<int, int>> gt_match(gt.size());

    for (int f = first; f <= last; ++f) {
        const auto git = gt_frames.find(f);
        const auto eit = est_frames.find(f);
        const int ng = git == gt_frames.end() ? 0 : static_cast<int>(git->second.size());
        const int ne = eit == est_frames.end() ? 0 : static_cast<int>(eit->second.size());
        total_gt += ng;
        total_est += ne;
        if (ng > 0)
            for (const auto& gp : git->second) gt_match[gp.track][f] = -1;
        if (ng == 0 || ne == 0) continue;

        // gt rows against est columns plus a private "unmatched" column per row
        // priced at the radius, so pairs beyond the radius are never taken
        Eigen::MatrixXd cost(ng, ne + ng);
        cost.setConstant(std::numeric_limits<double>::infinity());
        for (int i = 0; i < ng; ++i) {
            for (int j = 0; j < ne; ++j) {
                const double d = (git->second[i].pos - eit->second[j].pos).norm();
                if (d <= match_radius) cost(i, j) = d;
            }
            cost(i, ne + i) = match_radius;
        }
        const AssignmentResult sol = optimal_assignment(cost);
        for (int i = 0; i < ng; ++i) {
            const int c = sol.row_to_col[i];
            if (c < ne) {
                ++matched;
                gt_match[git->second[i].track][f] = eit->second[c].track;
            }
        }
    }

    rep.recall = total_gt > 0 ? static_cast<double>(matched) / total_gt : 0.0;
    rep.precision = total_est > 0 ? static_cast<double>(matched) / total_est : 0.0;
    rep.fpf = static_cast<double>(total_est - matched) / n_frames;

    int n_mt = 0, n_ml = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        const auto& life = gt_match[t];
        int covered = 0;
        bool prev_matched = false;
        int prev_id = -1;
        for (const auto& [frame, id] : life) {
            const bool m = id >= 0;
            if (m) {
                ++covered;
                if (prev_id >= 0 && id != prev_id) ++rep.ids;
                prev_id = id;
            }
            if (prev_matched && !m) ++rep.frag;
            prev_matched = m;
        }
        const double ratio = life.empty() ? 0.0 : static_cast<double>(covered) / life.size();
        if (ratio >= 0.8)
            ++n_mt;
        else if (ratio <= 0.2)
            ++n_ml;
    }
    rep.mt = static_cast<double>(n_mt) / rep.gt_count;
    rep.ml = static_cast<double>(n_ml) / rep.gt_count;
    rep.pt = 1.0 - rep.mt - rep.ml;
    return rep;
}

std::vector<std::vector<Eigen::Vector2d>> tracks_to_frames(const std::vector<Track>& tracks,
                                                           int first_frame, int last_frame) {
    std::vector<std::vector<Eigen::Vector2d>> out(std::max(0, last_frame - first_frame + 1));
    for (const auto& t : tracks)
        for (const auto& p : t.points)
            if (p.frame >= first_frame && p.frame <= last_frame)
                out[p.frame - first_frame].push_back(p.position);
    return out;
}

double mean_ospa(const std::vector<Track>& est, const std::vector<Track>& gt,
                 const OspaParams& params) {
    int first = std::numeric_limits<int>::max(), last = std::numeric_limits<int>::min();
    for (const auto* set : {&est, &gt})
        for (const auto& t : *set)
            if (!t.points.empty()) {
                first = std::min(first, t.birth_frame());
                last = std::max(last, t.last_frame());
            }
    if (first > last) return 0.0;
    const auto e = tracks_to_frames(est, first, last);
    const auto g = tracks_to_frames(gt, first, last);
    double sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) sum += ospa_distance(e[i], g[i], params);
    return sum / static_cast<double>(e.size());
}

}  // namespace bglmb
