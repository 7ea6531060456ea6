#pragma once
#include <vector>
#include <Eigen/Dense>

#include "bglmb/assignment.hpp"
#include "bglmb/types.hpp"

namespace bglmb {

struct OspaParams {
    double p = 1.0;    // order
    double c = 100.0;  // cutoff, same units as the position distance
};

/// OSPA distance between two finite position sets. Euclidean base distance,
/// cutoff c, order p; zero when both sets are empty.
double ospa_distance(const std::vector<Eigen::Vector2d>& x,
                     const std::vector<Eigen::Vector2d>& y, const OspaParams& params);

/// CLEAR-style track-quality indexes.
struct MotReport {
    double recall = 0.0;
    double precision = 0.0;
    double fpf = 0.0;  // false positives per frame
    int gt_count = 0;
    double mt = 0.0, pt = 0.0, ml = 0.0;  // mostly/partially/mostly-lost fractions
    int frag = 0;
    int ids = 0;
};

/// Per-frame optimal position matching within match_radius, then the usual
/// aggregate indexes. Throws DataError when gt is empty.
MotReport evaluate_tracks(const std::vector<Track>& est, const std::vector<Track>& gt,
                          double match_radius);

/// Positions per frame over [first_frame, last_frame], for OSPA curves.
std::vector<std::vector<Eigen::Vector2d>> tracks_to_frames(const std::vector<Track>& tracks,
                                                           int first_frame, int last_frame);

/// Mean per-frame OSPA between two track sets over the union of their spans.
double mean_ospa(const std::vector<Track>& est, const std::vector<Track>& gt,
                 const OspaParams& params);

}  // namespace bglmb
