#include "bglmb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bglmb/errors.hpp"

namespace bglmb::io {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw DataError(where + ": not a finite number: '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& where) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw DataError(where + ": not an integer: '" + s + "'");
    return v;
}

std::string location(const std::filesystem::path& path, int line) {
    return path.string() + ":" + std::to_string(line);
}

// temp file + rename so readers never observe a partial file
class AtomicWriter {
public:
    explicit AtomicWriter(const std::filesystem::path& path)
        : path_(path), tmp_(path.string() + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_) throw DataError("cannot open for writing: " + tmp_.string());
    }
    std::ofstream& stream() { return out_; }
    void commit() {
        out_.flush();
        if (!out_) throw DataError("write failed: " + tmp_.string());
        out_.close();
        std::filesystem::rename(tmp_, path_);
    }

private:
    std::filesystem::path path_, tmp_;
    std::ofstream out_;
};

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool starts_numeric(const std::string& line) {
    const std::string t = trim(line);
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-'
                          || t[0] == '+' || t[0] == '.');
}

}  // namespace

DetectionFormat detection_format_for(SensorKind sensor) {
    return sensor == SensorKind::BearingRange ? DetectionFormat::BearingRangeCsv
                                              : DetectionFormat::MotCsv;
}

std::vector<DetectionSet> load_detections(const std::filesystem::path& path,
                                          DetectionFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open detections file: " + path.string());
    std::map<int, std::vector<Eigen::Vector2d>> by_frame;
    int max_frame = 0;
    std::string line;
    int line_no = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (line_no == 1 && !starts_numeric(line)) continue;  // tolerate one header line
        const auto f = split_csv(line);
        const std::string where = location(path, line_no);
        Eigen::Vector2d z;
        int frame;
        if (format == DetectionFormat::MotCsv) {
            if (f.size() < 6) throw DataError(where + ": expected at least 6 MOT fields");
            frame = static_cast<int>(parse_long(f[0], where));
            const double left = parse_double(f[2], where);
            const double top = parse_double(f[3], where);
            const double w = parse_double(f[4], where);
            const double h = parse_double(f[5], where);
            z << left + w / 2.0, top + h / 2.0;
        } else {
            if (f.size() < 3) throw DataError(where + ": expected frame,theta,range");
            frame = static_cast<int>(parse_long(f[0], where));
            z << parse_double(f[1], where), parse_double(f[2], where);
        }
        if (frame < 1) throw DataError(where + ": frame index must be >= 1");
        by_frame[frame].push_back(z);
        max_frame = std::max(max_frame, frame);
        any = true;
    }
    if (!any) throw DataError("detections file has no data rows: " + path.string());

    std::vector<DetectionSet> out(max_frame);
    for (int k = 1; k <= max_frame; ++k) {
        out[k - 1].frame = k;
        if (auto it = by_frame.find(k); it != by_frame.end())
            out[k - 1].points = std::move(it->second);
    }
    return out;
}

void write_detections(const std::vector<DetectionSet>& detections,
                      const std::filesystem::path& path, DetectionFormat format) {
    AtomicWriter w(path);
    for (const auto& set : detections) {
        for (const auto& z : set.points) {
            if (format == DetectionFormat::MotCsv)
                w.stream() << set.frame << ",-1," << fmt6(z(0)) << "," << fmt6(z(1))
                           << ",0,0,1\n";
            else
                w.stream() << set.frame << "," << fmt6(z(0)) << "," << fmt6(z(1)) << "\n";
        }
    }
    w.commit();
}

void write_tracks(const std::vector<Track>& tracks, const std::filesystem::path& path) {
    struct Row {
        int frame, id;
        double x, y, vx, vy;
    };
    std::vector<Row> rows;
    for (const auto& t : tracks)
        for (const auto& p : t.points) {
            Row r{p.frame, t.id, p.position(0), p.position(1), 0.0, 0.0};
            if (p.state.size() >= 4) {
                r.vx = p.state(1);
                r.vy = p.state(3);
            }
            rows.push_back(r);
        }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
    });
    AtomicWriter w(path);
    w.stream() << "frame,id,x,y,vx,vy\n";
    for (const auto& r : rows)
        w.stream() << r.frame << "," << r.id << "," << fmt6(r.x) << "," << fmt6(r.y) << ","
                   << fmt6(r.vx) << "," << fmt6(r.vy) << "\n";
    w.commit();
}

std::vector<Track> load_tracks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open tracks file: " + path.string());
    std::map<int, Track> by_id;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!starts_numeric(line)) {
            if (line_no == 1) continue;
            throw DataError(location(path, line_no) + ": malformed track row");
        }
        const auto f = split_csv(line);
        const std::string where = location(path, line_no);
        if (f.size() < 4) throw DataError(where + ": expected frame,id,x,y");
        const int frame = static_cast<int>(parse_long(f[0], where));
        const int id = static_cast<int>(parse_long(f[1], where));
        TrackPoint p;
        p.frame = frame;
        p.position << parse_double(f[2], where), parse_double(f[3], where);
        if (f.size() >= 6) {
            p.state = Eigen::Vector4d(p.position(0), parse_double(f[4], where), p.position(1),
                                      parse_double(f[5], where));
        }
        auto [it, fresh] = by_id.try_emplace(id);
        if (fresh) {
            it->second.id = id;
            it->second.label = {0, id};
        }
        it->second.points.push_back(std::move(p));
    }
    std::vector<Track> out;
    for (auto& [id, t] : by_id) {
        std::sort(t.points.begin(), t.points.end(),
                  [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
        out.push_back(std::move(t));
    }
    return out;
}

void write_lambda_csv(const std::vector<FrameResult>& frames,
                      const std::filesystem::path& path) {
    AtomicWriter w(path);
    w.stream() << "frame,lambda_hat,n_clutter_gen\n";
    for (const auto& fr : frames)
        w.stream() << fr.frame << "," << fmt6(fr.clutter.lambda_hat) << ","
                   << fmt6(fr.clutter.n_clutter_gen) << "\n";
    w.commit();
}

std::vector<KvEntry> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::vector<KvEntry> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError(location(path, line_no) + ": expected 'key = value'");
        KvEntry e;
        e.key = trim(t.substr(0, eq));
        e.value = trim(t.substr(eq + 1));
        e.line = line_no;
        if (e.key.empty() || e.value.empty())
            throw DataError(location(path, line_no) + ": expected 'key = value'");
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

// typed view over the parsed key-value entries with unknown-key detection
class KvReader {
public:
    KvReader(const std::filesystem::path& path, std::vector<KvEntry> entries)
        : path_(path), entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!index_.emplace(entries_[i].key, i).second)
                throw DataError(path_.string() + ": duplicate key '" + entries_[i].key + "'");
        }
    }

    bool has(const std::string& key) {
        const auto it = index_.find(key);
        if (it == index_.end()) return false;
        used_.insert(key);
        return true;
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? parse_double(value(key), where(key)) : fallback;
    }
    long integer(const std::string& key, long fallback) {
        return has(key) ? parse_long(value(key), where(key)) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        return has(key) ? value(key) : fallback;
    }

    /// Every key must have been consumed by now.
    void finish() const {
        for (const auto& e : entries_)
            if (!used_.count(e.key))
                throw DataError(location(path_, e.line) + ": unknown key '" + e.key + "'");
    }

    const std::vector<KvEntry>& entries() const { return entries_; }

private:
    const std::string& value(const std::string& key) { return entries_[index_.at(key)].value; }
    std::string where(const std::string& key) {
        return location(path_, entries_[index_.at(key)].line);
    }

    std::filesystem::path path_;
    std::vector<KvEntry> entries_;
    std::map<std::string, std::size_t> index_;
    std::set<std::string> used_;
};

SensorKind parse_sensor(const std::string& s, const std::filesystem::path& path) {
    if (s == "bearing-range") return SensorKind::BearingRange;
    if (s == "linear") return SensorKind::LinearPosition;
    throw DataError(path.string() + ": sensor.kind must be 'bearing-range' or 'linear'");
}

void read_region(KvReader& kv, Region& region) {
    region.xmin = kv.number("region.xmin", region.xmin);
    region.xmax = kv.number("region.xmax", region.xmax);
    region.ymin = kv.number("region.ymin", region.ymin);
    region.ymax = kv.number("region.ymax", region.ymax);
    region.range_max = kv.number("region.range_max", region.range_max);
    if (!(region.xmax > region.xmin) || !(region.ymax > region.ymin)
        || !(region.range_max > 0.0))
        throw DataError("region must be nonempty");
}

}  // namespace

TrackerConfig load_tracker_config(const std::filesystem::path& path) {
    KvReader kv(path, parse_kv_file(path));
    TrackerConfig cfg = TrackerConfig::defaults();

    cfg.seed = static_cast<std::uint64_t>(kv.integer("seed", 0));
    cfg.lambda_window = static_cast<int>(kv.integer("lambda.window", cfg.lambda_window));
    cfg.lambda_min = kv.number("lambda.min", cfg.lambda_min);
    if (kv.has("lambda.fixed")) cfg.fixed_clutter = kv.number("lambda.fixed", 0.0);

    auto& m = cfg.models;
    m.sensor = parse_sensor(kv.text("sensor.kind", "bearing-range"), path);
    m.motion = kv.text("motion.kind", "ct") == "cv" ? MotionKind::ConstantVelocity
                                                    : MotionKind::CoordinatedTurn;
    read_region(kv, m.region);
    m.ct.T = kv.number("motion.T", m.ct.T);
    m.ct.sigma_w = kv.number("motion.sigma_w", m.ct.sigma_w);
    m.ct.sigma_omega = kv.number("motion.sigma_omega", m.ct.sigma_omega);
    m.cv.T = m.ct.T;
    m.cv.sigma_w = m.ct.sigma_w;
    m.rw.sigma_rw = kv.number("motion.sigma_rw", m.rw.sigma_rw);
    m.bearing_range.sigma_theta = kv.number("sensor.sigma_theta", m.bearing_range.sigma_theta);
    m.bearing_range.sigma_r = kv.number("sensor.sigma_r", m.bearing_range.sigma_r);
    m.bearing_range.origin(0) = kv.number("sensor.origin_x", 0.0);
    m.bearing_range.origin(1) = kv.number("sensor.origin_y", 0.0);
    {
        Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
        const double sx = kv.number("sensor.sigma_x", 5.0);
        const double sy = kv.number("sensor.sigma_y", 5.0);
        sigma(0, 0) = sx * sx;
        sigma(1, 1) = sy * sy;
        m.linear = make_linear_position_model(m.state_dim(), sigma);
    }
    m.sd.p_s1 = kv.number("survival.p_s1", m.sd.p_s1);
    m.sd.p_s0 = kv.number("survival.p_s0", m.sd.p_s0);
    m.sd.p_d1 = kv.number("detection.p_d1", m.sd.p_d1);
    m.sd.p_d0 = kv.number("detection.p_d0", m.sd.p_d0);
    m.sd.validate();

    // birth sites: birth.site.N.x / .y with shared spread and existence
    const double birth_r = kv.number("birth.r", 0.03);
    const double std_pos = kv.number("birth.std_pos", 30.0);
    const double std_vel = kv.number("birth.std_vel", 15.0);
    const double std_omega = kv.number("birth.std_omega", 0.06);
    std::vector<std::pair<double, double>> sites;
    for (int i = 1;; ++i) {
        const std::string base = "birth.site." + std::to_string(i);
        if (!kv.has(base + ".x")) break;
        if (!kv.has(base + ".y")) throw DataError(path.string() + ": missing " + base + ".y");
        sites.emplace_back(kv.number(base + ".x", 0.0), kv.number(base + ".y", 0.0));
    }
    cfg.rmb.n_particles = static_cast<int>(kv.integer("rmb.n_particles", cfg.rmb.n_particles));
    cfg.rmb.r_prune = kv.number("rmb.r_prune", cfg.rmb.r_prune);
    cfg.rmb.m_max = static_cast<int>(kv.integer("rmb.m_max", cfg.rmb.m_max));
    const int n_spray = static_cast<int>(kv.integer("rmb.clutter_birth.count", 2));
    const double spray_r = kv.number("rmb.clutter_birth.r", 0.3);

    if (!sites.empty() || kv.has("birth.r")) {
        cfg.glmb_birth.entries.clear();
        cfg.rmb_birth.entries.clear();
        for (const auto& [x, y] : sites) {
            BirthEntry entry;
            entry.r = birth_r;
            entry.cls = ClassLabel::Target;
            entry.density = birth_site_density(x, y, m.state_dim(), std_pos, std_vel, std_omega);
            cfg.glmb_birth.entries.push_back(entry);
            cfg.rmb_birth.entries.push_back(entry);
        }
    } else if (m.state_dim() == 4) {
        // defaults were built for the 5-dim turn model; rebuild for cv
        cfg.glmb_birth.entries.clear();
        cfg.rmb_birth.entries.clear();
        const double sites4[4][2] = {{0, 800}, {-700, -300}, {700, -300}, {-300, 300}};
        for (const auto& s : sites4) {
            BirthEntry entry;
            entry.r = birth_r;
            entry.cls = ClassLabel::Target;
            entry.density = birth_site_density(s[0], s[1], 4, std_pos, std_vel, std_omega);
            cfg.glmb_birth.entries.push_back(entry);
            cfg.rmb_birth.entries.push_back(entry);
        }
    }
    for (int i = 0; i < n_spray; ++i) {
        BirthEntry spray;
        spray.r = spray_r;
        spray.cls = ClassLabel::Clutter;
        spray.uniform_over_region = true;
        cfg.rmb_birth.entries.push_back(spray);
    }
    if (cfg.rmb_birth.entries.empty() && !cfg.fixed_clutter)
        throw DataError(path.string() + ": no birth entries configured");

    cfg.glmb.k_update = static_cast<int>(kv.integer("glmb.k_update", cfg.glmb.k_update));
    cfg.glmb.k_predict = static_cast<int>(kv.integer("glmb.k_predict", cfg.glmb.k_predict));
    cfg.glmb.h_max = static_cast<int>(kv.integer("glmb.h_max", cfg.glmb.h_max));
    cfg.glmb.w_prune = kv.number("glmb.w_prune", cfg.glmb.w_prune);
    cfg.glmb.gm_max_terms =
        static_cast<int>(kv.integer("glmb.gm_max_terms", cfg.glmb.gm_max_terms));
    cfg.glmb.gm_prune = kv.number("glmb.gm_prune", cfg.glmb.gm_prune);

    kv.finish();
    return cfg;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    KvReader kv(path, parse_kv_file(path));
    ScenarioSpec spec;
    spec.duration = static_cast<int>(kv.integer("duration", spec.duration));
    spec.seed = static_cast<std::uint64_t>(kv.integer("seed", 0));
    spec.sensor = parse_sensor(kv.text("sensor.kind", "bearing-range"), path);
    read_region(kv, spec.region);
    spec.ct.T = kv.number("motion.T", spec.ct.T);
    spec.ct.sigma_w = kv.number("motion.sigma_w", spec.ct.sigma_w);
    spec.ct.sigma_omega = kv.number("motion.sigma_omega", spec.ct.sigma_omega);
    spec.bearing_range.sigma_theta =
        kv.number("sensor.sigma_theta", spec.bearing_range.sigma_theta);
    spec.bearing_range.sigma_r = kv.number("sensor.sigma_r", spec.bearing_range.sigma_r);
    {
        Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
        const double sx = kv.number("sensor.sigma_x", 5.0);
        const double sy = kv.number("sensor.sigma_y", 5.0);
        sigma(0, 0) = sx * sx;
        sigma(1, 1) = sy * sy;
        spec.linear = make_linear_position_model(5, sigma);
    }
    spec.p_d = kv.number("detection.p_d", spec.p_d);

    if (kv.has("clutter.rate")) {
        spec.clutter_steps = {{1, kv.number("clutter.rate", 10.0)}};
    } else {
        std::vector<std::pair<int, double>> steps;
        for (int i = 1;; ++i) {
            const std::string base = "clutter.step." + std::to_string(i);
            if (!kv.has(base + ".frame")) break;
            steps.emplace_back(static_cast<int>(kv.integer(base + ".frame", 1)),
                               kv.number(base + ".rate", 0.0));
        }
        if (!steps.empty()) {
            std::sort(steps.begin(), steps.end());
            spec.clutter_steps = std::move(steps);
        }
    }

    for (int i = 1;; ++i) {
        const std::string base = "target." + std::to_string(i);
        if (!kv.has(base + ".birth")) break;
        TargetScript t;
        t.birth = static_cast<int>(kv.integer(base + ".birth", 1));
        t.death = static_cast<int>(kv.integer(base + ".death", spec.duration + 1));
        t.x0 = KinematicState::Zero(5);
        t.x0 << kv.number(base + ".x", 0.0), kv.number(base + ".vx", 0.0),
            kv.number(base + ".y", 0.0), kv.number(base + ".vy", 0.0),
            kv.number(base + ".omega", 0.0);
        spec.targets.push_back(std::move(t));
    }
    kv.finish();
    spec.validate();
    return spec;
}

std::string config_fingerprint(const std::vector<KvEntry>& entries) {
    std::vector<std::string> lines;
    for (const auto& e : entries) lines.push_back(e.key + "=" + e.value);
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& l : lines)
        for (unsigned char c : l) {
            h ^= c;
            h *= 1099511628211ull;
        }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void write_run_manifest(const std::filesystem::path& path, const std::string& config_hash,
                        std::uint64_t seed, const std::optional<double>& fixed_clutter,
                        const std::vector<std::pair<std::string, std::string>>& outputs) {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    if (fixed_clutter)
        j["fixed_clutter"] = *fixed_clutter;
    else
        j["fixed_clutter"] = nullptr;
    for (const auto& [k, v] : outputs) j["outputs"][k] = v;
    AtomicWriter w(path);
    w.stream() << j.dump(2) << "\n";
    w.commit();
}

}  // namespace bglmb::io
