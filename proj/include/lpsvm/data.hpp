#pragma once

// Datasets of binned firing rates, cue schedules, CSV ingestion and the
// seeded synthetic generator used by the benchmark.

#include "lpsvm/csv.hpp"
#include "lpsvm/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lpsvm {

inline constexpr const char* kRestTag = "REST";

struct CueInterval {
    std::size_t start = 0;
    std::size_t end = 0; // exclusive
    std::string tag;

    std::size_t length() const { return end - start; }
    bool operator==(const CueInterval&) const = default;
};

/// Contiguous, sorted tiling of [0, length()) by tagged intervals.
class CueSchedule {
  public:
    CueSchedule() = default;

    explicit CueSchedule(std::vector<CueInterval> intervals) : intervals_(std::move(intervals)) {
        std::size_t expected = 0;
        for (std::size_t k = 0; k < intervals_.size(); ++k) {
            const auto& iv = intervals_[k];
            if (iv.start != expected)
                throw ConfigError("schedule interval " + std::to_string(k) + " starts at " + std::to_string(iv.start) +
                                  ", expected " + std::to_string(expected));
            if (iv.end <= iv.start) throw ConfigError("schedule interval " + std::to_string(k) + " is empty");
            if (iv.tag.empty()) throw ConfigError("schedule interval " + std::to_string(k) + " has an empty tag");
            expected = iv.end;
        }
    }

    const std::vector<CueInterval>& intervals() const { return intervals_; }
    std::size_t size() const { return intervals_.size(); }
    std::size_t length() const { return intervals_.empty() ? 0 : intervals_.back().end; }

    /// Positions (within intervals()) of the intervals carrying `tag`, in order.
    std::vector<std::size_t> positions_of(const std::string& tag) const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < intervals_.size(); ++k)
            if (intervals_[k].tag == tag) out.push_back(k);
        return out;
    }

    /// Distinct non-rest tags in order of first appearance.
    std::vector<std::string> movements() const {
        std::vector<std::string> out;
        for (const auto& iv : intervals_)
            if (iv.tag != kRestTag && std::find(out.begin(), out.end(), iv.tag) == out.end()) out.push_back(iv.tag);
        return out;
    }

    /// Restriction to bins [begin, end), re-based to start at 0.
    CueSchedule clip(std::size_t begin, std::size_t end) const {
        std::vector<CueInterval> out;
        for (const auto& iv : intervals_) {
            const auto s = std::max(iv.start, begin);
            const auto e = std::min(iv.end, end);
            if (s < e) out.push_back({s - begin, e - begin, iv.tag});
        }
        return CueSchedule(std::move(out));
    }

    bool operator==(const CueSchedule&) const = default;

  private:
    std::vector<CueInterval> intervals_;
};

/// n time-bins by m channels of firing rates with +-1 labels. Immutable once built.
class Dataset {
  public:
    Dataset(Matrix features, Vector labels, std::optional<CueSchedule> schedule = std::nullopt)
        : features_(std::move(features)), labels_(std::move(labels)), schedule_(std::move(schedule)) {
        if (features_.rows() < 1 || features_.cols() < 1) throw ConfigError("dataset needs at least one row and one channel");
        if (labels_.size() != features_.rows())
            throw ConfigError("label count " + std::to_string(labels_.size()) + " does not match row count " +
                              std::to_string(features_.rows()));
        for (Index i = 0; i < labels_.size(); ++i)
            if (labels_(i) != 1.0 && labels_(i) != -1.0) throw ConfigError("label at row " + std::to_string(i) + " is not +-1");
        if (!features_.allFinite()) throw ConfigError("features contain non-finite entries");
        if (schedule_ && schedule_->length() != static_cast<std::size_t>(features_.rows()))
            throw ConfigError("schedule covers " + std::to_string(schedule_->length()) + " bins but dataset has " +
                              std::to_string(features_.rows()));
    }

    Index rows() const { return features_.rows(); }
    Index channels() const { return features_.cols(); }
    const Matrix& features() const { return features_; }
    const Vector& labels() const { return labels_; }
    const std::optional<CueSchedule>& schedule() const { return schedule_; }

    /// Bins [begin, end) with the schedule clipped to match.
    Dataset slice(std::size_t begin, std::size_t end) const {
        if (begin >= end || end > static_cast<std::size_t>(rows())) throw ConfigError("invalid slice bounds");
        const auto len = static_cast<Index>(end - begin);
        std::optional<CueSchedule> sched;
        if (schedule_) sched = schedule_->clip(begin, end);
        return Dataset(features_.middleRows(static_cast<Index>(begin), len), labels_.segment(static_cast<Index>(begin), len),
                       std::move(sched));
    }

    Dataset with_schedule(CueSchedule schedule) const { return Dataset(features_, labels_, std::move(schedule)); }

  private:
    Matrix features_;
    Vector labels_;
    std::optional<CueSchedule> schedule_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline Dataset parse_dataset(std::istream& in, const std::optional<std::string>& label_name,
                             std::optional<std::size_t> label_index) {
    const auto lines = csv::read_lines(in);
    if (lines.empty()) throw Error("empty file");
    const auto header = csv::split_line(lines[0]);
    std::size_t label_col = header.size();
    if (label_index) {
        label_col = *label_index;
    } else {
        const auto it = std::find(header.begin(), header.end(), *label_name);
        if (it == header.end()) throw Error("label column '" + *label_name + "' not found in header");
        label_col = static_cast<std::size_t>(it - header.begin());
    }
    if (label_col >= header.size()) throw Error("label column index " + std::to_string(label_col) + " out of range");
    if (header.size() < 2) throw Error("need at least one feature column besides the label");
    if (lines.size() < 2) throw Error("empty file: header row but no data");

    const auto n = static_cast<Index>(lines.size() - 1);
    const auto m = static_cast<Index>(header.size() - 1);
    Matrix features(n, m);
    Vector labels(n);
    for (Index i = 0; i < n; ++i) {
        const auto line_no = std::to_string(i + 2);
        const auto fields = csv::split_line(lines[static_cast<std::size_t>(i) + 1]);
        if (fields.size() != header.size())
            throw Error("malformed row at line " + line_no + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        Index col = 0;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const auto v = csv::parse_double(fields[f]);
            if (!v || !std::isfinite(*v)) throw Error("malformed value '" + fields[f] + "' at line " + line_no);
            if (f == label_col) {
                if (*v != 1.0 && *v != -1.0) throw Error("invalid label at line " + line_no);
                labels(i) = *v;
            } else {
                features(i, col++) = *v;
            }
        }
    }
    return Dataset(std::move(features), std::move(labels));
}

} // namespace detail

inline Dataset read_csv(std::istream& in, const std::string& label_column = "label") {
    return detail::parse_dataset(in, label_column, std::nullopt);
}

inline Dataset read_csv(std::istream& in, std::size_t label_index) {
    return detail::parse_dataset(in, std::nullopt, label_index);
}

inline Dataset load_csv(const std::string& path, const std::string& label_column = "label") {
    auto in = csv::open_input(path);
    return read_csv(in, label_column);
}

inline Dataset load_csv(const std::string& path, std::size_t label_index) {
    auto in = csv::open_input(path);
    return read_csv(in, label_index);
}

/// Header `ch0,...,ch{m-1},label`; values at 17 significant digits.
inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (Index j = 0; j < ds.channels(); ++j) out << "ch" << j << ',';
    out << "label\n";
    for (Index i = 0; i < ds.rows(); ++i) {
        for (Index j = 0; j < ds.channels(); ++j) out << csv::format_double(ds.features()(i, j)) << ',';
        out << (ds.labels()(i) > 0 ? "1" : "-1") << '\n';
    }
}

inline void save_csv(const std::string& path, const Dataset& ds) {
    auto out = csv::open_output(path);
    write_csv(out, ds);
}

inline CueSchedule read_schedule(std::istream& in) {
    const auto lines = csv::read_lines(in);
    if (lines.empty()) throw Error("empty schedule file");
    const auto header = csv::split_line(lines[0]);
    if (header != std::vector<std::string>{"start", "end_exclusive", "tag"})
        throw Error("schedule header must be 'start,end_exclusive,tag'");
    std::vector<CueInterval> intervals;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto fields = csv::split_line(lines[k]);
        const auto line_no = std::to_string(k + 1);
        if (fields.size() != 3) throw Error("malformed schedule row at line " + line_no);
        const auto s = csv::parse_int(fields[0]);
        const auto e = csv::parse_int(fields[1]);
        if (!s || !e || *s < 0 || *e < 0) throw Error("malformed schedule bounds at line " + line_no);
        intervals.push_back({static_cast<std::size_t>(*s), static_cast<std::size_t>(*e), fields[2]});
    }
    return CueSchedule(std::move(intervals));
}

inline CueSchedule load_schedule(const std::string& path) {
    auto in = csv::open_input(path);
    return read_schedule(in);
}

inline void write_schedule(std::ostream& out, const CueSchedule& schedule) {
    out << "start,end_exclusive,tag\n";
    for (const auto& iv : schedule.intervals()) out << iv.start << ',' << iv.end << ',' << iv.tag << '\n';
}

inline void save_schedule(const std::string& path, const CueSchedule& schedule) {
    auto out = csv::open_output(path);
    write_schedule(out, schedule);
}

// ---------------------------------------------------------------------------
// Synthetic cue-structured firing rates

/// Name recorded in generator metadata. Uniforms are the top 53 bits of
/// mt19937_64; normals come from the Box-Muller transform, both outputs used.
inline constexpr const char* kGeneratorName = "mt19937_64+box-muller";

class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

  private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

struct SyntheticSpec {
    std::size_t channels = 96;
    std::vector<std::size_t> active_channels;
    double baseline_rate = 10.0;
    double active_rate = 25.0;
    double noise_scale = 4.0;
    CueSchedule schedule;
    std::uint64_t seed = 0;
    /// Movement whose intervals drive the active channels; empty means first movement in the schedule.
    std::string target;

    std::string target_movement() const {
        if (!target.empty()) return target;
        const auto mv = schedule.movements();
        if (mv.empty()) throw ConfigError("schedule has no movement intervals");
        return mv.front();
    }

    void validate() const {
        if (channels < 1) throw ConfigError("channels must be >= 1");
        std::set<std::size_t> seen;
        for (auto c : active_channels) {
            if (c >= channels) throw ConfigError("active channel " + std::to_string(c) + " out of range");
            if (!seen.insert(c).second) throw ConfigError("active channel " + std::to_string(c) + " listed twice");
        }
        if (!(active_rate > baseline_rate)) throw ConfigError("active_rate must exceed baseline_rate");
        if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw ConfigError("noise_scale must be >= 0");
        if (schedule.size() == 0) throw ConfigError("schedule is empty");
        if (schedule.positions_of(target_movement()).empty())
            throw ConfigError("target movement '" + target_movement() + "' absent from schedule");
    }
};

struct SyntheticData {
    Dataset dataset;
    std::vector<std::size_t> ground_truth; // sorted
};

/// Rates are Gaussian around baseline_rate or active_rate with sd noise_scale,
/// clamped at 0. Active channels fire at active_rate inside target-movement
/// intervals only. Draws are consumed row-major, one per (bin, channel).
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto target = spec.target_movement();
    const auto n = static_cast<Index>(spec.schedule.length());
    const auto m = static_cast<Index>(spec.channels);
    std::vector<bool> active(spec.channels, false);
    for (auto c : spec.active_channels) active[c] = true;

    Matrix features(n, m);
    Vector labels(n);
    NormalStream noise(spec.seed);
    for (const auto& iv : spec.schedule.intervals()) {
        const bool cue = iv.tag == target;
        for (auto i = static_cast<Index>(iv.start); i < static_cast<Index>(iv.end); ++i) {
            labels(i) = cue ? 1.0 : -1.0;
            for (Index j = 0; j < m; ++j) {
                const double mean = (cue && active[static_cast<std::size_t>(j)]) ? spec.active_rate : spec.baseline_rate;
                features(i, j) = std::max(0.0, mean + spec.noise_scale * noise.next());
            }
        }
    }
    auto truth = spec.active_channels;
    std::sort(truth.begin(), truth.end());
    return {Dataset(std::move(features), std::move(labels), spec.schedule), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Relabeling, splitting, augmentation

/// +1 on bins of intervals tagged `movement`; rest and all other movements become -1.
inline Dataset relabel_one_vs_rest(const Dataset& ds, const std::string& movement) {
    if (!ds.schedule()) throw ConfigError("dataset has no cue schedule");
    const auto& sched = *ds.schedule();
    if (sched.positions_of(movement).empty()) throw ConfigError("movement '" + movement + "' absent from schedule");
    Vector labels = Vector::Constant(ds.rows(), -1.0);
    for (const auto& iv : sched.intervals())
        if (iv.tag == movement) labels.segment(static_cast<Index>(iv.start), static_cast<Index>(iv.length())).setOnes();
    return Dataset(ds.features(), std::move(labels), sched);
}

struct TrainTestSplit {
    Dataset train;
    Dataset test;
    std::size_t split_index;
};

/// Training keeps everything before the (train_cues+1)-th `movement` interval;
/// the test part runs from that interval's start to the end.
inline TrainTestSplit split_by_cues(const Dataset& ds, const std::string& movement, std::size_t train_cues) {
    if (!ds.schedule()) throw ConfigError("dataset has no cue schedule");
    if (train_cues < 1) throw ConfigError("train_cues must be >= 1");
    const auto pos = ds.schedule()->positions_of(movement);
    if (pos.size() <= train_cues)
        throw ConfigError("movement '" + movement + "' has " + std::to_string(pos.size()) + " cue intervals; need more than " +
                          std::to_string(train_cues));
    const auto s = ds.schedule()->intervals()[pos[train_cues]].start;
    const auto n = static_cast<std::size_t>(ds.rows());
    return {ds.slice(0, s), ds.slice(s, n), s};
}

/// H = D[A, -e]: row i is d_i * (x_i, -1).
inline Matrix build_augmented(const Dataset& ds) {
    const auto n = ds.rows();
    const auto m = ds.channels();
    Matrix h(n, m + 1);
    h.leftCols(m) = ds.labels().asDiagonal() * ds.features();
    h.col(m) = -ds.labels();
    return h;
}

/// Per-channel z-score fitted on one dataset and applied to others. Weights
/// fitted on standardized features are in z units, not spikes/sec. Constant
/// channels are only centered.
struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Dataset& ds) {
        Standardizer z{ds.features().colwise().mean().transpose(), Vector::Ones(ds.channels())};
        const double denom = static_cast<double>(std::max<Index>(ds.rows() - 1, 1));
        for (Index j = 0; j < ds.channels(); ++j) {
            const double sd = std::sqrt((ds.features().col(j).array() - z.mean(j)).square().sum() / denom);
            if (sd > 0.0) z.scale(j) = sd;
        }
        return z;
    }

    Dataset apply(const Dataset& ds) const {
        if (ds.channels() != mean.size()) throw ConfigError("standardizer channel count does not match dataset");
        Matrix f = (ds.features().rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
        return Dataset(std::move(f), ds.labels(), ds.schedule());
    }
};

inline Dataset standardize(const Dataset& ds) { return Standardizer::fit(ds).apply(ds); }

} // namespace lpsvm
