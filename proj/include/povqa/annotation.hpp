#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "povqa/canonical_json.hpp"

namespace povqa {

// The six annotation tracks every video timeline carries.  Self = the POV
// player, Other = any other agent, World = scene-level objects and events.
enum class EntityKind { SA, SS, OA, OS, WO, WE };

inline constexpr std::array<EntityKind, 6> kAllKinds = {
    EntityKind::SA, EntityKind::SS, EntityKind::OA,
    EntityKind::OS, EntityKind::WO, EntityKind::WE};

std::string to_string(EntityKind k);
std::optional<EntityKind> parse_kind(std::string_view s);

struct TimeInterval {
    double start_s = 0.0;
    double end_s = 0.0;

    double length() const { return end_s - start_s; }
    double midpoint() const { return 0.5 * (start_s + end_s); }
    TimeInterval shifted(double dt) const { return {start_s + dt, end_s + dt}; }
    bool operator==(const TimeInterval&) const = default;
};

// Overlap length of two intervals, 0 when disjoint or merely touching.
double interval_overlap(const TimeInterval& a, const TimeInterval& b);

// Gap between two disjoint intervals (0 when they overlap or touch).
double interval_gap(const TimeInterval& a, const TimeInterval& b);

// Labels shorter than this are treated as instants: window membership is
// decided by midpoint containment instead of overlap length.
inline constexpr double kPointEps = 0.2;

struct TrueLabel {
    std::string id;
    std::string video_id;
    EntityKind kind = EntityKind::SA;
    std::string caption;
    TimeInterval interval;
    std::optional<std::string> actor;       // required for OA/OS
    std::optional<int64_t> quantity;        // WO only
    std::optional<std::string> intent;      // SA/OA only
    std::vector<std::string> intent_distractors;
    std::optional<std::string> group_key;   // recurrence group; falls back to caption
};

struct DistractorLabel {
    std::string id;
    std::string video_id;
    EntityKind kind = EntityKind::SA;
    std::string caption;
    std::string subtype;                    // "lexical" | "scene"
    std::optional<TimeInterval> interval;   // required for lexical
    std::optional<std::string> source_label;
};

struct VideoMeta {
    std::string video_id;
    std::string game;
    double duration_s = 0.0;
    int64_t pov_index = 1;       // 1-based position within the sync group
    double sync_offset_s = 0.0;  // local t=0 on the shared clock
};

struct AnnotationInstance {
    std::string instance_id;
    bool synced = false;
    std::vector<VideoMeta> videos;
    std::vector<TrueLabel> true_labels;
    std::vector<DistractorLabel> distractor_labels;

    const VideoMeta* find_video(std::string_view video_id) const;
};

struct Violation {
    std::string path;
    std::string message;
};

// Malformed bytes / wrong JSON shape.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

// Structurally fine but invariant-breaking content (strict parse only).
struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<Violation> v);
    std::vector<Violation> violations;
};

struct ParseResult {
    AnnotationInstance instance;
    std::vector<std::string> warnings;  // unknown fields, ignored
};

// strict=true additionally runs validate_instance and throws ValidationError
// if anything is off.  strict=false only requires structural sanity.
ParseResult parse_instance(const std::string& bytes, bool strict = true);
AnnotationInstance instance_from_json(const json& doc, std::vector<std::string>* warnings = nullptr);

std::string serialize_instance(const AnnotationInstance& inst);
json instance_to_json(const AnnotationInstance& inst);

// Semantic invariants as data; ordered by (path, message).
std::vector<Violation> validate_instance(const AnnotationInstance& inst);

// Window membership for one label (window in the video's local clock):
// instants by midpoint containment, extended labels by overlap >= min_overlap.
bool label_in_window(const TrueLabel& label, const TimeInterval& window, double min_overlap);

// All labels of one kind on one video intersecting the window, ordered by
// (start_s, id).  Throws std::invalid_argument for an unknown video id.
std::vector<TrueLabel> labels_in_window(const AnnotationInstance& inst,
                                        std::string_view video_id, EntityKind kind,
                                        const TimeInterval& window, double min_overlap);

enum class DensityTimeMode { SumDurations, MaxPerSyncGroup };

struct KindStats {
    int64_t count = 0;
    double share = 0.0;
};

struct DensityStats {
    int64_t n_labels = 0;
    double total_seconds = 0.0;
    double rho = 0.0;  // labels per second
    std::map<EntityKind, KindStats> per_kind;
};

// rho = N_labels / T_seconds.  Throws std::domain_error when T is zero.
DensityStats decision_density(const AnnotationInstance& inst,
                              DensityTimeMode mode = DensityTimeMode::SumDurations);
DensityStats decision_density(const std::vector<AnnotationInstance>& corpus,
                              DensityTimeMode mode = DensityTimeMode::SumDurations);

// Per-kind counts and shares; all six kinds always present, shares sum to 1
// when any labels exist.
std::map<EntityKind, KindStats> label_distribution(const AnnotationInstance& inst);
std::map<EntityKind, KindStats> label_distribution(const std::vector<AnnotationInstance>& corpus);

struct SynthParams {
    std::string instance_id;  // default "synth-<seed>"
    int n_videos = 1;
    double duration_s = 60.0;
    std::map<EntityKind, int> per_kind_counts;            // true labels per video
    std::map<EntityKind, std::pair<int, int>> distractor_counts;  // (lexical, scene) per video
    double overlap_bias = 0.3;  // chance a label is pulled next to an earlier one
    uint64_t seed = 0;
    // knobs that make downstream question families reachable
    int count_group_size = 3;   // recurring same-caption segments for SA/OA/WE (0 = off)
    int intent_every = 3;       // every Nth SA/OA label carries intent + distractor intents
    int quantity_every = 3;     // every Nth WO label carries a quantity >= 2
};

// Deterministic in params; output always passes validate_instance.
// Throws std::invalid_argument when the request cannot fit the duration.
AnnotationInstance synth_instance(const SynthParams& params);

// Case-insensitive, whitespace-collapsed caption equality key.
std::string normalize_caption(std::string_view s);

// "[mm:ss to mm:ss]", start floored, end ceiled.
std::string format_timestamp(const TimeInterval& local);

}  // namespace povqa
