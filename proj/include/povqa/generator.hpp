#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"
#include "povqa/rng.hpp"
#include "povqa/taxonomy.hpp"

namespace povqa::gen {

using taxonomy::QuestionCode;
using taxonomy::QuestionForm;

// Wrong-option provenance tags.  lexical/scene come from the annotated
// distractor pools; temporal/role/cross_video re-use true labels against the
// context window; the rest are artifact-level (counts, orderings, videos,
// time windows, intent alternatives).
inline const std::vector<std::string> kSubtypeNames = {
    "lexical", "scene", "temporal", "role", "cross_video",
    "count_offset", "permutation", "video_index", "time_window", "intent"};

bool is_subtype(std::string_view name);

struct OptionEntry {
    std::string text;
    bool is_correct = false;
    std::string provenance;  // subtype name, "true_label", or "complement"
    std::vector<std::string> source_ids;
};

struct QuestionItem {
    std::string id;  // deterministic content hash
    std::string instance_id;
    std::vector<std::string> video_ids;
    std::string code;
    std::optional<TimeInterval> context_window;  // shared clock; windowed codes only
    std::string stem;
    std::vector<OptionEntry> options;
    int answer_index = 0;
    std::string variant;  // EXIST: "true" or the driving distractor subtype
    std::string seed_path;
};

json item_to_json(const QuestionItem& item);
QuestionItem item_from_json(const json& doc);

struct GenConfig {
    double min_overlap_s = 0.1;
    double temporal_margin_eps_s = 1.0;
    double order_gap_delta_s = 0.5;
    int options_per_question = 4;
    int64_t max_per_code = 0;  // 0 = unbounded
    uint64_t seed = 0;
    // wrong-option subtype preference per form; contexts drop what they can't
    // honor (temporal/role need a window, cross_video needs a second video)
    std::map<std::string, std::vector<std::string>> subtype_mix;
    const taxonomy::TemplateRegistry* templates = nullptr;  // null = builtin

    static GenConfig defaults();
    json to_json() const;  // margins/seed/mix only; used for manifests
    static GenConfig from_json(const json& doc);
};

// Generation context for one combination: the answer video, an optional
// shared-clock window with its provenance, and any designated sources chosen
// by the enumeration (rather than the combination rng).
struct Context {
    std::string video_id;
    std::optional<TimeInterval> window;          // shared clock
    std::optional<TimeInterval> display_window;  // local clock, for TR stems
    std::vector<std::string> anchor_ids;
    std::optional<std::string> ref_caption;
    std::optional<std::string> ref_actor;
    std::optional<std::string> ref_video_id;     // cross-video reference
    std::vector<int64_t> video_indices;          // [ref pov, ans pov]
    std::optional<std::string> answer_label_id;      // designated IDENT answer
    std::optional<std::string> answer_distractor_id; // designated ABSENT answer
    std::optional<std::string> source_hint_id;       // designated EXIST source
};

// Shared-clock window from a reference label; TR windows additionally round
// outward to whole seconds.
TimeInterval build_context_window(const TimeInterval& ref_local, const VideoMeta& video,
                                  bool round_to_seconds = false);

// All candidates of one subtype that satisfy its contract against the
// context, in deterministic (start, id) order.
std::vector<OptionEntry> distractor_pool(const AnnotationInstance& inst, const QuestionCode& code,
                                         const std::string& subtype, const Context& ctx,
                                         const GenConfig& cfg);

// k seeded picks of one subtype, texts pairwise distinct and distinct from
// the answer.  Empty optional = insufficient pool (combination is dropped,
// never padded).
std::optional<std::vector<OptionEntry>> select_distractors(
    const AnnotationInstance& inst, const QuestionCode& code, const std::string& subtype,
    const Context& ctx, const std::string& answer_text, int k, const GenConfig& cfg,
    SplitRng& rng);

std::optional<QuestionItem> instantiate_choice(const AnnotationInstance& inst,
                                               const QuestionCode& code, const Context& ctx,
                                               const GenConfig& cfg, SplitRng& rng);
std::optional<QuestionItem> instantiate_exist(const AnnotationInstance& inst,
                                              const QuestionCode& code, const std::string& variant,
                                              const Context& ctx, const GenConfig& cfg,
                                              SplitRng& rng);
std::optional<QuestionItem> gen_count(const AnnotationInstance& inst, const QuestionCode& code,
                                      const std::vector<std::string>& member_ids,
                                      const GenConfig& cfg, SplitRng& rng);
std::optional<QuestionItem> gen_intent(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& label_id, const GenConfig& cfg,
                                       SplitRng& rng);
std::optional<QuestionItem> gen_time_localization(const AnnotationInstance& inst,
                                                  const QuestionCode& code,
                                                  const std::string& label_id, const GenConfig& cfg,
                                                  SplitRng& rng);
std::optional<QuestionItem> gen_order(const AnnotationInstance& inst, const QuestionCode& code,
                                      const std::string& video_id,  // empty for -MV
                                      const GenConfig& cfg, SplitRng& rng);
std::optional<QuestionItem> gen_pov_id(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& norm_caption, const GenConfig& cfg,
                                       SplitRng& rng);

struct GenerationStats {
    struct CodeStats {
        int64_t enumerated = 0;
        int64_t emitted = 0;
        int64_t skipped = 0;
        std::map<std::string, int64_t> skip_reasons;
    };
    std::map<std::string, CodeStats> per_code;

    int64_t total_enumerated() const;
    int64_t total_emitted() const;
    int64_t total_skipped() const;
    json to_json() const;
};

struct GenerateResult {
    std::vector<QuestionItem> items;  // sorted by id
    GenerationStats stats;
};

// Enumerates every combination the registry's codes admit on this instance.
// Throws ValidationError when the instance fails validate_instance.
GenerateResult generate_all(const AnnotationInstance& inst, const GenConfig& cfg);

}  // namespace povqa::gen
