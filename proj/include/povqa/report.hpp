#pragma once

#include <map>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"
#include "povqa/eval.hpp"
#include "povqa/generator.hpp"

namespace povqa::report {

using eval::EvalRecord;
using gen::QuestionItem;

inline const std::vector<std::string> kFacetNames = {
    "code", "category", "level", "entity", "game", "distractor_subtype",
    "video_length_bucket", "n_videos", "condition"};

bool is_facet(const std::string& name);

struct ScoreSummary {
    int64_t n = 0;
    int64_t n_correct = 0;
    double accuracy = 0.0;
    std::map<std::string, bool> per_question;  // question_id -> correct
};

// Mean correctness; throws std::invalid_argument on duplicate
// (question_id, model_id, condition) keys.
ScoreSummary score_records(const std::vector<EvalRecord>& records);

struct FacetRow {
    std::string bucket;
    int64_t n = 0;
    int64_t n_correct = 0;
    double accuracy = 0.0;

    bool operator==(const FacetRow&) const = default;
};

struct FacetInputs {
    const std::map<std::string, QuestionItem>* items = nullptr;      // by id, required
    const std::map<std::string, VideoMeta>* videos = nullptr;        // for game/length facets
    bool entity_per_involved_kind = false;  // also count X2Y items under the ref kind
};

// Bucketed accuracy for one facet, deterministic bucket order.  Throws
// std::invalid_argument for an unknown facet, an unresolvable question_id, or
// a facet that needs video metadata when none was given.
std::vector<FacetRow> facet_accuracy(const std::vector<EvalRecord>& records,
                                     const FacetInputs& in, const std::string& facet);

struct Report {
    std::string model_id;
    int64_t n = 0;
    int64_t n_correct = 0;
    double overall = 0.0;
    std::vector<std::pair<std::string, std::vector<FacetRow>>> facets;  // stable order
};

Report build_report(const std::vector<EvalRecord>& records, const FacetInputs& in,
                    const std::vector<std::string>& facets);

enum class ReportFormat { Structured, Tabular, Human };
ReportFormat parse_format(const std::string& name);  // throws std::invalid_argument

// Structured: canonical JSON document.  Tabular: TSV carrying exact integer
// counts (round-trippable).  Human: aligned summary, percentages to 1 decimal.
std::string emit_report(const Report& report, ReportFormat format);

// Inverse of the tabular emitter (accuracy recomputed from the counts).
Report parse_tabular(const std::string& text);

bool reports_equal(const Report& a, const Report& b);

}  // namespace povqa::report
