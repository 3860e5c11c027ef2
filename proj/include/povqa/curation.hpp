#pragma once

#include <string>
#include <vector>

#include "povqa/clients.hpp"
#include "povqa/generator.hpp"

namespace povqa::curation {

using client::ModelClient;
using gen::QuestionItem;

struct CurationConfig {
    int64_t target_n = 0;
    uint64_t seed = 0;
    int filter_k = 3;
    int remove_threshold = 3;  // correct-count that removes (defaults to filter_k)
    int review_threshold = 2;
    bool paraphrase_enabled = false;

    // enforces 1 <= review <= remove <= k; throws std::invalid_argument
    void validate() const;
};

struct FilterTrial {
    std::string extracted;  // letter or "X"
    bool correct = false;
};

struct FilterVerdict {
    std::string question_id;
    std::vector<FilterTrial> trials;
    std::string disposition;  // "keep" | "review" | "remove"
    double chance = 0.25;     // guessing baseline for this item's option count

    int n_correct() const;
};

json verdict_to_json(const FilterVerdict& v);
FilterVerdict verdict_from_json(const json& doc);

// Balanced per-code downsample: quota floor(target/#codes) per code via
// seeded shuffle, remainder round-robin to codes with leftovers in ascending
// kept-count order.  target >= |items| returns the input unchanged; otherwise
// output is sorted by id.
std::vector<QuestionItem> stratified_downsample(const std::vector<QuestionItem>& items,
                                                int64_t target_n, uint64_t seed);

// k text-only trials per item against the language-prior prompt; a trial that
// throws is recorded as "X".  Disposition by correct count: >= remove_threshold
// removes, >= review_threshold reviews, else keeps.
std::vector<FilterVerdict> blind_filter(const std::vector<QuestionItem>& items,
                                        ModelClient& client, const CurationConfig& cfg);

// Drops removed items (and reviewed ones when drop_review).  Items without a
// verdict pass through.
std::vector<QuestionItem> apply_filter(const std::vector<QuestionItem>& items,
                                       const std::vector<FilterVerdict>& verdicts,
                                       bool drop_review = false);

struct ParaphraseOutcome {
    std::vector<QuestionItem> items;
    int64_t changed = 0;
    int64_t rejected = 0;  // rewrite dropped a protected span; original kept
    int64_t failed = 0;    // client error; original kept
    std::vector<std::string> warnings;
};

// Stem-only rewrite pass.  A rewrite is accepted only if every quoted span
// and every timestamp token of the original stem survives verbatim; options,
// answer_index, code and window are never touched.
ParaphraseOutcome paraphrase(const std::vector<QuestionItem>& items, ModelClient& client,
                             uint64_t seed);

}  // namespace povqa::curation
