#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"

namespace povqa::taxonomy {

enum class QuestionForm { Ident, Exist, Absent, Count, Intent, Time, Order, PovId };

std::string to_string(QuestionForm f);

// Structured view of a question code string.  Grammar:
//   KIND-FORM                      simple, answer about one track
//   REF2ANS-FORM                   cross-entity reference (REF != ANS)
//   TR2ANS-FORM                    timestamp reference
//   V1-REF2V2-ANS-FORM             cross-video sync reference
//   KIND-POV-ID                    which-video identification
//   KIND-ORDER / MIX-ORDER [-MV]   ordering, single or multi video
struct QuestionCode {
    std::string raw;
    int level = 1;
    QuestionForm form = QuestionForm::Ident;
    std::optional<EntityKind> ref_entity;  // entity reference, when present
    bool ref_timestamp = false;            // TR reference
    std::optional<EntityKind> ans_entity;  // empty only for MIX order
    bool ans_mix = false;
    bool multi_video = false;

    bool windowed() const {  // carries a context window at generation time
        return ref_entity.has_value() || ref_timestamp || form == QuestionForm::Time;
    }
};

struct CodeError : std::runtime_error {
    explicit CodeError(const std::string& m) : std::runtime_error(m) {}
};

// Throws CodeError on anything outside the grammar (including TR at the wrong
// level or REF == ANS cross-entity pairs).
QuestionCode parse_code(std::string_view raw);

struct TaskCategory {
    std::string name;
    int level = 1;
};

// Total mapping onto the fifteen task categories.
TaskCategory code_category(const QuestionCode& code);
std::vector<std::string> all_category_names();

struct RenderError : std::runtime_error {
    explicit RenderError(const std::string& m) : std::runtime_error(m) {}
};

struct StemSlots {
    std::optional<std::string> caption;
    std::optional<std::string> ref_caption;
    std::optional<std::string> other;      // answer-side agent
    std::optional<std::string> ref_other;  // reference-side agent
    std::optional<std::string> timestamp;  // rendered "[mm:ss to mm:ss]"
    std::vector<int64_t> video_indices;    // [ref pov, ans pov] for V1/V2 codes
};

// Stem templates for every code, built-in wording plus optional per-code
// overrides from a config document.
class TemplateRegistry {
public:
    static const TemplateRegistry& builtin();
    TemplateRegistry with_overrides(const std::map<std::string, std::string>& overrides) const;

    bool has(const std::string& code_raw) const;
    const std::string& stem_template(const std::string& code_raw) const;  // throws CodeError
    std::vector<std::string> all_codes() const;  // sorted

private:
    std::map<std::string, std::string> stems_;
};

// Fills {caption} {refCaption} {other} {refOther} {timestamp} and the POV1/POV2
// tokens.  Throws RenderError naming the first unfilled placeholder.
std::string render_stem(const QuestionCode& code, const StemSlots& slots,
                        const TemplateRegistry& reg = TemplateRegistry::builtin());

}  // namespace povqa::taxonomy
