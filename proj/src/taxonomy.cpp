#include "povqa/taxonomy.hpp"

#include <algorithm>

namespace povqa::taxonomy {

std::string to_string(QuestionForm f) {
    switch (f) {
        case QuestionForm::Ident: return "IDENT";
        case QuestionForm::Exist: return "EXIST";
        case QuestionForm::Absent: return "ABSENT";
        case QuestionForm::Count: return "COUNT";
        case QuestionForm::Intent: return "INTENT";
        case QuestionForm::Time: return "TIME";
        case QuestionForm::Order: return "ORDER";
        case QuestionForm::PovId: return "POV-ID";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(std::string_view raw, const std::string& why) {
    throw CodeError("bad question code '" + std::string(raw) + "': " + why);
}

std::optional<QuestionForm> simple_form(std::string_view s) {
    if (s == "IDENT") return QuestionForm::Ident;
    if (s == "EXIST") return QuestionForm::Exist;
    if (s == "ABSENT") return QuestionForm::Absent;
    if (s == "COUNT") return QuestionForm::Count;
    if (s == "INTENT") return QuestionForm::Intent;
    if (s == "TIME") return QuestionForm::Time;
    return std::nullopt;
}

}  // namespace

QuestionCode parse_code(std::string_view raw) {
    QuestionCode c;
    c.raw = std::string(raw);
    std::string_view s = raw;

    if (s.substr(0, 3) == "V1-") {
        auto mid = s.find("2V2-");
        if (mid == std::string_view::npos) fail(raw, "cross-video codes need the 2V2 separator");
        auto rk = parse_kind(s.substr(3, mid - 3));
        if (!rk) fail(raw, "unknown reference kind");
        std::string_view rest = s.substr(mid + 4);
        auto dash = rest.find('-');
        if (dash == std::string_view::npos) fail(raw, "missing form");
        auto ak = parse_kind(rest.substr(0, dash));
        if (!ak) fail(raw, "unknown answer kind");
        std::string_view form = rest.substr(dash + 1);
        if (form == "IDENT") c.form = QuestionForm::Ident;
        else if (form == "EXIST") c.form = QuestionForm::Exist;
        else fail(raw, "cross-video codes take IDENT or EXIST");
        c.ref_entity = *rk;
        c.ans_entity = *ak;
        c.multi_video = true;
        c.level = 3;
        return c;
    }

    auto ends_with = [&](std::string_view suf) {
        return s.size() >= suf.size() && s.substr(s.size() - suf.size()) == suf;
    };

    if (ends_with("-POV-ID")) {
        auto k = parse_kind(s.substr(0, s.size() - 7));
        if (!k) fail(raw, "unknown entity kind");
        c.form = QuestionForm::PovId;
        c.ans_entity = *k;
        c.multi_video = true;
        c.level = 3;
        return c;
    }

    if (ends_with("-ORDER") || ends_with("-ORDER-MV")) {
        bool mv = ends_with("-ORDER-MV");
        std::string_view head = s.substr(0, s.size() - (mv ? 9 : 6));
        if (head == "MIX") {
            c.ans_mix = true;
        } else {
            auto k = parse_kind(head);
            if (!k || (*k != EntityKind::SA && *k != EntityKind::OA))
                fail(raw, "ordering covers SA, OA or MIX");
            c.ans_entity = *k;
        }
        c.form = QuestionForm::Order;
        c.multi_video = mv;
        c.level = mv ? 3 : 2;
        return c;
    }

    if (auto two = s.find('2'); two != std::string_view::npos) {
        std::string_view ref = s.substr(0, two);
        std::string_view rest = s.substr(two + 1);
        auto dash = rest.find('-');
        if (dash == std::string_view::npos) fail(raw, "missing form");
        auto ak = parse_kind(rest.substr(0, dash));
        if (!ak) fail(raw, "unknown answer kind");
        std::string_view form = rest.substr(dash + 1);
        if (form == "IDENT") c.form = QuestionForm::Ident;
        else if (form == "EXIST") c.form = QuestionForm::Exist;
        else if (form == "ABSENT") c.form = QuestionForm::Absent;
        else fail(raw, "reference codes take IDENT, EXIST or ABSENT");
        if (ref == "TR") {
            c.ref_timestamp = true;
        } else {
            auto rk = parse_kind(ref);
            if (!rk) fail(raw, "unknown reference kind");
            if (*rk == *ak) fail(raw, "cross-entity codes need two different kinds");
            c.ref_entity = *rk;
        }
        c.ans_entity = *ak;
        c.level = 2;
        return c;
    }

    auto dash = s.find('-');
    if (dash == std::string_view::npos) fail(raw, "missing form");
    auto k = parse_kind(s.substr(0, dash));
    if (!k) fail(raw, "unknown entity kind");
    auto f = simple_form(s.substr(dash + 1));
    if (!f) fail(raw, "unknown form");
    c.ans_entity = *k;
    c.form = *f;
    switch (*f) {
        case QuestionForm::Ident:
        case QuestionForm::Exist:
            c.level = 1;
            break;
        case QuestionForm::Absent:
        case QuestionForm::Time:
            c.level = 2;
            break;
        case QuestionForm::Count:
            if (*k == EntityKind::SS || *k == EntityKind::OS)
                fail(raw, "counting covers SA, OA, WE or WO");
            c.level = *k == EntityKind::WO ? 1 : 2;
            break;
        case QuestionForm::Intent:
            if (*k != EntityKind::SA && *k != EntityKind::OA) fail(raw, "intent covers SA or OA");
            c.level = 2;
            break;
        default:
            fail(raw, "unknown form");
    }
    return c;
}

TaskCategory code_category(const QuestionCode& c) {
    if (c.multi_video) {
        if (c.form == QuestionForm::PovId) return {"POV Identification", 3};
        if (c.form == QuestionForm::Order) return {"Cross-Video Ordering", 3};
        return {"Sync-Referring", 3};
    }
    if (c.ref_timestamp) return {"Timestamp Referring", 2};
    if (c.ref_entity) return {"Cross-Entity Referring", 2};
    switch (c.form) {
        case QuestionForm::Time: return {"Time Localization", 2};
        case QuestionForm::Order: return {"Ordering", 2};
        case QuestionForm::Intent: return {"Intent Identification", 2};
        case QuestionForm::Absent: return {"Absence Recognition", 2};
        case QuestionForm::Count:
            return c.ans_entity == EntityKind::WO ? TaskCategory{"Static Object Count", 1}
                                                  : TaskCategory{"Occurrence Count", 2};
        default:
            break;
    }
    switch (*c.ans_entity) {
        case EntityKind::SA:
        case EntityKind::OA: return {"Action Recognition", 1};
        case EntityKind::SS:
        case EntityKind::OS: return {"State Recognition", 1};
        case EntityKind::WO: return {"Object Recognition", 1};
        case EntityKind::WE: return {"Event Recognition", 1};
    }
    return {"Action Recognition", 1};
}

std::vector<std::string> all_category_names() {
    return {"Action Recognition", "State Recognition",   "Object Recognition",
            "Event Recognition",  "Static Object Count", "Cross-Entity Referring",
            "Timestamp Referring", "Time Localization",  "Absence Recognition",
            "Occurrence Count",   "Ordering",            "Intent Identification",
            "Sync-Referring",     "Cross-Video Ordering", "POV Identification"};
}

// ---------------------------------------------------------------------------
// built-in stem templates

namespace {

// reference clause, single-video cross-entity
std::string ref_clause(EntityKind k) {
    switch (k) {
        case EntityKind::SA: return "When the POV player was performing the action: \"{refCaption}\"";
        case EntityKind::SS: return "When the POV player's \"{refCaption}\"";
        case EntityKind::OA: return "When {refOther} was performing the action: \"{refCaption}\"";
        case EntityKind::OS: return "When {refOther}'s \"{refCaption}\"";
        case EntityKind::WO: return "At the moment when the object \"{refCaption}\" appeared";
        case EntityKind::WE: return "At the moment when the event \"{refCaption}\" occurred";
    }
    return {};
}

// answer clause for referenced contexts; self_ref switches SA/SS answers to
// they/their when the reference already names the POV player
std::string ans_clause(EntityKind k, QuestionForm f, bool self_ref) {
    switch (f) {
        case QuestionForm::Ident:
            switch (k) {
                case EntityKind::SA:
                    return self_ref ? "which of the following actions did they perform?"
                                    : "which of the following actions did the POV player perform?";
                case EntityKind::SS:
                    return self_ref ? "which of the following best describes their state?"
                                    : "which of the following best describes the POV player's state?";
                case EntityKind::OA: return "which of the following actions did {other} perform?";
                case EntityKind::OS: return "which of the following best describes {other}'s state?";
                case EntityKind::WO: return "which of the following objects appeared?";
                case EntityKind::WE: return "which of the following events occurred?";
            }
            break;
        case QuestionForm::Exist:
            switch (k) {
                case EntityKind::SA:
                    return self_ref ? "did they perform the action: \"{caption}\"?"
                                    : "did the POV player perform the action: \"{caption}\"?";
                case EntityKind::SS:
                    return self_ref ? "can you describe their state as: \"{caption}\"?"
                                    : "can you describe the POV player's state as: \"{caption}\"?";
                case EntityKind::OA: return "did {other} perform the action: \"{caption}\"?";
                case EntityKind::OS: return "can you describe {other}'s state as: \"{caption}\"?";
                case EntityKind::WO: return "did the object \"{caption}\" appear?";
                case EntityKind::WE: return "did the event \"{caption}\" occur?";
            }
            break;
        case QuestionForm::Absent:
            switch (k) {
                case EntityKind::SA:
                    return self_ref ? "which action did they NOT perform?"
                                    : "which action did the POV player NOT perform?";
                case EntityKind::SS:
                    return self_ref ? "which of the following does NOT describe their state?"
                                    : "which of the following does NOT describe the POV player's state?";
                case EntityKind::OA: return "which action did {other} NOT perform?";
                case EntityKind::OS: return "which of the following does NOT describe {other}'s state?";
                case EntityKind::WO: return "which object did NOT appear?";
                case EntityKind::WE: return "which of the following events did NOT occur?";
            }
            break;
        default:
            break;
    }
    return {};
}

// reference clause, cross-video
std::string sync_ref_clause(EntityKind k) {
    switch (k) {
        case EntityKind::SA: return "When POV1 player was performing the action: \"{refCaption}\"";
        case EntityKind::SS: return "When POV1 player's \"{refCaption}\"";
        case EntityKind::OA: return "When {refOther} was performing the action: \"{refCaption}\" in POV1";
        case EntityKind::OS: return "When {refOther}'s \"{refCaption}\" in POV1";
        case EntityKind::WO: return "When the object \"{refCaption}\" appeared in POV1";
        case EntityKind::WE: return "At the moment when the event \"{refCaption}\" occurred in POV1";
    }
    return {};
}

std::string sync_ans_clause(EntityKind k, QuestionForm f) {
    if (f == QuestionForm::Ident) {
        switch (k) {
            case EntityKind::SA:
                return "which of the following actions did POV2 player perform at the same time?";
            case EntityKind::SS:
                return "which of the following best describes POV2 player's state at the same time?";
            case EntityKind::OA:
                return "which of the following actions did {other} perform in POV2 at the same time?";
            case EntityKind::OS:
                return "which of the following best describes {other}'s state in POV2 at the same time?";
            case EntityKind::WO:
                return "which of the following objects appeared in POV2 at the same time?";
            case EntityKind::WE:
                return "which of the following events occurred in POV2 at the same time?";
        }
    } else {
        switch (k) {
            case EntityKind::SA:
                return "did POV2 player perform the action: \"{caption}\" at the same time?";
            case EntityKind::SS: return "was POV2 player's \"{caption}\" at the same time?";
            case EntityKind::OA:
                return "did {other} perform the action: \"{caption}\" in POV2 at the same time?";
            case EntityKind::OS: return "was {other}'s \"{caption}\" in POV2 at the same time?";
            case EntityKind::WO: return "did the object \"{caption}\" appear in POV2 at the same time?";
            case EntityKind::WE: return "did the event \"{caption}\" occur in POV2 at the same time?";
        }
    }
    return {};
}

std::map<std::string, std::string> build_builtin() {
    std::map<std::string, std::string> m;

    // --- single-video, whole-clip stems
    m["SA-IDENT"] = "Which of the following actions did the POV player perform during the video?";
    m["SS-IDENT"] = "Which of the following best describes the POV player's state in the video?";
    m["OA-IDENT"] = "Which of the following actions did {other} perform during the video?";
    m["OS-IDENT"] = "Which of the following best describes {other}'s state in the video?";
    m["WO-IDENT"] = "Which of the following objects appeared in the video?";
    m["WE-IDENT"] = "Which of the following event occurred in the video?";

    m["SA-EXIST"] = "Did the POV player perform the action: \"{caption}\"?";
    m["SS-EXIST"] = "Can you describe the POV player's state as: \"{caption}\"?";
    m["OA-EXIST"] = "Did the {other} perform the action: \"{caption}\"?";
    m["OS-EXIST"] = "Can you describe the {other}'s state as: \"{caption}\"?";
    m["WO-EXIST"] = "Did the object \"{caption}\" appear in the video?";
    m["WE-EXIST"] = "Did the event \"{caption}\" occur in the video?";

    m["SA-ABSENT"] = "Which action did the POV player NOT perform?";
    m["SS-ABSENT"] = "Which of the following states does not describe the POV player's state?";
    m["OA-ABSENT"] = "Which action did the {other} NOT perform?";
    m["OS-ABSENT"] = "Which of the following does not describe the {other}'s state?";
    m["WO-ABSENT"] = "Which objects is NOT present in the scene?";
    m["WE-ABSENT"] = "Which of the following events did NOT occur in the video?";

    m["SA-COUNT"] = "How many times did the POV player perform the action: \"{caption}\"?";
    m["OA-COUNT"] = "How many times did the {other} perform the action: \"{caption}\"?";
    m["WO-COUNT"] = "How many {caption} are there in the scene?";
    m["WE-COUNT"] = "How many times did the event \"{caption}\" occur in the video?";

    m["SA-INTENT"] = "Why did the POV player perform the action: \"{caption}\"?";
    m["OA-INTENT"] = "Why did the {other} perform the action: \"{caption}\"?";

    m["SA-TIME"] = "At what time did the POV player perform the action: \"{caption}\"?";
    m["SS-TIME"] = "At what time was the POV player's \"{caption}\"?";
    m["OA-TIME"] = "At what time did {other} perform the action: \"{caption}\"?";
    m["OS-TIME"] = "At what time was {other}'s \"{caption}\"?";
    m["WO-TIME"] = "At what time did the object \"{caption}\" appear?";
    m["WE-TIME"] = "At what time did the event \"{caption}\" occur?";

    m["SA-ORDER"] = "Which of the following actions happened first?";
    m["OA-ORDER"] = "Which of the following actions happened first?";
    m["MIX-ORDER"] = "Which of the following happened first?";
    m["SA-ORDER-MV"] = m["SA-ORDER"];
    m["OA-ORDER-MV"] = m["OA-ORDER"];
    m["MIX-ORDER-MV"] = m["MIX-ORDER"];

    m["SA-POV-ID"] = "Which video corresponds to the player who performed the action: \"{caption}\"?";
    m["SS-POV-ID"] = "Which video corresponds to the player whose \"{caption}\"?";
    m["OA-POV-ID"] = "Which video shows {other} performing the action: \"{caption}\"?";
    m["OS-POV-ID"] = "Which video shows {other} whose \"{caption}\"?";
    m["WO-POV-ID"] = "Which video shows the object \"{caption}\"?";
    m["WE-POV-ID"] = "Which video shows the event \"{caption}\"?";

    // --- cross-entity referring, all 30 ordered pairs
    for (EntityKind rk : kAllKinds) {
        bool self_ref = rk == EntityKind::SA || rk == EntityKind::SS;
        for (EntityKind ak : kAllKinds) {
            if (rk == ak) continue;
            for (QuestionForm f : {QuestionForm::Ident, QuestionForm::Exist, QuestionForm::Absent}) {
                std::string code = to_string(rk) + "2" + to_string(ak) + "-" + to_string(f);
                m[code] = ref_clause(rk) + ", " + ans_clause(ak, f, self_ref);
            }
        }
    }

    // --- timestamp referring
    for (EntityKind ak : kAllKinds)
        for (QuestionForm f : {QuestionForm::Ident, QuestionForm::Exist, QuestionForm::Absent}) {
            std::string code = "TR2" + to_string(ak) + "-" + to_string(f);
            m[code] = "During {timestamp}, " + ans_clause(ak, f, false);
        }

    // --- cross-video referring, all 36 ordered pairs
    for (EntityKind rk : kAllKinds)
        for (EntityKind ak : kAllKinds)
            for (QuestionForm f : {QuestionForm::Ident, QuestionForm::Exist}) {
                std::string code =
                    "V1-" + to_string(rk) + "2V2-" + to_string(ak) + "-" + to_string(f);
                m[code] = sync_ref_clause(rk) + ", " + sync_ans_clause(ak, f);
            }

    return m;
}

}  // namespace

const TemplateRegistry& TemplateRegistry::builtin() {
    static TemplateRegistry reg = [] {
        TemplateRegistry r;
        r.stems_ = build_builtin();
        return r;
    }();
    return reg;
}

TemplateRegistry TemplateRegistry::with_overrides(
    const std::map<std::string, std::string>& overrides) const {
    TemplateRegistry r = *this;
    for (const auto& [code, stem] : overrides) {
        parse_code(code);  // reject keys outside the grammar
        r.stems_[code] = stem;
    }
    return r;
}

bool TemplateRegistry::has(const std::string& code_raw) const { return stems_.count(code_raw) > 0; }

const std::string& TemplateRegistry::stem_template(const std::string& code_raw) const {
    auto it = stems_.find(code_raw);
    if (it == stems_.end()) throw CodeError("no stem template for code '" + code_raw + "'");
    return it->second;
}

std::vector<std::string> TemplateRegistry::all_codes() const {
    std::vector<std::string> out;
    out.reserve(stems_.size());
    for (const auto& [k, v] : stems_) out.push_back(k);
    return out;
}

std::string render_stem(const QuestionCode& code, const StemSlots& slots,
                        const TemplateRegistry& reg) {
    const std::string& tpl = reg.stem_template(code.raw);
    std::string out;
    out.reserve(tpl.size() + 32);
    auto slot_value = [&](const std::string& name) -> const std::string& {
        const std::optional<std::string>* v = nullptr;
        if (name == "caption") v = &slots.caption;
        else if (name == "refCaption") v = &slots.ref_caption;
        else if (name == "other") v = &slots.other;
        else if (name == "refOther") v = &slots.ref_other;
        else if (name == "timestamp") v = &slots.timestamp;
        else throw RenderError("template for '" + code.raw + "' uses unknown placeholder {" + name + "}");
        if (!v->has_value())
            throw RenderError("stem for '" + code.raw + "' needs slot {" + name + "}");
        return **v;
    };
    for (size_t i = 0; i < tpl.size();) {
        if (tpl[i] == '{') {
            size_t close = tpl.find('}', i);
            if (close == std::string::npos) throw RenderError("unbalanced '{' in template for " + code.raw);
            out += slot_value(tpl.substr(i + 1, close - i - 1));
            i = close + 1;
        } else if (tpl.compare(i, 4, "POV1") == 0 || tpl.compare(i, 4, "POV2") == 0) {
            size_t which = tpl[i + 3] == '1' ? 0 : 1;
            if (slots.video_indices.size() < 2)
                throw RenderError("stem for '" + code.raw + "' needs two video indices");
            out += "POV" + std::to_string(slots.video_indices[which]);
            i += 4;
        } else {
            out += tpl[i++];
        }
    }
    return out;
}

}  // namespace povqa::taxonomy
