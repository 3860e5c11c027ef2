#include "povqa/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace povqa::gen {

namespace {

using taxonomy::StemSlots;
using taxonomy::TemplateRegistry;

constexpr double kTiny = 1e-9;

const TemplateRegistry& registry_of(const GenConfig& cfg) {
    return cfg.templates ? *cfg.templates : TemplateRegistry::builtin();
}

std::string join_ids(const std::vector<std::string>& ids, char sep = '+') {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

// Occurrence test (soundness): any positive overlap counts, instants by
// midpoint.  Looser than answer eligibility on purpose: a wrong option must
// not brush the window at all.
bool hits_window(const TimeInterval& iv, const TimeInterval& win) {
    if (iv.length() < kPointEps) {
        double m = iv.midpoint();
        return m >= win.start_s - kTiny && m <= win.end_s + kTiny;
    }
    return interval_overlap(iv, win) > kTiny;
}

TimeInterval to_local(const TimeInterval& shared, const VideoMeta& v) {
    return shared.shifted(-v.sync_offset_s);
}

TimeInterval whole_video(const VideoMeta& v) { return {0.0, v.duration_s}; }

// True if any same-kind true label with this normalized caption touches the
// window (nullptr window = anywhere on the video).
bool caption_occurs(const AnnotationInstance& inst, const std::string& video_id, EntityKind kind,
                    const std::string& norm, const TimeInterval* local_win) {
    for (const auto& t : inst.true_labels) {
        if (t.video_id != video_id || t.kind != kind) continue;
        if (normalize_caption(t.caption) != norm) continue;
        if (!local_win || hits_window(t.interval, *local_win)) return true;
    }
    return false;
}

std::vector<const TrueLabel*> kind_labels(const AnnotationInstance& inst,
                                          const std::string& video_id, EntityKind kind) {
    std::vector<const TrueLabel*> out;
    for (const auto& t : inst.true_labels)
        if (t.video_id == video_id && t.kind == kind) out.push_back(&t);
    std::sort(out.begin(), out.end(), [](const TrueLabel* a, const TrueLabel* b) {
        if (a->interval.start_s != b->interval.start_s)
            return a->interval.start_s < b->interval.start_s;
        return a->id < b->id;
    });
    return out;
}

const TrueLabel* find_true(const AnnotationInstance& inst, const std::string& id) {
    for (const auto& t : inst.true_labels)
        if (t.id == id) return &t;
    return nullptr;
}

const DistractorLabel* find_distractor(const AnnotationInstance& inst, const std::string& id) {
    for (const auto& d : inst.distractor_labels)
        if (d.id == id) return &d;
    return nullptr;
}

std::optional<EntityKind> role_swap(EntityKind k) {
    switch (k) {
        case EntityKind::SA: return EntityKind::OA;
        case EntityKind::OA: return EntityKind::SA;
        case EntityKind::SS: return EntityKind::OS;
        case EntityKind::OS: return EntityKind::SS;
        default: return std::nullopt;
    }
}

bool is_agent_kind(EntityKind k) { return k == EntityKind::OA || k == EntityKind::OS; }

// Agent phrase for {other}: explicit actor if we have one, else the video's
// most frequent annotated actor, else a generic fallback.
std::string resolve_other(const AnnotationInstance& inst, const std::string& video_id,
                          const std::optional<std::string>& direct) {
    if (direct && !direct->empty()) return *direct;
    std::map<std::string, int> freq;
    for (const auto& t : inst.true_labels)
        if (t.video_id == video_id && is_agent_kind(t.kind) && t.actor) ++freq[*t.actor];
    std::string best;
    int best_n = 0;
    for (const auto& [name, n] : freq)
        if (n > best_n) {  // map order makes ties lexicographic-first
            best = name;
            best_n = n;
        }
    return best.empty() ? std::string("other player") : best;
}

std::optional<std::string> distractor_actor(const AnnotationInstance& inst,
                                            const DistractorLabel& d) {
    if (d.source_label)
        if (const TrueLabel* src = find_true(inst, *d.source_label)) return src->actor;
    return std::nullopt;
}

// ---- seed-path derivation (shared by generate_all and the public ops) ----

std::string ctx_key(const Context& ctx) {
    std::string k = ctx.video_id;
    if (ctx.ref_video_id) k += "/refvid=" + *ctx.ref_video_id;
    if (!ctx.anchor_ids.empty()) k += "/ref=" + join_ids(ctx.anchor_ids);
    if (ctx.answer_label_id) k += "/ans=" + *ctx.answer_label_id;
    if (ctx.answer_distractor_id) k += "/dis=" + *ctx.answer_distractor_id;
    if (ctx.source_hint_id) k += "/src=" + *ctx.source_hint_id;
    return k;
}

std::string combo_path(const QuestionCode& code, const std::string& key) {
    return "gen/" + code.raw + "/" + key;
}

std::string item_id(const AnnotationInstance& inst, const QuestionCode& code,
                    const std::string& seed_path, const std::string& variant,
                    const GenConfig& cfg) {
    std::string material = inst.instance_id;
    material += '\x1f';
    material += code.raw;
    material += '\x1f';
    material += seed_path;
    material += '\x1f';
    material += variant;
    material += '\x1f';
    material += std::to_string(cfg.seed);
    return hex64(fnv1a64(material));
}

// Assemble, optionally shuffle, and locate the correct option.
QuestionItem assemble(const AnnotationInstance& inst, const QuestionCode& code,
                      const GenConfig& cfg, const std::string& seed_path,
                      const std::string& variant, std::vector<std::string> video_ids,
                      std::optional<TimeInterval> window, std::string stem,
                      std::vector<OptionEntry> options, SplitRng& rng, bool shuffle_options) {
    if (shuffle_options) rng.shuffle(options);
    QuestionItem item;
    item.id = item_id(inst, code, seed_path, variant, cfg);
    item.instance_id = inst.instance_id;
    item.video_ids = std::move(video_ids);
    item.code = code.raw;
    item.context_window = window;
    item.stem = std::move(stem);
    item.options = std::move(options);
    item.variant = variant;
    item.seed_path = seed_path;
    for (size_t i = 0; i < item.options.size(); ++i)
        if (item.options[i].is_correct) item.answer_index = static_cast<int>(i);
    return item;
}

StemSlots base_slots(const AnnotationInstance& inst, const Context& ctx) {
    StemSlots slots;
    slots.ref_caption = ctx.ref_caption;
    if (ctx.ref_caption) {
        const std::string& rv = ctx.ref_video_id ? *ctx.ref_video_id : ctx.video_id;
        slots.ref_other = resolve_other(inst, rv, ctx.ref_actor);
    }
    if (ctx.display_window) slots.timestamp = format_timestamp(*ctx.display_window);
    slots.video_indices = ctx.video_indices;
    return slots;
}

bool set_why(std::string* why, const char* reason) {
    if (why) *why = reason;
    return false;
}

// Round-robin across subtype pools, each pool independently shuffled; texts
// stay pairwise distinct (normalized) and distinct from the answer.
std::optional<std::vector<OptionEntry>> select_mixed(
    const AnnotationInstance& inst, const QuestionCode& code,
    const std::vector<std::string>& subtypes, const Context& ctx, const std::string& answer_text,
    int k, const GenConfig& cfg, SplitRng& rng) {
    std::vector<std::vector<OptionEntry>> pools;
    for (const auto& st : subtypes) {
        auto pool = distractor_pool(inst, code, st, ctx, cfg);
        rng.shuffle(pool);
        pools.push_back(std::move(pool));
    }
    std::set<std::string> used = {normalize_caption(answer_text)};
    std::vector<OptionEntry> picked;
    std::vector<size_t> cursor(pools.size(), 0);
    bool progressed = true;
    while (static_cast<int>(picked.size()) < k && progressed) {
        progressed = false;
        for (size_t p = 0; p < pools.size() && static_cast<int>(picked.size()) < k; ++p) {
            while (cursor[p] < pools[p].size()) {
                OptionEntry cand = pools[p][cursor[p]++];
                if (used.insert(normalize_caption(cand.text)).second) {
                    picked.push_back(std::move(cand));
                    progressed = true;
                    break;
                }
            }
        }
    }
    if (static_cast<int>(picked.size()) < k) return std::nullopt;
    return picked;
}

std::vector<std::string> admissible_subtypes(const QuestionCode& code, const Context& ctx,
                                             const GenConfig& cfg) {
    std::vector<std::string> base;
    auto it = cfg.subtype_mix.find(to_string(code.form));
    if (it != cfg.subtype_mix.end())
        base = it->second;
    else
        base = {"lexical", "scene", "temporal", "role", "cross_video"};
    std::vector<std::string> out;
    for (const auto& st : base) {
        if ((st == "temporal" || st == "role") && !ctx.window) continue;
        if (st == "role" && code.ans_entity && !role_swap(*code.ans_entity)) continue;
        if (st == "cross_video" && !ctx.ref_video_id) continue;
        out.push_back(st);
    }
    return out;
}

// ---- implementations with skip reasons (public ops discard the reason) ----

std::optional<QuestionItem> choice_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                        const Context& ctx, const GenConfig& cfg, SplitRng& rng,
                                        std::string* why) {
    const VideoMeta* meta = inst.find_video(ctx.video_id);
    if (!meta) throw std::invalid_argument("unknown video id: " + ctx.video_id);
    if (!code.ans_entity) throw std::invalid_argument("choice code without answer kind");
    const EntityKind ans = *code.ans_entity;
    const TimeInterval local_win =
        ctx.window ? to_local(*ctx.window, *meta) : whole_video(*meta);
    const std::string seed_path = combo_path(code, ctx_key(ctx));
    const TemplateRegistry& reg = registry_of(cfg);

    std::vector<std::string> video_ids =
        ctx.ref_video_id ? std::vector<std::string>{*ctx.ref_video_id, ctx.video_id}
                         : std::vector<std::string>{ctx.video_id};

    if (code.form == QuestionForm::Ident) {
        const TrueLabel* answer = nullptr;
        if (ctx.answer_label_id) {
            answer = find_true(inst, *ctx.answer_label_id);
            if (!answer || answer->video_id != ctx.video_id || answer->kind != ans ||
                !label_in_window(*answer, local_win, cfg.min_overlap_s)) {
                set_why(why, "unsound_source");
                return std::nullopt;
            }
        } else {
            auto pool = kind_labels(inst, ctx.video_id, ans);
            std::vector<const TrueLabel*> eligible;
            for (const TrueLabel* t : pool)
                if (label_in_window(*t, local_win, cfg.min_overlap_s)) eligible.push_back(t);
            if (eligible.empty()) {
                set_why(why, "no_answer_in_window");
                return std::nullopt;
            }
            answer = eligible[rng.below(eligible.size())];
        }
        auto wrongs = select_mixed(inst, code, admissible_subtypes(code, ctx, cfg), ctx,
                                   answer->caption, cfg.options_per_question - 1, cfg, rng);
        if (!wrongs) {
            set_why(why, "insufficient_distractors");
            return std::nullopt;
        }
        StemSlots slots = base_slots(inst, ctx);
        slots.caption = answer->caption;
        if (is_agent_kind(ans)) slots.other = resolve_other(inst, ctx.video_id, answer->actor);
        std::vector<OptionEntry> options;
        options.push_back({answer->caption, true, "true_label", {answer->id}});
        for (auto& w : *wrongs) options.push_back(std::move(w));
        return assemble(inst, code, cfg, seed_path, "", std::move(video_ids), ctx.window,
                        taxonomy::render_stem(code, slots, reg), std::move(options), rng, true);
    }

    if (code.form == QuestionForm::Absent) {
        // answer: a crafted caption that never touches the window
        const DistractorLabel* answer = nullptr;
        if (ctx.answer_distractor_id) {
            answer = find_distractor(inst, *ctx.answer_distractor_id);
            if (!answer || answer->video_id != ctx.video_id || answer->kind != ans ||
                caption_occurs(inst, ctx.video_id, ans, normalize_caption(answer->caption),
                               ctx.window ? &local_win : nullptr)) {
                set_why(why, "unsound_source");
                return std::nullopt;
            }
        } else {
            std::vector<OptionEntry> pool = distractor_pool(inst, code, "lexical", ctx, cfg);
            for (auto& e : distractor_pool(inst, code, "scene", ctx, cfg))
                pool.push_back(std::move(e));
            if (pool.empty()) {
                set_why(why, "pool_empty");
                return std::nullopt;
            }
            const OptionEntry& pick = pool[rng.below(pool.size())];
            answer = find_distractor(inst, pick.source_ids.front());
        }
        // wrong options: true captions that really did occur in the window
        auto pool = kind_labels(inst, ctx.video_id, ans);
        std::vector<const TrueLabel*> occurred;
        std::set<std::string> seen = {normalize_caption(answer->caption)};
        for (const TrueLabel* t : pool)
            if (label_in_window(*t, local_win, cfg.min_overlap_s) &&
                seen.insert(normalize_caption(t->caption)).second)
                occurred.push_back(t);
        if (static_cast<int>(occurred.size()) < cfg.options_per_question - 1) {
            set_why(why, "insufficient_wrong_options");
            return std::nullopt;
        }
        auto picked = rng.sample(occurred, static_cast<size_t>(cfg.options_per_question - 1));
        StemSlots slots = base_slots(inst, ctx);
        if (is_agent_kind(ans))
            slots.other = resolve_other(inst, ctx.video_id, distractor_actor(inst, *answer));
        std::vector<OptionEntry> options;
        options.push_back({answer->caption, true, answer->subtype, {answer->id}});
        for (const TrueLabel* t : picked)
            options.push_back({t->caption, false, "true_label", {t->id}});
        return assemble(inst, code, cfg, seed_path, "", std::move(video_ids), ctx.window,
                        taxonomy::render_stem(code, slots, reg), std::move(options), rng, true);
    }

    throw std::invalid_argument("instantiate_choice only handles IDENT/ABSENT codes");
}

std::optional<QuestionItem> exist_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& variant, const Context& ctx,
                                       const GenConfig& cfg, SplitRng& rng, std::string* why) {
    const VideoMeta* meta = inst.find_video(ctx.video_id);
    if (!meta) throw std::invalid_argument("unknown video id: " + ctx.video_id);
    if (code.form != QuestionForm::Exist)
        throw std::invalid_argument("instantiate_exist needs an EXIST code");
    if (variant != "true" && !is_subtype(variant))
        throw std::invalid_argument("unknown EXIST variant: " + variant);
    const EntityKind ans = *code.ans_entity;
    const TimeInterval local_win =
        ctx.window ? to_local(*ctx.window, *meta) : whole_video(*meta);
    const std::string seed_path = combo_path(code, ctx_key(ctx)) + "/" + variant;

    std::string caption;
    std::vector<std::string> source_ids;
    std::optional<std::string> actor_hint;
    if (variant == "true") {
        const TrueLabel* src = nullptr;
        if (ctx.source_hint_id) {
            src = find_true(inst, *ctx.source_hint_id);
            if (!src || src->video_id != ctx.video_id || src->kind != ans ||
                !label_in_window(*src, local_win, cfg.min_overlap_s)) {
                set_why(why, "unsound_source");
                return std::nullopt;
            }
        } else {
            auto pool = kind_labels(inst, ctx.video_id, ans);
            std::vector<const TrueLabel*> eligible;
            for (const TrueLabel* t : pool)
                if (label_in_window(*t, local_win, cfg.min_overlap_s)) eligible.push_back(t);
            if (eligible.empty()) {
                set_why(why, "pool_empty");
                return std::nullopt;
            }
            src = eligible[rng.below(eligible.size())];
        }
        caption = src->caption;
        source_ids = {src->id};
        actor_hint = src->actor;
    } else {
        auto pool = distractor_pool(inst, code, variant, ctx, cfg);
        const OptionEntry* pick = nullptr;
        if (ctx.source_hint_id) {
            for (const auto& e : pool)
                if (!e.source_ids.empty() && e.source_ids.front() == *ctx.source_hint_id)
                    pick = &e;
            if (!pick) {
                set_why(why, "unsound_source");
                return std::nullopt;
            }
        } else {
            if (pool.empty()) {
                set_why(why, "pool_empty");
                return std::nullopt;
            }
            pick = &pool[rng.below(pool.size())];
        }
        caption = pick->text;
        source_ids = pick->source_ids;
        if (variant == "lexical" || variant == "scene") {
            if (const DistractorLabel* d = find_distractor(inst, source_ids.front()))
                actor_hint = distractor_actor(inst, *d);
        } else if (variant == "temporal" || variant == "cross_video") {
            if (const TrueLabel* t = find_true(inst, source_ids.front())) actor_hint = t->actor;
        }
        // role swaps the agent, so the borrowed label's actor does not apply
    }

    StemSlots slots = base_slots(inst, ctx);
    slots.caption = caption;
    if (is_agent_kind(ans)) slots.other = resolve_other(inst, ctx.video_id, actor_hint);

    const bool yes = variant == "true";
    std::vector<OptionEntry> options(2);
    options[0] = {"Yes", yes, yes ? "true_label" : "complement",
                  yes ? source_ids : std::vector<std::string>{}};
    options[1] = {"No", !yes, yes ? "complement" : variant,
                  yes ? std::vector<std::string>{} : source_ids};
    std::vector<std::string> video_ids =
        ctx.ref_video_id ? std::vector<std::string>{*ctx.ref_video_id, ctx.video_id}
                         : std::vector<std::string>{ctx.video_id};
    return assemble(inst, code, cfg, seed_path, variant, std::move(video_ids), ctx.window,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, false);
}

std::optional<QuestionItem> count_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::vector<std::string>& member_ids,
                                       const GenConfig& cfg, SplitRng& rng, std::string* why) {
    if (code.form != QuestionForm::Count)
        throw std::invalid_argument("gen_count needs a COUNT code");
    if (member_ids.empty()) throw std::invalid_argument("gen_count needs at least one label id");
    const EntityKind ans = *code.ans_entity;
    std::vector<const TrueLabel*> members;
    for (const auto& id : member_ids) {
        const TrueLabel* t = find_true(inst, id);
        if (!t || t->kind != ans) {
            set_why(why, "unsound_source");
            return std::nullopt;
        }
        members.push_back(t);
    }
    const std::string& video_id = members.front()->video_id;
    for (const TrueLabel* m : members)
        if (m->video_id != video_id) {
            set_why(why, "unsound_source");
            return std::nullopt;
        }
    std::sort(members.begin(), members.end(), [](const TrueLabel* a, const TrueLabel* b) {
        if (a->interval.start_s != b->interval.start_s)
            return a->interval.start_s < b->interval.start_s;
        return a->id < b->id;
    });

    int64_t c = 0;
    if (ans == EntityKind::WO) {
        if (members.size() != 1 || !members.front()->quantity) {
            set_why(why, "unsound_source");
            return std::nullopt;
        }
        c = *members.front()->quantity;
    } else {
        // occurrence count: disjoint, same caption, nothing matching outside
        const std::string norm = normalize_caption(members.front()->caption);
        for (const TrueLabel* m : members)
            if (normalize_caption(m->caption) != norm) {
                set_why(why, "mixed_captions");
                return std::nullopt;
            }
        for (size_t i = 0; i + 1 < members.size(); ++i)
            if (interval_overlap(members[i]->interval, members[i + 1]->interval) > kTiny) {
                set_why(why, "overlapping_group");
                return std::nullopt;
            }
        std::set<std::string> in_group(member_ids.begin(), member_ids.end());
        for (const auto& t : inst.true_labels)
            if (t.video_id == video_id && t.kind == ans && !in_group.count(t.id) &&
                normalize_caption(t.caption) == norm) {
                set_why(why, "caption_outside_group");
                return std::nullopt;
            }
        c = static_cast<int64_t>(members.size());
    }

    // nearby counts first, never zero or negative
    std::vector<int64_t> wrong_counts;
    for (int64_t cand : {c - 1, c + 1, c - 2, c + 2, c + 3})
        if (cand >= 1 && static_cast<int>(wrong_counts.size()) < cfg.options_per_question - 1)
            wrong_counts.push_back(cand);
    if (static_cast<int>(wrong_counts.size()) < cfg.options_per_question - 1) {
        set_why(why, "insufficient_wrong_options");
        return std::nullopt;
    }

    const std::string seed_path = combo_path(code, video_id + "/count=" + join_ids(member_ids));
    StemSlots slots;
    slots.caption = members.front()->caption;
    if (is_agent_kind(ans))
        slots.other = resolve_other(inst, video_id, members.front()->actor);
    std::vector<OptionEntry> options;
    options.push_back({std::to_string(c), true, "true_label", member_ids});
    for (int64_t w : wrong_counts) options.push_back({std::to_string(w), false, "count_offset", {}});
    return assemble(inst, code, cfg, seed_path, "", {video_id}, std::nullopt,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, true);
}

std::optional<QuestionItem> intent_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                        const std::string& label_id, const GenConfig& cfg,
                                        SplitRng& rng, std::string* why) {
    if (code.form != QuestionForm::Intent)
        throw std::invalid_argument("gen_intent needs an INTENT code");
    const TrueLabel* label = find_true(inst, label_id);
    if (!label || label->kind != *code.ans_entity || !label->intent) {
        set_why(why, "unsound_source");
        return std::nullopt;
    }
    std::set<std::string> used = {normalize_caption(*label->intent)};
    std::vector<std::string> cands;
    for (const auto& alt : label->intent_distractors)
        if (used.insert(normalize_caption(alt)).second) cands.push_back(alt);
    rng.shuffle(cands);
    if (static_cast<int>(cands.size()) < cfg.options_per_question - 1) {
        set_why(why, "missing_intent_distractors");
        return std::nullopt;
    }
    cands.resize(static_cast<size_t>(cfg.options_per_question - 1));

    const std::string seed_path = combo_path(code, label->video_id + "/" + label->id);
    StemSlots slots;
    slots.caption = label->caption;
    if (is_agent_kind(label->kind))
        slots.other = resolve_other(inst, label->video_id, label->actor);
    std::vector<OptionEntry> options;
    options.push_back({*label->intent, true, "true_label", {label->id}});
    for (auto& alt : cands) options.push_back({std::move(alt), false, "intent", {label->id}});
    return assemble(inst, code, cfg, seed_path, "", {label->video_id}, std::nullopt,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, true);
}

std::optional<QuestionItem> time_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                      const std::string& label_id, const GenConfig& cfg,
                                      SplitRng& rng, std::string* why) {
    if (code.form != QuestionForm::Time)
        throw std::invalid_argument("gen_time_localization needs a TIME code");
    const TrueLabel* label = find_true(inst, label_id);
    if (!label || label->kind != *code.ans_entity) {
        set_why(why, "unsound_source");
        return std::nullopt;
    }
    const VideoMeta* meta = inst.find_video(label->video_id);
    const double fs = std::floor(label->interval.start_s);
    double ce = std::ceil(label->interval.end_s);
    if (ce <= fs) ce = fs + 1.0;
    const double w = ce - fs;
    const double max_start = std::floor(meta->duration_s - w);
    if (max_start < 0.0) {
        set_why(why, "no_decoy_room");
        return std::nullopt;
    }

    // decoys must dodge the answer window and every occurrence of the caption
    const std::string norm = normalize_caption(label->caption);
    std::vector<TimeInterval> occurrences;
    for (const auto& t : inst.true_labels)
        if (t.video_id == label->video_id && t.kind == label->kind &&
            normalize_caption(t.caption) == norm)
            occurrences.push_back(t.interval);

    std::vector<double> starts;
    for (double s = 0.0; s <= max_start + kTiny; s += 1.0) {
        if (s + w > fs + kTiny && s < ce - kTiny) continue;  // overlaps the answer
        bool ok = true;
        for (const auto& occ : occurrences)
            if (interval_gap({s, s + w}, occ) < cfg.temporal_margin_eps_s - kTiny) {
                ok = false;
                break;
            }
        if (ok) starts.push_back(s);
    }
    rng.shuffle(starts);
    std::vector<double> decoys;
    for (double s : starts) {
        bool clear = true;
        for (double t : decoys)
            if (std::abs(s - t) < w - kTiny) {
                clear = false;
                break;
            }
        if (clear) decoys.push_back(s);
        if (static_cast<int>(decoys.size()) == cfg.options_per_question - 1) break;
    }
    if (static_cast<int>(decoys.size()) < cfg.options_per_question - 1) {
        set_why(why, "no_decoy_room");
        return std::nullopt;
    }

    const std::string seed_path = combo_path(code, label->video_id + "/" + label->id);
    StemSlots slots;
    slots.caption = label->caption;
    if (is_agent_kind(label->kind))
        slots.other = resolve_other(inst, label->video_id, label->actor);
    std::vector<OptionEntry> options;
    options.push_back({format_timestamp(label->interval), true, "true_label", {label->id}});
    for (double s : decoys)
        options.push_back({format_timestamp({s, s + w}), false, "time_window", {}});
    TimeInterval shared = label->interval.shifted(meta->sync_offset_s);
    return assemble(inst, code, cfg, seed_path, "", {label->video_id}, shared,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, true);
}

struct OrderEvent {
    double start = 0.0;
    const TrueLabel* label = nullptr;
    const VideoMeta* video = nullptr;
};

std::optional<QuestionItem> order_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& video_id, const GenConfig& cfg,
                                       SplitRng& rng, std::string* why) {
    if (code.form != QuestionForm::Order)
        throw std::invalid_argument("gen_order needs an ORDER code");
    std::vector<EntityKind> kinds;
    if (code.ans_mix)
        kinds = {EntityKind::SA, EntityKind::OA, EntityKind::WE};
    else
        kinds = {*code.ans_entity};

    const bool multi = code.multi_video;
    if (multi && (!inst.synced || inst.videos.size() < 2)) {
        set_why(why, "needs_sync_group");
        return std::nullopt;
    }

    std::vector<OrderEvent> events;
    for (const auto& v : inst.videos) {
        if (!multi && v.video_id != video_id) continue;
        for (EntityKind k : kinds)
            for (const TrueLabel* t : kind_labels(inst, v.video_id, k))
                events.push_back({t->interval.start_s + (multi ? v.sync_offset_s : 0.0), t, &v});
    }
    std::sort(events.begin(), events.end(), [](const OrderEvent& a, const OrderEvent& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.label->id < b.label->id;
    });

    // one event per caption, then enforce a minimum start separation so the
    // ordering is unambiguous
    std::set<std::string> seen;
    std::vector<OrderEvent> separable;
    for (const auto& e : events) {
        if (!seen.insert(normalize_caption(e.label->caption)).second) continue;
        if (!separable.empty() && e.start - separable.back().start < cfg.order_gap_delta_s)
            continue;
        separable.push_back(e);
    }
    const size_t need = static_cast<size_t>(cfg.options_per_question);
    if (separable.size() < need) {
        set_why(why, "insufficient_separable_events");
        return std::nullopt;
    }

    rng.shuffle(separable);
    std::vector<OrderEvent> picked;
    if (multi) {
        // the subset must span at least two videos to be a sync question
        for (size_t i = 0; i < separable.size() && picked.size() < need; ++i) {
            if (picked.size() == need - 1) {
                bool uniform = true;
                for (const auto& p : picked)
                    if (p.video != picked.front().video) uniform = false;
                if (uniform && separable[i].video == picked.front().video) continue;
            }
            picked.push_back(separable[i]);
        }
        if (picked.size() < need) {
            set_why(why, "single_video_events");
            return std::nullopt;
        }
    } else {
        picked.assign(separable.begin(), separable.begin() + static_cast<long>(need));
    }

    const OrderEvent* first = &picked.front();
    for (const auto& e : picked)
        if (e.start < first->start || (e.start == first->start && e.label->id < first->label->id))
            first = &e;

    std::vector<OptionEntry> options;
    for (const auto& e : picked) {
        std::string text = multi
            ? "In Video " + std::to_string(e.video->pov_index) + ": " + e.label->caption
            : e.label->caption;
        const bool correct = e.label == first->label;
        options.push_back({std::move(text), correct, correct ? "true_label" : "permutation",
                           {e.label->id}});
    }

    std::vector<std::string> video_ids;
    if (multi)
        for (const auto& v : inst.videos) video_ids.push_back(v.video_id);
    else
        video_ids = {video_id};
    const std::string seed_path = combo_path(code, multi ? "mv" : video_id);
    StemSlots slots;
    return assemble(inst, code, cfg, seed_path, "", std::move(video_ids), std::nullopt,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, true);
}

std::optional<QuestionItem> povid_impl(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& norm_caption, const GenConfig& cfg,
                                       SplitRng& rng, std::string* why) {
    if (code.form != QuestionForm::PovId)
        throw std::invalid_argument("gen_pov_id needs a POV-ID code");
    if (!inst.synced || inst.videos.size() < 2) {
        set_why(why, "needs_sync_group");
        return std::nullopt;
    }
    const EntityKind ans = *code.ans_entity;
    std::set<std::string> owner_videos;
    std::vector<const TrueLabel*> matching;
    for (const auto& t : inst.true_labels)
        if (t.kind == ans && normalize_caption(t.caption) == norm_caption) {
            owner_videos.insert(t.video_id);
            matching.push_back(&t);
        }
    if (matching.empty()) {
        set_why(why, "unsound_source");
        return std::nullopt;
    }
    if (owner_videos.size() != 1) {
        set_why(why, "cross_video_ambiguous");
        return std::nullopt;
    }
    const std::string owner = *owner_videos.begin();
    std::sort(matching.begin(), matching.end(), [](const TrueLabel* a, const TrueLabel* b) {
        if (a->interval.start_s != b->interval.start_s)
            return a->interval.start_s < b->interval.start_s;
        return a->id < b->id;
    });
    const TrueLabel* earliest = matching.front();

    std::vector<const VideoMeta*> ordered;
    for (const auto& v : inst.videos) ordered.push_back(&v);
    std::sort(ordered.begin(), ordered.end(),
              [](const VideoMeta* a, const VideoMeta* b) { return a->pov_index < b->pov_index; });

    std::vector<OptionEntry> options;
    std::vector<std::string> video_ids;
    std::vector<std::string> sources;
    for (const TrueLabel* m : matching) sources.push_back(m->id);
    std::sort(sources.begin(), sources.end());
    for (const VideoMeta* v : ordered) {
        video_ids.push_back(v->video_id);
        const bool correct = v->video_id == owner;
        options.push_back({"Video " + std::to_string(v->pov_index), correct,
                           correct ? "true_label" : "video_index",
                           correct ? sources : std::vector<std::string>{}});
    }

    const std::string seed_path = combo_path(code, "cap=" + norm_caption);
    StemSlots slots;
    slots.caption = earliest->caption;
    if (is_agent_kind(ans)) slots.other = resolve_other(inst, owner, earliest->actor);
    (void)rng;  // selection is fully determined; options keep video order
    return assemble(inst, code, cfg, seed_path, "", std::move(video_ids), std::nullopt,
                    taxonomy::render_stem(code, slots, registry_of(cfg)), std::move(options),
                    rng, false);
}

}  // namespace

bool is_subtype(std::string_view name) {
    for (const auto& s : kSubtypeNames)
        if (s == name) return true;
    return false;
}

GenConfig GenConfig::defaults() {
    GenConfig cfg;
    cfg.subtype_mix["IDENT"] = {"lexical", "scene", "temporal", "role", "cross_video"};
    return cfg;
}

json GenConfig::to_json() const {
    json mix = json::object();
    for (const auto& [form, subs] : subtype_mix) mix[form] = subs;
    return json{{"min_overlap_s", min_overlap_s},
                {"temporal_margin_eps_s", temporal_margin_eps_s},
                {"order_gap_delta_s", order_gap_delta_s},
                {"options_per_question", options_per_question},
                {"max_per_code", max_per_code},
                {"seed", seed},
                {"subtype_mix", mix}};
}

GenConfig GenConfig::from_json(const json& doc) {
    GenConfig cfg = defaults();
    if (doc.contains("min_overlap_s")) cfg.min_overlap_s = doc["min_overlap_s"].get<double>();
    if (doc.contains("temporal_margin_eps_s"))
        cfg.temporal_margin_eps_s = doc["temporal_margin_eps_s"].get<double>();
    if (doc.contains("order_gap_delta_s"))
        cfg.order_gap_delta_s = doc["order_gap_delta_s"].get<double>();
    if (doc.contains("options_per_question"))
        cfg.options_per_question = doc["options_per_question"].get<int>();
    if (doc.contains("max_per_code")) cfg.max_per_code = doc["max_per_code"].get<int64_t>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("subtype_mix")) {
        cfg.subtype_mix.clear();
        for (const auto& [form, subs] : doc["subtype_mix"].items()) {
            std::vector<std::string> v;
            for (const auto& s : subs) v.push_back(s.get<std::string>());
            cfg.subtype_mix[form] = std::move(v);
        }
    }
    return cfg;
}

TimeInterval build_context_window(const TimeInterval& ref_local, const VideoMeta& video,
                                  bool round_to_seconds) {
    TimeInterval local = ref_local;
    if (round_to_seconds) {
        local.start_s = std::max(0.0, std::floor(local.start_s));
        local.end_s = std::ceil(local.end_s);
        if (local.end_s <= local.start_s) local.end_s = local.start_s + 1.0;
    }
    return local.shifted(video.sync_offset_s);
}

std::vector<OptionEntry> distractor_pool(const AnnotationInstance& inst, const QuestionCode& code,
                                         const std::string& subtype, const Context& ctx,
                                         const GenConfig& cfg) {
    if (!is_subtype(subtype)) throw std::invalid_argument("unknown subtype: " + subtype);
    const VideoMeta* meta = inst.find_video(ctx.video_id);
    if (!meta) throw std::invalid_argument("unknown video id: " + ctx.video_id);
    const EntityKind ans = *code.ans_entity;
    const bool windowed = ctx.window.has_value();
    const TimeInterval local_win = windowed ? to_local(*ctx.window, *meta) : whole_video(*meta);
    const TimeInterval* occ_win = windowed ? &local_win : nullptr;

    std::vector<OptionEntry> pool;
    if (subtype == "lexical" || subtype == "scene") {
        std::vector<const DistractorLabel*> ds;
        for (const auto& d : inst.distractor_labels)
            if (d.video_id == ctx.video_id && d.kind == ans && d.subtype == subtype)
                ds.push_back(&d);
        std::sort(ds.begin(), ds.end(),
                  [](const DistractorLabel* a, const DistractorLabel* b) { return a->id < b->id; });
        for (const DistractorLabel* d : ds)
            if (!caption_occurs(inst, ctx.video_id, ans, normalize_caption(d->caption), occ_win))
                pool.push_back({d->caption, false, subtype, {d->id}});
        return pool;
    }
    if (subtype == "temporal") {
        if (!windowed) return pool;
        for (const TrueLabel* t : kind_labels(inst, ctx.video_id, ans)) {
            const std::string norm = normalize_caption(t->caption);
            bool clear = true;
            for (const auto& u : inst.true_labels)
                if (u.video_id == ctx.video_id && u.kind == ans &&
                    normalize_caption(u.caption) == norm &&
                    interval_gap(u.interval, local_win) < cfg.temporal_margin_eps_s - kTiny) {
                    clear = false;
                    break;
                }
            if (clear) pool.push_back({t->caption, false, subtype, {t->id}});
        }
        return pool;
    }
    if (subtype == "role") {
        if (!windowed) return pool;
        auto swapped = role_swap(ans);
        if (!swapped) return pool;
        for (const TrueLabel* r : kind_labels(inst, ctx.video_id, *swapped))
            if (label_in_window(*r, local_win, cfg.min_overlap_s) &&
                !caption_occurs(inst, ctx.video_id, ans, normalize_caption(r->caption), occ_win))
                pool.push_back({r->caption, false, subtype, {r->id}});
        return pool;
    }
    if (subtype == "cross_video") {
        if (!windowed || !inst.synced || inst.videos.size() < 2) return pool;
        for (const auto& v : inst.videos) {
            if (v.video_id == ctx.video_id) continue;
            for (const TrueLabel* c : kind_labels(inst, v.video_id, ans)) {
                TimeInterval shared = c->interval.shifted(v.sync_offset_s);
                bool eligible = shared.length() < kPointEps
                    ? (shared.midpoint() >= ctx.window->start_s - kTiny &&
                       shared.midpoint() <= ctx.window->end_s + kTiny)
                    : interval_overlap(shared, *ctx.window) >= cfg.min_overlap_s - kTiny;
                if (eligible &&
                    !caption_occurs(inst, ctx.video_id, ans, normalize_caption(c->caption),
                                    nullptr))
                    pool.push_back({c->caption, false, subtype, {c->id}});
            }
        }
        return pool;
    }
    // count_offset / permutation / video_index / time_window / intent are
    // constructed by their question families, not drawn from label pools
    return pool;
}

std::optional<std::vector<OptionEntry>> select_distractors(
    const AnnotationInstance& inst, const QuestionCode& code, const std::string& subtype,
    const Context& ctx, const std::string& answer_text, int k, const GenConfig& cfg,
    SplitRng& rng) {
    auto pool = distractor_pool(inst, code, subtype, ctx, cfg);
    rng.shuffle(pool);
    std::set<std::string> used = {normalize_caption(answer_text)};
    std::vector<OptionEntry> picked;
    for (auto& cand : pool) {
        if (static_cast<int>(picked.size()) == k) break;
        if (used.insert(normalize_caption(cand.text)).second) picked.push_back(std::move(cand));
    }
    if (static_cast<int>(picked.size()) < k) return std::nullopt;
    return picked;
}

std::optional<QuestionItem> instantiate_choice(const AnnotationInstance& inst,
                                               const QuestionCode& code, const Context& ctx,
                                               const GenConfig& cfg, SplitRng& rng) {
    return choice_impl(inst, code, ctx, cfg, rng, nullptr);
}

std::optional<QuestionItem> instantiate_exist(const AnnotationInstance& inst,
                                              const QuestionCode& code, const std::string& variant,
                                              const Context& ctx, const GenConfig& cfg,
                                              SplitRng& rng) {
    return exist_impl(inst, code, variant, ctx, cfg, rng, nullptr);
}

std::optional<QuestionItem> gen_count(const AnnotationInstance& inst, const QuestionCode& code,
                                      const std::vector<std::string>& member_ids,
                                      const GenConfig& cfg, SplitRng& rng) {
    return count_impl(inst, code, member_ids, cfg, rng, nullptr);
}

std::optional<QuestionItem> gen_intent(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& label_id, const GenConfig& cfg,
                                       SplitRng& rng) {
    return intent_impl(inst, code, label_id, cfg, rng, nullptr);
}

std::optional<QuestionItem> gen_time_localization(const AnnotationInstance& inst,
                                                  const QuestionCode& code,
                                                  const std::string& label_id, const GenConfig& cfg,
                                                  SplitRng& rng) {
    return time_impl(inst, code, label_id, cfg, rng, nullptr);
}

std::optional<QuestionItem> gen_order(const AnnotationInstance& inst, const QuestionCode& code,
                                      const std::string& video_id, const GenConfig& cfg,
                                      SplitRng& rng) {
    return order_impl(inst, code, video_id, cfg, rng, nullptr);
}

std::optional<QuestionItem> gen_pov_id(const AnnotationInstance& inst, const QuestionCode& code,
                                       const std::string& norm_caption, const GenConfig& cfg,
                                       SplitRng& rng) {
    return povid_impl(inst, code, norm_caption, cfg, rng, nullptr);
}

// ---------------------------------------------------------------------------
// full enumeration

namespace {

using CodeStats = GenerationStats::CodeStats;

struct Enumeration {
    const AnnotationInstance& inst;
    const GenConfig& cfg;
    GenerateResult& out;

    template <typename Fn>
    void attempt(const QuestionCode& code, const std::string& key, Fn&& fn) {
        CodeStats& cs = out.stats.per_code[code.raw];
        ++cs.enumerated;
        if (cfg.max_per_code > 0 && cs.emitted >= cfg.max_per_code) {
            ++cs.skipped;
            ++cs.skip_reasons["code_cap"];
            return;
        }
        SplitRng rng(cfg.seed, combo_path(code, key));
        std::string why;
        std::optional<QuestionItem> item = fn(rng, &why);
        if (item) {
            out.items.push_back(std::move(*item));
            ++cs.emitted;
        } else {
            ++cs.skipped;
            ++cs.skip_reasons[why.empty() ? "unknown" : why];
        }
    }

    void simple_ident(const QuestionCode& code) {
        for (const auto& v : inst.videos)
            for (const TrueLabel* t : kind_labels(inst, v.video_id, *code.ans_entity)) {
                Context ctx;
                ctx.video_id = v.video_id;
                ctx.answer_label_id = t->id;
                attempt(code, ctx_key(ctx), [&](SplitRng& rng, std::string* why) {
                    return choice_impl(inst, code, ctx, cfg, rng, why);
                });
            }
    }

    void simple_exist(const QuestionCode& code) {
        for (const auto& v : inst.videos) {
            for (const TrueLabel* t : kind_labels(inst, v.video_id, *code.ans_entity)) {
                Context ctx;
                ctx.video_id = v.video_id;
                ctx.source_hint_id = t->id;
                attempt(code, ctx_key(ctx) + "/true", [&](SplitRng& rng, std::string* why) {
                    return exist_impl(inst, code, "true", ctx, cfg, rng, why);
                });
            }
            for (const char* subtype : {"lexical", "scene"}) {
                std::vector<const DistractorLabel*> ds;
                for (const auto& d : inst.distractor_labels)
                    if (d.video_id == v.video_id && d.kind == *code.ans_entity &&
                        d.subtype == subtype)
                        ds.push_back(&d);
                std::sort(ds.begin(), ds.end(), [](const DistractorLabel* a,
                                                   const DistractorLabel* b) {
                    return a->id < b->id;
                });
                for (const DistractorLabel* d : ds) {
                    Context ctx;
                    ctx.video_id = v.video_id;
                    ctx.source_hint_id = d->id;
                    attempt(code, ctx_key(ctx) + "/" + subtype,
                            [&](SplitRng& rng, std::string* why) {
                                return exist_impl(inst, code, subtype, ctx, cfg, rng, why);
                            });
                }
            }
        }
    }

    void simple_absent(const QuestionCode& code) {
        for (const auto& v : inst.videos) {
            std::vector<const DistractorLabel*> ds;
            for (const auto& d : inst.distractor_labels)
                if (d.video_id == v.video_id && d.kind == *code.ans_entity) ds.push_back(&d);
            std::sort(ds.begin(), ds.end(),
                      [](const DistractorLabel* a, const DistractorLabel* b) {
                          return a->id < b->id;
                      });
            for (const DistractorLabel* d : ds) {
                Context ctx;
                ctx.video_id = v.video_id;
                ctx.answer_distractor_id = d->id;
                attempt(code, ctx_key(ctx), [&](SplitRng& rng, std::string* why) {
                    return choice_impl(inst, code, ctx, cfg, rng, why);
                });
            }
        }
    }

    void counts(const QuestionCode& code) {
        const EntityKind ans = *code.ans_entity;
        for (const auto& v : inst.videos) {
            if (ans == EntityKind::WO) {
                for (const TrueLabel* t : kind_labels(inst, v.video_id, ans))
                    if (t->quantity)
                        attempt(code, v.video_id + "/count=" + t->id,
                                [&](SplitRng& rng, std::string* why) {
                                    return count_impl(inst, code, {t->id}, cfg, rng, why);
                                });
                continue;
            }
            // recurrence groups: explicit key, else the caption itself
            std::map<std::string, std::vector<const TrueLabel*>> groups;
            for (const TrueLabel* t : kind_labels(inst, v.video_id, ans))
                groups[t->group_key ? *t->group_key : "cap:" + normalize_caption(t->caption)]
                    .push_back(t);
            std::vector<std::pair<double, std::string>> order;
            for (const auto& [key, members] : groups)
                if (members.size() >= 2)
                    order.emplace_back(members.front()->interval.start_s, key);
            std::sort(order.begin(), order.end());
            for (const auto& [start, key] : order) {
                std::vector<std::string> ids;
                for (const TrueLabel* m : groups[key]) ids.push_back(m->id);
                attempt(code, v.video_id + "/count=" + join_ids(ids),
                        [&](SplitRng& rng, std::string* why) {
                            return count_impl(inst, code, ids, cfg, rng, why);
                        });
            }
        }
    }

    void intents(const QuestionCode& code) {
        for (const auto& v : inst.videos)
            for (const TrueLabel* t : kind_labels(inst, v.video_id, *code.ans_entity))
                if (t->intent)
                    attempt(code, v.video_id + "/" + t->id, [&](SplitRng& rng, std::string* why) {
                        return intent_impl(inst, code, t->id, cfg, rng, why);
                    });
    }

    void times(const QuestionCode& code) {
        for (const auto& v : inst.videos)
            for (const TrueLabel* t : kind_labels(inst, v.video_id, *code.ans_entity))
                attempt(code, v.video_id + "/" + t->id, [&](SplitRng& rng, std::string* why) {
                    return time_impl(inst, code, t->id, cfg, rng, why);
                });
    }

    void orders(const QuestionCode& code) {
        if (code.multi_video) {
            if (!inst.synced || inst.videos.size() < 2) return;
            attempt(code, "mv", [&](SplitRng& rng, std::string* why) {
                return order_impl(inst, code, "", cfg, rng, why);
            });
            return;
        }
        for (const auto& v : inst.videos)
            attempt(code, v.video_id, [&](SplitRng& rng, std::string* why) {
                return order_impl(inst, code, v.video_id, cfg, rng, why);
            });
    }

    void pov_ids(const QuestionCode& code) {
        if (!inst.synced || inst.videos.size() < 2) return;
        std::set<std::string> captions;
        for (const auto& t : inst.true_labels)
            if (t.kind == *code.ans_entity) captions.insert(normalize_caption(t.caption));
        for (const auto& norm : captions)
            attempt(code, "cap=" + norm, [&](SplitRng& rng, std::string* why) {
                return povid_impl(inst, code, norm, cfg, rng, why);
            });
    }

    void windowed_forms(const QuestionCode& code, const Context& base) {
        if (code.form == QuestionForm::Ident || code.form == QuestionForm::Absent) {
            attempt(code, ctx_key(base), [&](SplitRng& rng, std::string* why) {
                return choice_impl(inst, code, base, cfg, rng, why);
            });
            return;
        }
        std::vector<std::string> variants = {"true", "lexical", "scene", "temporal"};
        if (role_swap(*code.ans_entity)) variants.push_back("role");
        if (base.ref_video_id) variants.push_back("cross_video");
        for (const auto& variant : variants)
            attempt(code, ctx_key(base) + "/" + variant, [&](SplitRng& rng, std::string* why) {
                return exist_impl(inst, code, variant, base, cfg, rng, why);
            });
    }

    void entity_ref(const QuestionCode& code) {
        for (const auto& v : inst.videos)
            for (const TrueLabel* anchor : kind_labels(inst, v.video_id, *code.ref_entity)) {
                Context ctx;
                ctx.video_id = v.video_id;
                ctx.window = build_context_window(anchor->interval, v);
                ctx.anchor_ids = {anchor->id};
                ctx.ref_caption = anchor->caption;
                ctx.ref_actor = anchor->actor;
                windowed_forms(code, ctx);
            }
    }

    void timestamp_ref(const QuestionCode& code) {
        for (const auto& v : inst.videos)
            for (const TrueLabel* anchor : kind_labels(inst, v.video_id, *code.ans_entity)) {
                Context ctx;
                ctx.video_id = v.video_id;
                ctx.window = build_context_window(anchor->interval, v, /*round=*/true);
                ctx.display_window = to_local(*ctx.window, v);
                ctx.anchor_ids = {anchor->id};
                windowed_forms(code, ctx);
            }
    }

    void sync_ref(const QuestionCode& code) {
        if (!inst.synced || inst.videos.size() < 2) return;
        for (const auto& vr : inst.videos)
            for (const auto& va : inst.videos) {
                if (vr.video_id == va.video_id) continue;
                for (const TrueLabel* anchor : kind_labels(inst, vr.video_id, *code.ref_entity)) {
                    Context ctx;
                    ctx.video_id = va.video_id;
                    ctx.ref_video_id = vr.video_id;
                    ctx.window = build_context_window(anchor->interval, vr);
                    ctx.anchor_ids = {anchor->id};
                    ctx.ref_caption = anchor->caption;
                    ctx.ref_actor = anchor->actor;
                    ctx.video_indices = {vr.pov_index, va.pov_index};
                    windowed_forms(code, ctx);
                }
            }
    }

    void run(const QuestionCode& code) {
        if (code.form == QuestionForm::PovId) return pov_ids(code);
        if (code.form == QuestionForm::Order) return orders(code);
        if (code.multi_video) return sync_ref(code);
        if (code.ref_timestamp) return timestamp_ref(code);
        if (code.ref_entity) return entity_ref(code);
        switch (code.form) {
            case QuestionForm::Ident: return simple_ident(code);
            case QuestionForm::Exist: return simple_exist(code);
            case QuestionForm::Absent: return simple_absent(code);
            case QuestionForm::Count: return counts(code);
            case QuestionForm::Intent: return intents(code);
            case QuestionForm::Time: return times(code);
            default: break;
        }
    }
};

}  // namespace

int64_t GenerationStats::total_enumerated() const {
    int64_t n = 0;
    for (const auto& [code, cs] : per_code) n += cs.enumerated;
    return n;
}

int64_t GenerationStats::total_emitted() const {
    int64_t n = 0;
    for (const auto& [code, cs] : per_code) n += cs.emitted;
    return n;
}

int64_t GenerationStats::total_skipped() const {
    int64_t n = 0;
    for (const auto& [code, cs] : per_code) n += cs.skipped;
    return n;
}

json GenerationStats::to_json() const {
    json codes = json::object();
    for (const auto& [code, cs] : per_code) {
        json reasons = json::object();
        for (const auto& [reason, n] : cs.skip_reasons) reasons[reason] = n;
        codes[code] = json{{"enumerated", cs.enumerated},
                           {"emitted", cs.emitted},
                           {"skipped", cs.skipped},
                           {"skip_reasons", reasons}};
    }
    return json{{"per_code", codes},
                {"total_enumerated", total_enumerated()},
                {"total_emitted", total_emitted()},
                {"total_skipped", total_skipped()}};
}

GenerateResult generate_all(const AnnotationInstance& inst, const GenConfig& cfg) {
    auto violations = validate_instance(inst);
    if (!violations.empty()) throw ValidationError(std::move(violations));

    GenerateResult out;
    Enumeration en{inst, cfg, out};
    for (const auto& raw : registry_of(cfg).all_codes()) en.run(taxonomy::parse_code(raw));

    std::sort(out.items.begin(), out.items.end(),
              [](const QuestionItem& a, const QuestionItem& b) { return a.id < b.id; });
    for (size_t i = 1; i < out.items.size(); ++i)
        if (out.items[i].id == out.items[i - 1].id)
            throw std::logic_error("duplicate item id: " + out.items[i].id);
    return out;
}

// ---------------------------------------------------------------------------
// serialization

json item_to_json(const QuestionItem& item) {
    json options = json::array();
    for (const auto& o : item.options) {
        json src = json::array();
        for (const auto& s : o.source_ids) src.push_back(s);
        options.push_back(json{{"text", o.text},
                               {"is_correct", o.is_correct},
                               {"provenance", o.provenance},
                               {"source_ids", src}});
    }
    json videos = json::array();
    for (const auto& v : item.video_ids) videos.push_back(v);
    json doc{{"id", item.id},
             {"instance_id", item.instance_id},
             {"video_ids", videos},
             {"code", item.code},
             {"stem", item.stem},
             {"options", options},
             {"answer_index", item.answer_index},
             {"variant", item.variant},
             {"seed_path", item.seed_path}};
    if (item.context_window)
        doc["context_window"] =
            json{{"start_s", item.context_window->start_s}, {"end_s", item.context_window->end_s}};
    return doc;
}

QuestionItem item_from_json(const json& doc) {
    QuestionItem item;
    item.id = doc.at("id").get<std::string>();
    item.instance_id = doc.at("instance_id").get<std::string>();
    for (const auto& v : doc.at("video_ids")) item.video_ids.push_back(v.get<std::string>());
    item.code = doc.at("code").get<std::string>();
    item.stem = doc.at("stem").get<std::string>();
    for (const auto& o : doc.at("options")) {
        OptionEntry e;
        e.text = o.at("text").get<std::string>();
        e.is_correct = o.at("is_correct").get<bool>();
        e.provenance = o.at("provenance").get<std::string>();
        if (o.contains("source_ids"))
            for (const auto& s : o["source_ids"]) e.source_ids.push_back(s.get<std::string>());
        item.options.push_back(std::move(e));
    }
    item.answer_index = doc.at("answer_index").get<int>();
    if (doc.contains("variant")) item.variant = doc["variant"].get<std::string>();
    if (doc.contains("seed_path")) item.seed_path = doc["seed_path"].get<std::string>();
    if (doc.contains("context_window"))
        item.context_window = TimeInterval{doc["context_window"].at("start_s").get<double>(),
                                           doc["context_window"].at("end_s").get<double>()};
    return item;
}

}  // namespace povqa::gen
