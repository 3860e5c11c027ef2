#pragma once

// Hand-built annotation instances with fully known contents, plus small file
// helpers shared by the test binaries.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"
#include "povqa/generator.hpp"

namespace fixtures {

using povqa::AnnotationInstance;
using povqa::DistractorLabel;
using povqa::EntityKind;
using povqa::TimeInterval;
using povqa::TrueLabel;
using povqa::VideoMeta;

inline VideoMeta vm(std::string id, std::string game, double duration, int64_t pov,
                    double offset) {
    VideoMeta v;
    v.video_id = std::move(id);
    v.game = std::move(game);
    v.duration_s = duration;
    v.pov_index = pov;
    v.sync_offset_s = offset;
    return v;
}

inline TrueLabel tl(std::string id, std::string video, EntityKind kind, std::string caption,
                    double start, double end) {
    TrueLabel t;
    t.id = std::move(id);
    t.video_id = std::move(video);
    t.kind = kind;
    t.caption = std::move(caption);
    t.interval = {start, end};
    return t;
}

inline TrueLabel actor(TrueLabel t, std::string name) {
    t.actor = std::move(name);
    return t;
}

inline TrueLabel intent(TrueLabel t, std::string why, std::vector<std::string> alts) {
    t.intent = std::move(why);
    t.intent_distractors = std::move(alts);
    return t;
}

inline TrueLabel quantity(TrueLabel t, int64_t n) {
    t.quantity = n;
    return t;
}

inline DistractorLabel dl(std::string id, std::string video, EntityKind kind,
                          std::string caption, std::string subtype,
                          std::optional<TimeInterval> interval = std::nullopt,
                          std::optional<std::string> source = std::nullopt) {
    DistractorLabel d;
    d.id = std::move(id);
    d.video_id = std::move(video);
    d.kind = kind;
    d.caption = std::move(caption);
    d.subtype = std::move(subtype);
    d.interval = interval;
    d.source_label = std::move(source);
    return d;
}

// Two synced POVs of one mining session.  Label placement is chosen so that
// every question family has at least one reachable combination and several
// counts/answers can be asserted exactly:
//   - "mine the iron ore" recurs on video v1 (count 2) and also appears as an
//     OTHER-agent action on v2, exercising kind-scoped ownership
//   - "cave collapse" happens on both videos (ownership is ambiguous)
//   - v1 carries three SA crafted distractors (exactly enough for one
//     identification question), v2 only two (one short)
inline AnnotationInstance two_pov_instance() {
    AnnotationInstance inst;
    inst.instance_id = "fx-two-pov";
    inst.synced = true;
    inst.videos = {vm("fx-two-pov-v1", "stonevale", 60.0, 1, 0.0),
                   vm("fx-two-pov-v2", "stonevale", 50.0, 2, 5.0)};

    inst.true_labels = {
        intent(tl("a1", "fx-two-pov-v1", EntityKind::SA, "mine the iron ore", 2.0, 6.0),
               "collect iron for tools",
               {"escape from a creeper", "light up the cave", "build a shelter"}),
        tl("a2", "fx-two-pov-v1", EntityKind::SA, "craft a stone pickaxe", 10.0, 12.0),
        tl("a3", "fx-two-pov-v1", EntityKind::SA, "mine the iron ore", 20.0, 24.0),
        tl("a4", "fx-two-pov-v1", EntityKind::SA, "jump across the gap", 30.0, 30.05),
        tl("a5", "fx-two-pov-v1", EntityKind::SA, "bridge across the ravine", 50.0, 53.0),
        tl("b1", "fx-two-pov-v1", EntityKind::SS, "holding a torch", 0.5, 8.0),
        tl("b2", "fx-two-pov-v1", EntityKind::SS, "low hunger", 35.0, 40.0),
        actor(tl("c1", "fx-two-pov-v1", EntityKind::OA, "attack the zombie", 15.0, 18.0), "Rega"),
        intent(actor(tl("c2", "fx-two-pov-v1", EntityKind::OA, "wave at the camera", 44.0, 46.0), "Rega"),
               "signal a greeting", {"ask for food", "warn about danger", "celebrate a win"}),
        actor(tl("d1", "fx-two-pov-v1", EntityKind::OS, "low on health", 16.0, 19.0), "Rega"),
        quantity(tl("e1", "fx-two-pov-v1", EntityKind::WO, "iron ore vein", 2.0, 7.0), 3),
        tl("e2", "fx-two-pov-v1", EntityKind::WO, "oak sapling", 28.0, 29.0),
        tl("f1", "fx-two-pov-v1", EntityKind::WE, "cave collapse", 25.0, 27.0),
        tl("f2", "fx-two-pov-v1", EntityKind::WE, "rain starts", 40.0, 44.0),

        tl("g1", "fx-two-pov-v2", EntityKind::SA, "place a torch on the wall", 3.0, 5.0),
        tl("g2", "fx-two-pov-v2", EntityKind::SA, "smelt the iron", 20.0, 23.0),
        actor(tl("h1", "fx-two-pov-v2", EntityKind::OA, "mine the iron ore", 1.0, 4.0), "Finn"),
        tl("i1", "fx-two-pov-v2", EntityKind::SS, "sprinting", 10.0, 15.0),
        tl("j1", "fx-two-pov-v2", EntityKind::WE, "cave collapse", 12.0, 14.0),
        quantity(tl("k1", "fx-two-pov-v2", EntityKind::WO, "oak planks", 20.0, 22.0), 5),
        actor(tl("l1", "fx-two-pov-v2", EntityKind::OS, "wearing iron armor", 6.0, 12.0), "Finn"),
    };

    inst.distractor_labels = {
        dl("dx1", "fx-two-pov-v1", EntityKind::SA, "mine the gold ore", "lexical", TimeInterval{2.0, 6.0},
           "a1"),
        dl("dx2", "fx-two-pov-v1", EntityKind::SA, "shear the sheep", "scene"),
        dl("dx3", "fx-two-pov-v1", EntityKind::SA, "brew a potion", "scene"),
        dl("dx4", "fx-two-pov-v1", EntityKind::WE, "cave flood", "lexical", TimeInterval{25.0, 27.0}, "f1"),
        dl("dx5", "fx-two-pov-v1", EntityKind::WO, "ender chest", "scene"),
        dl("dx6", "fx-two-pov-v1", EntityKind::OA, "trade with the villager", "scene"),
        dl("dx7", "fx-two-pov-v1", EntityKind::SS, "holding a shield", "lexical", TimeInterval{0.5, 8.0},
           "b1"),
        dl("dx8", "fx-two-pov-v1", EntityKind::OS, "fully healed", "scene"),
        dl("dx9", "fx-two-pov-v1", EntityKind::WE, "thunder rolls", "scene"),
        dl("dx10", "fx-two-pov-v1", EntityKind::WO, "copper ore vein", "lexical", TimeInterval{2.0, 7.0},
           "e1"),
        dl("dx11", "fx-two-pov-v1", EntityKind::OA, "attack the skeleton", "lexical",
           TimeInterval{15.0, 18.0}, "c1"),
        dl("dx12", "fx-two-pov-v1", EntityKind::SS, "swimming", "scene"),

        dl("dy1", "fx-two-pov-v2", EntityKind::SA, "brew a potion", "scene"),
        dl("dy2", "fx-two-pov-v2", EntityKind::SA, "place a torch on the floor", "lexical",
           TimeInterval{3.0, 5.0}, "g1"),
        dl("dy3", "fx-two-pov-v2", EntityKind::WE, "lava flow", "scene"),
        dl("dy4", "fx-two-pov-v2", EntityKind::OA, "ride a horse", "scene"),
        dl("dy5", "fx-two-pov-v2", EntityKind::WO, "crafting table", "scene"),
        dl("dy6", "fx-two-pov-v2", EntityKind::OS, "on fire", "scene"),
        dl("dy7", "fx-two-pov-v2", EntityKind::SS, "crouching", "scene"),
    };
    return inst;
}

// Two synced POVs with four self actions on a shared clock.  The earliest
// event on the shared clock lives in video 2: local 2s + offset 10s = 12s,
// ahead of video 1's 15s event.
inline AnnotationInstance order_mv_instance() {
    AnnotationInstance inst;
    inst.instance_id = "fx-order-mv";
    inst.synced = true;
    inst.videos = {vm("fx-order-mv-w1", "stonevale", 40.0, 1, 0.0),
                   vm("fx-order-mv-w2", "stonevale", 30.0, 2, 10.0)};
    inst.true_labels = {
        tl("o1", "fx-order-mv-w1", EntityKind::SA, "open the gate", 15.0, 17.0),
        tl("o2", "fx-order-mv-w1", EntityKind::SA, "draw the bow", 25.0, 26.0),
        tl("o3", "fx-order-mv-w2", EntityKind::SA, "light the beacon", 2.0, 4.0),
        tl("o4", "fx-order-mv-w2", EntityKind::SA, "drop the shield", 18.0, 19.0),
    };
    return inst;
}

// One video with a recurring world event ("a wither skeleton spawns" at
// [10,12] and [40,42]); any time question about either occurrence must keep
// its wrong windows at least the temporal margin away from both.
inline AnnotationInstance time_decoy_instance() {
    AnnotationInstance inst;
    inst.instance_id = "fx-time-decoys";
    inst.synced = false;
    inst.videos = {vm("fx-time-decoys-x1", "stonevale", 60.0, 1, 0.0)};
    inst.true_labels = {
        tl("s1", "fx-time-decoys-x1", EntityKind::WE, "a wither skeleton spawns", 10.0, 12.0),
        tl("s2", "fx-time-decoys-x1", EntityKind::WE, "a wither skeleton spawns", 40.0, 42.0),
    };
    return inst;
}

// ---------------------------------------------------------------------------
// file helpers

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("povqa-tests-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_items_jsonl(const std::string& path,
                              const std::vector<povqa::gen::QuestionItem>& items) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& item : items) out << povqa::canonical_line(povqa::gen::item_to_json(item));
}

inline std::vector<povqa::gen::QuestionItem> read_items_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<povqa::gen::QuestionItem> items;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        povqa::json doc = povqa::json::parse(line);
        if (doc.contains("_manifest")) continue;
        items.push_back(povqa::gen::item_from_json(doc));
    }
    return items;
}

}  // namespace fixtures
